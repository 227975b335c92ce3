"""JSON file formats for Hamiltonians, states, unitaries and reports."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .errors import NonHermitianError

log = logging.getLogger(__name__)

STATE_RENORM_TOL = 1e-6
STATE_EXACT_TOL = 1e-12


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def _load(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    return data


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def hamiltonian_from_dict(data: dict) -> np.ndarray:
    """Dense matrix from ``{"n": qubits, "entries": [[j, k, re, im], ...]}``.

    Entries with ``j <= k`` suffice; ``(k, j)`` is filled by conjugation. A
    listed lower-triangle entry must match the conjugate of its partner.
    """
    try:
        n = int(data["n"])
        entries = data["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"hamiltonian needs 'n' and 'entries': {exc}") from exc
    if n < 0 or n > 10:
        raise InputError(f"qubit count {n} out of range")
    size = 2**n
    m = np.zeros((size, size), dtype=complex)
    seen: set[tuple[int, int]] = set()
    for item in entries:
        try:
            j, k, re, im = item
            j, k = int(j), int(k)
            value = complex(float(re), float(im))
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad entry {item!r}") from exc
        if not (0 <= j < size and 0 <= k < size):
            raise InputError(f"entry ({j}, {k}) out of range for N={size}")
        if (j, k) in seen:
            raise InputError(f"duplicate entry ({j}, {k})")
        seen.add((j, k))
        if j == k and value.imag != 0.0:
            raise NonHermitianError(f"diagonal entry ({j}, {j}) has imaginary part {value.imag}")
        if (k, j) in seen and j != k:
            partner = m[j, k]
            if abs(partner - value) > 1e-12 * max(abs(value), abs(partner), 1.0):
                raise NonHermitianError(f"entries ({j}, {k}) and ({k}, {j}) are not conjugate")
        m[j, k] = value
        if (k, j) not in seen:
            m[k, j] = value.conjugate()
    return m


def hamiltonian_to_dict(m: np.ndarray) -> dict:
    size = m.shape[0]
    n = size.bit_length() - 1
    entries = [
        [j, k, float(m[j, k].real), float(m[j, k].imag)]
        for j in range(size)
        for k in range(j, size)
        if m[j, k] != 0
    ]
    return {"n": n, "entries": entries}


def read_hamiltonian(path) -> np.ndarray:
    return hamiltonian_from_dict(_load(path))


def write_hamiltonian(m: np.ndarray, path) -> None:
    _dump(hamiltonian_to_dict(m), path)


def read_state(path, renormalize: bool = True) -> np.ndarray:
    """Amplitudes from ``{"amplitudes": [[re, im], ...]}``.

    Norms within 1e-12 of one are kept bit for bit; within 1e-6 they are
    renormalised with a warning unless ``renormalize`` is False; anything
    else is rejected.
    """
    data = _load(path)
    try:
        amps = np.array([complex(float(re), float(im)) for re, im in data["amplitudes"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad state file {path}: {exc}") from exc
    if amps.size == 0 or not np.all(np.isfinite(amps)):
        raise InputError("state must have finite amplitudes")
    dev = abs(np.linalg.norm(amps) - 1.0)
    if dev <= STATE_EXACT_TOL:
        return amps
    if dev <= STATE_RENORM_TOL and renormalize:
        log.warning("state norm off by %.2e; renormalising", dev)
        return amps / np.linalg.norm(amps)
    raise InputError(f"state norm deviates from 1 by {dev:.2e}")


def write_state(amps: np.ndarray, path) -> None:
    _dump({"amplitudes": [[float(a.real), float(a.imag)] for a in np.asarray(amps, dtype=complex)]}, path)


def read_matrix(path) -> np.ndarray:
    """Square complex matrix from ``{"rows": [[[re, im], ...], ...]}``."""
    data = _load(path)
    try:
        m = np.array([[complex(float(re), float(im)) for re, im in row] for row in data["rows"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad matrix file {path}: {exc}") from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError("matrix must be square")
    return m


def write_matrix(m: np.ndarray, path) -> None:
    _dump({"rows": [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]}, path)


def emit(obj, path=None) -> str:
    """Serialise a report; write it to ``path`` if given, and return the text."""
    text = json.dumps(obj, indent=2, default=_jsonable)
    if path:
        Path(path).write_text(text + "\n")
    return text


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serialisable: {type(o)}")
