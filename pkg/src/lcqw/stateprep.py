"""Row-state preparation from the row trees.

For row ``j`` the target state on (column, flag) is

    (1/sqrt(lam)) * sum_k |k> (sqrt_conj(H_jk)|0> + sqrt((lam - sigma_j)/N)|1>)

Two routes produce it: a direct amplitude constructor and a rotation cascade
that descends the tree one level at a time, optionally rounding every angle to
``b`` bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .rowtree import RowTreeArray


@dataclass(frozen=True)
class RegisterState:
    """Amplitudes over a named tensor-product layout (first register is most significant)."""

    amplitudes: np.ndarray
    layout: tuple[tuple[str, int], ...]

    def __post_init__(self):
        dims = [d for _, d in self.layout]
        if any(d <= 0 for d in dims):
            raise ValueError("register dimensions must be positive")
        if int(np.prod(dims)) != self.amplitudes.size:
            raise ValueError(f"layout {self.layout} does not match {self.amplitudes.size} amplitudes")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape([d for _, d in self.layout])


@dataclass(frozen=True)
class PrecisionConfig:
    """Angle precision; ``bits=None`` means exact angles."""

    bits: int | None = None

    def __post_init__(self):
        if self.bits is not None and self.bits < 2:
            raise ValueError("finite precision needs at least 2 bits")

    def quantize(self, angle: float) -> float:
        if self.bits is None:
            return angle
        step = 2.0 * math.pi * 2.0 ** (-self.bits)
        # np.round is round-half-even
        return float(np.round(angle / step) * step)


EXACT = PrecisionConfig()


def sqrt_conj(c: complex, mirror: bool = False) -> complex:
    """Square root of ``conj(c)`` on the branch paired with the forward root.

    With ``c = r e^{i phi}``, ``phi`` in ``(-pi, pi]``, returns
    ``sqrt(r) e^{-i phi / 2}``; a negative real gives ``-i sqrt(r)``.

    ``mirror=True`` takes ``phi`` in ``[-pi, pi)`` instead, which only changes
    negative reals (to ``+i sqrt(r)``). Entries strictly below the diagonal
    use it: ``H_kj = conj(H_jk)``, so with a single branch the two mirrored
    leaves of a negative real pair would multiply to ``+r`` in the walk's
    block instead of ``-r``.
    """
    c = complex(c)
    r = abs(c)
    if r == 0.0:
        return 0j
    # signed zero in the imaginary part would flip atan2 onto -pi
    phi = math.atan2(c.imag + 0.0, c.real)
    if mirror and phi == math.pi:
        phi = -math.pi
    return math.sqrt(r) * complex(math.cos(-phi / 2), math.sin(-phi / 2))


def _leaf_amplitude(ds: RowTreeArray, j: int, k: int) -> complex:
    return sqrt_conj(np.conj(ds.leaves[j, k]), mirror=k < j)


def _check_row(ds: RowTreeArray, j: int) -> tuple[float, float]:
    if not ds.sealed:
        raise StructureError("structure is not sealed")
    if not 0 <= j < ds.dim:
        raise StructureError(f"row {j} out of range")
    sigma, slack = ds.root(j) if ds.depth else (abs(ds.leaves[j, 0]), ds.slacks[0][j, 0])
    if sigma > ds.lam * (1 + 1e-12):
        raise StructureError(f"row {j}: sigma {sigma} exceeds lambda {ds.lam}")
    return sigma, slack


def prepare_row_state_direct(ds: RowTreeArray, j: int) -> RegisterState:
    """Closed-form row state on layout ``[(col, N), (flag, 2)]``."""
    _check_row(ds, j)
    size = ds.dim
    amps = np.empty((size, 2), dtype=complex)
    scale = 1.0 / math.sqrt(ds.lam)
    for k in range(size):
        amps[k, 0] = _leaf_amplitude(ds, j, k) * scale
    amps[:, 1] = math.sqrt(ds.slacks[-1][j, 0]) * scale
    return RegisterState(amps.reshape(-1), (("col", size), ("flag", 2)))


def conditional_rotation(theta: float, phi0: float, phi1: float, cfg: PrecisionConfig = EXACT) -> np.ndarray:
    """2x2 unitary sending |0> to ``e^{i phi0} cos(theta)|0> + e^{i phi1} sin(theta)|1>``."""
    theta, phi0, phi1 = (cfg.quantize(a) for a in (theta, phi0, phi1))
    c, s = math.cos(theta), math.sin(theta)
    e0, e1 = np.exp(1j * phi0), np.exp(1j * phi1)
    return np.array([[e0 * c, -e0 * s], [e1 * s, e1 * c]], dtype=complex)


def _split_angle(w_left: float, w_right: float) -> float:
    if w_left <= 0.0 and w_right <= 0.0:
        return 0.0
    return math.atan2(math.sqrt(max(w_right, 0.0)), math.sqrt(max(w_left, 0.0)))


def _leaf_phase(ds: RowTreeArray, j: int, k: int) -> float:
    a = _leaf_amplitude(ds, j, k)
    return math.atan2(a.imag, a.real) if a != 0 else 0.0


def prepare_row_state_cascade(ds: RowTreeArray, j: int, cfg: PrecisionConfig = EXACT) -> RegisterState:
    """Row state built by descending tree ``j`` with conditional rotations.

    The root tuple sets the flag qubit. Each level then rotates the next
    column qubit, conditioned on the flag and the path so far, by the angle
    splitting the two child tuples (magnitudes on flag 0, slack on flag 1).
    The last level carries the leaf phases as the two phase arguments of the
    rotation; flag-1 branches get zero phase.
    """
    sigma, slack = _check_row(ds, j)
    n, size = ds.depth, ds.dim

    # amp[path, flag]: path indexes the column qubits fixed so far
    root_theta = _split_angle(sigma, slack)
    if n == 0:
        u = conditional_rotation(root_theta, _leaf_phase(ds, j, 0), 0.0, cfg)
    else:
        u = conditional_rotation(root_theta, 0.0, 0.0, cfg)
    amp = u[:, 0].reshape(1, 2).astype(complex)

    for level in range(n):
        nxt = np.zeros((2 ** (level + 1), 2), dtype=complex)
        last = level == n - 1
        for idx in range(2**level):
            left, right = 2 * idx, 2 * idx + 1
            if last:
                w0 = (abs(ds.leaves[j, left]), abs(ds.leaves[j, right]))
                phases = (_leaf_phase(ds, j, left), _leaf_phase(ds, j, right))
            else:
                w0 = (ds.mags[level + 1][j, left], ds.mags[level + 1][j, right])
                phases = (0.0, 0.0)
            w1 = (ds.slacks[level + 1][j, left], ds.slacks[level + 1][j, right])
            r0 = conditional_rotation(_split_angle(*w0), *phases, cfg)
            r1 = conditional_rotation(_split_angle(*w1), 0.0, 0.0, cfg)
            nxt[left, 0], nxt[right, 0] = amp[idx, 0] * r0[:, 0]
            nxt[left, 1], nxt[right, 1] = amp[idx, 1] * r1[:, 0]
        amp = nxt

    return RegisterState(amp.reshape(-1), (("col", size), ("flag", 2)))
