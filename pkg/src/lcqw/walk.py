"""Isometry, swap and walk operator ``U = i S (2 T T^dag - I)``.

The walk acts on two copies of the (row, flag) register, i.e. dimension
``(2N)**2``. A basis index is ``a * 2N + b`` with ``a = 2*row + flag`` for the
first copy and ``b`` likewise for the second. Column ``a`` of ``T`` is
``|a> (x) |phi_a>``, so ``T`` is stored compactly as the ``2N x 2N`` matrix
``phi`` whose row ``a`` is ``|phi_a>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import HermitianOperator
from .rowtree import RowTreeArray
from .stateprep import EXACT, PrecisionConfig, prepare_row_state_cascade, prepare_row_state_direct

DENSE_LIMIT = 8
DEGENERACY_MARGIN = 1e-6


def build_isometry(ds: RowTreeArray, cfg: PrecisionConfig | None = None) -> np.ndarray:
    """Row-stacked states ``phi[a] = |phi_{j b}>`` with ``a = 2j + b``.

    ``cfg=None`` uses the direct constructor; otherwise the rotation cascade at
    that precision.
    """
    size = ds.dim
    phi = np.zeros((2 * size, 2 * size), dtype=complex)
    for j in range(size):
        if cfg is None:
            row = prepare_row_state_direct(ds, j)
        else:
            row = prepare_row_state_cascade(ds, j, cfg)
        phi[2 * j] = row.amplitudes
        phi[2 * j + 1, 1] = 1.0  # |0>|1>
    return phi


def isometry_matrix(phi: np.ndarray) -> np.ndarray:
    """Dense ``(2N)^2 x 2N`` form of ``T``."""
    d = phi.shape[0]
    t = np.zeros((d * d, d), dtype=complex)
    for a in range(d):
        t[a * d : (a + 1) * d, a] = phi[a]
    return t


def swap_matrix(d: int) -> np.ndarray:
    perm = np.arange(d * d).reshape(d, d).T.reshape(-1)
    return np.eye(d * d)[perm]


@dataclass(frozen=True)
class WalkOperator:
    """Walk built from one sealed tree array.

    Vectors of length ``(2N)**2`` (or stacks of them along leading axes) are
    handled matrix-free; :meth:`dense` assembles the explicit matrix for
    ``N <= 8``.
    """

    phi: np.ndarray
    lam: float
    operator: HermitianOperator = field(repr=False)

    @property
    def n_sys(self) -> int:
        return self.phi.shape[0] // 2

    @property
    def dim(self) -> int:
        return self.phi.shape[0] ** 2

    def apply_t(self, x: np.ndarray) -> np.ndarray:
        d = self.phi.shape[0]
        return (x[..., :, None] * self.phi).reshape(x.shape[:-1] + (d * d,))

    def apply_t_dag(self, y: np.ndarray) -> np.ndarray:
        d = self.phi.shape[0]
        return np.einsum("...ab,ab->...a", y.reshape(y.shape[:-1] + (d, d)), self.phi.conj())

    def apply_swap(self, y: np.ndarray) -> np.ndarray:
        d = self.phi.shape[0]
        return np.swapaxes(y.reshape(y.shape[:-1] + (d, d)), -1, -2).reshape(y.shape)

    def reflect(self, y: np.ndarray) -> np.ndarray:
        """``(2 T T^dag - I) y``."""
        return 2.0 * self.apply_t(self.apply_t_dag(y)) - y

    def apply(self, y: np.ndarray) -> np.ndarray:
        return 1j * self.apply_swap(self.reflect(y))

    def apply_dag(self, y: np.ndarray) -> np.ndarray:
        return -1j * self.reflect(self.apply_swap(y))

    @cached_property
    def t_matrix(self) -> np.ndarray:
        return isometry_matrix(self.phi)

    def dense(self) -> np.ndarray:
        if self.n_sys > DENSE_LIMIT:
            raise ValueError(f"dense walk limited to N <= {DENSE_LIMIT}")
        t = self.t_matrix
        d2 = self.dim
        return 1j * swap_matrix(self.phi.shape[0]) @ (2.0 * t @ t.conj().T - np.eye(d2))


def build_walk(ds: RowTreeArray, cfg: PrecisionConfig | None = None) -> WalkOperator:
    return WalkOperator(build_isometry(ds, cfg), ds.lam, ds.operator)


def block(w: WalkOperator) -> np.ndarray:
    """``(I (x) <0|) T^dag S T (I (x) |0>)`` as an ``N x N`` matrix."""
    size = w.n_sys
    cols = np.zeros((size, 2 * size), dtype=complex)
    cols[np.arange(size), 2 * np.arange(size)] = 1.0
    out = w.apply_t_dag(w.apply_swap(w.apply_t(cols)))
    return out[:, 0::2].T


def verify_block_encoding(w: WalkOperator, h: HermitianOperator) -> float:
    """Max-norm distance between the walk's flag-0 block and ``H / lam``."""
    return float(np.max(np.abs(block(w) - h.matrix / w.lam)))


def walk_eigenvalue(nu: float, sign: int) -> complex:
    """``mu_+ = e^{i asin nu}`` or ``mu_- = -e^{-i asin nu}`` for ``nu = lambda / lam``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    theta = math.asin(max(-1.0, min(1.0, nu)))
    return sign * complex(math.cos(sign * theta), math.sin(sign * theta))


def walk_eigenvector(w: WalkOperator, vec: np.ndarray, mu: complex) -> np.ndarray:
    """``(T + i mu S T)|lambda>|0>``, falling back to ``T|lambda>|0>`` when that vanishes.

    At ``|lambda| = lam`` the two walk eigenvalues merge and ``S T|lambda,0>``
    becomes parallel to ``T|lambda,0>``; the combination is then zero and
    ``T|lambda,0>`` itself is the eigenvector.
    """
    x = np.zeros(2 * w.n_sys, dtype=complex)
    x[0::2] = vec
    tx = w.apply_t(x)
    v = tx + 1j * mu * w.apply_swap(tx)
    if np.linalg.norm(v) < DEGENERACY_MARGIN * np.linalg.norm(tx):
        return tx
    return v


def walk_eigenpair_check(w: WalkOperator, lam_value: float, vec: np.ndarray, sign: int) -> float:
    """Relative residual ``||U v - mu v|| / ||v||`` for the walk eigenvector built from ``(lam_value, vec)``.

    Raises:
        ValueError: ``vec`` is not an eigenvector of H with eigenvalue ``lam_value``.
    """
    h = w.operator.matrix
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    res = np.linalg.norm(h @ vec - lam_value * vec)
    if res > 1e-8 * max(w.lam, 1.0):
        raise ValueError(f"input is not an eigenpair of H (residual {res:.2e})")
    nu = lam_value / w.lam
    if abs(nu) > 1.0 - DEGENERACY_MARGIN:
        warnings.warn(f"|lambda|/lam = {abs(nu):.9f} is within {DEGENERACY_MARGIN} of 1; walk eigenvalues nearly degenerate")
    mu = walk_eigenvalue(nu, sign)
    v = walk_eigenvector(w, vec, mu)
    return float(np.linalg.norm(w.apply(v) - mu * v) / np.linalg.norm(v))
