"""Per-row binary trees holding (magnitude, slack) tuples.

Tree ``j`` describes row ``j`` of a Hermitian matrix H with normalisation
``lam``. Leaf ``k`` holds ``(conj(H_jk), (lam - sigma_j)/N)``; a parent of two
leaves holds ``(|a| + |b|, 2 * slack)``; every higher node holds the
componentwise sum of its children. The root therefore holds
``(sigma_j, lam - sigma_j)``.

Levels are stored as contiguous arrays indexed ``[tree, node]`` so parent and
child lookups are plain index arithmetic (children of ``i`` are ``2i, 2i+1``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonHermitianError, StructureError
from .linalg import HermitianOperator, validate_hermitian


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise StructureError(f"dimension {n} is not a power of two")
    return n.bit_length() - 1


@dataclass
class RowTreeArray:
    """All N row trees of one Hermitian matrix.

    Attributes:
        leaves: complex ``(N, N)``; ``leaves[j, k] = conj(H_jk)``.
        mags: ``mags[l]`` is the real ``(N, 2**l)`` array of first tuple
            components on level ``l`` for ``l < depth``.
        slacks: ``slacks[l]`` is ``(N, 2**l)`` for ``l <= depth``.
        lam: shared normalisation.
        sealed: True once every slack value agrees with ``lam``.
        update_log: one dict per applied update.
    """

    leaves: np.ndarray
    mags: list[np.ndarray]
    slacks: list[np.ndarray]
    lam: float
    operator: HermitianOperator
    sealed: bool = False
    update_log: list[dict] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.leaves.shape[0]

    @property
    def depth(self) -> int:
        return len(self.mags)

    @property
    def nodes_per_tree(self) -> int:
        return 2 * self.dim - 1

    @property
    def total_nodes(self) -> int:
        return self.dim * self.nodes_per_tree

    def matrix(self) -> np.ndarray:
        return self.leaves.conj()

    def root(self, j: int) -> tuple[float, float]:
        return self.node_query(j, 0, 0)

    def node_query(self, j: int, level: int, index: int):
        """Stored tuple of tree ``j`` at ``(level, index)``; level 0 is the root."""
        n = self.depth
        if not 0 <= j < self.dim:
            raise StructureError(f"row {j} out of range")
        if not 0 <= level <= n:
            raise StructureError(f"level {level} out of range [0, {n}]")
        if not 0 <= index < 2**level:
            raise StructureError(f"index {index} out of range on level {level}")
        if level == n:
            return complex(self.leaves[j, index]), float(self.slacks[n][j, index])
        return float(self.mags[level][j, index]), float(self.slacks[level][j, index])


def _leaf_parent_mags(leaves: np.ndarray) -> np.ndarray:
    a = np.abs(leaves)
    return a[:, 0::2] + a[:, 1::2]


def _fill_mags(ds: RowTreeArray) -> None:
    n = ds.depth
    if n == 0:
        return
    ds.mags[n - 1] = _leaf_parent_mags(ds.leaves)
    for level in range(n - 2, -1, -1):
        child = ds.mags[level + 1]
        ds.mags[level] = child[:, 0::2] + child[:, 1::2]


def _seal(ds: RowTreeArray, h: HermitianOperator) -> None:
    """Refresh every slack component from a freshly computed ``lam``."""
    n, size = ds.depth, ds.dim
    ds.operator = h
    ds.lam = h.lam
    roots = ds.mags[0][:, 0] if n else np.abs(ds.leaves[:, 0])
    if np.any(roots > h.lam * (1 + 1e-12)):
        raise StructureError("row sum exceeds lambda")
    leaf_slack = np.maximum(h.lam - roots, 0.0) / size
    ds.slacks[n] = np.repeat(leaf_slack[:, None], size, axis=1)
    for level in range(n - 1, -1, -1):
        child = ds.slacks[level + 1]
        ds.slacks[level] = child[:, 0::2] + child[:, 1::2]
    ds.sealed = True


def build(h: HermitianOperator) -> RowTreeArray:
    """Build and seal the tree array for ``h`` (dimension must be a power of two)."""
    size = h.dim
    n = _log2_exact(size)
    ds = RowTreeArray(
        leaves=h.matrix.conj().copy(),
        mags=[np.zeros((size, 2**lv)) for lv in range(n)],
        slacks=[np.zeros((size, 2**lv)) for lv in range(n + 1)],
        lam=h.lam,
        operator=h,
    )
    _fill_mags(ds)
    _seal(ds, h)
    return ds


def _update_path(ds: RowTreeArray, j: int, k: int, value: complex) -> int:
    """Write leaf ``k`` of tree ``j`` and refresh its ancestors' magnitudes."""
    n = ds.depth
    ds.leaves[j, k] = np.conj(value)
    touched = 1
    idx = k
    for level in range(n - 1, -1, -1):
        idx //= 2
        if level == n - 1:
            left, right = abs(ds.leaves[j, 2 * idx]), abs(ds.leaves[j, 2 * idx + 1])
        else:
            left, right = ds.mags[level + 1][j, 2 * idx], ds.mags[level + 1][j, 2 * idx + 1]
        ds.mags[level][j, idx] = left + right
        touched += 1
    return touched


def update_entry(ds: RowTreeArray, j: int, k: int, value: complex) -> tuple[RowTreeArray, int]:
    """Set ``H_jk = value`` and ``H_kj = conj(value)``, then reseal.

    The mirrored entry is written by this call, so Hermiticity cannot be
    broken by a half-applied update. Each affected tree has exactly
    ``depth + 1`` nodes rewritten on its leaf-to-root path; resealing then
    refreshes every slack value, which is logged separately.

    Returns:
        ``(ds, touched)`` where ``touched`` is the per-tree path length.

    Raises:
        StructureError: indices out of range or structure not sealed.
        NonHermitianError: a diagonal update with a non-real value.
    """
    if not ds.sealed:
        raise StructureError("structure is not sealed")
    size = ds.dim
    if not (0 <= j < size and 0 <= k < size):
        raise StructureError(f"entry ({j}, {k}) out of range for N={size}")
    value = complex(value)
    if not np.isfinite(value):
        raise StructureError("update value is not finite")
    if j == k and abs(value.imag) > 1e-12 * max(abs(value), 1.0):
        raise NonHermitianError("diagonal entries must be real")
    if j == k:
        value = complex(value.real, 0.0)

    touched = _update_path(ds, j, k, value)
    trees = [j]
    if j != k:
        mirror = _update_path(ds, k, j, value.conjugate())
        assert mirror == touched
        trees.append(k)
    h = validate_hermitian(ds.leaves.conj())
    _seal(ds, h)
    ds.update_log.append(
        {
            "entry": (j, k),
            "trees": trees,
            "touched_per_tree": touched,
            "reseal_nodes": ds.total_nodes,
        }
    )
    return ds, touched


def node_query(ds: RowTreeArray, j: int, level: int, index: int):
    return ds.node_query(j, level, index)
