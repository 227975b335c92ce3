"""Bessel-weighted combination of walk powers, amplified to one evolution segment.

A segment implements ``V_k = sum_{m=-k}^{k} alpha_m U^m`` with
``alpha_m = J_m(z) / sum_l J_l(z)``, whose eigenvalue on both walk branches of
an H-eigenvalue ``lambda`` approximates ``exp(i z lambda / lam)``.

Registers of the segment circuit, most significant first: success qubit (2),
coefficient register (M, index ``m + k``, padded to a power of two), walk
register ``(2N)**2``.

The combination circuit is ``W = (B^T (x) I) SEL (B (x) I)``:

* ``B`` prepares ``(sqrt(s/2)|0> + sqrt(1-s/2)|1>) (x) s^{-1/2} sum_m sqrt(alpha_m)|m>``
  with ``sqrt(alpha) = i sqrt|alpha|`` for negative weights. Unpreparing with
  ``B^T`` rather than ``B^dag`` makes the two square roots multiply to
  ``alpha_m`` including its sign; with ``B^dag`` they would give ``|alpha_m|``.
* ``SEL`` applies ``multi-U`` when the success qubit is 0. When it is 1, it
  applies a reflection on the coefficient register that carries the
  coefficient state onto an unused padding index, so that branch never
  returns to ``|0,0>``.

Together these give ``P W |0,0,psi> = |0,0> V_k psi / 2`` exactly, the
amplitude one round of oblivious amplification needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import mpmath
import numpy as np

from .bessel import bessel_symmetric, choose_truncation, truncation_bound
from .errors import LeakageError, PaddingAmplitudeError
from .linalg import HermitianOperator
from .stateprep import RegisterState
from .walk import WalkOperator, walk_eigenvalue

LEAKAGE_FACTOR = 10.0


@dataclass
class Counters:
    """Query accounting for one run."""

    multi_u_calls: int = 0
    u_queries: int = 0
    t_applications: int = 0

    def as_dict(self) -> dict:
        return {
            "multi_u_calls": self.multi_u_calls,
            "u_queries": self.u_queries,
            "t_applications": self.t_applications,
        }


@dataclass(frozen=True)
class LCUPlan:
    z: float
    k: int
    alphas: np.ndarray
    c_k: float
    r: int
    eps_segment: float
    b: int
    lam: float = 1.0
    t: float = 0.0

    @property
    def s(self) -> float:
        return float(np.sum(np.abs(self.alphas)))

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.k, self.k + 1)

    @property
    def coeff_dim(self) -> int:
        """Smallest power of two >= ``2k+1``.

        ``2k+1`` is odd, so index ``M-1`` is always padding; the success-1
        reflection uses it.
        """
        return 1 << (2 * self.k).bit_length()

    @cached_property
    def sqrt_alphas(self) -> np.ndarray:
        a = self.alphas
        return np.where(a >= 0, np.sqrt(np.abs(a)), 1j * np.sqrt(np.abs(a)))


def plan_from_coefficients(z: float, k: int, r: int = 1, eps_segment: float = 1e-12, b: int = 0, lam: float = 1.0) -> LCUPlan:
    """Plan for a fixed ``(z, k)`` with normalised Bessel weights."""
    j = bessel_symmetric(z, k)
    c_k = float(np.sum(j))
    return LCUPlan(z=z, k=k, alphas=j / c_k, c_k=c_k, r=r, eps_segment=eps_segment, b=b, lam=lam, t=-z * r / lam)


def make_plan(h: HermitianOperator, t: float, eps: float) -> LCUPlan:
    """Split evolution time ``t`` into ``r = ceil(2 lam t)`` segments of ``z = -lam t / r``."""
    if not t > 0:
        raise ValueError("t must be positive")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    lam = h.lam
    if not lam > 0:
        raise ValueError("operator has zero norm")
    r = max(1, math.ceil(2.0 * lam * t))
    z = -lam * t / r
    eps_seg = eps / r
    k = choose_truncation(z, min(h.spectral_norm / lam, 1.0), eps_seg)
    b = math.ceil(math.log2(r * lam / eps)) + 8
    plan = plan_from_coefficients(z, k, r=r, eps_segment=eps_seg, b=b, lam=lam)
    return replace(plan, t=t)


def build_B(plan: LCUPlan) -> np.ndarray:
    """Unitary on (success, coefficient) whose first column is the preparation state.

    Raises:
        ValueError: ``s > 2``.
    """
    s = plan.s
    if s > 2.0:
        raise ValueError(f"coefficient one-norm s={s} exceeds 2")
    m = plan.coeff_dim
    a = np.zeros(m, dtype=complex)
    a[: 2 * plan.k + 1] = plan.sqrt_alphas / math.sqrt(s)
    first = np.concatenate([math.sqrt(s / 2) * a, math.sqrt(max(1.0 - s / 2, 0.0)) * a])
    q, _ = np.linalg.qr(np.column_stack([first, np.eye(2 * m, dtype=complex)]))
    # QR fixes the first column only up to a phase
    q[:, 0] *= np.vdot(q[:, 0], first)
    return q


def failure_reflection(plan: LCUPlan) -> np.ndarray:
    """Householder reflection swapping the coefficient state with padding index ``M-1``."""
    m = plan.coeff_dim
    v = np.zeros(m, dtype=complex)
    v[: 2 * plan.k + 1] = plan.sqrt_alphas / math.sqrt(plan.s)
    v[m - 1] -= 1.0
    return np.eye(m) - np.outer(v, v.conj())


def multi_U(
    w: WalkOperator,
    plan: LCUPlan,
    state: np.ndarray,
    adjoint: bool = False,
    counters: Counters | None = None,
    check_padding: bool = True,
) -> np.ndarray:
    """Apply ``U^(j-k)`` to coefficient branch ``j`` (``U^(k-j)`` with ``adjoint``).

    ``state`` is indexed ``[coeff, walk]`` (or flat). Padding branches are left
    untouched. Each call is charged ``2k`` walk queries: ``k`` controlled
    forward steps and ``k`` controlled backward steps.

    Raises:
        PaddingAmplitudeError: ``check_padding`` and padding carries amplitude.
    """
    k, m, d = plan.k, plan.coeff_dim, w.dim
    flat = state.ndim == 1
    x = np.array(state, dtype=complex).reshape(m, d)
    if check_padding:
        pad = np.linalg.norm(x[2 * k + 1 :])
        if pad > 1e-12:
            raise PaddingAmplitudeError(f"padding amplitude {pad:.2e}")
    fwd, bwd = (w.apply_dag, w.apply) if adjoint else (w.apply, w.apply_dag)
    for p in range(1, k + 1):
        x[k + p : 2 * k + 1] = fwd(x[k + p : 2 * k + 1])
        x[: k - p + 1] = bwd(x[: k - p + 1])
    if counters is not None:
        counters.multi_u_calls += 1
        counters.u_queries += 2 * k
        counters.t_applications += 4 * k
    return x.reshape(-1) if flat else x


@dataclass
class SegmentCircuit:
    """The combination circuit ``W`` and its amplified form for one plan."""

    w: WalkOperator
    plan: LCUPlan
    counters: Counters = field(default_factory=Counters)

    def __post_init__(self):
        self.B = build_B(self.plan)
        self.R = failure_reflection(self.plan)
        self.m = self.plan.coeff_dim

    def _prep(self, mat: np.ndarray, x: np.ndarray) -> np.ndarray:
        return (mat @ x.reshape(2 * self.m, -1)).reshape(x.shape)

    def _select(self, x: np.ndarray, adjoint: bool) -> np.ndarray:
        out = np.empty_like(x)
        out[0] = multi_U(self.w, self.plan, x[0], adjoint=adjoint, counters=self.counters, check_padding=False)
        out[1] = self.R @ x[1]
        return out

    def apply_W(self, x: np.ndarray) -> np.ndarray:
        """``x`` has shape ``(2, M, (2N)**2)``."""
        return self._prep(self.B.T, self._select(self._prep(self.B, x), adjoint=False))

    def apply_W_dag(self, x: np.ndarray) -> np.ndarray:
        return self._prep(self.B.conj().T, self._select(self._prep(self.B.conj(), x), adjoint=True))

    @staticmethod
    def reflect_P(x: np.ndarray) -> np.ndarray:
        """``(I - 2P)`` with ``P`` projecting onto success 0 and coefficient 0."""
        y = x.copy()
        y[0, 0] *= -1
        return y

    def initial(self, walk_vec: np.ndarray) -> np.ndarray:
        x = np.zeros((2, self.m, self.w.dim), dtype=complex)
        x[0, 0] = walk_vec
        return x

    def amplify(self, x: np.ndarray) -> np.ndarray:
        """``-W (I-2P) W^dag (I-2P) W x``."""
        y = self.apply_W(x)
        y = self.apply_W_dag(self.reflect_P(y))
        return -self.apply_W(self.reflect_P(y))


def _as_vector(psi, size: int) -> np.ndarray:
    v = psi.amplitudes if isinstance(psi, RegisterState) else np.asarray(psi)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != size:
        raise ValueError(f"state has {v.size} amplitudes, expected {size}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError("input state is not normalised")
    return v


def embed(w: WalkOperator, psi: np.ndarray) -> np.ndarray:
    """``psi (x) |0>`` on the (row, flag) register."""
    x = np.zeros(2 * w.n_sys, dtype=complex)
    x[0::2] = psi
    return x


def effective_operator(w: WalkOperator, plan: LCUPlan) -> np.ndarray:
    """``(I (x) <0|) T^dag V_k T (I (x) |0>)`` as a dense ``N x N`` matrix."""
    size, k = w.n_sys, plan.k
    cols = np.zeros((size, 2 * size), dtype=complex)
    cols[np.arange(size), 2 * np.arange(size)] = 1.0
    base = w.apply_t(cols)
    acc = plan.alphas[k] * base
    fwd, bwd = base, base
    for p in range(1, k + 1):
        fwd = w.apply(fwd)
        bwd = w.apply_dag(bwd)
        acc = acc + plan.alphas[k + p] * fwd + plan.alphas[k - p] * bwd
    return w.apply_t_dag(acc)[:, 0::2].T


def segment_apply(
    w: WalkOperator,
    plan: LCUPlan,
    psi,
    mode: str = "circuit",
    counters: Counters | None = None,
    circuit: SegmentCircuit | None = None,
    effective: np.ndarray | None = None,
) -> tuple[RegisterState, float]:
    """One segment, approximately ``exp(i z H / lam)`` applied to ``psi``.

    Circuit mode runs the amplified combination circuit, keeps the
    ``P``-projected walk register, maps it back through ``T^dag``, drops the
    flag-1 part and renormalises. Leakage is the norm of everything
    discarded, computed directly from the discarded components.

    Effective mode applies the dense ``N x N`` block of ``T^dag V_k T``;
    leakage is then the deviation of the output norm from one.

    Raises:
        LeakageError: leakage above ``10 * eps_segment``.
    """
    size = w.n_sys
    v = _as_vector(psi, size)
    if mode == "circuit":
        if circuit is None:
            circuit = SegmentCircuit(w, plan, counters if counters is not None else Counters())
        tx = w.apply_t(embed(w, v))
        circuit.counters.t_applications += 1
        out = circuit.amplify(circuit.initial(tx))
        kept = out[0, 0]
        rest = out.copy()
        rest[0, 0] = 0
        lost_p = np.linalg.norm(rest)
        back = w.apply_t_dag(kept)
        circuit.counters.t_applications += 1
        lost_image = np.linalg.norm(kept - w.apply_t(back))
        lost_flag = np.linalg.norm(back[1::2])
        res = back[0::2]
        leakage = float(math.sqrt(lost_p**2 + lost_image**2 + lost_flag**2))
    elif mode == "effective":
        e = effective if effective is not None else effective_operator(w, plan)
        res = e @ v
        leakage = float(abs(1.0 - np.linalg.norm(res)))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if leakage > LEAKAGE_FACTOR * plan.eps_segment:
        raise LeakageError(f"segment leakage {leakage:.3e} exceeds {LEAKAGE_FACTOR} * eps' = {LEAKAGE_FACTOR * plan.eps_segment:.3e}")
    res = res / np.linalg.norm(res)
    return RegisterState(res, (("row", size),)), leakage


def success_amplitude(circuit: SegmentCircuit, psi) -> float:
    """``||P W |0,0,psi>||`` for a system state ``psi``."""
    w = circuit.w
    x = circuit.initial(w.apply_t(embed(w, _as_vector(psi, w.n_sys))))
    return float(np.linalg.norm(circuit.apply_W(x)[0, 0]))


@lru_cache(maxsize=256)
def _mp_weights(z: float, k: int, dps: int) -> tuple:
    """Normalised weights ``J_m(z) / sum_l J_l(z)`` at ``dps`` digits."""
    with mpmath.workdps(dps):
        js = [mpmath.besselj(m, mpmath.mpf(z)) for m in range(-k, k + 1)]
        c = mpmath.fsum(js)
        return tuple(j / c for j in js)


def eigenvalue_sum_check(plan: LCUPlan, nu: float, dps: int | None = None):
    """Truncated-series eigenvalue against ``exp(i z nu)`` and its bound.

    Returns ``(approx, exact, bound)`` with ``approx = sum_m alpha_m mu_+^m``.
    With ``dps`` the weights and powers are recomputed at that many decimal
    digits (mpmath), so the comparison resolves bounds far below double
    precision; the return values are then mpmath numbers.

    Raises:
        ValueError: ``|nu| > 1`` or the two walk branches disagree.
    """
    if abs(nu) > 1:
        raise ValueError("|nu| must not exceed 1")
    bound = truncation_bound(plan.k, plan.z, nu)
    if dps is not None:
        with mpmath.workdps(dps):
            z = mpmath.mpf(plan.z)
            nu_m = mpmath.mpf(nu)
            weights = _mp_weights(plan.z, plan.k, dps)
            th = mpmath.asin(nu_m)
            mu_p = mpmath.expj(th)
            mu_m = -mpmath.expj(-th)
            orders = range(-plan.k, plan.k + 1)
            approx = mpmath.fsum(a * mu_p**m for a, m in zip(weights, orders))
            other = mpmath.fsum(a * mu_m**m for a, m in zip(weights, orders))
            if abs(approx - other) > mpmath.mpf(10) ** (-dps + 5):
                raise ValueError("walk branches give different eigenvalues")
            exact = mpmath.expj(z * nu_m)
            return approx, exact, mpmath.mpf(bound)
    orders = plan.orders
    mu_p = walk_eigenvalue(nu, 1)
    mu_m = walk_eigenvalue(nu, -1)
    approx = complex(np.sum(plan.alphas * np.power(mu_p, orders)))
    other = complex(np.sum(plan.alphas * np.power(mu_m, orders)))
    if abs(approx - other) > 1e-13:
        raise ValueError(f"walk branches differ by {abs(approx - other):.2e}")
    exact = complex(np.exp(1j * plan.z * nu))
    return approx, exact, bound
