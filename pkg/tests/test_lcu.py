import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcqw.bessel import choose_truncation, truncation_bound
from lcqw.errors import LeakageError, PaddingAmplitudeError
from lcqw.evolve import diagonal_shift
from lcqw.lcu import (
    Counters,
    LCUPlan,
    SegmentCircuit,
    build_B,
    effective_operator,
    eigenvalue_sum_check,
    make_plan,
    multi_U,
    plan_from_coefficients,
    segment_apply,
    success_amplitude,
)
from lcqw.linalg import matrix_exponential, validate_hermitian
from lcqw.rowtree import build
from lcqw.walk import build_walk

from conftest import X, Z, random_state, signed_hermitian


def shifted_walk(m):
    h, _ = diagonal_shift(validate_hermitian(m))
    return build_walk(build(h)), h


def segment_oracle(h, plan):
    # exp(i z H / lam) = exp(-i H t) with t = -z / lam
    return matrix_exponential(h, -plan.z / h.lam)


def test_segment_count_examples():
    plan = make_plan(validate_hermitian(X), 1.0, 1e-6)
    assert (plan.r, plan.z) == (2, -0.5)
    plan = make_plan(validate_hermitian(X), 0.2, 1e-6)
    assert (plan.r, plan.z) == (1, -0.2)


def test_plan_for_pauli_z():
    plan = make_plan(validate_hermitian(Z), 1.0, 1e-6)
    assert (plan.r, plan.z) == (2, -0.5)
    assert plan.k == choose_truncation(-0.5, 1.0, 5e-7) == 7
    assert plan.eps_segment == 5e-7
    assert plan.t == 1.0
    assert abs(plan.alphas.sum() - 1) < 1e-15


def test_make_plan_rejects_bad_arguments():
    h = validate_hermitian(Z)
    for t, eps in [(0.0, 1e-3), (1.0, 0.0), (1.0, 1.5)]:
        with pytest.raises(ValueError):
            make_plan(h, t, eps)


def test_coeff_register_always_has_padding():
    for k in range(1, 30):
        m = plan_from_coefficients(-0.5, k).coeff_dim
        assert m >= 2 * k + 2 and m & (m - 1) == 0


def test_prepare_zero_argument():
    plan = plan_from_coefficients(0.0, 1)
    b = build_B(plan)
    first = np.zeros(8)
    first[1] = first[4 + 1] = 1 / math.sqrt(2)
    assert np.allclose(b[:, 0], first, atol=1e-15)


def test_prepare_full_weight_leaves_success_zero():
    plan = LCUPlan(z=0.0, k=1, alphas=np.array([1.0, 0.0, 1.0]), c_k=1.0, r=1, eps_segment=1e-12, b=0)
    b = build_B(plan)
    assert np.allclose(b[4:, 0], 0, atol=1e-15)


def test_prepare_is_unitary():
    b = build_B(plan_from_coefficients(-0.5, 8))
    assert np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))) <= 1e-12


def test_prepare_rejects_large_weight():
    plan = LCUPlan(z=0.0, k=1, alphas=np.array([1.5, 0.0, 1.0]), c_k=1.0, r=1, eps_segment=1e-12, b=0)
    with pytest.raises(ValueError):
        build_B(plan)


def test_multi_u_branches(rng):
    w, _ = shifted_walk(signed_hermitian(2, rng))
    plan = plan_from_coefficients(-0.5, 2)
    m, d, k = plan.coeff_dim, w.dim, plan.k
    psi = random_state(d, rng)
    x = np.zeros((m, d), dtype=complex)
    x[k] = psi
    assert np.allclose(multi_U(w, plan, x)[k], psi)
    x = np.zeros((m, d), dtype=complex)
    x[k + 1] = psi
    assert np.allclose(multi_U(w, plan, x)[k + 1], w.apply(psi))


def test_multi_u_matches_block_diagonal(rng):
    w, _ = shifted_walk(signed_hermitian(2, rng))
    plan = plan_from_coefficients(-0.5, 2)
    u = w.dense()
    m, d, k = plan.coeff_dim, w.dim, plan.k
    big = np.zeros((m * d, m * d), dtype=complex)
    for j in range(m):
        p = j - k
        blk = np.linalg.matrix_power(u, p) if p >= 0 and j <= 2 * k else np.eye(d)
        if p < 0:
            blk = np.linalg.matrix_power(u.conj().T, -p)
        big[j * d : (j + 1) * d, j * d : (j + 1) * d] = blk
    x = np.zeros(m * d, dtype=complex)
    x[: (2 * k + 1) * d] = random_state((2 * k + 1) * d, rng)
    counters = Counters()
    assert np.allclose(multi_U(w, plan, x, counters=counters), big @ x, atol=1e-12)
    assert np.allclose(multi_U(w, plan, big @ x, adjoint=True), x, atol=1e-12)
    assert counters.as_dict() == {"multi_u_calls": 1, "u_queries": 4, "t_applications": 8}


def test_multi_u_rejects_padding_amplitude(rng):
    w, _ = shifted_walk(signed_hermitian(2, rng))
    plan = plan_from_coefficients(-0.5, 1)
    x = np.zeros((plan.coeff_dim, w.dim), dtype=complex)
    x[-1, 0] = 1
    with pytest.raises(PaddingAmplitudeError):
        multi_U(w, plan, x)


def test_w_dag_is_adjoint_of_w(rng):
    w, _ = shifted_walk(signed_hermitian(2, rng))
    c = SegmentCircuit(w, plan_from_coefficients(-0.5, 1))
    shape = (2, c.m, w.dim)
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    b = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    assert abs(np.vdot(b, c.apply_W(a)) - np.vdot(c.apply_W_dag(b), a)) < 1e-12
    assert np.allclose(c.apply_W_dag(c.apply_W(a)), a, atol=1e-12)


def test_success_amplitude_is_one_half(rng):
    w, h = shifted_walk(signed_hermitian(4, rng))
    k = choose_truncation(-0.5, 1.0, 1e-10)
    c = SegmentCircuit(w, plan_from_coefficients(-0.5, k, eps_segment=1e-10))
    for _ in range(5):
        assert abs(success_amplitude(c, random_state(4, rng)) - 0.5) <= 1e-9


def test_segment_pauli_z_eigenstate():
    h = validate_hermitian(Z)
    w = build_walk(build(h))
    eps = 1e-8
    plan = plan_from_coefficients(-0.5, choose_truncation(-0.5, 1.0, eps), eps_segment=eps)
    out, leak = segment_apply(w, plan, np.array([1, 0], dtype=complex))
    assert np.linalg.norm(out.amplitudes - np.array([cmath.exp(-0.5j), 0])) <= eps
    assert leak <= 10 * eps


@pytest.mark.parametrize("mode", ["circuit", "effective"])
def test_segment_at_high_order_is_exact(rng, mode):
    w, h = shifted_walk(signed_hermitian(4, rng))
    plan = plan_from_coefficients(-0.5, 25, eps_segment=1e-13, lam=h.lam)
    psi = random_state(4, rng)
    out, _ = segment_apply(w, plan, psi, mode=mode)
    assert np.linalg.norm(out.amplitudes - segment_oracle(h, plan) @ psi) <= 1e-12


def test_modes_agree(rng):
    w, h = shifted_walk(signed_hermitian(4, rng))
    plan = plan_from_coefficients(-0.5, choose_truncation(-0.5, 1.0, 1e-8), eps_segment=1e-8)
    for _ in range(3):
        psi = random_state(4, rng)
        a, _ = segment_apply(w, plan, psi, mode="circuit")
        b, _ = segment_apply(w, plan, psi, mode="effective")
        assert np.linalg.norm(a.amplitudes - b.amplitudes) <= 1e-10


def test_effective_operator_is_near_unitary(rng):
    w, h = shifted_walk(signed_hermitian(4, rng))
    plan = plan_from_coefficients(-0.25, 12)
    e = effective_operator(w, plan)
    assert np.max(np.abs(e - segment_oracle(h, plan))) < 1e-13


def test_segment_counts_queries(rng):
    w, _ = shifted_walk(signed_hermitian(2, rng))
    plan = plan_from_coefficients(-0.5, 4, eps_segment=1e-3)
    counters = Counters()
    segment_apply(w, plan, np.array([1, 0], dtype=complex), counters=counters)
    assert counters.as_dict() == {"multi_u_calls": 3, "u_queries": 24, "t_applications": 50}


def test_segment_leakage_alarm(rng):
    w, _ = shifted_walk(signed_hermitian(2, rng))
    plan = plan_from_coefficients(-0.5, 1, eps_segment=1e-12)
    with pytest.raises(LeakageError):
        segment_apply(w, plan, np.array([1, 0], dtype=complex))


def test_segment_rejects_bad_input(rng):
    w, _ = shifted_walk(signed_hermitian(2, rng))
    plan = plan_from_coefficients(-0.5, 4)
    with pytest.raises(ValueError):
        segment_apply(w, plan, np.array([1, 1], dtype=complex))
    with pytest.raises(ValueError):
        segment_apply(w, plan, np.array([1, 0], dtype=complex), mode="bogus")


def test_eigenvalue_sum_at_zero():
    approx, exact, _ = eigenvalue_sum_check(plan_from_coefficients(-0.5, 10), 0.0)
    assert abs(approx - 1) < 1e-15 and exact == 1


def test_eigenvalue_sum_half():
    plan = plan_from_coefficients(-0.5, 10)
    approx, exact, bound = eigenvalue_sum_check(plan, 0.5)
    assert exact == cmath.exp(-0.25j)
    assert abs(approx - exact) <= bound + 1e-15
    assert bound == truncation_bound(10, -0.5, 0.5)


def test_eigenvalue_sum_high_precision():
    plan = plan_from_coefficients(-0.5, 18)
    approx, exact, bound = eigenvalue_sum_check(plan, 0.7, dps=60)
    assert abs(approx - exact) <= bound
    assert bound < 1e-25


def test_eigenvalue_sum_rejects_large_ratio():
    with pytest.raises(ValueError):
        eigenvalue_sum_check(plan_from_coefficients(-0.5, 3), 1.2)


@settings(max_examples=100, deadline=None)
@given(nu=st.floats(-1, 1), k=st.integers(1, 12), z=st.sampled_from([-0.1, -0.25, -0.5]))
def test_walk_branches_agree(nu, k, z):
    # raises if the two branches differ by more than 1e-13
    approx, exact, bound = eigenvalue_sum_check(plan_from_coefficients(z, k), nu)
    assert abs(approx - exact) <= bound + 1e-14
