"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 error budget or check violated.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .bessel import bessel_backward, bessel_series
from .errors import LeakageError, NonFiniteError, NonHermitianError, SparsityError, StructureError
from .evolve import apply_unitary_via_embedding, diagonal_shift, estimate_resources, evolve
from .lcu import plan_from_coefficients
from .linalg import check_sparse_norm_bound, random_sparse, random_unitary, validate_hermitian
from .rowtree import build
from .walk import DENSE_LIMIT, build_walk, verify_block_encoding, walk_eigenpair_check

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2
INPUT_ERRORS = (io.InputError, NonHermitianError, NonFiniteError, SparsityError, StructureError, ValueError)

def _load_operator(path):
    return validate_hermitian(io.read_hamiltonian(path))


def _initial_state(args, size: int) -> np.ndarray:
    if args.state:
        psi = io.read_state(args.state, renormalize=not args.strict_state)
        if psi.size != size:
            raise io.InputError(f"state has {psi.size} amplitudes, expected {size}")
        return psi
    if not 0 <= args.basis < size:
        raise io.InputError(f"basis index {args.basis} out of range")
    psi = np.zeros(size, dtype=complex)
    psi[args.basis] = 1.0
    return psi


def cmd_evolve(args) -> int:
    h = _load_operator(args.input)
    psi = _initial_state(args, h.dim)
    try:
        out, report = evolve(h, args.t, args.eps, psi, mode=args.mode, oracle=args.oracle_check)
    except LeakageError as exc:
        print(f"error budget violated: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if args.out:
        io.write_state(out.amplitudes, args.out)
    text = io.emit(report.as_dict(timing=args.timing), args.report)
    if not args.report:
        print(text)
    return EXIT_OK if report.within_budget else EXIT_BUDGET


def walk_check(h, shift: bool = True) -> dict:
    c = 0.0
    if shift:
        h, c = diagonal_shift(h)
    w = build_walk(build(h))
    # T is an isometry iff every row state is normalised
    iso = float(np.max(np.abs(np.linalg.norm(w.phi, axis=1) - 1.0)))
    eig_res = 0.0
    for lam, vec in zip(h.eig.eigenvalues, h.eig.eigenvectors.T):
        for sign in (1, -1):
            eig_res = max(eig_res, walk_eigenpair_check(w, lam, vec, sign))
    out = {
        "dim": h.dim,
        "lam": w.lam,
        "diagonal_shift": c,
        "isometry_residual": iso,
        "block_encoding_residual": verify_block_encoding(w, h),
        "eigenpair_residual": eig_res,
    }
    if h.dim <= DENSE_LIMIT:
        u = w.dense()
        out["unitarity_residual"] = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    return out


def cmd_walk_check(args) -> int:
    report = walk_check(_load_operator(args.input), shift=not args.no_shift)
    text = io.emit(report, args.out)
    if not args.out:
        print(text)
    ok = report["block_encoding_residual"] <= 1e-12 and report["eigenpair_residual"] <= 1e-10
    return EXIT_OK if ok else EXIT_BUDGET


def cmd_bessel_table(args) -> int:
    z, k = args.z, args.k
    backward = bessel_backward(z, k)
    plan = plan_from_coefficients(z, k)
    rows = []
    for m in range(-k, k + 1):
        series = bessel_series(m, z)
        sign = (-1) ** abs(m)
        rec = sign * backward[-m] if m < 0 else backward[m]
        rows.append(
            {
                "m": m,
                "series": series,
                "backward": float(rec),
                "abs_diff": abs(series - rec),
                # J_{-m}(z) = (-1)^m J_m(z) = J_m(-z)
                "parity_ok": bool(bessel_series(-m, z) == sign * series == bessel_series(m, -z)),
                "alpha": float(plan.alphas[m + k]),
            }
        )
    text = io.emit({"z": z, "k": k, "c_k": plan.c_k, "s": plan.s, "rows": rows}, args.out)
    if not args.out:
        print(text)
    return EXIT_OK


def cmd_estimate(args) -> int:
    h = _load_operator(args.input)
    text = io.emit(estimate_resources(h, args.t, args.eps).as_dict(), args.out)
    if not args.out:
        print(text)
    return EXIT_OK


def cmd_apply_unitary(args) -> int:
    if args.unitary:
        u = io.read_matrix(args.unitary)
    else:
        u = random_unitary(args.random_dim, np.random.default_rng(args.seed))
    psi = _initial_state(args, u.shape[0])
    try:
        result, report = apply_unitary_via_embedding(u, psi, args.eps)
    except LeakageError as exc:
        print(f"error budget violated: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    err = float(np.linalg.norm(result - u @ psi))
    if args.out:
        io.write_state(result, args.out)
    text = io.emit({"error": err, "eps": args.eps, "run": report.as_dict()}, args.report)
    if not args.report:
        print(text)
    return EXIT_OK if err <= args.eps else EXIT_BUDGET


def cmd_norm_check(args) -> int:
    if args.input:
        a = io.read_hamiltonian(args.input)
        lhs, rhs, holds = check_sparse_norm_bound(a, args.d)
        report = {"d": args.d, "lhs": lhs, "rhs": rhs, "holds": holds}
        violations = 0 if holds else 1
    else:
        rng = np.random.default_rng(args.seed)
        d = args.d if args.d else args.dim
        violations, worst = 0, 0.0
        for _ in range(args.draws):
            lhs, rhs, holds = check_sparse_norm_bound(random_sparse(args.dim, d, rng), d)
            violations += not holds
            worst = max(worst, lhs / rhs)
        report = {"dim": args.dim, "d": d, "draws": args.draws, "seed": args.seed, "violations": violations, "max_ratio": worst}
    text = io.emit(report, args.out)
    if not args.out:
        print(text)
    return EXIT_OK if violations == 0 else EXIT_BUDGET


def _add_state_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--state", help="state file (JSON amplitudes)")
    g.add_argument("--basis", type=int, default=0, help="computational basis index (default 0)")
    p.add_argument("--strict-state", action="store_true", help="reject state files whose norm is not 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcqw", description="Non-sparse Hamiltonian simulation by a linear combination of quantum walks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="approximate exp(-iHt)|psi>")
    p.add_argument("--input", required=True, help="Hamiltonian file")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    _add_state_args(p)
    p.add_argument("--mode", choices=["circuit", "effective"], default="circuit")
    p.add_argument("--oracle-check", action="store_true", help="compare against the exact exponential")
    p.add_argument("--report", help="write the run report here instead of stdout")
    p.add_argument("--out", help="write the output state here")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("walk-check", help="block-encoding and walk-spectrum residuals")
    p.add_argument("--input", required=True)
    p.add_argument("--no-shift", action="store_true", help="do not shift negative diagonals away")
    p.add_argument("--out")
    p.set_defaults(func=cmd_walk_check)

    p = sub.add_parser("bessel-table", help="J_m(z) by series and backward recurrence, m = -k..k")
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bessel_table)

    p = sub.add_parser("estimate", help="closed-form resource counts")
    p.add_argument("--input", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("apply-unitary", help="apply U through its Hermitian embedding")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--unitary", help="matrix file (JSON rows)")
    g.add_argument("--random-dim", type=int, help="draw a random unitary of this dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-5)
    _add_state_args(p)
    p.add_argument("--report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_apply_unitary)

    p = sub.add_parser("norm-check", help="||A||_1 <= sqrt(d) ||A|| for row-d-sparse A")
    p.add_argument("--input", help="matrix in Hamiltonian-file format; omit for a random ensemble")
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_norm_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
