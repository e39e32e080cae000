"""Command-line harness: node tables, channel runs, convergence scans,
generator probes, order-scaling fits, and full pipeline estimates.

Exit codes: 0 success, 2 usage errors, 3 numerical failures (logarithm
nonexistence, non-convergent error bound).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import secrets
import sys

import numpy as np

from . import __version__
from .analysis import fit_loglog_slope
from .channel import (
    derive_seed,
    exact_expectation,
    expectation_exact,
    qdrift_run,
)
from .generator import generator_probe, log_existence_check
from .hamiltonian import HamiltonianFormatError, load_hamiltonian
from .linalg import LogarithmError, NearDefectiveError, spectral_norm
from .pipeline import QfloRequest, richardson_estimate_noiseless, run
from .richardson import build_nodes, weights_from_steps

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def thread_cap() -> int:
    """Parallelism cap from QFLO_THREADS (execution is currently serial,
    which trivially respects any positive cap)."""
    raw = os.environ.get("QFLO_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"QFLO_THREADS must be a positive integer, got {raw!r}") from None
    if cap < 1:
        raise UsageError(f"QFLO_THREADS must be a positive integer, got {raw!r}")
    return cap


def resolve_seed(seed: int) -> int:
    """Seed 0 means: derive from entropy and report the derived value."""
    if seed != 0:
        return seed
    derived = secrets.randbits(63)
    print(f"derived master seed: {derived}", file=sys.stderr)
    return derived


def _write_csv(header, rows, out_path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    data = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def _write_json(payload, json_path):
    if not json_path:
        return
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_list(text, cast, flag):
    try:
        values = [cast(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"{flag}: could not parse {text!r}") from None
    if not values:
        raise UsageError(f"{flag}: empty list")
    return values


def parse_state(spec: str, n_qubits: int) -> np.ndarray:
    """Computational basis labels ('0...0', '01', ...) or 'plus' / 'plus^n'."""
    dim = 2 ** n_qubits
    if set(spec) <= {"0", "1"} and spec:
        if len(spec) != n_qubits:
            raise UsageError(
                f"--state label {spec!r} has {len(spec)} qubits, Hamiltonian has {n_qubits}"
            )
        psi = np.zeros(dim, dtype=complex)
        psi[int(spec, 2)] = 1.0
        return psi
    base, _, power = spec.partition("^")
    if base == "plus":
        if power and int(power) != n_qubits:
            raise UsageError(
                f"--state {spec!r} does not match the {n_qubits}-qubit Hamiltonian"
            )
        return np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)
    raise UsageError(f"--state {spec!r}: expected a 0/1 basis label or 'plus^n'")


def _load(path, what):
    try:
        return load_hamiltonian(path)
    except FileNotFoundError:
        raise UsageError(f"{what} file not found: {path}") from None
    except HamiltonianFormatError as exc:
        raise UsageError(f"{what} {path}: {exc}") from None


def cmd_nodes(args) -> int:
    nodes = build_nodes(args.m, squared=not args.pseudocode_schedule)
    weights = weights_from_steps(1.0 / nodes.y.astype(float))
    rows = [
        (j + 1, nodes.x[j], int(nodes.k[j]), int(nodes.y[j]), weights.b[j])
        for j in range(args.m)
    ]
    _write_csv(["j", "x_j", "k_j", "y_j", "b_j"], rows, args.out)
    _write_json(
        {
            "command": "nodes",
            "inputs": {"m": args.m, "pseudocode_schedule": bool(args.pseudocode_schedule)},
            "outputs": {"R": nodes.R, "one_norm": weights.one_norm},
        },
        args.json,
    )
    return EXIT_OK


def cmd_qdrift(args) -> int:
    H = _load(args.hamiltonian, "Hamiltonian")
    A = _load(args.observable, "observable").dense()
    psi0 = parse_state(args.state, H.n_qubits)
    seed = resolve_seed(args.seed)
    t_step = args.time / args.steps
    rows = []
    for shot in range(args.shots):
        result = qdrift_run(H, psi0, A, args.time, t_step, derive_seed(seed, shot))
        rows.append((shot, result.value))
    values = np.array([r[1] for r in rows])
    _write_csv(["shot", "value"], rows, args.out)
    _write_json(
        {
            "command": "qdrift",
            "inputs": {
                "hamiltonian": args.hamiltonian,
                "observable": args.observable,
                "state": args.state,
                "time": args.time,
                "steps": args.steps,
                "shots": args.shots,
                "seed": seed,
            },
            "outputs": {
                "mean": float(values.mean()),
                "std": float(values.std(ddof=1)) if args.shots > 1 else 0.0,
            },
        },
        args.json,
    )
    return EXIT_OK


def cmd_scan(args) -> int:
    H = _load(args.hamiltonian, "Hamiltonian")
    A = _load(args.observable, "observable").dense()
    psi0 = parse_state(args.state, H.n_qubits)
    rho0 = np.outer(psi0, psi0.conj())
    n_list = _parse_list(args.n_list, int, "--n-list")
    exact = exact_expectation(H, A, rho0, args.time)
    rows = []
    for N in n_list:
        value = expectation_exact(H, A, rho0, args.time, N)
        rows.append((N, 1.0 / N, value, exact, abs(value - exact)))
    _write_csv(["N", "s", "value", "exact", "abs_error"], rows, args.out)
    errors = [r[4] for r in rows]
    summary = {"exact": exact}
    if len(rows) >= 4 and all(e > 0 for e in errors):
        fit = fit_loglog_slope([r[1] for r in rows], errors)
        summary.update({"slope": fit.slope, "r_squared": fit.r_squared})
    _write_json(
        {
            "command": "scan",
            "inputs": {
                "hamiltonian": args.hamiltonian,
                "observable": args.observable,
                "state": args.state,
                "time": args.time,
                "n_list": n_list,
            },
            "outputs": summary,
        },
        args.json,
    )
    return EXIT_OK


def cmd_generator(args) -> int:
    H = _load(args.hamiltonian, "Hamiltonian")
    s_list = _parse_list(args.s_list, float, "--s-list")
    rows = []
    failed = False
    for s in s_list:
        t = s * args.time
        report = log_existence_check(H, t)
        if report["exists"]:
            probe = generator_probe(H, s, args.time)
            deviation = probe.deviation
        else:
            deviation = math.nan
            failed = True
        rows.append((s, t, report["min_eig_modulus"], report["exists"], deviation))
    _write_csv(["s", "t", "min_eig_modulus", "log_exists", "deviation"], rows, args.out)
    summary = {}
    devs = [r[4] for r in rows if not math.isnan(r[4])]
    ss = [r[0] for r in rows if not math.isnan(r[4])]
    if len(devs) >= 4 and all(d > 0 for d in devs):
        fit = fit_loglog_slope(ss, devs)
        summary = {"slope": fit.slope, "r_squared": fit.r_squared}
    _write_json(
        {
            "command": "generator",
            "inputs": {"hamiltonian": args.hamiltonian, "time": args.time, "s_list": s_list},
            "outputs": summary,
        },
        args.json,
    )
    if failed:
        raise NumericalFailure("logarithm does not exist at one or more probed step sizes")
    return EXIT_OK


def cmd_qflo(args) -> int:
    H = _load(args.hamiltonian, "Hamiltonian")
    A = _load(args.observable, "observable").dense()
    psi0 = parse_state(args.state, H.n_qubits)
    seed = resolve_seed(args.seed)
    try:
        request = QfloRequest(
            hamiltonian=H,
            initial_state=psi0,
            observable=A,
            total_time=args.time,
            epsilon=args.epsilon,
            delta=args.delta,
            master_seed=seed,
            mode=args.mode,
            order_policy=args.order_policy,
            schedule=args.schedule,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = run(request)
    rows = [
        (i, n.step_count, n.shots, n.mean, n.standard_error, result.weights.b[i])
        for i, n in enumerate(result.per_node)
    ]
    _write_csv(
        ["node", "step_count", "shots", "mean", "standard_error", "weight"],
        rows,
        args.out,
    )
    _write_json(
        {
            "command": "qflo",
            "inputs": {
                "hamiltonian": args.hamiltonian,
                "observable": args.observable,
                "state": args.state,
                "time": args.time,
                "epsilon": args.epsilon,
                "delta": args.delta,
                "seed": seed,
                "mode": args.mode,
                "order_policy": args.order_policy,
                "schedule": args.schedule,
            },
            "outputs": result.to_dict(),
        },
        args.json,
    )
    if not result.bound_convergent:
        raise NumericalFailure(
            "extrapolation-error bound is non-convergent (8 lambda T s_m >= 1)"
        )
    print(f"estimate: {_fmt(result.estimate)}", file=sys.stderr)
    return EXIT_OK


def cmd_orderfit(args) -> int:
    H = _load(args.hamiltonian, "Hamiltonian")
    A = _load(args.observable, "observable").dense()
    psi0 = parse_state(args.state, H.n_qubits)
    rho0 = np.outer(psi0, psi0.conj())
    m_list = _parse_list(args.m_list, int, "--m-list")
    scale_list = _parse_list(args.scale_list, float, "--scale-list")
    exact = exact_expectation(H, A, rho0, args.time)
    rows = []
    slopes = {}
    for m in m_list:
        s_values, errors = [], []
        for scale in scale_list:
            N_m = math.ceil(args.n_base / scale)
            estimate, sched, _ = richardson_estimate_noiseless(
                H, psi0, A, args.time, m, N_m
            )
            s_m = 1.0 / int(sched.step_counts[-1])
            err = abs(estimate - exact)
            rows.append((m, scale, int(sched.step_counts[-1]), s_m, err))
            s_values.append(s_m)
            errors.append(err)
        if len(errors) >= 4 and all(e > 0 for e in errors):
            fit = fit_loglog_slope(s_values, errors)
            slopes[str(m)] = {"slope": fit.slope, "r_squared": fit.r_squared}
    _write_csv(["m", "scale", "N_m", "s_m", "abs_error"], rows, args.out)
    _write_json(
        {
            "command": "orderfit",
            "inputs": {
                "hamiltonian": args.hamiltonian,
                "observable": args.observable,
                "state": args.state,
                "time": args.time,
                "m_list": m_list,
                "scale_list": scale_list,
                "n_base": args.n_base,
            },
            "outputs": {"exact": exact, "slopes": slopes},
        },
        args.json,
    )
    return EXIT_OK


def _add_common(p):
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--json", help="JSON summary output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qflo",
        description="Randomized-compilation time evolution with Richardson extrapolation",
    )
    parser.add_argument("--version", action="version", version=f"qflo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nodes", help="print the Chebyshev node/weight table")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--pseudocode-schedule", action="store_true",
                   help="use unsquared step-count ratios")
    _add_common(p)
    p.set_defaults(func=cmd_nodes)

    p = sub.add_parser("qdrift", help="run measurement shots of the randomized channel")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--state", default=None)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_qdrift)

    p = sub.add_parser("scan", help="noiseless first-order convergence scan over N")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--state", default=None)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--n-list", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("generator", help="logarithm existence and generator deviation probe")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--s-list", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_generator)

    p = sub.add_parser("qflo", help="full shot-budgeted pipeline estimate")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--state", default=None)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=["noiseless", "shot_sampled"], default="noiseless")
    p.add_argument("--order-policy", choices=["log", "loglog"], default="log")
    p.add_argument("--schedule", choices=["squared", "pseudocode"], default="squared")
    _add_common(p)
    p.set_defaults(func=cmd_qflo)

    p = sub.add_parser("orderfit", help="noiseless estimator error vs finest step size")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--state", default=None)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--m-list", required=True)
    p.add_argument("--scale-list", required=True)
    p.add_argument("--n-base", type=int, default=8)
    _add_common(p)
    p.set_defaults(func=cmd_orderfit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        thread_cap()
        if getattr(args, "state", "skip") is None:
            args.state = "0" * _load(args.hamiltonian, "Hamiltonian").n_qubits
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LogarithmError, NearDefectiveError, NumericalFailure, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
