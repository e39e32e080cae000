"""Probe the effective generator of the randomized channel: logarithm
existence over a range of step sizes, and the rate at which the generator
approaches the commutator superoperator ad_H.
"""

import argparse

from qflo.analysis import fit_loglog_slope
from qflo.benchmarks import (
    depolarizing_hamiltonian,
    one_qubit_benchmark,
    two_qubit_benchmark,
)
from qflo.generator import generator_probe, log_existence_check


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--benchmark", choices=["one_qubit", "two_qubit"],
                        default="two_qubit")
    parser.add_argument("--time", type=float, default=1.0)
    parser.add_argument("--min-exp", type=int, default=4, help="largest s = 2^-this")
    parser.add_argument("--max-exp", type=int, default=8, help="smallest s = 2^-this")
    args = parser.parse_args()

    H, _, _ = (one_qubit_benchmark if args.benchmark == "one_qubit"
               else two_qubit_benchmark)()
    print(f"benchmark: {args.benchmark}, T = {args.time}")
    print(f"{'s':>12} {'min_eig_mod':>14} {'deviation':>12}")
    s_values, deviations = [], []
    for p in range(args.min_exp, args.max_exp + 1):
        s = 2.0**-p
        report = log_existence_check(H, s * args.time)
        dev = generator_probe(H, s, args.time).deviation
        print(f"{s:>12.6g} {report['min_eig_modulus']:>14.6g} {dev:>12.4e}")
        s_values.append(s)
        deviations.append(dev)
    fit = fit_loglog_slope(s_values, deviations)
    print(f"deviation slope: {fit.slope:.4f}  (r^2 = {fit.r_squared:.6f})")

    dep = depolarizing_hamiltonian()
    import math
    for t_lam in (0.4, math.pi / 2):
        report = log_existence_check(dep, t_lam / dep.lam)
        print(f"depolarizing at t*lambda = {t_lam:.4f}: "
              f"min eigenvalue modulus {report['min_eig_modulus']:.3e}, "
              f"logarithm {'exists' if report['exists'] else 'does not exist'}")


if __name__ == "__main__":
    main()
