"""Sweep the step count of the randomized-compilation channel and fit the
empirical order of convergence of the noiseless expectation value.
"""

import argparse

import numpy as np

from qflo.analysis import fit_loglog_slope
from qflo.benchmarks import one_qubit_benchmark, two_qubit_benchmark
from qflo.channel import exact_expectation, expectation_exact

BENCHMARKS = {"one_qubit": one_qubit_benchmark, "two_qubit": two_qubit_benchmark}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--benchmark", choices=sorted(BENCHMARKS), default="two_qubit")
    parser.add_argument("--time", type=float, default=1.0)
    parser.add_argument("--n-min-exp", type=int, default=3, help="smallest N = 2^this")
    parser.add_argument("--n-max-exp", type=int, default=10, help="largest N = 2^this")
    args = parser.parse_args()

    H, A, psi0 = BENCHMARKS[args.benchmark]()
    rho0 = np.outer(psi0, psi0.conj())
    exact = exact_expectation(H, A, rho0, args.time)
    print(f"benchmark: {args.benchmark}, T = {args.time}, exact = {exact:.12f}")
    print(f"{'N':>6} {'s':>12} {'value':>16} {'abs_error':>12}")
    s_values, errors = [], []
    for p in range(args.n_min_exp, args.n_max_exp + 1):
        N = 2**p
        value = expectation_exact(H, A, rho0, args.time, N)
        err = abs(value - exact)
        print(f"{N:>6} {1.0 / N:>12.6g} {value:>16.12f} {err:>12.4e}")
        s_values.append(1.0 / N)
        errors.append(err)
    fit = fit_loglog_slope(s_values, errors)
    print(f"fitted slope: {fit.slope:.4f}  (r^2 = {fit.r_squared:.6f})")


if __name__ == "__main__":
    main()
