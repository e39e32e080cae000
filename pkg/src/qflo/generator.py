"""Spectral analysis of the channel superoperator: logarithm existence,
the effective generator G(s) with E_s = exp(-i s T G(s)), its convergence
to ad_H, and finite-difference probes of the series coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import DimensionCapError, HamiltonianDecomposition
from .linalg import (
    LOG_EIG_TOL,
    adjoint_superoperator,
    matrix_log_principal,
    spectral_norm,
)

SUPEROP_QUBIT_CAP = 4


class ConditioningError(ArithmeticError):
    """Divided-difference table too cancellation-dominated to trust."""


@dataclass(frozen=True)
class GeneratorProbe:
    s: float
    t: float
    generator: np.ndarray
    deviation: float  # spectral norm of G(s) - ad_H


@dataclass(frozen=True)
class SeriesProbeResult:
    orders: tuple
    coefficients: np.ndarray
    fit_residual: float
    condition_number: float


def channel_superoperator(H: HamiltonianDecomposition, t: float,
                          qubit_cap: int = SUPEROP_QUBIT_CAP) -> np.ndarray:
    """sum_j p_j conj(U_j) (x) U_j with U_j = exp(-i lam t H_j)."""
    if H.n_qubits > qubit_cap:
        raise DimensionCapError(
            f"superoperator construction capped at {qubit_cap} qubits, got {H.n_qubits}"
        )
    U = H.term_unitaries(H.lam * t)
    d2 = H.dim ** 2
    S = np.zeros((d2, d2), dtype=complex)
    for p, Uj in zip(H.probabilities, U):
        S += p * np.kron(Uj.conj(), Uj)
    return S


def log_existence_check(H: HamiltonianDecomposition, t: float) -> dict:
    """Minimum eigenvalue modulus of the channel superoperator.

    Reports rather than throws; existence holds whenever the smallest
    modulus stays above the logarithm tolerance.  For t < 1/(2 lambda)
    existence is guaranteed.
    """
    S = channel_superoperator(H, t)
    w = np.linalg.eigvals(S)
    min_mod = float(np.abs(w).min())
    return {"min_eig_modulus": min_mod, "exists": min_mod > LOG_EIG_TOL}


def generator_probe(H: HamiltonianDecomposition, s: float, T: float,
                    qubit_cap: int = SUPEROP_QUBIT_CAP) -> GeneratorProbe:
    """G(s) = log(E_s) / (-i s T) and its spectral-norm distance to ad_H."""
    if s <= 0:
        raise ValueError(f"inverse step count s must be > 0, got {s}")
    t = s * T
    S = channel_superoperator(H, t, qubit_cap=qubit_cap)
    G = matrix_log_principal(S) / (-1j * s * T)
    ad_H = adjoint_superoperator(H.dense())
    deviation = spectral_norm(G - ad_H)
    return GeneratorProbe(s=s, t=t, generator=G, deviation=deviation)


def series_probe(s_values, f_values, f_zero: float, max_order: int,
                 cond_cap: float = 1e12) -> SeriesProbeResult:
    """Least-squares fit of f(s) - f_zero against powers s^1..s^max_order.

    ``f_zero`` is the zero-step-size limit from the exact-evolution oracle.
    Refuses fits whose design-matrix condition number exceeds ``cond_cap``.
    """
    s = np.asarray(s_values, dtype=float)
    f = np.asarray(f_values, dtype=float)
    if s.size != f.size:
        raise ValueError("s_values and f_values lengths differ")
    if s.size < max_order + 1:
        raise ValueError(
            f"need at least {max_order + 1} nodes for a degree-{max_order} fit, got {s.size}"
        )
    if np.unique(s).size != s.size:
        raise ValueError("series probe nodes must be distinct")
    design = np.vander(s, max_order + 1, increasing=True)[:, 1:]
    cond = float(np.linalg.cond(design))
    if cond > cond_cap:
        raise ConditioningError(
            f"series fit refused: design condition number {cond:.3e} > {cond_cap:.1e}"
        )
    coeffs, residuals, _, _ = np.linalg.lstsq(design, f - f_zero, rcond=None)
    if residuals.size:
        residual = float(np.sqrt(residuals[0]))
    else:
        residual = float(np.linalg.norm(design @ coeffs - (f - f_zero)))
    return SeriesProbeResult(
        orders=tuple(range(1, max_order + 1)),
        coefficients=coeffs,
        fit_residual=residual,
        condition_number=cond,
    )


def _divided_difference(nodes, matrices) -> np.ndarray:
    """Top entry of the Newton divided-difference table over matrix values."""
    table = [np.array(M, copy=True) for M in matrices]
    n = len(table)
    for level in range(1, n):
        for i in range(n - level):
            table[i] = (table[i + 1] - table[i]) / (nodes[i + level] - nodes[i])
    return table[0]


def ek_bound_probe(H: HamiltonianDecomposition, T: float, k: int) -> dict:
    """Estimate the k-th generator-series coefficient norm against (4 lambda)^k.

    G(s) = ad_H + sum_{j>=1} E_{j+1} (sT)^j, so the coefficient of s^(k-1)
    in G(s) - ad_H is E_k T^(k-1).  A (k-1)-th divided difference over nodes
    s = h, 2h, ..., kh recovers it up to O(h); h = 0.1 / (T lambda 2^k)
    balances truncation against cancellation.
    """
    if k not in (2, 3, 4):
        raise ValueError(f"probe supports k in {{2, 3, 4}}, got {k}")
    h = 0.1 / (T * H.lam * 2 ** k)
    nodes = np.array([i * h for i in range(1, k + 1)])
    ad_H = adjoint_superoperator(H.dense())
    deltas = [generator_probe(H, s, T).generator - ad_H for s in nodes]
    dd = _divided_difference(nodes, deltas)
    estimate = spectral_norm(dd) / T ** (k - 1)
    bound = (4.0 * H.lam) ** k
    # Rounding in the matrix log is amplified by h^-(k-1) in the difference table.
    input_scale = max(spectral_norm(d) for d in deltas)
    noise_floor = 1e-13 * max(input_scale, spectral_norm(ad_H)) / (h ** (k - 1) * math.factorial(k - 1))
    noise_floor /= T ** (k - 1)
    if noise_floor > max(estimate, 0.05 * bound):
        raise ConditioningError(
            f"divided-difference probe unreliable: noise floor {noise_floor:.3e} "
            f"exceeds estimate {estimate:.3e}"
        )
    return {"estimate": estimate, "bound": bound, "noise_floor": noise_floor}
