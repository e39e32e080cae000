"""The randomized-compilation channel: exact Kraus mixtures, iterated powers,
seeded trajectory sampling of pure states, and projective measurement.

Randomness is organized as counter-based substreams: every (seed, path)
pair maps to an independent PCG64 stream through numpy's SeedSequence
spawn keys, so parallel trajectory generation is reproducible and
order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import HamiltonianDecomposition
from .linalg import check_density_matrix, hermitian_eig, require_hermitian, unitary_exp

UNIT_NORM_TOL = 1e-10
DEGENERACY_TOL = 1e-9
IMAG_RESIDUE_TOL = 1e-10


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (seed, path) via SeedSequence spawn keys."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=path))


def derive_seed(seed: int, *path: int) -> int:
    """64-bit child seed for (seed, path); stable across processes."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=path)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class StepConfig:
    total_time: float
    steps: int
    lam: float

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @property
    def step_time(self) -> float:
        return self.total_time / self.steps


@dataclass(frozen=True)
class Trajectory:
    seed: int
    indices: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class ShotResult:
    value: float


def channel_apply_exact(H: HamiltonianDecomposition, rho, t: float) -> np.ndarray:
    """One exact channel step: sum_j p_j U_j rho U_j^dag with U_j = exp(-i lam t H_j)."""
    rho = check_density_matrix(rho)
    U = H.term_unitaries(H.lam * t)
    out = np.zeros_like(rho)
    for p, Uj in zip(H.probabilities, U):
        out += p * (Uj @ rho @ Uj.conj().T)
    return out


def channel_iterate_exact(H: HamiltonianDecomposition, rho0, T: float, N: int) -> np.ndarray:
    """N exact channel applications with step time T/N."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    rho = check_density_matrix(rho0)
    t = T / N
    U = H.term_unitaries(H.lam * t)
    Ud = U.conj().transpose(0, 2, 1)
    p = H.probabilities
    for _ in range(N):
        rho = np.tensordot(p, U @ rho @ Ud, axes=1)
    return rho


def expectation_exact(H: HamiltonianDecomposition, A, rho0, T: float, N: int) -> float:
    """Noiseless f_A(1/N) = tr[A E^N(rho0)] with step time T/N."""
    A = require_hermitian(A)
    rho = channel_iterate_exact(H, rho0, T, N)
    val = complex(np.trace(A @ rho))
    if abs(val.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(val)):
        raise ArithmeticError(f"expectation has imaginary residue {val.imag:.3e}")
    return val.real


def exact_expectation(H: HamiltonianDecomposition, A, rho0, T: float) -> float:
    """Zero-step-size limit tr[A e^{-iHT} rho0 e^{iHT}] via eigendecomposition."""
    A = require_hermitian(A)
    rho0 = check_density_matrix(rho0)
    U = unitary_exp(H.dense(), T)
    val = complex(np.trace(A @ U @ rho0 @ U.conj().T))
    return val.real


def sample_trajectory(H: HamiltonianDecomposition, N: int, seed: int) -> Trajectory:
    """Sample the N term indices of one trajectory from substream(seed, 0)."""
    rng = substream(seed, 0)
    indices = H.sample_terms(rng, N)
    indices.setflags(write=False)
    return Trajectory(seed=seed, indices=indices)


def evolve_pure_state(psi0, H: HamiltonianDecomposition, trajectory: Trajectory, t: float) -> np.ndarray:
    """Apply exp(-i lam t H_j) for each sampled index in order."""
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(psi) - 1.0) > UNIT_NORM_TOL:
        raise ValueError("initial state is not unit norm")
    U = H.term_unitaries(H.lam * t)
    for j in trajectory.indices:
        psi = U[j] @ psi
    return psi


_GROUP_TABLE_CAP = 4096


def grouped_step_unitaries(unitaries, group: int) -> np.ndarray:
    """Products of ``group`` consecutive step unitaries for every index tuple.

    Entry ``code`` holds U[i_{g-1}] @ ... @ U[i_0] where
    code = i_0 + L i_1 + ... + L^(g-1) i_{g-1} (first-applied term least
    significant).
    """
    table = unitaries
    for _ in range(group - 1):
        # new[j, c] = U[j] @ table[c]; flattening keeps j most significant
        table = np.matmul(unitaries[:, None, :, :], table[None, :, :, :])
        table = table.reshape(-1, *unitaries.shape[1:])
    return table


def _auto_group(L: int, d: int, N: int) -> int:
    group = 1
    while (
        group < 6
        and L ** (group + 1) <= _GROUP_TABLE_CAP
        and L ** (group + 1) * d * d * 16 <= 2 ** 26
        and N >= 4 * (group + 1)
    ):
        group += 1
    return group


def evolve_indexed_batch(psis, unitaries, indices) -> np.ndarray:
    """Evolve a batch of states, each under its own index sequence.

    psis: (B, d), unitaries: (L, d, d), indices: (B, N).  When the term
    count and dimension are small, consecutive steps are folded into a
    precomputed product table; the grouping is fixed by (L, d, N), so
    results stay deterministic for given indices.
    """
    out = np.array(psis, dtype=complex, copy=True)
    L = unitaries.shape[0]
    d = unitaries.shape[1]
    N = indices.shape[1]
    group = _auto_group(L, d, N)
    start = 0
    if group > 1:
        table = grouped_step_unitaries(unitaries, group)
        n_groups = N // group
        start = n_groups * group
        radix = L ** np.arange(group, dtype=np.int64)
        codes = indices[:, :start].astype(np.int64).reshape(-1, n_groups, group) @ radix
        for i in range(n_groups):
            out = np.einsum("bij,bj->bi", table[codes[:, i]], out)
    transposed = [U.T.copy() for U in unitaries]
    for i in range(start, N):
        col = indices[:, i]
        for j in range(L):
            sel = col == j
            if sel.any():
                out[sel] = out[sel] @ transposed[j]
    return out


class ObservableMeasurer:
    """Projective sampling in the eigenbasis of a Hermitian observable.

    Eigenvalues within ``gap_tol`` of each other are merged into a single
    projector so degenerate outcomes are never split.
    """

    def __init__(self, A, gap_tol: float = DEGENERACY_TOL):
        w, V = hermitian_eig(A)
        splits = np.nonzero(np.diff(w) > gap_tol)[0] + 1
        groups = np.split(np.arange(w.size), splits)
        self.values = np.array([w[g].mean() for g in groups])
        self._blocks = [np.ascontiguousarray(V[:, g]) for g in groups]
        self.norm = float(np.abs(w).max())

    def outcome_probabilities(self, psi) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return np.array([
            float(np.sum(np.abs(block.conj().T @ psi) ** 2)) for block in self._blocks
        ])

    def sample(self, psi, rng) -> float:
        return float(self.sample_batch(np.asarray(psi, complex).reshape(1, -1),
                                       np.array([rng.random()]))[0])

    def sample_batch(self, psis, uniforms) -> np.ndarray:
        """One outcome per row of psis, driven by one uniform per row."""
        psis = np.asarray(psis, dtype=complex)
        probs = np.stack(
            [np.sum(np.abs(psis @ block.conj()) ** 2, axis=1) for block in self._blocks],
            axis=1,
        )
        cum = np.cumsum(probs, axis=1)
        cum /= cum[:, -1:]
        idx = np.sum(cum <= uniforms[:, None], axis=1)
        idx = np.minimum(idx, self.values.size - 1)
        return self.values[idx]


_measurer_cache: dict[tuple, ObservableMeasurer] = {}


def observable_measurer(A) -> ObservableMeasurer:
    A = np.asarray(A, dtype=complex)
    key = (A.shape, A.tobytes())
    m = _measurer_cache.get(key)
    if m is None:
        m = ObservableMeasurer(A)
        _measurer_cache[key] = m
    return m


def measure_observable(A, psi, rng) -> ShotResult:
    """One projective shot of A on psi."""
    return ShotResult(value=observable_measurer(A).sample(psi, rng))


def qdrift_run(H: HamiltonianDecomposition, psi0, A, T: float, t_step: float, seed: int) -> ShotResult:
    """One randomized-compilation run followed by one measurement shot.

    N = ceil(T / t_step) steps, each using angle lam * (T / N); the realized
    per-step time is T/N, not t_step.
    """
    if t_step <= 0:
        raise ValueError(f"t_step must be > 0, got {t_step}")
    N = math.ceil(T / t_step)
    traj = sample_trajectory(H, N, seed)
    psi = evolve_pure_state(psi0, H, traj, T / N)
    return measure_observable(A, psi, substream(seed, 1))
