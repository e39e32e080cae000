"""End-to-end estimator: order selection, step schedule, shot budgeting,
node execution, extrapolation, and error-budget accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    evolve_indexed_batch,
    expectation_exact,
    observable_measurer,
    substream,
)
from .hamiltonian import HamiltonianDecomposition
from .linalg import check_density_matrix, require_hermitian, spectral_norm
from .richardson import (
    ChebyshevNodes,
    StepSchedule,
    Weights,
    build_nodes,
    extrapolate,
    weights_from_steps,
)

SHOT_CHUNK = 4096


@dataclass(frozen=True)
class QfloRequest:
    hamiltonian: HamiltonianDecomposition
    initial_state: np.ndarray          # unit vector, or density matrix
    observable: np.ndarray
    total_time: float
    epsilon: float
    delta: float
    master_seed: int
    mode: str = "noiseless"            # "noiseless" | "shot_sampled"
    order_policy: str = "log"          # "log" | "loglog"
    schedule: str = "squared"          # "squared" | "pseudocode"

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if not self.total_time > 0:
            raise ValueError(f"total_time must be > 0, got {self.total_time}")
        if self.mode not in ("noiseless", "shot_sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.order_policy not in ("log", "loglog"):
            raise ValueError(f"unknown order policy {self.order_policy!r}")
        if self.schedule not in ("squared", "pseudocode"):
            raise ValueError(f"unknown schedule {self.schedule!r}")


@dataclass(frozen=True)
class ErrorBudget:
    extrapolation: float
    data: float


@dataclass(frozen=True)
class NodeStats:
    step_count: int
    shots: int
    mean: float
    standard_error: float


@dataclass(frozen=True)
class QfloResult:
    estimate: float
    per_node: tuple
    weights: Weights
    total_gate_count: int
    max_depth: int
    theoretical_bound: float
    bound_convergent: bool
    error_budget: ErrorBudget
    order: int
    ideal_one_norm: float
    realized_one_norm: float
    shots_per_node: int

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "order": self.order,
            "weights": list(self.weights.b),
            "ideal_one_norm": self.ideal_one_norm,
            "realized_one_norm": self.realized_one_norm,
            "error_budget": {
                "extrapolation": self.error_budget.extrapolation,
                "data": self.error_budget.data,
            },
            "shots_per_node": self.shots_per_node,
            "total_gate_count": self.total_gate_count,
            "max_depth": self.max_depth,
            "theoretical_bound": self.theoretical_bound,
            "bound_convergent": self.bound_convergent,
            "per_node": [
                {
                    "step_count": n.step_count,
                    "shots": n.shots,
                    "mean": n.mean,
                    "standard_error": n.standard_error,
                }
                for n in self.per_node
            ],
        }


def select_order(epsilon: float, policy: str = "log") -> int:
    """Extrapolation order from the target precision; floored at 2.

    The default is ceil(ln(1/eps)); the "loglog" policy divides by the
    iterated logarithm, trading order for depth at small eps.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    L = math.log(1.0 / epsilon)
    if policy == "log":
        m = math.ceil(L)
    elif policy == "loglog":
        m = math.ceil(L / max(math.log(L), 1.0))
    else:
        raise ValueError(f"unknown order policy {policy!r}")
    return max(m, 2)


def base_step_count(lam: float, T: float, epsilon: float, m: int, one_norm: float,
                    schedule: str = "squared") -> int:
    """Finest-node step count N_m = ceil(4 (8 lam T)^2 (|b|_1 / eps)^(1/m)).

    The "pseudocode" schedule swaps |b|_1 for ln(m) in the power factor.
    """
    if lam * T <= 0:
        raise ValueError("lambda * T must be > 0")
    factor = one_norm if schedule == "squared" else math.log(m)
    return math.ceil(4.0 * (8.0 * lam * T) ** 2 * (factor / epsilon) ** (1.0 / m))


def step_counts(nodes: ChebyshevNodes, N_m: int, total_time: float) -> StepSchedule:
    """Realized integer step counts N_j = ceil(N_m y_j / y_m), made distinct."""
    if N_m < 1:
        raise ValueError(f"N_m must be >= 1, got {N_m}")
    y = nodes.y
    N = np.array([math.ceil(N_m * int(yj) / int(y[-1])) for yj in y], dtype=np.int64)
    # y decreasing along the node order => N decreasing; dedup upward.
    for i in range(N.size - 2, -1, -1):
        if N[i] <= N[i + 1]:
            N[i] = N[i + 1] + 1
    return StepSchedule(step_counts=N, total_time=total_time,
                        scale=float(int(y[-1])) / float(N[-1]))


def budget_split(epsilon: float, one_norm: float) -> ErrorBudget:
    """eps_ext = eps/2 and eps_data = eps/(2 |b|_1), so that
    eps_ext + |b|_1 * eps_data = eps exactly as computed."""
    if epsilon <= 0 or one_norm <= 0:
        raise ValueError("epsilon and one_norm must be > 0")
    return ErrorBudget(extrapolation=epsilon / 2.0, data=epsilon / (2.0 * one_norm))


def shots_per_node(norm_A: float, eps_data: float, delta: float, m: int) -> int:
    """Two-sided Hoeffding budget over m simultaneous node estimates."""
    if eps_data <= 0:
        raise ValueError(f"eps_data must be > 0, got {eps_data}")
    return math.ceil((norm_A / eps_data) ** 2 * math.log(2.0 * m / delta))


def richardson_error_bound(lam: float, T: float, s_m: float, m: int,
                           norm_A: float, one_norm: float,
                           term_tol: float = 1e-16, max_terms: int = 200):
    """Extrapolation-error series |A| |b|_1 sum_{j>=m} (8 lam T s_m)^j
    * sum_{l=1}^m (8 lam T)^l / l!.

    Returns (bound, convergent); non-convergent (ratio >= 1) is reported,
    never summed.
    """
    q = 8.0 * lam * T * s_m
    if q >= 1.0:
        return math.inf, False
    x = 8.0 * lam * T
    inner = 0.0
    fact = 1.0
    for l in range(1, m + 1):
        fact *= l
        inner += x ** l / fact
    total = 0.0
    term = q ** m
    for _ in range(max_terms):
        total += term
        term *= q
        if term < term_tol:
            break
    return norm_A * one_norm * inner * total, True


def _is_density_matrix(state) -> bool:
    state = np.asarray(state)
    return state.ndim == 2


def _noiseless_node_values(H, A, initial_state, T, schedule: StepSchedule) -> list:
    if _is_density_matrix(initial_state):
        rho0 = check_density_matrix(initial_state)
    else:
        psi = np.asarray(initial_state, dtype=complex).reshape(-1)
        rho0 = np.outer(psi, psi.conj())
    return [expectation_exact(H, A, rho0, T, int(N)) for N in schedule.step_counts]


def _shot_node_mean(H, A, initial_state, T, N: int, shots: int,
                    master_seed: int, node_index: int):
    """Mean and standard error over ``shots`` independent trajectories.

    Each shot uses the substream (master_seed, node_index, shot_index); the
    fixed draw order per shot is: measurement uniform, initial-state uniform
    (mixed states only), then the N trajectory uniforms.
    """
    t = T / N
    U = H.term_unitaries(H.lam * t)
    measurer = observable_measurer(A)
    mixed = _is_density_matrix(initial_state)
    if mixed:
        rho0 = check_density_matrix(initial_state)
        evals, evecs = np.linalg.eigh((rho0 + rho0.conj().T) / 2.0)
        keep = evals > 1e-12
        pops = evals[keep] / evals[keep].sum()
        pop_cdf = np.cumsum(pops)
        pop_cdf[-1] = 1.0
        basis = evecs[:, keep]
    else:
        psi0 = np.asarray(initial_state, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
            raise ValueError("initial state is not unit norm")
    values = np.empty(shots)
    idx_dtype = np.uint8 if len(H) < 256 else np.int64
    for start in range(0, shots, SHOT_CHUNK):
        stop = min(start + SHOT_CHUNK, shots)
        B = stop - start
        indices = np.empty((B, N), dtype=idx_dtype)
        u_meas = np.empty(B)
        u_init = np.empty(B)
        for b in range(B):
            rng = substream(master_seed, node_index, start + b)
            u_meas[b] = rng.random()
            u_init[b] = rng.random()
            indices[b] = H.sample_terms(rng, N)
        if mixed:
            choice = np.minimum(
                np.sum(pop_cdf[None, :] <= u_init[:, None], axis=1), pops.size - 1
            )
            psis = basis.T[choice]
        else:
            psis = np.broadcast_to(psi0, (B, psi0.size))
        finals = evolve_indexed_batch(psis, U, indices)
        values[start:stop] = measurer.sample_batch(finals, u_meas)
    mean = float(np.mean(values))
    if shots > 1:
        se = float(np.std(values, ddof=1) / math.sqrt(shots))
    else:
        se = 0.0
    return mean, se


def richardson_estimate_noiseless(H, initial_state, A, T: float, m: int, N_m: int,
                                  schedule: str = "squared"):
    """Noiseless order-m estimate at finest step count N_m.

    Returns (estimate, StepSchedule, Weights); the backbone of the
    order-scaling experiments, where N_m is swept directly.
    """
    nodes = build_nodes(m, squared=(schedule == "squared"))
    sched = step_counts(nodes, N_m, T)
    weights = weights_from_steps(sched.step_times)
    values = _noiseless_node_values(H, require_hermitian(A), initial_state, T, sched)
    return extrapolate(values, weights), sched, weights


def run(request: QfloRequest) -> QfloResult:
    H = request.hamiltonian
    A = require_hermitian(request.observable)
    T = request.total_time
    m = select_order(request.epsilon, request.order_policy)
    nodes = build_nodes(m, squared=(request.schedule == "squared"))

    # Budget split uses ideal-node weights: it must be fixed before shots
    # are allocated, and only the ratios of the nodes matter.
    ideal_weights = weights_from_steps(1.0 / nodes.y.astype(float))
    budget = budget_split(request.epsilon, ideal_weights.one_norm)

    N_m = base_step_count(H.lam, T, budget.extrapolation, m,
                          ideal_weights.one_norm, request.schedule)
    sched = step_counts(nodes, N_m, T)
    weights = weights_from_steps(sched.step_times)

    norm_A = spectral_norm(A)
    if request.mode == "noiseless":
        shots = 0
        values = _noiseless_node_values(H, A, request.initial_state, T, sched)
        per_node = tuple(
            NodeStats(step_count=int(N), shots=0, mean=v, standard_error=0.0)
            for N, v in zip(sched.step_counts, values)
        )
    else:
        shots = shots_per_node(norm_A, budget.data, request.delta, m)
        stats = []
        for node_index, N in enumerate(sched.step_counts):
            mean, se = _shot_node_mean(
                H, A, request.initial_state, T, int(N), shots,
                request.master_seed, node_index,
            )
            stats.append(NodeStats(step_count=int(N), shots=shots,
                                   mean=mean, standard_error=se))
        per_node = tuple(stats)
        values = [n.mean for n in per_node]

    estimate = extrapolate(values, weights)
    s_m = 1.0 / int(sched.step_counts[-1])
    bound, convergent = richardson_error_bound(
        H.lam, T, s_m, m, norm_A, weights.one_norm
    )
    return QfloResult(
        estimate=estimate,
        per_node=per_node,
        weights=weights,
        total_gate_count=int(np.sum(sched.step_counts * max(shots, 1))),
        max_depth=int(sched.step_counts.max()),
        theoretical_bound=bound,
        bound_convergent=convergent,
        error_budget=budget,
        order=m,
        ideal_one_norm=ideal_weights.one_norm,
        realized_one_norm=weights.one_norm,
        shots_per_node=shots,
    )
