import math

import numpy as np
import pytest

from qflo.channel import exact_expectation, expectation_exact
from qflo.pipeline import (
    QfloRequest,
    base_step_count,
    budget_split,
    richardson_error_bound,
    richardson_estimate_noiseless,
    run,
    select_order,
    shots_per_node,
    step_counts,
)
from qflo.richardson import build_nodes, extrapolate, weights_from_steps


class TestSelectOrder:
    def test_fixtures(self):
        assert select_order(0.01) == 5
        assert select_order(0.5) == 2
        assert select_order(0.05) == 3

    def test_floor_at_two(self):
        assert select_order(0.9) == 2

    def test_loglog_policy_is_lower(self):
        assert select_order(1e-6, "loglog") == 6
        assert select_order(1e-6, "loglog") < select_order(1e-6, "log")

    def test_validation(self):
        with pytest.raises(ValueError):
            select_order(0.0)
        with pytest.raises(ValueError):
            select_order(0.1, "bogus")


class TestStepBudgeting:
    def test_base_step_count_fixture(self):
        assert base_step_count(1.0, 1.0, 0.01, 5, 1.0) == 644

    def test_base_step_count_formula(self):
        lam, T, eps, m, bn = 0.8, 1.3, 0.02, 4, 1.6
        expected = math.ceil(4 * (8 * lam * T) ** 2 * (bn / eps) ** (1 / m))
        assert base_step_count(lam, T, eps, m, bn) == expected

    def test_pseudocode_variant_uses_log_m(self):
        got = base_step_count(1.0, 1.0, 0.01, 5, 7.0, schedule="pseudocode")
        expected = math.ceil(4 * 64 * (math.log(5) / 0.01) ** (1 / 5))
        assert got == expected

    def test_step_counts_scale_with_finest(self):
        nodes = build_nodes(2)
        sched = step_counts(nodes, 16, 1.0)
        assert list(sched.step_counts) == [100, 16]
        sched = step_counts(nodes, 32, 1.0)
        assert list(sched.step_counts) == [200, 32]

    def test_step_counts_dedup_keeps_strict_order(self):
        nodes = build_nodes(8)
        sched = step_counts(nodes, 1, 1.0)
        N = sched.step_counts
        assert np.all(np.diff(N) < 0)
        raw = [math.ceil(int(y) / int(nodes.y[-1])) for y in nodes.y]
        assert np.all(N >= raw)
        assert N[-1] == 1

    def test_step_counts_validation(self):
        with pytest.raises(ValueError):
            step_counts(build_nodes(2), 0, 1.0)

    def test_budget_identity(self):
        for eps, bn in [(0.1, 1.38), (0.03, 2.0), (0.5, 1.0)]:
            budget = budget_split(eps, bn)
            assert budget.extrapolation + bn * budget.data == pytest.approx(eps, rel=1e-15)

    def test_shots_fixture(self):
        assert shots_per_node(1.0, 0.1, 0.05, 3) == 479

    def test_shots_monotone(self):
        base = shots_per_node(1.0, 0.05, 0.1, 4)
        assert shots_per_node(1.0, 0.025, 0.1, 4) > base
        assert shots_per_node(2.0, 0.05, 0.1, 4) > base
        assert shots_per_node(1.0, 0.05, 0.01, 4) > base


class TestErrorBound:
    def test_nonconvergent_reported(self):
        bound, convergent = richardson_error_bound(
            lam=1.0, T=1.0, s_m=0.2, m=2, norm_A=1.0, one_norm=1.4
        )
        assert not convergent
        assert bound == math.inf

    def test_convergent_small_step(self):
        bound, convergent = richardson_error_bound(
            lam=1.0, T=1.0, s_m=1e-3, m=3, norm_A=1.0, one_norm=1.4
        )
        assert convergent
        assert 0 < bound < 1.0

    def test_decreases_with_step(self):
        args = dict(lam=1.0, T=1.0, m=3, norm_A=1.0, one_norm=1.4)
        b1, _ = richardson_error_bound(s_m=1e-3, **args)
        b2, _ = richardson_error_bound(s_m=5e-4, **args)
        assert b2 < b1

    def test_scales_with_observable_norm(self):
        args = dict(lam=1.0, T=1.0, s_m=1e-3, m=3, one_norm=1.4)
        b1, _ = richardson_error_bound(norm_A=1.0, **args)
        b2, _ = richardson_error_bound(norm_A=3.0, **args)
        assert b2 == pytest.approx(3 * b1)


class TestNoiselessEstimate:
    def test_beats_single_node(self, one_qubit):
        H, A, psi0 = one_qubit
        T = 1.0
        rho = np.outer(psi0, psi0.conj())
        exact = exact_expectation(H, A, rho, T)
        est, sched, _ = richardson_estimate_noiseless(H, psi0, A, T, m=3, N_m=32)
        single = expectation_exact(H, A, rho, T, int(sched.step_counts[-1]))
        assert abs(est - exact) < abs(single - exact) / 10

    def test_order_two_error_scaling(self, one_qubit):
        # order-m error should fall ~ N^-m when N_m doubles
        H, A, psi0 = one_qubit
        rho = np.outer(psi0, psi0.conj())
        exact = exact_expectation(H, A, rho, 1.0)
        e1 = abs(richardson_estimate_noiseless(H, psi0, A, 1.0, 2, 16)[0] - exact)
        e2 = abs(richardson_estimate_noiseless(H, psi0, A, 1.0, 2, 32)[0] - exact)
        assert e1 / e2 == pytest.approx(4.0, rel=0.5)

    def test_accepts_density_matrix(self, one_qubit):
        H, A, psi0 = one_qubit
        rho = np.outer(psi0, psi0.conj())
        a, _, _ = richardson_estimate_noiseless(H, psi0, A, 1.0, 2, 16)
        b, _, _ = richardson_estimate_noiseless(H, rho, A, 1.0, 2, 16)
        assert a == pytest.approx(b, abs=1e-14)

    def test_mixed_state_is_convex(self, one_qubit):
        H, A, _ = one_qubit
        e0 = np.array([1, 0], dtype=complex)
        e1 = np.array([0, 1], dtype=complex)
        rho = 0.5 * np.eye(2, dtype=complex)
        v0, _, _ = richardson_estimate_noiseless(H, e0, A, 1.0, 2, 16)
        v1, _, _ = richardson_estimate_noiseless(H, e1, A, 1.0, 2, 16)
        vm, _, _ = richardson_estimate_noiseless(H, rho, A, 1.0, 2, 16)
        assert vm == pytest.approx(0.5 * (v0 + v1), abs=1e-12)


class TestNoiseAmplification:
    def test_constant_shift_passes_through(self, rng):
        # sum of weights is 1, so a constant data offset shifts the estimate by itself
        nodes = build_nodes(4)
        w = weights_from_steps(1.0 / nodes.y)
        f = rng.normal(size=4)
        c = 0.37
        assert extrapolate(f + c, w) == pytest.approx(extrapolate(f, w) + c, abs=1e-12)

    def test_bounded_noise_amplifies_by_one_norm(self, rng):
        nodes = build_nodes(4)
        w = weights_from_steps(1.0 / nodes.y)
        f = rng.normal(size=4)
        eta = 0.01
        for _ in range(50):
            noise = rng.uniform(-eta, eta, size=4)
            shift = abs(extrapolate(f + noise, w) - extrapolate(f, w))
            assert shift <= w.one_norm * eta + 1e-12


class TestRequestValidation:
    def _request(self, one_qubit, **kw):
        H, A, psi0 = one_qubit
        args = dict(
            hamiltonian=H, initial_state=psi0, observable=A,
            total_time=1.0, epsilon=0.1, delta=0.1, master_seed=1,
        )
        args.update(kw)
        return QfloRequest(**args)

    def test_bad_epsilon(self, one_qubit):
        with pytest.raises(ValueError):
            self._request(one_qubit, epsilon=0.0)
        with pytest.raises(ValueError):
            self._request(one_qubit, epsilon=1.5)

    def test_bad_delta(self, one_qubit):
        with pytest.raises(ValueError):
            self._request(one_qubit, delta=0.0)

    def test_bad_time(self, one_qubit):
        with pytest.raises(ValueError):
            self._request(one_qubit, total_time=-1.0)

    def test_bad_mode_and_policy(self, one_qubit):
        with pytest.raises(ValueError):
            self._request(one_qubit, mode="exactish")
        with pytest.raises(ValueError):
            self._request(one_qubit, order_policy="sqrt")
        with pytest.raises(ValueError):
            self._request(one_qubit, schedule="cubed")


class TestRunNoiseless:
    def test_within_theoretical_bound(self, one_qubit):
        H, A, psi0 = one_qubit
        T = 0.4
        req = QfloRequest(H, psi0, A, total_time=T, epsilon=0.3, delta=0.3, master_seed=1)
        res = run(req)
        exact = exact_expectation(H, A, np.outer(psi0, psi0.conj()), T)
        assert res.bound_convergent
        assert abs(res.estimate - exact) <= res.theoretical_bound
        assert res.theoretical_bound <= req.epsilon

    def test_budget_and_accounting(self, one_qubit):
        H, A, psi0 = one_qubit
        req = QfloRequest(H, psi0, A, total_time=0.4, epsilon=0.3, delta=0.3, master_seed=1)
        res = run(req)
        assert res.order == 2
        assert res.shots_per_node == 0
        assert all(n.shots == 0 and n.standard_error == 0.0 for n in res.per_node)
        counts = [n.step_count for n in res.per_node]
        assert res.max_depth == max(counts)
        assert res.total_gate_count == sum(counts)
        budget = res.error_budget
        assert budget.extrapolation + res.ideal_one_norm * budget.data == pytest.approx(
            req.epsilon
        )

    def test_to_dict_round_numbers(self, one_qubit):
        H, A, psi0 = one_qubit
        req = QfloRequest(H, psi0, A, total_time=0.4, epsilon=0.3, delta=0.3, master_seed=1)
        d = run(req).to_dict()
        assert set(d) >= {
            "estimate", "order", "weights", "error_budget", "per_node",
            "total_gate_count", "max_depth", "theoretical_bound",
        }
        assert len(d["per_node"]) == d["order"]


class TestRunShotSampled:
    def _request(self, one_qubit, seed=11):
        H, A, psi0 = one_qubit
        return QfloRequest(
            H, psi0, A, total_time=0.4, epsilon=0.3, delta=0.3,
            master_seed=seed, mode="shot_sampled",
        )

    def test_deterministic_for_master_seed(self, one_qubit):
        res1 = run(self._request(one_qubit))
        res2 = run(self._request(one_qubit))
        assert res1.estimate == res2.estimate
        assert [n.mean for n in res1.per_node] == [n.mean for n in res2.per_node]

    def test_seed_changes_estimate(self, one_qubit):
        res1 = run(self._request(one_qubit, seed=11))
        res2 = run(self._request(one_qubit, seed=12))
        assert res1.estimate != res2.estimate

    def test_fixture_regression(self, one_qubit):
        res = run(self._request(one_qubit))
        assert res.shots_per_node == 220
        assert [n.step_count for n in res.per_node] == [782, 125]
        assert res.estimate == pytest.approx(0.9346340113463402, abs=1e-12)

    def test_error_within_target(self, one_qubit):
        H, A, psi0 = one_qubit
        req = self._request(one_qubit)
        res = run(req)
        exact = exact_expectation(H, A, np.outer(psi0, psi0.conj()), 0.4)
        assert abs(res.estimate - exact) <= req.epsilon

    def test_gate_accounting_includes_shots(self, one_qubit):
        res = run(self._request(one_qubit))
        counts = [n.step_count for n in res.per_node]
        assert res.total_gate_count == sum(c * res.shots_per_node for c in counts)
        assert all(n.standard_error > 0 for n in res.per_node)

    def test_mixed_initial_state_runs(self, one_qubit):
        H, A, _ = one_qubit
        rho = np.array([[0.8, 0.0], [0.0, 0.2]], dtype=complex)
        req = QfloRequest(
            H, rho, A, total_time=0.4, epsilon=0.3, delta=0.3,
            master_seed=5, mode="shot_sampled",
        )
        res = run(req)
        exact = exact_expectation(H, A, rho, 0.4)
        assert abs(res.estimate - exact) <= req.epsilon
