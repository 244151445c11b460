"""
确定性动力学的测试
代际映射、原点稳定性、平衡点、到达时间和参数扫描
"""
import math

import numpy as np
import pandas as pd
import pytest

from src.core.environment import GrammarAdvantages, ModelParams, PopulationState
from src.core.errors import DegenerateConicError, NonConvergenceError, ParameterDomainError
from src.dynamics import (
    CritRegime, PhaseLabel, classify_phase, converge_many, find_equilibrium,
    integrate_flow, is_flow_zero, iterate, iterate_many, jacobian_and_eigenvalues,
    map_jacobian_at_origin, nullcline_geometry, orbit_diagram, passage_time,
    passage_time_from, passage_time_grid, passage_times, polish_equilibrium,
    sigma_crit, sigma_crit_bounds, step_map, vector_field,
)
from src.dynamics.equilibrium import flow_residual_tolerance
from src.dynamics.generational_map import field_components, map_components
from src.dynamics.sweeps import ORBIT_COLUMNS, PASSAGE_COLUMNS

EXTINCTION = ModelParams(alpha=1.25, D=10.0, sigma=0.5)
RETENTION = ModelParams(alpha=14.0, D=20.0, sigma=0.5)

N_PROPERTY = 10_000


def _random_params(rng, n):
    alpha = rng.uniform(0.05, 20.0, n)
    D = rng.uniform(0.0, 50.0, n)
    sigma = rng.uniform(0.0, 1.0, n)
    return alpha, D, sigma


def _closed_form_passage(sigma, D, q0, threshold=0.001):
    """α = 1 时映射线性：p_n = (1-σ+σq0) ρ^(n-1)，ρ = 1 - σD/(1+D)，q_n = p_n/(1+D)"""
    rho = 1.0 - sigma * D / (1.0 + D)
    p = 1.0 - sigma + sigma * q0
    n = 1
    while p >= threshold:
        p *= rho
        n += 1
    return n


# ===== 代际映射 =====

class TestStepMap:
    def test_origin_is_fixed(self):
        assert step_map(PopulationState(0.0, 0.0), EXTINCTION).as_tuple() == (0.0, 0.0)

    def test_hand_evaluation(self):
        state = step_map(PopulationState(0.99, 0.99), EXTINCTION)
        assert state.p == pytest.approx(0.99198, abs=1e-5)
        assert state.q == pytest.approx(0.110024, abs=1e-6)

    def test_no_l2_equal_advantage_keeps_p(self):
        params = ModelParams(alpha=1.0, D=3.0, sigma=0.0)
        for p in (0.0, 0.2, 0.7, 1.0):
            assert step_map(PopulationState(p, 0.4), params).p == pytest.approx(p, abs=1e-15)


class TestIterate:
    def test_zero_generations(self):
        start = PopulationState(0.3, 0.6)
        assert iterate(start, EXTINCTION, 0) == [start]

    def test_extinction_is_monotone(self):
        trajectory = iterate(PopulationState(0.99, 0.99), EXTINCTION, 60)
        p = np.array([s.p for s in trajectory[1:]])
        q = np.array([s.q for s in trajectory[1:]])
        assert np.all(np.diff(p) < 0) and np.all(np.diff(q) < 0)
        assert p[-1] < 1e-6

    def test_retention_converges_inside(self):
        trajectory = iterate(PopulationState(0.5, 0.5), RETENTION, 500)
        last, before = trajectory[-1], trajectory[-2]
        assert last.distance(before) < 1e-12
        assert last.p > 0.0

    def test_iterate_many_matches_iterate(self):
        starts = np.array([[0.99, 0.99], [0.2, 0.7], [1.0, 0.0]])
        many = iterate_many(starts, 1.25, 10.0, 0.5, 7)
        for row, start in zip(many, starts):
            single = iterate(PopulationState(*start), EXTINCTION, 7)[-1]
            np.testing.assert_allclose(row, single.as_tuple(), atol=1e-14)


class TestVectorField:
    def test_origin(self):
        assert vector_field(PopulationState(0.0, 0.0), EXTINCTION) == (0.0, 0.0)

    def test_corner(self):
        pdot, qdot = vector_field(PopulationState(1.0, 1.0), EXTINCTION)
        assert pdot == pytest.approx(0.0, abs=1e-15)
        assert qdot == pytest.approx(-10.0)

    def test_equal_advantage_without_l2(self):
        params = ModelParams(alpha=1.0, D=2.0, sigma=0.0)
        for p in np.linspace(0.0, 1.0, 11):
            assert vector_field(PopulationState(p, 0.3), params)[0] == pytest.approx(0.0, abs=1e-15)


# ===== 结构性质（随机参数） =====

class TestStructuralProperties:
    def test_forward_invariance(self):
        rng = np.random.default_rng(2024)
        alpha, D, sigma = _random_params(rng, N_PROPERTY)
        p, q = rng.uniform(0.0, 1.0, (2, N_PROPERTY))
        p_next, q_next = map_components(p, q, alpha, D, sigma)
        assert np.all((p_next >= 0.0) & (p_next <= 1.0))
        assert np.all((q_next >= 0.0) & (q_next <= 1.0))
        assert np.all(q_next <= p_next)

    def test_origin_fixed_for_all_params(self):
        rng = np.random.default_rng(5)
        alpha, D, sigma = _random_params(rng, N_PROPERTY)
        zeros = np.zeros(N_PROPERTY)
        p_next, q_next = map_components(zeros, zeros, alpha, D, sigma)
        assert np.all(p_next == 0.0) and np.all(q_next == 0.0)

    def test_map_step_is_scaled_field(self):
        """p' - p = ṗ / base，q' - q = q̇ / (base + D)：不动点与向量场零点相同"""
        rng = np.random.default_rng(17)
        alpha, D, sigma = _random_params(rng, N_PROPERTY)
        p, q = rng.uniform(0.0, 1.0, (2, N_PROPERTY))
        p_next, q_next = map_components(p, q, alpha, D, sigma)
        pdot, qdot = field_components(p, q, alpha, D, sigma)
        base = (1 - sigma) * (1 - p) + sigma * (1 - q) + alpha * ((1 - sigma) * p + sigma * q)
        np.testing.assert_allclose(p_next - p, pdot / base, atol=1e-12)
        np.testing.assert_allclose(q_next - q, qdot / (base + D), atol=1e-12)

    def test_fixed_points_are_field_zeros(self):
        rng = np.random.default_rng(23)
        n = N_PROPERTY
        alpha = rng.uniform(0.1, 10.0, n)
        D = rng.uniform(0.0, 20.0, n)
        sigma = rng.uniform(0.0, 1.0, n)
        starts = rng.uniform(0.0, 1.0, (n, 2))
        tol = 1e-10
        states, _, converged = converge_many(starts, alpha, D, sigma, tol, 200_000)
        pdot, qdot = field_components(states[:, 0], states[:, 1], alpha, D, sigma)
        residual = np.maximum(np.abs(pdot), np.abs(qdot))
        bound = 10.0 * tol * (1.0 + alpha + D)
        assert np.all(residual[converged] < bound[converged])
        assert converged.mean() > 0.99

    def test_eigenvalues_are_real(self):
        rng = np.random.default_rng(31)
        alpha, D, sigma = _random_params(rng, N_PROPERTY)
        for a, d, s in zip(alpha, D, sigma):
            report = jacobian_and_eigenvalues(ModelParams(float(a), float(d), float(s)))
            assert report.discriminant >= (a - d) ** 2 - 1e-9 * (1 + a + d) ** 2
            assert report.lambda_minus <= report.lambda_plus

    def test_nullcline_center_signs(self):
        rng = np.random.default_rng(37)
        alpha = np.concatenate([rng.uniform(1.001, 30.0, N_PROPERTY // 2),
                                rng.uniform(0.01, 0.999, N_PROPERTY // 2)])
        sigma = rng.uniform(0.001, 1.0, N_PROPERTY)
        for a, s in zip(alpha, sigma):
            geometry = nullcline_geometry(ModelParams(float(a), 1.0, float(s)))
            if a > 1.0:
                assert geometry.p_c > 1.0 and geometry.q_c < 0.0
            else:
                assert geometry.p_c < 0.0 and geometry.q_c > 1.0


# ===== 原点稳定性 =====

class TestStability:
    def test_extinction_eigenvalues(self):
        report = jacobian_and_eigenvalues(EXTINCTION)
        assert report.lambda_plus == pytest.approx(-0.3361, abs=1e-4)
        assert report.lambda_minus == pytest.approx(-10.4139, abs=1e-4)
        assert report.stable

    def test_repeated_eigenvalue(self):
        report = jacobian_and_eigenvalues(ModelParams(alpha=3.0, D=3.0, sigma=1.0))
        assert report.discriminant == 0.0
        assert report.lambda_plus == report.lambda_minus == -1.0

    def test_no_difficulty_unstable(self):
        for sigma in (0.0, 0.4, 1.0):
            report = jacobian_and_eigenvalues(ModelParams(alpha=2.0, D=0.0, sigma=sigma))
            assert report.lambda_plus == pytest.approx(1.0)
            assert not report.stable

    def test_eigenvalues_match_numpy(self):
        report = jacobian_and_eigenvalues(ModelParams(alpha=3.0, D=4.0, sigma=0.3))
        values = np.sort(np.linalg.eigvals(np.array(report.jacobian)).real)
        np.testing.assert_allclose(values, [report.lambda_minus, report.lambda_plus], atol=1e-12)

    def test_report_json(self):
        data = jacobian_and_eigenvalues(EXTINCTION).to_dict()
        assert set(data) == {"jacobian", "lambda_plus", "lambda_minus", "stable", "discriminant"}


class TestSigmaCrit:
    def test_large_difficulty_limit(self):
        crit = sigma_crit(14.0, 1e9)
        assert crit.regime is CritRegime.BIFURCATION
        assert crit.value == pytest.approx(13 / 14, abs=1e-6)
        assert crit.value == pytest.approx(0.928571, abs=1e-6)

    def test_equal_advantage(self):
        for D in (0.0, 1.0, 100.0):
            assert sigma_crit(1.0, D).value == 0.0
            assert sigma_crit(1.0, D).regime is CritRegime.ALWAYS_LOST

    def test_section_parameters(self):
        assert sigma_crit(1.25, 10.0).value == pytest.approx(0.22)

    def test_always_retained(self):
        crit = sigma_crit(14.0, 1.0)
        assert (crit.value, crit.regime) == (1.0, CritRegime.ALWAYS_RETAINED)

    def test_degenerate_difficulty(self):
        crit = sigma_crit(1.5, 0.0)
        assert math.isnan(crit.value)
        assert crit.regime is CritRegime.DEGENERATE_D

    def test_unclipped_above_one(self):
        # D+1 < α < D+2
        assert sigma_crit(2.5, 1.0).value == pytest.approx(1.2)

    def test_lambda_plus_vanishes_at_threshold(self):
        rng = np.random.default_rng(41)
        D = rng.uniform(0.01, 50.0, 1000)
        alpha = 1.0 + rng.uniform(0.001, 0.999, 1000) * D
        for a, d in zip(alpha, D):
            crit = sigma_crit(float(a), float(d))
            report = jacobian_and_eigenvalues(ModelParams(float(a), float(d), crit.value))
            assert abs(report.lambda_plus) < 1e-10

    def test_bounds(self):
        lower, upper = sigma_crit_bounds(14.0)
        assert lower == pytest.approx(0.9286, abs=1e-4)
        assert upper == pytest.approx(26 / 14)

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 14.0])
    def test_bounds_enclose_threshold(self, alpha):
        lower, upper = sigma_crit_bounds(alpha)
        for D in (1.0, 3.0, 50.0, 1e6):
            if alpha >= D + 2.0:
                continue
            assert lower <= sigma_crit(alpha, D).value <= upper + 1e-12


class TestClassifyPhase:
    @pytest.mark.parametrize("D, sigma", [(0.0, 0.3), (5.0, 0.0), (20.0, 1.0)])
    def test_low_advantage_is_lost(self, D, sigma):
        assert classify_phase(ModelParams(0.5, D, sigma)) is PhaseLabel.LOST

    def test_table_examples(self):
        assert classify_phase(ModelParams(14.0, 1.0, 0.99)) is PhaseLabel.RETAINED
        assert classify_phase(EXTINCTION) is PhaseLabel.LOST
        assert classify_phase(RETENTION) is PhaseLabel.RETAINED

    def test_critical(self):
        crit = sigma_crit(2.0, 4.0).value
        assert classify_phase(ModelParams(2.0, 4.0, crit)) is PhaseLabel.CRITICAL

    def test_degenerate_difficulty_is_retained(self):
        assert classify_phase(ModelParams(1.5, 0.0, 0.9)) is PhaseLabel.RETAINED

    @pytest.mark.slow
    def test_agrees_with_iteration(self):
        """20×20×20 网格上，分类与从 (0.99, 0.99) 出发是否降到 0.001 以下一致"""
        alphas = np.linspace(0.25, 8.0, 20)
        Ds = np.linspace(0.5, 20.0, 20)
        sigmas = np.linspace(0.025, 0.975, 20)
        grid = np.array(np.meshgrid(alphas, Ds, sigmas, indexing="ij")).reshape(3, -1)
        alpha, D, sigma = grid

        labels = [classify_phase(ModelParams(float(a), float(d), float(s))) for a, d, s in grid.T]
        crits = [sigma_crit(float(a), float(d)) for a, d in zip(alpha, D)]
        keep = np.array([label is not PhaseLabel.CRITICAL for label in labels])
        # 分岔点附近的内部平衡点本身就低于 0.001，迭代判据失效
        near_threshold = np.array([c.regime is CritRegime.BIFURCATION and abs(s - c.value) < 1e-4
                                   for c, s in zip(crits, sigma)])
        keep &= ~near_threshold

        starts = np.full((int(keep.sum()), 2), 0.99)
        times, _, _ = passage_times(starts, alpha[keep], D[keep], sigma[keep], 0.001, 1_000_000)
        lost = np.array([label is PhaseLabel.LOST for label in labels])
        assert keep.sum() >= 8000 - 20
        assert np.array_equal(lost[keep], times >= 0)


class TestMapJacobian:
    def test_rank_one_and_radius(self):
        matrix, radius = map_jacobian_at_origin(EXTINCTION)
        assert np.linalg.matrix_rank(matrix) == 1
        assert radius == pytest.approx(1.25 * (1 - 0.5 * 10 / 11))

    def test_radius_crosses_one_at_threshold(self):
        rng = np.random.default_rng(43)
        for _ in range(2_000):
            D = rng.uniform(0.1, 30.0)
            alpha = 1.0 + rng.uniform(0.01, 0.99) * D
            crit = sigma_crit(alpha, D).value
            sigma = rng.uniform(0.0, 1.0)
            if abs(sigma - crit) < 1e-6:
                continue
            _, radius = map_jacobian_at_origin(ModelParams(alpha, D, sigma))
            assert (radius < 1.0) == (sigma > crit)


class TestNullcline:
    def test_center_above_one(self):
        geometry = nullcline_geometry(ModelParams(2.0, 1.0, 0.5))
        assert (geometry.p_c, geometry.q_c) == pytest.approx((2.0, -4.0))

    def test_center_below_one(self):
        geometry = nullcline_geometry(ModelParams(0.5, 1.0, 0.5))
        assert (geometry.p_c, geometry.q_c) == pytest.approx((-1.0, 5.0))

    def test_corner_on_curve(self):
        geometry = nullcline_geometry(ModelParams(3.0, 2.0, 0.4))
        assert geometry.evaluate(PopulationState(1.0, 1.0)) == pytest.approx(0.0, abs=1e-12)
        assert geometry.evaluate(PopulationState(0.0, 0.0)) == 0.0

    @pytest.mark.parametrize("alpha, sigma", [(1.0, 0.5), (2.0, 0.0)])
    def test_degenerate(self, alpha, sigma):
        with pytest.raises(DegenerateConicError):
            nullcline_geometry(ModelParams(alpha, 1.0, sigma))


# ===== 平衡点 =====

class TestEquilibrium:
    def test_extinction(self):
        state = find_equilibrium(EXTINCTION, PopulationState(0.99, 0.99), tol=1e-12)
        assert state.p < 1e-10 and state.q < 1e-10

    def test_interior(self):
        state = find_equilibrium(RETENTION, PopulationState(0.5, 0.5))
        assert state.p > state.q > 0.0
        assert is_flow_zero(state, RETENTION, 1e-12)

    def test_no_l2_speakers(self):
        params = ModelParams(alpha=3.0, D=5.0, sigma=0.0)
        state = find_equilibrium(params, PopulationState(0.5, 0.5))
        assert state.p == pytest.approx(1.0, abs=1e-9)
        assert state.q == pytest.approx(3.0 / 8.0, abs=1e-9)

    def test_budget_exhausted(self):
        with pytest.raises(NonConvergenceError) as info:
            find_equilibrium(RETENTION, PopulationState(0.5, 0.5), max_iter=3)
        assert info.value.iterations == 3
        assert info.value.last_state is not None

    def test_polish(self):
        state = find_equilibrium(RETENTION, PopulationState(0.5, 0.5))
        polished = polish_equilibrium(RETENTION, state)
        assert polished.distance(state) < 1e-9

    def test_flow_reaches_same_point(self):
        state = find_equilibrium(RETENTION, PopulationState(0.5, 0.5))
        flow = integrate_flow(PopulationState(0.5, 0.5), RETENTION, t_end=500.0)
        assert flow.final.distance(state) < 1e-6

    def test_residual_tolerance_scales(self):
        assert flow_residual_tolerance(RETENTION, 1e-12) == pytest.approx(10 * 1e-12 * 35)

    def test_retained_with_low_l2_share(self):
        """α = 14 时 σ <= 0.56 总是保留，σ -> 0 时 p* -> 1"""
        for D in (0.5, 1.0, 20.0, 1000.0):
            for sigma in (0.17, 0.34, 0.46, 0.56):
                params = ModelParams(14.0, D, sigma)
                assert classify_phase(params) is PhaseLabel.RETAINED
                state = find_equilibrium(params, PopulationState(0.5, 0.5))
                assert 0.0 < state.q < state.p < 1.0
            near_zero = find_equilibrium(ModelParams(14.0, D, 1e-9), PopulationState(0.5, 0.5))
            assert near_zero.p == pytest.approx(1.0, abs=1e-6)


# ===== 到达时间 =====

class TestPassageTime:
    def test_already_below(self):
        assert passage_time_from(PopulationState(0.0005, 0.0005), EXTINCTION) == 0

    @pytest.mark.parametrize("sigma, d, q0, expected", [(0.6, 1.0, 0.5, 20), (0.2, 5.0, 0.5, 39)])
    def test_equal_advantage_examples(self, sigma, d, q0, expected):
        params = ModelParams(alpha=1.0, D=d, sigma=sigma)
        assert passage_time(params, q0) == expected

    def test_closed_form(self):
        for sigma in (0.2, 0.6):
            for d in (0.5, 1.0, 3.0, 6.0, 10.0):
                for q0 in (0.1, 0.5, 0.9):
                    params = ModelParams(alpha=1.0, D=d, sigma=sigma)
                    assert passage_time(params, q0) == _closed_form_passage(sigma, d, q0)

    def test_monotone_in_difficulty(self):
        for sigma in (0.2, 0.6):
            times = [passage_time(ModelParams(1.0, d, sigma), 0.5) for d in np.linspace(0.5, 10, 20)]
            assert all(a >= b for a, b in zip(times, times[1:]))
        faster = passage_time(ModelParams(1.0, 3.0, 0.6), 0.5)
        slower = passage_time(ModelParams(1.0, 3.0, 0.2), 0.5)
        assert faster < slower

    def test_retained_never_arrives(self):
        with pytest.raises(NonConvergenceError):
            passage_time(RETENTION, 0.5, max_gen=10_000)

    def test_no_difficulty_never_arrives(self):
        with pytest.raises(NonConvergenceError):
            passage_time(ModelParams(1.0, 0.0, 0.6), 0.5)

    def test_stuck_cell_reports_generations_run(self):
        """停在内部不动点时报告实际迭代的代数，而不是 max_gen"""
        with pytest.raises(NonConvergenceError) as excinfo:
            passage_time(RETENTION, 0.5, max_gen=100_000)
        error = excinfo.value
        assert 0 < error.iterations < 100_000
        p, q = error.last_state
        nxt = step_map(PopulationState(p, q), RETENTION)
        assert max(abs(nxt.p - p), abs(nxt.q - q)) < 1e-11

    def test_generation_counts(self):
        starts = np.array([[1.0, 0.5], [0.0005, 0.0005], [1.0, 0.5]])
        times, _, generations = passage_times(starts, [1.0, 1.0, 14.0], [1.0, 1.0, 20.0],
                                              [0.6, 0.6, 0.5], 0.001, 100_000)
        assert list(times[:2]) == [20, 0]
        assert list(generations[:2]) == [20, 0]
        assert times[2] == -1 and 0 < generations[2] < 100_000

    def test_q0_domain(self):
        with pytest.raises(ParameterDomainError):
            passage_time(EXTINCTION, 1.5)


# ===== 参数扫描 =====

class TestOrbitDiagram:
    def setup_method(self):
        self.frame = orbit_diagram([0.5, 2.0], [1.0, 5.0], [0.1, 0.5, 0.9], tol=1e-11)

    def test_schema_and_order(self):
        assert list(self.frame.columns) == ORBIT_COLUMNS
        assert len(self.frame) == 12
        assert list(self.frame["alpha"]) == [0.5] * 6 + [2.0] * 6
        assert list(self.frame["sigma"][:3]) == [0.1, 0.5, 0.9]
        assert (self.frame["status"] == "ok").all()

    def test_low_advantage_column_is_extinct(self):
        low = self.frame[self.frame["alpha"] == 0.5]
        assert (low["p_star"] < 1e-8).all() and (low["q_star"] < 1e-8).all()

    def test_phase_boundary(self):
        for row in self.frame.itertuples(index=False):
            if row.sigma > row.sigma_crit:
                assert row.p_star < 1e-8 and row.phase == "Lost"
            elif row.sigma < row.sigma_crit:
                assert row.p_star > 0.0 and row.phase == "Retained"

    def test_nonconverged_cells_flagged(self):
        frame = orbit_diagram([2.0], [5.0], [0.5], max_iter=2)
        assert list(frame["status"]) == ["nonconverged"]

    def test_empty_grid(self):
        with pytest.raises(ParameterDomainError):
            orbit_diagram([], [1.0], [0.5])


class TestPassageGrid:
    def test_schema_order_and_values(self):
        frame = passage_time_grid([1.0, 5.0], [0.2, 0.6], [0.5])
        assert list(frame.columns) == PASSAGE_COLUMNS
        assert list(frame["sigma"]) == [0.2, 0.2, 0.6, 0.6]
        assert list(frame["d"]) == [1.0, 5.0, 1.0, 5.0]
        assert frame.loc[1, "passage_time"] == 39
        assert frame.loc[2, "passage_time"] == 20
        assert (frame["status"] == "ok").all()

    def test_unreached_cells(self):
        frame = passage_time_grid([0.0, 1.0], [0.6], [0.5])
        assert pd.isna(frame.loc[0, "passage_time"])
        assert frame.loc[0, "status"] == "nonconverged"
        assert frame.loc[1, "status"] == "ok"

    def test_scaled_difficulty(self):
        frame = passage_time_grid([2.0], [0.5], [0.5], adv=GrammarAdvantages(0.5, 0.5))
        assert frame.loc[0, "D"] == pytest.approx(4.0)
