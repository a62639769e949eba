import numpy as np
import pytest
from conftest import zero_kernel
from scipy.interpolate import CubicSpline

from swarmeq import (
    ContinuationSchedule,
    Density,
    PowerLawKernel,
    RegularizedQanrKernel,
    SolverConfig,
    SpacingMode,
    ZeroPotential,
    count_aggregates,
    fixed_point_residual,
    indicator_density,
    integrate,
    make_grid,
    moments,
    solve,
    solve_with_continuation,
)


class TestSolverConfig:
    def test_defaults(self):
        cfg = SolverConfig()
        assert cfg.tol == 1e-6
        assert cfg.max_iterations == 2000
        assert cfg.effective_tau_c(2.0**-6) == pytest.approx(5 * 2.0**-6)
        assert cfg.effective_tau_c(1.0) == 0.95  # clamped for large diffusion

    def test_pinned_tau_c_wins(self):
        assert SolverConfig(tau_c=0.5).effective_tau_c(1e-4) == 0.5

    @pytest.mark.parametrize("kwargs", [
        {"tau_c": 0.0}, {"tau_c": 1.0}, {"tol": 0.0}, {"max_iterations": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


class TestContinuationSchedule:
    def test_geometric_endpoints_exact(self):
        s = ContinuationSchedule.geometric(1e-2, 1e-3, stages=8)
        assert len(s.nus) == 8
        assert s.nus[0] == 1e-2
        assert s.nus[-1] == 1e-3

    def test_single_stage(self):
        assert ContinuationSchedule.geometric(1e-3, 1e-3, stages=5).nus == (1e-3,)

    @pytest.mark.parametrize("nus", [(), (0.1, 0.2), (0.1, -0.01), (0.1, 0.1)])
    def test_validation(self, nus):
        with pytest.raises(ValueError):
            ContinuationSchedule(nus)


class TestSolve:
    def test_trivial_problem_converges_immediately(self):
        g = make_grid(3.0, 129)
        rho0 = indicator_density(g, 0.0, 1.0)
        report = solve(zero_kernel(), ZeroPotential(), 0.5, rho0)
        assert report.converged
        assert report.iterations <= 2
        np.testing.assert_allclose(report.density.values, 1 / 3.0, rtol=1e-12)

    def test_converged_state_is_a_fixed_point(self):
        nu = 2.0**-6
        g = make_grid(4.0, 512, SpacingMode.UNIFORM)
        report = solve(PowerLawKernel(2.0), ZeroPotential(), nu, indicator_density(g, 0, 2))
        assert report.converged
        assert fixed_point_residual(
            PowerLawKernel(2.0), ZeroPotential(), nu, report.density
        ) < 1e-6

    def test_free_space_state_is_symmetric_about_its_mean(self):
        nu = 2.0**-6
        g = make_grid(4.0, 1024, SpacingMode.UNIFORM)
        report = solve(PowerLawKernel(2.0), ZeroPotential(), nu, indicator_density(g, 0, 2))
        m1 = moments(report.density).m1
        spline = CubicSpline(g.nodes, report.density.values)
        mirrored = np.where(
            (2 * m1 - g.nodes >= 0) & (2 * m1 - g.nodes <= 4.0),
            spline(np.clip(2 * m1 - g.nodes, 0.0, 4.0)),
            0.0,
        )
        assert integrate(g, np.abs(report.density.values - mirrored)) <= 1e-4

    def test_energy_decreases_on_full_steps(self):
        nu = 2.0**-6
        g = make_grid(2.0, 512, SpacingMode.QUADRATIC)
        report = solve(
            PowerLawKernel(2.0), ZeroPotential(), nu, indicator_density(g, 0, 0.25)
        )
        for k, tau in enumerate(report.tau_trace):
            if tau == 1.0:
                assert report.energy_trace[k + 1] < report.energy_trace[k]

    def test_partition_value_settles_at_one(self):
        from swarmeq import LinearPotential, critical_slope

        nu = 2.0**-6
        g = make_grid(2.0, 512, SpacingMode.QUADRATIC)
        report = solve(
            PowerLawKernel(2.0), LinearPotential(critical_slope(nu)), nu,
            indicator_density(g, 0, 0.25),
        )
        assert report.converged
        assert report.iterations > 3  # long enough for the offset to settle
        assert abs(report.z_trace[-1] - 1.0) <= 1e-4

    def test_multiplier_equals_total_plus_interaction(self):
        nu = 2.0**-6
        g = make_grid(4.0, 512, SpacingMode.UNIFORM)
        report = solve(PowerLawKernel(2.0), ZeroPotential(), nu, indicator_density(g, 0, 2))
        assert report.lam == pytest.approx(
            report.energy.total + report.energy.interaction, abs=1e-6
        )

    def test_non_convergence_is_reported_not_raised(self):
        nu = 2.0**-10
        g = make_grid(8.0, 128, SpacingMode.UNIFORM)
        report = solve(
            RegularizedQanrKernel(0.3), ZeroPotential(), nu,
            indicator_density(g, 0, 8), SolverConfig(max_iterations=2),
        )
        assert not report.converged
        assert report.iterations == 2

    def test_final_density_is_valid(self, rng):
        g = make_grid(2.0, 256, SpacingMode.UNIFORM)
        rho0 = Density.normalized(g, rng.random(256) + 0.01)
        report = solve(PowerLawKernel(2.0), ZeroPotential(), 0.1, rho0)
        assert abs(report.density.mass - 1.0) <= 1e-10
        assert np.all(report.density.values >= 0)

    def test_convex_combination_preserves_density_invariants(self, rng):
        g = make_grid(2.0, 128)
        a = Density.normalized(g, rng.random(128) + 0.01)
        b = Density.normalized(g, rng.random(128) + 0.01)
        combo = Density(g, 0.7 * a.values + 0.3 * b.values)
        assert abs(combo.mass - 1.0) <= 1e-10


class TestContinuation:
    def test_single_entry_equals_plain_solve(self):
        nu = 2.0**-6
        g = make_grid(4.0, 256, SpacingMode.UNIFORM)
        rho0 = indicator_density(g, 0, 2)
        direct = solve(PowerLawKernel(2.0), ZeroPotential(), nu, rho0)
        staged = solve_with_continuation(
            PowerLawKernel(2.0), ZeroPotential(), ContinuationSchedule((nu,)), rho0
        )
        assert len(staged) == 1
        np.testing.assert_array_equal(staged[0].density.values, direct.density.values)
        assert staged[0].iterations == direct.iterations

    def test_warm_start_chains_stages(self):
        from swarmeq import LinearPotential, critical_slope

        g = make_grid(2.0, 256, SpacingMode.QUADRATIC)
        schedule = ContinuationSchedule.geometric(2.0**-4, 2.0**-6, stages=3)
        potential = LinearPotential(critical_slope(2.0**-6))
        reports = solve_with_continuation(
            PowerLawKernel(2.0), potential, schedule, indicator_density(g, 0, 0.25)
        )
        assert [r.nu for r in reports] == list(schedule.nus)
        assert all(r.converged for r in reports)
        # warm-started stages need far fewer iterations than the cold stage
        assert reports[-1].iterations < reports[0].iterations

    def test_step_sizes_follow_stage_diffusion(self):
        g = make_grid(4.0, 128, SpacingMode.UNIFORM)
        schedule = ContinuationSchedule((2.0**-4, 2.0**-5))
        reports = solve_with_continuation(
            PowerLawKernel(2.0), ZeroPotential(), schedule, indicator_density(g, 0, 2)
        )
        for report in reports:
            allowed = {1.0, min(5 * report.nu, 0.95)}
            assert set(report.tau_trace) <= allowed


class TestCountAggregates:
    def grid_density(self, values):
        g = make_grid(float(len(values) - 1), len(values), SpacingMode.UNIFORM)
        return Density.normalized(g, np.asarray(values, dtype=float))

    def test_uniform_has_none(self):
        assert count_aggregates(self.grid_density(np.ones(33)), 0.05) == 0

    def test_single_interior_bump(self):
        g = make_grid(2.0, 257)
        rho = Density.normalized(g, np.exp(-((g.nodes - 1.0) ** 2) * 200))
        assert count_aggregates(rho, 0.05) == 1

    def test_four_bumps(self):
        g = make_grid(8.0, 1025)
        v = sum(np.exp(-((g.nodes - c) ** 2) * 80) for c in (2.0, 3.2, 4.4, 5.6))
        assert count_aggregates(Density.normalized(g, v), 0.05) == 4

    def test_prominence_filters_ripples(self):
        g = make_grid(2.0, 513)
        base = np.exp(-((g.nodes - 1.0) ** 2) * 50)
        ripple = base * (1 + 0.01 * np.sin(40 * g.nodes))
        assert count_aggregates(Density.normalized(g, ripple), 0.05) == 1

    def test_dominating_endpoint_counts(self):
        g = make_grid(2.0, 257)
        rho = Density.normalized(g, np.exp(-3.0 * g.nodes))
        assert count_aggregates(rho, 0.05) == 1

    def test_rejects_bad_prominence(self):
        with pytest.raises(ValueError):
            count_aggregates(self.grid_density(np.ones(9)), 0.0)
