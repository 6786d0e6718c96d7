import numpy as np
import pytest

from dirmean import (
    Dataset,
    DistributionSpec,
    MarginalMeanEstimator,
    PipelineConfig,
    SizingError,
    SlabSystem,
    SpectrumSpec,
    build_direction_set,
    estimate_mean,
    fit_marginal,
    fit_variance,
    make_ground_truth,
    nu_hat,
    nu_hat_profile,
    plan_blocks,
    sample_dataset,
    slab_width,
    solve_center,
)
from dirmean.mean import SolverConfig

SMALL_CFG = PipelineConfig(gamma=1.0, theta_var=0.125, directions=None, refine_probes=64)


def gaussian_gt(eigs, mean=None, rotation_seed=None):
    d = len(eigs)
    spec = DistributionSpec(
        "gaussian", SpectrumSpec(tuple(eigs), rotation_seed), mean=tuple(mean or [0.0] * d)
    )
    return make_ground_truth(spec)


class TestFitMarginal:
    def test_constant_dataset(self):
        v = np.array([2.0, -1.0])
        rows = np.tile(v, (200, 1))
        est = fit_marginal(rows, 0.05)
        rng = np.random.default_rng(0)
        for _ in range(10):
            u = rng.standard_normal(2)
            u /= np.linalg.norm(u)
            assert nu_hat(est, u) == pytest.approx(v @ u, rel=1e-12)

    def test_block_plan_pinned(self):
        gt = gaussian_gt([1.0, 1.0])
        est = fit_marginal(sample_dataset(gt, 10**4, 0), 0.01)
        assert est.plan.n == 48 and est.plan.m == 208 and est.plan.discarded == 16

    def test_deterministic(self):
        gt = gaussian_gt([1.0, 1.0])
        ds = sample_dataset(gt, 2000, 3)
        a = fit_marginal(ds, 0.05)
        b = fit_marginal(ds, 0.05)
        assert np.array_equal(a.Y, b.Y)

    def test_sizing_error_names_minimum(self):
        with pytest.raises(SizingError) as err:
            fit_marginal(np.zeros((20, 2)), 0.01)
        assert err.value.minimal_n == 48


class TestNuHat:
    def test_three_block_example(self):
        # m=4, n=3, theta=1/3: projections [10, 0, -10] -> interior mean 0
        y = np.array([[10.0], [0.0], [-10.0]])
        plan = plan_blocks(12, 0.5, 1.0 / 3.0, "mean", PipelineConfig(c_blocks=0.5, theta_mean=1 / 3))
        assert plan.n == 3 and plan.m == 4
        est = MarginalMeanEstimator(Y=y, m=4, theta=1.0 / 3.0, plan=plan)
        assert nu_hat(est, [1.0]) == 0.0

    def test_odd_in_direction(self):
        gt = gaussian_gt([1.0, 1.0])
        est = fit_marginal(sample_dataset(gt, 2000, 5), 0.05)
        rng = np.random.default_rng(1)
        for _ in range(10):
            u = rng.standard_normal(2)
            u /= np.linalg.norm(u)
            assert nu_hat(est, -u) == pytest.approx(-nu_hat(est, u), rel=1e-12, abs=1e-15)

    def test_profile_matches_single(self):
        gt = gaussian_gt([2.0, 1.0])
        est = fit_marginal(sample_dataset(gt, 3000, 6), 0.05)
        rng = np.random.default_rng(2)
        dirs = rng.standard_normal((16, 2))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        prof = nu_hat_profile(est, dirs)
        singles = np.array([nu_hat(est, u) for u in dirs])
        assert np.allclose(prof, singles, rtol=1e-12)

    def test_error_envelope_on_gaussian(self):
        # |nu(e1) - 1| <= 5 sqrt(log(1/delta)/N) in at least 99% of trials
        gt = gaussian_gt([1.0, 1.0], mean=[1.0, 0.0])
        delta, n = 0.01, 10**4
        bound = 5.0 * np.sqrt(np.log(1.0 / delta) / n)
        hits = 0
        trials = 500
        for t in range(trials):
            est = fit_marginal(sample_dataset(gt, n, 10_000 + t), delta)
            hits += abs(nu_hat(est, [1.0, 0.0]) - 1.0) <= bound
        assert hits >= int(0.99 * trials)


class TestSlabWidth:
    def _var_est(self):
        gt = gaussian_gt([1.0, 1.0])
        return fit_variance(sample_dataset(gt, 2 * 10**4, 7))

    def test_zero_variance_zero_width(self):
        rows = np.tile(np.array([1.0, 2.0]), (2000, 1))
        est = fit_variance(rows, PipelineConfig(gamma=1.0, theta_var=0.02))
        assert slab_width(est, [1.0, 0.0], 0.1, 1.0, 100) == 0.0

    def test_arithmetic(self):
        est = self._var_est()
        u = np.array([1.0, 0.0])
        from dirmean import psi

        width = slab_width(est, u, np.exp(-1.0), 1.0, 100)
        assert width == pytest.approx(2.0 * np.sqrt(psi(est, u) / 100.0), rel=1e-12)

    def test_log_confidence_scaling(self):
        est = self._var_est()
        u = np.array([0.0, 1.0])
        w1 = slab_width(est, u, 0.1, 1.0, 1000)
        w2 = slab_width(est, u, 0.01, 1.0, 1000)
        assert w2 == pytest.approx(np.sqrt(2.0) * w1, rel=1e-12)


class TestDirectionSet:
    def test_canonical_plus_random(self):
        dirs = build_direction_set(2, 4, seed=0)
        assert dirs.shape == (4, 2)
        assert np.array_equal(dirs[:2], np.eye(2))

    def test_unit_norms(self):
        dirs = build_direction_set(5, 32, seed=1)
        assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)

    def test_deterministic(self):
        assert np.array_equal(build_direction_set(3, 12, seed=2), build_direction_set(3, 12, seed=2))

    def test_rejects_small_budget(self):
        with pytest.raises(ValueError):
            build_direction_set(4, 7, seed=0)

    def test_no_near_duplicates(self):
        dirs = build_direction_set(3, 24, seed=3)
        gram = np.abs(dirs @ dirs.T)
        np.fill_diagonal(gram, 0.0)
        assert gram.max() < 1.0 - 1e-12

    def test_includes_block_eigendirections(self):
        gt = gaussian_gt([10.0, 1.0, 0.1])
        var_est = fit_variance(sample_dataset(gt, 2 * 10**4, 8))
        dirs = build_direction_set(3, 12, seed=4, var_est=var_est)
        # the top eigendirection of the blocks is close to e1
        gram = np.abs(dirs @ np.eye(3)[0])
        assert np.sort(gram)[-2] > 0.99  # e1 itself plus the learned direction


class TestSolveCenter:
    def test_two_orthogonal_slabs(self):
        slabs = SlabSystem(np.eye(2), centers=[1.0, 2.0], widths=[0.0, 0.0], delta=0.1, c_prime=1.0)
        res = solve_center(slabs)
        assert np.allclose(res.v_star, [1.0, 2.0], atol=1e-9)
        assert res.rho_star <= 1e-9

    def test_conflicting_slabs_midpoint(self):
        slabs = SlabSystem(
            np.array([[1.0], [1.0]]), centers=[0.0, 2.0], widths=[0.0, 0.0], delta=0.1, c_prime=1.0
        )
        res = solve_center(slabs)
        assert res.v_star[0] == pytest.approx(1.0, abs=1e-8)
        assert res.rho_star == pytest.approx(1.0, abs=1e-8)

    def test_feasible_random_systems(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            d = rng.integers(1, 8)
            m = rng.integers(d, 60)
            u = rng.standard_normal((m, d))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            v0 = rng.standard_normal(d)
            widths = rng.uniform(0.0, 1.0, m) * (rng.random(m) < 0.7)
            slabs = SlabSystem(u, u @ v0, widths, delta=0.1, c_prime=1.0)
            res = solve_center(slabs)
            assert res.rho_star <= 1e-6
            assert slabs.max_violation(res.v_star) <= 1e-6

    def test_never_worse_than_warm_start(self):
        rng = np.random.default_rng(6)
        u = rng.standard_normal((30, 4))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        slabs = SlabSystem(u, rng.standard_normal(30), np.zeros(30), delta=0.1, c_prime=1.0)
        v_init = rng.standard_normal(4)
        res = solve_center(slabs, v_init=v_init)
        assert res.g_value <= slabs.max_violation(v_init) + 1e-12

    def test_adding_slabs_cannot_reduce_minimax(self):
        rng = np.random.default_rng(7)
        u = rng.standard_normal((40, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        c = rng.standard_normal(40)
        slabs = SlabSystem(u, c, np.full(40, 0.05), delta=0.1, c_prime=1.0)
        base = solve_center(slabs)
        extra = rng.standard_normal((10, 3))
        extra /= np.linalg.norm(extra, axis=1, keepdims=True)
        bigger = slabs.extended(extra, extra @ base.v_star + rng.uniform(-2, 2, 10), np.zeros(10))
        res = solve_center(bigger, v_init=base.v_star)
        assert res.rho_star >= base.rho_star - 1e-9

    def test_budget_exhaustion_flags_not_raises(self):
        slabs = SlabSystem(
            np.array([[1.0], [1.0]]), centers=[0.0, 2.0], widths=[0.0, 0.0], delta=0.1, c_prime=1.0
        )
        res = solve_center(slabs, SolverConfig(max_iter=3, polish_sweeps=0, stall_window=10**9))
        assert np.isfinite(res.rho_star)


class TestEstimateMean:
    def test_constant_dataset_recovered_exactly(self):
        v = np.array([3.0, -2.0])
        rows = np.tile(v, (600, 1))
        est = estimate_mean(rows, 0.05, SMALL_CFG, seed=1)
        assert np.allclose(est.mu_hat, v, atol=1e-12)
        # zero slack up to the ulp residue of the 1/sqrt(m) rescaling
        assert est.rho_star <= 1e-12

    def test_replay_certificate(self):
        gt = gaussian_gt([1.0, 0.5, 0.25])
        ds = sample_dataset(gt, 3 * 10**4, 9)
        est = estimate_mean(ds, 0.01, seed=2)
        assert est.slabs.max_violation(est.mu_hat) <= est.rho_star + 1e-8 * (1 + est.rho_star)

    def test_deterministic_bytes(self):
        gt = gaussian_gt([1.0, 1.0])
        ds = sample_dataset(gt, 3 * 10**4, 10)
        a = estimate_mean(ds, 0.01, seed=3)
        b = estimate_mean(ds, 0.01, seed=3)
        assert np.array_equal(a.mu_hat, b.mu_hat)
        assert a.rho_star == b.rho_star

    def test_translation_equivariance(self):
        # exact in real arithmetic; verified at float precision since the
        # projections of shifted data round differently in the last ulp
        gt = gaussian_gt([1.0, 1.0])
        rows = sample_dataset(gt, 3 * 10**4, 11).rows
        shift = np.array([10.0, -5.0])
        a = estimate_mean(rows, 0.01, seed=4)
        b = estimate_mean(rows + shift, 0.01, seed=4)
        assert np.allclose(b.mu_hat - shift, a.mu_hat, atol=1e-9 * (1 + np.linalg.norm(shift)))

    def test_discards_to_multiple_of_three(self):
        gt = gaussian_gt([1.0, 1.0])
        rows = sample_dataset(gt, 3 * 10**4 + 2, 12).rows
        a = estimate_mean(rows, 0.01, seed=5)
        b = estimate_mean(rows[: 3 * 10**4], 0.01, seed=5)
        assert np.array_equal(a.mu_hat, b.mu_hat)

    def test_json_serialization_keys(self):
        gt = gaussian_gt([1.0, 1.0])
        est = estimate_mean(sample_dataset(gt, 3 * 10**4, 13), 0.01, seed=6)
        doc = est.to_json_dict()
        for key in (
            "mu_hat",
            "rho_star",
            "directions_used",
            "refinement_rounds",
            "probe_violation",
            "converged",
            "block_plan_mean",
            "block_plan_var",
        ):
            assert key in doc

    def test_accuracy_at_moderate_scale(self):
        gt = gaussian_gt([1.0, 1.0], mean=[2.0, -1.0])
        est = estimate_mean(sample_dataset(gt, 3 * 10**4, 14), 0.01, seed=7)
        assert np.linalg.norm(est.mu_hat - gt.mu) < 0.1
