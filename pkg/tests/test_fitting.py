import math

import numpy as np
import pytest

from surfperc.fitting import (CrossingResult, FitError, collapse_quality,
                              collapse_scan, crossing_point, delta_exponent,
                              fit, fit_threshold_ansatz, zero_crossing)


class TestFit:
    def test_exact_log(self):
        pts = [(d, 2.0 * math.log(d) + 1.0) for d in (3, 5, 7, 9, 11)]
        res = fit("log", pts)
        assert res.params == pytest.approx((2.0, 1.0), abs=1e-10)
        assert res.rmse < 1e-10
        assert res.n_points == 5

    def test_exact_exp(self):
        pts = [(d, 0.5 * math.exp(0.3 * d) + 2.0) for d in (1, 3, 5, 7, 9, 11)]
        res = fit("exp", pts)
        assert res.params == pytest.approx((0.5, 0.3, 2.0), abs=1e-6)
        assert res.rmse < 1e-8

    def test_exact_power(self):
        pts = [(d, 1.7 * d**-0.73) for d in (2, 4, 8, 16, 32)]
        res = fit("power", pts)
        assert res.params == pytest.approx((1.7, 0.73), abs=1e-8)

    def test_exact_linear(self):
        pts = [(x, -0.4 * x + 3.0) for x in (0.0, 0.5, 1.0, 2.0)]
        res = fit("linear", pts)
        assert res.params == pytest.approx((-0.4, 3.0), abs=1e-12)

    def test_weights_steer_the_fit(self):
        pts = [(1.0, 1.0, 1.0), (2.0, 2.0, 1.0), (3.0, 10.0, 0.0)]
        res = fit("linear", pts)
        assert res.params == pytest.approx((1.0, 0.0), abs=1e-10)

    def test_predict(self):
        res = fit("log", [(d, 2.0 * math.log(d) + 1.0) for d in (3, 5, 7)])
        assert res.predict(4.0) == pytest.approx(2.0 * math.log(4.0) + 1.0)

    def test_log_requires_positive_x(self):
        with pytest.raises(ValueError):
            fit("log", [(-1.0, 0.0), (2.0, 1.0)])

    def test_singular_design(self):
        with pytest.raises(FitError):
            fit("linear", [(2.0, 1.0), (2.0, 3.0)])

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit("exp", [(1.0, 2.0), (2.0, 3.0)])

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            fit("cubic", [(1.0, 1.0), (2.0, 2.0)])

    def test_rmse_scale_covariance(self):
        rng = np.random.default_rng(3)
        d = np.arange(3, 14, 2)
        y = 1.5 * np.log(d) + 0.7 + rng.normal(0, 0.05, len(d))
        for scale in (1.0, 7.3):
            r_log = fit("log", list(zip(d, scale * y)))
            r_exp = fit("exp", list(zip(d, scale * y)))
            if scale == 1.0:
                base = (r_log.rmse, r_exp.rmse, r_log.rmse < r_exp.rmse)
            else:
                assert r_log.rmse == pytest.approx(scale * base[0], rel=1e-4)
                assert r_exp.rmse == pytest.approx(scale * base[1], rel=1e-2)
                assert (r_log.rmse < r_exp.rmse) == base[2]


class TestCrossing:
    def test_two_lines(self):
        p = np.linspace(0.0, 1.0, 21)
        curves = {3: (p, 0.8 - 0.5 * p), 5: (p, 0.2 + 1.5 * p)}
        res = crossing_point(curves)
        assert isinstance(res, CrossingResult)
        assert res.p_c == pytest.approx(0.3, abs=1e-12)
        assert res.err == 0.0

    def test_three_curves_mean_and_spread(self):
        p = np.linspace(0.0, 1.0, 11)
        curves = {3: (p, 1.0 - p), 5: (p, p), 7: (p, 0.5 * np.ones_like(p))}
        res = crossing_point(curves)
        assert res.p_c == pytest.approx(0.5, abs=1e-12)
        assert len(res.pair_crossings) == 3

    def test_identical_curves_error(self):
        p = np.linspace(0.0, 1.0, 5)
        with pytest.raises(FitError, match="no crossing"):
            crossing_point({3: (p, p.copy()), 5: (p, p.copy())})

    def test_no_overlap_error(self):
        with pytest.raises(FitError):
            crossing_point({3: ([0.0, 0.1], [0.0, 0.1]),
                            5: ([0.5, 0.6], [0.9, 0.8])})

    def test_zero_crossing_helper(self):
        assert zero_crossing([1, 2, 3], [2.0, -1.0, -2.0]) == pytest.approx(5 / 3)
        with pytest.raises(FitError):
            zero_crossing([1, 2], [1.0, 2.0])


def synthetic_collapse(p_c=0.5, nu=4 / 3, beta=5 / 36, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    data = {}
    for d in (3, 5, 7, 9):
        p = np.linspace(p_c - 0.15, p_c + 0.15, 25)
        u = (p - p_c) * d ** (1 / nu)
        r = (1.0 / (1.0 + np.exp(2.0 * u))) * d ** (-beta / nu)
        if noise:
            r = r + rng.normal(0, noise, len(r))
        data[d] = (p, r)
    return data


class TestCollapse:
    def test_perfect_collapse_scores_near_zero(self):
        data = synthetic_collapse()
        good = collapse_quality(data, 0.5, 4 / 3, 5 / 36)
        bad = collapse_quality(data, 0.5, 0.7, 5 / 36)
        assert good < 1e-6
        assert bad > 10 * good

    def test_scan_recovers_parameters(self):
        data = synthetic_collapse(noise=1e-4, seed=5)
        pcs = np.arange(0.46, 0.545, 0.01)
        nus = np.arange(0.9, 1.75, 0.1)
        pc, nu, score, grid = collapse_scan(data, pcs, nus, 5 / 36)
        assert pc == pytest.approx(0.5, abs=0.011)
        assert nu == pytest.approx(4 / 3, abs=0.11)
        assert grid.shape == (len(pcs), len(nus))

    def test_relabeling_invariance(self):
        data = synthetic_collapse()
        relabeled = {d: data[d] for d in sorted(data, reverse=True)}
        assert collapse_quality(data, 0.5, 4 / 3, 5 / 36) == pytest.approx(
            collapse_quality(relabeled, 0.5, 4 / 3, 5 / 36))

    def test_point_on_master_curve_keeps_perfect_score(self):
        data = synthetic_collapse()
        d, (p, r) = 5, synthetic_collapse()[5]
        aug = dict(data)
        aug[d] = (np.append(p, p[10:11] + 1e-4),
                  np.append(r, np.interp(p[10] + 1e-4, p, r)))
        before = collapse_quality(data, 0.5, 4 / 3, 5 / 36)
        after = collapse_quality(aug, 0.5, 4 / 3, 5 / 36)
        assert before < 1e-6 and after < 1e-6

    def test_needs_three_distances(self):
        data = synthetic_collapse()
        del data[3], data[5]
        with pytest.raises(ValueError):
            collapse_quality(data, 0.5, 4 / 3, 5 / 36)


class TestDeltaExponent:
    def test_synthetic_recovery(self):
        rng = np.random.default_rng(8)
        samples = {d: rng.normal(0.5, d**-0.75, 6000) for d in (4, 8, 16, 32)}
        b, err, res = delta_exponent(samples)
        assert b == pytest.approx(0.75, abs=0.02)
        assert 0 < err < 0.05
        assert res.model == "power"

    def test_constant_width_gives_zero(self):
        rng = np.random.default_rng(9)
        samples = {d: rng.normal(0.5, 0.1, 4000) for d in (4, 8, 16, 32)}
        b, err, _ = delta_exponent(samples)
        assert abs(b) < 0.05

    def test_insufficient_inputs(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            delta_exponent({d: rng.normal(0, 1, 500) for d in (4, 8, 16)})
        with pytest.raises(ValueError):
            delta_exponent({d: rng.normal(0, 1, 50) for d in (4, 8, 16, 32)})


class TestThresholdAnsatz:
    def test_round_trip_with_known_alphas(self):
        from surfperc.percolation import threshold_x
        alphas = (0.5, -0.375, 0.875)
        ps = np.linspace(0.1, 1.0, 12)
        pts = [(s, threshold_x(s, "ansatz", alphas)) for s in ps]
        fitted = fit_threshold_ansatz(pts, order=3)
        assert fitted == pytest.approx(alphas, abs=1e-9)
        assert sum(fitted) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_unit_thresholds(self):
        with pytest.raises(ValueError):
            fit_threshold_ansatz([(0.5, 1.0)])
