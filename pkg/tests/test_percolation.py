import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfperc.layout import build
from surfperc.percolation import (FITTED_REINTEGRATION_ALPHAS,
                                  EffectiveModelParams,
                                  effective_fraction_closed,
                                  effective_fraction_fixed_point,
                                  effective_fraction_step, effective_ps,
                                  effective_ps_meanfield, survives_cut,
                                  threshold_x)


class TestSurvivesCut:
    def test_nothing_removed_survives(self):
        lay = build(4)
        assert survives_cut(lay, "Z", set())
        assert survives_cut(lay, "X", set())

    def test_everything_removed_fails(self):
        lay = build(4)
        everything = range(lay.n_qubits)
        assert not survives_cut(lay, "Z", everything)
        assert not survives_cut(lay, "X", everything)

    def test_single_column_cut(self):
        # removing one full row of vertical edges severs top from bottom
        lay = build(3)
        row = [lay.vertical_edge(1, j) for j in range(3)]
        hzs = [lay.horizontal_edge(i, j) for i in range(2) for j in range(2)]
        assert not survives_cut(lay, "Z", row + hzs)
        assert survives_cut(lay, "Z", row[:-1] + hzs)

    def test_bad_basis_and_range(self):
        lay = build(2)
        with pytest.raises(ValueError):
            survives_cut(lay, "Y", set())
        with pytest.raises(ValueError):
            survives_cut(lay, "Z", {99})

    def test_empirical_threshold_near_half(self):
        # the survival probability crosses 1/2 close to p = 0.5
        lay = build(7)
        rng = np.random.default_rng(42)

        def survival(p, trials=400):
            hits = 0
            for _ in range(trials):
                removed = np.nonzero(rng.random(lay.n_qubits) < p)[0]
                hits += survives_cut(lay, "Z", removed)
            return hits / trials

        assert survival(0.40) > 0.75
        assert survival(0.60) < 0.25


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_survives_cut_monotone_under_more_removal(data):
    lay = build(data.draw(st.sampled_from([2, 3, 4])))
    n = lay.n_qubits
    removed = set(data.draw(st.lists(st.integers(0, n - 1), max_size=n,
                                     unique=True)))
    extra = set(data.draw(st.lists(st.integers(0, n - 1), max_size=n,
                                   unique=True)))
    basis = data.draw(st.sampled_from(["Z", "X"]))
    if not survives_cut(lay, basis, removed):
        assert not survives_cut(lay, basis, removed | extra)


class TestEffectiveFraction:
    def test_first_step_loses_px(self):
        for ps in (0.0, 0.4, 1.0):
            assert effective_fraction_step(0.0, 0.3, ps) == pytest.approx(0.3)

    def test_recovery_only_step(self):
        assert effective_fraction_step(0.5, 0.0, 0.4) == pytest.approx(0.3)

    def test_fixed_point_formula(self):
        for px, ps in ((0.1, 0.4), (0.2, 0.9), (0.45, 0.75)):
            fstar = effective_fraction_fixed_point(px, ps)
            assert fstar == pytest.approx(px / (px + ps - px * ps))
            assert effective_fraction_step(fstar, px, ps) == pytest.approx(fstar)

    def test_arguments_validated(self):
        with pytest.raises(ValueError):
            effective_fraction_step(1.2, 0.1, 0.1)
        with pytest.raises(ValueError):
            effective_fraction_step(0.1, -0.1, 0.1)
        with pytest.raises(ValueError):
            effective_fraction_closed(3, 0.0, 0.0)  # kappa = 0

    def test_closed_form_limits(self):
        assert effective_fraction_closed(10_000, 0.1, 0.4) == pytest.approx(
            0.1 / 0.46, abs=1e-12)
        assert 0.1 / 0.46 == pytest.approx(0.21739, abs=1e-5)
        for t in (0, 1, 7, 300):
            assert effective_fraction_closed(t, 0.0, 0.5) == 0.0

    def test_recursion_and_closed_form_share_stationary_value(self):
        for px in (0.02, 0.1, 0.3, 0.7):
            for ps in (0.05, 0.4, 0.9, 1.0):
                f = 0.0
                for _ in range(6000):
                    f = effective_fraction_step(f, px, ps)
                assert abs(f - effective_fraction_closed(1e9, px, ps)) < 1e-9

    def test_iterates_stay_in_unit_interval(self):
        for px, ps in ((0.9, 0.05), (0.99, 0.99), (0.5, 0.5)):
            f = 0.0
            for _ in range(200):
                f = effective_fraction_step(f, px, ps)
                assert 0.0 <= f <= 1.0


class TestEffectivePs:
    def test_single_measurement_ansatz(self):
        for ps in (0.0, 0.3, 1.0):
            p = EffectiveModelParams(alphas=(1.0, 0.0, 0.0), p_s=ps)
            assert effective_ps(p) == pytest.approx(ps)

    def test_fitted_triple_full_restoration(self):
        params = EffectiveModelParams(p_s=1.0)
        assert params.alphas == FITTED_REINTEGRATION_ALPHAS
        assert effective_ps(params) == pytest.approx(1.0)

    def test_meanfield(self):
        assert effective_ps_meanfield(0.5, 0.4) == pytest.approx(0.2)

    def test_normalization_enforced(self):
        with pytest.raises(ValueError):
            EffectiveModelParams(alphas=(0.5, 0.5, 0.5), p_s=0.2)
        EffectiveModelParams(alphas=(0.5, 0.5, 0.5), p_s=0.2, normalized=False)


class TestThreshold:
    def test_full_stabilizer_rate_gives_percolation_value(self):
        assert threshold_x(1.0, "ansatz") == pytest.approx(0.5)
        assert threshold_x(1.0, "ansatz", alphas=(1.0,)) == pytest.approx(0.5)

    def test_meanfield_examples(self):
        assert threshold_x(0.4, "meanfield") == pytest.approx(0.4 / 2.4)
        assert threshold_x(0.4, "meanfield") == pytest.approx(0.1667, abs=2e-4)

    def test_no_recovery_no_threshold(self):
        assert threshold_x(0.0, "ansatz") == 0.0
        assert threshold_x(0.0, "meanfield") == 0.0

    def test_meanfield_below_single_measurement_ansatz(self):
        for ps in np.linspace(0.0, 1.0, 21):
            assert threshold_x(ps, "meanfield") <= threshold_x(
                ps, "ansatz", alphas=(1.0, 0.0, 0.0)) + 1e-15

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            threshold_x(0.5, "exact")
