"""Emission model evaluation, fitting, and shielding factor."""

import numpy as np
import pytest

from cablemf import (
    MFProfileSet,
    bundled_fit,
    bundled_profile,
    eval_fit,
    fit_coefficients,
    fit_quality,
    load_fit,
    save_fit,
    shielding_factor,
)
from cablemf.emission import profile_from_csv, profile_to_csv
from cablemf.errors import FitDivergence, OutOfValidityRange, ShapeMismatch


@pytest.fixture(scope="module")
def contralay():
    return bundled_fit("cable1-contralay")


@pytest.fixture(scope="module")
def unilay():
    return bundled_fit("cable1-unilay")


class TestEvalFit:
    def test_published_point_100a_1m(self, contralay):
        assert eval_fit(contralay, 100.0, 1.0) == pytest.approx(0.76, abs=0.005)

    def test_published_point_100a_halfm(self, contralay):
        assert eval_fit(contralay, 100.0, 0.5) == pytest.approx(4.60, rel=0.005)

    def test_published_point_450a_3m(self, contralay):
        assert eval_fit(contralay, 450.0, 3.0) == pytest.approx(1.53e-2, rel=0.01)

    def test_r_equal_1_is_k1_plus_k3(self, contralay):
        k = contralay.k_values(100.0)
        assert eval_fit(contralay, 100.0, 1.0) == pytest.approx(
            10.0 ** (k[0] + k[2]), rel=1e-12
        )

    def test_out_of_range_raises(self, contralay):
        with pytest.raises(OutOfValidityRange):
            eval_fit(contralay, 100.0, 50.0)
        with pytest.raises(OutOfValidityRange):
            eval_fit(contralay, 5.0, 1.0)

    def test_force_overrides(self, contralay):
        assert eval_fit(contralay, 100.0, 50.0, force=True) > 0

    def test_strictly_decreasing_in_r(self, contralay, unilay):
        rs = np.linspace(0.15, 5.0, 200)
        for fit in (contralay, unilay):
            b = eval_fit(fit, 450.0, rs)
            assert np.all(np.diff(b) < 0)

    def test_unilay_exceeds_contralay_everywhere(self, contralay, unilay):
        rs = np.geomspace(0.15, 5.0, 25)
        for current in (40.0, 100.0, 450.0, 890.0):
            b_c = eval_fit(contralay, current, rs)
            b_u = eval_fit(unilay, current, rs)
            assert np.all(b_u > b_c)

    def test_all_36_published_values_within_2pct(self, contralay):
        table = bundled_profile("cable1-contralay-fit")
        for current, r, ref in zip(table.currents, table.distances, table.values):
            got = eval_fit(contralay, current, r)
            assert got == pytest.approx(ref, rel=0.02), (current, r)


class TestFitting:
    def test_roundtrip_on_model_generated_data(self, contralay):
        currents = np.array([40.0, 100.0, 450.0, 890.0])
        rs = np.geomspace(0.15, 5.0, 9)
        grid_i, grid_r = np.meshgrid(currents, rs, indexing="ij")
        b = np.array(
            [eval_fit(contralay, i, r) for i, r in zip(grid_i.ravel(), grid_r.ravel())]
        )
        profiles = MFProfileSet(grid_i.ravel(), grid_r.ravel(), b)
        fit, report = fit_coefficients(profiles, label="roundtrip")
        # model values must reproduce, though coefficients need not
        assert report["max_abs_eps"] < 0.005
        for current in (60.0, 300.0, 700.0):
            for r in (0.2, 1.0, 4.0):
                assert eval_fit(fit, current, r) == pytest.approx(
                    eval_fit(contralay, current, r), rel=0.005
                )

    def test_usm_grid_under_10pct(self):
        profiles = bundled_profile("cable1-contralay-usm")
        fit, report = fit_coefficients(profiles, label="usm-refit")
        assert report["max_abs_eps"] < 0.10
        assert report["r_squared"] > 0.999

    def test_single_distance_diverges(self):
        profiles = MFProfileSet(
            np.array([40.0, 100.0, 450.0]),
            np.array([1.0, 1.0, 1.0]),
            np.array([0.3, 0.72, 2.81]),
        )
        with pytest.raises(FitDivergence):
            fit_coefficients(profiles)

    def test_too_few_currents_diverges(self):
        rs = np.geomspace(0.15, 5, 9)
        profiles = MFProfileSet(
            np.full(9, 100.0), rs, np.geomspace(50, 1e-4, 9)
        )
        with pytest.raises(FitDivergence):
            fit_coefficients(profiles)


class TestFitQuality:
    def test_perfect_synthetic_r2(self, contralay):
        currents = np.repeat([40.0, 100.0, 450.0], 9)
        rs = np.tile(np.geomspace(0.15, 5.0, 9), 3)
        b = np.array([eval_fit(contralay, i, r) for i, r in zip(currents, rs)])
        report = fit_quality(contralay, MFProfileSet(currents, rs, b))
        assert report["r_squared"] == pytest.approx(1.0, abs=1e-6)
        assert report["max_abs_eps"] < 1e-12

    def test_published_table_under_10pct(self, contralay):
        profiles = bundled_profile("cable1-contralay-usm")
        report = fit_quality(contralay, profiles)
        assert report["max_abs_eps"] < 0.10

    def test_mismatched_profile_detected(self, contralay):
        currents = np.repeat([40.0, 100.0, 450.0], 9)
        rs = np.tile(np.geomspace(0.15, 5.0, 9), 3)
        b = np.full(27, 1.0)  # constant field cannot match a decaying fit
        report = fit_quality(contralay, MFProfileSet(currents, rs, b))
        assert report["r_squared"] < 0.5


class TestShieldingFactor:
    def test_identity(self):
        b = np.array([1.0, 2.0, 3.0])
        assert np.allclose(shielding_factor(b, b), 1.0)

    def test_scalar(self):
        assert shielding_factor(5.4, 2.0) == pytest.approx(2.7)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            shielding_factor(np.ones(3), np.ones(4))

    def test_zero_division(self):
        with pytest.raises(ZeroDivisionError):
            shielding_factor(np.ones(2), np.zeros(2))

    def test_profile_sets(self):
        rs = np.geomspace(0.5, 5, 6)
        base = MFProfileSet(np.full(6, 100.0), rs, np.geomspace(4, 1e-4, 6))
        shielded = MFProfileSet(np.full(6, 100.0), rs, base.values / 2.0)
        assert np.allclose(shielding_factor(base, shielded), 2.0)


class TestIO:
    def test_fit_roundtrip(self, tmp_path, contralay):
        path = tmp_path / "coeffs.json"
        save_fit(contralay, path)
        again = load_fit(path)
        assert again.alpha1 == contralay.alpha1
        assert again.r_range == contralay.r_range

    def test_profile_roundtrip(self, tmp_path):
        profiles = bundled_profile("cable1-contralay-usm")
        path = tmp_path / "profile.csv"
        profile_to_csv(profiles, path)
        again = profile_from_csv(path)
        assert np.allclose(again.values, profiles.values, rtol=1e-12)
