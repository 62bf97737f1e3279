"""Permeability lookup and material validation."""

import pytest

from cablemf import MaterialProps, permeability_at


def test_constant_material_ignores_h():
    mat = MaterialProps(conductivity=4.03e6, mu_r=300.0 + 0j)
    assert permeability_at(mat, 0.0) == 300.0 + 0j
    assert permeability_at(mat, 1e6) == 300.0 + 0j


def test_tabulated_exact_node():
    mat = MaterialProps(
        conductivity=5e6,
        mu_curve_h=(10.0, 1000.0),
        mu_curve_values=(100 - 10j, 200 - 40j),
    )
    assert permeability_at(mat, 10.0) == pytest.approx(100 - 10j)


def test_tabulated_end_clamp():
    mat = MaterialProps(
        mu_curve_h=(10.0, 1000.0), mu_curve_values=(100 - 10j, 200 - 40j)
    )
    assert permeability_at(mat, 1e6) == pytest.approx(200 - 40j)
    assert permeability_at(mat, 1e-3) == pytest.approx(100 - 10j)


def test_log_linear_interpolation_midpoint():
    mat = MaterialProps(
        mu_curve_h=(10.0, 1000.0), mu_curve_values=(100 - 10j, 200 - 40j)
    )
    # geometric mean of the H nodes sits halfway in log space
    assert permeability_at(mat, 100.0) == pytest.approx(150 - 25j, rel=1e-12)


def test_negative_h_rejected():
    with pytest.raises(ValueError):
        permeability_at(MaterialProps(), -1.0)


def test_curve_must_increase():
    with pytest.raises(ValueError):
        MaterialProps(mu_curve_h=(10.0, 10.0), mu_curve_values=(1 + 0j, 2 + 0j))


def test_curve_needs_two_points():
    with pytest.raises(ValueError):
        MaterialProps(mu_curve_h=(10.0,), mu_curve_values=(100 + 0j,))


def test_negative_conductivity_rejected():
    with pytest.raises(ValueError):
        MaterialProps(conductivity=-1.0)
