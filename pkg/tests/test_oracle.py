"""Biot-Savart filament engine against closed-form references."""

import math

import numpy as np
import pytest
from scipy.constants import mu_0

from cablemf import (
    HelixPath,
    balanced_currents,
    cable_filament_field,
    helix_filament_field,
    load_design,
    meter_magnitude_ut,
    parallel_threephase_field,
)
from cablemf.errors import PointOnFilament

from conftest import CABLE1_PATH

STRAIGHT = HelixPath(axis_radius=0.0, pitch=math.inf)


class TestStraightWireLimit:
    def test_amperes_law(self):
        b = helix_filament_field(STRAIGHT, 100.0, [(1.0, 0.0, 0.0)], half_span=50.0)
        expect = mu_0 * 100.0 / (2 * math.pi * 1.0)  # 2e-5 T
        assert abs(b[0, 1]) == pytest.approx(expect, rel=1e-3)
        assert abs(b[0, 0]) < 1e-9 * expect
        assert abs(b[0, 2]) < 1e-6 * expect

    def test_zero_current(self):
        b = helix_filament_field(STRAIGHT, 0.0, [(1.0, 0.0, 0.0)], half_span=10.0)
        assert np.all(b == 0)

    def test_sign_flip(self):
        pts = [(0.7, 0.3, 0.1)]
        b_pos = helix_filament_field(STRAIGHT, 42.0, pts, half_span=30.0)
        b_neg = helix_filament_field(STRAIGHT, -42.0, pts, half_span=30.0)
        assert np.allclose(b_pos, -b_neg, rtol=1e-12)

    def test_point_on_filament(self):
        with pytest.raises(PointOnFilament):
            helix_filament_field(STRAIGHT, 1.0, [(0.0, 0.0, 0.3)], half_span=5.0)


class TestParallelTriad:
    def test_quadrature_matches_closed_form(self):
        # nearly-straight helices (pitch 1e6 m) vs the exact 2-D field
        radius = 0.0533
        spacing = radius * math.sqrt(3.0)
        currents = balanced_currents(745.0)
        paths = [
            HelixPath(axis_radius=radius, pitch=1e6, phase_angle=2 * math.pi * k / 3)
            for k in range(3)
        ]
        pts = np.array([[r, 0.1, 0.0] for r in (0.5, 1.0, 2.0, 5.0)])
        b_quad = sum(
            helix_filament_field(p, i, pts, half_span=100.0)
            for p, i in zip(paths, currents)
        )
        b_exact = parallel_threephase_field(spacing, currents, pts)
        mag_q = meter_magnitude_ut(b_quad)
        mag_e = meter_magnitude_ut(b_exact)
        assert np.allclose(mag_q, mag_e, rtol=5e-3)

    def test_balanced_far_field_decays_r2(self):
        spacing = 0.09
        currents = balanced_currents(100.0)
        rs = np.array([20 * spacing, 40 * spacing])
        pts = np.column_stack([rs, np.zeros(2), np.zeros(2)])
        mag = meter_magnitude_ut(parallel_threephase_field(spacing, currents, pts))
        slope = math.log(mag[1] / mag[0]) / math.log(rs[1] / rs[0])
        assert slope == pytest.approx(-2.0, abs=0.01)

    def test_zero_sequence_decays_r1(self):
        spacing = 0.09
        currents = (100.0, 100.0, 100.0)
        rs = np.array([20 * spacing, 40 * spacing])
        pts = np.column_stack([rs, np.zeros(2), np.zeros(2)])
        mag = meter_magnitude_ut(parallel_threephase_field(spacing, currents, pts))
        slope = math.log(mag[1] / mag[0]) / math.log(rs[1] / rs[0])
        assert slope == pytest.approx(-1.0, abs=0.01)

    def test_single_phase_reduces_to_one_wire(self):
        spacing = 0.09
        radius = spacing / math.sqrt(3.0)
        d = 2.0
        b = parallel_threephase_field(spacing, (250.0, 0.0, 0.0), [(radius + d, 0.0, 0.0)])
        expect = mu_0 * 250.0 / (2 * math.pi * d)
        assert abs(b[0, 1]) == pytest.approx(expect, rel=1e-12)


class TestTwistedTriad:
    @pytest.fixture(scope="class")
    def cable1(self):
        return load_design(CABLE1_PATH)

    def test_twisted_below_parallel_at_3m(self, cable1):
        currents = balanced_currents(745.0)
        pts = [(3.0, 0.0, 0.0)]
        _, mag_tw = cable_filament_field(cable1, currents, pts)
        spacing = cable1.trefoil_radius * math.sqrt(3.0)
        mag_par = meter_magnitude_ut(parallel_threephase_field(spacing, currents, pts))
        assert mag_tw[0] < mag_par[0]

    def test_twisted_decay_steeper_than_parallel(self, cable1):
        currents = balanced_currents(745.0)
        rs = np.array([1.0, 1.5, 2.0, 3.0])
        pts = np.column_stack([rs, np.zeros(4), np.zeros(4)])
        _, mag_tw = cable_filament_field(cable1, currents, pts)
        logs = np.log(mag_tw)
        slopes = np.diff(logs) / np.diff(np.log(rs))
        assert np.all(slopes < -2.0)

    def test_sheath_opposition_reduces_field(self, cable1):
        currents = balanced_currents(745.0)
        pts = [(0.5, 0.0, 0.0)]
        _, mag_bare = cable_filament_field(cable1, currents, pts)
        sheath = tuple(-0.25 * c for c in currents)
        _, mag_opposed = cable_filament_field(
            cable1, currents, pts, sheath_currents=sheath
        )
        assert mag_opposed[0] < mag_bare[0]

    def test_divergence_free(self, cable1):
        currents = balanced_currents(745.0)
        h = 1e-3
        x0 = np.array([0.8, 0.2, 0.05])
        offsets = np.array(
            [
                [h, 0, 0], [-h, 0, 0],
                [0, h, 0], [0, -h, 0],
                [0, 0, h], [0, 0, -h],
            ]
        )
        b, _ = cable_filament_field(cable1, currents, x0 + offsets)
        div = (
            (b[0, 0] - b[1, 0]) + (b[2, 1] - b[3, 1]) + (b[4, 2] - b[5, 2])
        ) / (2 * h)
        scale = np.max(np.abs(b)) / h
        assert abs(div) < 1e-3 * scale

    def test_helix_pitch_1e6_matches_parallel_everywhere(self, cable1):
        # oracle self-consistency at r <= 5 m
        straightish = cable1.replace(core_lay_length=1e6)
        currents = balanced_currents(300.0)
        rs = np.array([0.5, 2.0, 5.0])
        pts = np.column_stack([np.zeros(3), rs, np.zeros(3)])
        _, mag_helix = cable_filament_field(
            straightish, currents, pts, half_span=200.0
        )
        spacing = cable1.trefoil_radius * math.sqrt(3.0)
        mag_par = meter_magnitude_ut(parallel_threephase_field(spacing, currents, pts))
        assert np.allclose(mag_helix, mag_par, rtol=1e-3)
