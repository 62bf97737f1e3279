"""Cable geometry, periodicity math, and design validation."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cablemf import (
    ArmorLayer,
    CableDesign,
    WirePattern,
    armor_wire_centerline,
    crossing_pitch,
    load_design,
    periodic_cell,
    periodic_length,
    phase_centerline,
    rotation_angle,
    validate_design,
    wire_mapping_residual,
)
from cablemf.design import design_from_dict, design_to_dict
from cablemf.errors import DegeneratePeriodicity, NoPeriodicLength
from cablemf.materials import MaterialProps

from conftest import CABLE1_PATH, CABLE2_PATH


@pytest.fixture(scope="module")
def cable1():
    return load_design(CABLE1_PATH)


@pytest.fixture(scope="module")
def cable2():
    return load_design(CABLE2_PATH)


class TestCrossingPitch:
    def test_contralay_value(self):
        # 1 / (1/2.8 + 1/3.5) = 14/9
        assert crossing_pitch(2.8, -3.5) == pytest.approx(1.5555556, rel=1e-6)

    def test_unilay_value(self):
        assert crossing_pitch(2.8, 3.5) == pytest.approx(14.0, rel=1e-9)

    def test_equal_pitch_degenerate(self):
        with pytest.raises(DegeneratePeriodicity):
            crossing_pitch(2.8, 2.8)

    @given(
        lc=st.floats(0.5, 20.0),
        la=st.floats(0.5, 20.0),
        contra=st.booleans(),
    )
    def test_symmetric_and_reciprocal(self, lc, la, contra):
        la_signed = -la if contra else la
        if not contra and abs(1 / lc - 1 / la) < 1e-6:
            return
        cp = crossing_pitch(lc, la_signed)
        # swapping the two lay lengths leaves CP unchanged
        if contra:
            assert crossing_pitch(la, -lc) == pytest.approx(cp, rel=1e-12)
            # contralay: harmonic sum identity
            assert 1.0 / cp == pytest.approx(1.0 / lc + 1.0 / la, rel=1e-12)
        else:
            assert crossing_pitch(la, lc) == pytest.approx(cp, rel=1e-12)


class TestPeriodicCell:
    def test_cable1_length(self, cable1):
        # CP/N = 14/9/114; the 7-digit figure is that value rounded
        assert periodic_length(cable1) == pytest.approx(14.0 / 9.0 / 114.0, rel=1e-12)
        assert periodic_length(cable1) == pytest.approx(0.0136452, abs=5e-8)

    def test_cable1_theta_and_shift(self, cable1):
        cell = periodic_cell(cable1)
        assert cell.theta == pytest.approx(2 * math.pi * cell.length / 2.8, rel=1e-14)
        assert cell.theta == pytest.approx(0.030619811438497, rel=1e-9)
        assert cell.wire_shifts == (-1,)
        assert cell.lay_adjustments == (0.0,)

    def test_single_layer_unilay(self, cable1):
        layer = cable1.armor_layers[0]
        unilay = cable1.replace(
            armor_layers=(
                ArmorLayer(
                    wire_count=layer.wire_count,
                    wire_diameter=layer.wire_diameter,
                    layer_outer_diameter=layer.layer_outer_diameter,
                    lay_length=3.5,
                    wire_material=layer.wire_material,
                ),
            )
        )
        assert periodic_length(unilay) == pytest.approx(0.1228070, rel=1e-6)

    def test_single_layer_times_n_is_crossing_pitch(self, cable1):
        layer = cable1.armor_layers[0]
        cp = crossing_pitch(cable1.core_lay_length, layer.lay_length)
        assert periodic_length(cable1) * layer.wire_count == pytest.approx(cp, rel=1e-12)

    def test_mapping_residual_cable1(self, cable1):
        cell = periodic_cell(cable1)
        assert wire_mapping_residual(cable1, cell) < 1e-9

    def test_steel_pe_doubles_cell(self, cable1):
        layer = cable1.armor_layers[0]
        pe = cable1.replace(
            armor_layers=(
                ArmorLayer(
                    wire_count=layer.wire_count,
                    wire_diameter=layer.wire_diameter,
                    layer_outer_diameter=layer.layer_outer_diameter,
                    lay_length=layer.lay_length,
                    wire_pattern=WirePattern.STEEL_PLUS_PE,
                    wire_material=layer.wire_material,
                ),
            )
        )
        cell = periodic_cell(pe)
        assert cell.length == pytest.approx(2 * periodic_length(cable1), rel=1e-12)
        assert cell.wire_shifts[0] % 2 == 0

    def test_cable2_two_layer_search(self, cable2):
        cell = periodic_cell(cable2)
        # brute-force oracle: smallest admissible cell over all shift pairs,
        # layer 0 exact, layer 1 pitch snapped within 0.5%
        lc = cable2.core_lay_length
        l0, l1 = cable2.armor_layers
        rate0 = abs(1 / l0.lay_length - 1 / lc)
        rate1 = 1 / l1.lay_length - 1 / lc
        best = None
        for m0 in range(1, l0.wire_count + 1):
            length = m0 / (l0.wire_count * rate0)
            m1 = round(length * l1.wire_count * abs(rate1))
            if not 1 <= m1 <= l1.wire_count:
                continue
            snapped_rate = math.copysign(m1 / (l1.wire_count * length), rate1)
            lay1 = 1.0 / (1.0 / lc + snapped_rate)
            if abs(lay1 - l1.lay_length) / abs(l1.lay_length) > 5e-3:
                continue
            if best is None or length < best:
                best = length
        assert best is not None
        assert cell.length == pytest.approx(best, rel=1e-12)
        assert wire_mapping_residual(cable2, cell) < 1e-9
        assert cell.max_lay_adjustment < 5e-3

    def test_cable2_impossible_without_snapping(self, cable2):
        with pytest.raises(NoPeriodicLength):
            periodic_cell(cable2, pitch_tol=1e-9)

    def test_unarmored_rejected(self, cable1):
        with pytest.raises(ValueError):
            periodic_length(cable1.replace(armor_layers=()))


class TestRotationAngle:
    def test_value(self):
        assert rotation_angle(0.013645224171539964, 2.8) == pytest.approx(
            0.030619811438497017, rel=1e-9
        )

    def test_full_pitch(self):
        assert rotation_angle(2.8, 2.8) == pytest.approx(2 * math.pi, rel=1e-15)

    def test_wire_positions_map_to_neighbors(self, cable1):
        # theta - 2*pi*L/L_a must be a multiple of the wire spacing
        cell = periodic_cell(cable1)
        layer = cable1.armor_layers[0]
        drift = cell.theta - 2 * math.pi * cell.length / layer.lay_length
        spacing = 2 * math.pi / layer.wire_count
        frac = drift / spacing
        assert abs(frac - round(frac)) * spacing < 1e-9


class TestCenterlines:
    def test_phase0_on_trefoil_circle(self, cable1):
        helix = phase_centerline(cable1, 0)
        p = helix.point(0.0)
        assert p[0] == pytest.approx(cable1.core_outer_diameter / math.sqrt(3), rel=1e-12)
        assert p[1] == pytest.approx(0.0, abs=1e-15)

    def test_phase1_is_rotated_phase0(self, cable1):
        p0 = phase_centerline(cable1, 0).point(0.0)
        p1 = phase_centerline(cable1, 1).point(0.0)
        ang = 2 * math.pi / 3
        rot = np.array(
            [[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]]
        )
        assert np.allclose(rot @ p0[:2], p1[:2], atol=1e-15)

    def test_pitch_periodicity(self, cable1):
        helix = phase_centerline(cable1, 0)
        p0 = helix.point(0.0)
        p1 = helix.point(cable1.core_lay_length)
        assert np.allclose(p0[:2], p1[:2], atol=1e-12)

    def test_wire0_radius(self, cable1):
        helix = armor_wire_centerline(cable1, 0, 0)
        assert helix.axis_radius == pytest.approx((0.2146 - 0.0056) / 2, rel=1e-12)
        assert helix.point(0.0)[1] == pytest.approx(0.0, abs=1e-15)

    def test_wires_equally_spaced(self, cable1):
        n = cable1.armor_layers[0].wire_count
        k = 17
        p0 = armor_wire_centerline(cable1, 0, 0).point(0.0)
        pk = armor_wire_centerline(cable1, 0, k).point(0.0)
        ang = 2 * math.pi * k / n
        rot = np.array(
            [[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]]
        )
        assert np.allclose(rot @ p0[:2], pk[:2], atol=1e-12)

    def test_contralay_angle_decreases(self, cable1):
        wire = armor_wire_centerline(cable1, 0, 0)
        core = phase_centerline(cable1, 0)
        dz = 0.01
        assert wire.angle(dz) < wire.angle(0.0)
        assert core.angle(dz) > core.angle(0.0)


class TestValidation:
    def test_cable1_valid(self, cable1):
        assert validate_design(cable1) == []

    def test_cable2_valid(self, cable2):
        assert validate_design(cable2) == []

    def test_wire_overlap_detected(self, cable1):
        layer = cable1.armor_layers[0]
        bad = cable1.replace(
            armor_layers=(
                ArmorLayer(
                    wire_count=layer.wire_count,
                    wire_diameter=0.007,  # 114 * 7 mm > pi * 207.6 mm
                    layer_outer_diameter=layer.layer_outer_diameter,
                    lay_length=layer.lay_length,
                    wire_material=layer.wire_material,
                ),
            )
        )
        violations = validate_design(bad)
        assert len([v for v in violations if "overlap" in v]) == 1

    def test_zero_lay_length(self, cable1):
        bad = cable1.replace(core_lay_length=0.0)
        assert any("core lay length" in v for v in validate_design(bad))

    def test_roundtrip_dict(self, cable2):
        again = design_from_dict(design_to_dict(cable2))
        assert again.armor_layers == cable2.armor_layers
        assert again.conductor_cross_section == pytest.approx(
            cable2.conductor_cross_section, rel=1e-15
        )


def test_trefoil_fits_cable1(cable1):
    layer = cable1.armor_layers[0]
    assert cable1.core_bundle_radius <= layer.inner_radius
