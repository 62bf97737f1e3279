"""Cable parametrization, helical geometry, and periodic-cell math.

A three-core armored cable is described by the conductor/sheath/core
diameters, the core lay length L_c, and one or two armor layers, each with
wire count N, wire diameter d_a, layer diameter D_a and signed lay length
L_a (negative = contralay, wound against the cores; positive = unilay).

The electromagnetic problem is invariant under the screw motion
(rotate by theta, translate by L) when the cell length L satisfies

    L = CP / N,   CP = 1 / |1/L_c - 1/L_a|,   theta = 2*pi*L / L_c,

because that motion maps each core helix onto itself and each armor wire
onto its neighbor's position. ``periodic_cell`` generalizes this to
steel/PE alternating layers (the wire shift must be even so steel maps to
steel) and to double armors with unequal (N, L_a), where no short exact
cell exists and the outer lay length is snapped by a tiny amount (a
fraction of a percent) to the nearest commensurable value.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegeneratePeriodicity, NoPeriodicLength, ParseError
from .materials import MaterialProps, material_from_dict, material_to_dict

TWO_PI = 2.0 * math.pi

# Relative tolerance for the exact (non-snapped) wire-shift match.
EXACT_MATCH_RTOL = 1e-9


class WirePattern(enum.Enum):
    """Armor layer composition."""

    ALL_STEEL = "AllSteel"
    STEEL_PLUS_PE = "SteelPlusPE"
    NONMAGNETIC_STEEL = "NonMagneticSteel"


class Bonding(enum.Enum):
    """Sheath grounding scheme."""

    SINGLE_POINT = "SinglePoint"
    SOLID = "SolidBonding"


@dataclass(frozen=True)
class HelixPath:
    """Circular helix around the z axis.

    point(z) = (R*cos(2*pi*z/pitch + phase), R*sin(...), z). A negative
    pitch winds clockwise; an infinite pitch degenerates to a straight
    line at the phase angle.
    """

    axis_radius: float
    pitch: float
    phase_angle: float = 0.0

    def angle(self, z):
        z = np.asarray(z, dtype=float)
        if math.isinf(self.pitch):
            return np.broadcast_to(self.phase_angle, z.shape).copy()
        return TWO_PI * z / self.pitch + self.phase_angle

    def point(self, z):
        """Position(s) on the helix; returns shape (..., 3)."""
        z = np.asarray(z, dtype=float)
        a = self.angle(z)
        return np.stack(
            [self.axis_radius * np.cos(a), self.axis_radius * np.sin(a), z], axis=-1
        )

    def tangent(self, z):
        """Unnormalized tangent d(point)/dz, shape (..., 3)."""
        z = np.asarray(z, dtype=float)
        a = self.angle(z)
        if math.isinf(self.pitch):
            rate = 0.0
        else:
            rate = TWO_PI / self.pitch
        return np.stack(
            [
                -self.axis_radius * rate * np.sin(a),
                self.axis_radius * rate * np.cos(a),
                np.ones_like(a),
            ],
            axis=-1,
        )

    def unit_tangent(self, z):
        t = self.tangent(z)
        return t / np.linalg.norm(t, axis=-1, keepdims=True)


@dataclass(frozen=True)
class ArmorLayer:
    """One layer of helically wound armor wires.

    Lengths in meters; ``lay_length`` is signed (negative = contralay).
    """

    wire_count: int
    wire_diameter: float
    layer_outer_diameter: float
    lay_length: float
    wire_pattern: WirePattern = WirePattern.ALL_STEEL
    wire_material: MaterialProps = field(default_factory=MaterialProps)

    @property
    def pitch_radius(self) -> float:
        """Radius of the circle of wire centers."""
        return 0.5 * (self.layer_outer_diameter - self.wire_diameter)

    @property
    def inner_radius(self) -> float:
        return 0.5 * self.layer_outer_diameter - self.wire_diameter

    @property
    def outer_radius(self) -> float:
        return 0.5 * self.layer_outer_diameter

    def is_pe_separator(self, wire_index: int) -> bool:
        """True when the indexed position holds a polyethylene separator."""
        return self.wire_pattern is WirePattern.STEEL_PLUS_PE and wire_index % 2 == 1


@dataclass(frozen=True)
class CableDesign:
    """Complete parametric description of a three-core (armored) cable.

    All lengths are SI meters; the JSON loader accepts millimeter keys and
    converts. ``armor_layers`` may be empty for the unarmored baseline.
    """

    rated_voltage: float
    rated_current: float
    conductor_cross_section: float  # m^2
    conductor_diameter: float
    sheath_outer_diameter: float
    sheath_thickness: float
    core_outer_diameter: float
    core_lay_length: float
    conductor_material: MaterialProps
    sheath_material: MaterialProps
    armor_layers: tuple[ArmorLayer, ...] = ()
    ambient_temperature: float = 20.0
    label: str = "cable"

    @property
    def trefoil_radius(self) -> float:
        """Distance from the cable axis to each core center.

        The three cores are assumed mutually tangent, which puts their
        centers on a circle of radius D_core / sqrt(3).
        """
        return self.core_outer_diameter / math.sqrt(3.0)

    @property
    def core_bundle_radius(self) -> float:
        """Outer envelope radius of the three-core bundle."""
        return self.trefoil_radius + 0.5 * self.core_outer_diameter

    @property
    def overall_radius(self) -> float:
        if self.armor_layers:
            return max(l.outer_radius for l in self.armor_layers)
        return self.core_bundle_radius

    def replace(self, **changes) -> "CableDesign":
        from dataclasses import replace as _replace

        return _replace(self, **changes)


@dataclass(frozen=True)
class OperatingConditions:
    """Excitation and bonding for one solve."""

    frequency: float
    phase_currents: tuple[complex, complex, complex]
    bonding: Bonding = Bonding.SOLID

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError(f"frequency must be > 0, got {self.frequency}")

    @property
    def omega(self) -> float:
        return TWO_PI * self.frequency


def balanced_currents(i_rms: float) -> tuple[complex, complex, complex]:
    """Positive-sequence balanced phasors of RMS magnitude ``i_rms``."""
    a = np.exp(-2j * math.pi / 3.0)
    return (complex(i_rms), complex(i_rms * a), complex(i_rms * a * a))


# ---------------------------------------------------------------------------
# periodicity
# ---------------------------------------------------------------------------


def crossing_pitch(core_lay: float, armor_lay: float) -> float:
    """Axial distance over which a core re-meets the same armor wire.

    CP = 1 / |1/L_c - 1/L_a| for signed lay lengths. Raises
    DegeneratePeriodicity when both pitches are equal (unilay with no
    relative twist).
    """
    if core_lay <= 0:
        raise ValueError(f"core lay length must be > 0, got {core_lay}")
    if armor_lay == 0:
        raise ValueError("armor lay length must be nonzero")
    diff = 1.0 / core_lay - 1.0 / armor_lay
    if diff == 0.0 or abs(diff) < EXACT_MATCH_RTOL / max(core_lay, abs(armor_lay)):
        raise DegeneratePeriodicity(
            f"equal unilay pitches L_c = L_a = {core_lay}: no relative twist"
        )
    return 1.0 / abs(diff)


def rotation_angle(cell_length: float, core_lay: float) -> float:
    """End-face rotation theta = 2*pi*L/L_c of the periodic cell."""
    if cell_length <= 0 or core_lay <= 0:
        raise ValueError("cell length and core lay length must be > 0")
    return TWO_PI * cell_length / core_lay


@dataclass(frozen=True)
class PeriodicCell:
    """Shortest screw-symmetric cell of an armored cable.

    Attributes:
        length: axial cell length L in m.
        theta: end-face rotation (rad), 2*pi*L/L_c.
        wire_shifts: per-layer signed wire-position shift under the screw
            motion (e.g. -1 means each wire maps onto its clockwise
            neighbor).
        lay_lengths: per-layer lay lengths actually used; may differ from
            the design values when snapping was needed (double armor).
        lay_adjustments: per-layer relative pitch change applied by
            snapping (0 for exact layers).
    """

    length: float
    theta: float
    wire_shifts: tuple[int, ...]
    lay_lengths: tuple[float, ...]
    lay_adjustments: tuple[float, ...]

    @property
    def max_lay_adjustment(self) -> float:
        return max(self.lay_adjustments, default=0.0)


def _min_shift(layer: ArmorLayer) -> int:
    """Smallest wire shift mapping the layer's materials onto themselves."""
    if layer.wire_pattern is WirePattern.STEEL_PLUS_PE:
        return 2
    return 1


def _shift_rate(core_lay: float, armor_lay: float) -> float:
    """Signed wire-shift rate d(delta)/dz in wire spacings per meter times 2*pi/N.

    Returns 1/L_a - 1/L_c, the net angular rate (per 2*pi) at which the
    armor frame drifts relative to the rotated core frame.
    """
    return 1.0 / armor_lay - 1.0 / core_lay


def periodic_cell(design: CableDesign, pitch_tol: float = 5e-3) -> PeriodicCell:
    """Find the shortest cell length with exact screw symmetry.

    Single layer: L = m * CP / N with m the smallest admissible shift
    (m = 2 for steel/PE alternation). Two layers: the wire shifts of both
    layers must be simultaneously integral, which is generically
    impossible; the search keeps layer 0 exact, scans candidate shifts,
    and snaps layer 1's lay length by at most ``pitch_tol`` (relative).

    Raises NoPeriodicLength when no candidate satisfies the tolerance.
    """
    if not design.armor_layers:
        raise ValueError("periodic cell requires at least one armor layer")
    lc = design.core_lay_length
    layers = design.armor_layers

    if len(layers) == 1:
        layer = layers[0]
        cp = crossing_pitch(lc, layer.lay_length)
        m = _min_shift(layer)
        length = m * cp / layer.wire_count
        rate = _shift_rate(lc, layer.lay_length)
        shift = int(round(rate * length * layer.wire_count))
        return PeriodicCell(
            length=length,
            theta=rotation_angle(length, lc),
            wire_shifts=(shift,),
            lay_lengths=(layer.lay_length,),
            lay_adjustments=(0.0,),
        )

    if len(layers) != 2:
        raise ValueError("designs carry at most two armor layers")

    l0, l1 = layers
    rate0 = _shift_rate(lc, l0.lay_length)
    rate1 = _shift_rate(lc, l1.lay_length)
    if rate0 == 0.0 or rate1 == 0.0:
        raise DegeneratePeriodicity("one armor layer has no relative twist")

    best: PeriodicCell | None = None
    for m0 in range(_min_shift(l0), l0.wire_count + 1, _min_shift(l0)):
        length = m0 / (l0.wire_count * abs(rate0))
        x1 = length * l1.wire_count * abs(rate1)
        m1 = int(round(x1))
        if m1 < 1 or m1 > l1.wire_count:
            continue
        if m1 % _min_shift(l1) != 0:
            continue
        # snap layer 1's pitch so its shift is exactly integral over `length`
        target_rate = math.copysign(m1 / (l1.wire_count * length), rate1)
        inv_lay = 1.0 / lc + target_rate
        if inv_lay == 0.0:
            continue
        snapped = 1.0 / inv_lay
        adjust = abs(snapped - l1.lay_length) / abs(l1.lay_length)
        if adjust > pitch_tol:
            continue
        shift0 = int(round(rate0 * length * l0.wire_count))
        shift1 = int(round(math.copysign(m1, rate1)))
        cell = PeriodicCell(
            length=length,
            theta=rotation_angle(length, lc),
            wire_shifts=(shift0, shift1),
            lay_lengths=(l0.lay_length, snapped),
            lay_adjustments=(0.0, adjust),
        )
        if best is None or cell.length < best.length:
            best = cell
    if best is None:
        raise NoPeriodicLength(
            f"no common cell length within pitch tolerance {pitch_tol:g} "
            f"for layers N={l0.wire_count}/{l1.wire_count}, "
            f"L_a={l0.lay_length}/{l1.lay_length}"
        )
    return best


def periodic_length(design: CableDesign, pitch_tol: float = 5e-3) -> float:
    """Shortest screw-symmetric cell length (see ``periodic_cell``)."""
    return periodic_cell(design, pitch_tol=pitch_tol).length


def wire_mapping_residual(design: CableDesign, cell: PeriodicCell) -> float:
    """Worst angular mismatch (rad) of armor wires under the cell's screw map.

    For each layer, the end cross-section rotated back by theta must put
    every wire onto a start wire position; the residual is the distance of
    the net drift to the nearest multiple of the wire spacing.
    """
    worst = 0.0
    for layer, lay in zip(design.armor_layers, cell.lay_lengths):
        drift = TWO_PI * cell.length * _shift_rate(design.core_lay_length, lay)
        spacing = TWO_PI / layer.wire_count
        frac = drift / spacing
        worst = max(worst, abs(frac - round(frac)) * spacing)
    return worst


# ---------------------------------------------------------------------------
# centerlines
# ---------------------------------------------------------------------------


def phase_centerline(design: CableDesign, phase_index: int) -> HelixPath:
    """Helical centerline of phase conductor 0, 1, or 2."""
    if phase_index not in (0, 1, 2):
        raise ValueError(f"phase index must be 0..2, got {phase_index}")
    return HelixPath(
        axis_radius=design.trefoil_radius,
        pitch=design.core_lay_length,
        phase_angle=TWO_PI * phase_index / 3.0,
    )


def armor_wire_centerline(design: CableDesign, layer: int, wire_index: int) -> HelixPath:
    """Helical centerline of one armor wire."""
    if layer >= len(design.armor_layers):
        raise ValueError(f"design has {len(design.armor_layers)} armor layer(s)")
    lay = design.armor_layers[layer]
    if not 0 <= wire_index < lay.wire_count:
        raise ValueError(f"wire index must be 0..{lay.wire_count - 1}")
    return HelixPath(
        axis_radius=lay.pitch_radius,
        pitch=lay.lay_length,
        phase_angle=TWO_PI * wire_index / lay.wire_count,
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def validate_design(design: CableDesign) -> list[str]:
    """Return human-readable descriptions of every violated invariant."""
    v: list[str] = []
    d = design

    for name in (
        "conductor_diameter",
        "sheath_outer_diameter",
        "sheath_thickness",
        "core_outer_diameter",
    ):
        if getattr(d, name) <= 0:
            v.append(f"{name} must be > 0, got {getattr(d, name)}")
    if d.core_lay_length <= 0:
        v.append(f"core lay length must be > 0, got {d.core_lay_length}")

    sheath_inner = d.sheath_outer_diameter - 2.0 * d.sheath_thickness
    if not d.conductor_diameter < sheath_inner:
        v.append(
            f"conductor diameter {d.conductor_diameter} must be smaller than the "
            f"sheath inner diameter {sheath_inner}"
        )
    if not sheath_inner < d.sheath_outer_diameter:
        v.append("sheath thickness must be > 0")
    if not d.sheath_outer_diameter <= d.core_outer_diameter:
        v.append(
            f"sheath outer diameter {d.sheath_outer_diameter} exceeds the core "
            f"outer diameter {d.core_outer_diameter}"
        )

    if len(d.armor_layers) > 2:
        v.append(f"at most two armor layers supported, got {len(d.armor_layers)}")

    for k, layer in enumerate(d.armor_layers):
        if layer.wire_count <= 0:
            v.append(f"armor layer {k}: wire count must be > 0")
            continue
        if layer.wire_diameter <= 0 or layer.layer_outer_diameter <= 0:
            v.append(f"armor layer {k}: diameters must be > 0")
            continue
        if layer.lay_length == 0:
            v.append(f"armor layer {k}: lay length must be nonzero")
        elif layer.lay_length == d.core_lay_length:
            v.append(
                f"armor layer {k}: unilay lay length equals the core lay length "
                "(degenerate periodicity)"
            )
        occupied = layer.wire_count * layer.wire_diameter
        available = math.pi * (layer.layer_outer_diameter - layer.wire_diameter)
        if occupied > available * (1.0 + 1e-12):
            v.append(
                f"armor layer {k}: {layer.wire_count} wires of diameter "
                f"{layer.wire_diameter} overlap on the layer circle "
                f"({occupied:.6g} > {available:.6g})"
            )
        if layer.wire_pattern is WirePattern.STEEL_PLUS_PE and layer.wire_count % 2:
            v.append(
                f"armor layer {k}: steel/PE alternation needs an even wire count, "
                f"got {layer.wire_count}"
            )

    if d.armor_layers:
        innermost = min(d.armor_layers, key=lambda l: l.inner_radius)
        if d.core_bundle_radius > innermost.inner_radius + 1e-12:
            v.append(
                f"core bundle radius {d.core_bundle_radius:.6g} does not fit inside "
                f"the innermost armor radius {innermost.inner_radius:.6g}"
            )
        radii = sorted((l.inner_radius, l.outer_radius) for l in d.armor_layers)
        for (ri0, ro0), (ri1, _) in zip(radii, radii[1:]):
            if ro0 > ri1 + 1e-12:
                v.append("armor layers overlap radially")

    return v


# ---------------------------------------------------------------------------
# JSON I/O (diameters in mm at the file boundary, lay lengths in m)
# ---------------------------------------------------------------------------

MM = 1e-3


def design_from_dict(raw: dict, label: str = "cable") -> CableDesign:
    try:
        layers = []
        for entry in raw.get("armor_layers", []):
            layers.append(
                ArmorLayer(
                    wire_count=int(entry["wire_count"]),
                    wire_diameter=float(entry["wire_diameter_mm"]) * MM,
                    layer_outer_diameter=float(entry["layer_outer_diameter_mm"]) * MM,
                    lay_length=float(entry["lay_length_m"]),
                    wire_pattern=WirePattern(entry.get("wire_pattern", "AllSteel")),
                    wire_material=material_from_dict(entry.get("wire_material", {})),
                )
            )
        return CableDesign(
            rated_voltage=float(raw["rated_voltage_kV"]) * 1e3,
            rated_current=float(raw["rated_current_A"]),
            conductor_cross_section=float(raw["conductor_cross_section_mm2"]) * MM * MM,
            conductor_diameter=float(raw["conductor_diameter_mm"]) * MM,
            sheath_outer_diameter=float(raw["sheath_outer_diameter_mm"]) * MM,
            sheath_thickness=float(raw["sheath_thickness_mm"]) * MM,
            core_outer_diameter=float(raw["core_outer_diameter_mm"]) * MM,
            core_lay_length=float(raw["core_lay_length_m"]),
            conductor_material=material_from_dict(raw.get("conductor_material", {})),
            sheath_material=material_from_dict(raw.get("sheath_material", {})),
            armor_layers=tuple(layers),
            ambient_temperature=float(raw.get("ambient_temperature_C", 20.0)),
            label=raw.get("label", label),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid cable design document: {exc}") from exc


def design_to_dict(design: CableDesign) -> dict:
    raw = {
        "label": design.label,
        "rated_voltage_kV": design.rated_voltage / 1e3,
        "rated_current_A": design.rated_current,
        "conductor_cross_section_mm2": design.conductor_cross_section / (MM * MM),
        "conductor_diameter_mm": design.conductor_diameter / MM,
        "sheath_outer_diameter_mm": design.sheath_outer_diameter / MM,
        "sheath_thickness_mm": design.sheath_thickness / MM,
        "core_outer_diameter_mm": design.core_outer_diameter / MM,
        "core_lay_length_m": design.core_lay_length,
        "ambient_temperature_C": design.ambient_temperature,
        "conductor_material": material_to_dict(design.conductor_material),
        "sheath_material": material_to_dict(design.sheath_material),
        "armor_layers": [
            {
                "wire_count": l.wire_count,
                "wire_diameter_mm": l.wire_diameter / MM,
                "layer_outer_diameter_mm": l.layer_outer_diameter / MM,
                "lay_length_m": l.lay_length,
                "wire_pattern": l.wire_pattern.value,
                "wire_material": material_to_dict(l.wire_material),
            }
            for l in design.armor_layers
        ],
    }
    return raw


def load_design(path: str | Path) -> CableDesign:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path.name}: {exc}") from exc
    return design_from_dict(raw, label=path.stem)


def save_design(design: CableDesign, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(design_to_dict(design), indent=2) + "\n", encoding="utf-8"
    )
