"""Material properties: conductivity and (possibly field-dependent) permeability.

Magnetic materials carry a complex relative permeability mu_r = mu' - j*mu''
(the negative imaginary part models hysteresis-type loss). Steel armor wires
may instead carry a tabulated curve mu_r(H) sampled over several decades of
field strength; lookups interpolate log-linearly in H and clamp at the ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VACUUM = None  # sentinel docs only; use MaterialProps() for non-magnetic insulation


@dataclass(frozen=True)
class MaterialProps:
    """Electromagnetic properties of one cable material.

    Attributes:
        conductivity: electrical conductivity sigma in S/m (>= 0).
        mu_r: constant complex relative permeability (ignored when a curve
            is given). Convention mu_r = mu' - j*mu'' with mu'' >= 0.
        mu_curve_h: field strengths H in A/m (strictly increasing) for a
            tabulated permeability curve, or None for constant materials.
        mu_curve_values: complex mu_r at each tabulated H.
    """

    conductivity: float = 0.0
    mu_r: complex = 1.0 + 0.0j
    mu_curve_h: tuple[float, ...] | None = None
    mu_curve_values: tuple[complex, ...] | None = None

    def __post_init__(self):
        if self.conductivity < 0:
            raise ValueError(f"conductivity must be >= 0, got {self.conductivity}")
        if (self.mu_curve_h is None) != (self.mu_curve_values is None):
            raise ValueError("mu_curve_h and mu_curve_values must be given together")
        if self.mu_curve_h is not None:
            h = np.asarray(self.mu_curve_h, dtype=float)
            if h.size < 2:
                raise ValueError("permeability curve needs at least 2 points")
            if np.any(np.diff(h) <= 0):
                raise ValueError("permeability curve H values must be strictly increasing")
            if len(self.mu_curve_values) != h.size:
                raise ValueError("permeability curve H and mu arrays differ in length")

    @property
    def is_tabulated(self) -> bool:
        return self.mu_curve_h is not None

    @property
    def is_magnetic(self) -> bool:
        if self.is_tabulated:
            return any(v.real > 1.0 for v in self.mu_curve_values)
        return self.mu_r.real > 1.0


def permeability_at(material: MaterialProps, h_field: float) -> complex:
    """Complex relative permeability at RMS field strength ``h_field`` (A/m).

    Constant materials return their constant. Tabulated materials return a
    log-linear interpolation in H between the bracketing samples (real and
    imaginary parts interpolated independently), clamped at the curve ends.
    """
    if h_field < 0:
        raise ValueError(f"field strength must be >= 0, got {h_field}")
    if not material.is_tabulated:
        return complex(material.mu_r)

    h = np.asarray(material.mu_curve_h, dtype=float)
    mu = np.asarray(material.mu_curve_values, dtype=complex)
    if h_field <= h[0]:
        return complex(mu[0])
    if h_field >= h[-1]:
        return complex(mu[-1])
    logh = np.log(h)
    x = np.log(h_field)
    re = np.interp(x, logh, mu.real)
    im = np.interp(x, logh, mu.imag)
    return complex(re, im)


@dataclass(frozen=True)
class MaterialSet:
    """Bundle of the passive materials filling a simulation domain."""

    filler: MaterialProps = field(default_factory=MaterialProps)
    jacket: MaterialProps = field(default_factory=MaterialProps)
    medium: MaterialProps = field(default_factory=MaterialProps)


def material_from_dict(raw: dict) -> MaterialProps:
    """Build MaterialProps from its JSON representation.

    Accepted keys: ``conductivity_S_per_m``, ``relative_permeability``
    (scalar or ``[re, im]`` meaning re - j*im), and
    ``relative_permeability_curve`` as ``[[H, re, im], ...]``.
    """
    sigma = float(raw.get("conductivity_S_per_m", 0.0))
    curve = raw.get("relative_permeability_curve")
    if curve is not None:
        hs = tuple(float(p[0]) for p in curve)
        vals = tuple(complex(float(p[1]), -abs(float(p[2]))) for p in curve)
        return MaterialProps(conductivity=sigma, mu_curve_h=hs, mu_curve_values=vals)
    mu = raw.get("relative_permeability", 1.0)
    if isinstance(mu, (list, tuple)):
        mu_c = complex(float(mu[0]), -abs(float(mu[1])))
    else:
        mu_c = complex(float(mu), 0.0)
    return MaterialProps(conductivity=sigma, mu_r=mu_c)


def material_to_dict(mat: MaterialProps) -> dict:
    raw: dict = {"conductivity_S_per_m": mat.conductivity}
    if mat.is_tabulated:
        raw["relative_permeability_curve"] = [
            [h, v.real, abs(v.imag)] for h, v in zip(mat.mu_curve_h, mat.mu_curve_values)
        ]
    else:
        raw["relative_permeability"] = [mat.mu_r.real, abs(mat.mu_r.imag)]
    return raw
