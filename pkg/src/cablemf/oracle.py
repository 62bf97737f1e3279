"""Filament-field engine: Biot-Savart quadrature for helical conductors.

Serves as an independent verification oracle for non-magnetic
configurations (no eddy currents, no flux shunting: prescribed source
currents only) and as the fast model for twisted-vs-parallel comparisons.

Each source is a helical centerline carrying a complex current phasor.
Fields follow from the Biot-Savart line integral over a finite axial span
(default 10 crossing pitches each side of the probe station) evaluated by
adaptive composite Gauss-Legendre quadrature; the truncated remainder is
approximated by long straight segments along the end tangents, which makes
the straight-wire limit exact up to quadrature tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.constants import mu_0

from .design import CableDesign, HelixPath, crossing_pitch, phase_centerline
from .errors import PointOnFilament

_GL_NODES, _GL_WEIGHTS = leggauss(8)
_TAIL_LENGTH = 1.0e5  # m; straight-segment stand-in for the semi-infinite remainder
_MAX_DEPTH = 40


@dataclass(frozen=True)
class FilamentSet:
    """Helical filaments with their complex current phasors (A RMS)."""

    paths: tuple[HelixPath, ...]
    currents: tuple[complex, ...]
    half_span: float  # m, integration half-length along z
    abs_tol: float = 1e-10  # T

    def __post_init__(self):
        if len(self.paths) != len(self.currents):
            raise ValueError("paths and currents differ in length")
        if not all(np.isfinite(abs(c)) for c in self.currents):
            raise ValueError("currents must be finite")
        if self.half_span <= 0:
            raise ValueError("integration span must be > 0")


def _segment_field(a: np.ndarray, b: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Exact unit-current Biot-Savart field of the straight segment a -> b.

    Uses the numerically stable two-endpoint form. Shapes: a, b (3,);
    points (n, 3); returns (n, 3) in tesla per ampere.
    """
    ra = a[None, :] - points
    rb = b[None, :] - points
    na = np.linalg.norm(ra, axis=1)
    nb = np.linalg.norm(rb, axis=1)
    cross = np.cross(ra, rb)
    denom = na * nb * (na * nb + np.einsum("ij,ij->i", ra, rb))
    small = denom < 1e-30
    denom = np.where(small, 1.0, denom)
    out = mu_0 / (4.0 * math.pi) * cross * ((na + nb) / denom)[:, None]
    out[small] = 0.0
    return out


def _panel_integral(path: HelixPath, z0: float, z1: float, points: np.ndarray) -> np.ndarray:
    """Gauss-Legendre Biot-Savart contribution of the arc z in [z0, z1]."""
    zm = 0.5 * (z0 + z1)
    zh = 0.5 * (z1 - z0)
    zs = zm + zh * _GL_NODES
    pos = path.point(zs)  # (q, 3)
    tan = path.tangent(zs)  # (q, 3), dl/dz
    r = points[:, None, :] - pos[None, :, :]  # (n, q, 3)
    dist = np.linalg.norm(r, axis=2)
    if np.any(dist < 1e-12):
        raise PointOnFilament("probe point lies on a source filament")
    integrand = np.cross(np.broadcast_to(tan[None], r.shape), r) / dist[..., None] ** 3
    return mu_0 / (4.0 * math.pi) * zh * np.einsum("q,nqc->nc", _GL_WEIGHTS, integrand)


def _adaptive_arc(
    path: HelixPath, z0: float, z1: float, points: np.ndarray, tol: float
) -> np.ndarray:
    """Adaptive bisection: accept a panel when halving changes it below tol."""
    total = np.zeros((points.shape[0], 3))
    stack = [(z0, z1, _panel_integral(path, z0, z1, points), 0)]
    while stack:
        a, b, coarse, depth = stack.pop()
        mid = 0.5 * (a + b)
        left = _panel_integral(path, a, mid, points)
        right = _panel_integral(path, mid, b, points)
        fine = left + right
        err = np.max(np.abs(fine - coarse))
        budget = tol * (b - a) / (z1 - z0) + 1e-8 * np.max(np.abs(fine))
        if err < budget or depth >= _MAX_DEPTH:
            total += fine
        else:
            stack.append((a, mid, left, depth + 1))
            stack.append((mid, b, right, depth + 1))
    return total


def helix_filament_field(
    path: HelixPath,
    current: complex,
    points,
    half_span: float | None = None,
    center_z: float | None = None,
    abs_tol: float = 1e-10,
) -> np.ndarray:
    """Complex B vectors (T) of one helical filament at ``points``.

    The line integral runs over z in [center_z - half_span,
    center_z + half_span] (default: centered on the mean probe z, ten
    pitches each side) plus straight tail segments along the end tangents.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if center_z is None:
        center_z = float(np.mean(points[:, 2]))
    if half_span is None:
        pitch_scale = abs(path.pitch) if math.isfinite(path.pitch) else 1.0
        reach = float(np.max(np.linalg.norm(points[:, :2], axis=1))) + path.axis_radius
        half_span = 10.0 * max(pitch_scale, reach)

    # guard: probe sitting on the filament itself
    radial = np.abs(np.linalg.norm(points[:, :2], axis=1) - path.axis_radius)
    near = radial < 1e-9
    if np.any(near):
        for idx in np.nonzero(near)[0]:
            ang = math.atan2(points[idx, 1], points[idx, 0]) if path.axis_radius else 0.0
            pos = path.point(points[idx, 2])
            helix_ang = math.atan2(pos[1], pos[0]) if path.axis_radius else 0.0
            if path.axis_radius == 0.0 or abs(
                (ang - helix_ang + math.pi) % (2 * math.pi) - math.pi
            ) < 1e-9:
                raise PointOnFilament("probe point lies on the filament")

    z0 = center_z - half_span
    z1 = center_z + half_span
    # initial panels: a handful per pitch so the oscillatory arc is resolved
    pitch_scale = abs(path.pitch) if math.isfinite(path.pitch) else half_span
    n_panels = max(4, min(4096, int(math.ceil(2.0 * half_span / (pitch_scale / 4.0)))))
    edges = np.linspace(z0, z1, n_panels + 1)
    unit = np.zeros((points.shape[0], 3))
    for a, b in zip(edges[:-1], edges[1:]):
        unit += _adaptive_arc(path, a, b, points, abs_tol / n_panels)

    # Truncated remainder: the far field of a helix is that of a straight
    # filament on its axis (helical multipoles decay exponentially), so each
    # end bridges radially to the axis and continues as an axial tail. For
    # balanced triads the axial tails cancel exactly, matching the true
    # exponentially small remainder; the straight-wire limit stays exact.
    p_lo = path.point(z0)
    a_lo = np.array([0.0, 0.0, z0])
    unit += _segment_field(a_lo - _TAIL_LENGTH * np.array([0.0, 0.0, 1.0]), a_lo, points)
    if path.axis_radius > 0:
        unit += _segment_field(a_lo, p_lo, points)
    p_hi = path.point(z1)
    a_hi = np.array([0.0, 0.0, z1])
    if path.axis_radius > 0:
        unit += _segment_field(p_hi, a_hi, points)
    unit += _segment_field(a_hi, a_hi + _TAIL_LENGTH * np.array([0.0, 0.0, 1.0]), points)

    return complex(current) * unit


def filament_set_field(fset: FilamentSet, points) -> np.ndarray:
    """Superposed complex B of every filament in the set."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    total = np.zeros((points.shape[0], 3), dtype=complex)
    for path, current in zip(fset.paths, fset.currents):
        if current == 0:
            continue
        total += helix_filament_field(
            path, current, points, half_span=fset.half_span, abs_tol=fset.abs_tol
        )
    return total


def meter_magnitude_ut(b_complex: np.ndarray) -> np.ndarray:
    """3-axis RMS resultant sqrt(|Bx|^2+|By|^2+|Bz|^2) in microtesla."""
    b_complex = np.atleast_2d(b_complex)
    return 1e6 * np.sqrt(np.sum(np.abs(b_complex) ** 2, axis=1))


def cable_filament_field(
    design: CableDesign,
    phase_currents,
    points,
    sheath_currents=None,
    half_span: float | None = None,
    abs_tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """Source-field oracle for a cable: three core helices, optional sheaths.

    ``sheath_currents`` (3 complex phasors) adds coaxial helical filaments
    at the sheath mean radius, e.g. to mimic induced circulating currents
    in phase opposition. Returns (complex B vectors in T, meter-equivalent
    magnitudes in microtesla).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if half_span is None:
        if design.armor_layers:
            cp = crossing_pitch(design.core_lay_length, design.armor_layers[0].lay_length)
        else:
            cp = design.core_lay_length
        reach = float(np.max(np.linalg.norm(points[:, :2], axis=1)))
        half_span = 10.0 * max(cp, reach)

    paths = [phase_centerline(design, k) for k in range(3)]
    currents = list(phase_currents)
    if sheath_currents is not None:
        # sheaths are coaxial with their cores: same helical axis
        for k, i_s in enumerate(sheath_currents):
            paths.append(
                HelixPath(
                    axis_radius=design.trefoil_radius,
                    pitch=design.core_lay_length,
                    phase_angle=2.0 * math.pi * k / 3.0,
                )
            )
            currents.append(i_s)
    fset = FilamentSet(
        paths=tuple(paths),
        currents=tuple(complex(c) for c in currents),
        half_span=half_span,
        abs_tol=abs_tol,
    )
    b = filament_set_field(fset, points)
    return b, meter_magnitude_ut(b)


def parallel_threephase_field(spacing: float, currents, points) -> np.ndarray:
    """Exact 2-D field of three infinite parallel conductors in trefoil.

    ``spacing`` is the axis-to-axis distance between conductors; the triad
    sits on a circle of radius spacing/sqrt(3) at angles 0, 120, 240 deg,
    matching the z=0 cross-section of the helical triad. Returns complex
    B vectors (n, 3) in tesla (Bz = 0).
    """
    if spacing <= 0:
        raise ValueError("spacing must be > 0")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    radius = spacing / math.sqrt(3.0)
    out = np.zeros((points.shape[0], 3), dtype=complex)
    for k, current in enumerate(currents):
        ang = 2.0 * math.pi * k / 3.0
        cx, cy = radius * math.cos(ang), radius * math.sin(ang)
        dx = points[:, 0] - cx
        dy = points[:, 1] - cy
        r2 = dx * dx + dy * dy
        if np.any(r2 < 1e-24):
            raise PointOnFilament("probe point lies on a conductor axis")
        factor = mu_0 * complex(current) / (2.0 * math.pi)
        out[:, 0] += factor * (-dy / r2)
        out[:, 1] += factor * (dx / r2)
    return out
