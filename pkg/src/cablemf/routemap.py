"""Seabed-surface emission maps along a buried cable route.

A route is a polyline with per-vertex burial depth. Each cell of a regular
corridor grid takes the distance r = sqrt(depth^2 + lateral_offset^2) to
the nearest route segment (depth interpolated linearly along chainage) and
evaluates the fitted emission model there. Distances below the model's
validity floor are clamped and flagged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .emission import EmissionFit, eval_fit
from .errors import ParseError

_EPS = 1e-12


@dataclass(frozen=True)
class RouteProfile:
    """Cable route polyline with burial depths and operating current."""

    vertices: np.ndarray  # (n, 2) easting/northing in m
    depths: np.ndarray  # (n,) burial depth below seabed in m
    current: float  # A RMS
    model: EmissionFit

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        d = np.asarray(self.depths, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise ValueError("route needs at least 2 (x, y) vertices")
        if d.shape != (v.shape[0],):
            raise ValueError("one burial depth per vertex required")
        if np.any(d < 0):
            raise ValueError("burial depths must be >= 0")
        seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
        if np.any(seg <= 0):
            raise ValueError("route vertices must be distinct (monotone chainage)")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "depths", d)

    @property
    def chainage(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])


@dataclass(frozen=True)
class EmissionMap:
    """Regular corridor grid of field magnitudes (microtesla)."""

    easting: np.ndarray  # (nx,)
    northing: np.ndarray  # (ny,)
    values: np.ndarray  # (ny, nx) microtesla
    clamped: np.ndarray  # (ny, nx) bool: r fell below the model floor
    current: float
    model_label: str
    grid_pitch: float
    extras: dict = field(default_factory=dict)


def _nearest_on_route(route: RouteProfile, pts: np.ndarray):
    """Per point: lateral offset to the route and interpolated burial depth."""
    v = route.vertices
    chain = route.chainage
    a = v[:-1]
    b = v[1:]
    ab = b - a
    ab2 = np.einsum("ij,ij->i", ab, ab)

    # distances of every point to every segment; route vertex counts are small
    diff = pts[:, None, :] - a[None, :, :]  # (n, s, 2)
    t = np.einsum("nsj,sj->ns", diff, ab) / ab2[None, :]
    t = np.clip(t, 0.0, 1.0)
    foot = a[None, :, :] + t[..., None] * ab[None, :, :]
    d2 = np.sum((pts[:, None, :] - foot) ** 2, axis=2)
    seg = np.argmin(d2, axis=1)
    n = np.arange(pts.shape[0])
    offs = np.sqrt(d2[n, seg])
    tt = t[n, seg]
    chain_pt = chain[seg] + tt * np.sqrt(ab2[seg])
    depth = np.interp(chain_pt, chain, route.depths)
    return offs, depth, chain_pt


def map_route(
    route: RouteProfile, corridor_half_width: float, grid_pitch: float
) -> EmissionMap:
    """Evaluate the emission model over a corridor grid around the route."""
    if corridor_half_width <= 0 or grid_pitch <= 0:
        raise ValueError("corridor half width and grid pitch must be > 0")
    v = route.vertices
    x0, y0 = v.min(axis=0) - corridor_half_width
    x1, y1 = v.max(axis=0) + corridor_half_width
    xs = np.arange(x0, x1 + grid_pitch / 2, grid_pitch)
    ys = np.arange(y0, y1 + grid_pitch / 2, grid_pitch)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])

    offs, depth, _ = _nearest_on_route(route, pts)
    r = np.sqrt(offs**2 + depth**2)
    r_min, r_max = route.model.r_range
    clamped = r < r_min
    r_eval = np.clip(r, r_min, None)

    b = np.asarray(
        eval_fit(route.model, route.current, r_eval, force=True), dtype=float
    )
    out_of_range = r_eval > r_max
    values = b.reshape(gy.shape)
    flags = (clamped | out_of_range).reshape(gy.shape)
    return EmissionMap(
        easting=xs,
        northing=ys,
        values=values,
        clamped=clamped.reshape(gy.shape),
        current=route.current,
        model_label=route.model.label,
        grid_pitch=grid_pitch,
        extras={"out_of_range_cells": int(out_of_range.sum()), "flags": flags},
    )


@dataclass(frozen=True)
class Hotspot:
    """One contiguous over-threshold region of an emission map."""

    peak_value: float
    peak_cell: tuple[int, int]  # (iy, ix)
    cell_count: int
    easting_range: tuple[float, float]
    northing_range: tuple[float, float]


def detect_hotspots(emap: EmissionMap, threshold: float) -> list[Hotspot]:
    """Connected regions (4-neighborhood) with B >= threshold, peak first."""
    from scipy.ndimage import label as cc_label

    mask = emap.values >= threshold
    labels, count = cc_label(mask)
    spots = []
    for idx in range(1, count + 1):
        cells = labels == idx
        vals = np.where(cells, emap.values, -np.inf)
        peak_flat = int(np.argmax(vals))
        iy, ix = np.unravel_index(peak_flat, emap.values.shape)
        ys, xs = np.nonzero(cells)
        spots.append(
            Hotspot(
                peak_value=float(emap.values[iy, ix]),
                peak_cell=(int(iy), int(ix)),
                cell_count=int(cells.sum()),
                easting_range=(
                    float(emap.easting[xs.min()]),
                    float(emap.easting[xs.max()]),
                ),
                northing_range=(
                    float(emap.northing[ys.min()]),
                    float(emap.northing[ys.max()]),
                ),
            )
        )
    spots.sort(key=lambda s: s.peak_value, reverse=True)
    return spots


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------


def load_route(path: str | Path, model: EmissionFit, current: float) -> RouteProfile:
    """Read a route JSON: {"vertices": [{"x": , "y": , "depth": }, ...]}."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        verts = [(float(p["x"]), float(p["y"])) for p in raw["vertices"]]
        depths = [float(p["depth"]) for p in raw["vertices"]]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path.name}: invalid route document: {exc}") from exc
    return RouteProfile(
        vertices=np.array(verts), depths=np.array(depths), current=current, model=model
    )


def export_map(emap: EmissionMap, path: str | Path) -> None:
    """Write the grid as CSV: easting, northing, B_uT, clamped flag."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("easting_m,northing_m,B_uT,clamped\n")
        for iy, y in enumerate(emap.northing):
            for ix, x in enumerate(emap.easting):
                fh.write(
                    f"{x:.10g},{y:.10g},{emap.values[iy, ix]:.10g},"
                    f"{int(emap.clamped[iy, ix])}\n"
                )


def import_map(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Read an exported map CSV back as (easting, northing, values, clamped)."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "easting_m,northing_m,B_uT,clamped":
            raise ParseError(f"{path.name}: unexpected header {header!r}", line=1)
        rows = []
        for ln, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ParseError(f"{path.name}: need 4 columns", line=ln)
            rows.append([float(parts[0]), float(parts[1]), float(parts[2]), float(parts[3])])
    arr = np.array(rows)
    xs = np.unique(arr[:, 0])
    ys = np.unique(arr[:, 1])
    values = np.full((ys.size, xs.size), np.nan)
    clamped = np.zeros((ys.size, xs.size), dtype=bool)
    ix = np.searchsorted(xs, arr[:, 0])
    iy = np.searchsorted(ys, arr[:, 1])
    values[iy, ix] = arr[:, 2]
    clamped[iy, ix] = arr[:, 3] > 0.5
    return xs, ys, values, clamped
