"""Cross-section triangulation of a three-core armored cable.

The planar mesh is organized around the twist frames of the volume
extrusion: everything revolving with the cores (conductors, sheaths,
interstitial filler, jacket, medium, stretch layer) may be meshed freely,
while each armor layer's annulus is built by instancing a single sector
template N times so the triangulation carries exact N-fold rotational
symmetry. Thin node-free "seam" bands separate regions of different twist
rate; one ring of elements there absorbs the relative rotation.

Circular boundaries are polygonal; polygon radii are inflated by
1/sqrt((n/2pi) sin(2pi/n)) so every tagged region keeps its analytic
cross-section area (armor wires cap the inflation to avoid overlap, which
the phase-offset polygons leave room for).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from ..design import CableDesign, WirePattern
from ..errors import MeshFailure

TWO_PI = 2.0 * math.pi

# region tag strings
TAG_CONDUCTOR = "conductor:{k}"
TAG_SHEATH = "sheath:{k}"
TAG_FILLER = "filler"
TAG_ARMOR = "armor:{layer}:{wire}"
TAG_PE = "pe:{layer}:{wire}"
TAG_JACKET = "jacket"
TAG_MEDIUM = "medium"
TAG_STRETCH = "stretch"

CORE_FRAME = 0


@dataclass(frozen=True)
class ResolutionSpec:
    """Mesh density knobs for one named resolution."""

    name: str
    conductor_rings: tuple[tuple[float, int], ...]  # (radius fraction, az count)
    insulation_az: int  # az count at insulation outer = sheath rings
    sheath_layers: int
    serving_az: int  # az count at the core outer boundary
    wire_boundary: int  # nodes on each armor wire polygon
    wire_rings: tuple[tuple[float, int], ...]  # interior rings (fraction, count)
    filler_h: float  # target interstitial spacing as fraction of D_core
    medium_growth: float  # geometric ring growth in the surrounding medium
    medium_az_factor: float  # target chord / radial spacing ratio
    stretch_layers: int
    n_slices: int


RESOLUTIONS = {
    "coarse": ResolutionSpec(
        name="coarse",
        conductor_rings=((0.3, 6), (0.62, 12), (1.0, 24)),
        insulation_az=48,
        sheath_layers=2,
        serving_az=96,
        wire_boundary=8,
        wire_rings=(),
        filler_h=0.035,
        medium_growth=1.45,
        medium_az_factor=0.55,
        stretch_layers=2,
        n_slices=4,
    ),
    "medium": ResolutionSpec(
        name="medium",
        conductor_rings=((0.22, 8), (0.48, 16), (1.0, 32)),
        insulation_az=64,
        sheath_layers=3,
        serving_az=128,
        wire_boundary=12,
        wire_rings=((0.5, 6),),
        filler_h=0.024,
        medium_growth=1.32,
        medium_az_factor=0.45,
        stretch_layers=3,
        n_slices=8,
    ),
    # axial twist per cell is a few hundredths of a radian, so cross-section
    # density, not slice count, is the binding accuracy knob at this scale
    "fine": ResolutionSpec(
        name="fine",
        conductor_rings=((0.2, 12), (0.45, 24), (1.0, 48)),
        insulation_az=80,
        sheath_layers=4,
        serving_az=160,
        wire_boundary=16,
        wire_rings=((0.5, 8),),
        filler_h=0.018,
        medium_growth=1.26,
        medium_az_factor=0.4,
        stretch_layers=3,
        n_slices=8,
    ),
}


@dataclass
class PlanarMesh:
    """Tagged cross-section triangulation with twist-frame metadata."""

    nodes: np.ndarray  # (n, 2)
    triangles: np.ndarray  # (m, 3) CCW
    tri_tags: np.ndarray  # (m,) into tag_names
    tag_names: list[str]
    node_frame: np.ndarray  # (n,) twist frame id; 0 = core frame
    node_shift: np.ndarray  # (n,) planar index of the screw-map image
    medium_radius: float
    stretch_radius: float
    outer_ring: np.ndarray  # node ids on the outer boundary circle

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def tag_index(self, name: str) -> int:
        return self.tag_names.index(name)

    def tris_with_tag(self, name: str) -> np.ndarray:
        return np.nonzero(self.tri_tags == self.tag_index(name))[0]

    def region_areas(self) -> dict[str, float]:
        """Total triangle area per tag name."""
        p = self.nodes[self.triangles]
        areas = 0.5 * np.abs(
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )
        out: dict[str, float] = {}
        for tid, name in enumerate(self.tag_names):
            mask = self.tri_tags == tid
            if mask.any():
                out[name] = float(areas[mask].sum())
        return out


def polygon_inflation(n: int) -> float:
    """Radius factor making a regular n-gon's area equal its circle's."""
    q = (n / TWO_PI) * math.sin(TWO_PI / n)
    return 1.0 / math.sqrt(q)


class _Builder:
    def __init__(self):
        self._nodes: list[np.ndarray] = []
        self._count = 0
        self.tris: list[tuple[int, int, int]] = []
        self.tri_tags: list[int] = []
        self.tag_names: list[str] = []
        self._tag_ids: dict[str, int] = {}
        self.node_frame: list[np.ndarray] = []
        self.shift_pairs: dict[int, int] = {}  # node -> screw image (non-identity)

    def tag(self, name: str) -> int:
        if name not in self._tag_ids:
            self._tag_ids[name] = len(self.tag_names)
            self.tag_names.append(name)
        return self._tag_ids[name]

    def add_nodes(self, coords: np.ndarray, frame: int) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        idx = np.arange(self._count, self._count + coords.shape[0])
        self._nodes.append(coords)
        self.node_frame.append(np.full(coords.shape[0], frame, dtype=np.int8))
        self._count += coords.shape[0]
        return idx

    def add_tris(self, conn, tag_name: str) -> None:
        tid = self.tag(tag_name)
        for t in conn:
            self.tris.append((int(t[0]), int(t[1]), int(t[2])))
            self.tri_tags.append(tid)

    def node_array(self) -> np.ndarray:
        return np.concatenate(self._nodes, axis=0)

    def finish(self, medium_radius, stretch_radius, outer_ring) -> PlanarMesh:
        nodes = self.node_array()
        tris = np.asarray(self.tris, dtype=np.int64)
        # orient CCW
        p = nodes[tris]
        cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
            p[:, 2, 0] - p[:, 0, 0]
        ) * (p[:, 1, 1] - p[:, 0, 1])
        flip = cross < 0
        tris[flip] = tris[flip][:, [0, 2, 1]]
        if np.any(np.abs(cross) < 1e-18):
            raise MeshFailure("degenerate (zero-area) triangle in cross-section")
        shift = np.arange(nodes.shape[0], dtype=np.int64)
        for src, dst in self.shift_pairs.items():
            shift[src] = dst
        return PlanarMesh(
            nodes=nodes,
            triangles=tris,
            tri_tags=np.asarray(self.tri_tags, dtype=np.int32),
            tag_names=self.tag_names,
            node_frame=np.concatenate(self.node_frame),
            node_shift=shift,
            medium_radius=medium_radius,
            stretch_radius=stretch_radius,
            outer_ring=outer_ring,
        )


def _ring_coords(radius: float, count: int, phase: float = 0.0, center=(0.0, 0.0)):
    ang = phase + TWO_PI * np.arange(count) / count
    return np.column_stack(
        [center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)]
    )


def _zip_rings(
    builder: _Builder,
    inner_ids: np.ndarray,
    outer_ids: np.ndarray,
    tag: str,
    center=(0.0, 0.0),
) -> None:
    """Triangulate the closed strip between two concentric node rings."""
    nodes = builder.node_array()
    cx, cy = center

    def angles(ids):
        p = nodes[ids]
        return np.arctan2(p[:, 1] - cy, p[:, 0] - cx)

    inner_ids = np.asarray(inner_ids)
    outer_ids = np.asarray(outer_ids)
    raw_i = angles(inner_ids)
    raw_o = angles(outer_ids)
    # cut the rings open at the largest angular gap of the combined node set
    # so no node straddles the branch point
    combined = np.sort(np.concatenate([raw_i, raw_o]))
    gaps = np.diff(np.concatenate([combined, [combined[0] + TWO_PI]]))
    cut = combined[int(np.argmax(gaps))] + 0.5 * float(np.max(gaps))
    ang_i = np.mod(raw_i - cut, TWO_PI)
    ang_o = np.mod(raw_o - cut, TWO_PI)
    ia = inner_ids[np.argsort(ang_i)]
    oa = outer_ids[np.argsort(ang_o)]
    ang_i = np.sort(ang_i)
    ang_o = np.sort(ang_o)
    ni, no = len(ia), len(oa)

    tris = []
    i = j = 0
    steps_i = steps_o = 0
    while steps_i < ni or steps_o < no:
        ai_next = ang_i[(i + 1) % ni] + TWO_PI * ((i + 1) // ni)
        ao_next = ang_o[(j + 1) % no] + TWO_PI * ((j + 1) // no)
        advance_inner = steps_i < ni and (steps_o >= no or ai_next <= ao_next)
        if advance_inner:
            tris.append((ia[i % ni], oa[j % no], ia[(i + 1) % ni]))
            i += 1
            steps_i += 1
        else:
            tris.append((ia[i % ni], oa[j % no], oa[(j + 1) % no]))
            j += 1
            steps_o += 1
    builder.add_tris(tris, tag)


def _disk(
    builder: _Builder,
    center,
    radius: float,
    rings: tuple[tuple[float, int], ...],
    tag: str,
    frame: int,
    phase: float = 0.0,
    inflate: bool = True,
) -> np.ndarray:
    """Structured disk: center node, concentric rings, zippered strips.

    Returns the node ids of the outermost ring.
    """
    factor = polygon_inflation(rings[-1][1]) if inflate else 1.0
    cid = builder.add_nodes(np.array([center]), frame)
    prev = None
    for frac, count in rings:
        ids = builder.add_nodes(
            _ring_coords(frac * radius * factor, count, phase, center), frame
        )
        if prev is None:
            conn = [
                (cid[0], ids[k], ids[(k + 1) % count]) for k in range(count)
            ]
            builder.add_tris(conn, tag)
        else:
            _zip_rings(builder, prev, ids, tag, center)
        prev = ids
    return prev


def _annulus(
    builder: _Builder,
    center,
    inner_ids: np.ndarray,
    radii_counts: list[tuple[float, int]],
    tag: str,
    frame: int,
    phase: float = 0.0,
) -> np.ndarray:
    """Concentric strips outward from an existing ring; returns outer ring ids."""
    prev = inner_ids
    for radius, count in radii_counts:
        ids = builder.add_nodes(_ring_coords(radius, count, phase, center), frame)
        _zip_rings(builder, prev, ids, tag, center)
        prev = ids
    return prev


def _convex_contains(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Vectorized point-in-convex-polygon (vertices CCW)."""
    inside = np.ones(pts.shape[0], dtype=bool)
    n = poly.shape[0]
    for k in range(n):
        a = poly[k]
        b = poly[(k + 1) % n]
        cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        inside &= cross > -1e-14
    return inside


def _delaunay_fill(
    builder: _Builder,
    boundary_ids: np.ndarray,
    scatter: np.ndarray,
    keep_fn,
    tag_fn,
    frame: int,
) -> None:
    """Triangulate scattered filler: Delaunay over boundary + interior points.

    keep_fn(centroids) -> bool mask; tag_fn(centroids) -> list of tag names.
    """
    scatter_ids = (
        builder.add_nodes(scatter, frame) if scatter.size else np.empty(0, dtype=int)
    )
    all_ids = np.concatenate([boundary_ids, scatter_ids])
    pts = builder.node_array()[all_ids]
    tri = Delaunay(pts)
    cent = pts[tri.simplices].mean(axis=1)
    keep = keep_fn(cent)
    simpl = tri.simplices[keep]
    cent = cent[keep]
    tags = tag_fn(cent)
    for t, name in zip(all_ids[simpl], tags):
        builder.add_tris([t], name)


# ---------------------------------------------------------------------------
# armor sector template
# ---------------------------------------------------------------------------


def _armor_layer(
    builder: _Builder,
    design: CableDesign,
    layer_index: int,
    res: ResolutionSpec,
    frame: int,
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Instance the N-fold sector template of one armor layer.

    Returns (margin_in_ids, margin_out_ids, margin_in_radius,
    margin_out_radius). Screw-map images of the armor-frame nodes are set
    later by ``apply_wire_shifts`` once the periodic cell fixes the shifts.
    """
    layer = design.armor_layers[layer_index]
    n = layer.wire_count
    dphi = TWO_PI / n
    c = layer.pitch_radius
    a = 0.5 * layer.wire_diameter
    nw = res.wire_boundary

    # area-exact polygon radius, capped so adjacent polygons cannot touch;
    # closest approach is between gap-flanking vertices at local angles
    # +-(90 - 180/nw) deg, which the phase offset keeps off the sector cut
    spacing = 2.0 * c * math.sin(math.pi / n)
    flank = math.sin(math.pi / 2 - math.pi / nw)
    a_cap = 0.495 * spacing / flank
    a_eff = min(a * polygon_inflation(nw), a_cap)

    # margins, adaptive to available radial space
    inner_clear = (c - a_eff) - design.core_bundle_radius
    if layer_index > 0:
        prev = design.armor_layers[layer_index - 1]
        inner_clear = (c - a_eff) - (prev.pitch_radius + a_eff)
    if inner_clear <= 0:
        raise MeshFailure(
            f"armor layer {layer_index} wires leave no clearance below them"
        )
    g_in = min(0.3 * layer.wire_diameter, 0.3 * inner_clear)
    g_out = 0.3 * layer.wire_diameter
    r_in = c - a_eff - g_in
    r_out = c + a_eff + g_out

    # ---- template node list (sector 0: wire at angle 0) ----
    local: list[np.ndarray] = []

    def lnode(xy):
        local.append(np.asarray(xy, dtype=float))
        return len(local) - 1

    wire_ids_local = []
    center_local = lnode((c, 0.0))
    wire_ids_local.append(center_local)
    ring_ids = [np.array([center_local])]
    for frac, cnt in res.wire_rings:
        ring = _ring_coords(frac * a_eff, cnt, math.pi / cnt, (c, 0.0))
        ring_ids.append(np.array([lnode(p) for p in ring]))
        wire_ids_local.extend(ring_ids[-1])
    bnd = _ring_coords(a_eff, nw, math.pi / nw, (c, 0.0))
    bnd_ids = np.array([lnode(p) for p in bnd])
    ring_ids.append(bnd_ids)
    wire_ids_local.extend(bnd_ids)

    m_in_0 = lnode((r_in, 0.0))
    m_in_h = lnode((r_in * math.cos(dphi / 2), r_in * math.sin(dphi / 2)))
    m_out_0 = lnode((r_out, 0.0))
    m_out_h = lnode((r_out * math.cos(dphi / 2), r_out * math.sin(dphi / 2)))

    t_count = len(local)
    local_arr = np.array(local)

    # ---- wire interior triangulation: center fan plus zippered rings ----
    cnt = len(ring_ids[1])
    wire_tris = [
        (center_local, ring_ids[1][k], ring_ids[1][(k + 1) % cnt]) for k in range(cnt)
    ]
    strip_pairs = list(zip(ring_ids[1:-1], ring_ids[2:]))

    # ---- instance the template N times ----
    def rot(pts, angle):
        ca, sa = math.cos(angle), math.sin(angle)
        return pts @ np.array([[ca, sa], [-sa, ca]])

    all_ids = np.empty((n, t_count), dtype=np.int64)
    for k in range(n):
        all_ids[k] = builder.add_nodes(rot(local_arr, k * dphi), frame)

    for k in range(n):
        pe = layer.is_pe_separator(k)
        name = (
            TAG_PE.format(layer=layer_index, wire=k)
            if pe
            else TAG_ARMOR.format(layer=layer_index, wire=k)
        )
        builder.add_tris(
            [(all_ids[k][t[0]], all_ids[k][t[1]], all_ids[k][t[2]]) for t in wire_tris],
            name,
        )
        for inner, outer in strip_pairs:
            _zip_rings(
                builder,
                all_ids[k][inner],
                all_ids[k][outer],
                name,
                center=tuple(rot(np.array([[c, 0.0]]), k * dphi)[0]),
            )

    # ---- annulus filler: zippered strips plus explicit gap quads ----
    # wire polygon vertex j sits at local angle (2j+1)*pi/nw; the vertices
    # flanking +-90 deg face the neighboring wires across the gap
    q = nw // 4
    inward_local = bnd_ids[np.arange(q, 3 * q)]  # angles 90+..270- deg
    outward_local = bnd_ids[np.concatenate([np.arange(3 * q, nw), np.arange(0, q)])]
    # reorder by global angle within a sector: inward runs from local 270-
    # back to local 90+ as the global angle increases
    inward_sorted = inward_local[::-1]
    inner_curve = all_ids[:, inward_sorted].ravel()
    outer_curve = all_ids[:, outward_local].ravel()

    margin_in = np.concatenate([all_ids[:, m_in_0], all_ids[:, m_in_h]])
    margin_out = np.concatenate([all_ids[:, m_out_0], all_ids[:, m_out_h]])

    _zip_rings(builder, margin_in, inner_curve, TAG_FILLER)
    _zip_rings(builder, outer_curve, margin_out, TAG_FILLER)

    # gap quads between wire k (vertices flanking +90) and k+1 (flanking -90)
    v_out_lo = bnd_ids[q - 1]  # local 90 - 180/nw
    v_in_hi = bnd_ids[q]  # local 90 + 180/nw
    v_in_lo = bnd_ids[3 * q - 1]  # local 270 - 180/nw
    v_out_hi = bnd_ids[3 * q]  # local 270 + 180/nw
    quads = []
    for k in range(n):
        kn = (k + 1) % n
        p1 = all_ids[k][v_in_hi]
        p2 = all_ids[kn][v_in_lo]
        p3 = all_ids[kn][v_out_hi]
        p4 = all_ids[k][v_out_lo]
        quads.append((p1, p2, p3))
        quads.append((p1, p3, p4))
    builder.add_tris(quads, TAG_FILLER)

    return margin_in, margin_out, r_in, r_out


# ---------------------------------------------------------------------------
# main entry
# ---------------------------------------------------------------------------


def build_cross_section(
    design: CableDesign,
    resolution: str = "coarse",
    medium_radius: float | None = None,
    stretch_thickness: float | None = None,
    jacket_thickness: float = 4e-3,
    probe_band: tuple[float, float] | None = None,
    probe_h_frac: float = 0.12,
) -> PlanarMesh:
    """Triangulate one cable cross-section with tagged regions.

    ``medium_radius`` defaults to 5x the outermost armor diameter;
    ``stretch_thickness`` to one armor diameter. ``probe_band`` refines
    the medium rings between two radii to spacing ``probe_h_frac * r`` so
    field probes there sit in well-resolved elements. Raises MeshFailure
    when a region degenerates at the requested density.
    """
    if resolution not in RESOLUTIONS:
        raise ValueError(f"unknown resolution {resolution!r}")
    res = RESOLUTIONS[resolution]

    d_outer = 2.0 * design.overall_radius
    if medium_radius is None:
        medium_radius = 5.0 * d_outer
    if stretch_thickness is None:
        stretch_thickness = d_outer
    stretch_radius = medium_radius + stretch_thickness

    b = _Builder()
    # register every expected tag up front so indices are stable
    b.tag(TAG_FILLER)

    # ---- cores ----
    r_cond = 0.5 * design.conductor_diameter
    r_sh_in = 0.5 * design.sheath_outer_diameter - design.sheath_thickness
    r_sh_out = 0.5 * design.sheath_outer_diameter
    r_core = 0.5 * design.core_outer_diameter
    tre = design.trefoil_radius

    core_outer_rings = []
    for k in range(3):
        ang = TWO_PI * k / 3.0
        center = (tre * math.cos(ang), tre * math.sin(ang))
        phase = ang  # rotate templates with placement so tangent points are shared
        cond_ring = _disk(
            b,
            center,
            r_cond,
            res.conductor_rings,
            TAG_CONDUCTOR.format(k=k),
            CORE_FRAME,
            phase=phase,
        )
        infl = polygon_inflation(res.insulation_az)
        mid_ins = 0.5 * (r_cond + r_sh_in)
        ins_ring = _annulus(
            b,
            center,
            cond_ring,
            [(mid_ins * infl, res.insulation_az), (r_sh_in * infl, res.insulation_az)],
            TAG_FILLER,
            CORE_FRAME,
            phase=phase,
        )
        sheath_radii = np.linspace(r_sh_in, r_sh_out, res.sheath_layers + 1)[1:]
        sh_ring = _annulus(
            b,
            center,
            ins_ring,
            [(r * infl, res.insulation_az) for r in sheath_radii],
            TAG_SHEATH.format(k=k),
            CORE_FRAME,
            phase=phase,
        )
        # serving out to the core circle; not inflated (tangency), az doubled
        serve_ring = _annulus(
            b,
            center,
            sh_ring,
            [(r_core, res.serving_az)],
            TAG_FILLER,
            CORE_FRAME,
            phase=phase + math.pi / res.serving_az,
        )
        core_outer_rings.append(serve_ring)

    nodes_so_far = b.node_array()
    core_polys = [nodes_so_far[r] for r in core_outer_rings]
    core_centers = [
        np.array([tre * math.cos(TWO_PI * k / 3), tre * math.sin(TWO_PI * k / 3)])
        for k in range(3)
    ]

    # ---- armor layers with seams, or straight filler for unarmored ----
    h_fill = res.filler_h * design.core_outer_diameter

    def interstitial_scatter(r_limit: float) -> np.ndarray:
        pts = []
        step = h_fill
        nr = max(2, int(r_limit / step))
        for rr in np.linspace(0.3 * step, r_limit - 0.7 * step, nr):
            cnt = max(6, int(TWO_PI * rr / step))
            ring = _ring_coords(rr, cnt, phase=0.123 + rr)
            pts.append(ring)
        cand = np.vstack(pts) if pts else np.empty((0, 2))
        keep = np.ones(cand.shape[0], dtype=bool)
        for cc in core_centers:
            keep &= np.linalg.norm(cand - cc, axis=1) > r_core + 0.7 * step
        return cand[keep]

    def keep_interstitial(r_limit):
        def fn(cent):
            keep = np.linalg.norm(cent, axis=1) < r_limit
            for poly in core_polys:
                keep &= ~_convex_contains(poly, cent)
            return keep

        return fn

    frames_meta: list[tuple[int, int]] = []  # (frame id, layer index)

    if design.armor_layers:
        # bedding circle between the core bundle and the innermost armor
        inner_margins = []
        outer_margins = []
        margin_radii = []
        for li, layer in enumerate(design.armor_layers):
            frame = li + 1
            m_in, m_out, r_in, r_out = _armor_layer(b, design, li, res, frame)
            inner_margins.append(m_in)
            outer_margins.append(m_out)
            margin_radii.append((r_in, r_out))
            frames_meta.append((frame, li))

        # NOTE: shift images are patched later by the extruder via
        # planar.node_shift once the periodic cell fixes the shifts.
        r_bed = margin_radii[0][0]
        avail = r_bed - design.core_bundle_radius
        if avail <= 0.2e-3:
            raise MeshFailure("no room for the bedding between cores and armor")
        r_seam_in = r_bed - min(0.45 * avail, 1.2e-3)
        n_bed = 2 * design.armor_layers[0].wire_count
        bed_ring = b.add_nodes(
            _ring_coords(r_seam_in, n_bed, phase=TWO_PI / (4 * n_bed)), CORE_FRAME
        )
        _zip_rings(b, bed_ring, inner_margins[0], TAG_FILLER)  # seam band

        # interstitial filler: cores -> bedding circle
        boundary = np.concatenate(core_outer_rings + [bed_ring])
        _delaunay_fill(
            b,
            boundary,
            interstitial_scatter(r_seam_in - 0.7 * h_fill),
            keep_interstitial(r_seam_in),
            lambda cent: [TAG_FILLER] * cent.shape[0],
            CORE_FRAME,
        )

        # seams between consecutive armor layers
        for li in range(1, len(design.armor_layers)):
            _zip_rings(b, outer_margins[li - 1], inner_margins[li], TAG_FILLER)

        # outer seam: armor -> jacket circle (core frame)
        r_last = margin_radii[-1][1]
        r_jack_in = r_last + min(1.2e-3, 0.3 * design.armor_layers[-1].wire_diameter)
        n_jack = 2 * design.armor_layers[-1].wire_count
        jack_ring = b.add_nodes(
            _ring_coords(r_jack_in, n_jack, phase=TWO_PI / (4 * n_jack)), CORE_FRAME
        )
        _zip_rings(b, outer_margins[-1], jack_ring, TAG_FILLER)
        r_region_start = r_jack_in
        start_ring = jack_ring
        jacket_outer = r_jack_in + jacket_thickness
    else:
        r_fill = design.core_bundle_radius + 2e-3
        n_fill = max(64, int(TWO_PI * r_fill / h_fill))
        fill_ring = b.add_nodes(_ring_coords(r_fill, n_fill, phase=0.001), CORE_FRAME)
        boundary = np.concatenate(core_outer_rings + [fill_ring])
        _delaunay_fill(
            b,
            boundary,
            interstitial_scatter(r_fill - 0.7 * h_fill),
            keep_interstitial(r_fill),
            lambda cent: [TAG_FILLER] * cent.shape[0],
            CORE_FRAME,
        )
        r_region_start = r_fill
        start_ring = fill_ring
        jacket_outer = r_fill + jacket_thickness

    # ---- jacket + medium + stretch: one graded Delaunay region ----
    ring_pts = []
    h0 = TWO_PI * r_region_start / len(start_ring)
    ring_pts.append((jacket_outer, max(16, int(TWO_PI * jacket_outer / h0))))
    r = jacket_outer
    while r < medium_radius:
        dr = max(h0, (res.medium_growth - 1.0) * r)
        r = min(r + dr, medium_radius)
        cnt = max(16, int(TWO_PI * r / max(dr / res.medium_az_factor * 0.7, h0)))
        ring_pts.append((r, cnt))
        if abs(r - medium_radius) < 1e-12:
            break
    n_med_outer = ring_pts[-1][1]
    for rs in np.linspace(medium_radius, stretch_radius, res.stretch_layers + 1)[1:]:
        ring_pts.append((rs, n_med_outer))

    outer_pts = []
    outer_ring_ids = None
    for rr, cnt in ring_pts:
        # inflate so the polygonal rings carry their circles' area
        ids = b.add_nodes(
            _ring_coords(
                rr * polygon_inflation(cnt), cnt, phase=0.5 * TWO_PI / cnt
            ),
            CORE_FRAME,
        )
        outer_pts.append(ids)
        outer_ring_ids = ids
    region_ids = np.concatenate([start_ring] + outer_pts)

    nodes_now = b.node_array()

    def tag_outer(cent):
        rad = np.linalg.norm(cent, axis=1)
        names = np.where(
            rad < jacket_outer,
            TAG_JACKET,
            np.where(rad < medium_radius, TAG_MEDIUM, TAG_STRETCH),
        )
        return list(names)

    pts = nodes_now[region_ids]
    tri = Delaunay(pts)
    cent = pts[tri.simplices].mean(axis=1)
    rad = np.linalg.norm(cent, axis=1)
    keep = (rad > r_region_start) & (rad < 1.1 * stretch_radius)
    simpl = tri.simplices[keep]
    names = tag_outer(cent[keep])
    for t, name in zip(region_ids[simpl], names):
        b.add_tris([t], name)

    mesh = b.finish(medium_radius, stretch_radius, outer_ring_ids)
    _verify_conformity(mesh)
    return mesh


def _verify_conformity(mesh: PlanarMesh) -> None:
    """Every interior edge must be shared by exactly two triangles."""
    e = np.vstack(
        [
            mesh.triangles[:, [0, 1]],
            mesh.triangles[:, [1, 2]],
            mesh.triangles[:, [2, 0]],
        ]
    )
    e.sort(axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise MeshFailure("non-conforming cross-section: an edge borders >2 triangles")
    # total area must match the outer disk
    areas = mesh.region_areas()
    total = sum(areas.values())
    disk = math.pi * mesh.stretch_radius**2
    if abs(total - disk) / disk > 0.02:
        raise MeshFailure(
            f"cross-section area {total:.6g} deviates from the domain disk {disk:.6g}"
        )


def apply_wire_shifts(mesh: PlanarMesh, shifts: tuple[int, ...]) -> None:
    """Set the screw-map node images for the armor frames of ``mesh``.

    ``shifts[k]`` is the signed wire shift of armor layer k (frame k+1),
    from the periodic cell. Core-frame nodes map to themselves.
    """
    # the builder filled node_shift with shift=0 (identity inside each
    # layer); rebuild images from the per-frame sector structure
    for frame, shift in enumerate(shifts, start=1):
        ids = np.nonzero(mesh.node_frame == frame)[0]
        if ids.size == 0:
            continue
        if shift == 0:
            mesh.node_shift[ids] = ids
            continue
        count = _frame_wire_count(mesh, frame)
        per = ids.size // count
        grid = ids.reshape(count, per)  # sector-major by construction
        mesh.node_shift[grid] = grid[(np.arange(count) + shift) % count]


def _frame_wire_count(mesh: PlanarMesh, frame: int) -> int:
    prefix = f"armor:{frame - 1}:"
    count = 0
    for name in mesh.tag_names:
        if name.startswith(prefix) or name.startswith(f"pe:{frame - 1}:"):
            count += 1
    return count
