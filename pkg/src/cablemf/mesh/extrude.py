"""Twisted extrusion of a cross-section into one periodic cell.

Nodes of twist frame f at height z are the planar nodes rotated by
rate_f * z (core frame: 2*pi/L_c; armor layer frames: 2*pi/L_a with the
layer's possibly snapped lay length). Prisms split into three tetrahedra
with an index-ordered diagonal rule so every slice splits identically.

The end faces are congruent under the screw map: rotating the z=L face by
-theta lands every node on a z=0 node (armor nodes land on the
wire-shifted image recorded in the planar mesh). Face edges inherit a
bijective correspondence wherever the shifted planar edge exists; the
mixed edges of the one-element seam bands between twist frames have no
such partner (no conforming triangulation of a differentially rotating
band can map onto itself), and are instead constrained through exact
line integrals of the source face's Whitney trace along their rotated
image segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..design import CableDesign, PeriodicCell
from ..errors import InvertedElement, MeshFailure, NonCongruentFaces
from .planar import CORE_FRAME, PlanarMesh, apply_wire_shifts

TWO_PI = 2.0 * math.pi


@dataclass
class PeriodicMap:
    """Correspondence of z=L face edges to z=0 face edges."""

    theta: float
    pairs: dict[int, tuple[int, int]]  # dest edge -> (src edge, sign)
    interp: dict[int, list[tuple[int, float]]]  # dest edge -> [(src, weight)]

    @property
    def n_dest(self) -> int:
        return len(self.pairs) + len(self.interp)

    @property
    def bijective_fraction(self) -> float:
        total = self.n_dest
        return len(self.pairs) / total if total else 1.0


@dataclass
class VolumeMesh:
    """Tetrahedral mesh of one periodic cell with edge bookkeeping."""

    nodes: np.ndarray  # (n, 3)
    tets: np.ndarray  # (m, 4)
    tet_tags: np.ndarray  # (m,)
    tag_names: list[str]
    edges: np.ndarray  # (E, 2) node pairs, min < max
    tet_edges: np.ndarray  # (m, 6) edge ids, local order (01,02,03,12,13,23)
    tet_edge_signs: np.ndarray  # (m, 6) +-1
    bottom_face_tris: np.ndarray  # (t, 3) global node ids at z=0
    top_face_tris: np.ndarray  # (t, 3) global node ids at z=L
    outer_edge_ids: np.ndarray  # edges on the lateral boundary
    periodic: PeriodicMap
    cell_length: float
    n_slices: int
    planar: PlanarMesh | None = None
    frame_rates: tuple[float, ...] = ()
    extras: dict = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_tets(self) -> int:
        return self.tets.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def tet_volumes(self) -> np.ndarray:
        p = self.nodes[self.tets]
        return (
            np.einsum(
                "ij,ij->i",
                p[:, 1] - p[:, 0],
                np.cross(p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]),
            )
            / 6.0
        )

    def tris_with_tag_prefix(self, prefix: str) -> np.ndarray:
        ids = [i for i, n in enumerate(self.tag_names) if n.startswith(prefix)]
        return np.nonzero(np.isin(self.tet_tags, ids))[0]


_LOCAL_EDGES = np.array([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


def default_frame_rates(
    design: CableDesign, cell: PeriodicCell | None
) -> tuple[float, ...]:
    """Twist rate (rad/m) for the core frame and each armor layer frame."""
    rates = [TWO_PI / design.core_lay_length]
    if cell is not None:
        for lay in cell.lay_lengths:
            rates.append(TWO_PI / lay)
    else:
        for layer in design.armor_layers:
            rates.append(TWO_PI / layer.lay_length)
    return tuple(rates)


def twisted_extrude(
    planar: PlanarMesh,
    design: CableDesign,
    length: float,
    n_slices: int,
    cell: PeriodicCell | None = None,
    frame_rates: tuple[float, ...] | None = None,
) -> VolumeMesh:
    """Extrude the cross-section into an n_slices-layer periodic cell.

    ``cell`` supplies the per-layer wire shifts and snapped lay lengths for
    armored designs; ``frame_rates`` overrides the twist rates entirely
    (e.g. all zeros for a straight extrusion test).
    """
    if n_slices < 2:
        raise ValueError("need at least 2 slices")
    if frame_rates is None:
        frame_rates = default_frame_rates(design, cell)
    n_frames = int(planar.node_frame.max()) + 1
    if len(frame_rates) < n_frames:
        raise ValueError(
            f"{n_frames} twist frames in the cross-section but only "
            f"{len(frame_rates)} rates"
        )
    if cell is not None:
        apply_wire_shifts(planar, cell.wire_shifts)
    theta = frame_rates[CORE_FRAME] * length

    np_nodes = planar.n_nodes
    rates = np.asarray(frame_rates, dtype=float)[planar.node_frame]
    xy = planar.nodes
    nodes = np.empty(((n_slices + 1) * np_nodes, 3))
    for s in range(n_slices + 1):
        z = length * s / n_slices
        ang = rates * z
        ca, sa = np.cos(ang), np.sin(ang)
        sl = slice(s * np_nodes, (s + 1) * np_nodes)
        nodes[sl, 0] = ca * xy[:, 0] - sa * xy[:, 1]
        nodes[sl, 1] = sa * xy[:, 0] + ca * xy[:, 1]
        nodes[sl, 2] = z

    # index-ordered prism split: rotate each planar triangle so its lowest
    # planar id leads, then choose the quad diagonal by id comparison
    tri = planar.triangles
    lead = np.argmin(tri, axis=1)
    order = (lead[:, None] + np.arange(3)[None, :]) % 3
    abc = np.take_along_axis(tri, order, axis=1)
    a, bcol, ccol = abc[:, 0], abc[:, 1], abc[:, 2]
    up = bcol < ccol

    t_per_layer = tri.shape[0]
    tets = np.empty((n_slices * t_per_layer * 3, 4), dtype=np.int64)
    tet_tags = np.empty(n_slices * t_per_layer * 3, dtype=np.int32)
    for s in range(n_slices):
        o0 = s * np_nodes
        o1 = (s + 1) * np_nodes
        a0, b0, c0 = a + o0, bcol + o0, ccol + o0
        a1, b1, c1 = a + o1, bcol + o1, ccol + o1
        t1 = np.where(up[:, None], np.stack([a0, b0, c0, c1], 1), np.stack([a0, b0, c0, b1], 1))
        t2 = np.where(up[:, None], np.stack([a0, b0, c1, b1], 1), np.stack([a0, c0, b1, c1], 1))
        t3 = np.stack([a0, b1, c1, a1], 1)
        base = s * t_per_layer * 3
        tets[base : base + t_per_layer] = t1
        tets[base + t_per_layer : base + 2 * t_per_layer] = t2
        tets[base + 2 * t_per_layer : base + 3 * t_per_layer] = t3
        tet_tags[base : base + 3 * t_per_layer] = np.tile(planar.tri_tags, 3)

    # enforce positive orientation
    p = nodes[tets]
    vol6 = np.einsum(
        "ij,ij->i", p[:, 1] - p[:, 0], np.cross(p[:, 2] - p[:, 0], p[:, 3] - p[:, 0])
    )
    neg = vol6 < 0
    tets[neg] = tets[neg][:, [0, 1, 3, 2]]
    vol6 = np.abs(vol6)
    if np.any(vol6 < 1e-18):
        raise InvertedElement(
            f"{int((vol6 < 1e-18).sum())} degenerate tetrahedra after extrusion "
            "(resolution too coarse for the twist)"
        )

    # global edge enumeration (sorted pairs, lexicographic)
    pairs = tets[:, _LOCAL_EDGES.reshape(-1)].reshape(-1, 6, 2)
    lo = pairs.min(axis=2)
    hi = pairs.max(axis=2)
    enc = lo.astype(np.int64) * nodes.shape[0] + hi
    uniq, inv = np.unique(enc, return_inverse=True)
    tet_edges = inv.reshape(-1, 6).astype(np.int64)
    edges = np.column_stack([uniq // nodes.shape[0], uniq % nodes.shape[0]])
    # sign: local edge runs i -> j; global runs min -> max
    tet_edge_signs = np.where(
        pairs[:, :, 0] < pairs[:, :, 1], 1, -1
    ).astype(np.int8)

    bottom = tri.copy()
    top = tri + n_slices * np_nodes

    # lateral boundary: every edge whose endpoints are both outer-ring nodes
    outer_planar = set(int(i) for i in planar.outer_ring)
    outer_nodes = np.array(
        [pid + s * np_nodes for s in range(n_slices + 1) for pid in outer_planar],
        dtype=np.int64,
    )
    mask = np.zeros(nodes.shape[0], dtype=bool)
    mask[outer_nodes] = True
    outer_edge_ids = np.nonzero(mask[edges[:, 0]] & mask[edges[:, 1]])[0]

    mesh = VolumeMesh(
        nodes=nodes,
        tets=tets,
        tet_tags=tet_tags,
        tag_names=list(planar.tag_names),
        edges=edges,
        tet_edges=tet_edges,
        tet_edge_signs=tet_edge_signs,
        bottom_face_tris=bottom,
        top_face_tris=top,
        outer_edge_ids=outer_edge_ids,
        periodic=PeriodicMap(theta=theta, pairs={}, interp={}),
        cell_length=length,
        n_slices=n_slices,
        planar=planar,
        frame_rates=tuple(frame_rates),
    )
    mesh.periodic = periodic_face_map(mesh, theta)
    return mesh


def _edge_lookup(edges: np.ndarray, n_nodes: int):
    enc = edges[:, 0].astype(np.int64) * n_nodes + edges[:, 1]
    order = np.argsort(enc)
    enc_sorted = enc[order]

    def find(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Edge ids for node pairs (lo < hi); -1 where absent."""
        key = lo.astype(np.int64) * n_nodes + hi
        pos = np.searchsorted(enc_sorted, key)
        pos = np.clip(pos, 0, enc_sorted.size - 1)
        hit = enc_sorted[pos] == key
        out = np.where(hit, order[pos], -1)
        return out

    return find


def periodic_face_map(mesh: VolumeMesh, theta: float) -> PeriodicMap:
    """Match z=L face edges to z=0 face edges under rotation by -theta.

    Geometric construction: rotate every top node by -theta and find the
    coincident bottom node (must exist within 1e-9 m, else
    NonCongruentFaces). Edges whose mapped node pair exists as a bottom
    edge pair bijectively; the rest receive Whitney-trace interpolation
    rows over the bottom face triangles their image segment crosses.
    """
    nodes = mesh.nodes
    top_nodes = np.unique(mesh.top_face_tris)
    bot_nodes = np.unique(mesh.bottom_face_tris)
    ca, sa = math.cos(-theta), math.sin(-theta)
    rot = nodes[top_nodes][:, :2] @ np.array([[ca, sa], [-sa, ca]])
    tree = cKDTree(nodes[bot_nodes][:, :2])
    dist, idx = tree.query(rot)
    worst = float(dist.max()) if dist.size else 0.0
    if worst > 1e-9:
        raise NonCongruentFaces(
            f"z=L face does not match z=0 under rotation by {theta:.6g} rad "
            f"(worst node residual {worst:.3g} m)",
            worst_residual=worst,
        )
    node_map = np.full(nodes.shape[0], -1, dtype=np.int64)
    node_map[top_nodes] = bot_nodes[idx]

    find = _edge_lookup(mesh.edges, mesh.n_nodes)

    # face edge sets
    def face_edges(tris):
        e = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        e = np.unique(np.sort(e, axis=1), axis=0)
        ids = find(e[:, 0], e[:, 1])
        if np.any(ids < 0):
            raise MeshFailure("face edge missing from the global edge set")
        return e, ids

    top_e, top_ids = face_edges(mesh.top_face_tris)
    mapped = node_map[top_e]
    lo = mapped.min(axis=1)
    hi = mapped.max(axis=1)
    src_ids = find(lo, hi)
    sign = np.where(mapped[:, 0] < mapped[:, 1], 1, -1)

    pairs: dict[int, tuple[int, int]] = {}
    missing: list[int] = []
    for k in range(top_e.shape[0]):
        if src_ids[k] >= 0:
            pairs[int(top_ids[k])] = (int(src_ids[k]), int(sign[k]))
        else:
            missing.append(k)

    interp: dict[int, list[tuple[int, float]]] = {}
    if missing:
        interp = _whitney_trace_rows(
            mesh, np.asarray(missing), top_e, top_ids, node_map, find
        )
    return PeriodicMap(theta=theta, pairs=pairs, interp=interp)


def _whitney_trace_rows(mesh, missing, top_e, top_ids, node_map, find):
    """Line-integral interpolation of unmatched face edges.

    The rotated image of a mixed seam edge is a straight segment between
    two bottom nodes; its circulation equals the integral of the bottom
    face's tangential Whitney trace, which is exact per crossed triangle
    (the integrand is linear there).
    """
    nodes2d = mesh.nodes[:, :2]
    tris = mesh.bottom_face_tris
    tri_pts = nodes2d[tris]
    tri_min = tri_pts.min(axis=1)
    tri_max = tri_pts.max(axis=1)

    rows: dict[int, list[tuple[int, float]]] = {}
    for k in missing:
        u, v = top_e[k]
        p0 = nodes2d[node_map[u if u < v else v]]
        p1 = nodes2d[node_map[v if u < v else u]]
        seg_lo = np.minimum(p0, p1) - 1e-12
        seg_hi = np.maximum(p0, p1) + 1e-12
        cand = np.nonzero(
            np.all(tri_min <= seg_hi, axis=1) & np.all(tri_max >= seg_lo, axis=1)
        )[0]
        weights: dict[int, float] = {}
        covered = 0.0
        d = p1 - p0
        for ti in cand:
            tp = tri_pts[ti]
            # barycentric coordinates as affine functions of t along the segment
            mat = np.column_stack([tp[1] - tp[0], tp[2] - tp[0]])
            try:
                inv = np.linalg.inv(mat)
            except np.linalg.LinAlgError:
                continue
            l12_0 = inv @ (p0 - tp[0])
            l12_1 = inv @ (p1 - tp[0])
            lam0 = np.array([1 - l12_0.sum(), l12_0[0], l12_0[1]])
            lam1 = np.array([1 - l12_1.sum(), l12_1[0], l12_1[1]])
            dlam = lam1 - lam0
            t0, t1 = 0.0, 1.0
            ok = True
            for i in range(3):
                if abs(dlam[i]) < 1e-14:
                    if lam0[i] < -1e-10:
                        ok = False
                        break
                    continue
                tcross = -lam0[i] / dlam[i]
                if dlam[i] > 0:
                    t0 = max(t0, tcross)
                else:
                    t1 = min(t1, tcross)
            if not ok or t1 <= t0 + 1e-14:
                continue
            covered += t1 - t0
            # 2-D gradients of barycentric coordinates
            area2 = np.cross(tp[1] - tp[0], tp[2] - tp[0])
            g = (
                np.array(
                    [
                        [tp[1, 1] - tp[2, 1], tp[2, 0] - tp[1, 0]],
                        [tp[2, 1] - tp[0, 1], tp[0, 0] - tp[2, 0]],
                        [tp[0, 1] - tp[1, 1], tp[1, 0] - tp[0, 0]],
                    ]
                )
                / area2
            )
            for (li, lj) in ((0, 1), (0, 2), (1, 2)):
                na, nb = int(tris[ti][li]), int(tris[ti][lj])
                eid = int(find(np.array([min(na, nb)]), np.array([max(na, nb)]))[0])
                esign = 1.0 if na < nb else -1.0
                # W = lam_i grad lam_j - lam_j grad lam_i, linear along the
                # segment: exact trapezoid on [t0, t1]
                def wdot(t):
                    lam = lam0 + t * dlam
                    w = lam[li] * g[lj] - lam[lj] * g[li]
                    return float(w @ d)

                contrib = esign * 0.5 * (wdot(t0) + wdot(t1)) * (t1 - t0)
                if abs(contrib) > 1e-16:
                    weights[eid] = weights.get(eid, 0.0) + contrib
        if covered < 1.0 - 1e-6:
            raise NonCongruentFaces(
                f"seam edge image only {covered:.6f} covered by source face",
                worst_residual=1.0 - covered,
            )
        rows[int(top_ids[k])] = sorted(weights.items())
    return rows
