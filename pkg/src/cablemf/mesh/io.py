"""ASCII mesh serialization.

Format (whitespace-delimited, LF line endings):

    TCACMESH 1
    CELL <length> <n_slices> <medium_radius> <stretch_radius>
    NODES <n>
    <index> <x> <y> <z>
    TETS <m>
    <index> <n0> <n1> <n2> <n3> <tag>
    PERIODIC <theta> <p>
    <dest_edge> <src_edge> <sign>
    PERIODIC_INTERP <q>
    <dest_edge> <k> <src_edge_1> <w_1> ... <src_edge_k> <w_k>
    OUTEREDGES <r>
    <edge_id> ...

Edge ids refer to the canonical enumeration (sorted unique (min, max)
node pairs in lexicographic order), which the importer rebuilds from the
tetrahedra, so only constraint data needs explicit storage. Floats are
written with 17 significant digits and round-trip bit-exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ParseError
from .extrude import PeriodicMap, VolumeMesh, _LOCAL_EDGES

_VERSION_LINE = "TCACMESH 1"


def export_mesh(mesh: VolumeMesh, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(_VERSION_LINE + "\n")
        fh.write(
            f"CELL {mesh.cell_length:.17g} {mesh.n_slices} "
            f"{_planar_attr(mesh, 'medium_radius'):.17g} "
            f"{_planar_attr(mesh, 'stretch_radius'):.17g}\n"
        )
        fh.write(f"NODES {mesh.n_nodes}\n")
        for i, (x, y, z) in enumerate(mesh.nodes):
            fh.write(f"{i} {x:.17g} {y:.17g} {z:.17g}\n")
        fh.write(f"TETS {mesh.n_tets}\n")
        for i, (t, tag) in enumerate(zip(mesh.tets, mesh.tet_tags)):
            fh.write(
                f"{i} {t[0]} {t[1]} {t[2]} {t[3]} {mesh.tag_names[tag]}\n"
            )
        pm = mesh.periodic
        fh.write(f"PERIODIC {pm.theta:.17g} {len(pm.pairs)}\n")
        for dest in sorted(pm.pairs):
            src, sign = pm.pairs[dest]
            fh.write(f"{dest} {src} {sign}\n")
        fh.write(f"PERIODIC_INTERP {len(pm.interp)}\n")
        for dest in sorted(pm.interp):
            row = pm.interp[dest]
            parts = [str(dest), str(len(row))]
            for src, w in row:
                parts.append(str(src))
                parts.append(f"{w:.17g}")
            fh.write(" ".join(parts) + "\n")
        fh.write(f"OUTEREDGES {mesh.outer_edge_ids.size}\n")
        for eid in mesh.outer_edge_ids:
            fh.write(f"{eid}\n")


def _planar_attr(mesh: VolumeMesh, name: str) -> float:
    if mesh.planar is not None:
        return getattr(mesh.planar, name)
    return mesh.extras.get(name, 0.0)


class _Reader:
    def __init__(self, path: Path):
        self.lines = path.read_text(encoding="utf-8").splitlines()
        self.pos = 0
        self.path = path

    def next(self) -> tuple[int, list[str]]:
        while self.pos < len(self.lines):
            ln = self.pos + 1
            parts = self.lines[self.pos].split()
            self.pos += 1
            if parts:
                return ln, parts
        raise ParseError(f"{self.path.name}: unexpected end of file", line=len(self.lines))


def import_mesh(path: str | Path) -> VolumeMesh:
    path = Path(path)
    rd = _Reader(path)

    ln, parts = rd.next()
    if " ".join(parts) != _VERSION_LINE:
        raise ParseError(
            f"{path.name}: expected header {_VERSION_LINE!r}, got {' '.join(parts)!r}",
            line=ln,
        )
    try:
        ln, parts = rd.next()
        if parts[0] != "CELL":
            raise ParseError(f"{path.name}: expected CELL section", line=ln)
        cell_length = float(parts[1])
        n_slices = int(parts[2])
        medium_radius = float(parts[3])
        stretch_radius = float(parts[4])

        ln, parts = rd.next()
        if parts[0] != "NODES":
            raise ParseError(f"{path.name}: expected NODES section", line=ln)
        n_nodes = int(parts[1])
        nodes = np.empty((n_nodes, 3))
        for _ in range(n_nodes):
            ln, parts = rd.next()
            nodes[int(parts[0])] = [float(parts[1]), float(parts[2]), float(parts[3])]

        ln, parts = rd.next()
        if parts[0] != "TETS":
            raise ParseError(f"{path.name}: expected TETS section", line=ln)
        n_tets = int(parts[1])
        tets = np.empty((n_tets, 4), dtype=np.int64)
        tag_names: list[str] = []
        tag_ids: dict[str, int] = {}
        tet_tags = np.empty(n_tets, dtype=np.int32)
        for _ in range(n_tets):
            ln, parts = rd.next()
            i = int(parts[0])
            tets[i] = [int(parts[1]), int(parts[2]), int(parts[3]), int(parts[4])]
            name = parts[5]
            if name not in tag_ids:
                tag_ids[name] = len(tag_names)
                tag_names.append(name)
            tet_tags[i] = tag_ids[name]

        ln, parts = rd.next()
        if parts[0] != "PERIODIC":
            raise ParseError(f"{path.name}: expected PERIODIC section", line=ln)
        theta = float(parts[1])
        n_pairs = int(parts[2])
        pairs: dict[int, tuple[int, int]] = {}
        for _ in range(n_pairs):
            ln, parts = rd.next()
            pairs[int(parts[0])] = (int(parts[1]), int(parts[2]))

        ln, parts = rd.next()
        if parts[0] != "PERIODIC_INTERP":
            raise ParseError(f"{path.name}: expected PERIODIC_INTERP section", line=ln)
        interp: dict[int, list[tuple[int, float]]] = {}
        for _ in range(int(parts[1])):
            ln, parts = rd.next()
            dest = int(parts[0])
            k = int(parts[1])
            row = []
            for j in range(k):
                row.append((int(parts[2 + 2 * j]), float(parts[3 + 2 * j])))
            interp[dest] = row

        ln, parts = rd.next()
        if parts[0] != "OUTEREDGES":
            raise ParseError(f"{path.name}: expected OUTEREDGES section", line=ln)
        n_outer = int(parts[1])
        outer = np.empty(n_outer, dtype=np.int64)
        for k in range(n_outer):
            ln, parts = rd.next()
            outer[k] = int(parts[0])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{path.name}: {exc}", line=ln) from exc

    # canonical edge enumeration (same construction as the extruder)
    pairs_arr = tets[:, _LOCAL_EDGES.reshape(-1)].reshape(-1, 6, 2)
    lo = pairs_arr.min(axis=2)
    hi = pairs_arr.max(axis=2)
    enc = lo.astype(np.int64) * n_nodes + hi
    uniq, inv = np.unique(enc, return_inverse=True)
    tet_edges = inv.reshape(-1, 6).astype(np.int64)
    edges = np.column_stack([uniq // n_nodes, uniq % n_nodes])
    tet_edge_signs = np.where(pairs_arr[:, :, 0] < pairs_arr[:, :, 1], 1, -1).astype(
        np.int8
    )

    # end-face triangles from geometry
    zmax = nodes[:, 2].max()
    bottom_mask = np.abs(nodes[:, 2]) < 1e-12
    top_mask = np.abs(nodes[:, 2] - zmax) < 1e-12
    bottom = _face_tris(tets, bottom_mask)
    top = _face_tris(tets, top_mask)

    mesh = VolumeMesh(
        nodes=nodes,
        tets=tets,
        tet_tags=tet_tags,
        tag_names=tag_names,
        edges=edges,
        tet_edges=tet_edges,
        tet_edge_signs=tet_edge_signs,
        bottom_face_tris=bottom,
        top_face_tris=top,
        outer_edge_ids=outer,
        periodic=PeriodicMap(theta=theta, pairs=pairs, interp=interp),
        cell_length=cell_length,
        n_slices=n_slices,
        planar=None,
        extras={"medium_radius": medium_radius, "stretch_radius": stretch_radius},
    )
    return mesh


_FACES = np.array([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


def _face_tris(tets: np.ndarray, node_mask: np.ndarray) -> np.ndarray:
    faces = tets[:, _FACES.reshape(-1)].reshape(-1, 3)
    keep = node_mask[faces].all(axis=1)
    return np.unique(np.sort(faces[keep], axis=1), axis=0)
