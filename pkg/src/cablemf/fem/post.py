"""Field probing, circuit currents, losses, energy, and series impedance.

Flux density is the elementwise curl of the edge solution (constant per
tetrahedron at lowest order). Probe points outside the physical medium
(in or beyond the stretch layer) are rejected; z is wrapped through the
screw periodicity so any axial station can be probed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..errors import PointOutsideDomain
from .assembly import _LOCAL_EDGES, _geometry, _stretch_tensors, _extra
from .solve import FieldSolution


def tet_b_field(solution: FieldSolution) -> np.ndarray:
    """Complex B per tetrahedron, shape (m, 3), tesla (RMS phasor)."""
    cached = solution.info.get("_tet_b")
    if cached is not None:
        return cached
    mesh = solution.mesh
    grads, _ = _geometry(mesh)
    li = _LOCAL_EDGES[:, 0]
    lj = _LOCAL_EDGES[:, 1]
    curl = 2.0 * np.cross(grads[:, li], grads[:, lj])  # (m, 6, 3)
    coef = (
        solution.edge_dofs[mesh.tet_edges] * mesh.tet_edge_signs
    )  # (m, 6) complex
    b = np.einsum("te,tec->tc", coef, curl)
    solution.info["_tet_b"] = b
    return b


def _wrap_points(mesh, pts: np.ndarray) -> np.ndarray:
    """Map arbitrary axial stations into the cell via the screw motion."""
    out = np.array(pts, dtype=float)
    length = mesh.cell_length
    theta = mesh.periodic.theta
    n = np.floor(out[:, 2] / length)
    shift = n * length
    ang = -n * theta
    ca, sa = np.cos(ang), np.sin(ang)
    x = ca * out[:, 0] - sa * out[:, 1]
    y = sa * out[:, 0] + ca * out[:, 1]
    out[:, 0] = x
    out[:, 1] = y
    out[:, 2] -= shift
    return out


def locate_points(mesh, points: np.ndarray) -> np.ndarray:
    """Containing tetrahedron per point (wrapped into the cell)."""
    pts = _wrap_points(mesh, np.atleast_2d(np.asarray(points, dtype=float)))
    r_med = _extra(mesh, "medium_radius")
    rad = np.linalg.norm(pts[:, :2], axis=1)
    if np.any(rad > r_med * (1 + 1e-9)):
        raise PointOutsideDomain(
            f"probe radius {rad.max():.4g} m exceeds the physical medium "
            f"({r_med:.4g} m); enlarge medium_radius to probe farther out"
        )
    tree = solution_tree(mesh)
    p = mesh.nodes[mesh.tets]
    found = np.full(pts.shape[0], -1, dtype=np.int64)
    for i, pt in enumerate(pts):
        for k in (32, 256, 2048):
            _, cand = tree.query(pt, k=min(k, mesh.n_tets))
            cand = np.atleast_1d(cand)
            tid = _bary_test(p, cand, pt)
            if tid >= 0:
                found[i] = tid
                break
        if found[i] < 0:
            raise PointOutsideDomain(f"no tetrahedron contains point {pt}")
    return found


def _bary_test(p, cand, pt) -> int:
    a = p[cand, 0]
    d1 = p[cand, 1] - a
    d2 = p[cand, 2] - a
    d3 = p[cand, 3] - a
    rhs = pt[None, :] - a
    vol = np.einsum("ij,ij->i", d1, np.cross(d2, d3))
    l1 = np.einsum("ij,ij->i", rhs, np.cross(d2, d3)) / vol
    l2 = np.einsum("ij,ij->i", d1, np.cross(rhs, d3)) / vol
    l3 = np.einsum("ij,ij->i", d1, np.cross(d2, rhs)) / vol
    l0 = 1.0 - l1 - l2 - l3
    ok = (l0 > -1e-9) & (l1 > -1e-9) & (l2 > -1e-9) & (l3 > -1e-9)
    hits = np.nonzero(ok)[0]
    return int(cand[hits[0]]) if hits.size else -1


_TREES: dict[int, cKDTree] = {}


def solution_tree(mesh) -> cKDTree:
    key = id(mesh)
    if key not in _TREES:
        _TREES[key] = cKDTree(mesh.nodes[mesh.tets].mean(axis=1))
        if len(_TREES) > 8:
            _TREES.pop(next(iter(_TREES)))
    return _TREES[key]


def probe_b_field(
    solution: FieldSolution, points, method: str = "patch"
) -> tuple[np.ndarray, np.ndarray]:
    """Complex B vectors (T) and meter-equivalent magnitudes (microtesla).

    ``method="patch"`` (default) recovers a locally linear field from the
    surrounding elements by weighted least squares, removing the O(h) bias
    of the piecewise-constant curl; ``"element"`` returns the raw value of
    the containing tetrahedron.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    tids = locate_points(solution.mesh, pts)
    b_all = tet_b_field(solution)
    if method == "element":
        b = b_all[tids]
    elif method == "patch":
        mesh = solution.mesh
        wrapped = _wrap_points(mesh, pts)
        tree = solution_tree(mesh)
        cent = mesh.nodes[mesh.tets].mean(axis=1)
        b = np.empty((pts.shape[0], 3), dtype=complex)
        k = min(26, mesh.n_tets)
        for i, pt in enumerate(wrapped):
            _, cand = tree.query(pt, k=k)
            cand = np.atleast_1d(cand)
            dx = cent[cand] - pt[None, :]
            scale = np.median(np.linalg.norm(dx, axis=1)) or 1.0
            w = 1.0 / (np.sum((dx / scale) ** 2, axis=1) + 0.5)
            basis = np.column_stack([np.ones(cand.size), dx / scale])
            a_mat = basis * w[:, None]
            rhs = b_all[cand] * w[:, None]
            sol_fit, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
            b[i] = sol_fit[0]
    else:
        raise ValueError(f"unknown probe method {method!r}")
    mag = 1e6 * np.sqrt(np.sum(np.abs(b) ** 2, axis=1))
    return b, mag


def conductor_currents(solution: FieldSolution) -> dict[str, complex]:
    """Net complex current per circuit from J = sigma(-j w A + g z)."""
    mesh = solution.mesh
    sys = solution.system
    length = mesh.cell_length
    omega = solution.omega
    out: dict[str, complex] = {}
    bta = sys.coupling.T @ solution.edge_dofs  # (C,)
    for ci, circ in enumerate(sys.circuits):
        g = solution.gradients[ci]
        out[circ.name] = (
            -1j * omega * bta[ci] + g * sys.circuit_area_sigma[ci]
        ) / length
    return out


def sheath_current_magnitude(solution: FieldSolution) -> float:
    """Mean |I| over the three sheath circuits (amperes)."""
    cur = conductor_currents(solution)
    vals = [abs(v) for k, v in cur.items() if k.startswith("sheath")]
    return float(np.mean(vals))


def _per_tet_loss(solution: FieldSolution) -> np.ndarray:
    """Ohmic dissipation per tet, watts (RMS convention)."""
    mesh = solution.mesh
    sys = solution.system
    omega = solution.omega
    grads, vol = _geometry(mesh)
    li = _LOCAL_EDGES[:, 0]
    lj = _LOCAL_EDGES[:, 1]
    delta = np.eye(4)
    gg = np.einsum("tac,tbc->tab", grads, grads)
    mloc = (
        (1 + delta[np.ix_(li, li)]) * gg[:, lj][:, :, lj]
        - (1 + delta[np.ix_(li, lj)]) * gg[:, lj][:, :, li]
        - (1 + delta[np.ix_(lj, li)]) * gg[:, li][:, :, lj]
        + (1 + delta[np.ix_(lj, lj)]) * gg[:, li][:, :, li]
    ) * (vol / 20.0)[:, None, None]
    coef = solution.edge_dofs[mesh.tet_edges] * mesh.tet_edge_signs
    a2 = np.real(np.einsum("te,tef,tf->t", np.conj(coef), mloc, coef))
    loss = sys.sigma * omega**2 * a2

    # driven regions add |g|^2 V and the cross term
    g_by_tet = np.zeros(mesh.n_tets, dtype=complex)
    for ci, circ in enumerate(sys.circuits):
        g_by_tet[circ.tet_ids] = solution.gradients[ci]
    driven = np.abs(g_by_tet) > 0
    if np.any(driven):
        wz = (vol[driven] / 4.0)[:, None] * (
            grads[driven][:, lj, 2] - grads[driven][:, li, 2]
        )
        b0u = np.einsum("te,te->t", coef[driven], wz)
        loss_driven = sys.sigma[driven] * (
            np.abs(g_by_tet[driven]) ** 2 * vol[driven]
            + 2.0 * np.real(-1j * omega * b0u * np.conj(g_by_tet[driven]))
        )
        loss[driven] += loss_driven
    return loss


def region_losses(solution: FieldSolution) -> dict[str, float]:
    """Time-average dissipation per meter of cable, grouped by region."""
    mesh = solution.mesh
    loss = _per_tet_loss(solution)
    b = tet_b_field(solution)
    _, vol = _geometry(mesh)
    mag_loss = (
        solution.omega
        * np.imag(solution.system.nu)
        * np.sum(np.abs(b) ** 2, axis=1)
        * vol
    )
    length = mesh.cell_length
    groups = {"conductors": "conductor:", "sheaths": "sheath:", "armor": "armor:"}
    out: dict[str, float] = {}
    for gname, prefix in groups.items():
        tids = mesh.tris_with_tag_prefix(prefix)
        total = float(loss[tids].sum())
        if gname == "armor":
            total += float(mag_loss[tids].sum())
        out[gname] = total / length
    out["other"] = (float(loss.sum() + mag_loss.sum()) / length) - sum(out.values())
    out["total"] = float(loss.sum() + mag_loss.sum()) / length
    return out


def magnetic_energy(solution: FieldSolution) -> float:
    """Time-average stored magnetic energy per meter (J/m)."""
    mesh = solution.mesh
    b = tet_b_field(solution)
    _, vol = _geometry(mesh)
    nu = solution.system.nu
    w = 0.5 * np.real(nu) * np.sum(np.abs(b) ** 2, axis=1) * vol
    stretch = mesh.tris_with_tag_prefix("stretch")
    if stretch.size:
        t_nu, _ = _stretch_tensors(mesh, stretch)
        bs = b[stretch]
        w[stretch] = (
            0.5
            * np.real(nu[stretch])
            * np.real(np.einsum("tc,tcd,td->t", np.conj(bs), t_nu, bs))
            * vol[stretch]
        )
    return float(w.sum()) / mesh.cell_length


def complex_power(solution: FieldSolution) -> complex:
    """Total complex power injected by the driving gradients, per meter."""
    currents = conductor_currents(solution)
    s = 0.0 + 0.0j
    for ci, circ in enumerate(solution.system.circuits):
        s += solution.gradients[ci] * np.conj(currents[circ.name])
    return complex(s)


def power_balance(solution: FieldSolution) -> dict[str, float]:
    """Source power vs dissipation + reactive energy; relative mismatch."""
    s = complex_power(solution)
    losses = region_losses(solution)
    q = 2.0 * solution.omega * magnetic_energy(solution)
    target = losses["total"] + 1j * q
    mismatch = abs(s - target) / max(abs(s), 1e-300)
    return {
        "source_P_W_per_m": s.real,
        "source_Q_var_per_m": s.imag,
        "loss_W_per_m": losses["total"],
        "reactive_var_per_m": q,
        "mismatch": float(mismatch),
    }


def series_impedance(solution: FieldSolution) -> tuple[float, float]:
    """Per-phase series resistance and reactance in milliohm/km.

    Uses the driving gradient to prescribed current ratio of each phase
    under the balanced excitation of the solve.
    """
    currents = conductor_currents(solution)
    zs = []
    for ci, circ in enumerate(solution.system.circuits):
        if not circ.name.startswith("phase"):
            continue
        i_c = currents[circ.name]
        if abs(i_c) < 1e-12:
            continue
        zs.append(solution.gradients[ci] / i_c)
    z = np.mean(zs)
    return float(z.real * 1e6), float(z.imag * 1e6)


def mean_wire_field_strength(solution: FieldSolution) -> dict[str, float]:
    """Volume-weighted mean |H| (A/m RMS) per armor-wire region tag."""
    mesh = solution.mesh
    b = tet_b_field(solution)
    _, vol = _geometry(mesh)
    habs = np.abs(solution.system.nu) * np.sqrt(np.sum(np.abs(b) ** 2, axis=1))
    out: dict[str, float] = {}
    for i, name in enumerate(mesh.tag_names):
        if not name.startswith("armor:"):
            continue
        tids = np.nonzero(mesh.tet_tags == i)[0]
        if tids.size:
            out[name] = float(np.sum(habs[tids] * vol[tids]) / np.sum(vol[tids]))
    return out


def probe_line(radii, angle: float = 0.0, z: float = 0.0) -> np.ndarray:
    """Probe points on a radial ray at the given angle and axial station."""
    radii = np.asarray(radii, dtype=float)
    return np.column_stack(
        [radii * math.cos(angle), radii * math.sin(angle), np.full(radii.size, z)]
    )


def diagnostic_report(solution: FieldSolution) -> str:
    """Human-readable solve summary."""
    lines = []
    cond = solution.conditions
    lines.append(
        f"frequency-domain solve: f = {cond.frequency:g} Hz, bonding = "
        f"{cond.bonding.value}"
    )
    lines.append(
        f"system: {solution.system.system_dimension} unknowns "
        f"({solution.mesh.n_edges} edges + {len(solution.system.circuits)} circuits), "
        f"reduced {solution.info.get('n_master', 0)}"
    )
    lines.append(
        f"residuals: solver {solution.info.get('solver_residual', 0):.2e}, "
        f"periodic {solution.info.get('periodic_residual', 0):.2e}"
    )
    currents = conductor_currents(solution)
    for name, val in currents.items():
        if name.startswith("phase") or name.startswith("sheath"):
            lines.append(f"  I[{name}] = {abs(val):.3f} A at {np.angle(val, deg=True):.1f} deg")
    armor_net = sum(v for k, v in currents.items() if k.startswith("armor"))
    lines.append(f"  net armor current = {abs(armor_net):.3f} A")
    losses = region_losses(solution)
    lines.append(
        "losses (W/m): "
        + ", ".join(f"{k} {v:.3f}" for k, v in losses.items() if k != "other")
    )
    r, x = series_impedance(solution)
    lines.append(f"series impedance: R = {r:.2f} mOhm/km, X = {x:.2f} mOhm/km")
    bal = power_balance(solution)
    lines.append(f"power balance mismatch: {bal['mismatch']:.2%}")
    lines.append(
        f"timing: reduce {solution.info.get('time_reduce_s', 0):.1f} s, "
        f"factor+solve {solution.info.get('time_factor_solve_s', 0):.1f} s"
    )
    return "\n".join(lines)
