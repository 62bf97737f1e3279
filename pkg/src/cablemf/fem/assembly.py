"""Edge-element assembly of the frequency-domain eddy-current problem.

Unknowns are the circulations of the magnetic vector potential A along
mesh edges (lowest-order Whitney elements) plus one complex driving
gradient g_c per conductive circuit. Inside circuit c the electric field
is E = -j*omega*A + g_c * z_hat; the z-directed drive is the curl-free
realization of a per-circuit axial EMF (any curl-free drive of equal
circulation differs only by a gauge term). The weak form of

    curl(nu curl A) + j*omega*sigma*A = sigma * g_c * z_hat

is closed by circuit rows fixing either the net current

    I_c = (1/L) * integral_c sigma (-j*omega*A + g_c z_hat) . z_hat dV

(prescribed phases, single-point-bonded sheaths at zero) or g_c = 0
(solid-bonded sheaths, armor wires). Scaling the current rows by
L/(j*omega) keeps the full block system complex symmetric.

Non-conducting regions carry a small regularization conductivity that
gauges the null space of the curl-curl operator. Stretch-layer elements
are assembled with the radially mapped metric, pushing the outer
boundary (tangential A = 0) to an effectively unbounded radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.constants import mu_0

from ..design import Bonding, CableDesign, OperatingConditions
from ..errors import SingularMaterial
from ..materials import permeability_at
from ..mesh.extrude import VolumeMesh

_LOCAL_EDGES = np.array([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


@dataclass
class CircuitSpec:
    """One conductive circuit: a tagged region with its drive condition."""

    name: str
    tag_prefix: str
    mode: str  # "current" or "shorted"
    prescribed: complex = 0.0
    tet_ids: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))


@dataclass
class LinearSystemSpec:
    """Assembled unconstrained system plus constraint bookkeeping."""

    matrix: sp.csr_matrix  # (E + C) square, complex symmetric
    rhs: np.ndarray
    n_edges: int
    circuits: list[CircuitSpec]
    sigma: np.ndarray  # per-tet conductivity actually assembled
    nu: np.ndarray  # per-tet complex reluctivity 1/(mu0 mur)
    coupling: np.ndarray  # (E, C) dense-by-column circuit coupling (sparse)
    circuit_area_sigma: np.ndarray  # S_c per circuit
    omega: float

    @property
    def system_dimension(self) -> int:
        return self.matrix.shape[0]


def build_circuits(
    mesh: VolumeMesh, design: CableDesign, conditions: OperatingConditions
) -> list[CircuitSpec]:
    """Enumerate phases, sheaths, and armor wires with their modes."""
    circuits: list[CircuitSpec] = []
    for k in range(3):
        circuits.append(
            CircuitSpec(
                name=f"phase{k}",
                tag_prefix=f"conductor:{k}",
                mode="current",
                prescribed=complex(conditions.phase_currents[k]),
            )
        )
    sheath_mode = (
        "current" if conditions.bonding is Bonding.SINGLE_POINT else "shorted"
    )
    for k in range(3):
        circuits.append(
            CircuitSpec(
                name=f"sheath{k}",
                tag_prefix=f"sheath:{k}",
                mode=sheath_mode,
                prescribed=0.0,
            )
        )
    for li, layer in enumerate(design.armor_layers):
        if layer.wire_material.conductivity <= 0:
            continue
        for w in range(layer.wire_count):
            if layer.is_pe_separator(w):
                continue
            circuits.append(
                CircuitSpec(
                    name=f"armor{li}_{w}",
                    tag_prefix=f"armor:{li}:{w}",
                    mode="shorted",
                )
            )
    tag_lookup = {name: i for i, name in enumerate(mesh.tag_names)}
    for c in circuits:
        tid = tag_lookup.get(c.tag_prefix)
        c.tet_ids = (
            np.nonzero(mesh.tet_tags == tid)[0] if tid is not None else np.empty(0, int)
        )
    return [c for c in circuits if c.tet_ids.size > 0]


def region_materials(
    mesh: VolumeMesh,
    design: CableDesign,
    mu_state: dict[str, complex] | None = None,
    sigma_reg: float = 1.0,
    medium_conductivity: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-tet (conductivity, complex relative permeability).

    ``mu_state`` overrides wire permeabilities by tag (used by the
    fixed-point iteration); tabulated materials default to their first
    curve point until the iteration updates them.
    """
    disk_area = math.pi * (0.5 * design.conductor_diameter) ** 2
    sigma_cond = design.conductor_material.conductivity * (
        design.conductor_cross_section / disk_area
    )
    sigma = np.full(len(mesh.tag_names), sigma_reg)
    mur = np.full(len(mesh.tag_names), 1.0 + 0.0j)
    for i, name in enumerate(mesh.tag_names):
        if name.startswith("conductor:"):
            sigma[i] = max(sigma_cond, sigma_reg)
        elif name.startswith("sheath:"):
            sigma[i] = max(design.sheath_material.conductivity, sigma_reg)
        elif name.startswith("armor:"):
            layer = design.armor_layers[int(name.split(":")[1])]
            sigma[i] = max(layer.wire_material.conductivity, sigma_reg)
            mat = layer.wire_material
            if mu_state is not None and name in mu_state:
                mur[i] = mu_state[name]
            elif mat.is_tabulated:
                mur[i] = mat.mu_curve_values[0]
            else:
                mur[i] = mat.mu_r
        elif name == "medium":
            sigma[i] = max(medium_conductivity, sigma_reg)
        # filler, pe, jacket, stretch keep the regularization conductivity
    for i, name in enumerate(mesh.tag_names):
        if mur[i].real < 1.0 - 1e-12:
            raise SingularMaterial(f"region {name}: Re(mu_r) = {mur[i].real} < 1")
        if sigma[i] < 0:
            raise SingularMaterial(f"region {name}: sigma < 0")
    return sigma[mesh.tet_tags], mur[mesh.tet_tags]


def _geometry(mesh: VolumeMesh):
    """Barycentric gradients (m, 4, 3) and volumes (m,)."""
    p = mesh.nodes[mesh.tets]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    e3 = p[:, 3] - p[:, 0]
    vol6 = np.einsum("ij,ij->i", e1, np.cross(e2, e3))
    grads = np.empty((p.shape[0], 4, 3))
    grads[:, 1] = np.cross(e2, e3) / vol6[:, None]
    grads[:, 2] = np.cross(e3, e1) / vol6[:, None]
    grads[:, 3] = np.cross(e1, e2) / vol6[:, None]
    grads[:, 0] = -(grads[:, 1] + grads[:, 2] + grads[:, 3])
    return grads, np.abs(vol6) / 6.0


def _stretch_tensors(mesh: VolumeMesh, tet_ids: np.ndarray):
    """Per-element metric tensors of the radial far-field map.

    Mesh radius rho in [R_med, R_ext] represents physical radius
    s(rho) = R_med (R_ext - R_med) / (R_ext - rho). Returns (T_nu, T_sig):
    nu_tensor = nu * T_nu and sigma_tensor = sigma * T_sig.
    """
    r_med = _extra(mesh, "medium_radius")
    r_ext = _extra(mesh, "stretch_radius")
    cent = mesh.nodes[mesh.tets[tet_ids]].mean(axis=1)
    rho = np.linalg.norm(cent[:, :2], axis=1)
    rho = np.clip(rho, r_med * (1 + 1e-9), r_ext * (1 - 1e-3))
    s = r_med * (r_ext - r_med) / (r_ext - rho)
    ds = r_med * (r_ext - r_med) / (r_ext - rho) ** 2
    j_r = ds
    j_p = s / rho
    cosp = cent[:, 0] / rho
    sinp = cent[:, 1] / rho

    def rotated_diag(d_r, d_p, d_z):
        t = np.zeros((tet_ids.size, 3, 3))
        t[:, 0, 0] = d_r * cosp**2 + d_p * sinp**2
        t[:, 1, 1] = d_r * sinp**2 + d_p * cosp**2
        t[:, 0, 1] = t[:, 1, 0] = (d_r - d_p) * cosp * sinp
        t[:, 2, 2] = d_z
        return t

    t_nu = rotated_diag(j_r / j_p, j_p / j_r, 1.0 / (j_r * j_p))
    t_sig = rotated_diag(j_p / j_r, j_r / j_p, j_r * j_p)
    return t_nu, t_sig


def _extra(mesh: VolumeMesh, name: str) -> float:
    if mesh.planar is not None:
        return getattr(mesh.planar, name)
    return mesh.extras[name]


def assemble_system(
    mesh: VolumeMesh,
    design: CableDesign,
    conditions: OperatingConditions,
    mu_state: dict[str, complex] | None = None,
    sigma_reg: float = 1.0,
    medium_conductivity: float = 0.0,
) -> LinearSystemSpec:
    """Assemble the complex symmetric block system (field + circuits)."""
    omega = conditions.omega
    sigma, mur = region_materials(
        mesh, design, mu_state, sigma_reg, medium_conductivity
    )
    nu = 1.0 / (mu_0 * mur)
    grads, vol = _geometry(mesh)
    m = mesh.n_tets
    e_count = mesh.n_edges

    stretch_ids = mesh.tris_with_tag_prefix("stretch")
    is_stretch = np.zeros(m, dtype=bool)
    is_stretch[stretch_ids] = True

    # per-tet edge data
    li = _LOCAL_EDGES[:, 0]
    lj = _LOCAL_EDGES[:, 1]
    g_i = grads[:, li]  # (m, 6, 3)
    g_j = grads[:, lj]
    curl = 2.0 * np.cross(g_i, g_j)  # (m, 6, 3)

    # isotropic part
    iso = ~is_stretch
    k_local = np.zeros((m, 6, 6), dtype=complex)
    k_local[iso] = (
        np.einsum("tec,tfc->tef", curl[iso], curl[iso])
        * (nu[iso] * vol[iso])[:, None, None]
    )
    # mass: M[ef] = V/20 [ (1+d_ik)(gj.gl) - (1+d_il)(gj.gk)
    #                     - (1+d_jk)(gi.gl) + (1+d_jl)(gi.gk) ]
    gg = np.einsum("tac,tbc->tab", grads, grads)  # (m, 4, 4)
    delta = np.eye(4)

    def mass_from_gg(gg_arr, vols):
        i_, j_ = li, lj
        mloc = (
            (1 + delta[np.ix_(i_, i_)]) * gg_arr[:, lj][:, :, lj]
            - (1 + delta[np.ix_(i_, j_)]) * gg_arr[:, lj][:, :, li]
            - (1 + delta[np.ix_(j_, i_)]) * gg_arr[:, li][:, :, lj]
            + (1 + delta[np.ix_(j_, j_)]) * gg_arr[:, li][:, :, li]
        )
        return mloc * (vols / 20.0)[:, None, None]

    m_local = np.zeros((m, 6, 6), dtype=complex)
    m_local[iso] = mass_from_gg(gg[iso], vol[iso]) * sigma[iso, None, None]

    # stretch elements with tensor metric
    if stretch_ids.size:
        t_nu, t_sig = _stretch_tensors(mesh, stretch_ids)
        cs = curl[stretch_ids]
        k_local[stretch_ids] = (
            np.einsum("tec,tcd,tfd->tef", cs, t_nu, cs)
            * (nu[stretch_ids] * vol[stretch_ids])[:, None, None]
        )
        gs = grads[stretch_ids]
        gg_s = np.einsum("tac,tcd,tbd->tab", gs, t_sig, gs)
        m_local[stretch_ids] = (
            mass_from_gg(gg_s, vol[stretch_ids]) * sigma[stretch_ids, None, None]
        )

    signs = mesh.tet_edge_signs.astype(float)
    k_signed = (k_local + 1j * omega * m_local) * (
        signs[:, :, None] * signs[:, None, :]
    )
    rows = np.repeat(mesh.tet_edges, 6, axis=1).reshape(-1)
    cols = np.tile(mesh.tet_edges, (1, 6)).reshape(-1)
    data = k_signed.reshape(-1)

    circuits = build_circuits(mesh, design, conditions)
    n_c = len(circuits)
    dim = e_count + n_c

    # circuit coupling vectors b_c[e] = int_c sigma W_e . z dV and S_c
    b_rows, b_cols, b_data = [], [], []
    s_c = np.zeros(n_c, dtype=complex)
    b_mat_cols = []
    for ci, circ in enumerate(circuits):
        tids = circ.tet_ids
        if circ.mode == "current" and sigma[tids[0]] <= sigma_reg:
            raise SingularMaterial(
                f"circuit {circ.name} cannot carry a prescribed current: its "
                f"conductivity does not exceed the gauge regularization"
            )
        # int W_e dV = V/4 (g_j - g_i); dot z
        wz = (vol[tids] / 4.0)[:, None] * (
            grads[tids][:, lj, 2] - grads[tids][:, li, 2]
        )
        wz = wz * signs[tids] * sigma[tids, None]
        col = np.zeros(e_count, dtype=complex)
        np.add.at(col, mesh.tet_edges[tids].reshape(-1), wz.reshape(-1))
        b_mat_cols.append(sp.csc_matrix(col[:, None]))
        s_c[ci] = np.sum(sigma[tids] * vol[tids])

    coupling = (
        sp.hstack(b_mat_cols).tocsc() if n_c else sp.csc_matrix((e_count, 0))
    )

    # block assembly
    blocks_rows = [rows]
    blocks_cols = [cols]
    blocks_data = [data]
    coup = coupling.tocoo()
    # field-circuit off diagonals, both triangles: -b
    blocks_rows.append(coup.row)
    blocks_cols.append(e_count + coup.col)
    blocks_data.append(-coup.data)
    blocks_rows.append(e_count + coup.col)
    blocks_cols.append(coup.row)
    blocks_data.append(-coup.data)
    # circuit diagonal S_c / (j omega) for current rows; 1 for shorted rows
    diag_rows = []
    diag_data = []
    rhs = np.zeros(dim, dtype=complex)
    length = mesh.cell_length
    for ci, circ in enumerate(circuits):
        diag_rows.append(e_count + ci)
        if circ.mode == "current":
            diag_data.append(s_c[ci] / (1j * omega))
            rhs[e_count + ci] = length * circ.prescribed / (1j * omega)
        else:
            # g_c = 0: unit diagonal, coupling column removed below
            diag_data.append(1.0)
    blocks_rows.append(np.asarray(diag_rows))
    blocks_cols.append(np.asarray(diag_rows))
    blocks_data.append(np.asarray(diag_data, dtype=complex))

    matrix = sp.coo_matrix(
        (
            np.concatenate(blocks_data),
            (np.concatenate(blocks_rows), np.concatenate(blocks_cols)),
        ),
        shape=(dim, dim),
    ).tocsr()

    # zero out couplings of shorted circuits (their g is fixed at 0)
    shorted = [e_count + ci for ci, c in enumerate(circuits) if c.mode == "shorted"]
    if shorted:
        mask = np.ones(dim, dtype=bool)
        mask[shorted] = False
        keep = sp.diags(mask.astype(float))
        fixer = sp.diags((~mask).astype(float))
        matrix = keep @ matrix @ keep + fixer
        matrix = matrix.tocsr()

    return LinearSystemSpec(
        matrix=matrix,
        rhs=rhs,
        n_edges=e_count,
        circuits=circuits,
        sigma=sigma,
        nu=nu,
        coupling=coupling,
        circuit_area_sigma=s_c,
        omega=omega,
    )


def wire_mu_state(
    mesh: VolumeMesh, design: CableDesign, h_by_tag: dict[str, float]
) -> dict[str, complex]:
    """Permeability lookup per armor-wire tag at the given mean |H|."""
    out: dict[str, complex] = {}
    for name, h in h_by_tag.items():
        layer = design.armor_layers[int(name.split(":")[1])]
        out[name] = permeability_at(layer.wire_material, h)
    return out
