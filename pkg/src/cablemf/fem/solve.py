"""Constraint reduction, direct factorization, and the nonlinear loop.

Constraints eliminate rather than penalize: outer-boundary edges are
zeroed (tangential A = 0 on the stretched far boundary), z=L face edges
are substituted by their z=0 partners (sign for bijective pairs, the
Whitney-trace rows for seam edges), and the reduced complex symmetric
system is factorized by SuperLU. The permeability fixed point re-solves
with wire permeabilities updated from each iterate's mean field strength
under 0.5 relaxation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..design import CableDesign, OperatingConditions
from ..errors import FactorizationFailure, NonConvergence
from ..materials import permeability_at
from ..mesh.extrude import VolumeMesh
from .assembly import LinearSystemSpec, assemble_system

_MAX_MU_ITERATIONS = 25
_MU_RTOL = 1e-3
_MU_RELAX = 0.5


@dataclass
class FieldSolution:
    """Solved state: edge circulations of A plus circuit driving gradients."""

    mesh: VolumeMesh
    design: CableDesign
    conditions: OperatingConditions
    edge_dofs: np.ndarray  # (E,) complex, Wb/m circulations
    gradients: np.ndarray  # (C,) complex, V/m
    system: LinearSystemSpec
    info: dict = field(default_factory=dict)

    @property
    def omega(self) -> float:
        return self.conditions.omega


def reduction_matrix(mesh: VolumeMesh, n_circuits: int) -> sp.csr_matrix:
    """Prolongation P from master unknowns to the full (edges + circuits) set."""
    n_e = mesh.n_edges
    dim = n_e + n_circuits
    zero = np.zeros(n_e, dtype=bool)
    zero[mesh.outer_edge_ids] = True

    pm = mesh.periodic
    dest = np.zeros(n_e, dtype=bool)
    for d in pm.pairs:
        dest[d] = True
    for d in pm.interp:
        dest[d] = True

    master = ~(zero | dest)
    master_ids = np.nonzero(master)[0]
    col_of = np.full(n_e, -1, dtype=np.int64)
    col_of[master_ids] = np.arange(master_ids.size)
    n_master = master_ids.size + n_circuits

    rows = [master_ids]
    cols = [col_of[master_ids]]
    vals = [np.ones(master_ids.size)]
    for d, (s, sign) in pm.pairs.items():
        if zero[d] or col_of[s] < 0:
            continue  # partner zeroed on the boundary: slave stays zero
        rows.append([d])
        cols.append([col_of[s]])
        vals.append([float(sign)])
    for d, entries in pm.interp.items():
        if zero[d]:
            continue
        for s, w in entries:
            if col_of[s] < 0:
                continue
            rows.append([d])
            cols.append([col_of[s]])
            vals.append([w])
    # circuit unknowns are always masters
    rows.append(n_e + np.arange(n_circuits))
    cols.append(master_ids.size + np.arange(n_circuits))
    vals.append(np.ones(n_circuits))

    return sp.coo_matrix(
        (
            np.concatenate([np.atleast_1d(v) for v in vals]).astype(float),
            (
                np.concatenate([np.atleast_1d(r) for r in rows]).astype(np.int64),
                np.concatenate([np.atleast_1d(c) for c in cols]).astype(np.int64),
            ),
        ),
        shape=(dim, n_master),
    ).tocsr()


def solve_system(mesh: VolumeMesh, system: LinearSystemSpec) -> FieldSolution:
    """Factorize and solve the constrained system."""
    t0 = time.perf_counter()
    p = reduction_matrix(mesh, len(system.circuits))
    k_red = (p.T @ system.matrix @ p).tocsc()
    rhs_red = p.T @ system.rhs
    t_red = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        lu = spla.splu(
            k_red,
            permc_spec="MMD_AT_PLUS_A",
            options={"SymmetricMode": True},
        )
        x = lu.solve(rhs_red)
    except (RuntimeError, ValueError) as exc:
        raise FactorizationFailure(
            f"sparse factorization failed ({exc}); check the gauge "
            "regularization and mesh quality"
        ) from exc
    t_factor = time.perf_counter() - t0
    if not np.all(np.isfinite(x)):
        raise FactorizationFailure("factorization produced non-finite values")

    resid = np.linalg.norm(k_red @ x - rhs_red) / max(np.linalg.norm(rhs_red), 1e-300)
    full = p @ x
    n_e = mesh.n_edges

    # periodic-constraint residual of the expanded solution
    pm = mesh.periodic
    per_res = 0.0
    scale = float(np.max(np.abs(full[:n_e]))) or 1.0
    for d, (s, sign) in pm.pairs.items():
        per_res = max(per_res, abs(full[d] - sign * full[s]))
    for d, entries in pm.interp.items():
        acc = sum(w * full[s] for s, w in entries)
        per_res = max(per_res, abs(full[d] - acc))

    return FieldSolution(
        mesh=mesh,
        design=None,  # filled by the caller
        conditions=None,
        edge_dofs=full[:n_e],
        gradients=full[n_e:],
        system=system,
        info={
            "solver_residual": float(resid),
            "periodic_residual": float(per_res / scale),
            "n_master": k_red.shape[0],
            "time_reduce_s": t_red,
            "time_factor_solve_s": t_factor,
            "iterations": 1,
        },
    )


def solve(
    mesh: VolumeMesh,
    design: CableDesign,
    conditions: OperatingConditions,
    mu_state: dict[str, complex] | None = None,
    sigma_reg: float = 1.0,
    medium_conductivity: float = 0.0,
) -> FieldSolution:
    """Assemble and solve one linear (fixed permeability) problem."""
    system = assemble_system(
        mesh, design, conditions, mu_state, sigma_reg, medium_conductivity
    )
    sol = solve_system(mesh, system)
    sol.design = design
    sol.conditions = conditions
    if mu_state:
        sol.info["mu_state"] = dict(mu_state)
    return sol


def solve_nonlinear(
    mesh: VolumeMesh,
    design: CableDesign,
    conditions: OperatingConditions,
    sigma_reg: float = 1.0,
    medium_conductivity: float = 0.0,
) -> FieldSolution:
    """Fixed-point iteration for field-dependent armor permeability.

    Designs without tabulated curves converge in one iteration (identical
    to ``solve``). Raises NonConvergence carrying the last iterate when 25
    iterations do not settle the permeabilities to 0.1%.
    """
    from .post import mean_wire_field_strength

    tabulated = {
        li: layer
        for li, layer in enumerate(design.armor_layers)
        if layer.wire_material.is_tabulated
    }
    mu_state: dict[str, complex] = {}
    for name in mesh.tag_names:
        if name.startswith("armor:"):
            li = int(name.split(":")[1])
            mat = design.armor_layers[li].wire_material
            mu_state[name] = permeability_at(mat, 0.0) if mat.is_tabulated else mat.mu_r

    sol = None
    for it in range(1, _MAX_MU_ITERATIONS + 1):
        sol = solve(
            mesh, design, conditions, mu_state, sigma_reg, medium_conductivity
        )
        if not tabulated:
            sol.info["iterations"] = it
            sol.info["mu_converged"] = True
            return sol
        h_means = mean_wire_field_strength(sol)
        worst = 0.0
        for name, h in h_means.items():
            li = int(name.split(":")[1])
            mat = design.armor_layers[li].wire_material
            if not mat.is_tabulated:
                continue
            target = permeability_at(mat, h)
            new = mu_state[name] + _MU_RELAX * (target - mu_state[name])
            worst = max(worst, abs(new - mu_state[name]) / abs(mu_state[name]))
            mu_state[name] = new
        sol.info["iterations"] = it
        sol.info["mu_residual"] = worst
        if worst < _MU_RTOL:
            sol.info["mu_converged"] = True
            sol.info["mu_state"] = dict(mu_state)
            return sol
    sol.info["mu_converged"] = False
    raise NonConvergence(
        f"permeability iteration did not converge in {_MAX_MU_ITERATIONS} "
        f"iterations (last residual {sol.info['mu_residual']:.3g})",
        solution=sol,
        iterations=_MAX_MU_ITERATIONS,
    )
