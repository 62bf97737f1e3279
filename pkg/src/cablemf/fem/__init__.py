from .assembly import CircuitSpec, LinearSystemSpec, assemble_system, build_circuits
from .post import (
    complex_power,
    conductor_currents,
    diagnostic_report,
    magnetic_energy,
    power_balance,
    probe_b_field,
    probe_line,
    region_losses,
    series_impedance,
    sheath_current_magnitude,
)
from .solve import FieldSolution, solve, solve_nonlinear, solve_system

__all__ = [
    "CircuitSpec",
    "FieldSolution",
    "LinearSystemSpec",
    "assemble_system",
    "build_circuits",
    "complex_power",
    "conductor_currents",
    "diagnostic_report",
    "magnetic_energy",
    "power_balance",
    "probe_b_field",
    "probe_line",
    "region_losses",
    "series_impedance",
    "sheath_current_magnitude",
    "solve",
    "solve_nonlinear",
    "solve_system",
]
