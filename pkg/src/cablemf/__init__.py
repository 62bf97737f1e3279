"""Magnetic-field simulation toolkit for three-core armored power cables.

Subpackages and modules:
    design    cable parametrization, helical geometry, periodic-cell math
    materials conductivity and complex permeability models
    mesh      twist-conforming tetrahedral meshing of one periodic cell
    fem       rotated-periodic eddy-current solver and post-processing
    oracle    independent Biot-Savart filament-field engine
    emission  fitted B(I, r) model, coefficient fitting, shielding factor
    routemap  seabed corridor emission maps and hotspot detection
    cli       batch command surface
"""

from .design import (
    ArmorLayer,
    Bonding,
    CableDesign,
    HelixPath,
    OperatingConditions,
    PeriodicCell,
    WirePattern,
    armor_wire_centerline,
    balanced_currents,
    crossing_pitch,
    load_design,
    periodic_cell,
    periodic_length,
    phase_centerline,
    rotation_angle,
    save_design,
    validate_design,
    wire_mapping_residual,
)
from .emission import (
    EmissionFit,
    MFProfileSet,
    bundled_fit,
    bundled_profile,
    eval_fit,
    fit_coefficients,
    fit_quality,
    load_fit,
    save_fit,
    shielding_factor,
)
from .materials import MaterialProps, permeability_at
from .oracle import (
    FilamentSet,
    cable_filament_field,
    helix_filament_field,
    meter_magnitude_ut,
    parallel_threephase_field,
)
from .routemap import (
    EmissionMap,
    RouteProfile,
    detect_hotspots,
    export_map,
    load_route,
    map_route,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
