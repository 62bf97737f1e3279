from .extrude import PeriodicMap, VolumeMesh, periodic_face_map, twisted_extrude
from .io import export_mesh, import_mesh
from .planar import RESOLUTIONS, PlanarMesh, build_cross_section

__all__ = [
    "PeriodicMap",
    "PlanarMesh",
    "RESOLUTIONS",
    "VolumeMesh",
    "build_cross_section",
    "export_mesh",
    "import_mesh",
    "periodic_face_map",
    "twisted_extrude",
]
