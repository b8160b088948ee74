"""capdrop: simulation and verification toolkit for constant-mean-curvature
and capillary surfaces whose boundary sits on a round sphere."""

from .errors import (
    AlreadyClosedError,
    AxisSingularityError,
    BoundaryOffSphereError,
    CapdropError,
    ConfigError,
    CurvatureTooLargeError,
    DegenerateConfigurationError,
    DegenerateFaceError,
    GeometryError,
    InconsistentOrientationError,
    LoopsNotInHemisphereError,
    MeshDegeneracyError,
    MeshError,
    NoCommonLineError,
    NoContactInRangeError,
    NonManifoldError,
    OpenMeshError,
    SelfIntersectingPatchError,
    SideViolationError,
    SolverError,
    StepCollapseError,
    UnknownFormatError,
    ZeroCurvatureError,
)
from .geometry import (
    Line,
    Plane,
    Sphere,
    open_hemisphere_pole,
    rotation_between,
    rotation_from_axis_angle,
    unit,
)
from .mesh import TriMesh, build_mesh, reflect
from .shapes import (
    cylinder_mesh,
    flat_annulus,
    flat_disk,
    grid_patch,
    icosphere,
    perturb_normal,
    revolve,
    spherical_cap_mesh,
)
from .curvature import (
    cotangent_area_gradient,
    jet_fit,
    jet_mean_curvature,
    mixed_voronoi_areas,
    vertex_mean_curvature,
)
from .analytic import (
    CapDrop,
    CapillaryParams,
    ContactAngleReport,
    SphericalCapSpec,
    cap_for_circle_height,
    cap_volume,
    cap_volume_for_height,
    contact_angle,
    exterior_drop_cap,
    interior_drop_cap,
    spherical_caps_for_circle,
)
from .delaunay import (
    DelaunayProfile,
    classify_delaunay,
    clip_profile_to_sphere,
    delaunay_profile,
    first_integral,
    surface_of_revolution,
)
from .closure import (
    ClosedRegion,
    Containment,
    close_with_spherical_patch,
    signed_containment,
)
from .fileio import (
    load_mesh,
    read_obj,
    read_ply,
    read_profile_csv,
    save_mesh,
    write_obj,
    write_ply,
    write_profile_csv,
)
from .spatial import (
    MeshDistanceQuery,
    get_threads,
    point_mesh_distance,
    ray_hit_counts,
    set_threads,
    winding_numbers,
)
from .wetting import (
    WettingOperator,
    make_wetting_operator,
    surface_volume_gradient,
    surface_z_moment,
    surface_z_moment_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "AlreadyClosedError",
    "AxisSingularityError",
    "BoundaryOffSphereError",
    "CapDrop",
    "CapdropError",
    "CapillaryParams",
    "ClosedRegion",
    "ConfigError",
    "Containment",
    "ContactAngleReport",
    "CurvatureTooLargeError",
    "DegenerateConfigurationError",
    "DegenerateFaceError",
    "DelaunayProfile",
    "GeometryError",
    "InconsistentOrientationError",
    "Line",
    "LoopsNotInHemisphereError",
    "MeshDegeneracyError",
    "MeshDistanceQuery",
    "MeshError",
    "NoCommonLineError",
    "NoContactInRangeError",
    "NonManifoldError",
    "OpenMeshError",
    "Plane",
    "SelfIntersectingPatchError",
    "SideViolationError",
    "SolverError",
    "Sphere",
    "SphericalCapSpec",
    "StepCollapseError",
    "TriMesh",
    "UnknownFormatError",
    "WettingOperator",
    "ZeroCurvatureError",
    "__version__",
    "build_mesh",
    "cap_for_circle_height",
    "cap_volume",
    "cap_volume_for_height",
    "classify_delaunay",
    "clip_profile_to_sphere",
    "close_with_spherical_patch",
    "contact_angle",
    "cotangent_area_gradient",
    "cylinder_mesh",
    "delaunay_profile",
    "exterior_drop_cap",
    "first_integral",
    "flat_annulus",
    "flat_disk",
    "get_threads",
    "grid_patch",
    "icosphere",
    "interior_drop_cap",
    "jet_fit",
    "jet_mean_curvature",
    "load_mesh",
    "make_wetting_operator",
    "mixed_voronoi_areas",
    "open_hemisphere_pole",
    "perturb_normal",
    "point_mesh_distance",
    "ray_hit_counts",
    "read_obj",
    "read_ply",
    "read_profile_csv",
    "reflect",
    "revolve",
    "rotation_between",
    "rotation_from_axis_angle",
    "save_mesh",
    "set_threads",
    "signed_containment",
    "spherical_cap_mesh",
    "spherical_caps_for_circle",
    "surface_of_revolution",
    "surface_volume_gradient",
    "surface_z_moment",
    "surface_z_moment_gradient",
    "unit",
    "vertex_mean_curvature",
    "winding_numbers",
    "write_obj",
    "write_ply",
    "write_profile_csv",
]
