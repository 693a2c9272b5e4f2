"""Edge coverage path planning for lawn-mowing robots on function-graph boundaries."""
from ._backend import NAME as backend
from .boundary import (
    Boundary,
    ConvexityProfile,
    RobotSpec,
    convexity,
    generate_boundary,
    lower_envelope,
    preprocess_boundary,
    preprocess_stages,
    rasterize_obstacle,
    read_boundary_csv,
    write_boundary_csv,
)
from .morphology import BinaryGrid, StructuringElement, closing, dilate, disk, erode, opening
from .planner import METHODS, PlannedPath, plan, plan_bsdp, plan_disk, plan_reference, plan_scp, smooth_path
from .sweep import CollisionResult, CoverageReport, check_collision, swept_region, uncut_area
from .tracking import ControllerGains, RobotState, TrackingDivergence, TrackingResult, track

__version__ = "0.1.0"
