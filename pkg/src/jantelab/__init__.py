"""jantelab: exact simulation and statistical verification of Jante's law
processes (multidimensional randomized Keynesian beauty contests) on
convex bodies in R^d.

The lab simulates the replace-the-farthest opinion dynamics exactly in
law, exposes the keep-set geometry in closed form, and ships empirical
verifiers for the drift bounds, exodus-time laws, confinement radii and
the continuity (atom-freeness) of the limit-point distribution.
"""

from .bodies import (
    Ball,
    Box,
    ConvexBody,
    FullSpace,
    HalfspacePolytope,
    sample_in_body_cap,
    shell_volume_check,
    uniform_geometry_constants,
    unit_ball_volume,
)
from .configuration import (
    Configuration,
    Functionals,
    check_functional_inequalities,
    distance_to_boundary,
    functionals,
    hausdorff_distance,
    rescale_recenter,
)
from .errors import (
    AttemptsExhausted,
    ConfigError,
    DegenerateConfiguration,
    DimensionMismatch,
    JanteError,
    PointNotInKeep,
    UnboundedBody,
)
from .keepset import (
    KeepBalls,
    RemovalOutcome,
    inertia_drop_forms,
    keep_balls,
    keep_contains,
    keep_volume,
    removal_choice,
    sample_keep,
)
from .process import (
    StopRule,
    TrajectoryRecord,
    removal_sequence,
    run_trajectory,
    start_chain,
    start_original_chain,
    step_jante,
    step_jante_with_point,
    step_original,
)

__version__ = "0.1.0"
