"""kobakit: certified Kobayashi-geometry estimates on bounded domains in C^d."""

__version__ = "0.1.0"

from .domains import (  # noqa: F401
    ConeReport,
    ConeSpec,
    ConvexSupport,
    Domain,
    Egg,
    Intersection,
    Polydisk,
    PsiSupported,
    UnitBall,
    UnitDisk,
    boundary_distance,
    cone_condition_check,
    disk_radius_in_complex_line,
    domain_from_json,
    membership,
    ray_to_boundary,
)
from .metric import MetricEstimate, distance, infinitesimal_metric, path_length  # noqa: F401
from .geodesics import (  # noqa: F401
    AlmostGeodesicCertificate,
    PathConfig,
    SampledPath,
    certify,
    minimize_path,
    quasi_to_almost,
    unit_speed_reparametrize,
)
from .goldilocks import (  # noqa: F401
    GoldilocksReport,
    condition1_test,
    condition2_fit,
    cone_log_bound,
    estimate_M,
    psi_threshold_test,
)
from .visibility import (  # noqa: F401
    ApproachSequence,
    VisibilityReport,
    gromov_boundedness_experiment,
    gromov_product,
    visibility_experiment,
)
from .dynamics import (  # noqa: F401
    OrbitTrace,
    OrbitVerdict,
    SelfMap,
    classify,
    iterate,
    multi_start_consistency,
    validate_map,
)
