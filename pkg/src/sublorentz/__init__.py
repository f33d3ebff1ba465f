"""Sub-Lorentzian longest paths: cones, antinorms, causal time forms, and a
direct-transcription maximizer of the length functional on group models."""

from .cones import (
    Antinorm,
    AxiomCheckReport,
    Cone,
    LinearImageCone,
    LorentzCone,
    LorentzSqrt,
    MinOfLinear,
    NEG_INF,
    PolyhedralCone,
    TimeCovector,
    ZeroAntinorm,
    antinorm_eval,
    check_antinorm_axioms,
    cone_contains,
    find_time_covector,
    is_pointed,
)
from .dynamics import (
    AdmissibilityReport,
    ControlSignal,
    Trajectory,
    admissibility_check,
    integrate,
    integrate_rk4_step2,
    oriented_area,
    sl_length,
    trajectory_to_csv,
    write_trajectory_csv,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    InvalidPointError,
    NotExactError,
    NotPointedError,
    StalledParameterError,
    SubLorentzError,
    UnboundedSectionError,
    UnsupportedStepError,
    WrongModelError,
)
from .groups import (
    AbelianGroup,
    CarnotAlgebra,
    CarnotGroup,
    EuclideanMetric,
    GroupModel,
    HyperbolicPlane,
    LeftInvariantQuadratic,
    LobachevskyMetric,
    RiemannianMetric,
    bch_log_product,
    exp_step,
    first_layer_projection,
    format_structure_constants,
    group_inv,
    group_mul,
    heisenberg_algebra,
    load_structure_constants,
    minkowski_area_algebra,
    natural_metric,
    parse_structure_constants,
    riemannian_norm,
)
from .solver import (
    HyperbolicityReport,
    ProblemInstance,
    SolveOptions,
    SolveReport,
    SolveStatus,
    abelian_closed_form,
    abelianized_upper_bound,
    check_hyperbolicity_desk,
    reachability_sample,
    solve_longest,
    solve_longest_reparametrized,
)
from .timeform import (
    GrowthReport,
    HyperbolicAB,
    LeftInvariantForm,
    TimeForm,
    UnitTimeSection,
    check_growth_condition,
    evaluate,
    exterior_derivative_fd,
    is_exact,
    potential,
    reparametrize,
    section_sup_norm,
    tau_duration,
)

__version__ = "0.1.0"
