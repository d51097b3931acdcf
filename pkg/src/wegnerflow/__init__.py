"""Flow-equation diagonalization of finite Hermitian matrices with
Fubini-Study geodesic verification of the induced state flow."""

from .operators import (  # noqa: F401
    WegnerFlowError,
    validate_hermitian,
    commutator,
    band_split,
    band_assemble,
    off_diag_norm_sq,
    expm_antihermitian,
    BandDecomposition,
)
from .flow import (  # noqa: F401
    Wegner,
    Band,
    FlowConfig,
    FlowTrajectory,
    integrate_flow,
    wegner_generator,
    band_generator,
    decay_identity_residual,
)
from .geometry import (  # noqa: F401
    ParametrizedFamily,
    CoordinateTrajectory,
    condition17,
    fs_metric,
    christoffel,
    arc_length,
    geodesic_residual,
    variational_gradient,
    xi_residual,
    generator_consistency,
    relation14_residual,
    case_classify,
    sandwiched_ode_residual,
)
from .models import (  # noqa: F401
    GhoSpec,
    SpinSpec,
    JcSpec,
    build_gho,
    build_spin,
    build_jc,
    displacement_family,
    squeeze_family,
    spin_family,
    jc_family,
    closed_form_flow,
    coordinate_projection,
)
from .verification import (  # noqa: F401
    CheckResult,
    geodesic_suite,
    run_all,
)

__version__ = "0.1.0"
