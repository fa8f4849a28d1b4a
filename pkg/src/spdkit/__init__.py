"""Alpha-Beta log-det divergences between symmetric positive definite matrices."""
from .abld import (
    AbParams,
    BoundKind,
    DivergenceValue,
    DomainBound,
    Regime,
    ab_logdet,
    ab_logdet_dense,
    ab_logdet_spectrum,
    ab_terms,
    domain_bound,
    riemannian_quadratic_form,
)
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    EmptyInput,
    InputError,
    InvalidParams,
    NonPositiveEntry,
    NotIntegrable,
    NotNormalized,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
    NumericalFailure,
    ShapeMismatch,
    SpdKitError,
    TooLarge,
)
from .gaussian import (
    GaussianGammaResult,
    GaussianModel,
    bhattacharyya_classical,
    gaussian_bhattacharyya,
    gaussian_cauchy_schwarz,
    gaussian_gamma,
    gaussian_kl,
    gaussian_power_integral,
    gaussian_product_integral,
    gaussian_renyi,
    numeric_divergence_oracle,
)
from .multiway import (
    KroneckerSpd,
    expand_kronecker,
    kronecker_spectrum,
    multiway_hilbert,
    multiway_riemannian_sq,
    multiway_stein,
    normalize_factors,
)
from .named import (
    ATLAS,
    Named,
    ab_kernel,
    ab_trace_divergence,
    airm,
    alpha_logdet,
    alt_ab_logdet,
    beta_infinity,
    beta_logdet,
    generalized_stein,
    itakura_saito,
    logdet_zero,
    named_divergence,
    power_logdet,
    s_divergence,
    stein_loss,
)
from .spd import (
    EigPair,
    RelativeSpectrum,
    SpdMatrix,
    geometric_mean,
    make_spd,
    matrix_log,
    matrix_power,
    relative_spectrum,
)
from .spectral_gamma import (
    AbShrink,
    PowerMeanOrder,
    SubspaceTruncate,
    ThresholdShrink,
    apply_shrinkage,
    discrete_gamma_divergence,
    gamma_acs,
    gamma_cca,
    gamma_cca_trace_form,
    hilbert_metric,
    power_mean,
)
from .symmetrization import jeffreys_kldm, sym_ab_logdet, sym_ab_logdet_closed

__version__ = "0.1.0"
