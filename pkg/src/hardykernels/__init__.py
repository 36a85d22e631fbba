"""Heat kernels of radial fractional Laplacians with Hardy potentials."""
from ._version import __version__
from .specfun import (
    AccuracyBudget,
    ChannelParams,
    CouplingParams,
    DomainError,
    bessel_i_scaled,
    bessel_j,
    coupling_phi,
    coupling_psi,
    eta_critical,
    eta_from_kappa,
    hyp2f1_regularized,
    kappa_crit,
    log_gamma,
    stable_density,
)
from .kernels import (
    Envelope,
    EvalPoint,
    EvalResult,
    QuadratureError,
    bessel_heat_2,
    cauchy_heat_closed,
    free_envelope,
    levy_kernel,
    spectral_heat,
    subordinated_heat,
)
from .perturbation import (
    GroundState,
    SeriesControl,
    duhamel_term,
    perturbed_envelope,
    perturbed_heat,
)
from .forms import (
    FormValue,
    TestFunction,
    dirichlet_form,
    gsr_residual,
    hardy_form,
    integral_regimes,
    semigroup_form,
    standard_suite,
)
from .certifier import (
    CheckReport,
    ConstantEstimate,
    GridSpec,
    check_forms,
    check_identities,
    check_normalization,
    check_regimes,
    check_sandwich,
    check_threeg,
    fit_constants,
    run_suite,
)

__all__ = [
    "__version__",
    "AccuracyBudget",
    "ChannelParams",
    "CouplingParams",
    "DomainError",
    "bessel_i_scaled",
    "bessel_j",
    "coupling_phi",
    "coupling_psi",
    "eta_critical",
    "eta_from_kappa",
    "hyp2f1_regularized",
    "kappa_crit",
    "log_gamma",
    "stable_density",
    "Envelope",
    "EvalPoint",
    "EvalResult",
    "QuadratureError",
    "bessel_heat_2",
    "cauchy_heat_closed",
    "free_envelope",
    "levy_kernel",
    "spectral_heat",
    "subordinated_heat",
    "GroundState",
    "SeriesControl",
    "duhamel_term",
    "perturbed_envelope",
    "perturbed_heat",
    "FormValue",
    "TestFunction",
    "dirichlet_form",
    "gsr_residual",
    "hardy_form",
    "integral_regimes",
    "semigroup_form",
    "standard_suite",
    "CheckReport",
    "ConstantEstimate",
    "GridSpec",
    "check_forms",
    "check_identities",
    "check_normalization",
    "check_regimes",
    "check_sandwich",
    "check_threeg",
    "fit_constants",
    "run_suite",
]
