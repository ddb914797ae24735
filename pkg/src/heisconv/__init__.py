"""Numerical tools for convolution with smooth measures on graph-like
hypersurfaces of the Heisenberg group H^n: analytic families of smoothed
kernels, Laguerre-basis multiplier entries, grid convolution and probes of
the L^p -> L^q type set.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    DimensionError,
    DomainError,
    HeisconvError,
    NumericError,
    PoleError,
    RangeError,
    ResolutionError,
)
from .hgroup import HPoint, group_inv, group_mul, group_mul_arrays, symplectic_form, symplectic_form_arrays
from .measures import (
    CutoffSpec,
    GraphMeasure,
    PhaseSpec,
    bump_hat,
    bump_hat_l1,
    eval_bump,
    eval_density,
    eval_phase,
    eval_phase_gradient,
    phase_gradient_sup,
)
from .specfun import F_nk, F_nk_hat, fourier_quadrature, gamma_complex, laguerre, laguerre_all, rgamma_complex
from .kernels import (
    I_z_eval,
    MollifierSpec,
    SmoothedKernel,
    decay_profile,
    decay_trend,
    kernel_lp_norm,
    mollifier_value,
    nu_conv_J,
    nu_conv_J_lp_norm,
    smoothed_kernel_eval,
)
from .spectral import (
    DiagonalEntry,
    MultiIndex,
    PoliradialKernel,
    R_lambda_hat,
    R_lambda_sup,
    mu_bound,
    mu_bound_sweep,
    mu_entry,
    plancherel_constant,
    plancherel_ratio,
    radial_factor,
    upsilon_bound,
    upsilon_bound_sweep,
    upsilon_entry,
    vdc_envelope,
)
from .convolve import (
    Grid,
    QuadratureSpec,
    SampledField,
    apply_adjoint,
    apply_Tnu,
    commutation_gap,
    load_field,
    lp_norm,
    operator_matrix,
    save_field,
    translate,
)
from .typeset import (
    ConvContext,
    ScalingLadder,
    ScanResult,
    Triangle,
    TypePoint,
    contains,
    dual_scaling_experiment,
    pq_norm_lower_bound,
    predicted_exponent,
    scaling_experiment,
    scan,
    thm1_triangle,
    thm1_vertex,
    thm2_triangle,
    thm2_vertex,
)
