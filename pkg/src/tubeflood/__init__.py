"""Quasi-1D tube-bundle waterflooding model.

Forward map: tube-length measure -> displacement characteristic (produced
water vs total produced volume).  Inverse map: displacement characteristic
plus its support bound -> recovered water profile, harmonic cumulative and
density, via a contracting fixed-point iteration.
"""

from ._kernels import BACKEND
from .analysis import (
    AmbiguityPair,
    SensitivityRecord,
    StabilityReport,
    ambiguity_pair,
    ambiguity_series_estimate,
    curve_gap,
    run_mc,
    sensitivity_constant,
    sinusoidal_perturbation,
    stability_bound,
    stability_experiment,
    summarize_mc,
)
from .errors import (
    ArgumentError,
    ConvergenceError,
    InternalConsistencyError,
    UndefinedValueError,
)
from .forward import (
    DisplacementCurve,
    build_curve,
    curve_readoff,
    endpoint_data,
    harmonic_cdf_samples,
    v_o,
    v_o_prime,
    v_w,
    v_w_prime,
    water_cut,
)
from .inverse import (
    RecoveryConfig,
    RecoveryResult,
    apply_T,
    h_of_alpha,
    kernel_K,
    recover,
    recover_cdf,
    recover_density,
    solve_fixed_point,
)
from .measures import (
    FluidParams,
    Measure,
    moment,
    random_atoms,
    scale,
    tail_kernel_integral,
    with_mass_factor,
)
from .tubes import (
    PumpHistory,
    TubeSimResult,
    TubeSystem,
    breakthrough_threshold,
    interface_position,
    reparam_xi,
    simulate,
)

__version__ = "0.1.0"
