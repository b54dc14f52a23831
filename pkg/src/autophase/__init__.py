"""Counter-propagating SPDC simulator with Franson-interferometer analysis.

Modules
-------
dispersion  material indices, waveguide modes, propagation constants, QPM
jsa         joint spectral amplitudes and their temporal counterparts
franson     coincidence maps, fringe visibilities, length sweeps
figures     ready-made source set-ups for the coincidence maps and sweeps
cli         the ``autophase`` command
"""
from .dispersion import (
    QpmCollinearSource,
    SellmeierModel,
    SlabWaveguideTE,
    TaylorDispersion,
    beta,
    beta_derivatives,
    delta_beta,
    load_material,
    refractive_index,
    slab_te_effective_index,
    solve_poling_period,
)
from .errors import (
    AliasRisk,
    AliasRiskWarning,
    AutophaseError,
    DegenerateKernel,
    DegenerateMismatch,
    FlatFringeWarning,
    ModeCutoff,
    OutOfRange,
    VisibilityClampWarning,
    ZeroVariance,
)
from .franson import (
    CollinearFamily,
    CounterpropFamily,
    DelayPair,
    classify_correlation,
    coincidence_probability,
    fourth_order_visibility,
    franson_map,
    fringe_scan,
    visibility_vs_length,
)
from .jsa import (
    FrequencyGrid,
    JointSpectralAmplitude,
    PumpPulse,
    build_collinear_jsa,
    build_counterprop_jsa,
    frequency_correlation,
    joint_temporal_intensity,
    marginal_spectrum,
    temporal_correlation,
)

__version__ = "0.1.0"
