"""Monte Carlo simulation of noise-assisted entanglement protection.

Two resonant atoms couple to a leaky cavity through a standing wave; random
atomic displacements make the couplings stochastic.  The package samples
classical noise processes (Ornstein-Uhlenbeck, power-law, telegraph, and
mixtures), integrates the single-excitation amplitude equations with an
exponential-kernel pseudomode closure, and quantifies entanglement
protection via ensemble-averaged Wootters concurrence and high-frequency
spectral shares.
"""

from .dynamics import (
    BELL_INIT,
    AmplitudeState,
    SystemParams,
    TrajectoryRecord,
    analytic_constant_G,
    coupling_at,
    rhs,
    run_trajectory,
    step_rk4,
)
from .ensemble import (
    EnsemblePoint,
    EnsembleResult,
    convergence_check,
    run_ensemble,
)
from .errors import (
    ConfigError,
    DivergenceError,
    GridMismatchError,
    ParameterError,
    ValidationError,
)
from .grids import RngStream, TimeGrid
from .noise import (
    FlickerNoise,
    MixtureNoise,
    NoiseModel,
    OUNoise,
    SampledPath,
    TelegraphNoise,
    analytic_psd,
    mix,
    sample_flicker,
    sample_ou,
    sample_path,
    sample_telegraph,
    stationary_variance,
)
from .observables import (
    ConcurrenceSeries,
    density_matrix_from_moments,
    reduced_density_matrix,
    wootters_concurrence,
    xstate_concurrence,
)
from .spectral import (
    HfReport,
    SpectrumEstimate,
    empirical_autocorr,
    hf_fraction,
    periodogram,
    rank_by_hf_power,
)

__version__ = "0.1.0"
