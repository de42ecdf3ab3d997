"""Classical noise models: samplers and analytic statistics.

Four families are supported:

* Ornstein-Uhlenbeck -- stationary Gaussian, exponential autocorrelation
  ``K(tau) = (Gamma_xi * gamma_xi / 2) * exp(-gamma_xi * |tau|)``.
* Flicker (power law) -- zero-mean path whose one-sided spectral density
  follows ``A * omega**eta`` over the resolvable band ``[2*pi/T, pi/dt]``.
  eta = -2/-1/1/2 are the usual red/pink/blue/violet noises.
* Telegraph -- values in {-1, +1}; each grid step flips the sign
  independently with probability ``p_jump``.
* Mixture -- pointwise convex combination ``p*xi_a + (1-p)*xi_b`` of two
  statistically independent component paths.

All spectral densities returned by :func:`analytic_psd` are one-sided:
integrating a model's density over angular frequency (band-limited for
power laws) recovers the stationary variance of its sample paths.  Paths
are sampled on the integrator grid and held constant within each step, so
a path is fully described by its values at the grid points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.signal import lfilter

from .errors import GridMismatchError, ParameterError
from .grids import RngStream, TimeGrid

__all__ = [
    "OUNoise",
    "FlickerNoise",
    "TelegraphNoise",
    "MixtureNoise",
    "NoiseModel",
    "SampledPath",
    "sample_ou",
    "sample_flicker",
    "sample_telegraph",
    "sample_path",
    "mix",
    "analytic_psd",
    "stationary_variance",
]

# Stream-index displacement between the two component paths of a mixture.
MIXTURE_STREAM_OFFSET = 2**32


@dataclass(frozen=True)
class OUNoise:
    """Ornstein-Uhlenbeck model.

    Parameters
    ----------
    gamma_xi : float
        Inverse correlation time (rate, units omega).
    Gamma_xi : float
        Strength parameter; the stationary variance is ``Gamma_xi*gamma_xi/2``.
    """

    gamma_xi: float
    Gamma_xi: float

    def __post_init__(self):
        if not self.gamma_xi > 0:
            raise ParameterError(f"gamma_xi must be positive, got {self.gamma_xi}")
        if not self.Gamma_xi > 0:
            raise ParameterError(f"Gamma_xi must be positive, got {self.Gamma_xi}")

    @property
    def variance(self) -> float:
        return 0.5 * self.Gamma_xi * self.gamma_xi


@dataclass(frozen=True)
class FlickerNoise:
    """Power-law model with one-sided density ``A * omega**eta``.

    The band-limited variance depends on the sampling grid.  When
    ``target_variance`` is set, sampled paths are rescaled so their sample
    variance equals it exactly; otherwise the raw synthesis variance
    (approximately the band integral of ``A*omega**eta``) is retained.
    """

    A: float
    eta: float
    target_variance: Optional[float] = None

    def __post_init__(self):
        if not self.A > 0:
            raise ParameterError(f"A must be positive, got {self.A}")
        if not -2.0 <= self.eta <= 2.0:
            raise ParameterError(
                f"unsupported exponent eta={self.eta}; supported range is [-2, 2] "
                "(band-edge divergence outside it)"
            )
        if self.target_variance is not None and not self.target_variance > 0:
            raise ParameterError(
                f"target_variance must be positive, got {self.target_variance}"
            )


@dataclass(frozen=True)
class TelegraphNoise:
    """Per-step random telegraph model: sign flips with probability p_jump."""

    p_jump: float

    def __post_init__(self):
        if not 0.0 <= self.p_jump <= 1.0:
            raise ParameterError(f"p_jump must lie in [0, 1], got {self.p_jump}")


@dataclass(frozen=True)
class MixtureNoise:
    """Convex mixture ``p*a + (1-p)*b`` of two independent component models."""

    a: "NoiseModel"
    b: "NoiseModel"
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"mixing ratio p must lie in [0, 1], got {self.p}")
        if _mixture_depth(self) > 2:
            raise ParameterError("mixture nesting deeper than 2 is not supported")


NoiseModel = Union[OUNoise, FlickerNoise, TelegraphNoise, MixtureNoise]


def _mixture_depth(model: NoiseModel) -> int:
    if isinstance(model, MixtureNoise):
        return 1 + max(_mixture_depth(model.a), _mixture_depth(model.b))
    return 1


@dataclass(frozen=True)
class SampledPath:
    """One realization xi(t_n) on a uniform grid (dimensionless displacement)."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n_steps,):
            raise ParameterError(
                f"path length {values.shape} does not match grid "
                f"n_steps={self.grid.n_steps}"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("path contains non-finite samples")


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_ou(
    gamma_xi: float, Gamma_xi: float, grid: TimeGrid, stream: RngStream
) -> SampledPath:
    """Sample a stationary O-U path with the exact one-step update.

    ``xi_{n+1} = xi_n * exp(-gamma_xi*dt) + s * N(0,1)`` with
    ``s**2 = (Gamma_xi*gamma_xi/2) * (1 - exp(-2*gamma_xi*dt))`` and
    ``xi_0 ~ N(0, Gamma_xi*gamma_xi/2)``, so every marginal is the
    stationary distribution and the autocorrelation is exact at all lags.
    """
    model = OUNoise(gamma_xi=gamma_xi, Gamma_xi=Gamma_xi)
    rng = stream.generator()
    return SampledPath(grid, _ou_values(model, grid, rng))


def _ou_values(model: OUNoise, grid: TimeGrid, rng: np.random.Generator) -> np.ndarray:
    var = model.variance
    decay = np.exp(-model.gamma_xi * grid.dt)
    step_sd = np.sqrt(var * (1.0 - decay**2))
    draws = rng.standard_normal(grid.n_steps)
    x0 = np.sqrt(var) * draws[0]
    # AR(1) recursion in C via an IIR filter, seeded with the stationary x0.
    innov = step_sd * draws[1:]
    tail, _ = lfilter([1.0], [1.0, -decay], innov, zi=np.array([decay * x0]))
    return np.concatenate(([x0], tail))


def sample_telegraph(
    p_jump: float, grid: TimeGrid, stream: RngStream
) -> SampledPath:
    """Sample a per-step telegraph path with values in {-1, +1}.

    The initial sign is +1 or -1 with equal probability; each subsequent
    step flips the sign independently with probability ``p_jump``.
    """
    model = TelegraphNoise(p_jump=p_jump)
    rng = stream.generator()
    return SampledPath(grid, _telegraph_values(model, grid, rng))


def _telegraph_values(
    model: TelegraphNoise, grid: TimeGrid, rng: np.random.Generator
) -> np.ndarray:
    u = rng.random(grid.n_steps)
    sign0 = 1.0 if u[0] < 0.5 else -1.0
    steps = np.where(u[1:] < model.p_jump, -1.0, 1.0)
    values = np.empty(grid.n_steps)
    values[0] = sign0
    np.cumprod(steps, out=steps)
    values[1:] = sign0 * steps
    return values


def sample_flicker(
    A: float, eta: float, grid: TimeGrid, stream: RngStream,
    target_variance: Optional[float] = None,
) -> SampledPath:
    """Synthesize a power-law path by spectral shaping.

    Independent complex Gaussian coefficients with mean-square amplitude
    proportional to ``A * omega_k**eta`` are placed at the positive rfft
    frequencies, the zero-frequency coefficient is forced to 0 (zero mean),
    and the real path is obtained by inverse FFT.  If ``target_variance``
    is given the path is rescaled so its sample variance equals it.
    """
    model = FlickerNoise(A=A, eta=eta, target_variance=target_variance)
    rng = stream.generator()
    return SampledPath(grid, _flicker_values(model, grid, rng))


def _flicker_values(
    model: FlickerNoise, grid: TimeGrid, rng: np.random.Generator
) -> np.ndarray:
    n = grid.n_steps
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, d=grid.dt)
    n_bins = omega.size
    d_omega = 2.0 * np.pi / (n * grid.dt)
    density = model.A * omega[1:] ** model.eta

    coeff = np.zeros(n_bins, dtype=complex)
    re = rng.standard_normal(n_bins - 1)
    im = rng.standard_normal(n_bins - 1)
    # E|X_k|^2 * 2/n^2 = J(omega_k)*d_omega for interior bins (Parseval).
    amp = n * np.sqrt(0.5 * density * d_omega)
    coeff[1:] = amp * (re + 1j * im) / np.sqrt(2.0)
    if n % 2 == 0:
        # Nyquist bin of an even-length rfft is real and counted once.
        coeff[-1] = n * np.sqrt(density[-1] * d_omega) * re[-1]

    values = np.fft.irfft(coeff, n=n)
    if model.target_variance is not None:
        sd = values.std()
        if sd > 0:
            values *= np.sqrt(model.target_variance) / sd
    return values


def mix(path_a: SampledPath, path_b: SampledPath, p: float) -> SampledPath:
    """Pointwise convex combination ``p*xi_a + (1-p)*xi_b``."""
    if path_a.grid != path_b.grid:
        raise GridMismatchError("mixed paths must share the same time grid")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"mixing ratio p must lie in [0, 1], got {p}")
    return SampledPath(path_a.grid, p * path_a.values + (1.0 - p) * path_b.values)


def sample_path(model: NoiseModel, grid: TimeGrid, stream: RngStream) -> SampledPath:
    """Sample one realization of any noise model.

    Mixture components are sampled from independent streams: the first leaf
    uses ``stream`` itself and each further leaf uses the stream index
    displaced by successive multiples of ``MIXTURE_STREAM_OFFSET`` (so the
    two components of a plain mixture use indices ``j`` and ``j + 2**32``).
    """
    values, _ = _sample_values(model, grid, stream, leaf_counter=0)
    return SampledPath(grid, values)


def _sample_values(model, grid, stream, leaf_counter):
    if isinstance(model, MixtureNoise):
        va, leaf_counter = _sample_values(model.a, grid, stream, leaf_counter)
        vb, leaf_counter = _sample_values(model.b, grid, stream, leaf_counter)
        return model.p * va + (1.0 - model.p) * vb, leaf_counter
    rng = stream.shifted(leaf_counter * MIXTURE_STREAM_OFFSET).generator()
    if isinstance(model, OUNoise):
        values = _ou_values(model, grid, rng)
    elif isinstance(model, TelegraphNoise):
        values = _telegraph_values(model, grid, rng)
    elif isinstance(model, FlickerNoise):
        values = _flicker_values(model, grid, rng)
    else:
        raise ParameterError(f"unknown noise model {model!r}")
    return values, leaf_counter + 1


# ---------------------------------------------------------------------------
# analytic statistics
# ---------------------------------------------------------------------------

def analytic_psd(model: NoiseModel, omega, grid: TimeGrid) -> np.ndarray:
    """One-sided spectral density of ``model`` at angular frequency ``omega``.

    The grid supplies the per-step flip rate for telegraph noise
    (``r = p_jump/dt``) and the resolvable band for flicker noise.  For a
    flicker model with ``eta < 0`` the density at ``omega = 0`` is returned
    as ``+inf``; callers must band-limit.

    Densities integrate to the stationary variance over [0, inf)
    (band-limited for flicker), which is twice the textbook two-sided
    normalization of the Lorentzian forms.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ParameterError("omega must be non-negative")
    if isinstance(model, OUNoise):
        g = model.gamma_xi
        return (model.Gamma_xi * g**2 / np.pi) / (omega**2 + g**2)
    if isinstance(model, TelegraphNoise):
        r = model.p_jump / grid.dt
        if r == 0.0:
            return np.where(omega == 0.0, np.inf, 0.0)
        return (4.0 * r / np.pi) / (omega**2 + (2.0 * r) ** 2)
    if isinstance(model, FlickerNoise):
        amp = _flicker_amplitude(model, grid)
        with np.errstate(divide="ignore"):
            dens = amp * omega**model.eta
        if model.eta < 0:
            dens = np.where(omega == 0.0, np.inf, dens)
        elif model.eta > 0:
            dens = np.where(omega == 0.0, 0.0, dens)
        return dens
    if isinstance(model, MixtureNoise):
        # Independent component paths: variances add with weights p^2, (1-p)^2.
        wa, wb = model.p**2, (1.0 - model.p) ** 2
        return wa * analytic_psd(model.a, omega, grid) + wb * analytic_psd(
            model.b, omega, grid
        )
    raise ParameterError(f"unknown noise model {model!r}")


def _band_integral_power_law(eta: float, lo: float, hi: float) -> float:
    """Integral of omega**eta over [lo, hi]."""
    if eta == -1.0:
        return np.log(hi / lo)
    e = eta + 1.0
    return (hi**e - lo**e) / e


def _flicker_amplitude(model: FlickerNoise, grid: TimeGrid) -> float:
    """Effective prefactor; rescaled when a target variance is declared."""
    if model.target_variance is None:
        return model.A
    band = _band_integral_power_law(model.eta, grid.omega_min, grid.omega_max)
    return model.target_variance / band


def stationary_variance(model: NoiseModel, grid: Optional[TimeGrid] = None) -> float:
    """Stationary variance of the model.

    Flicker variance is cutoff-dependent: unless the model declares a
    target variance, a grid must be supplied and the band-limited integral
    of ``A*omega**eta`` over ``[2*pi/T, pi/dt]`` is returned.
    """
    if isinstance(model, OUNoise):
        return model.variance
    if isinstance(model, TelegraphNoise):
        return 1.0
    if isinstance(model, FlickerNoise):
        if model.target_variance is not None:
            return model.target_variance
        if grid is None:
            raise ParameterError(
                "flicker variance is cutoff-dependent; declare a grid or a "
                "target_variance"
            )
        return model.A * _band_integral_power_law(
            model.eta, grid.omega_min, grid.omega_max
        )
    if isinstance(model, MixtureNoise):
        wa, wb = model.p**2, (1.0 - model.p) ** 2
        return wa * stationary_variance(model.a, grid) + wb * stationary_variance(
            model.b, grid
        )
    raise ParameterError(f"unknown noise model {model!r}")
