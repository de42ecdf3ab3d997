"""Spectral estimation and the high-frequency-share metric.

The protection strength of a classical noise is predicted by how much of
its spectral power sits above a boundary frequency tied to the quantum
noise width.  This module estimates spectra from sampled paths (Welch),
computes empirical autocorrelations, and evaluates the high-frequency
power/fraction for analytic models and estimates alike.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate, signal

from .errors import ParameterError
from .grids import TimeGrid
from .noise import FlickerNoise, MixtureNoise, NoiseModel, SampledPath, analytic_psd

__all__ = [
    "SpectrumEstimate",
    "HfReport",
    "periodogram",
    "empirical_autocorr",
    "hf_fraction",
    "rank_by_hf_power",
]


@dataclass(frozen=True)
class SpectrumEstimate:
    """One-sided Welch estimate; integral over omega equals sample variance."""

    omega: np.ndarray
    density: np.ndarray
    n_segments: int
    resolution: float

    def __post_init__(self):
        if self.omega.shape != self.density.shape:
            raise ParameterError("omega and density must have equal length")
        if np.any(np.diff(self.omega) <= 0):
            raise ParameterError("frequencies must be strictly increasing")
        if np.any(self.density < 0):
            raise ParameterError("densities must be non-negative")


@dataclass(frozen=True)
class HfReport:
    """Share of spectral power above the boundary frequency omega_c."""

    omega_c: float
    hf_fraction: float
    total_power: float

    @property
    def hf_power(self) -> float:
        return self.hf_fraction * self.total_power


def periodogram(path: SampledPath, n_segments: int = 8) -> SpectrumEstimate:
    """Welch-averaged one-sided periodogram (Hann window, 50% overlap).

    Normalized as a density over angular frequency, so the trapezoid
    integral of the estimate recovers the path's sample variance (within
    the Hann windowing bias, about 2%).
    """
    if n_segments < 1:
        raise ParameterError("n_segments must be at least 1")
    n = path.grid.n_steps
    nperseg = (2 * n) // (n_segments + 1)
    if nperseg < 64:
        raise ParameterError(
            f"path too short: {n_segments} half-overlapping segments of a "
            f"{n}-sample path are {nperseg} samples each (< 64)"
        )
    freq, pxx = signal.welch(
        path.values,
        fs=1.0 / path.grid.dt,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend="constant",
        scaling="density",
    )
    # scipy densities are per cyclic frequency; convert to per rad/time.
    omega = 2.0 * np.pi * freq
    density = pxx / (2.0 * np.pi)
    return SpectrumEstimate(
        omega=omega,
        density=density,
        n_segments=n_segments,
        resolution=omega[1] - omega[0],
    )


def empirical_autocorr(path: SampledPath, max_lag: int) -> np.ndarray:
    """Biased autocorrelation estimate K(k) = (1/N) sum_n x_n x_{n+k}.

    The sample mean is removed first; lag 0 therefore equals the (biased)
    sample variance exactly.
    """
    n = path.grid.n_steps
    if not 0 <= max_lag < n / 10:
        raise ParameterError(
            f"max_lag must satisfy 0 <= max_lag < n_steps/10 = {n / 10:.0f}, "
            f"got {max_lag}"
        )
    x = path.values - path.values.mean()
    n_fft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(x, n_fft)
    acov = np.fft.irfft(spec * np.conj(spec), n_fft)[: max_lag + 1]
    return acov / n


def _analytic_hf(model: NoiseModel, omega_c, band_max, grid) -> HfReport:
    lo = _lower_limit(model, grid)
    if not lo <= omega_c < band_max:
        raise ParameterError(
            f"omega_c={omega_c} outside the resolvable band [{lo:.4g}, {band_max:.4g})"
        )

    def dens(w):
        return analytic_psd(model, w, grid)

    low, _ = integrate.quad(dens, lo, omega_c, limit=200)
    high, _ = integrate.quad(dens, omega_c, band_max, limit=200)
    total = low + high
    if not total > 0:
        raise ParameterError("model has no spectral power in the band")
    return HfReport(omega_c=omega_c, hf_fraction=high / total, total_power=total)


def _lower_limit(model: NoiseModel, grid) -> float:
    """0 except for diverging power laws, which start at the lowest bin."""
    if isinstance(model, FlickerNoise) and model.eta < 0:
        return grid.omega_min
    if isinstance(model, MixtureNoise):
        return max(_lower_limit(model.a, grid), _lower_limit(model.b, grid))
    return 0.0


def _estimate_hf(est: SpectrumEstimate, omega_c, band_max) -> HfReport:
    omega, dens = est.omega, est.density
    keep = omega <= band_max
    omega, dens = omega[keep], dens[keep]
    if omega.size < 3 or not omega[0] <= omega_c < omega[-1]:
        raise ParameterError(
            f"omega_c={omega_c} outside the estimated band "
            f"[{omega[0]:.4g}, {omega[-1]:.4g})"
        )
    total = np.trapezoid(dens, omega)
    dens_c = np.interp(omega_c, omega, dens)
    above = omega > omega_c
    w_hi = np.concatenate(([omega_c], omega[above]))
    d_hi = np.concatenate(([dens_c], dens[above]))
    high = np.trapezoid(d_hi, w_hi)
    if not total > 0:
        raise ParameterError("spectrum estimate carries no power")
    return HfReport(omega_c=omega_c, hf_fraction=high / total, total_power=total)


def hf_fraction(
    model_or_spectrum: Union[NoiseModel, SpectrumEstimate],
    omega_c: float,
    band_max: float,
    grid: Optional[TimeGrid] = None,
) -> HfReport:
    """Fraction of spectral power above ``omega_c`` within ``[0+, band_max]``.

    Analytic models are integrated by adaptive quadrature (a grid is
    required for telegraph and flicker models); spectrum estimates by
    trapezoid sums with the boundary interpolated.  The lower limit is the
    lowest resolvable frequency for diverging power laws, 0 otherwise.
    """
    if not 0 < omega_c < band_max:
        raise ParameterError("need 0 < omega_c < band_max")
    if isinstance(model_or_spectrum, SpectrumEstimate):
        return _estimate_hf(model_or_spectrum, omega_c, band_max)
    if grid is None:
        raise ParameterError("a grid is required to evaluate analytic models")
    return _analytic_hf(model_or_spectrum, omega_c, band_max, grid)


def rank_by_hf_power(
    models: Sequence[NoiseModel],
    omega_c: float,
    band_max: float,
    grid: TimeGrid,
) -> list[tuple[NoiseModel, HfReport]]:
    """Rank models by descending spectral power above the boundary.

    Absolute power above omega_c (fraction times total power) is the
    predictor of protection strength; normalized fractions alone cannot
    order noises of different overall strength.  Ties keep input order.
    """
    if len(models) < 2:
        raise ParameterError("ranking needs at least 2 models")
    reports = [hf_fraction(m, omega_c, band_max, grid) for m in models]
    order = sorted(range(len(models)), key=lambda i: -reports[i].hf_power)
    return [(models[i], reports[i]) for i in order]
