import numpy as np
import pytest
from scipy.integrate import quad

from entshield import (
    FlickerNoise,
    MixtureNoise,
    OUNoise,
    ParameterError,
    RngStream,
    SampledPath,
    TimeGrid,
    analytic_psd,
    empirical_autocorr,
    hf_fraction,
    periodogram,
    rank_by_hf_power,
    sample_ou,
    sample_path,
    sample_telegraph,
)

GRID = TimeGrid(dt=0.01, n_steps=2**20)


def white_path(grid, seed, scale=1.0):
    rng = RngStream(seed, 0).generator()
    return SampledPath(grid, scale * rng.standard_normal(grid.n_steps))


# ---------------------------------------------------------------------------
# periodogram
# ---------------------------------------------------------------------------

def test_periodogram_power_conservation():
    grid = TimeGrid(dt=0.01, n_steps=2**17)
    path = white_path(grid, 21)
    est = periodogram(path, n_segments=16)
    total = np.trapezoid(est.density, est.omega)
    assert abs(total - path.values.var()) / path.values.var() < 0.02


def test_periodogram_constant_input_has_no_power():
    grid = TimeGrid(dt=0.01, n_steps=2**14)
    est = periodogram(SampledPath(grid, np.ones(grid.n_steps)), n_segments=8)
    assert np.trapezoid(est.density, est.omega) == 0.0


def test_periodogram_matches_ou_density_midband():
    # generator/estimator cross-check: binned estimate within 10% of the
    # analytic density over [0.5 gamma, 5 gamma]
    gamma, Gamma = 15.0, 2.0
    path = sample_ou(gamma, Gamma, GRID, RngStream(22, 0))
    est = periodogram(path, n_segments=64)
    keep = (est.omega >= 0.5 * gamma) & (est.omega <= 5.0 * gamma)
    ref = analytic_psd(OUNoise(gamma, Gamma), est.omega[keep], GRID)
    dens = est.density[keep]
    edges = np.linspace(0, keep.sum(), 21).astype(int)
    for lo, hi in zip(edges[:-1], edges[1:]):
        rel = abs(dens[lo:hi].mean() - ref[lo:hi].mean()) / ref[lo:hi].mean()
        assert rel < 0.10


def test_periodogram_additivity_of_power():
    grid = TimeGrid(dt=0.01, n_steps=2**17)
    a = white_path(grid, 23).values
    b = white_path(grid, 24).values
    est = periodogram(SampledPath(grid, a + b), n_segments=16)
    total = np.trapezoid(est.density, est.omega)
    assert abs(total - 2.0) / 2.0 < 0.05


def test_periodogram_rejects_short_segments():
    grid = TimeGrid(dt=0.01, n_steps=256)
    with pytest.raises(ParameterError):
        periodogram(white_path(grid, 25), n_segments=32)


# ---------------------------------------------------------------------------
# empirical autocorrelation
# ---------------------------------------------------------------------------

def test_autocorr_lag_zero_is_sample_variance():
    grid = TimeGrid(dt=0.01, n_steps=4096)
    path = white_path(grid, 26, scale=2.3)
    est = empirical_autocorr(path, 10)
    assert np.isclose(est[0], path.values.var(), rtol=1e-10)


def test_autocorr_telegraph_markov_band():
    grid = TimeGrid(dt=1.0, n_steps=1_000_000)
    path = sample_telegraph(0.35, grid, RngStream(27, 0))
    est = empirical_autocorr(path, 20)
    for k in range(1, 21):
        ref = 0.3**k
        sigma = np.sqrt((1.0 - ref**2) / grid.n_steps)
        assert abs(est[k] - ref) < 3.0 * sigma


def test_autocorr_ou_closed_form_band():
    gamma, Gamma = 15.0, 2.0
    grid = TimeGrid(dt=0.01, n_steps=1_000_000)
    path = sample_ou(gamma, Gamma, grid, RngStream(28, 0))
    max_lag = 60
    est = empirical_autocorr(path, max_lag)
    lags = np.arange(max_lag + 1) * grid.dt
    ref = 0.5 * Gamma * gamma * np.exp(-gamma * lags)
    assert np.linalg.norm(est - ref) / np.linalg.norm(ref) < 0.05


def test_autocorr_rejects_large_lag():
    grid = TimeGrid(dt=1.0, n_steps=1000)
    with pytest.raises(ParameterError):
        empirical_autocorr(white_path(grid, 29), 100)


# ---------------------------------------------------------------------------
# high-frequency share
# ---------------------------------------------------------------------------

def test_hf_fraction_white_is_band_ratio():
    grid = TimeGrid(dt=0.01, n_steps=2**16)
    band = grid.omega_max
    report = hf_fraction(FlickerNoise(A=1.0, eta=0.0), 0.25 * band, band, grid)
    assert abs(report.hf_fraction - 0.75) < 1e-6


def test_hf_fraction_violet_midpoint():
    # integral of omega^2: fraction above band/2 is 1 - (1/2)^3 = 7/8
    grid = TimeGrid(dt=0.01, n_steps=2**16)
    band = grid.omega_max
    report = hf_fraction(FlickerNoise(A=1.0, eta=2.0), band / 2.0, band, grid)
    assert abs(report.hf_fraction - 7.0 / 8.0) < 1e-6


def test_hf_fraction_ou_closed_form():
    gamma = 5.0
    grid = TimeGrid(dt=0.001, n_steps=2**16)
    band = grid.omega_max
    omega_c = gamma
    report = hf_fraction(OUNoise(gamma, 2.0), omega_c, band, grid)
    expected = (np.arctan(band / gamma) - np.arctan(1.0)) / np.arctan(band / gamma)
    assert abs(report.hf_fraction - expected) < 1e-6


def test_hf_fraction_estimate_route():
    grid = TimeGrid(dt=0.01, n_steps=2**18)
    model = FlickerNoise(A=1.0, eta=2.0)
    est = periodogram(sample_path(model, grid, RngStream(30, 0)), n_segments=32)
    band = grid.omega_max
    analytic = hf_fraction(model, band / 2, band, grid)
    estimated = hf_fraction(est, band / 2, band)
    assert abs(estimated.hf_fraction - analytic.hf_fraction) < 0.02


def test_hf_fraction_monotone_in_boundary():
    grid = TimeGrid(dt=0.01, n_steps=2**14)
    model = OUNoise(10.0, 2.0)
    band = grid.omega_max
    fractions = [hf_fraction(model, wc, band, grid).hf_fraction
                 for wc in np.linspace(0.5, band * 0.9, 12)]
    assert all(a >= b - 1e-12 for a, b in zip(fractions, fractions[1:]))


def test_hf_fraction_equal_variance_wider_is_higher():
    grid = TimeGrid(dt=0.001, n_steps=2**14)
    band = grid.omega_max
    # equal variance 10, widths 20 vs 5
    wide = OUNoise(gamma_xi=20.0, Gamma_xi=1.0)
    narrow = OUNoise(gamma_xi=5.0, Gamma_xi=4.0)
    for wc in (1.0, 5.0, 20.0, 100.0):
        assert (hf_fraction(wide, wc, band, grid).hf_fraction
                > hf_fraction(narrow, wc, band, grid).hf_fraction)


def test_hf_fraction_rejects_out_of_band_boundary():
    grid = TimeGrid(dt=0.01, n_steps=2**14)
    with pytest.raises(ParameterError):
        hf_fraction(OUNoise(10.0, 2.0), grid.omega_max * 2, grid.omega_max, grid)
    with pytest.raises(ParameterError):
        # diverging power law: boundary below the lowest resolvable bin
        hf_fraction(FlickerNoise(A=1.0, eta=-1.0), grid.omega_min / 10,
                    grid.omega_max, grid)


# ---------------------------------------------------------------------------
# ranking
# ---------------------------------------------------------------------------

def test_rank_white_vs_violet():
    grid = TimeGrid(dt=0.01, n_steps=2**14)
    band = grid.omega_max
    white = FlickerNoise(A=1.0, eta=0.0)
    violet = FlickerNoise(A=1.0, eta=2.0)
    ranked = rank_by_hf_power([white, violet], band / 2, band, grid)
    assert ranked[0][0] is violet


def test_rank_ties_keep_input_order():
    grid = TimeGrid(dt=0.01, n_steps=2**14)
    a = OUNoise(10.0, 2.0)
    b = OUNoise(10.0, 2.0)
    ranked = rank_by_hf_power([a, b], 1.0, grid.omega_max, grid)
    assert ranked[0][0] is a and ranked[1][0] is b


def test_rank_is_deterministic():
    grid = TimeGrid(dt=0.01, n_steps=2**14)
    models = [OUNoise(90.0, 1.0), FlickerNoise(1.0, 2.0, target_variance=12.0),
              MixtureNoise(FlickerNoise(1.0, 2.0, target_variance=12.0),
                           OUNoise(90.0, 1.0), 0.5)]
    first = rank_by_hf_power(models, 1.0, grid.omega_max, grid)
    second = rank_by_hf_power(models, 1.0, grid.omega_max, grid)
    assert [id(m) for m, _ in first] == [id(m) for m, _ in second]


def test_rank_needs_two_models():
    grid = TimeGrid(dt=0.01, n_steps=2**14)
    with pytest.raises(ParameterError):
        rank_by_hf_power([OUNoise(1.0, 1.0)], 1.0, grid.omega_max, grid)


def test_mixture_psd_against_periodogram_of_mixed_paths():
    # independent-path mixing halves the density of two identical models;
    # the periodogram of actual mixed paths must agree
    grid = TimeGrid(dt=0.01, n_steps=2**18)
    model = OUNoise(15.0, 2.0)
    mixture = MixtureNoise(model, model, 0.5)
    path = sample_path(mixture, grid, RngStream(31, 0))
    est = periodogram(path, n_segments=64)
    keep = (est.omega >= 7.5) & (est.omega <= 75.0)
    ref = analytic_psd(mixture, est.omega[keep], grid)
    rel = abs(est.density[keep].mean() - ref.mean()) / ref.mean()
    assert rel < 0.05
