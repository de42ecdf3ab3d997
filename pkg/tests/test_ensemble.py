import numpy as np
import pytest

from entshield import (
    EnsemblePoint,
    GridMismatchError,
    OUNoise,
    RngStream,
    SystemParams,
    TimeGrid,
    analytic_constant_G,
    convergence_check,
    run_ensemble,
    sample_path,
)
from entshield.dynamics import BELL_INIT
from entshield.ensemble import halved_dt_point

GRID = TimeGrid(dt=1e-2, n_steps=501)
NOISE = OUNoise(gamma_xi=15.0, Gamma_xi=2.0)


def point(n_traj=200, noise=NOISE, grid=GRID, seed=77, stride=50, **params):
    return EnsemblePoint(
        params=SystemParams(**params), noise=noise, grid=grid,
        n_traj=n_traj, master_seed=seed, stride=stride,
    )


def test_single_deterministic_trajectory_matches_oracle():
    pt = point(n_traj=1, noise=None)
    result = run_ensemble(pt, workers=1)
    assert np.all(result.concurrence.stderr == 0.0)
    for k, t in enumerate(result.times):
        exact = analytic_constant_G(SystemParams(), t, BELL_INIT)
        assert abs(result.rho_23[k] - exact.atom1 * np.conj(exact.atom2)) < 1e-8


def test_decoupled_atoms_keep_full_concurrence():
    pt = point(n_traj=16, G0=(0.0, 0.0))
    result = run_ensemble(pt, workers=1)
    assert np.allclose(result.concurrence.values, 1.0, atol=1e-12)


def test_worker_count_does_not_change_results():
    pt = point(n_traj=700)  # spans two blocks
    serial = run_ensemble(pt, workers=1)
    two = run_ensemble(pt, workers=2)
    three = run_ensemble(pt, workers=3)
    for other in (two, three):
        assert np.array_equal(serial.concurrence.values, other.concurrence.values)
        assert np.array_equal(serial.concurrence.stderr, other.concurrence.stderr)
        assert np.array_equal(serial.rho_23, other.rho_23)
        assert np.array_equal(serial.mean_norm, other.mean_norm)


def test_trajectories_use_independent_streams():
    a = sample_path(NOISE, GRID, RngStream(77, 0)).values
    b = sample_path(NOISE, GRID, RngStream(77, 1)).values
    assert not np.array_equal(a, b)


def test_rerun_is_bit_identical():
    pt = point(n_traj=64)
    first = run_ensemble(pt, workers=1)
    second = run_ensemble(pt, workers=1)
    assert np.array_equal(first.concurrence.values, second.concurrence.values)
    assert np.array_equal(first.rho_22, second.rho_22)


def test_stderr_shrinks_with_ensemble_size():
    small = run_ensemble(point(n_traj=400), workers=1)
    large = run_ensemble(point(n_traj=1600), workers=1)
    k = len(small.times) // 2
    ratio = large.concurrence.stderr[k] / small.concurrence.stderr[k]
    assert 0.25 < ratio < 0.8  # expect about 1/2


def test_doubling_trajectories_moves_within_errors():
    base = run_ensemble(point(n_traj=500), workers=1)
    double = run_ensemble(point(n_traj=1000), workers=1)
    pooled = np.hypot(base.concurrence.stderr, double.concurrence.stderr)
    diff = np.abs(base.concurrence.values - double.concurrence.values)
    keep = pooled > 0
    assert np.all(diff[keep] < 3.0 * pooled[keep])


def test_convergence_check_reports():
    result = run_ensemble(point(n_traj=32), workers=1)
    same = convergence_check(result, result, tol=1e-12)
    assert same.passed and same.max_abs_diff == 0.0

    other = run_ensemble(point(n_traj=32, seed=78), workers=1)
    strict = convergence_check(result, other, tol=0.0)
    assert not strict.passed


def test_convergence_check_rejects_grid_mismatch():
    a = run_ensemble(point(n_traj=8), workers=1)
    short = EnsemblePoint(params=SystemParams(), noise=NOISE,
                          grid=TimeGrid(dt=1e-2, n_steps=301), n_traj=8,
                          master_seed=77, stride=50)
    b = run_ensemble(short, workers=1)
    with pytest.raises(GridMismatchError):
        convergence_check(a, b, tol=1e-3)


def test_constant_coupling_halved_dt_agreement():
    pt = EnsemblePoint(params=SystemParams(), noise=None,
                       grid=TimeGrid(dt=1e-3, n_steps=20001),
                       n_traj=1, master_seed=1, stride=500)
    coarse = run_ensemble(pt, workers=1)
    fine = run_ensemble(halved_dt_point(pt), workers=1)
    report = convergence_check(coarse, fine, tol=1e-6)
    assert report.passed, report.max_abs_diff


def test_value_at_picks_nearest_time():
    result = run_ensemble(point(n_traj=8), workers=1)
    c, se = result.value_at(result.times[3] + 1e-9)
    assert c == result.concurrence.values[3]
    assert se == result.concurrence.stderr[3]


def test_norm_bound_holds_across_ensemble():
    result = run_ensemble(point(n_traj=100), workers=1)
    assert np.max(result.mean_norm) <= 1.0 + 1e-6
