"""Monte Carlo ensemble engine.

Trajectories are generated in fixed-size blocks: trajectory j always draws
its noise from RngStream(master_seed, j) (component b of a mixture from
index j + 2**32), blocks are integrated vectorized, and the reduction runs
in ascending trajectory order.  Because block boundaries do not depend on
the worker count, results are bit-identical for any degree of parallelism.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dynamics import BELL_INIT, SystemParams, integrate_block
from .errors import DivergenceError, GridMismatchError, ParameterError
from .grids import RngStream, TimeGrid
from .noise import NoiseModel, sample_path
from .observables import (
    ConcurrenceSeries,
    density_matrix_from_moments,
    wootters_concurrence,
)

__all__ = ["EnsemblePoint", "EnsembleResult", "ConvergenceReport",
           "run_ensemble", "convergence_check"]

BLOCK_SIZE = 500
N_BATCHES = 20


@dataclass(frozen=True)
class EnsemblePoint:
    """Everything needed to reproduce one ensemble."""

    params: SystemParams
    noise: Optional[NoiseModel]
    grid: TimeGrid
    n_traj: int = 1000
    master_seed: int = 20240901
    stride: int = 100

    def __post_init__(self):
        if self.n_traj < 1:
            raise ParameterError(f"n_traj must be >= 1, got {self.n_traj}")


@dataclass
class EnsembleResult:
    times: np.ndarray
    concurrence: ConcurrenceSeries
    rho_22: np.ndarray
    rho_33: np.ndarray
    rho_23: np.ndarray
    mean_norm: np.ndarray
    mean_pure_concurrence: np.ndarray
    n_traj: int
    master_seed: int
    config_digest: str
    warnings: list[str] = field(default_factory=list)

    def value_at(self, t: float) -> tuple[float, float]:
        """Concurrence and its standard error at the recorded time nearest t."""
        k = int(np.argmin(np.abs(self.times - t)))
        return float(self.concurrence.values[k]), float(self.concurrence.stderr[k])


def _noise_block(noise, grid, master_seed, start, stop) -> np.ndarray:
    block = np.empty((stop - start, grid.n_steps))
    for row, j in enumerate(range(start, stop)):
        block[row] = sample_path(noise, grid, RngStream(master_seed, j)).values
    return block


def _run_block(point: EnsemblePoint, start: int, stop: int) -> np.ndarray:
    if point.noise is None:
        xi = np.zeros((stop - start, point.grid.n_steps))
    else:
        xi = _noise_block(point.noise, point.grid, point.master_seed, start, stop)
    try:
        return integrate_block(point.params, xi, point.grid, BELL_INIT, point.stride)
    except DivergenceError as err:
        raise DivergenceError(
            f"trajectory {start + (err.trajectory or 0)} diverged at step "
            f"{err.step} (master_seed={point.master_seed})",
            step=err.step,
            trajectory=start + (err.trajectory or 0),
            master_seed=point.master_seed,
        ) from err


def _blocks(n_traj: int) -> list[tuple[int, int]]:
    edges = list(range(0, n_traj, BLOCK_SIZE)) + [n_traj]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def _batch_slices(n_traj: int) -> list[slice]:
    n_batches = min(N_BATCHES, n_traj)
    bounds = np.linspace(0, n_traj, n_batches + 1).astype(int)
    return [slice(bounds[i], bounds[i + 1]) for i in range(n_batches)]


def run_ensemble(point: EnsemblePoint, workers: Optional[int] = None,
                 config_digest: str = "") -> EnsembleResult:
    """Average an ensemble of trajectories from the Bell initial state.

    ``workers`` > 1 distributes trajectory blocks over a process pool;
    the reduction is performed in trajectory order either way.
    """
    if workers is None:
        workers = os.cpu_count() or 1
    blocks = _blocks(point.n_traj)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, point, a, b) for a, b in blocks]
            recorded = np.concatenate([f.result() for f in futures], axis=0)
    else:
        recorded = np.concatenate([_run_block(point, a, b) for a, b in blocks], axis=0)

    a1 = recorded[:, :, 0]
    a2 = recorded[:, :, 1]
    p1 = np.abs(a1) ** 2
    p2 = np.abs(a2) ** 2
    coh = a1 * np.conj(a2)
    norm = np.sqrt(np.sum(np.abs(recorded[:, :, :4]) ** 2, axis=2))
    pure_c = 2.0 * np.abs(a1) * np.abs(a2)

    n_rec = recorded.shape[1]
    mean_p1 = p1.mean(axis=0)
    mean_p2 = p2.mean(axis=0)
    mean_coh = coh.mean(axis=0)

    values = np.array([
        wootters_concurrence(
            density_matrix_from_moments(mean_p1[k], mean_p2[k], mean_coh[k])
        )
        for k in range(n_rec)
    ])

    if point.n_traj == 1:
        stderr = np.zeros(n_rec)
    else:
        slices = _batch_slices(point.n_traj)
        batch_c = np.empty((len(slices), n_rec))
        for i, sl in enumerate(slices):
            bp1, bp2 = p1[sl].mean(axis=0), p2[sl].mean(axis=0)
            bcoh = coh[sl].mean(axis=0)
            batch_c[i] = [
                wootters_concurrence(density_matrix_from_moments(bp1[k], bp2[k], bcoh[k]))
                for k in range(n_rec)
            ]
        stderr = batch_c.std(axis=0, ddof=1) / np.sqrt(len(slices))

    warnings: list[str] = []
    mean_pure = pure_c.mean(axis=0)
    # Concurrence is convex: the averaged state can never beat the mean
    # per-trajectory value.  A violation indicates an assembly bug.
    if np.any(values > mean_pure + 1e-9):
        raise RuntimeError("convexity violated: C(mean rho) > mean pure concurrence")

    rec_times = _record_times(point)
    return EnsembleResult(
        times=rec_times,
        concurrence=ConcurrenceSeries(times=rec_times, values=values, stderr=stderr),
        rho_22=mean_p1,
        rho_33=mean_p2,
        rho_23=mean_coh,
        mean_norm=norm.mean(axis=0),
        mean_pure_concurrence=mean_pure,
        n_traj=point.n_traj,
        master_seed=point.master_seed,
        config_digest=config_digest,
        warnings=warnings,
    )


def _record_times(point: EnsemblePoint) -> np.ndarray:
    idx = np.arange(0, point.grid.n_steps, point.stride)
    if idx[-1] != point.grid.n_steps - 1:
        idx = np.append(idx, point.grid.n_steps - 1)
    return point.grid.times()[idx]


@dataclass(frozen=True)
class ConvergenceReport:
    max_abs_diff: float
    tol: float
    passed: bool

    def to_json(self) -> str:
        return json.dumps(
            {"max_abs_diff": self.max_abs_diff, "tol": self.tol, "passed": self.passed}
        )


def convergence_check(r1: EnsembleResult, r2: EnsembleResult, tol: float) -> ConvergenceReport:
    """Pointwise concurrence agreement between two runs on matching grids."""
    if r1.times.shape != r2.times.shape or not np.allclose(r1.times, r2.times):
        raise GridMismatchError("results were recorded on different time grids")
    diff = float(np.max(np.abs(r1.concurrence.values - r2.concurrence.values)))
    return ConvergenceReport(max_abs_diff=diff, tol=tol, passed=diff < tol)


def halved_dt_point(point: EnsemblePoint) -> EnsemblePoint:
    """The same ensemble on a grid with dt/2 (recorded at the same times)."""
    fine = TimeGrid(dt=point.grid.dt / 2.0,
                    n_steps=2 * point.grid.n_steps - 1,
                    t0=point.grid.t0)
    return replace(point, grid=fine, stride=2 * point.stride)
