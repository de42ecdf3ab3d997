"""Single-excitation amplitude dynamics under stochastic atom-cavity coupling.

State amplitudes (atom1, atom2, cavity, ground) plus the memory variable
that absorbs the exponential bath kernel:

    d atom1 / dt  = -i G1(t) cavity
    d atom2 / dt  = -i G2(t) cavity
    d cavity / dt = -i G1(t) atom1 - i G2(t) atom2 - memory
    d ground / dt = 0
    d memory / dt = -gamma_Q memory + (Gamma_Q gamma_Q / 2) cavity

with couplings G_i(t) = G0_i sin(kappa [x0_i + noise_scale * xi(t)]).
Time is in units 1/omega (resonant atoms and cavity, omega = 1).

Integration is fixed-step classical RK4 with the couplings held constant
within each step (sample-and-hold on the noise grid), which keeps runs
bit-reproducible for a given path.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .errors import DivergenceError, ParameterError
from .grids import TimeGrid
from .noise import SampledPath

__all__ = [
    "SystemParams",
    "AmplitudeState",
    "TrajectoryRecord",
    "BELL_INIT",
    "coupling_at",
    "rhs",
    "step_rk4",
    "run_trajectory",
    "analytic_constant_G",
]

NORM_TOL = 1e-6


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters; rates and times in units of the atomic frequency.

    Gamma_Q, gamma_Q -- strength and spectral width of the cavity-leakage
    Lorentzian; G0, x0 -- per-atom coupling amplitudes and balanced
    positions; kappa -- standing-wave number; noise_scale multiplies the
    displacement xi(t) before it enters the sine.
    """

    Gamma_Q: float = 1.0
    gamma_Q: float = 1.0
    G0: tuple[float, float] = (1.0, 1.0)
    kappa: float = 1.0
    x0: tuple[float, float] = (pi / 2, pi / 2)
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.Gamma_Q < 0:
            raise ParameterError(f"Gamma_Q must be >= 0, got {self.Gamma_Q}")
        if not self.gamma_Q > 0:
            raise ParameterError(f"gamma_Q must be positive, got {self.gamma_Q}")
        if len(self.G0) != 2 or any(g < 0 for g in self.G0):
            raise ParameterError(f"G0 must be two non-negative amplitudes, got {self.G0}")
        if len(self.x0) != 2:
            raise ParameterError(f"x0 must hold two positions, got {self.x0}")

    @property
    def kernel_source(self) -> float:
        return 0.5 * self.Gamma_Q * self.gamma_Q


@dataclass(frozen=True)
class AmplitudeState:
    atom1: complex = 0.0
    atom2: complex = 0.0
    cavity: complex = 0.0
    ground: complex = 0.0
    memory: complex = 0.0

    @property
    def norm_sq(self) -> float:
        return (
            abs(self.atom1) ** 2
            + abs(self.atom2) ** 2
            + abs(self.cavity) ** 2
            + abs(self.ground) ** 2
        )


BELL_INIT = AmplitudeState(atom1=1.0 / np.sqrt(2.0), atom2=1.0 / np.sqrt(2.0))


@dataclass(frozen=True)
class TrajectoryRecord:
    """States recorded at strided grid points (endpoints always included).

    ``states`` has shape (n_recorded, 5) with columns
    (atom1, atom2, cavity, ground, memory).
    """

    grid: TimeGrid
    stride: int
    times: np.ndarray
    states: np.ndarray

    def state_at(self, k: int) -> AmplitudeState:
        a1, a2, c, g, m = self.states[k]
        return AmplitudeState(a1, a2, c, g, m)

    @property
    def norm_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.states[:, :4]) ** 2, axis=1)


def coupling_at(params: SystemParams, xi: float, atom_index: int) -> float:
    """Coupling G0_i sin(kappa (x0_i + noise_scale * xi)) for atom 1 or 2."""
    if atom_index not in (1, 2):
        raise ParameterError(f"atom_index must be 1 or 2, got {atom_index}")
    i = atom_index - 1
    return params.G0[i] * np.sin(
        params.kappa * (params.x0[i] + params.noise_scale * xi)
    )


def rhs(state: AmplitudeState, g1: float, g2: float, params: SystemParams) -> AmplitudeState:
    """Time derivative for frozen couplings (g1, g2)."""
    d1, d2, d3, dm = _rhs(
        state.atom1, state.atom2, state.cavity, state.memory,
        g1, g2, params.gamma_Q, params.kernel_source,
    )
    return AmplitudeState(atom1=d1, atom2=d2, cavity=d3, ground=0.0, memory=dm)


def _rhs(a1, a2, c, m, g1, g2, gamma, src):
    ct = -1j * c
    d1 = g1 * ct
    d2 = g2 * ct
    d3 = -1j * (g1 * a1 + g2 * a2) - m
    dm = src * c - gamma * m
    return d1, d2, d3, dm


def _rk4(a1, a2, c, m, dt, g1, g2, gamma, src):
    h = 0.5 * dt
    k1 = _rhs(a1, a2, c, m, g1, g2, gamma, src)
    k2 = _rhs(a1 + h * k1[0], a2 + h * k1[1], c + h * k1[2], m + h * k1[3],
              g1, g2, gamma, src)
    k3 = _rhs(a1 + h * k2[0], a2 + h * k2[1], c + h * k2[2], m + h * k2[3],
              g1, g2, gamma, src)
    k4 = _rhs(a1 + dt * k3[0], a2 + dt * k3[1], c + dt * k3[2], m + dt * k3[3],
              g1, g2, gamma, src)
    w = dt / 6.0
    return (
        a1 + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        a2 + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        c + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        m + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    )


def step_rk4(state: AmplitudeState, dt: float, g1: float, g2: float,
             params: SystemParams) -> AmplitudeState:
    """One fourth-order step with frozen couplings."""
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    a1, a2, c, m = _rk4(
        state.atom1, state.atom2, state.cavity, state.memory,
        dt, g1, g2, params.gamma_Q, params.kernel_source,
    )
    return AmplitudeState(a1, a2, c, state.ground, m)


def _record_indices(n_steps: int, stride: int) -> np.ndarray:
    idx = np.arange(0, n_steps, stride)
    if idx[-1] != n_steps - 1:
        idx = np.append(idx, n_steps - 1)
    return idx


def integrate_block(params: SystemParams, xi_block: np.ndarray, grid: TimeGrid,
                    init: AmplitudeState, stride: int = 1) -> np.ndarray:
    """Integrate a block of trajectories that share (params, grid, init).

    xi_block has shape (n_traj, n_steps); returns recorded amplitudes of
    shape (n_traj, n_recorded, 5).  Each trajectory column evolves by
    elementwise arithmetic, so results are bit-identical however the
    trajectories are grouped into blocks.
    """
    xi_block = np.atleast_2d(np.asarray(xi_block, dtype=float))
    n_traj, n_cols = xi_block.shape
    if n_cols != grid.n_steps:
        raise ParameterError("xi block length does not match the grid")
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    if init.norm_sq > 1.0 + NORM_TOL:
        raise ParameterError(f"initial norm**2 = {init.norm_sq} exceeds 1")

    scale = params.noise_scale
    # time-major layout: the inner loop reads one contiguous row per step
    xi_t = np.ascontiguousarray(xi_block.T)
    g1_all = params.G0[0] * np.sin(params.kappa * (params.x0[0] + scale * xi_t))
    if params.G0[0] == params.G0[1] and params.x0[0] == params.x0[1]:
        g2_all = g1_all
    else:
        g2_all = params.G0[1] * np.sin(params.kappa * (params.x0[1] + scale * xi_t))
    gamma, src, dt = params.gamma_Q, params.kernel_source, grid.dt

    a1 = np.full(n_traj, init.atom1, dtype=complex)
    a2 = np.full(n_traj, init.atom2, dtype=complex)
    c = np.full(n_traj, init.cavity, dtype=complex)
    m = np.full(n_traj, init.memory, dtype=complex)

    rec_idx = _record_indices(grid.n_steps, stride)
    out = np.empty((n_traj, rec_idx.size, 5), dtype=complex)
    out[:, 0, 0], out[:, 0, 1], out[:, 0, 2] = a1, a2, c
    out[:, 0, 3], out[:, 0, 4] = init.ground, m

    next_rec = 1
    for n in range(grid.n_steps - 1):
        a1, a2, c, m = _rk4(a1, a2, c, m, dt, g1_all[n], g2_all[n], gamma, src)
        step = n + 1
        if next_rec < rec_idx.size and step == rec_idx[next_rec]:
            out[:, next_rec, 0], out[:, next_rec, 1] = a1, a2
            out[:, next_rec, 2], out[:, next_rec, 3] = c, init.ground
            out[:, next_rec, 4] = m
            finite = np.isfinite(out[:, next_rec, :]).all(axis=1)
            if not finite.all():
                bad = int(np.flatnonzero(~finite)[0])
                raise DivergenceError(
                    f"non-finite amplitude at step {step} (trajectory {bad} "
                    "within this block)",
                    step=step, trajectory=bad,
                )
            next_rec += 1
    return out


def run_trajectory(params: SystemParams, path: SampledPath,
                   init: AmplitudeState = BELL_INIT, stride: int = 1) -> TrajectoryRecord:
    """Integrate one trajectory along a sampled noise path."""
    states = integrate_block(params, path.values[None, :], path.grid, init, stride)[0]
    rec_idx = _record_indices(path.grid.n_steps, stride)
    return TrajectoryRecord(
        grid=path.grid, stride=stride, times=path.grid.times()[rec_idx], states=states
    )


def constant_coupling_matrix(params: SystemParams, xi: float = 0.0) -> np.ndarray:
    """Generator of the (atom1, atom2, cavity, memory) subsystem for fixed xi."""
    g1 = coupling_at(params, xi, 1)
    g2 = coupling_at(params, xi, 2)
    return np.array(
        [
            [0.0, 0.0, -1j * g1, 0.0],
            [0.0, 0.0, -1j * g2, 0.0],
            [-1j * g1, -1j * g2, 0.0, -1.0],
            [0.0, 0.0, params.kernel_source, -params.gamma_Q],
        ],
        dtype=complex,
    )


def analytic_constant_G(params: SystemParams, t: float,
                        init: AmplitudeState = BELL_INIT,
                        xi: Optional[float] = None) -> AmplitudeState:
    """Exact propagation for constant couplings (matrix exponential).

    The closed system is linear time-invariant when the displacement is
    frozen; scaling-and-squaring handles defective generators as well.
    """
    mat = constant_coupling_matrix(params, 0.0 if xi is None else xi)
    y0 = np.array([init.atom1, init.atom2, init.cavity, init.memory], dtype=complex)
    y = expm(mat * t) @ y0
    return AmplitudeState(atom1=y[0], atom2=y[1], cavity=y[2],
                          ground=init.ground, memory=y[3])
