"""Uniform time grids and reproducible random-number streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_n = t0 + n*dt, n = 0 .. n_steps-1 (times in units 1/omega)."""

    dt: float
    n_steps: int
    t0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 2:
            raise ParameterError(f"n_steps must be >= 2, got {self.n_steps}")

    @property
    def duration(self) -> float:
        return self.dt * (self.n_steps - 1)

    @property
    def omega_min(self) -> float:
        """Lowest resolvable angular frequency, 2*pi/T."""
        return 2.0 * np.pi / self.duration

    @property
    def omega_max(self) -> float:
        """Nyquist angular frequency, pi/dt."""
        return np.pi / self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps)

    @classmethod
    def from_horizon(cls, t_end: float, dt: float, t0: float = 0.0) -> "TimeGrid":
        """Grid covering [t0, t0 + t_end] with step dt (endpoint included)."""
        n_steps = int(round(t_end / dt)) + 1
        return cls(dt=dt, n_steps=n_steps, t0=t0)


@dataclass(frozen=True)
class RngStream:
    """Addressable random stream: (master_seed, stream_index).

    Distinct stream indices yield statistically independent generators;
    the same pair always reproduces the identical sample sequence.
    """

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index,)
        )
        return np.random.default_rng(seq)

    def shifted(self, offset: int) -> "RngStream":
        """Stream with the index displaced by ``offset`` (same master seed)."""
        return RngStream(self.master_seed, self.stream_index + offset)
