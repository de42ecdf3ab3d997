"""Reduced two-qubit states and Wootters concurrence.

Basis order is {|ee>, |eg>, |ge>, |gg>}.  Averaging single-excitation
trajectory amplitudes produces an X-state with zero double-excitation
population, for which the concurrence has the closed form
``2 * max(0, |rho_23| - sqrt(rho_11 * rho_44))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "ConcurrenceSeries",
    "reduced_density_matrix",
    "density_matrix_from_moments",
    "wootters_concurrence",
    "xstate_concurrence",
]

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
EIGENVALUE_TOL = 1e-10
XSTRUCTURE_TOL = 1e-12

# sigma_y (x) sigma_y, the spin-flip conjugation used by the Wootters formula
_SYSY = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class ConcurrenceSeries:
    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        if not (len(self.times) == len(self.values) == len(self.stderr)):
            raise ValidationError("concurrence series lengths differ")


def density_matrix_from_moments(p1: float, p2: float, coherence: complex) -> np.ndarray:
    """Assemble the averaged state from M[|a1|^2], M[|a2|^2], M[a1*conj(a2)].

    Integrator round-off may leave p1 + p2 marginally above 1; the ground
    population is floored at 0 and the trace renormalized, which absorbs
    up to the 1e-6 norm tolerance without distorting anything else.
    """
    if p1 < -EIGENVALUE_TOL or p2 < -EIGENVALUE_TOL:
        raise ValidationError("negative excited-state population")
    occupied = p1 + p2
    if occupied > 1.0 + 1e-6:
        raise ValidationError(f"single-excitation weight {occupied} exceeds 1")
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = p1
    rho[2, 2] = p2
    rho[1, 2] = coherence
    rho[2, 1] = np.conj(coherence)
    rho[3, 3] = max(0.0, 1.0 - occupied)
    rho /= np.trace(rho).real
    return _repair_psd(rho)


def reduced_density_matrix(samples) -> np.ndarray:
    """Ensemble-averaged reduced state of the two atoms.

    ``samples`` is a sequence of (atom1, atom2) complex amplitude pairs,
    weighted uniformly.  The excitation carried by cavity and bath ends up
    in the |gg> population; the |ee> sector stays empty (single-excitation
    superselection), so only four entries are nonzero.
    """
    arr = np.asarray(samples, dtype=complex)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ValidationError("need a non-empty sequence of (atom1, atom2) pairs")
    a1, a2 = arr[:, 0], arr[:, 1]
    occ = np.abs(a1) ** 2 + np.abs(a2) ** 2
    if np.any(occ > 1.0 + 1e-6):
        raise ValidationError("a sample exceeds unit single-excitation weight")
    return density_matrix_from_moments(
        float(np.mean(np.abs(a1) ** 2)),
        float(np.mean(np.abs(a2) ** 2)),
        complex(np.mean(a1 * np.conj(a2))),
    )


def _repair_psd(rho: np.ndarray) -> np.ndarray:
    """Clip tiny negative eigenvalues; reject anything genuinely indefinite."""
    vals, vecs = np.linalg.eigh(rho)
    if vals.min() < -EIGENVALUE_TOL:
        raise ValidationError(
            f"density matrix has eigenvalue {vals.min():.3e} < -{EIGENVALUE_TOL}"
        )
    if vals.min() >= 0.0:
        return rho
    clipped = np.clip(vals, 0.0, None)
    clipped /= clipped.sum()
    return (vecs * clipped) @ vecs.conj().T


def _check_density_matrix(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise ValidationError("matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValidationError(f"trace = {np.trace(rho).real} != 1")
    vals = np.linalg.eigvalsh(rho)
    if vals.min() < -EIGENVALUE_TOL:
        raise ValidationError(f"negative eigenvalue {vals.min():.3e}")
    return rho


def wootters_concurrence(rho: np.ndarray) -> float:
    """Concurrence max(0, l1 - l2 - l3 - l4) of a two-qubit density matrix.

    The l_i are the descending square roots of the eigenvalues of
    ``rho (sy x sy) conj(rho) (sy x sy)``.
    """
    rho = _check_density_matrix(rho)
    r = rho @ _SYSY @ rho.conj() @ _SYSY
    vals = np.linalg.eigvals(r).real
    lam = np.sqrt(np.abs(np.sort(vals)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def xstate_concurrence(rho: np.ndarray) -> float:
    """Closed form 2*max(0, |rho_23| - sqrt(rho_11 rho_44)) for X-states.

    Valid for the single-excitation X-structure: every entry outside the
    diagonal and the (1,2)/(2,1) coherence must vanish.
    """
    rho = _check_density_matrix(rho)
    mask = np.zeros((4, 4), dtype=bool)
    mask[np.diag_indices(4)] = True
    mask[1, 2] = mask[2, 1] = True
    if np.max(np.abs(rho[~mask])) > XSTRUCTURE_TOL:
        raise ValidationError("matrix does not have the single-excitation X structure")
    return float(
        2.0 * max(0.0, abs(rho[1, 2]) - np.sqrt(max(rho[0, 0].real, 0.0) * max(rho[3, 3].real, 0.0)))
    )
