"""Delimited and JSON output with embedded provenance.

Every emitted file starts with a ``#`` provenance line carrying the config
digest and master seed.  Floats are written with 17 significant digits so
re-running an experiment with the same seed reproduces files byte for byte.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Sequence

import numpy as np

from .ensemble import EnsembleResult
from .noise import SampledPath
from .spectral import HfReport, SpectrumEstimate

__all__ = [
    "fmt",
    "write_csv",
    "write_json",
    "write_ensemble_dir",
    "write_path_csv",
    "write_spectrum_csv",
    "write_hf_json",
    "write_trajectory_csv",
    "write_rho_json",
]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _provenance(digest: str, seed) -> str:
    return f"# config_digest={digest} master_seed={seed}\n"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[float]],
              digest: str = "", seed="") -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(_provenance(digest, seed))
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_json(path, payload: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_ensemble_dir(dirpath, result: EnsembleResult, experiment: str = "single",
                       extra: dict | None = None) -> None:
    """Serialize one ensemble as result.json + concurrence/rho/norm CSVs."""
    os.makedirs(dirpath, exist_ok=True)
    digest, seed = result.config_digest, result.master_seed
    c = result.concurrence
    write_csv(
        os.path.join(dirpath, "concurrence.csv"),
        ["t", "concurrence", "stderr"],
        zip(c.times, c.values, c.stderr),
        digest, seed,
    )
    write_csv(
        os.path.join(dirpath, "rho.csv"),
        ["t", "rho_22", "rho_33", "re_rho_23", "im_rho_23"],
        zip(result.times, result.rho_22, result.rho_33,
            result.rho_23.real, result.rho_23.imag),
        digest, seed,
    )
    write_csv(
        os.path.join(dirpath, "norm.csv"),
        ["t", "mean_norm"],
        zip(result.times, result.mean_norm),
        digest, seed,
    )
    payload = {
        "experiment": experiment,
        "config_digest": digest,
        "seed": seed,
        "n_traj": result.n_traj,
        "grid": {
            "t_start": result.times[0],
            "t_end": result.times[-1],
            "n_recorded": int(len(result.times)),
        },
        "warnings": list(result.warnings),
    }
    payload.update(extra or {})
    write_json(os.path.join(dirpath, "result.json"), payload)


def write_path_csv(path, sampled: SampledPath, digest: str = "", seed="") -> None:
    write_csv(path, ["t", "xi"], zip(sampled.grid.times(), sampled.values),
              digest, seed)


def write_spectrum_csv(path, spectrum: SpectrumEstimate, digest: str = "",
                       seed="") -> None:
    write_csv(path, ["omega", "density"], zip(spectrum.omega, spectrum.density),
              digest, seed)


def write_hf_json(path, report: HfReport) -> None:
    write_json(path, {
        "omega_c": report.omega_c,
        "hf_fraction": report.hf_fraction,
        "total_power": report.total_power,
    })


def write_trajectory_csv(path, record, digest: str = "", seed="") -> None:
    """Trajectory export: t, Re/Im of the amplitudes and memory, and norm."""
    s = record.states
    rows = zip(
        record.times,
        s[:, 0].real, s[:, 0].imag,
        s[:, 1].real, s[:, 1].imag,
        s[:, 2].real, s[:, 2].imag,
        s[:, 4].real, s[:, 4].imag,
        np.sqrt(record.norm_sq),
    )
    write_csv(
        path,
        ["t", "re_atom1", "im_atom1", "re_atom2", "im_atom2",
         "re_cavity", "im_cavity", "re_memory", "im_memory", "norm"],
        rows, digest, seed,
    )


def write_rho_json(path, rho: np.ndarray) -> None:
    """Density-matrix snapshot as row-major [re, im] pairs."""
    entries = [[[float(z.real), float(z.imag)] for z in row] for row in rho]
    write_json(path, {"basis": ["ee", "eg", "ge", "gg"], "rho": entries})
