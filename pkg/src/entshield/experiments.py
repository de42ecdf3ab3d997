"""Figure-level experiments: sweeps, mixing scans, spectral reports, validation.

Each runner merges its declared defaults with an optional config file, runs
the required ensembles through the engine, writes delimited data (plus
result.json) into the output directory, and renders companion figures.
Orderings are only asserted as resolved when every adjacent gap exceeds
three pooled standard errors; otherwise they are reported as unresolved.
"""

from __future__ import annotations

import os
import time
from dataclasses import replace
from typing import Optional

import numpy as np

from . import figures, io
from .config import (
    Config,
    build_grid,
    build_noise,
    build_params,
    config_digest,
    defaults_for,
    get_float,
    get_int,
    get_list,
    merge,
)
from .dynamics import BELL_INIT, SystemParams, analytic_constant_G, run_trajectory
from .ensemble import (
    EnsemblePoint,
    convergence_check,
    halved_dt_point,
    run_ensemble,
)
from .errors import ConfigError
from .grids import RngStream, TimeGrid
from .noise import (
    FlickerNoise,
    MixtureNoise,
    OUNoise,
    SampledPath,
    TelegraphNoise,
    analytic_psd,
    sample_path,
)
from .observables import wootters_concurrence, xstate_concurrence
from .spectral import empirical_autocorr, hf_fraction, periodogram, rank_by_hf_power

__all__ = [
    "prepare_config",
    "run_single",
    "run_gamma_xi_sweep",
    "run_gamma_q_sweep",
    "run_mixing_scan",
    "run_psd_report",
    "run_validation",
]


def prepare_config(kind: str, config_path: Optional[str] = None,
                   seed: Optional[int] = None) -> Config:
    """Defaults for an experiment kind, merged with file and seed overrides."""
    from .config import load_config

    cfg = defaults_for(kind)
    if config_path:
        cfg = merge(cfg, load_config(config_path))
    if seed is not None:
        cfg.setdefault("ensemble", {})["seed"] = str(seed)
    return cfg


def _ordering(cells: dict[str, tuple[float, float]]) -> dict:
    """Descending concurrence order with 3-sigma resolution bookkeeping."""
    order = sorted(cells, key=lambda k: -cells[k][0])
    gaps = []
    resolved = True
    for hi, lo in zip(order, order[1:]):
        gap = cells[hi][0] - cells[lo][0]
        pooled = float(np.hypot(cells[hi][1], cells[lo][1]))
        n_sigma = gap / pooled if pooled > 0 else (np.inf if gap > 0 else 0.0)
        gaps.append({"upper": hi, "lower": lo, "gap": gap,
                     "pooled_sigma": pooled, "n_sigma": float(n_sigma)})
        resolved &= n_sigma >= 3.0
    return {
        "order": order,
        "values": {k: {"concurrence": v[0], "stderr": v[1]} for k, v in cells.items()},
        "gaps": gaps,
        "resolved": bool(resolved),
    }


def _base_point(cfg: Config, noise, **param_overrides) -> EnsemblePoint:
    return EnsemblePoint(
        params=build_params(cfg, **param_overrides),
        noise=noise,
        grid=build_grid(cfg),
        n_traj=get_int(cfg, "ensemble", "n_traj"),
        master_seed=get_int(cfg, "ensemble", "seed"),
        stride=get_int(cfg, "grid", "stride"),
    )


def _run_cell(cfg: Config, out_dir: str, label: str, point: EnsemblePoint,
              workers, digest: str, t_eval: float):
    result = run_ensemble(point, workers=workers, config_digest=digest)
    io.write_ensemble_dir(os.path.join(out_dir, "cells", label), result,
                          experiment=label)
    c, se = result.value_at(t_eval)
    return result, (c, se)


def run_single(cfg: Config, out_dir: str, workers: Optional[int] = None,
               render: bool = True) -> dict:
    """One ensemble at the configured parameter point."""
    digest = config_digest(cfg)
    noise = build_noise(cfg, "noise")
    point = _base_point(cfg, noise)
    t_eval = get_float(cfg, "experiment", "t_eval")
    result, (c, se) = _run_cell(cfg, out_dir, "single", point, workers, digest, t_eval)
    summary = {
        "experiment": "simulate",
        "config_digest": digest,
        "seed": point.master_seed,
        "n_traj": point.n_traj,
        "grid": {"dt": point.grid.dt, "n_steps": point.grid.n_steps},
        "checkpoints": {"t_eval": t_eval, "concurrence": c, "stderr": se},
        "orderings": {},
        "warnings": list(result.warnings),
    }
    io.write_json(os.path.join(out_dir, "result.json"), summary)
    if render:
        figures.concurrence_panel({"single": result},
                                  os.path.join(out_dir, "figures", "concurrence.png"))
    return summary


_GXI_LABELS = {0.0: "ou", 0.5: "mixed", 1.0: "violet"}


def run_gamma_xi_sweep(cfg: Config, out_dir: str, workers: Optional[int] = None,
                       render: bool = True) -> dict:
    """Violet/O-U mixtures across the O-U width gamma_xi.

    For each gamma_xi and each mixing ratio p the ensemble concurrence is
    recorded; checkpoint orderings of the pure and mixed cases are emitted
    with their resolution status.
    """
    digest = config_digest(cfg)
    gxi_list = get_list(cfg, "experiment", "gamma_xi_list")
    p_values = get_list(cfg, "experiment", "p_values")
    t_eval = get_float(cfg, "experiment", "t_eval")
    grid = build_grid(cfg)
    if not 0 <= t_eval <= grid.duration:
        raise ConfigError(f"t_eval={t_eval} outside the grid horizon {grid.duration}")

    baseline_point = _base_point(cfg, None)
    baseline, base_val = _run_cell(cfg, out_dir, "none", baseline_point, workers,
                                   digest, t_eval)

    rows = []
    orderings = {}
    panels = {}
    series = {p: [] for p in p_values}
    for gxi in gxi_list:
        cells = {}
        panel = {"none": baseline}
        for p in p_values:
            noise = MixtureNoise(
                a=build_noise(cfg, "noise.a"),
                b=build_noise(cfg, "noise.b", gamma_xi=gxi),
                p=p,
            )
            name = _GXI_LABELS.get(p, f"p{p:g}")
            label = f"gxi{gxi:g}_{name}"
            point = _base_point(cfg, noise)
            result, val = _run_cell(cfg, out_dir, label, point, workers, digest, t_eval)
            cells[name] = val
            panel[name] = result
            series[p].append(val)
            rows.append((gxi, p, val[0], val[1]))
        orderings[f"gamma_xi={gxi:g}"] = _ordering(cells)
        panels[gxi] = panel
        if render:
            figures.concurrence_panel(
                panel, os.path.join(out_dir, "figures", f"concurrence_gxi{gxi:g}.png"),
                title=f"gamma_xi = {gxi:g}",
            )

    io.write_csv(os.path.join(out_dir, "sweep.csv"),
                 ["gamma_xi", "p", "concurrence_at_t_eval", "stderr"],
                 rows, digest, baseline_point.master_seed)
    summary = {
        "experiment": "sweep-gxi",
        "config_digest": digest,
        "seed": baseline_point.master_seed,
        "n_traj": baseline_point.n_traj,
        "grid": {"dt": grid.dt, "n_steps": grid.n_steps},
        "checkpoints": {"t_eval": t_eval, "gamma_xi": list(gxi_list),
                        "baseline": {"concurrence": base_val[0], "stderr": base_val[1]}},
        "orderings": orderings,
        "warnings": [],
    }
    io.write_json(os.path.join(out_dir, "result.json"), summary)
    if render:
        figures.sweep_overview(
            r"$\gamma_\xi$", gxi_list,
            {_GXI_LABELS.get(p, f"p{p:g}"): series[p] for p in p_values},
            os.path.join(out_dir, "figures", "sweep_overview.png"),
        )
    return summary


def run_gamma_q_sweep(cfg: Config, out_dir: str, workers: Optional[int] = None,
                      render: bool = True) -> dict:
    """Telegraph/O-U cases across the quantum-noise width gamma_Q."""
    digest = config_digest(cfg)
    gq_list = get_list(cfg, "experiment", "gamma_q_list")
    p_mixed = get_float(cfg, "experiment", "p")
    t_eval = get_float(cfg, "experiment", "t_eval")
    grid = build_grid(cfg)

    tel = build_noise(cfg, "noise.a")
    ou = build_noise(cfg, "noise.b")
    cases = {
        "telegraph": MixtureNoise(a=tel, b=ou, p=1.0),
        "ou": MixtureNoise(a=tel, b=ou, p=0.0),
        "mixed": MixtureNoise(a=tel, b=ou, p=p_mixed),
        "none": None,
    }

    rows = []
    orderings = {}
    comparisons = {}
    seed = get_int(cfg, "ensemble", "seed")
    case_names = list(cases)
    for gq in gq_list:
        cells = {}
        panel = {}
        for name, noise in cases.items():
            point = _base_point(cfg, noise, gamma_Q=gq)
            if noise is None:
                point = replace(point, n_traj=1)
            label = f"gq{gq:g}_{name}"
            result, val = _run_cell(cfg, out_dir, label, point, workers, digest, t_eval)
            panel[name] = result
            rows.append((gq, case_names.index(name), val[0], val[1]))
            if name != "none":
                cells[name] = val
        orderings[f"gamma_Q={gq:g}"] = _ordering(cells)
        gap = abs(cells["telegraph"][0] - cells["ou"][0])
        pooled = float(np.hypot(cells["telegraph"][1], cells["ou"][1]))
        comparisons[f"gamma_Q={gq:g}"] = {
            "tel_ou_gap": gap,
            "pooled_sigma": pooled,
            "within_2_sigma": bool(gap <= 2.0 * pooled),
        }
        if render:
            figures.concurrence_panel(
                panel, os.path.join(out_dir, "figures", f"concurrence_gq{gq:g}.png"),
                title=f"gamma_Q = {gq:g}",
            )

    io.write_csv(os.path.join(out_dir, "sweep.csv"),
                 ["gamma_q", "case_index", "concurrence_at_t_eval", "stderr"],
                 rows, digest, seed)
    summary = {
        "experiment": "sweep-gq",
        "config_digest": digest,
        "seed": seed,
        "n_traj": get_int(cfg, "ensemble", "n_traj"),
        "grid": {"dt": grid.dt, "n_steps": grid.n_steps},
        "checkpoints": {"t_eval": t_eval, "gamma_q": list(gq_list),
                        "cases": [k for k in cases]},
        "orderings": orderings,
        "tel_ou_comparisons": comparisons,
        "warnings": [],
    }
    io.write_json(os.path.join(out_dir, "result.json"), summary)
    return summary


def run_mixing_scan(cfg: Config, out_dir: str, workers: Optional[int] = None,
                    render: bool = True) -> dict:
    """Locate the mixing ratio of minimum concurrence for each gamma_xi.

    All mixing ratios within one gamma_xi share the master seed, so the
    component paths are common random numbers and the scan over p is
    smooth; ties go to the smallest p.
    """
    digest = config_digest(cfg)
    gxi_list = get_list(cfg, "experiment", "gamma_xi_list")
    t_eval = get_float(cfg, "experiment", "t_eval")
    grid = build_grid(cfg)
    if "p_values" in cfg.get("experiment", {}):
        p_grid = np.asarray(get_list(cfg, "experiment", "p_values"))
    else:
        p_step = get_float(cfg, "experiment", "p_step")
        p_grid = np.round(np.arange(0.0, 1.0 + 0.5 * p_step, p_step), 10)
    seed = get_int(cfg, "ensemble", "seed")

    warnings = []
    p_min_rows = []
    curves = {}
    marks = {}
    for gxi in gxi_list:
        values = []
        for p in p_grid:
            noise = MixtureNoise(
                a=build_noise(cfg, "noise.a", gamma_xi=gxi),
                b=build_noise(cfg, "noise.b"),
                p=float(p),
            )
            point = _base_point(cfg, noise)
            label = f"gxi{gxi:g}_p{p:g}"
            _, val = _run_cell(cfg, out_dir, label, point, workers, digest, t_eval)
            values.append(val)
        cs = np.array([v[0] for v in values])
        ses = np.array([v[1] for v in values])
        k_min = int(np.argmin(cs))  # ties resolve to the smallest p
        span = float(cs.max() - cs.min())
        flat = span <= 3.0 * float(ses.max())
        if flat:
            warnings.append(
                f"gamma_xi={gxi:g}: concurrence is flat in p within 3 sigma "
                f"(span {span:.3g}); p_min={p_grid[k_min]:g} is weakly determined"
            )
        p_min_rows.append((gxi, p_grid[k_min], cs[k_min], ses[k_min], int(flat)))
        label = f"gamma_xi={gxi:g}"
        curves[label] = values
        marks[label] = k_min
        io.write_csv(os.path.join(out_dir, f"curve_gxi{gxi:g}.csv"),
                     ["p", "concurrence_at_t_eval", "stderr"],
                     [(p, v[0], v[1]) for p, v in zip(p_grid, values)],
                     digest, seed)

    p_mins = [row[1] for row in p_min_rows]
    non_increasing = all(a >= b for a, b in zip(p_mins, p_mins[1:]))
    io.write_csv(os.path.join(out_dir, "p_min.csv"),
                 ["gamma_xi", "p_min", "concurrence_min", "stderr", "flat"],
                 p_min_rows, digest, seed)
    summary = {
        "experiment": "pmin",
        "config_digest": digest,
        "seed": seed,
        "n_traj": get_int(cfg, "ensemble", "n_traj"),
        "grid": {"dt": grid.dt, "n_steps": grid.n_steps},
        "checkpoints": {"t_eval": t_eval, "gamma_xi": list(gxi_list),
                        "p_grid": [float(p) for p in p_grid]},
        "orderings": {"p_min": {f"gamma_xi={g:g}": p for g, p in zip(gxi_list, p_mins)},
                      "non_increasing": bool(non_increasing)},
        "warnings": warnings,
    }
    io.write_json(os.path.join(out_dir, "result.json"), summary)
    if render:
        figures.pmin_trend(gxi_list, p_mins,
                           os.path.join(out_dir, "figures", "p_min_trend.png"))
        figures.mixing_curves(p_grid, curves, marks,
                              os.path.join(out_dir, "figures", "mixing_curves.png"))
    return summary


def _quantum_noise_density(params: SystemParams, omega: np.ndarray) -> np.ndarray:
    g = params.gamma_Q
    return (params.Gamma_Q * g**2 / (2.0 * np.pi)) / (omega**2 + g**2)


def run_psd_report(cfg: Config, out_dir: str, workers: Optional[int] = None,
                   render: bool = True) -> dict:
    """Analytic and estimated spectra, the LF/HF boundary, and HF rankings.

    ``style = gxi`` reports the violet/O-U mixture family per gamma_xi;
    ``style = gq`` reports the telegraph/O-U family, moving the boundary
    with each gamma_Q.
    """
    style = cfg.get("experiment", {}).get("style", "gxi").lower()
    if style == "gq":
        # the telegraph/O-U family shares the gamma_q sweep's noise and
        # coupling geometry; only the reporting knobs carry over
        cfg = merge(defaults_for("gamma_q_sweep"), {
            s: kv for s, kv in cfg.items() if s in ("experiment", "grid", "ensemble")
        })
    digest = config_digest(cfg)
    params = build_params(cfg)
    grid = build_grid(cfg)
    p_mixed = get_float(cfg, "experiment", "p")
    omega_c_factor = get_float(cfg, "experiment", "omega_c_factor")
    n_segments = get_int(cfg, "experiment", "n_segments")
    est_steps = get_int(cfg, "experiment", "estimate_steps")
    seed = get_int(cfg, "ensemble", "seed")
    band_max = grid.omega_max
    est_grid = TimeGrid(dt=grid.dt, n_steps=est_steps)

    if style == "gxi":
        panel_values = get_list(cfg, "experiment", "gamma_xi_list")

        def models_for(gxi):
            a = build_noise(cfg, "noise.a")
            b = build_noise(cfg, "noise.b", gamma_xi=gxi)
            return {"violet": MixtureNoise(a, b, 1.0), "ou": MixtureNoise(a, b, 0.0),
                    "mixed": MixtureNoise(a, b, p_mixed)}

        def boundary_for(_):
            return omega_c_factor * params.gamma_Q

        panel_key = "gamma_xi"
    elif style == "gq":
        panel_values = get_list(cfg, "experiment", "gamma_q_list")

        def models_for(_):
            a = build_noise(cfg, "noise.a")
            b = build_noise(cfg, "noise.b")
            return {"telegraph": MixtureNoise(a, b, 1.0), "ou": MixtureNoise(a, b, 0.0),
                    "mixed": MixtureNoise(a, b, p_mixed)}

        def boundary_for(gq):
            return omega_c_factor * gq

        panel_key = "gamma_q"
    else:
        raise ConfigError(f"unknown psd style {style!r}; use 'gxi' or 'gq'")

    omega_axis = np.geomspace(grid.omega_min, band_max, 600)
    reports = {}
    for value in panel_values:
        models = models_for(value)
        omega_c = boundary_for(value)
        curves = {}
        panel_report = {"omega_c": omega_c, "band_max": band_max, "models": {}}
        for name, model in models.items():
            dens = analytic_psd(model, omega_axis, grid)
            io.write_csv(
                os.path.join(out_dir, f"psd_{panel_key}{value:g}_{name}_analytic.csv"),
                ["omega", "density"], zip(omega_axis, dens), digest, seed)
            curves[name] = (omega_axis, dens, "analytic")
            path = sample_path(model, est_grid, RngStream(seed, 0))
            est = periodogram(path, n_segments=n_segments)
            io.write_csv(
                os.path.join(out_dir, f"psd_{panel_key}{value:g}_{name}_estimate.csv"),
                ["omega", "density"], zip(est.omega, est.density), digest, seed)
            curves[f"{name}_est"] = (est.omega, est.density, "estimate")
            rep = hf_fraction(model, omega_c, band_max, grid)
            panel_report["models"][name] = {
                "omega_c": rep.omega_c,
                "hf_fraction": rep.hf_fraction,
                "total_power": rep.total_power,
                "hf_power": rep.hf_power,
            }
        ranked = rank_by_hf_power(list(models.values()), omega_c, band_max, grid)
        names = {id(m): n for n, m in models.items()}
        panel_report["ranking"] = [names[id(m)] for m, _ in ranked]
        reports[f"{panel_key}={value:g}"] = panel_report

        qn = _quantum_noise_density(
            build_params(cfg, gamma_Q=value)
            if style == "gq" else params, omega_axis)
        io.write_csv(os.path.join(out_dir, f"psd_{panel_key}{value:g}_quantum.csv"),
                     ["omega", "density"], zip(omega_axis, qn), digest, seed)
        if render:
            curves["quantum"] = (omega_axis, qn, "analytic")
            figures.psd_panel(
                curves, omega_c,
                os.path.join(out_dir, "figures", f"psd_{panel_key}{value:g}.png"),
                title=f"{panel_key} = {value:g}",
            )

    summary = {
        "experiment": "psd",
        "config_digest": digest,
        "seed": seed,
        "n_traj": 0,
        "grid": {"dt": grid.dt, "n_steps": grid.n_steps},
        "checkpoints": {panel_key: list(panel_values)},
        "orderings": {k: v["ranking"] for k, v in reports.items()},
        "hf_reports": reports,
        "warnings": [],
    }
    io.write_json(os.path.join(out_dir, "hf_reports.json"), reports)
    io.write_json(os.path.join(out_dir, "result.json"), summary)
    return summary


# ---------------------------------------------------------------------------
# validation battery
# ---------------------------------------------------------------------------

def _check_oracle(cfg) -> tuple[bool, str]:
    grid = TimeGrid(dt=1e-3, n_steps=20001)
    params = SystemParams(noise_scale=0.0)
    path = SampledPath(grid, np.zeros(grid.n_steps))
    rec = run_trajectory(params, path, BELL_INIT, stride=1000)
    worst = 0.0
    for k, t in enumerate(rec.times):
        exact = analytic_constant_G(params, t, BELL_INIT)
        st = rec.state_at(k)
        worst = max(
            worst,
            abs(st.atom1 - exact.atom1), abs(st.atom2 - exact.atom2),
            abs(st.cavity - exact.cavity), abs(st.memory - exact.memory),
        )
    return worst < 1e-6, f"max amplitude error {worst:.3e} (tol 1e-6)"


def _check_conservation(cfg) -> tuple[bool, str]:
    grid = TimeGrid(dt=1e-3, n_steps=20001)
    params = SystemParams(Gamma_Q=0.0, noise_scale=0.0)
    path = SampledPath(grid, np.zeros(grid.n_steps))
    rec = run_trajectory(params, path, BELL_INIT, stride=100)
    drift = float(np.max(np.abs(rec.norm_sq - rec.norm_sq[0])))
    return drift < 1e-8, f"norm**2 drift {drift:.3e} (tol 1e-8)"


def _check_concurrence_formulas(cfg) -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        p1, p2 = rng.random(2) * 0.5
        cmax = np.sqrt(p1 * p2)
        coh = cmax * rng.random() * np.exp(2j * np.pi * rng.random())
        rho = np.zeros((4, 4), dtype=complex)
        rho[1, 1], rho[2, 2] = p1, p2
        rho[1, 2], rho[2, 1] = coh, np.conj(coh)
        rho[3, 3] = 1 - p1 - p2
        worst = max(worst, abs(wootters_concurrence(rho) - xstate_concurrence(rho)))
    return worst < 1e-12, f"max |wootters - xstate| = {worst:.3e} (tol 1e-12)"


def _check_ou_autocorr(cfg) -> tuple[bool, str]:
    gamma, Gamma, dt = 1.0, 2.0, 0.01
    grid = TimeGrid(dt=dt, n_steps=1_000_000)
    path = sample_path(OUNoise(gamma_xi=gamma, Gamma_xi=Gamma), grid, RngStream(5, 0))
    max_lag = int(3.0 / gamma / dt)
    est = empirical_autocorr(path, max_lag)
    lags = np.arange(max_lag + 1) * dt
    ref = 0.5 * Gamma * gamma * np.exp(-gamma * lags)
    rel = float(np.linalg.norm(est - ref) / np.linalg.norm(ref))
    return rel < 0.05, f"relative L2 error {rel:.3f} (tol 0.05)"


def _check_telegraph_autocorr(cfg) -> tuple[bool, str]:
    p_jump, n = 0.35, 1_000_000
    grid = TimeGrid(dt=1.0, n_steps=n)
    path = sample_path(TelegraphNoise(p_jump), grid, RngStream(6, 0))
    est = empirical_autocorr(path, 20)
    worst = 0.0
    for k in range(1, 21):
        ref = (1 - 2 * p_jump) ** k
        sigma = np.sqrt((1 - ref**2) / n) if ref**2 < 1 else 1 / np.sqrt(n)
        worst = max(worst, abs(est[k] - ref) / sigma)
    return worst < 3.0, f"max deviation {worst:.2f} sigma (tol 3)"


def _fit_slope(path: SampledPath) -> float:
    est = periodogram(path, n_segments=64)
    omega, dens = est.omega[1:], est.density[1:]
    lo, hi = est.omega[-1] / 1000.0, est.omega[-1] / 10.0
    keep = (omega >= lo) & (omega <= hi) & (dens > 0)
    coeffs = np.polyfit(np.log(omega[keep]), np.log(dens[keep]), 1)
    return float(coeffs[0])


def _check_flicker_slopes(cfg) -> tuple[bool, str]:
    grid = TimeGrid(dt=0.01, n_steps=2**20)
    results = []
    ok = True
    for k, eta in enumerate((-2.0, -1.0, 1.0, 2.0)):
        path = sample_path(FlickerNoise(A=1.0, eta=eta), grid, RngStream(8, k))
        slope = _fit_slope(path)
        ok &= abs(slope - eta) <= 0.15
        results.append(f"eta={eta:+.0f}: slope={slope:+.3f}")
    return ok, "; ".join(results) + " (tol 0.15)"


def _check_psd_crosscheck(cfg) -> tuple[bool, str]:
    gamma, Gamma = 15.0, 2.0
    grid = TimeGrid(dt=0.01, n_steps=2**20)
    model = OUNoise(gamma_xi=gamma, Gamma_xi=Gamma)
    path = sample_path(model, grid, RngStream(9, 0))
    est = periodogram(path, n_segments=64)
    keep = (est.omega >= 0.5 * gamma) & (est.omega <= 5.0 * gamma)
    ref = analytic_psd(model, est.omega[keep], grid)
    rel = float(np.max(np.abs(est.density[keep] - ref) / ref))
    # pointwise periodogram scatter is averaged down by segment count; the
    # contract is agreement of the smoothed estimate
    smooth_est = np.convolve(est.density[keep], np.ones(25) / 25, mode="same")
    smooth_ref = np.convolve(ref, np.ones(25) / 25, mode="same")
    rel_smooth = float(np.max(np.abs(smooth_est[12:-12] - smooth_ref[12:-12])
                              / smooth_ref[12:-12]))
    return rel_smooth < 0.10, (
        f"smoothed relative error {rel_smooth:.3f} (tol 0.10, raw max {rel:.3f})"
    )


def _check_integrator_convergence(cfg) -> tuple[bool, str]:
    grid = build_grid(cfg)
    point = EnsemblePoint(
        params=build_params(cfg, noise_scale=0.0), noise=None, grid=grid,
        n_traj=1, master_seed=1, stride=max(1, get_int(cfg, "grid", "stride")),
    )
    coarse = run_ensemble(point, workers=1)
    fine = run_ensemble(halved_dt_point(point), workers=1)
    report = convergence_check(coarse, fine, tol=1e-3)
    return report.passed, (
        f"max |dC| between dt and dt/2 = {report.max_abs_diff:.3e} (tol 1e-3)"
    )


def _check_determinism(cfg) -> tuple[bool, str]:
    grid = TimeGrid(dt=0.01, n_steps=501)
    noise = OUNoise(gamma_xi=15.0, Gamma_xi=2.0)
    point = EnsemblePoint(params=SystemParams(), noise=noise, grid=grid,
                          n_traj=600, master_seed=3, stride=50)
    serial = run_ensemble(point, workers=1)
    parallel = run_ensemble(point, workers=2)
    same = (
        np.array_equal(serial.concurrence.values, parallel.concurrence.values)
        and np.array_equal(serial.rho_23, parallel.rho_23)
        and np.array_equal(serial.mean_norm, parallel.mean_norm)
    )
    return bool(same), "1-worker and 2-worker runs bit-identical" if same else \
        "worker count changed the result"


def _check_freezing(cfg) -> tuple[bool, str]:
    grid = TimeGrid(dt=1e-3, n_steps=20001)
    params = SystemParams()
    frozen = run_ensemble(
        EnsemblePoint(params=params, noise=OUNoise(gamma_xi=100.0, Gamma_xi=2.0),
                      grid=grid, n_traj=400, master_seed=12, stride=200),
        workers=1,
    )
    base = run_ensemble(
        EnsemblePoint(params=params, noise=None, grid=grid, n_traj=1,
                      master_seed=12, stride=200),
        workers=1,
    )
    c_f, se = frozen.value_at(20.0)
    c_b, _ = base.value_at(20.0)
    gap_sigma = (c_f - c_b) / se if se > 0 else np.inf
    return gap_sigma > 3.0, (
        f"frozen C(20)={c_f:.3f} vs baseline {c_b:.3f} ({gap_sigma:.0f} sigma)"
    )


def _check_ordering_smoke(cfg) -> tuple[bool, str]:
    sweep_cfg = defaults_for("gamma_xi_sweep")
    sweep_cfg["experiment"]["gamma_xi_list"] = "1, 90"
    grid = build_grid(sweep_cfg)
    seed = get_int(sweep_cfg, "ensemble", "seed")
    outcomes = []
    ok = True
    for gxi, want, n in ((1.0, ["violet", "mixed", "ou"], 3000),
                         (90.0, ["ou", "mixed", "violet"], 12000)):
        cells = {}
        for p, name in ((1.0, "violet"), (0.0, "ou"), (0.5, "mixed")):
            noise = MixtureNoise(a=build_noise(sweep_cfg, "noise.a"),
                                 b=build_noise(sweep_cfg, "noise.b", gamma_xi=gxi),
                                 p=p)
            point = EnsemblePoint(params=build_params(sweep_cfg), noise=noise,
                                  grid=grid, n_traj=n, master_seed=seed,
                                  stride=get_int(sweep_cfg, "grid", "stride"))
            result = run_ensemble(point, workers=1)
            cells[name] = result.value_at(20.0)
        got = _ordering(cells)["order"]
        ok &= got == want
        outcomes.append(f"gxi={gxi:g}: {'>'.join(got)}")
    return ok, "; ".join(outcomes)


_VALIDATION_CHECKS = [
    ("oracle_equivalence", _check_oracle),
    ("norm_conservation", _check_conservation),
    ("concurrence_formulas", _check_concurrence_formulas),
    ("ou_autocorrelation", _check_ou_autocorr),
    ("telegraph_autocorrelation", _check_telegraph_autocorr),
    ("flicker_slopes", _check_flicker_slopes),
    ("psd_crosscheck", _check_psd_crosscheck),
    ("integrator_convergence", _check_integrator_convergence),
    ("parallel_determinism", _check_determinism),
    ("freezing", _check_freezing),
    ("checkpoint_orderings", _check_ordering_smoke),
]


def run_validation(cfg: Config, out_dir: str, workers: Optional[int] = None,
                   render: bool = True) -> dict:
    """Built-in verification battery; failures are reported, not raised."""
    digest = config_digest(cfg)
    checks = {}
    all_passed = True
    for name, check in _VALIDATION_CHECKS:
        start = time.time()
        try:
            passed, detail = check(cfg)
        except Exception as err:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(err).__name__}: {err}"
        checks[name] = {"passed": bool(passed), "detail": detail,
                        "seconds": round(time.time() - start, 2)}
        all_passed &= passed
    summary = {
        "experiment": "validate",
        "config_digest": digest,
        "seed": get_int(cfg, "ensemble", "seed"),
        "n_traj": 0,
        "grid": {},
        "checkpoints": {},
        "orderings": {},
        "checks": checks,
        "passed": bool(all_passed),
        "warnings": [],
    }
    io.write_json(os.path.join(out_dir, "result.json"), summary)
    return summary
