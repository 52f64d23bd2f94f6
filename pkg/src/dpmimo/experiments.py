"""Experiment runners and deterministic CSV/JSON emission.

Each runner produces (header, rows, meta); rows carry seed and config-hash
provenance columns. Identical configs produce byte-identical CSV. The fig*
runners reproduce the published figure sweeps at desk scale, applying each
figure's stated parameter deviations on top of the loaded config.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction

import numpy as np

from . import __version__
from .boundary import (
    BoundaryThresholds,
    SearchConfig,
    build_report,
    rayleigh_distance,
    uniform_power_distance,
    xpd_aperture,
    xpd_distance_closed,
    xpd_distance_numeric,
)
from .capacity import capacity_upper_bound, ergodic_capacity_mc
from .channel import build_channel_stats, stats_from_gains, tie_to_subarrays
from .config import ScenarioConfig
from .errors import ConfigError
from .geometry import SphericalPosition, delta_u
from .optimizer import (
    PowerAllocation,
    optimize_covariance,
    optimize_power_allocation,
    scalar_covariance,
)
from .permanent import ComplexityReport, count_vector_diagnostics

EXPERIMENTS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7",
               "boundary", "aperture", "capacity", "optimize", "complexity")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # shortest round-trip form, mirrors JSON exactly
    return str(value)


def _meta(config: ScenarioConfig, experiment: str) -> dict:
    return {
        "artifact_version": __version__,
        "config_hash": config.config_hash(),
        "experiment": experiment,
        "seed": config.seed,
    }


def _provenance(config: ScenarioConfig) -> tuple:
    return (config.seed, config.config_hash())

PROVENANCE_COLS = ("seed", "config_hash")


def write_csv(path: str, header, rows, meta: dict):
    lines = [f"# {k}: {_fmt(v)}" for k, v in sorted(meta.items())]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: str, header, rows, meta: dict):
    payload = {
        "meta": {k: (_fmt(v) if isinstance(v, Fraction) else v)
                 for k, v in sorted(meta.items())},
        "columns": list(header),
        "rows": [[_fmt(v) if isinstance(v, Fraction) else v for v in row]
                 for row in rows],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# boundary sweeps

def _boundary_rows(config: ScenarioConfig, points: int, with_numeric: bool):
    geom = config.geometry()
    clusters = config.clusters()
    c_ratios = config.c_ratios()
    thr = config.thresholds()
    eta = config.xpd_params().eta
    theta_u = config.user().theta
    alpha = config.pathloss_params().alpha
    d_dim = geom.diagonal_dimension
    ray = rayleigh_distance(d_dim, geom.wavelength)
    prov = _provenance(config)

    rows = []
    for i in range(points):
        phi_deg = 360.0 * i / points
        phi_u = np.deg2rad(phi_deg)
        r_u_th, r1, chi2_term = xpd_distance_closed(
            geom, theta_u, phi_u, clusters, c_ratios, eta, thr)
        du = delta_u(theta_u, phi_u, geom.aspect_ratio)
        upd = uniform_power_distance(d_dim, du, alpha, thr.power_ratio)
        row = [phi_deg, r_u_th, r1, chi2_term, ray, upd]
        if with_numeric:
            search = SearchConfig(r_min=max(d_dim, 1.0), r_max=max(8.0 * ray, 50.0 * d_dim))
            numeric = xpd_distance_numeric(geom, theta_u, phi_u, clusters,
                                           c_ratios, eta, thr, search)
            row += [numeric.distance, numeric.status]
        rows.append(tuple(row) + prov)
    header = ["phi_deg", "r_u_th_m", "r_1_th_m", "chi2_term_m", "rayleigh_m",
              "uniform_power_m"]
    if with_numeric:
        header += ["numeric_m", "numeric_status"]
    return header + list(PROVENANCE_COLS), rows


def run_boundary(config: ScenarioConfig, points: int = 36):
    header, rows = _boundary_rows(config, points, with_numeric=False)
    meta = _meta(config, "boundary")
    user = config.user()
    report = build_report(config.geometry(), user.theta, user.phi, user.r,
                          config.clusters(), config.c_ratios(),
                          config.xpd_params().eta, config.pathloss_params().alpha,
                          config.thresholds())
    meta["report"] = json.dumps({
        "r_u_th_m": report.r_u_th,
        "r_1_th_m": report.r_1_th,
        "chi2_term_m": report.chi2_term,
        "rayleigh_m": report.rayleigh,
        "uniform_power_m": report.uniform_power,
        "a_th": report.a_th if np.isfinite(report.a_th) else None,
        "inputs": report.inputs,
    }, sort_keys=True)
    return header, rows, meta


def run_fig2(config: ScenarioConfig, points: int = 36):
    """Boundary comparison sweep: linear 70-element array, eta = 1."""
    cfg = config.replace(geometry={"layout": "linear", "elements": 70, "cols": 0},
                         xpd={"eta": 1.0},
                         optimizer={"subarrays": 7})
    header, rows = _boundary_rows(cfg, points, with_numeric=True)
    return header, rows, _meta(cfg, "fig2")


# ---------------------------------------------------------------------------
# aperture sweeps

def _aperture_rows(config: ScenarioConfig, r_values, eta_values, k: float,
                   theta_u: float, phi_u: float):
    clusters = config.clusters()
    c_ratios = config.c_ratios()
    thr = config.thresholds()
    prov = _provenance(config)
    rows = []
    for eta in eta_values:
        for r_u in r_values:
            placed = clusters.at_user_distance(c_ratios, r_u)
            res = xpd_aperture(r_u, theta_u, phi_u, placed, eta, thr, k)
            rows.append((r_u, eta, res.a_th, res.term_chi1, res.term_chi2, res.b)
                        + prov)
    header = ["r_u_m", "eta", "a_th", "term_chi1", "term_chi2", "b"]
    return header + list(PROVENANCE_COLS), rows


def run_aperture(config: ScenarioConfig):
    user = config.user()
    k = config.geometry().aspect_ratio
    r_values = np.linspace(10.0, 100.0, 10)
    header, rows = _aperture_rows(config, r_values, [config.xpd_params().eta],
                                  k, user.theta, user.phi)
    return header, rows, _meta(config, "aperture")


def run_fig3(config: ScenarioConfig):
    """Aperture vs user distance for several XPD decay exponents.

    Square array (k = 1), user at (theta, phi) = (pi/6, pi/2), both ratio
    thresholds 1.1; clusters scale with the user distance.
    """
    cfg = config.replace(thresholds={"gamma1": 1.1, "gamma2": 1.1})
    r_values = np.linspace(10.0, 100.0, 10)
    eta_values = [0.4, 0.8, 1.2]
    header, rows = _aperture_rows(cfg, r_values, eta_values, 1.0,
                                  np.pi / 6, np.pi / 2)
    return header, rows, _meta(cfg, "fig3")


# ---------------------------------------------------------------------------
# capacity and optimization

def _scenario_stats(config: ScenarioConfig, user: SphericalPosition | None = None,
                    scale_clusters_to: float | None = None):
    geom = config.geometry()
    clusters = config.clusters()
    if scale_clusters_to is not None:
        clusters = clusters.at_user_distance(config.c_ratios(), scale_clusters_to)
    if user is None:
        user = config.user()
    return build_channel_stats(geom, user.to_cartesian(), clusters,
                               config.xpd_params(), config.pathloss_params(),
                               config.n_ue, config.subarrays)


def run_capacity(config: ScenarioConfig):
    stats = tie_to_subarrays(_scenario_stats(config))
    s, m0 = stats.subarrays, stats.subarray_size
    uniform = PowerAllocation.from_vector(
        np.full(2 * s, 1.0 / (2 * stats.n_bs)), s, m0)
    gamma = config.gamma
    cub = capacity_upper_bound(stats, uniform, gamma)
    est = ergodic_capacity_mc(stats, uniform.expand(), gamma,
                              config.trials, config.fading())
    gamma_db = 10.0 * np.log10(gamma)
    rows = [(gamma_db, est.mean_bits, est.std_error, cub, est.trials)
            + _provenance(config)]
    header = ["gamma_db", "mean_bits", "std_error", "cub_bits", "trials"]
    return header + list(PROVENANCE_COLS), rows, _meta(config, "capacity")


def _optimize_at(config: ScenarioConfig, user: SphericalPosition):
    return optimize_covariance(
        config.geometry(), user, config.clusters(), config.xpd_params(),
        config.pathloss_params(), config.thresholds(), config.gamma,
        config.q0, config.schedule(), config.n_ue, config.subarrays,
        c_ratios=config.c_ratios(), paper_budget=config.paper_budget)


def run_optimize(config: ScenarioConfig):
    result = _optimize_at(config, config.user())
    prov = _provenance(config)
    rows = []
    for s in range(result.allocation.subarrays):
        rows.append((s, result.allocation.lambda_v[s], result.allocation.lambda_h[s],
                     result.scalar_branch, result.r_u_th, result.capacity_bound)
                    + prov)
    header = ["subarray", "lambda_v", "lambda_h", "scalar_branch", "r_u_th_m",
              "cub_bits"] + list(PROVENANCE_COLS)
    meta = _meta(config, "optimize")
    meta["iterations"] = json.dumps(
        [[o, float(obj), float(v)] for o, obj, v in result.iterations])
    return header, rows, meta


def run_fig4(config: ScenarioConfig, p_dbm_values=(23.0, 28.0, 33.0, 38.0, 43.0)):
    """Ergodic capacity vs transmit power: optimized vs scalar covariance."""
    user = config.user()
    stats = _scenario_stats(config)
    tied = tie_to_subarrays(stats)
    m = stats.n_bs
    scalar_q = np.full(2 * m, 1.0 / (2 * m))
    noise_dbm = config.raw["power"]["noise_dbm"]
    fading = config.fading()
    prov = _provenance(config)
    rows = []
    for p_dbm in p_dbm_values:
        cfg = config.replace(power={"p_dbm": p_dbm})
        gamma = cfg.gamma
        result = _optimize_at(cfg, user)
        cub_opt = result.capacity_bound
        cub_scalar = capacity_upper_bound(
            tied, PowerAllocation.from_vector(
                np.full(2 * tied.subarrays, 1.0 / (2 * m)),
                tied.subarrays, tied.subarray_size), gamma)
        mc_opt = ergodic_capacity_mc(stats, np.diagonal(result.q).real, gamma,
                                     config.trials, fading)
        mc_scalar = ergodic_capacity_mc(stats, scalar_q, gamma,
                                        config.trials, fading)
        rows.append((p_dbm, p_dbm - noise_dbm, cub_opt, cub_scalar,
                     mc_opt.mean_bits, mc_opt.std_error,
                     mc_scalar.mean_bits, mc_scalar.std_error,
                     result.scalar_branch) + prov)
    header = ["p_dbm", "gamma_db", "cub_opt", "cub_scalar", "mc_opt", "se_opt",
              "mc_scalar", "se_scalar", "scalar_branch"]
    return header + list(PROVENANCE_COLS), rows, _meta(config, "fig4")


def run_fig5(config: ScenarioConfig,
             r_values=(20.0, 30.0, 40.0, 50.0, 55.0, 65.0, 75.0, 90.0)):
    """Capacity improvement of the optimized covariance vs user distance.

    eta = 1, user along the configured direction, clusters scaling with the
    user distance; the improvement ratio collapses to 1 beyond the
    non-uniform XPD distance where the scalar branch takes over.
    """
    cfg = config.replace(xpd={"eta": 1.0})
    base_user = cfg.user()
    fading = cfg.fading()
    gamma = cfg.gamma
    m = cfg.geometry().num_elements
    scalar_q = np.full(2 * m, 1.0 / (2 * m))
    prov = _provenance(cfg)
    rows = []
    for r in r_values:
        user = SphericalPosition(r, base_user.theta, base_user.phi)
        result = _optimize_at(cfg, user)
        stats = _scenario_stats(cfg, user=user, scale_clusters_to=r)
        mc_opt = ergodic_capacity_mc(stats, np.diagonal(result.q).real, gamma,
                                     cfg.trials, fading)
        mc_scalar = ergodic_capacity_mc(stats, scalar_q, gamma, cfg.trials, fading)
        ratio = mc_opt.mean_bits / mc_scalar.mean_bits if mc_scalar.mean_bits > 0 else 1.0
        rows.append((r, result.r_u_th, result.scalar_branch, ratio,
                     mc_opt.mean_bits, mc_opt.std_error,
                     mc_scalar.mean_bits, mc_scalar.std_error) + prov)
    header = ["r_m", "r_u_th_m", "scalar_branch", "improvement_ratio",
              "mc_opt", "se_opt", "mc_scalar", "se_scalar"]
    return header + list(PROVENANCE_COLS), rows, _meta(cfg, "fig5")


def run_fig6(config: ScenarioConfig, subarray_counts=tuple(range(1, 11)), m0: int = 10):
    """Complexity ratio of the definition-based route to the structured one,
    sweeping the array size at fixed subarray size M_0 = 10."""
    n = config.n_ue
    prov = _provenance(config)
    rows = []
    for s in subarray_counts:
        m = s * m0
        rep = ComplexityReport.build(m, n, s)
        rows.append((m, s, m0, n, rep.n_ori, float(rep.n_sim), str(rep.n_sim),
                     rep.n_sim_bound, rep.ratio) + prov)
    header = ["m", "s", "m0", "n", "n_ori", "n_sim", "n_sim_exact",
              "n_sim_bound", "ratio"]
    return header + list(PROVENANCE_COLS), rows, _meta(config, "fig6")


def run_complexity(config: ScenarioConfig):
    m = config.geometry().num_elements
    n = config.n_ue
    s = config.subarrays
    rep = ComplexityReport.build(m, n, s)
    prov = _provenance(config)
    rows = [(m, n, s, config.subarray_size, rep.n_ori, float(rep.n_sim),
             str(rep.n_sim), rep.n_sim_bound, rep.ratio) + prov]
    header = ["m", "n", "s", "m0", "n_ori", "n_sim", "n_sim_exact",
              "n_sim_bound", "ratio"]
    meta = _meta(config, "complexity")
    diag = {f"k={k}": {kk: _fmt(vv) if vv is not None else None
                       for kk, vv in count_vector_diagnostics(s, config.subarray_size, k).items()}
            for k in range(0, 2 * n + 1)}
    meta["count_vector_diagnostics"] = json.dumps(diag, sort_keys=True)
    return header, rows, meta


def run_fig7(config: ScenarioConfig):
    """Power allocation against pathloss and against XPD, isolated.

    User at 30 m broadside in-plane (theta = phi = 90 deg). Variant
    "pathloss": per-antenna pathloss kept, polarization split forced
    uniform. Variant "xpd": pathloss forced uniform, split kept. Rows carry
    the per-subarray mean co-polarized gain next to the allocated powers.
    """
    config = config.replace(user={"r_m": 30.0, "theta_deg": 90.0, "phi_deg": 90.0})
    stats = _scenario_stats(config)
    s, m0 = stats.subarrays, stats.subarray_size
    gamma = config.gamma
    q0 = config.q0
    schedule = config.schedule()
    prov = _provenance(config)
    rows = []
    variants = {
        "pathloss": stats_from_gains(stats.beta, np.full_like(stats.l, stats.l.mean()),
                                     stats.n_ue, s, m0),
        "xpd": stats_from_gains(np.full_like(stats.beta, stats.beta.mean()), stats.l,
                                stats.n_ue, s, m0),
    }
    for variant, vstats in variants.items():
        tied = tie_to_subarrays(vstats)
        alloc, _, _ = optimize_power_allocation(tied, gamma, q0, schedule)
        co_gain = (tied.beta * (1.0 - tied.l)).reshape(s, m0).mean(axis=1)
        beta_s = tied.beta.reshape(s, m0).mean(axis=1)
        xpd_s = ((1.0 - tied.l) / tied.l).reshape(s, m0).mean(axis=1)
        for si in range(s):
            rows.append((variant, si, beta_s[si], xpd_s[si], co_gain[si],
                         alloc.lambda_v[si], alloc.lambda_h[si],
                         alloc.lambda_v[si] + alloc.lambda_h[si]) + prov)
    header = ["variant", "subarray", "beta_mean", "xpd_mean", "co_gain_mean",
              "lambda_v", "lambda_h", "lambda_total"]
    return header + list(PROVENANCE_COLS), rows, _meta(config, "fig7")


RUNNERS = {
    "boundary": run_boundary,
    "aperture": run_aperture,
    "capacity": run_capacity,
    "optimize": run_optimize,
    "complexity": run_complexity,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "fig6": run_fig6,
    "fig7": run_fig7,
}


def run_experiment(name: str, config: ScenarioConfig, out_dir: str,
                   fmt: str = "both", plot: bool = True) -> dict:
    """Run one experiment and write its artifacts; returns written paths."""
    if name not in RUNNERS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(RUNNERS)}")
    header, rows, meta = RUNNERS[name](config)
    os.makedirs(out_dir, exist_ok=True)
    written = {}
    if fmt in ("csv", "both"):
        path = os.path.join(out_dir, f"{name}.csv")
        write_csv(path, header, rows, meta)
        written["csv"] = path
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, f"{name}.json")
        write_json(path, header, rows, meta)
        written["json"] = path
    if plot:
        from .plotting import render_experiment
        png = render_experiment(name, header, rows, os.path.join(out_dir, f"{name}.png"))
        if png:
            written["png"] = png
    return written
