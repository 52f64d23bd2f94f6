"""Figure rendering for experiment outputs.

Plots are a convenience layer over the CSV/JSON artifacts: every number
drawn here is present in the delimited output, and skipping rendering never
changes the data files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _col(header, rows, name):
    idx = header.index(name)
    return np.array([row[idx] for row in rows])


def _numeric(header, rows, name):
    return _col(header, rows, name).astype(float)


def render_experiment(name, header, rows, path):
    fn = _RENDERERS.get(name)
    if fn is None:
        return None
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    fn(ax, header, rows)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _boundary(ax, header, rows):
    phi = _numeric(header, rows, "phi_deg")
    ax.plot(phi, _numeric(header, rows, "r_u_th_m"), label="non-uniform XPD $r_U^{th}$")
    ax.plot(phi, _numeric(header, rows, "r_1_th_m"), "--", label="$r_1^{th}$ ($\\chi_1$ term)")
    ax.plot(phi, _numeric(header, rows, "uniform_power_m"), label="uniform power")
    ax.plot(phi, _numeric(header, rows, "rayleigh_m"), ":", label="Rayleigh $2D^2/\\lambda$")
    if "numeric_m" in header:
        ax.plot(phi, _numeric(header, rows, "numeric_m"), ".", ms=4, label="numerical search")
    ax.set_xlabel("user azimuth (deg)")
    ax.set_ylabel("distance (m)")
    ax.set_yscale("log")
    ax.legend(fontsize=8)


def _aperture(ax, header, rows):
    r = _numeric(header, rows, "r_u_m")
    eta = _numeric(header, rows, "eta")
    a = _numeric(header, rows, "a_th")
    for e in np.unique(eta):
        sel = eta == e
        ax.plot(r[sel], a[sel], marker="o", ms=3, label=f"$\\eta$ = {e:g}")
    ax.set_xlabel("user distance $r_U$ (m)")
    ax.set_ylabel("non-uniform XPD aperture $A^{th}$")
    ax.set_yscale("log")
    ax.legend(fontsize=8)


def _capacity(ax, header, rows):
    g = _numeric(header, rows, "gamma_db")
    mean = _numeric(header, rows, "mean_bits")
    se = _numeric(header, rows, "std_error")
    ax.errorbar(g, mean, yerr=3 * se, marker="o", label="Monte Carlo")
    ax.plot(g, _numeric(header, rows, "cub_bits"), "--", label="permanent bound")
    ax.set_xlabel("transmit SNR (dB)")
    ax.set_ylabel("capacity (bits/symbol)")
    ax.legend(fontsize=8)


def _fig4(ax, header, rows):
    p = _numeric(header, rows, "p_dbm")
    ax.errorbar(p, _numeric(header, rows, "mc_opt"),
                yerr=2 * _numeric(header, rows, "se_opt"),
                marker="o", label="optimized (MC)")
    ax.errorbar(p, _numeric(header, rows, "mc_scalar"),
                yerr=2 * _numeric(header, rows, "se_scalar"),
                marker="s", label="scalar (MC)")
    ax.plot(p, _numeric(header, rows, "cub_opt"), "--", label="optimized bound")
    ax.plot(p, _numeric(header, rows, "cub_scalar"), ":", label="scalar bound")
    ax.set_xlabel("transmit power (dBm)")
    ax.set_ylabel("ergodic capacity (bits/symbol)")
    ax.legend(fontsize=8)


def _fig5(ax, header, rows):
    r = _numeric(header, rows, "r_m")
    ax.plot(r, _numeric(header, rows, "improvement_ratio"), marker="o")
    r_th = _numeric(header, rows, "r_u_th_m")[0]
    ax.axvline(r_th, color="k", ls="--", lw=1)
    ax.text(r_th, ax.get_ylim()[1], " $r_U^{th}$", va="top")
    ax.set_xlabel("user distance (m)")
    ax.set_ylabel("capacity improvement ratio")


def _fig6(ax, header, rows):
    ax.plot(_numeric(header, rows, "m"), _numeric(header, rows, "ratio"), marker="o")
    ax.set_xlabel("BS antennas $M$ (with $M_0$ = 10)")
    ax.set_ylabel("complexity ratio (definition / structured)")
    ax.set_yscale("log")


def _fig7(ax, header, rows):
    variant = _col(header, rows, "variant")
    sub = _numeric(header, rows, "subarray")
    total = _numeric(header, rows, "lambda_total")
    gain = _numeric(header, rows, "co_gain_mean")
    for v, marker in (("pathloss", "o"), ("xpd", "s")):
        sel = variant == v
        ax.plot(sub[sel], total[sel] / total[sel].max(), marker=marker,
                label=f"power share ({v} varies)")
        ax.plot(sub[sel], gain[sel] / gain[sel].max(), ls="--", marker=marker,
                ms=3, alpha=0.6, label=f"mean co-gain ({v} varies)")
    ax.set_xlabel("subarray index")
    ax.set_ylabel("normalized value")
    ax.legend(fontsize=7)


_RENDERERS = {
    "boundary": _boundary,
    "fig2": _boundary,
    "aperture": _aperture,
    "fig3": _aperture,
    "capacity": _capacity,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
}
