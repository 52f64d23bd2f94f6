"""Scenario configuration: JSON ingestion, defaults, validation.

Angles and dB-valued quantities live only at this boundary; everything
handed to the library is radians and linear ratios. Unknown keys are
rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryThresholds
from .channel import FadingParams
from .errors import ConfigError
from .geometry import ArrayGeometry, Cluster, ClusterSet, SphericalPosition
from .optimizer import PenaltySchedule
from .polarization import PathlossParams, XpdParams

DEFAULT_CLUSTERS_M = [
    [29.3, 0.0, 6.2],
    [24.6, -4.3, 1.3],
    [39.0, -9.0, 0.0],
    [32.7, -2.9, -2.9],
    [48.5, -8.7, -8.6],
]

DEFAULTS = {
    "geometry": {
        "layout": "linear",
        "elements": 60,
        "rows": 1,
        "cols": 0,
        "spacing_m": 0.05,
        "wavelength_m": 0.1,
    },
    "user": {
        "r_m": 30.0,
        "theta_deg": 90.0,
        "phi_deg": 0.0,
        "antennas": 2,
    },
    "clusters": {
        "positions_m": DEFAULT_CLUSTERS_M,
        "azimuth_spread_deg": 35.0,
        "truncation_spread_deg": 180.0,
        "c_ratios": None,
    },
    "xpd": {
        "xpd_at_unit_db": 5.0,
        "eta": 0.8,
    },
    "pathloss": {
        "beta0_db": 0.0,
        "alpha": 4.0,
    },
    "thresholds": {
        "gamma1": 1.05,
        "gamma2": 1.05,
        "power_ratio": 1.15,
    },
    "power": {
        "p_dbm": 43.0,
        "noise_dbm": -96.0,
        "q0_factor": 4.0,
    },
    "fading": {
        "mu": 5.0,
        "seed": 20240,
        "trials": 10000,
    },
    "optimizer": {
        "subarrays": 6,
        "subarray_size": None,
        "mu0": 10.0,
        "growth": 10.0,
        "max_outer": 8,
        "inner_tol": 1e-8,
        "feas_tol": 1e-6,
        "paper_budget": False,
    },
}


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _merge(defaults: dict, overrides: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, val in overrides.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(defaults[key], dict) and not isinstance(val, dict):
            raise ConfigError(f"{here} must be a section (JSON object)")
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], val, here)
        else:
            out[key] = val
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario parameters with domain-object accessors."""

    raw: dict

    # -- blocks -----------------------------------------------------------
    def geometry(self) -> ArrayGeometry:
        g = self.raw["geometry"]
        return ArrayGeometry(g["elements"], g["layout"], g["rows"],
                             g["cols"] or g["elements"], g["spacing_m"],
                             g["wavelength_m"])

    def user(self) -> SphericalPosition:
        u = self.raw["user"]
        return SphericalPosition(u["r_m"], np.deg2rad(u["theta_deg"]),
                                 np.deg2rad(u["phi_deg"]))

    @property
    def n_ue(self) -> int:
        return self.raw["user"]["antennas"]

    def clusters(self) -> ClusterSet:
        c = self.raw["clusters"]
        n = len(c["positions_m"])
        spreads = np.broadcast_to(np.deg2rad(np.asarray(c["azimuth_spread_deg"],
                                                        dtype=float)), (n,))
        truncs = np.broadcast_to(np.deg2rad(np.asarray(c["truncation_spread_deg"],
                                                       dtype=float)), (n,))
        return ClusterSet(tuple(
            Cluster(tuple(p), float(w), float(t))
            for p, w, t in zip(c["positions_m"], spreads, truncs)))

    def c_ratios(self) -> np.ndarray:
        explicit = self.raw["clusters"]["c_ratios"]
        if explicit is not None:
            return np.asarray(explicit, dtype=float)
        return self.clusters().c_ratios(self.raw["user"]["r_m"])

    def xpd_params(self) -> XpdParams:
        x = self.raw["xpd"]
        return XpdParams(db_to_linear(x["xpd_at_unit_db"]), x["eta"])

    def pathloss_params(self) -> PathlossParams:
        p = self.raw["pathloss"]
        return PathlossParams(db_to_linear(p["beta0_db"]), p["alpha"])

    def thresholds(self) -> BoundaryThresholds:
        t = self.raw["thresholds"]
        return BoundaryThresholds(t["gamma1"], t["gamma2"], t["power_ratio"])

    def fading(self) -> FadingParams:
        f = self.raw["fading"]
        return FadingParams(f["mu"], f["seed"])

    @property
    def trials(self) -> int:
        return self.raw["fading"]["trials"]

    @property
    def seed(self) -> int:
        return self.raw["fading"]["seed"]

    def schedule(self) -> PenaltySchedule:
        o = self.raw["optimizer"]
        return PenaltySchedule(o["mu0"], o["growth"], o["max_outer"],
                               o["inner_tol"], o["feas_tol"])

    @property
    def subarrays(self) -> int:
        return self.raw["optimizer"]["subarrays"]

    @property
    def subarray_size(self) -> int:
        return self.raw["geometry"]["elements"] // self.subarrays

    @property
    def paper_budget(self) -> bool:
        return self.raw["optimizer"]["paper_budget"]

    @property
    def gamma(self) -> float:
        p = self.raw["power"]
        return db_to_linear(p["p_dbm"] - p["noise_dbm"])

    @property
    def q0(self) -> float:
        return self.raw["power"]["q0_factor"] / (2 * self.raw["geometry"]["elements"])

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def replace(self, **sections) -> "ScenarioConfig":
        """New config with section dicts shallow-updated, then revalidated."""
        raw = copy.deepcopy(self.raw)
        for name, upd in sections.items():
            if name not in raw:
                raise ConfigError(f"unknown config key: {name}")
            raw[name].update(upd)
        return _validate(raw)


def _require(cond: bool, rule: str):
    if not cond:
        raise ConfigError(rule)


def _validate(raw: dict) -> ScenarioConfig:
    g = raw["geometry"]
    _require(g["layout"] in ("linear", "planar"),
             f"geometry.layout must be 'linear' or 'planar', got {g['layout']!r}")
    _require(int(g["elements"]) >= 1, "geometry.elements must be >= 1")
    if g["layout"] == "planar":
        _require(g["rows"] * (g["cols"] or 0) == g["elements"],
                 f"planar grid rows*cols = {g['rows']}*{g['cols']} "
                 f"must equal geometry.elements = {g['elements']}")
    _require(g["spacing_m"] > 0 and g["wavelength_m"] > 0,
             "geometry.spacing_m and wavelength_m must be positive")

    u = raw["user"]
    _require(u["r_m"] > 0, "user.r_m must be positive")
    _require(int(u["antennas"]) >= 1, "user.antennas must be >= 1")

    c = raw["clusters"]
    _require(len(c["positions_m"]) >= 1, "clusters.positions_m must list at least one cluster")
    if c["c_ratios"] is not None:
        _require(len(c["c_ratios"]) == len(c["positions_m"]),
                 "clusters.c_ratios must match the number of clusters")
        _require(all(v > 0 for v in c["c_ratios"]), "clusters.c_ratios must be positive")

    x = raw["xpd"]
    _require(x["eta"] >= 0, "xpd.eta must be nonnegative")

    p = raw["pathloss"]
    _require(p["alpha"] > 0, "pathloss.alpha must be positive")

    t = raw["thresholds"]
    _require(min(t["gamma1"], t["gamma2"], t["power_ratio"]) > 1,
             "thresholds gamma1, gamma2, power_ratio must all exceed 1")

    pw = raw["power"]
    _require(pw["q0_factor"] >= 1,
             f"infeasible per-antenna cap: q0*2M = power.q0_factor = {pw['q0_factor']} < 1")

    f = raw["fading"]
    _require(f["mu"] >= 0.5, "fading.mu must be at least 0.5")
    _require(int(f["trials"]) >= 1, "fading.trials must be >= 1")

    o = raw["optimizer"]
    m = int(g["elements"])
    s = int(o["subarrays"])
    _require(s >= 1, "optimizer.subarrays must be >= 1")
    _require(m % s == 0,
             f"optimizer.subarrays = {s} must divide geometry.elements = {m}")
    if o["subarray_size"] is not None:
        _require(s * int(o["subarray_size"]) == m,
                 f"optimizer.subarrays * optimizer.subarray_size = "
                 f"{s}*{o['subarray_size']} must equal geometry.elements = {m}")
    _require(o["max_outer"] >= 1, "optimizer.max_outer must be >= 1")

    return ScenarioConfig(raw)


def load_config(text: str | None = None, path: str | None = None) -> ScenarioConfig:
    """Parse, merge with defaults, and validate a scenario document.

    An empty document yields the full default scenario. Parse errors carry
    line and column; validation errors name the violated rule.
    """
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    if text is None or text.strip() == "":
        overrides = {}
    else:
        try:
            overrides = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"config parse error at line {e.lineno}, column {e.colno}: {e.msg}"
            ) from e
        if not isinstance(overrides, dict):
            raise ConfigError("config document must be a JSON object")
    return _validate(_merge(DEFAULTS, overrides))
