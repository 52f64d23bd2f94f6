"""Antenna-dependent cross-polarization discrimination (XPD).

The XPD seen from element m factors into a distance term chi1(d_m) and an
angle-of-departure term chi2({phi_m^(l)}); per-entry channel power gains
follow from the pathloss beta_m and the normalized split l_m = 1/(1+XPD_m).
All quantities are linear ratios; dB conversion happens only at the config
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChiTwoDomainError
from .geometry import ArrayGeometry, ClusterSet, aod_azimuths, distances_to_point


@dataclass(frozen=True)
class XpdParams:
    """XPD at unit distance (linear) and the distance-growth exponent eta."""

    xpd_at_unit_distance: float
    eta: float

    def __post_init__(self):
        if self.xpd_at_unit_distance <= 0:
            raise ValueError("unit-distance XPD must be positive")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")


@dataclass(frozen=True)
class PathlossParams:
    """Pathloss beta_m = beta0 * d^(-alpha), both parameters linear."""

    beta0: float
    alpha: float

    def __post_init__(self):
        if self.beta0 <= 0 or self.alpha <= 0:
            raise ValueError("beta0 and alpha must be positive")


def chi1(d, params: XpdParams):
    """Distance component of XPD: xpd_at_unit_distance * d**eta."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("propagation distance must be positive")
    out = params.xpd_at_unit_distance * d ** params.eta
    return float(out) if out.ndim == 0 else out


def pathloss(d, params: PathlossParams):
    """beta0 * d**(-alpha)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("propagation distance must be positive")
    out = params.beta0 * d ** (-params.alpha)
    return float(out) if out.ndim == 0 else out


def chi2_ratio_raw(aods, clusters: ClusterSet):
    """Unnormalized AoD component of XPD.

    ``aods`` holds one azimuth per cluster in the trailing axis; leading axes
    broadcast (e.g. shape (M, L) evaluates all elements at once). Numerator
    and denominator are summed over clusters separately, then divided.
    """
    phi = np.asarray(aods, dtype=float)
    w = clusters.azimuth_spreads
    dp = clusters.truncation_spreads
    with np.errstate(over="ignore", invalid="ignore"):
        e = 2.0 * np.exp(dp / (np.sqrt(2.0) * w))
        base = 1.0 + 2.0 * w * w
        c2 = np.cos(2.0 * phi)
        num = (e * (base - c2) - 2.0 * base + 2.0 * np.cos(dp) * c2
               - 2.0 * np.sqrt(2.0) * w * np.sin(dp) * c2).sum(axis=-1)
        den = (e * (base + c2) - 2.0 * base - 2.0 * np.cos(dp) * c2
               + 2.0 * np.sqrt(2.0) * w * np.sin(dp) * c2).sum(axis=-1)
    if (np.any(den <= 0) or np.any(num <= 0)
            or not (np.all(np.isfinite(num)) and np.all(np.isfinite(den)))):
        raise ChiTwoDomainError(
            "chi2 undefined at this geometry: nonpositive or non-finite "
            "co/cross angular power"
        )
    out = num / den
    return float(out) if out.ndim == 0 else out


def chi2(aods, clusters: ClusterSet, normalizer: float):
    """AoD component of XPD, scaled so the center element evaluates to 1."""
    out = normalizer * np.asarray(chi2_ratio_raw(aods, clusters))
    return float(out) if out.ndim == 0 else out


def calibrate_chi2_normalizer(geom: ArrayGeometry, clusters: ClusterSet) -> float:
    """Reciprocal of the raw chi2 ratio at the array-center element."""
    phis = aod_azimuths(geom, clusters)[geom.center_index]
    return 1.0 / chi2_ratio_raw(phis, clusters)


def xpd(m: int, geom: ArrayGeometry, user_position, clusters: ClusterSet,
        params: XpdParams, normalizer: float | None = None) -> float:
    """XPD_m = chi1(d_m) * chi2({phi_m^(l)}) for a single element."""
    if normalizer is None:
        normalizer = calibrate_chi2_normalizer(geom, clusters)
    d = distances_to_point(geom, np.asarray(user_position, dtype=float))[m]
    phis = aod_azimuths(geom, clusters)[m]
    return float(chi1(d, params) * chi2(phis, clusters, normalizer))


def xpd_profile(geom: ArrayGeometry, user_position, clusters: ClusterSet,
                params: XpdParams) -> np.ndarray:
    """XPD for every element, shape (M,)."""
    normalizer = calibrate_chi2_normalizer(geom, clusters)
    d = distances_to_point(geom, np.asarray(user_position, dtype=float))
    phis = aod_azimuths(geom, clusters)
    return chi1(d, params) * chi2(phis, clusters, normalizer)


def l_of_xpd(x):
    """Normalized polarization split l = 1/(1+XPD), strictly decreasing."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("XPD must be nonnegative")
    out = 1.0 / (1.0 + x)
    return float(out) if out.ndim == 0 else out


def power_gains(beta, l):
    """Per-entry mean power gains (co, cross) = (beta*(1-l), beta*l)."""
    beta = np.asarray(beta, dtype=float)
    l = np.asarray(l, dtype=float)
    co = beta * (1.0 - l)
    cross = beta * l
    if co.ndim == 0:
        return float(co), float(cross)
    return co, cross
