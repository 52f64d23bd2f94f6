"""Near/far-field boundaries driven by non-uniform XPD.

Closed-form thresholds follow the diagonal-element Taylor analysis; the
numeric search evaluates the defining max/min ratio conditions exhaustively
over all elements and locates the largest distance where either condition
still holds (consistent with the closed form's max structure).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChiTwoDomainError
from .geometry import (
    ArrayGeometry,
    ClusterSet,
    aod_azimuths,
    delta_l,
    delta_u,
    distances_to_point,
)
from .polarization import chi2_ratio_raw

FD_STEP = 1e-5  # rad, central-difference step for d(chi2)/d(phi)


@dataclass(frozen=True)
class BoundaryThresholds:
    """Ratio thresholds: gamma1/gamma2 for the XPD components, plus the
    max/min pathloss ratio used by the uniform-power comparison distance."""

    gamma1: float = 1.05
    gamma2: float = 1.05
    power_ratio: float = 1.15

    def __post_init__(self):
        if min(self.gamma1, self.gamma2, self.power_ratio) <= 1.0:
            raise ValueError("all boundary thresholds must exceed 1")


@dataclass(frozen=True)
class BoundaryReport:
    """Closed-form boundary distances for one user direction."""

    r_u_th: float
    r_1_th: float
    chi2_term: float
    rayleigh: float
    uniform_power: float
    a_th: float | None = None
    inputs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NumericBoundary:
    distance: float
    status: str  # "converged", "empty", "unbounded-bracket", "scan-fallback"


@dataclass(frozen=True)
class ApertureResult:
    a_th: float
    term_chi1: float
    term_chi2: float
    b: float


@dataclass(frozen=True)
class SearchConfig:
    r_min: float
    r_max: float
    tol: float = 1e-3
    max_iter: int = 60
    scan_points: int = 128


def _indicator_split(delta: float, x: float, normal: float, projection: float) -> float:
    """Two-branch selection with threshold sqrt(1 - 4/(x+3)); ties take the max."""
    thr = np.sqrt(max(1.0 - 4.0 / (x + 3.0), 0.0))
    if delta > thr:
        return normal
    if delta < thr:
        return projection
    return max(normal, projection)


def r1_threshold(d_dim: float, delta: float, eta: float, gamma1: float) -> float:
    """Distance below which the chi1 max/min ratio exceeds gamma1.

    Normal branch (user near the diagonal direction): Taylor endpoint ratio.
    Projection branch (user near broadside): exact solve with the minimum
    distance at the user's projection onto the diagonal.
    """
    if d_dim <= 0:
        raise ValueError("diagonal dimension must be positive")
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta_U must lie in [0, 1]")
    if gamma1 <= 1.0:
        raise ValueError("gamma1 must exceed 1")
    if eta == 0.0:
        return 0.0
    x = gamma1 ** (2.0 / eta)
    normal = (gamma1 + 1.0) / (gamma1 - 1.0) * eta * d_dim * delta / 2.0
    den = 2.0 * (1.0 - x + x * delta * delta)
    num = -d_dim * delta - np.sqrt((x - 1.0) * d_dim * d_dim * (1.0 - delta * delta))
    projection = num / den
    return _indicator_split(delta, x, normal, projection)


def rayleigh_distance(d_dim: float, wavelength: float) -> float:
    """Classic phase-error boundary 2*D^2/lambda."""
    if d_dim <= 0 or wavelength <= 0:
        raise ValueError("diagonal dimension and wavelength must be positive")
    return 2.0 * d_dim * d_dim / wavelength


def uniform_power_distance(d_dim: float, delta: float, alpha: float,
                           power_ratio: float) -> float:
    """Largest distance at which max/min pathloss across the array >= ratio.

    Same diagonal-element argument as the chi1 threshold with beta =
    beta0*d^(-alpha): endpoint solve (D*delta/2)*(rho+1)/(rho-1) with
    rho = ratio^(1/alpha) away from broadside, exact projection solve near
    broadside.
    """
    if d_dim <= 0 or alpha <= 0:
        raise ValueError("diagonal dimension and alpha must be positive")
    if power_ratio <= 1.0:
        raise ValueError("power ratio threshold must exceed 1")
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta_U must lie in [0, 1]")
    rho = power_ratio ** (1.0 / alpha)
    x = rho * rho
    normal = d_dim * delta / 2.0 * (rho + 1.0) / (rho - 1.0)
    den = 2.0 * (1.0 - x + x * delta * delta)
    num = -d_dim * delta - np.sqrt((x - 1.0) * d_dim * d_dim * (1.0 - delta * delta))
    projection = num / den
    return _indicator_split(delta, x, normal, projection)


def _center_cluster_frame(geom: ArrayGeometry | None, clusters: ClusterSet):
    """Cluster spherical data (r0, theta0, phi0) relative to the reference
    element (array center), or to the origin when no array is given."""
    if geom is None:
        return clusters.distances, clusters.zeniths, clusters.azimuths
    center = geom.positions[geom.center_index]
    rel = clusters.positions - center[None, :]
    r0 = np.linalg.norm(rel, axis=1)
    theta0 = np.arccos(np.clip(rel[:, 2] / r0, -1.0, 1.0))
    phi0 = np.arctan2(rel[:, 1], rel[:, 0])
    return r0, theta0, phi0


def chi2_center_derivatives(clusters: ClusterSet,
                            geom: ArrayGeometry | None = None) -> np.ndarray:
    """d(chi2)/d(phi^(l)) of the center-normalized chi2 at the center AoDs.

    Central finite differences with step FD_STEP; chi2 is normalized so its
    value at the expansion point is exactly 1.
    """
    _, _, phi0 = _center_cluster_frame(geom, clusters)
    ref = chi2_ratio_raw(phi0, clusters)
    grads = np.empty(len(clusters))
    for l in range(len(clusters)):
        up = phi0.copy()
        dn = phi0.copy()
        up[l] += FD_STEP
        dn[l] -= FD_STEP
        grads[l] = (chi2_ratio_raw(up, clusters) - chi2_ratio_raw(dn, clusters)) / (2 * FD_STEP)
    return grads / ref


def chi2_distance_term(geom: ArrayGeometry, clusters: ClusterSet,
                       c_ratios, gamma2: float) -> float:
    """AoD-driven term of the non-uniform XPD distance.

    (gamma2+1)/(gamma2-1) * |sum_l dchi2_l * sin(arctan(k)+phi0_l) * D /
    (2 c_l sin(theta0_l))|.
    """
    c_ratios = np.asarray(c_ratios, dtype=float)
    if np.any(c_ratios <= 0):
        bad = int(np.argmax(c_ratios <= 0))
        raise ValueError(f"cluster {bad}: distance ratio c^(l) must be positive")
    _, theta0, phi0 = _center_cluster_frame(geom, clusters)
    sin_t = np.sin(theta0)
    if np.any(sin_t == 0.0):
        bad = int(np.argmax(sin_t == 0.0))
        raise ValueError(f"cluster {bad} lies on the array normal (sin(theta0)=0)")
    grads = chi2_center_derivatives(clusters, geom)
    k = geom.aspect_ratio
    d_dim = geom.diagonal_dimension
    term = np.sum(grads * np.sin(np.arctan(k) + phi0) * d_dim / (2.0 * c_ratios * sin_t))
    return (gamma2 + 1.0) / (gamma2 - 1.0) * abs(term)


def xpd_distance_closed(geom: ArrayGeometry, theta_u: float, phi_u: float,
                        clusters: ClusterSet, c_ratios, eta: float,
                        thresholds: BoundaryThresholds) -> tuple[float, float, float]:
    """Closed-form non-uniform XPD distance.

    Returns (r_u_th, r_1_th, chi2_term) with r_u_th = max of the components.
    """
    du = delta_u(theta_u, phi_u, geom.aspect_ratio)
    r1 = r1_threshold(geom.diagonal_dimension, du, eta, thresholds.gamma1)
    term2 = chi2_distance_term(geom, clusters, c_ratios, thresholds.gamma2)
    return max(r1, term2), r1, term2


def component_ratios(geom: ArrayGeometry, theta_u: float, phi_u: float, r: float,
                     clusters: ClusterSet, c_ratios, eta: float) -> tuple[float, float]:
    """Exhaustive max/min ratios of chi1 and chi2 over all elements at
    distance r, with clusters placed at r_0^(l) = c^(l)*r."""
    user = r * np.array([np.sin(theta_u) * np.cos(phi_u),
                         np.sin(theta_u) * np.sin(phi_u),
                         np.cos(theta_u)])
    d = distances_to_point(geom, user)
    ratio1 = (d.max() / d.min()) ** eta
    placed = clusters.at_user_distance(np.asarray(c_ratios, dtype=float), r)
    vals = chi2_ratio_raw(aod_azimuths(geom, placed), placed)
    ratio2 = vals.max() / vals.min()
    return float(ratio1), float(ratio2)


def xpd_distance_numeric(geom: ArrayGeometry, theta_u: float, phi_u: float,
                         clusters: ClusterSet, c_ratios, eta: float,
                         thresholds: BoundaryThresholds,
                         search: SearchConfig) -> NumericBoundary:
    """Largest distance in the bracket where a defining ratio condition holds.

    The predicate mirrors the closed form's max structure: it is true while
    the chi1 ratio >= gamma1 or the chi2 ratio >= gamma2. A 128-point scan
    guards against non-monotone predicates before bisecting; chi2 domain
    errors deep in the near field count as the condition holding.
    """
    c_ratios = np.asarray(c_ratios, dtype=float)

    def predicate(r: float) -> bool:
        try:
            ratio1, ratio2 = component_ratios(geom, theta_u, phi_u, r,
                                              clusters, c_ratios, eta)
        except ChiTwoDomainError:
            return True
        return ratio1 >= thresholds.gamma1 or ratio2 >= thresholds.gamma2

    grid = np.linspace(search.r_min, search.r_max, search.scan_points)
    flags = np.array([predicate(r) for r in grid])
    if not flags.any():
        return NumericBoundary(search.r_min, "empty")
    if flags[-1]:
        return NumericBoundary(search.r_max, "unbounded-bracket")

    transitions = int(np.sum(flags[:-1] != flags[1:]))
    last_true = int(np.max(np.nonzero(flags)[0]))
    lo, hi = grid[last_true], grid[last_true + 1]
    status = "converged" if transitions <= 1 else "scan-fallback"
    for _ in range(search.max_iter):
        if hi - lo <= search.tol:
            break
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return NumericBoundary(0.5 * (lo + hi), status)


def build_report(geom: ArrayGeometry, theta_u: float, phi_u: float, r_u: float,
                 clusters: ClusterSet, c_ratios, eta: float, alpha: float,
                 thresholds: BoundaryThresholds) -> BoundaryReport:
    """All boundary distances for one user direction, plus the aperture at
    the user's own distance, with an echo of the driving inputs."""
    r_u_th, r1, term2 = xpd_distance_closed(geom, theta_u, phi_u, clusters,
                                            c_ratios, eta, thresholds)
    du = delta_u(theta_u, phi_u, geom.aspect_ratio)
    aperture = xpd_aperture(r_u, theta_u, phi_u,
                            clusters.at_user_distance(np.asarray(c_ratios, dtype=float), r_u),
                            eta, thresholds, geom.aspect_ratio)
    return BoundaryReport(
        r_u_th=r_u_th, r_1_th=r1, chi2_term=term2,
        rayleigh=rayleigh_distance(geom.diagonal_dimension, geom.wavelength),
        uniform_power=uniform_power_distance(geom.diagonal_dimension, du, alpha,
                                             thresholds.power_ratio),
        a_th=aperture.a_th,
        inputs={
            "num_elements": geom.num_elements,
            "diagonal_dimension_m": geom.diagonal_dimension,
            "aspect_ratio": geom.aspect_ratio,
            "theta_u_rad": theta_u,
            "phi_u_rad": phi_u,
            "r_u_m": r_u,
            "delta_u": du,
            "eta": eta,
            "alpha": alpha,
            "gamma1": thresholds.gamma1,
            "gamma2": thresholds.gamma2,
            "power_ratio": thresholds.power_ratio,
            "c_ratios": [float(c) for c in np.asarray(c_ratios, dtype=float)],
        })


def xpd_aperture(r_u: float, theta_u: float, phi_u: float, clusters: ClusterSet,
                 eta: float, thresholds: BoundaryThresholds, k: float) -> ApertureResult:
    """Smallest aperture with non-negligible XPD variation at distance r_u.

    Both published terms are reported verbatim; note they carry different
    dimensions (the first is linear in r_u, the second quadratic through
    1/b^2), so the max can switch scale along sweeps.
    """
    if r_u <= 0:
        raise ValueError("user distance must be positive")
    pref = k / (1.0 + k * k)
    du = delta_u(theta_u, phi_u, k)
    if du > 0 and eta > 0:
        term1 = pref * (2.0 * r_u / (eta * du)) * (1.0 - 2.0 / (thresholds.gamma1 + 1.0))
    else:
        term1 = float("inf")

    r0, theta0, phi0 = _center_cluster_frame(None, clusters)
    sin_t = np.sin(theta0)
    if np.any(sin_t == 0.0):
        bad = int(np.argmax(sin_t == 0.0))
        raise ValueError(f"cluster {bad} lies on the array normal (sin(theta0)=0)")
    grads = chi2_center_derivatives(clusters)
    dl = np.array([delta_l(p, k) for p in phi0])
    # -delta*sqrt(1-delta^2)/|delta| jumps at delta = 0; clamp the sign there
    # so clusters orthogonal to the diagonal drop out instead of flipping on
    # rounding noise
    sign = np.where(np.abs(dl) < 1e-12, 0.0, np.sign(dl))
    weights = -sign * np.sqrt(np.clip(1.0 - dl * dl, 0.0, None))
    b = abs(np.sum(grads * weights / (r0 * sin_t)))
    chi2_center = 1.0  # normalized by construction
    if b > 0:
        term2 = pref * (2.0 * chi2_center * (thresholds.gamma2 - 1.0)
                        / ((thresholds.gamma2 + 1.0) * b)) ** 2
    else:
        term2 = float("inf")
    return ApertureResult(max(term1, term2), term1, term2, float(b))
