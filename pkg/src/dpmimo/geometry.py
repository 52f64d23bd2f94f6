"""Array, user, and cluster geometry.

Positions live in Cartesian coordinates with the antenna array in the x-y
plane centered at the origin. All lengths are meters, all angles radians.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

LayoutKind = str  # "linear" or "planar"


@dataclass(frozen=True)
class ArrayGeometry:
    """A dual-polarized antenna array in the x-y plane.

    ``num_elements`` counts dual-polarized elements (each carries a V and an
    H port, so the array has 2*num_elements ports). Linear arrays run along
    the x axis; planar arrays are row-major grids with ``cols`` along x and
    ``rows`` along y.
    """

    num_elements: int
    layout: LayoutKind = "linear"
    rows: int = 1
    cols: int = 0
    spacing: float = 0.05
    wavelength: float = 0.1

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError("need at least one antenna element")
        if self.spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")
        if self.layout == "linear":
            object.__setattr__(self, "rows", 1)
            object.__setattr__(self, "cols", self.num_elements)
        elif self.layout == "planar":
            if self.cols <= 0:
                raise ValueError("planar layout needs cols > 0")
            if self.rows * self.cols != self.num_elements:
                raise ValueError(
                    f"planar grid {self.rows}x{self.cols} != {self.num_elements} elements"
                )
        else:
            raise ValueError(f"unknown layout {self.layout!r}")

    @cached_property
    def positions(self) -> np.ndarray:
        """(M, 3) element positions, centered on the origin, row-major by (y, x)."""
        ix = np.arange(self.cols) - (self.cols - 1) / 2.0
        iy = np.arange(self.rows) - (self.rows - 1) / 2.0
        gx, gy = np.meshgrid(ix, iy)  # row-major: y varies slowest
        pos = np.zeros((self.num_elements, 3))
        pos[:, 0] = gx.ravel() * self.spacing
        pos[:, 1] = gy.ravel() * self.spacing
        return pos

    @property
    def center_index(self) -> int:
        """Index of the reference "0-th" element (nearest the centroid)."""
        return self.num_elements // 2

    @property
    def diagonal_dimension(self) -> float:
        """Distance D between the two extreme diagonal elements."""
        dx = (self.cols - 1) * self.spacing
        dy = (self.rows - 1) * self.spacing
        return float(np.hypot(dx, dy))

    @property
    def aspect_ratio(self) -> float:
        """Ratio k of y-extent to x-extent (0 for a linear array along x)."""
        dx = (self.cols - 1) * self.spacing
        dy = (self.rows - 1) * self.spacing
        if dx == 0.0:
            return float("inf") if dy > 0 else 0.0
        return dy / dx

    def diagonal_indices(self) -> np.ndarray:
        """Elements nearest the main diagonal through the extreme corners.

        For linear arrays this is every element; for planar arrays, the one
        element per column closest to the corner-to-corner line.
        """
        if self.layout == "linear" or self.rows == 1 or self.cols == 1:
            return np.arange(self.num_elements)
        picks = []
        for c in range(self.cols):
            r_exact = c * (self.rows - 1) / (self.cols - 1)
            r = int(round(r_exact))
            picks.append(r * self.cols + c)
        return np.array(sorted(set(picks)))

    def element_position(self, m: int) -> np.ndarray:
        if not 0 <= m < self.num_elements:
            raise IndexError(f"element index {m} out of range [0, {self.num_elements})")
        return self.positions[m].copy()


@dataclass(frozen=True)
class SphericalPosition:
    """Point in spherical coordinates: radius, zenith angle, azimuth."""

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "phi", float(self.phi) % (2 * np.pi))

    def to_cartesian(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([
            self.r * st * np.cos(self.phi),
            self.r * st * np.sin(self.phi),
            self.r * np.cos(self.theta),
        ])

    @staticmethod
    def from_cartesian(p) -> "SphericalPosition":
        p = np.asarray(p, dtype=float)
        r = float(np.linalg.norm(p))
        if r == 0.0:
            raise ValueError("origin has no spherical angles")
        return SphericalPosition(r, float(np.arccos(np.clip(p[2] / r, -1.0, 1.0))),
                                 float(np.arctan2(p[1], p[0])))


@dataclass(frozen=True)
class Cluster:
    """A scatterer cluster: position plus azimuth spread and truncation spread."""

    position: tuple
    azimuth_spread: float
    truncation_spread: float

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        if self.azimuth_spread <= 0:
            raise ValueError("azimuth spread must be positive")
        if not 0 < self.truncation_spread <= 2 * np.pi:
            raise ValueError("truncation spread must lie in (0, 2*pi]")

    @property
    def spherical(self) -> SphericalPosition:
        return SphericalPosition.from_cartesian(self.position)


@dataclass(frozen=True)
class ClusterSet:
    """Ordered collection of clusters with vectorized views."""

    clusters: tuple

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        if len(self.clusters) < 1:
            raise ValueError("need at least one cluster")

    def __len__(self):
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([c.position for c in self.clusters])

    @cached_property
    def distances(self) -> np.ndarray:
        """r_0^(l): cluster distances from the array center."""
        return np.linalg.norm(self.positions, axis=1)

    @cached_property
    def azimuths(self) -> np.ndarray:
        p = self.positions
        return np.arctan2(p[:, 1], p[:, 0])

    @cached_property
    def zeniths(self) -> np.ndarray:
        return np.arccos(np.clip(self.positions[:, 2] / self.distances, -1.0, 1.0))

    @cached_property
    def azimuth_spreads(self) -> np.ndarray:
        return np.array([c.azimuth_spread for c in self.clusters])

    @cached_property
    def truncation_spreads(self) -> np.ndarray:
        return np.array([c.truncation_spread for c in self.clusters])

    def c_ratios(self, r_u: float) -> np.ndarray:
        """c^(l) = r_0^(l) / r_U for a given user distance."""
        if r_u <= 0:
            raise ValueError("user distance must be positive")
        return self.distances / r_u

    def scaled(self, factor) -> "ClusterSet":
        """Clusters moved radially so each distance becomes factor * r_0^(l).

        ``factor`` may be a scalar or per-cluster array. Directions and
        angular spreads are preserved.
        """
        factor = np.broadcast_to(np.asarray(factor, dtype=float), (len(self),))
        moved = []
        for f, c in zip(factor, self.clusters):
            moved.append(Cluster(tuple(f * v for v in c.position),
                                 c.azimuth_spread, c.truncation_spread))
        return ClusterSet(tuple(moved))

    def at_user_distance(self, c_ratios: np.ndarray, r_u: float) -> "ClusterSet":
        """Clusters placed at r_0^(l) = c^(l) * r_U along their directions."""
        target = np.asarray(c_ratios, dtype=float) * r_u
        return self.scaled(target / self.distances)


def distance_to_point(geom: ArrayGeometry, m: int, p) -> float:
    """Propagation distance from element m to a Cartesian point."""
    d = float(np.linalg.norm(np.asarray(p, dtype=float) - geom.element_position(m)))
    if d == 0.0:
        raise ValueError("point coincides with the antenna element")
    return d


def distances_to_point(geom: ArrayGeometry, p) -> np.ndarray:
    """Distances from every element to a Cartesian point, shape (M,)."""
    d = np.linalg.norm(np.asarray(p, dtype=float)[None, :] - geom.positions, axis=1)
    if np.any(d == 0.0):
        raise ValueError("point coincides with an antenna element")
    return d


def aod_to_cluster(geom: ArrayGeometry, m: int, cluster: Cluster) -> tuple:
    """Departure angles (theta, phi) from element m toward a cluster, global frame."""
    v = np.asarray(cluster.position) - geom.element_position(m)
    r = np.linalg.norm(v)
    if r == 0.0:
        raise ValueError("cluster coincides with the antenna element")
    theta = float(np.arccos(np.clip(v[2] / r, -1.0, 1.0)))
    phi = float(np.arctan2(v[1], v[0]))
    return theta, phi


def aod_azimuths(geom: ArrayGeometry, clusters: ClusterSet) -> np.ndarray:
    """Mean azimuth departure angles phi_m^(l), shape (M, L)."""
    d = clusters.positions[None, :, :] - geom.positions[:, None, :]
    return np.arctan2(d[:, :, 1], d[:, :, 0])


def delta_u(theta_u: float, phi_u: float, k: float) -> float:
    """Projection of the user direction onto the array diagonal, in [0, 1].

    |sin(theta) cos(phi) + k sin(theta) sin(phi)| / sqrt(1 + k^2).
    """
    if k < 0:
        raise ValueError("aspect ratio k must be nonnegative")
    if np.isinf(k):
        return abs(np.sin(theta_u) * np.sin(phi_u))
    return abs(np.sin(theta_u) * (np.cos(phi_u) + k * np.sin(phi_u))) / np.sqrt(1.0 + k * k)


def delta_l(phi_0: float, k: float) -> float:
    """Signed diagonal-direction cosine of a cluster azimuth, in [-1, 1]."""
    if k < 0:
        raise ValueError("aspect ratio k must be nonnegative")
    if np.isinf(k):
        return float(np.sin(phi_0))
    return float((np.cos(phi_0) + k * np.sin(phi_0)) / np.sqrt(1.0 + k * k))
