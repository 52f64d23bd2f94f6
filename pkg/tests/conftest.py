import numpy as np
import pytest

from dpmimo.boundary import BoundaryThresholds
from dpmimo.geometry import ArrayGeometry, Cluster, ClusterSet
from dpmimo.polarization import PathlossParams, XpdParams

# scattering scenario used throughout: five clusters around a 30 m user
CLUSTER_POSITIONS = (
    (29.3, 0.0, 6.2),
    (24.6, -4.3, 1.3),
    (39.0, -9.0, 0.0),
    (32.7, -2.9, -2.9),
    (48.5, -8.7, -8.6),
)


def make_clusters(omega_deg=35.0, dphi_deg=180.0, positions=CLUSTER_POSITIONS):
    w = np.deg2rad(omega_deg)
    t = np.deg2rad(dphi_deg)
    return ClusterSet(tuple(Cluster(p, w, t) for p in positions))


def linear_array(m, spacing=0.05, wavelength=0.1):
    return ArrayGeometry(m, "linear", spacing=spacing, wavelength=wavelength)


@pytest.fixture
def clusters():
    return make_clusters()


@pytest.fixture
def xpd_params():
    return XpdParams(10.0 ** 0.5, 0.8)  # 5 dB at unit distance


@pytest.fixture
def pathloss_params():
    return PathlossParams(1.0, 4.0)


@pytest.fixture
def thresholds():
    return BoundaryThresholds(1.05, 1.05, 1.15)
