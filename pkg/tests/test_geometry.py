import numpy as np
import pytest

from dpmimo.geometry import (
    ArrayGeometry,
    Cluster,
    ClusterSet,
    SphericalPosition,
    aod_to_cluster,
    delta_l,
    delta_u,
    distance_to_point,
    distances_to_point,
)

from conftest import linear_array, make_clusters


def test_linear_positions_centered():
    geom = linear_array(3)
    assert np.allclose(geom.element_position(1), [0, 0, 0])
    assert np.allclose(geom.element_position(0), [-0.05, 0, 0])
    assert np.allclose(geom.element_position(2), [0.05, 0, 0])
    assert geom.center_index == 1


def test_planar_2x2_positions():
    geom = ArrayGeometry(4, "planar", rows=2, cols=2, spacing=0.05)
    got = {tuple(np.round(p, 6)) for p in geom.positions}
    want = {(-0.025, -0.025, 0.0), (0.025, -0.025, 0.0),
            (-0.025, 0.025, 0.0), (0.025, 0.025, 0.0)}
    assert got == want


@pytest.mark.parametrize("geom", [
    linear_array(7), linear_array(10),
    ArrayGeometry(12, "planar", rows=3, cols=4),
])
def test_positions_mean_is_origin(geom):
    tol = 1e-12 * geom.diagonal_dimension
    assert np.all(np.abs(geom.positions.mean(axis=0)) <= tol)


def test_diagonal_dimension_and_aspect_ratio():
    assert linear_array(70).diagonal_dimension == pytest.approx(3.45)
    assert linear_array(70).aspect_ratio == 0.0
    sq = ArrayGeometry(9, "planar", rows=3, cols=3, spacing=0.1)
    assert sq.aspect_ratio == pytest.approx(1.0)
    assert sq.diagonal_dimension == pytest.approx(0.2 * np.sqrt(2.0))


def test_diagonal_indices():
    assert list(linear_array(5).diagonal_indices()) == [0, 1, 2, 3, 4]
    sq = ArrayGeometry(9, "planar", rows=3, cols=3)
    assert list(sq.diagonal_indices()) == [0, 4, 8]


def test_element_index_out_of_range():
    with pytest.raises(IndexError):
        linear_array(3).element_position(3)


def test_distance_examples():
    geom = linear_array(3)
    assert distance_to_point(geom, 1, [30, 0, 0]) == pytest.approx(30.0)
    assert distance_to_point(geom, 0, [30, 0, 0]) == pytest.approx(30.05)
    planar = ArrayGeometry(4, "planar", rows=2, cols=2, spacing=0.05)
    d = distance_to_point(planar, 0, [0, 0, 10])
    assert d == pytest.approx(np.sqrt(10.0 ** 2 + 2 * 0.025 ** 2))


def test_distance_coincident_point_errors():
    geom = linear_array(3)
    with pytest.raises(ValueError):
        distance_to_point(geom, 1, [0, 0, 0])


def test_distances_bounded_by_half_diagonal():
    rng = np.random.default_rng(3)
    geom = ArrayGeometry(12, "planar", rows=3, cols=4, spacing=0.07)
    for _ in range(50):
        p = rng.uniform(-40, 40, 3)
        r = np.linalg.norm(p)
        if r < 1.0:
            continue
        d = distances_to_point(geom, p)
        assert np.all(np.abs(d - r) <= geom.diagonal_dimension / 2 + 1e-9)


def test_aod_examples():
    geom = linear_array(3)
    theta, phi = aod_to_cluster(geom, 1, Cluster((10, 0, 0), 0.1, 1.0))
    assert theta == pytest.approx(np.pi / 2)
    assert phi == pytest.approx(0.0)
    theta, _ = aod_to_cluster(geom, 1, Cluster((0, 0, 5), 0.1, 1.0))
    assert theta == pytest.approx(0.0)
    _, phi = aod_to_cluster(geom, 0, Cluster((10, 10, 0), 0.1, 1.0))
    assert phi == pytest.approx(np.arctan2(10, 10.05))


def test_aod_at_center_matches_cluster_angles():
    geom = linear_array(7)  # odd: center element exactly at origin
    for c in make_clusters():
        theta, phi = aod_to_cluster(geom, geom.center_index, c)
        sph = c.spherical
        assert theta == pytest.approx(sph.theta)
        assert np.cos(phi) == pytest.approx(np.cos(sph.phi))
        assert np.sin(phi) == pytest.approx(np.sin(sph.phi))


def test_delta_u_examples():
    assert delta_u(0.0, 1.3, 1.0) == pytest.approx(0.0)
    assert delta_u(np.pi / 2, np.pi / 2, 1.0) == pytest.approx(1 / np.sqrt(2))
    assert delta_u(np.pi / 2, np.pi / 4, 1.0) == pytest.approx(1.0)


def test_delta_u_halfturn_invariance():
    rng = np.random.default_rng(11)
    for _ in range(100):
        theta, phi, k = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi), rng.uniform(0, 3)
        assert delta_u(theta, phi, k) == pytest.approx(delta_u(theta, phi + np.pi, k))


def test_delta_l_examples():
    assert delta_l(0.0, 0.0) == pytest.approx(1.0)
    assert delta_l(np.pi, 0.0) == pytest.approx(-1.0)
    assert delta_l(np.pi / 2, 1.0) == pytest.approx(1 / np.sqrt(2))
    assert abs(delta_l(2.1, 0.7)) <= 1.0


def test_spherical_roundtrip():
    rng = np.random.default_rng(5)
    for _ in range(30):
        p = rng.uniform(-20, 20, 3)
        if np.linalg.norm(p) < 1e-6:
            continue
        sph = SphericalPosition.from_cartesian(p)
        assert np.allclose(sph.to_cartesian(), p)


def test_cluster_set_scaling():
    clusters = make_clusters()
    c_ratios = clusters.c_ratios(30.0)
    moved = clusters.at_user_distance(c_ratios, 60.0)
    assert np.allclose(moved.distances, 2.0 * clusters.distances)
    assert np.allclose(moved.azimuths, clusters.azimuths)
    assert np.allclose(moved.zeniths, clusters.zeniths)


def test_invalid_geometry_rejected():
    with pytest.raises(ValueError):
        ArrayGeometry(6, "planar", rows=2, cols=2)
    with pytest.raises(ValueError):
        ArrayGeometry(0, "linear")
    with pytest.raises(ValueError):
        Cluster((1, 0, 0), -0.1, 1.0)
    with pytest.raises(ValueError):
        Cluster((1, 0, 0), 0.1, 7.0)
    with pytest.raises(ValueError):
        ClusterSet(())
