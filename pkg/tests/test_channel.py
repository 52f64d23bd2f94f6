import numpy as np
import pytest

from dpmimo.channel import (
    ChannelStats,
    FadingParams,
    build_channel_stats,
    sample_channel,
    stats_from_gains,
    tie_to_subarrays,
)
from dpmimo.polarization import PathlossParams, XpdParams, l_of_xpd, xpd_profile

from conftest import linear_array, make_clusters


def sec6_stats(m=80, subarrays=8, n_ue=2):
    geom = linear_array(m)
    return build_channel_stats(geom, np.array([30.0, 0.0, 0.0]), make_clusters(),
                               XpdParams(10.0 ** 0.5, 0.8), PathlossParams(1.0, 4.0),
                               n_ue, subarrays), geom


def test_block_structure():
    stats, geom = sec6_stats()
    n, m = stats.n_ue, stats.n_bs
    omega = stats.omega
    co = stats.beta * (1 - stats.l)
    cross = stats.beta * stats.l
    assert np.allclose(omega[:n, :m], co[None, :])
    assert np.allclose(omega[n:, m:], co[None, :])
    assert np.allclose(omega[:n, m:], cross[None, :])
    assert np.allclose(omega[n:, :m], cross[None, :])
    assert np.allclose(stats.amp ** 2, omega, rtol=1e-12)
    # per-antenna conservation: V-column plus H-column sums give 2N*beta_m
    col_pair_sums = omega[:, :m].sum(axis=0) + omega[:, m:].sum(axis=0)
    assert np.allclose(col_pair_sums, 2 * n * stats.beta, rtol=1e-12)


def test_columns_recompute_per_antenna():
    stats, geom = sec6_stats()
    d = np.linalg.norm(np.array([30.0, 0.0, 0.0]) - geom.positions, axis=1)
    assert np.allclose(stats.beta, d ** -4.0, rtol=1e-12)
    prof = xpd_profile(geom, np.array([30.0, 0.0, 0.0]), make_clusters(),
                       XpdParams(10.0 ** 0.5, 0.8))
    assert np.allclose(stats.l, l_of_xpd(prof), rtol=1e-12)
    # non-uniform across the aperture
    assert np.unique(np.round(stats.beta, 12)).size > 1
    assert np.unique(np.round(stats.l, 12)).size > 1


def test_uniform_gains_give_equal_columns():
    stats = stats_from_gains(np.full(6, 2e-6), np.full(6, 0.2), 2, 3, 2)
    omega = stats.omega
    for block in (omega[:, :6], omega[:, 6:]):
        assert np.allclose(block, block[:, :1])


def test_tie_to_subarrays():
    stats, _ = sec6_stats()
    tied = tie_to_subarrays(stats)
    s, m0 = tied.subarrays, tied.subarray_size
    assert tied.tied
    assert np.allclose(tied.beta.reshape(s, m0).std(axis=1), 0.0)
    assert np.allclose(tied.beta.reshape(s, m0)[:, 0],
                       stats.beta.reshape(s, m0).mean(axis=1))
    # S = M: tying is the identity
    eye_stats = stats_from_gains(stats.beta, stats.l, 2, stats.n_bs, 1)
    assert np.allclose(tie_to_subarrays(eye_stats).beta, stats.beta)
    # S = 1: full averaging
    one = tie_to_subarrays(stats_from_gains(stats.beta, stats.l, 2, 1, stats.n_bs))
    assert np.allclose(one.beta, stats.beta.mean())


def test_subarray_shape_validated():
    with pytest.raises(ValueError):
        stats_from_gains(np.ones(6), np.full(6, 0.2), 2, 4, 2)


def test_sampling_reproducible_and_distinct():
    stats, _ = sec6_stats(m=8, subarrays=2)
    fading = FadingParams(5.0, 1234)
    g1 = sample_channel(stats, fading, 3)
    g2 = sample_channel(stats, fading, 3)
    assert np.array_equal(g1, g2)
    assert not np.array_equal(g1, sample_channel(stats, fading, 4))
    assert not np.array_equal(g1, sample_channel(stats, FadingParams(5.0, 99), 3))
    assert g1.shape == (2 * stats.n_ue, 2 * stats.n_bs)


def test_zero_gain_entries_sample_to_zero():
    stats = stats_from_gains(np.array([1.0, 1.0]), np.array([0.0, 0.0]), 1, 1, 2)
    g = sample_channel(stats, FadingParams(5.0, 0), 0)
    n, m = stats.n_ue, stats.n_bs
    assert np.all(g[:n, m:] == 0)  # cross blocks carry zero mean power
    assert np.all(g[n:, :m] == 0)
    assert np.all(np.abs(g[:n, :m]) > 0)


def test_sample_moments_match_omega():
    stats = stats_from_gains(np.array([1.0, 2.0]), np.array([0.2, 0.3]), 1, 2, 1)
    fading = FadingParams(5.0, 7)
    trials = 20000
    acc = np.zeros_like(stats.omega)
    mean_acc = np.zeros_like(stats.omega, dtype=complex)
    for t in range(trials):
        g = sample_channel(stats, fading, t)
        acc += np.abs(g) ** 2
        mean_acc += g
    emp = acc / trials
    # Nakagami(mu=5): var(|g|^2) = omega^2/mu, so se = omega/sqrt(mu*T)
    se = stats.omega / np.sqrt(5.0 * trials)
    assert np.all(np.abs(emp - stats.omega) <= 4 * se)
    # zero mean at the Monte Carlo rate: se(|mean|) ~ sqrt(omega/T)
    assert np.all(np.abs(mean_acc / trials) <= 4 * np.sqrt(stats.omega / trials) + 1e-12)


def test_empirical_xpd_matches_model():
    stats = stats_from_gains(np.array([3.0]), np.array([0.25]), 1, 1, 1)
    fading = FadingParams(5.0, 21)
    trials = 30000
    co = cross = 0.0
    for t in range(trials):
        g = sample_channel(stats, fading, t)
        co += abs(g[1, 1]) ** 2   # HH entry
        cross += abs(g[0, 1]) ** 2  # VH entry
    xpd_emp = co / cross
    xpd_true = (1 - 0.25) / 0.25
    assert xpd_emp == pytest.approx(xpd_true, rel=0.05)


def test_cross_correlations_vanish():
    stats = stats_from_gains(np.array([1.0, 1.0]), np.array([0.3, 0.3]), 2, 2, 1)
    fading = FadingParams(5.0, 5)
    trials = 20000
    pairs = [((0, 0), (0, 2)), ((0, 0), (2, 0)), ((0, 0), (2, 2)),
             ((1, 1), (3, 3)), ((0, 1), (1, 0))]
    acc = np.zeros(len(pairs), dtype=complex)
    for t in range(trials):
        g = sample_channel(stats, fading, t)
        for i, (a, b) in enumerate(pairs):
            acc[i] += g[a] * np.conj(g[b])
    corr = np.abs(acc) / trials
    assert np.all(corr <= 5.0 / np.sqrt(trials))


def test_json_roundtrip():
    stats, _ = sec6_stats(m=6, subarrays=3)
    text = stats.to_json()
    back = ChannelStats.from_json(text)
    assert back.n_ue == stats.n_ue and back.n_bs == stats.n_bs
    assert np.allclose(back.omega, stats.omega)
    assert back.tied == stats.tied


def test_fading_params_validated():
    with pytest.raises(ValueError):
        FadingParams(0.3, 0)
    with pytest.raises(ValueError):
        FadingParams(5.0, -1)
