"""Statistical channel description and Monte Carlo realizations.

The mean-power matrix omega is 2N x 2M with rows (V-receive block then
H-receive block) and columns (V-transmit block then H-transmit block);
co-polarized entries carry beta_m*(1-l_m) and cross-polarized entries
beta_m*l_m, constant down each column. Realizations draw Nakagami amplitudes
(via the gamma transform) and independent uniform phases, one reproducible
stream per (seed, trial_index).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, ClusterSet, distances_to_point
from .polarization import PathlossParams, XpdParams, l_of_xpd, pathloss, xpd_profile


@dataclass(frozen=True)
class FadingParams:
    """Nakagami shape and the base RNG seed."""

    mu: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.mu < 0.5:
            raise ValueError("Nakagami shape must be at least 0.5")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True, eq=False)
class ChannelStats:
    """Second-order statistics of the dual-polarized channel."""

    n_ue: int
    n_bs: int
    subarrays: int
    subarray_size: int
    beta: np.ndarray  # (M,) per-antenna pathloss
    l: np.ndarray     # (M,) polarization split 1/(1+XPD)
    tied: bool = False

    def __post_init__(self):
        if self.subarrays * self.subarray_size != self.n_bs:
            raise ValueError("subarray grid must cover the array: S*M_0 == M")
        beta = np.asarray(self.beta, dtype=float)
        l = np.asarray(self.l, dtype=float)
        if beta.shape != (self.n_bs,) or l.shape != (self.n_bs,):
            raise ValueError("beta and l must have shape (M,)")
        if np.any(beta < 0) or np.any((l < 0) | (l > 1)):
            raise ValueError("beta must be nonnegative and l in [0, 1]")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "l", l)

    @property
    def omega(self) -> np.ndarray:
        """(2N, 2M) mean power gains E{|g|^2}."""
        n, m = self.n_ue, self.n_bs
        co = self.beta * (1.0 - self.l)
        cross = self.beta * self.l
        out = np.empty((2 * n, 2 * m))
        out[:n, :m] = co
        out[n:, m:] = co
        out[:n, m:] = cross
        out[n:, :m] = cross
        return out

    @property
    def amp(self) -> np.ndarray:
        """(2N, 2M) amplitude matrix, elementwise sqrt of omega."""
        return np.sqrt(self.omega)

    def to_json(self) -> str:
        payload = {
            "n_ue": self.n_ue,
            "n_bs": self.n_bs,
            "subarrays": self.subarrays,
            "subarray_size": self.subarray_size,
            "tied": self.tied,
            "beta": list(self.beta),
            "l": list(self.l),
            "omega_shape": [2 * self.n_ue, 2 * self.n_bs],
            "omega": [list(row) for row in self.omega],
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str) -> "ChannelStats":
        d = json.loads(text)
        stats = ChannelStats(d["n_ue"], d["n_bs"], d["subarrays"], d["subarray_size"],
                             np.array(d["beta"]), np.array(d["l"]), d["tied"])
        omega = np.array(d["omega"])
        if omega.shape != tuple(d["omega_shape"]) or not np.allclose(omega, stats.omega):
            raise ValueError("omega payload inconsistent with beta/l")
        return stats


def stats_from_gains(beta, l, n_ue: int, subarrays: int, subarray_size: int,
                     tied: bool = False) -> ChannelStats:
    """Stats from explicit per-antenna pathloss and polarization split."""
    beta = np.asarray(beta, dtype=float)
    return ChannelStats(n_ue, beta.size, subarrays, subarray_size, beta,
                        np.asarray(l, dtype=float), tied)


def build_channel_stats(geom: ArrayGeometry, user_position, clusters: ClusterSet,
                        xpd_params: XpdParams, pathloss_params: PathlossParams,
                        n_ue: int, subarrays: int) -> ChannelStats:
    """Per-antenna stats from the propagation geometry."""
    m = geom.num_elements
    if m % subarrays != 0:
        raise ValueError(f"cannot split {m} elements into {subarrays} equal subarrays")
    user_position = np.asarray(user_position, dtype=float)
    d = distances_to_point(geom, user_position)
    beta = pathloss(d, pathloss_params)
    l = l_of_xpd(xpd_profile(geom, user_position, clusters, xpd_params))
    return ChannelStats(n_ue, m, subarrays, m // subarrays, beta, l)


def tie_to_subarrays(stats: ChannelStats) -> ChannelStats:
    """Replace per-antenna (beta, l) by their subarray means.

    Makes the repeated-column structure of the tied mean-power matrix exact,
    so the structured permanent applies without approximation.
    """
    s, m0 = stats.subarrays, stats.subarray_size
    beta = np.repeat(stats.beta.reshape(s, m0).mean(axis=1), m0)
    l = np.repeat(stats.l.reshape(s, m0).mean(axis=1), m0)
    return ChannelStats(stats.n_ue, stats.n_bs, s, m0, beta, l, tied=True)


def trial_rng(fading: FadingParams, trial_index: int) -> np.random.Generator:
    """Independent per-trial stream derived from (seed, trial_index)."""
    if trial_index < 0:
        raise ValueError("trial index must be nonnegative")
    return np.random.default_rng([int(fading.seed), int(trial_index)])


def sample_channel(stats: ChannelStats, fading: FadingParams,
                   trial_index: int) -> np.ndarray:
    """One complex 2N x 2M channel realization.

    Entries are a*exp(i*phase) with a^2 ~ Gamma(mu, omega/mu) so that
    E{a^2} = omega entrywise, and phases uniform on [0, 2*pi); all entries
    independent. Identical (seed, trial_index) gives a bitwise identical
    draw.
    """
    rng = trial_rng(fading, trial_index)
    omega = stats.omega
    power = rng.gamma(fading.mu, omega / fading.mu)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=omega.shape)
    return np.sqrt(power) * np.exp(1j * phase)
