"""Ergodic capacity: Monte Carlo estimate and the permanent-based bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelStats, FadingParams, sample_channel
from .errors import UntiedStatsError
from .permanent import StructuredPermanent

PSD_TOL = -1e-9


@dataclass(frozen=True)
class CapacityEstimate:
    mean_bits: float
    std_error: float
    trials: int


def _psd_factor(q: np.ndarray) -> np.ndarray:
    """Cholesky-style factor W with W W^H = Q, validating PSD-ness.

    Diagonal Q takes the cheap square-root path; otherwise eigendecompose
    once with small negative eigenvalues clipped at the tolerance.
    """
    q = np.asarray(q)
    if q.ndim == 1:
        if np.min(q) < PSD_TOL:
            raise ValueError("covariance diagonal has a negative entry")
        return np.diag(np.sqrt(np.clip(q, 0.0, None)))
    if q.shape[0] != q.shape[1]:
        raise ValueError("covariance must be square")
    if not np.allclose(q, q.conj().T, atol=1e-12):
        raise ValueError("covariance must be Hermitian")
    diag = np.diagonal(q)
    if np.count_nonzero(q - np.diag(diag)) == 0:
        return _psd_factor(diag.real)
    vals, vecs = np.linalg.eigh(q)
    if vals.min() < PSD_TOL:
        raise ValueError(f"covariance is not PSD (min eigenvalue {vals.min():.3e})")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _log2det_capacity(g: np.ndarray, w: np.ndarray, gamma: float) -> float:
    b = g @ w
    a = np.eye(g.shape[0], dtype=complex) + gamma * (b @ b.conj().T)
    a = 0.5 * (a + a.conj().T)
    sign, logdet = np.linalg.slogdet(a)
    if sign.real <= 0 or not np.isfinite(logdet):
        vals = np.linalg.eigvalsh(a)
        logdet = float(np.sum(np.log(np.clip(vals, 1e-300, None))))
    return max(float(logdet) / np.log(2.0), 0.0)


def instantaneous_capacity(g, q, gamma: float) -> float:
    """log2 det(I + gamma * G Q G^H) in bits per symbol."""
    if gamma < 0:
        raise ValueError("SNR must be nonnegative")
    g = np.asarray(g, dtype=complex)
    return _log2det_capacity(g, _psd_factor(q), gamma)


def ergodic_capacity_mc(stats: ChannelStats, q, gamma: float, trials: int,
                        fading: FadingParams) -> CapacityEstimate:
    """Monte Carlo mean and standard error of the instantaneous capacity."""
    if trials < 1:
        raise ValueError("need at least one trial")
    w = _psd_factor(q)
    vals = np.empty(trials)
    for t in range(trials):
        vals[t] = _log2det_capacity(sample_channel(stats, fading, t), w, gamma)
    se = float(vals.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return CapacityEstimate(float(vals.mean()), se, trials)


def _allocation_vector(allocation) -> np.ndarray:
    if hasattr(allocation, "as_vector"):
        return np.asarray(allocation.as_vector(), dtype=float)
    return np.asarray(allocation, dtype=float)


def capacity_upper_bound(stats: ChannelStats, allocation, gamma: float) -> float:
    """C^ub = log2 per([I_2N, gamma*Omega*Lambda]) for subarray-tied stats.

    ``allocation`` holds the 2S per-subarray powers (V block then H block),
    either as a PowerAllocation or a plain vector.
    """
    if not stats.tied:
        raise UntiedStatsError("capacity bound needs subarray-tied stats")
    poly = StructuredPermanent(stats.omega, stats.subarrays, stats.subarray_size, gamma)
    return float(np.log2(poly.value(_allocation_vector(allocation))))
