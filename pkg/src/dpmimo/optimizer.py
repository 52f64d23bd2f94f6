"""Transmit covariance optimization.

Far users (beyond the non-uniform XPD distance) get the scalar covariance
that is optimal under uniform statistics. Near users get the permanent-based
bound maximized over per-subarray powers by a quadratic-penalty loop with
gradient ascent inner solves, followed by an exact projection onto the power
constraints. The eigenvector matrix is the identity throughout: the channel's
separable structure makes U* = I, so the diagonal power allocation is the
whole decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryThresholds, xpd_distance_closed
from .channel import ChannelStats, build_channel_stats, tie_to_subarrays
from .errors import InfeasibleConstraintError, NumericalFailure
from .geometry import ArrayGeometry, ClusterSet, SphericalPosition
from .permanent import StructuredPermanent
from .polarization import PathlossParams, XpdParams

ARMIJO = 1e-4
SHRINK = 0.5
INITIAL_STEP = 1.0
MAX_HALVINGS = 60
MAX_INNER_ITERS = 5000
FEAS_EPS = 1e-9


@dataclass(frozen=True)
class PowerAllocation:
    """Per-subarray, per-polarization transmit powers."""

    lambda_v: np.ndarray  # (S,)
    lambda_h: np.ndarray  # (S,)
    subarrays: int
    subarray_size: int

    def __post_init__(self):
        lv = np.asarray(self.lambda_v, dtype=float)
        lh = np.asarray(self.lambda_h, dtype=float)
        if lv.shape != (self.subarrays,) or lh.shape != (self.subarrays,):
            raise ValueError("allocation blocks must have shape (S,)")
        object.__setattr__(self, "lambda_v", lv)
        object.__setattr__(self, "lambda_h", lh)

    @staticmethod
    def from_vector(vec, subarrays: int, subarray_size: int) -> "PowerAllocation":
        vec = np.asarray(vec, dtype=float)
        return PowerAllocation(vec[:subarrays], vec[subarrays:], subarrays, subarray_size)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.lambda_v, self.lambda_h])

    def expand(self) -> np.ndarray:
        """Per-port powers (2M,): every antenna inherits its subarray value."""
        return np.concatenate([
            np.repeat(self.lambda_v, self.subarray_size),
            np.repeat(self.lambda_h, self.subarray_size),
        ])

    def q_matrix(self) -> np.ndarray:
        return np.diag(self.expand())


@dataclass(frozen=True)
class PenaltySchedule:
    mu0: float = 10.0
    growth: float = 10.0
    max_outer: int = 8
    inner_tol: float = 1e-8
    feas_tol: float = 1e-6

    def __post_init__(self):
        if self.mu0 <= 0 or self.growth <= 1:
            raise ValueError("penalty weights need mu0 > 0 and growth > 1")


@dataclass(frozen=True, eq=False)
class CovarianceResult:
    q: np.ndarray
    allocation: PowerAllocation
    capacity_bound: float
    iterations: list = field(default_factory=list)  # (outer index, objective, violation)
    scalar_branch: bool = False
    r_u_th: float | None = None


def scalar_covariance(m: int) -> np.ndarray:
    """Uniform covariance (1/(2M)) * I, optimal under uniform statistics."""
    if m < 1:
        raise ValueError("need at least one antenna")
    return np.eye(2 * m) / (2 * m)


def penalty_value(lam, mu: float, q0: float, budget: float) -> float:
    """Quadratic penalty: budget gap plus cap and nonnegativity violations."""
    lam = np.asarray(lam, dtype=float)
    gap = lam.sum() - budget
    over = np.clip(lam - q0, 0.0, None)
    under = np.clip(-lam, 0.0, None)
    return mu * (gap * gap + float(over @ over) + float(under @ under))


def penalized_objective(lam, poly: StructuredPermanent, mu: float, q0: float,
                        budget: float) -> float:
    """log2 f(Lambda) minus the penalty; -inf where f is nonpositive."""
    f = poly.value(lam)
    if f <= 0.0 or not np.isfinite(f):
        return -np.inf
    return float(np.log2(f)) - penalty_value(lam, mu, q0, budget)


def gradient(fun, x) -> np.ndarray:
    """Central finite differences with per-coordinate steps."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = max(1e-7, 1e-6 * abs(x[i]))
        up = x.copy()
        dn = x.copy()
        up[i] += h
        dn[i] -= h
        fu, fd = fun(up), fun(dn)
        if not (np.isfinite(fu) and np.isfinite(fd)):
            raise NumericalFailure("objective non-finite at finite-difference probe")
        g[i] = (fu - fd) / (2.0 * h)
    return g


def solve_unconstrained(fun, x0, inner_tol: float,
                        max_iters: int = MAX_INNER_ITERS) -> tuple[np.ndarray, float, bool]:
    """Gradient ascent with Armijo backtracking.

    Returns (iterate, objective, stalled); stalled means the line search
    exhausted its halvings without an acceptable step.
    """
    x = np.asarray(x0, dtype=float).copy()
    f = fun(x)
    if not np.isfinite(f):
        raise NumericalFailure("objective non-finite at the initial point")
    for _ in range(max_iters):
        g = gradient(fun, x)
        gnorm2 = float(g @ g)
        if gnorm2 == 0.0:
            return x, f, False
        t = INITIAL_STEP
        accepted = False
        for _ in range(MAX_HALVINGS):
            cand = x + t * g
            fc = fun(cand)
            if fc >= f + ARMIJO * t * gnorm2:
                accepted = True
                break
            t *= SHRINK
        if not accepted:
            return x, f, True
        x, f_prev, f = cand, f, fc
        if abs(f - f_prev) < inner_tol:
            return x, f, False
    return x, f, False


def project_allocation(lam, q0: float, budget: float) -> np.ndarray:
    """Euclidean projection onto {0 <= lam <= q0, sum(lam) = budget}.

    Bisects the shift tau in clip(lam - tau, 0, q0) whose coordinate sum is
    monotone in tau.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.size * q0 < budget - 1e-12:
        raise InfeasibleConstraintError("per-antenna cap cannot meet the power budget")

    def total(tau):
        return float(np.clip(lam - tau, 0.0, q0).sum())

    lo = float(lam.min()) - q0 - abs(budget)
    hi = float(lam.max()) + abs(budget)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) > budget:
            lo = mid
        else:
            hi = mid
    out = np.clip(lam - 0.5 * (lo + hi), 0.0, q0)
    # distribute any residual rounding over unsaturated coordinates
    residual = budget - out.sum()
    free = (out > 0) & (out < q0)
    if np.any(free):
        out[free] += residual / np.count_nonzero(free)
    return np.clip(out, 0.0, q0)


def _violation(lam, q0: float, budget: float, subarray_size: int) -> float:
    """Worst constraint violation, with the budget gap in trace units."""
    lam = np.asarray(lam, dtype=float)
    return max(
        subarray_size * abs(lam.sum() - budget),
        float(np.clip(lam - q0, 0.0, None).max()),
        float(np.clip(-lam, 0.0, None).max()),
    )


def optimize_power_allocation(stats: ChannelStats, gamma: float, q0: float,
                              schedule: PenaltySchedule,
                              paper_budget: bool = False):
    """Penalty-method maximization of the capacity bound over subarray powers.

    Returns (PowerAllocation, iteration trace, StructuredPermanent). The
    default budget sum(lam) = 1/M_0 realizes trace(Q) = 1 exactly;
    ``paper_budget`` switches to the 1/S variant with 1/(2S) initialization.
    """
    if not stats.tied:
        stats = tie_to_subarrays(stats)
    s, m0 = stats.subarrays, stats.subarray_size
    m = stats.n_bs
    if q0 * 2 * m < 1.0 - 1e-12:
        raise InfeasibleConstraintError(
            f"infeasible per-antenna cap: q0*2M = {q0 * 2 * m:.6g} < 1")
    budget = (1.0 / s) if paper_budget else (1.0 / m0)
    init = np.full(2 * s, 1.0 / (2 * s) if paper_budget else 1.0 / (2 * m))

    poly = StructuredPermanent(stats.omega, s, m0, gamma)

    x = init.copy()
    iterations = []
    prev_obj = None
    for o in range(schedule.max_outer):
        mu = schedule.mu0 * schedule.growth ** o
        x, _, stalled = solve_unconstrained(
            lambda lam: penalized_objective(lam, poly, mu, q0, budget),
            x, schedule.inner_tol)
        f = poly.value(x)
        obj = float(np.log2(f)) if f > 0 else -np.inf
        viol = _violation(x, q0, budget, m0)
        iterations.append((o, obj, viol))
        if stalled:
            break
        if prev_obj is not None and abs(obj - prev_obj) < schedule.inner_tol \
                and viol < schedule.feas_tol:
            break
        prev_obj = obj

    # Exact feasibility, then never return worse than the feasible start.
    candidate = project_allocation(x, q0, budget)
    baseline = project_allocation(init, q0, budget)
    if poly.value(candidate) < poly.value(baseline):
        candidate = baseline
    return PowerAllocation.from_vector(candidate, s, m0), iterations, poly


def optimize_covariance(geom: ArrayGeometry, user: SphericalPosition,
                        clusters: ClusterSet, xpd_params: XpdParams,
                        pathloss_params: PathlossParams,
                        thresholds: BoundaryThresholds, gamma: float, q0: float,
                        schedule: PenaltySchedule, n_ue: int, subarrays: int,
                        c_ratios=None, paper_budget: bool = False) -> CovarianceResult:
    """End-to-end covariance design with the near/far-field branch.

    Users beyond the closed-form non-uniform XPD distance get the exact
    scalar matrix with zero optimizer iterations; near users get the penalty
    loop on subarray-tied statistics.
    """
    m = geom.num_elements
    if q0 * 2 * m < 1.0 - 1e-12:
        raise InfeasibleConstraintError(
            f"infeasible per-antenna cap: q0*2M = {q0 * 2 * m:.6g} < 1")
    if c_ratios is None:
        c_ratios = clusters.c_ratios(user.r)
    r_u_th, _, _ = xpd_distance_closed(geom, user.theta, user.phi, clusters,
                                       c_ratios, xpd_params.eta, thresholds)

    stats = build_channel_stats(geom, user.to_cartesian(), clusters, xpd_params,
                                pathloss_params, n_ue, subarrays)
    tied = tie_to_subarrays(stats)
    s, m0 = tied.subarrays, tied.subarray_size

    if user.r > r_u_th:
        alloc = PowerAllocation.from_vector(np.full(2 * s, 1.0 / (2 * m)), s, m0)
        poly = StructuredPermanent(tied.omega, s, m0, gamma)
        bound = float(np.log2(poly.value(alloc.as_vector())))
        return CovarianceResult(scalar_covariance(m), alloc, bound, [],
                                scalar_branch=True, r_u_th=r_u_th)

    alloc, iterations, poly = optimize_power_allocation(
        tied, gamma, q0, schedule, paper_budget=paper_budget)
    bound = float(np.log2(poly.value(alloc.as_vector())))
    return CovarianceResult(alloc.q_matrix(), alloc, bound, iterations,
                            scalar_branch=False, r_u_th=r_u_th)
