"""Permanents of rectangular matrices and the repeated-column fast path.

The capacity bound needs per([I_2N, gamma*Omega*Lambda]). Three routes exist,
from slow to fast: the definition-based sum over injective assignments, the
column-subset expansion, and the structured evaluation that groups identical
columns per subarray-polarization block and weights one representative
permanent by the block-choice multiplicity. All three agree exactly on tied
inputs; the test suite enforces that equivalence.

Complexity counters for the definition-based and structured routes are exact
(integer / rational) evaluations of the published operation counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, factorial

import numpy as np

from .errors import PermanentGuardError, UntiedStatsError

DEFAULT_GUARD_TERMS = factorial(12)


def permanent_def(a, guard_terms: int = DEFAULT_GUARD_TERMS) -> float:
    """Definition-based permanent of a rectangular matrix.

    Sums products over all injective assignments of the shorter axis into the
    longer one; an empty matrix has permanent 1. Guarded by the number of
    product terms Y!/(Y-X)!.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("permanent needs a 2-D matrix")
    x, y = a.shape
    if x == 0 or y == 0:
        return 1.0
    if x > y:
        a = a.T
        x, y = y, x
    terms = 1
    for i in range(y - x + 1, y + 1):
        terms *= i
    if terms > guard_terms:
        raise PermanentGuardError(
            f"{terms} product terms exceed guard {guard_terms}; use the structured path"
        )

    cache: dict[tuple[int, int], float] = {}

    def rec(row: int, used: int) -> float:
        if row == x:
            return 1.0
        key = (row, used)
        val = cache.get(key)
        if val is not None:
            return val
        total = 0.0
        for c in range(y):
            bit = 1 << c
            if used & bit:
                continue
            arc = a[row, c]
            if arc != 0.0:
                total += arc * rec(row + 1, used | bit)
        cache[key] = total
        return total

    return rec(0, 0)


def permanent_expanded(b, guard_rows: int = 24) -> float:
    """per([I_2N, B]) via the sum over ordered column subsets of B.

    Equals sum_k sum_{columns xi_k} per(B[:, xi_k]); the k=0 term is 1.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 2:
        raise ValueError("expanded permanent needs a 2-D matrix")
    rows, cols = b.shape
    if rows > guard_rows:
        raise PermanentGuardError(f"2N={rows} exceeds guard {guard_rows}")
    total = 1.0
    for k in range(1, rows + 1):
        for subset in combinations(range(cols), k):
            total += permanent_def(b[:, subset])
    return total


def enumerate_count_vectors(s: int, m0: int, k: int) -> list[tuple[int, ...]]:
    """All length-2S vectors with entries in [0, M_0] summing to k.

    Lexicographically ascending; entry order is (b_1^V..b_S^V, b_1^H..b_S^H).
    """
    if s < 1 or m0 < 1:
        raise ValueError("need S >= 1 and M_0 >= 1")
    if k < 0:
        raise ValueError("k must be nonnegative")
    slots = 2 * s
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], remaining: int, slot: int):
        if slot == slots - 1:
            if remaining <= m0:
                out.append(tuple(prefix + [remaining]))
            return
        for v in range(min(m0, remaining) + 1):
            rec(prefix + [v], remaining - v, slot + 1)

    rec([], k, 0)
    return out


def multiplicity(b, m0: int) -> int:
    """Number of ordered column subsets sharing the block-count vector b.

    prod_s C(M_0, b_s^V) * C(M_0, b_s^H).
    """
    total = 1
    for v in b:
        if v < 0 or v > m0:
            raise ValueError("count-vector entries must lie in [0, M_0]")
        total *= comb(m0, v)
    return total


def _block_templates(omega: np.ndarray, s: int, m0: int, rel_tol: float = 1e-9) -> np.ndarray:
    """Representative column per subarray-polarization block, verifying the
    within-block columns agree to rel_tol (relative to the block scale)."""
    two_n, two_m = omega.shape
    m = s * m0
    if two_m != 2 * m:
        raise ValueError(f"omega has {two_m} columns; expected 2*S*M_0 = {2 * m}")
    templates = np.empty((two_n, 2 * s))
    for j in range(2):  # 0 = V columns, 1 = H columns
        for si in range(s):
            block = omega[:, j * m + si * m0: j * m + (si + 1) * m0]
            tmpl = block[:, 0]
            scale = np.max(np.abs(tmpl))
            if np.max(np.abs(block - tmpl[:, None])) > rel_tol * max(scale, 1e-300):
                raise UntiedStatsError(
                    f"columns of subarray {si} ({'VH'[j]}-polarization) differ; "
                    "apply channel.tie_to_subarrays first"
                )
            templates[:, j * s + si] = tmpl
    return templates


class StructuredPermanent:
    """Precomputed polynomial form of f(Lambda) = per([I_2N, gamma*Omega*Lambda]).

    For tied stats, every column subset with block-count vector b contributes
    multiplicity(b) * per(representative) * prod lam^b, so f is a polynomial
    in the 2S subarray powers. Coefficients are computed once; evaluation is
    a dot product, which the penalty optimizer calls thousands of times.
    """

    def __init__(self, omega, s: int, m0: int, gamma: float, rel_tol: float = 1e-9):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega < 0):
            raise ValueError("omega must be elementwise nonnegative")
        self.two_n = omega.shape[0]
        self.s = s
        self.m0 = m0
        self.gamma = float(gamma)
        templates = self.gamma * _block_templates(omega, s, m0, rel_tol)
        exps = []
        coeffs = []
        for k in range(0, self.two_n + 1):
            for b in enumerate_count_vectors(s, m0, k):
                rep_cols = np.repeat(templates, b, axis=1)
                coeffs.append(multiplicity(b, m0) * permanent_def(rep_cols))
                exps.append(b)
        self.exponents = np.array(exps, dtype=np.int64)
        self.coeffs = np.array(coeffs)
        self._max_exp = int(self.exponents.max())
        # flat index into a (2S, max_exp+1) power table, one gather per eval
        cols = np.arange(2 * s)[None, :]
        self._flat_idx = (cols * (self._max_exp + 1) + self.exponents).ravel()
        self._n_terms = self.exponents.shape[0]

    def value(self, lam_tilde) -> float:
        """f at the 2S-vector of per-subarray powers (V block then H block)."""
        lam = np.asarray(lam_tilde, dtype=float)
        if lam.shape != (2 * self.s,):
            raise ValueError(f"allocation must have shape ({2 * self.s},)")
        # power table avoids float pow in the hot path; exponents are tiny ints
        powers = np.ones((lam.size, self._max_exp + 1))
        np.cumprod(lam[:, None] * np.ones(self._max_exp), axis=1,
                   out=powers[:, 1:])
        monomials = powers.ravel()[self._flat_idx].reshape(self._n_terms, -1)
        return float(self.coeffs @ np.prod(monomials, axis=1))


def permanent_structured(omega, lam_tilde, s: int, m0: int, gamma: float) -> float:
    """f(Lambda) for tied stats; equals permanent_expanded(gamma*Omega*Lambda)."""
    return StructuredPermanent(omega, s, m0, gamma).value(lam_tilde)


def complexity_ori(m: int, n: int) -> int:
    """Multiplications for one definition-based bound evaluation:
    (2M+2N)!(2N-1)/(2M)! in exact integer arithmetic."""
    if m < 1 or n < 1:
        raise ValueError("need M >= 1 and N >= 1")
    prod = 1
    for i in range(1, 2 * n + 1):
        prod *= 2 * m + i
    return (2 * n - 1) * prod


def complexity_sim(s: int, n: int) -> tuple[Fraction, int]:
    """Published counter for the structured route and its closed-form bound.

    The counter sum_k ((k-1)(2N)!/(2N-k)! + 1) * (2S+k)!/((k+1)!(2S)!) is not
    integral in general (15/2 at S=N=1), so it is returned as an exact
    Fraction; the bound (2S+2N)!(2N-1)/(2S)! is an exact integer.
    """
    if s < 1 or n < 1:
        raise ValueError("need S >= 1 and N >= 1")
    total = Fraction(0)
    for k in range(0, 2 * n + 1):
        per_count = Fraction((k - 1) * factorial(2 * n), factorial(2 * n - k)) + 1
        subsets = Fraction(factorial(2 * s + k), factorial(k + 1) * factorial(2 * s))
        total += per_count * subsets
    bound = factorial(2 * s + 2 * n) * (2 * n - 1) // factorial(2 * s)
    return total, bound


@dataclass(frozen=True)
class ComplexityReport:
    """Exact operation counters for one capacity-bound evaluation."""

    n_ori: int
    n_sim: Fraction
    n_sim_bound: int
    ratio: float

    @staticmethod
    def build(m: int, n: int, s: int) -> "ComplexityReport":
        ori = complexity_ori(m, n)
        sim, bound = complexity_sim(s, n)
        return ComplexityReport(ori, sim, bound, float(Fraction(ori) / sim))


def count_vector_diagnostics(s: int, m0: int, k: int) -> dict:
    """Enumerated count of block-count vectors next to both published
    closed-form counts, which disagree with the enumeration and each other."""
    enumerated = len(enumerate_count_vectors(s, m0, k))
    in_text = Fraction(factorial(2 * s + k), factorial(k + 1) * factorial(2 * s))
    if k >= 1 and 2 * s - k >= 0:
        inner_limit = Fraction(factorial(2 * s - 1),
                               factorial(2 * s - k) * factorial(2 * k - 1))
    else:
        inner_limit = None
    return {
        "enumerated": enumerated,
        "paper_in_text": in_text,
        "paper_inner_limit": inner_limit,
    }
