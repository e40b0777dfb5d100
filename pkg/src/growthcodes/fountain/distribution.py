"""Growth-code degree distributions.

The expected number of received symbols ``K_j`` needed to recover ``R_j``
source symbols drives everything here. ``R_j = (jk - 1)/(j + 1)`` is not an
integer in general; summation ranges use ``floor(R_j)`` on both ends so that
consecutive ranges partition ``[0, floor(R_max))``.
"""

from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from math import exp, floor, lgamma, log

import numpy as np

MASS_TOLERANCE = 1e-12


def recovery_targets(k, j):
    """``R_j``, the number of recovered symbols at which degree ``j`` stops paying off."""
    return (j * k - 1) / (j + 1)


def _log_comb(n, r):
    return lgamma(n + 1) - lgamma(r + 1) - lgamma(n - r + 1)


@lru_cache(maxsize=64)
def expected_receptions(k):
    """Cumulative ``K_1, ..., K_{k-1}`` as a tuple (empty for k <= 1).

    ``K_1`` is the coupon-collector sum; every later term is the expected
    wait ``C(k, j) / (C(i, j-1) (k - i))`` for a degree-``j`` symbol to be
    useful when ``i`` symbols are already decoded.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k == 1:
        return ()
    r1 = floor(recovery_targets(k, 1))
    K = [sum(k / (k - i) for i in range(r1))]
    lo = r1
    for j in range(2, k):
        hi = floor(recovery_targets(k, j))
        lck = _log_comb(k, j)
        s = 0.0
        for i in range(lo, hi):
            s += exp(lck - _log_comb(i, j - 1) - log(k - i))
        K.append(K[-1] + s)
        lo = hi
    return tuple(K)


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability mass over degrees ``1..d_max`` (``probs[d-1]`` is Omega_d)."""

    k: int
    probs: tuple
    K: tuple = ()
    R: tuple = ()
    label: str = "custom"
    _cdf: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise ValueError("empty distribution")
        if len(probs) > self.k:
            raise ValueError(f"d_max={len(probs)} exceeds k={self.k}")
        if min(probs) < 0:
            raise ValueError("negative probability")
        total = sum(probs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_cdf", tuple(np.cumsum(probs)))

    @classmethod
    def point(cls, k, degree=1):
        probs = [0.0] * degree
        probs[-1] = 1.0
        return cls(k=k, probs=tuple(probs), label=f"degree-{degree}")

    @property
    def d_max(self):
        return len(self.probs)

    @property
    def mean_degree(self):
        """Omega'(1)."""
        return float(np.dot(np.arange(1, self.d_max + 1), self.probs))

    def as_array(self):
        return np.asarray(self.probs)

    def distribution_at(self, n):
        return self

    def draw_degree(self, u, esi):
        d = bisect_right(self._cdf, u) + 1
        return min(d, self.d_max)


def _eq1(K, n):
    """Degree mix after ``n`` transmissions; probs may not be normalized yet."""
    probs = []
    prev = 0.0
    for Kj in K:
        if n - prev <= 0:
            break
        probs.append(max(0.0, min((Kj - prev) / n, (n - prev) / n)))
        prev = Kj
    while probs and probs[-1] == 0.0:
        probs.pop()
    return probs


def growth_distribution(k, n=None):
    """Growth-code degree distribution for ``k`` source symbols.

    ``n`` is the number of transmitted symbols the mix describes and defaults
    to ``k`` (the static reading). When ``n`` exceeds the last threshold the
    leftover mass is spread proportionally over the existing degrees. For
    ``k <= 2`` the recursion yields no mass at all and a degree-1 point mass
    is returned instead.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    n = k if n is None else n
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    K = expected_receptions(k)
    probs = _eq1(K, n)
    total = sum(probs)
    if total == 0.0:
        return DegreeDistribution.point(k, 1)
    if abs(total - 1.0) > MASS_TOLERANCE:
        probs = [p / total for p in probs]
    d = len(probs)
    R = tuple(recovery_targets(k, j) for j in range(1, d + 1))
    return DegreeDistribution(k=k, probs=tuple(probs), K=K[:d], R=R, label="growth")


class GrowthSchedule:
    """Time-varying Growth code: degree grows with the transmission index.

    Symbol number ``n`` (the low 32 bits of its ESI) has degree ``j`` when
    ``K_{j-1} <= n < K_j``. Past the last threshold the degree is drawn from
    the schedule's overall mix, so the first ``n`` symbols always follow
    ``growth_distribution(k, n)``.
    """

    label = "growth-schedule"

    def __init__(self, k):
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        self.k = k
        K = expected_receptions(k)
        self._end = max(K) if K else 0.0
        self.thresholds = K
        self.tail = growth_distribution(k, max(self._end, 1.0))

    def __repr__(self):
        return f"GrowthSchedule(k={self.k})"

    def __eq__(self, other):
        return isinstance(other, GrowthSchedule) and other.k == self.k

    def __hash__(self):
        return hash(("growth-schedule", self.k))

    @property
    def schedule_length(self):
        """Index after which degrees are drawn from ``tail``."""
        return self._end

    def distribution_at(self, n):
        return growth_distribution(self.k, n)

    def degree_at(self, n):
        if n < self._end:
            return bisect_right(expected_receptions(self.k), n) + 1
        return None

    def draw_degree(self, u, esi):
        d = self.degree_at(esi & 0xFFFFFFFF)
        return self.tail.draw_degree(u, esi) if d is None else d
