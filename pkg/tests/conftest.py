import numpy as np
import pytest

from phonedist.corpus import UnitObservationBag
from phonedist.distribution import PhoneticDistribution, estimate


def dist_from_counts(counts, category="x") -> PhoneticDistribution:
    counts = np.asarray(counts, dtype=np.int64)
    bag = UnitObservationBag(category=category, counts=counts, total=int(counts.sum()))
    return estimate(bag)


def dist_from_probs(probs, category="x", scale=10**9) -> PhoneticDistribution:
    """Build an exactly-representable distribution from dyadic/simple probs.

    Only valid when probs * scale are integers; asserts so tests cannot
    silently construct a different distribution than intended.
    """
    counts = [p * scale for p in probs]
    assert all(float(c).is_integer() for c in counts), probs
    return dist_from_counts([int(c) for c in counts], category=category)


def random_count_dists(rng, n, omega, category_prefix="c", min_support=1):
    """Random count-backed distributions, sparse supports included."""
    dists = []
    for i in range(n):
        support = rng.integers(min_support, omega + 1)
        idx = rng.choice(omega, size=support, replace=False)
        counts = np.zeros(omega, dtype=np.int64)
        counts[idx] = rng.integers(1, 50, size=support)
        dists.append(dist_from_counts(counts, category=f"{category_prefix}{i}"))
    return dists


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
