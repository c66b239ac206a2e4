"""Pearson correlation with t-test p-values, and nearest-neighbor retrieval.

The p-value comes from the Student-t survival function evaluated through a
regularized incomplete beta function implemented here with Lentz's continued
fraction, so the analysis runtime needs no statistical library. For
matrix-vs-matrix correlations the plain t-test is approximate (matrix entries
are not independent); that caveat is deliberate and documented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ConstantInput,
    KTooLarge,
    LabelMismatch,
    LengthMismatch,
    TooFewPoints,
    UnknownCategory,
)
from .infotheory import DistanceMatrix


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n_pairs: int
    subset: str = "all"

    def __post_init__(self) -> None:
        if abs(self.r) > 1.0:
            raise ValueError(f"|r| = {abs(self.r)} exceeds 1")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be positive")


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def _betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed(t: float, dof: int) -> float:
    """P(|T| >= t) for Student's t with dof degrees of freedom."""
    if dof < 1:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    t2 = t * t
    return _betainc_reg(dof / 2.0, 0.5, dof / (dof + t2))


def pearson(
    x: Sequence[float], y: Sequence[float], subset: str = "all"
) -> CorrelationResult:
    """Product-moment correlation with a two-tailed t-test p-value.

    t = r * sqrt((n - 2) / (1 - r^2)) against Student's t with n - 2 degrees
    of freedom; r = +-1 yields p = 0.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise LengthMismatch(f"vector shapes differ: {xa.shape} vs {ya.shape}")
    n = xa.size
    if n < 3:
        raise TooFewPoints(f"correlation needs at least 3 points, got {n}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float((dx * dx).sum())
    syy = float((dy * dy).sum())
    if sxx == 0.0 or syy == 0.0:
        raise ConstantInput("correlation undefined for a constant vector")
    r = float((dx * dy).sum()) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    one_minus_r2 = 1.0 - r * r
    if one_minus_r2 <= 0.0:
        p = 0.0
    else:
        t = abs(r) * math.sqrt((n - 2) / one_minus_r2)
        p = student_t_two_tailed(t, n - 2)
    return CorrelationResult(r=r, p_value=p, n_pairs=n, subset=subset)


def upper_triangle_pairs(
    matrix: DistanceMatrix, labels: Sequence[str]
) -> np.ndarray:
    """Strictly-upper-triangular entries of the matrix restricted to labels.

    Entries come out in the (i, j), i < j order of the given label sequence,
    so two matrices restricted to the same sequence pair up by identical
    label pairs.
    """
    sub = matrix.submatrix(list(labels))
    iu = np.triu_indices(sub.size, k=1)
    return sub.values[iu]


def correlate_matrices(
    a: DistanceMatrix,
    b: DistanceMatrix,
    subset: Sequence[str] | None = None,
    subset_name: str = "all",
) -> CorrelationResult:
    """Pearson over paired strictly-upper-triangular entries of two matrices."""
    labels_a = set(a.labels)
    labels_b = set(b.labels)
    if subset is not None:
        wanted = set(subset)
        labels_a &= wanted
        labels_b &= wanted
    if labels_a != labels_b:
        raise LabelMismatch(
            f"label sets differ after subsetting: {sorted(labels_a ^ labels_b)}"
        )
    labels = sorted(labels_a)
    if len(labels) < 3:
        raise TooFewPoints(
            f"matrix correlation needs at least 3 shared labels, got {len(labels)}"
        )
    xs = upper_triangle_pairs(a, labels)
    ys = upper_triangle_pairs(b, labels)
    return pearson(xs, ys, subset=subset_name)


def top_k_similar(
    matrix: DistanceMatrix, category: str, k: int
) -> list[tuple[str, float]]:
    """The k nearest categories by divergence, ascending; ties alphabetical."""
    if category not in matrix.labels:
        raise UnknownCategory(f"category {category!r} not in matrix")
    n = matrix.size
    if not 1 <= k <= n - 1:
        raise KTooLarge(f"k must be in [1, {n - 1}], got {k}")
    row = matrix.values[matrix.index_of(category)]
    others = [
        (float(row[i]), label)
        for i, label in enumerate(matrix.labels)
        if label != category
    ]
    others.sort()
    return [(label, d) for d, label in others[:k]]
