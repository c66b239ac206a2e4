"""Surprisal, entropy, and divergence over phonetic distributions.

All logarithms are base 2, so every quantity is in bits and the
Jensen-Shannon divergence lands in [0, 1]. The 0 * log 0 = 0 convention is
applied by skipping zero-probability terms outright, never by flooring with
an epsilon, which would distort entropies of sparse distributions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .distribution import PhoneticDistribution, check_shared_inventory
from .errors import (
    AsymmetricMatrix,
    DegenerateInventory,
    InconsistentInventory,
    NonzeroDiagonal,
    UnitOutOfRange,
)

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise dissimilarities with a zero diagonal."""

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        labels = tuple(str(l) for l in self.labels)
        object.__setattr__(self, "labels", labels)
        values = np.array(self.values, dtype=np.float64)
        n = len(labels)
        if len(set(labels)) != n:
            raise ValueError("duplicate labels in distance matrix")
        if values.shape != (n, n):
            raise ValueError(f"matrix shape {values.shape} does not match {n} labels")
        if not np.isfinite(values).all():
            raise ValueError("distance matrix contains non-finite entries")
        if np.abs(values - values.T).max(initial=0.0) > SYMMETRY_TOL:
            raise AsymmetricMatrix(
                f"matrix asymmetric beyond {SYMMETRY_TOL}: "
                f"max |d_ij - d_ji| = {np.abs(values - values.T).max()}"
            )
        if n and np.abs(np.diag(values)).max() > SYMMETRY_TOL:
            raise NonzeroDiagonal("distance matrix has nonzero self-distances")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def value(self, a: str, b: str) -> float:
        return float(self.values[self.index_of(a), self.index_of(b)])

    def submatrix(self, labels: Sequence[str]) -> "DistanceMatrix":
        idx = [self.index_of(l) for l in labels]
        return DistanceMatrix(tuple(labels), self.values[np.ix_(idx, idx)])


def surprisal(dist: PhoneticDistribution, unit: int) -> float:
    """-log2 p(unit) in bits; +inf for an impossible unit."""
    if not 0 <= unit < dist.omega_size:
        raise UnitOutOfRange(f"unit {unit} outside [0, {dist.omega_size})")
    p = float(dist.probs[unit])
    if p == 0.0:
        return float("inf")
    return -float(np.log2(p))


def entropy(dist: PhoneticDistribution) -> float:
    """Expected surprisal in bits: sum over p(w) > 0 of -p(w) log2 p(w)."""
    p = dist.probs[dist.probs > 0.0]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def normalized_entropy(dist: PhoneticDistribution) -> float:
    """Entropy divided by log2 of the inventory size, in [0, 1]."""
    if dist.omega_size < 2:
        raise DegenerateInventory(
            f"normalized entropy needs at least 2 units, got {dist.omega_size}"
        )
    return entropy(dist) / float(np.log2(dist.omega_size))


def _check_pair(p: PhoneticDistribution, q: PhoneticDistribution) -> None:
    if p.omega_size != q.omega_size:
        raise InconsistentInventory(
            f"{p.category!r} has {p.omega_size} units, {q.category!r} has {q.omega_size}"
        )


def kl_divergence(p: PhoneticDistribution, q: PhoneticDistribution) -> float:
    """Relative entropy D(p || q) in bits; +inf when q lacks support where p has mass."""
    _check_pair(p, q)
    mask = p.probs > 0.0
    pm = p.probs[mask]
    qm = q.probs[mask]
    if np.any(qm == 0.0):
        return float("inf")
    return float((pm * np.log2(pm / qm)).sum())


def _kl_to_mixture(p: np.ndarray, m: np.ndarray) -> float:
    mask = p > 0.0
    pm = p[mask]
    return float((pm * np.log2(pm / m[mask])).sum())


def js_divergence(p: PhoneticDistribution, q: PhoneticDistribution) -> float:
    """Jensen-Shannon divergence against the midpoint mixture m = (p + q) / 2.

    Base-2 logs keep the value in [0, 1]; it is symmetric and always finite
    (the mixture covers the support of both arguments).
    """
    _check_pair(p, q)
    m = 0.5 * (p.probs + q.probs)
    return 0.5 * _kl_to_mixture(p.probs, m) + 0.5 * _kl_to_mixture(q.probs, m)


def jsd_matrix(dists: Sequence[PhoneticDistribution]) -> DistanceMatrix:
    """Pairwise JSD matrix over the given distributions, in their order."""
    if len(dists) < 2:
        raise InconsistentInventory("a distance matrix needs at least 2 distributions")
    check_shared_inventory(dists)
    n = len(dists)
    values = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = js_divergence(dists[i], dists[j])
            values[i, j] = d
            values[j, i] = d
    return DistanceMatrix(tuple(d.category for d in dists), values)


def write_matrix_csv(matrix: DistanceMatrix, target: str | Path | IO[str]) -> None:
    """Square CSV with the label list as both header row and first column."""

    def _write(fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["", *matrix.labels])
        for label, row in zip(matrix.labels, matrix.values):
            writer.writerow([label, *(f"{v:.9g}" for v in row)])

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(target)


def read_matrix_csv(source: str | Path | IO[str]) -> DistanceMatrix:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return _read_matrix(fh)
    return _read_matrix(source)


def _read_matrix(fh: IO[str]) -> DistanceMatrix:
    rows = list(csv.reader(fh))
    if not rows:
        raise ValueError("empty matrix file")
    labels = tuple(rows[0][1:])
    n = len(labels)
    values = np.zeros((n, n), dtype=np.float64)
    if len(rows) - 1 != n:
        raise ValueError(f"matrix file has {len(rows) - 1} rows for {n} labels")
    for i, row in enumerate(rows[1:]):
        if row[0] != labels[i]:
            raise ValueError(f"row label {row[0]!r} does not match header {labels[i]!r}")
        values[i] = [float(v) for v in row[1:]]
    return DistanceMatrix(labels, values)
