"""Agglomerative hierarchical clustering with Ward linkage.

Operates on an arbitrary precomputed dissimilarity matrix: internally the
Lance-Williams recurrence runs on squared dissimilarities and merge heights
are reported as square roots, the usual convention when Ward is applied to
distances that are not guaranteed Euclidean (JSD values are not). On such
input merge heights can occasionally decrease; that is reported through a
warning, never hidden or "fixed".
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import IO, NamedTuple

from .errors import InvalidK, TooFewItems
from .infotheory import DistanceMatrix


class HeightMonotonicityWarning(UserWarning):
    """Merge heights decreased; the input was not Ward-compatible (non-Euclidean)."""


class Merge(NamedTuple):
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree: leaves are nodes 0..n-1, merge i creates node n+i."""

    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "leaves", tuple(self.leaves))
        object.__setattr__(self, "merges", tuple(Merge(*m) for m in self.merges))
        n = len(self.leaves)
        if len(self.merges) != n - 1:
            raise ValueError(f"{n} leaves need {n - 1} merges, got {len(self.merges)}")
        used: set[int] = set()
        for step, merge in enumerate(self.merges):
            node_id = n + step
            for child in (merge.left, merge.right):
                if not 0 <= child < node_id:
                    raise ValueError(f"merge {step}: child {child} not yet created")
                if child in used:
                    raise ValueError(f"merge {step}: node {child} used twice")
                used.add(child)
        if self.merges and self.merges[-1].size != n:
            raise ValueError("final merge does not contain all leaves")

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def node_members(self, node: int) -> list[int]:
        """Leaf indices under a node id."""
        n = self.n_leaves
        if node < n:
            return [node]
        merge = self.merges[node - n]
        return self.node_members(merge.left) + self.node_members(merge.right)


def ward_cluster(matrix: DistanceMatrix) -> Dendrogram:
    """Agglomerate by minimal Ward dissimilarity until one cluster remains.

    After merging clusters a and b into u, the squared dissimilarity to every
    other active cluster k follows the Lance-Williams recurrence with Ward
    coefficients:

        d2(u,k) = ((|a|+|k|) d2(a,k) + (|b|+|k|) d2(b,k) - |k| d2(a,b))
                  / (|a|+|b|+|k|)

    Ties break toward the smallest (i, j) node-id pair in lexicographic
    order, so identical input always yields the identical tree.
    """
    n = matrix.size
    if n < 2:
        raise TooFewItems(f"clustering needs at least 2 items, got {n}")
    d2: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            d2[(i, j)] = float(matrix.values[i, j]) ** 2
    size = {i: 1 for i in range(n)}
    active = list(range(n))
    merges: list[Merge] = []
    next_id = n
    prev_height = -math.inf
    while len(active) > 1:
        best_pair = None
        best_d2 = math.inf
        for ii, a in enumerate(active):
            for b in active[ii + 1:]:
                v = d2[(a, b)]
                if v < best_d2:
                    best_d2 = v
                    best_pair = (a, b)
        a, b = best_pair
        height = math.sqrt(best_d2)
        if height < prev_height - 1e-12:
            warnings.warn(
                f"merge height decreased from {prev_height:.9g} to {height:.9g}; "
                "input dissimilarities are not Ward-compatible",
                HeightMonotonicityWarning,
                stacklevel=2,
            )
        prev_height = max(prev_height, height)
        merged_size = size[a] + size[b]
        merges.append(Merge(a, b, height, merged_size))
        for k in active:
            if k == a or k == b:
                continue
            dak = d2[(min(a, k), max(a, k))]
            dbk = d2[(min(b, k), max(b, k))]
            d2[(k, next_id)] = (
                (size[a] + size[k]) * dak
                + (size[b] + size[k]) * dbk
                - size[k] * best_d2
            ) / (merged_size + size[k])
        size[next_id] = merged_size
        active = [x for x in active if x != a and x != b]
        active.append(next_id)
        next_id += 1
    return Dendrogram(leaves=matrix.labels, merges=tuple(merges))


def cut(dendrogram: Dendrogram, k: int) -> list[list[str]]:
    """Undo the last k-1 merges and return the k clusters as sorted label lists.

    Clusters come back ordered by their smallest member label.
    """
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in [1, {n}], got {k}")
    parent = list(range(2 * n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step in range(n - k):
        merge = dendrogram.merges[step]
        node = n + step
        parent[find(merge.left)] = node
        parent[find(merge.right)] = node
    groups: dict[int, list[str]] = {}
    for leaf in range(n):
        groups.setdefault(find(leaf), []).append(dendrogram.leaves[leaf])
    clusters = [sorted(members) for members in groups.values()]
    clusters.sort(key=lambda members: members[0])
    return clusters


def _escape_newick_label(label: str) -> str:
    if label and not any(c in label for c in "(),:;'[] \t\n"):
        return label
    return "'" + label.replace("'", "''") + "'"


def to_newick(dendrogram: Dendrogram) -> str:
    """Newick string; branch length = parent height - child height, leaves at 0."""
    n = dendrogram.n_leaves

    def height(node: int) -> float:
        return 0.0 if node < n else dendrogram.merges[node - n].height

    def render(node: int, parent_height: float) -> str:
        branch = parent_height - height(node)
        if node < n:
            return f"{_escape_newick_label(dendrogram.leaves[node])}:{branch:.9g}"
        merge = dendrogram.merges[node - n]
        left = render(merge.left, merge.height)
        right = render(merge.right, merge.height)
        if node == n + len(dendrogram.merges) - 1:
            return f"({left},{right})"
        return f"({left},{right}):{branch:.9g}"

    if not dendrogram.merges:
        return _escape_newick_label(dendrogram.leaves[0]) + ";" if n else ";"
    root = n + len(dendrogram.merges) - 1
    return render(root, height(root)) + ";"


def write_merges_csv(dendrogram: Dendrogram, target: str | Path | IO[str]) -> None:
    """Merge list as CSV rows (step, left, right, height, size)."""

    def _write(fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "left", "right", "height", "size"])
        for step, merge in enumerate(dendrogram.merges):
            writer.writerow(
                [step, merge.left, merge.right, f"{merge.height:.9g}", merge.size]
            )

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(target)
