"""Phonetic-category metadata: feature vectors, articulatory classes.

Both tables ship as editable CSV data files (see phonedist/data/) and are
loaded here; nothing about the category inventory is hard-coded.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import MalformedLine, UnknownCategory
from .infotheory import DistanceMatrix

ARTICULATORY_CLASSES = frozenset(
    {"vowel", "plosive", "fricative", "affricate", "nasal", "approximant"}
)
VOICING_VALUES = frozenset({"voiced", "voiceless", "n/a"})


@dataclass(frozen=True)
class FeatureTable:
    """Multi-valued feature vectors per category; values compared by equality.

    Plain values are "+", "-", or "0" (unspecified); diphthong contours are
    kept as atomic two-character symbols such as "-+".
    """

    feature_names: tuple[str, ...]
    vectors: dict[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        for category, vector in self.vectors.items():
            if len(vector) != len(self.feature_names):
                raise MalformedLine(
                    f"category {category!r} has {len(vector)} values for "
                    f"{len(self.feature_names)} features"
                )

    def vector(self, category: str) -> tuple[str, ...]:
        try:
            return self.vectors[category]
        except KeyError:
            raise UnknownCategory(f"category {category!r} not in feature table") from None


@dataclass(frozen=True)
class ClassTable:
    """Articulatory class and voicing per category."""

    classes: dict[str, str]
    voicing: dict[str, str]

    def __post_init__(self) -> None:
        for category, cls in self.classes.items():
            if cls not in ARTICULATORY_CLASSES:
                raise MalformedLine(f"category {category!r}: unknown class {cls!r}")
        for category, v in self.voicing.items():
            if v not in VOICING_VALUES:
                raise MalformedLine(f"category {category!r}: unknown voicing {v!r}")

    def class_of(self, category: str) -> str:
        try:
            return self.classes[category]
        except KeyError:
            raise UnknownCategory(f"category {category!r} not in class table") from None

    def members(self, cls: str) -> list[str]:
        return sorted(c for c, k in self.classes.items() if k == cls)


def _data_rows(path: str | Path) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if line.strip() and not line.lstrip().startswith("#")]
    return list(csv.reader(lines))


def load_feature_table(path: str | Path) -> FeatureTable:
    """CSV: header 'category,<feature>,...'; one row per category."""
    rows = _data_rows(path)
    if not rows or len(rows[0]) < 2:
        raise MalformedLine(f"{path}: expected a header row with feature names")
    feature_names = tuple(rows[0][1:])
    vectors: dict[str, tuple[str, ...]] = {}
    for row in rows[1:]:
        if len(row) != len(feature_names) + 1:
            raise MalformedLine(f"{path}: row for {row[0]!r} has wrong arity")
        if row[0] in vectors:
            raise MalformedLine(f"{path}: duplicate category {row[0]!r}")
        vectors[row[0]] = tuple(row[1:])
    return FeatureTable(feature_names=feature_names, vectors=vectors)


def load_class_table(path: str | Path) -> ClassTable:
    """CSV: 'category,class,voicing' rows (header optional, detected)."""
    rows = _data_rows(path)
    classes: dict[str, str] = {}
    voicing: dict[str, str] = {}
    for row in rows:
        if row[:2] == ["category", "class"]:
            continue
        if len(row) != 3:
            raise MalformedLine(f"{path}: expected 'category,class,voicing', got {row!r}")
        category, cls, voi = (f.strip() for f in row)
        if category in classes:
            raise MalformedLine(f"{path}: duplicate category {category!r}")
        classes[category] = cls
        voicing[category] = voi
    return ClassTable(classes=classes, voicing=voicing)


def hamming_distance(a: str, b: str, table: FeatureTable) -> int:
    """Number of feature positions where two categories differ."""
    va, vb = table.vector(a), table.vector(b)
    return sum(1 for x, y in zip(va, vb) if x != y)


def feature_distance_matrix(
    categories: Sequence[str], table: FeatureTable
) -> DistanceMatrix:
    """Symmetric pairwise Hamming distances, integers stored as reals."""
    n = len(categories)
    values = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = float(hamming_distance(categories[i], categories[j], table))
            values[i, j] = d
            values[j, i] = d
    return DistanceMatrix(tuple(categories), values)


def class_entropy(
    entropies: Mapping[str, float], classes: ClassTable
) -> dict[str, float]:
    """Unweighted mean entropy of the member categories of each class."""
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for category in sorted(entropies):
        cls = classes.class_of(category)
        sums[cls] = sums.get(cls, 0.0) + float(entropies[category])
        counts[cls] = counts.get(cls, 0) + 1
    return {cls: sums[cls] / counts[cls] for cls in sums}


def default_mapping_path() -> Path:
    return _data_path("timit61_to_40.tsv")


def default_features_path() -> Path:
    return _data_path("phoible_features.csv")


def default_classes_path() -> Path:
    return _data_path("phone_classes.csv")


def _data_path(name: str) -> Path:
    return Path(str(resources.files("phonedist").joinpath("data", name)))
