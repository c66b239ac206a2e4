"""Maximum-likelihood distributions over the unit inventory.

A category's probability of unit i is counts[i] / total, with no smoothing:
zeros are meaningful (they drive inventory utilization and divergence
support behavior), so nothing here ever adds an epsilon.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .corpus import UnitObservationBag
from .errors import EmptyCategory, InconsistentInventory, MalformedRecord

EXPORT_FORMAT_VERSION = 1
EXPORT_KIND = "phonedist-distributions"


@dataclass(frozen=True)
class PhoneticDistribution:
    """Immutable MLE distribution of one phonetic category over the inventory."""

    category: str
    omega_size: int
    probs: np.ndarray
    support_size: int
    total_observations: int

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (self.omega_size,):
            raise InconsistentInventory(
                f"{self.category!r}: probs length {probs.shape} != omega_size {self.omega_size}"
            )
        if probs.min() < 0.0 or probs.max() > 1.0:
            raise ValueError(f"{self.category!r}: probabilities outside [0, 1]")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ValueError(f"{self.category!r}: probabilities sum to {probs.sum()!r}")
        if self.support_size != int(np.count_nonzero(probs)):
            raise ValueError(f"{self.category!r}: support_size mismatch")
        if self.total_observations <= 0:
            raise EmptyCategory(f"{self.category!r}: no observations")


def estimate(bag: UnitObservationBag) -> PhoneticDistribution:
    """MLE over the bag: probs[i] = counts[i] / total. Raises EmptyCategory."""
    if bag.total <= 0:
        raise EmptyCategory(f"category {bag.category!r} has zero observations")
    if int(bag.counts.sum()) != bag.total:
        raise MalformedRecord(
            f"category {bag.category!r}: total {bag.total} != sum of counts {int(bag.counts.sum())}"
        )
    probs = bag.counts.astype(np.float64) / float(bag.total)
    return PhoneticDistribution(
        category=bag.category,
        omega_size=bag.omega_size,
        probs=probs,
        support_size=int(np.count_nonzero(bag.counts)),
        total_observations=int(bag.total),
    )


def check_shared_inventory(dists: Sequence[PhoneticDistribution]) -> int:
    sizes = {d.omega_size for d in dists}
    if len(sizes) > 1:
        raise InconsistentInventory(f"mixed inventory sizes: {sorted(sizes)}")
    return sizes.pop()


def utilization(distributions: Sequence[PhoneticDistribution]) -> float:
    """Fraction of units with nonzero probability under any distribution."""
    if not distributions:
        raise EmptyCategory("utilization of an empty distribution set is undefined")
    omega = check_shared_inventory(distributions)
    used = np.zeros(omega, dtype=bool)
    for dist in distributions:
        used |= dist.probs > 0.0
    return float(np.count_nonzero(used)) / float(omega)


def write_distribution_export(
    target: str | Path | IO[str],
    bags: Iterable[UnitObservationBag],
    omega_size: int,
    model_id: str,
    num_groups: int | None = None,
    group_size: int | None = None,
) -> None:
    """Write the sparse per-category count export (JSON lines).

    The first line is a header record; each following line holds one category
    with its nonzero (unit_id, count) pairs, sorted for determinism. Sparse
    because most units typically go unused.
    """
    header = {
        "format_version": EXPORT_FORMAT_VERSION,
        "kind": EXPORT_KIND,
        "model_id": model_id,
        "omega_size": omega_size,
        "num_groups": num_groups,
        "group_size": group_size,
    }
    rows = sorted(bags, key=lambda b: b.category)

    def _write(fh: IO[str]) -> None:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for bag in rows:
            if bag.omega_size != omega_size:
                raise InconsistentInventory(
                    f"category {bag.category!r} has inventory {bag.omega_size}, "
                    f"export header says {omega_size}"
                )
            nz = np.flatnonzero(bag.counts)
            record = {
                "category": bag.category,
                "total_observations": int(bag.total),
                "counts": [[int(i), int(bag.counts[i])] for i in nz],
            }
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(target)


def read_distribution_export(
    source: str | Path | IO[str],
) -> tuple[dict, list[UnitObservationBag]]:
    """Read an export back into (header, bags). Inverse of write_distribution_export."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return _read_export(fh, str(source))
    return _read_export(source, getattr(source, "name", "<stream>"))


def _read_export(fh: IO[str], name: str) -> tuple[dict, list[UnitObservationBag]]:
    lines = _json_lines(fh, name)
    try:
        where, header = next(lines)
    except StopIteration:
        raise MalformedRecord(f"{name}: empty export (missing header)") from None
    if header.get("kind") != EXPORT_KIND:
        raise MalformedRecord(f"{where}: not a distribution export header")
    if header.get("format_version") != EXPORT_FORMAT_VERSION:
        raise MalformedRecord(
            f"{where}: unsupported format_version {header.get('format_version')!r}"
        )
    omega = header.get("omega_size")
    if not isinstance(omega, int) or omega < 1:
        raise MalformedRecord(f"{where}: bad omega_size {omega!r}")
    bags = []
    seen = set()
    for where, record in lines:
        try:
            category = str(record["category"])
            total = int(record["total_observations"])
            pairs = record["counts"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"{where}: bad category record ({exc})") from None
        if category in seen:
            raise MalformedRecord(f"{where}: duplicate category {category!r}")
        seen.add(category)
        bag = UnitObservationBag.empty(category, omega)
        for pair in pairs:
            try:
                unit_id, count = int(pair[0]), int(pair[1])
            except (TypeError, ValueError, IndexError):
                raise MalformedRecord(f"{where}: bad (unit_id, count) pair {pair!r}") from None
            if not 0 <= unit_id < omega:
                raise MalformedRecord(f"{where}: unit id {unit_id} outside [0, {omega})")
            if count <= 0:
                raise MalformedRecord(f"{where}: nonpositive count for unit {unit_id}")
            bag.counts[unit_id] += count
        bag.total = int(bag.counts.sum())
        if bag.total != total:
            raise MalformedRecord(
                f"{where}: total_observations {total} != sum of counts {bag.total}"
            )
        bags.append(bag)
    return header, bags


def _json_lines(fh: IO[str], name: str) -> Iterator[tuple[str, dict]]:
    for lineno, raw in enumerate(fh, start=1):
        line = raw.strip()
        if not line:
            continue
        where = f"{name}:{lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"{where}: invalid JSON ({exc.msg})") from None
        if not isinstance(record, dict):
            raise MalformedRecord(f"{where}: expected a JSON object")
        yield where, record
