"""Alignment parsing, phone-label reduction, and frame-to-phone assignment.

The corpus side of the pipeline: read `.phn` alignments and unit-sequence
interchange files, reduce the phone inventory through a mapping table, and
assign quantizer frames to phone segments so each category accumulates a bag
of discrete-unit observations.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import (
    MalformedLine,
    MalformedRecord,
    NonMonotonic,
    UnknownLabel,
    UtteranceMismatch,
)

INTERCHANGE_FORMAT_VERSION = 1

#: Sentinel used in mapping files to exclude a label from the analysis.
DROP = "DROP"


@dataclass(frozen=True)
class PhoneSegment:
    """One aligned phone: half-open sample interval [begin, end) at 16 kHz."""

    label: str
    begin: int
    end: int

    def __post_init__(self) -> None:
        if not self.label:
            raise MalformedLine("segment label must be non-empty")
        if self.begin < 0:
            raise NonMonotonic(f"segment begin {self.begin} is negative")
        if self.begin >= self.end:
            raise NonMonotonic(
                f"segment [{self.begin}, {self.end}) is empty or inverted"
            )


@dataclass(frozen=True)
class PhoneAlignment:
    """Time-ordered, non-overlapping phone segments of one utterance."""

    utterance_id: str
    segments: tuple[PhoneSegment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        prev = None
        for seg in self.segments:
            if prev is not None and seg.begin < prev.end:
                raise NonMonotonic(
                    f"utterance {self.utterance_id!r}: segment [{seg.begin}, {seg.end}) "
                    f"overlaps previous segment ending at {prev.end}"
                )
            prev = seg


@dataclass(frozen=True)
class UnitSequence:
    """Per-utterance quantizer output: one tuple of group-local indices per frame.

    Frame t is centered at sample offset_samples + t * stride_samples; the
    shipped wav2vec2-style defaults are stride 320 and offset 200 (half the
    400-sample receptive field) at 16 kHz, but both are plain fields so any
    encoder geometry works.
    """

    utterance_id: str
    model_id: str
    num_groups: int
    group_size: int
    stride_samples: int
    offset_samples: int
    frames: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.num_groups < 1 or self.group_size < 1:
            raise MalformedRecord(
                f"utterance {self.utterance_id!r}: num_groups and group_size must be positive"
            )
        if self.stride_samples < 1 or self.offset_samples < 0:
            raise MalformedRecord(
                f"utterance {self.utterance_id!r}: bad stride/offset"
            )
        frames = tuple(tuple(int(i) for i in frame) for frame in self.frames)
        object.__setattr__(self, "frames", frames)
        if frames:
            if any(len(frame) != self.num_groups for frame in frames):
                raise MalformedRecord(
                    f"utterance {self.utterance_id!r}: every frame needs exactly "
                    f"{self.num_groups} group indices"
                )
            arr = np.asarray(frames, dtype=np.int64)
            if arr.min() < 0 or arr.max() >= self.group_size:
                raise MalformedRecord(
                    f"utterance {self.utterance_id!r}: unit index outside "
                    f"[0, {self.group_size})"
                )

    @property
    def omega_size(self) -> int:
        """Size of the concatenated unit inventory, num_groups * group_size."""
        return self.num_groups * self.group_size

    def frame_center(self, t: int) -> int:
        return self.offset_samples + t * self.stride_samples


@dataclass(frozen=True)
class PhoneMapping:
    """Label reduction rules; a value of None means the label is dropped."""

    rules: dict[str, str | None]

    def reduced_labels(self) -> set[str]:
        return {v for v in self.rules.values() if v is not None}


@dataclass
class UnitObservationBag:
    """Mutable per-category counts over the concatenated unit inventory.

    Bags form a monoid under merge(): accumulation order never changes the
    result, which is what makes per-utterance ingest order-independent.
    """

    category: str
    counts: np.ndarray
    total: int = 0

    @classmethod
    def empty(cls, category: str, omega_size: int) -> "UnitObservationBag":
        return cls(category=category, counts=np.zeros(omega_size, dtype=np.int64))

    @property
    def omega_size(self) -> int:
        return int(self.counts.shape[0])

    def merge(self, other: "UnitObservationBag") -> None:
        if other.omega_size != self.omega_size:
            raise MalformedRecord(
                f"cannot merge bags with inventories {self.omega_size} and {other.omega_size}"
            )
        self.counts += other.counts
        self.total += other.total


def parse_phn(text: str, utterance_id: str = "", sample_rate: int = 16000) -> PhoneAlignment:
    """Parse `.phn` content: one whitespace-separated "begin end label" per line.

    Bounds are sample indices (half-open). Blank lines are ignored. Raises
    MalformedLine / NonMonotonic with 1-based line numbers.
    """
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    segments = []
    prev_end = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise MalformedLine(
                f"line {lineno}: expected 'begin end label', got {len(fields)} fields"
            )
        try:
            begin, end = int(fields[0]), int(fields[1])
        except ValueError:
            raise MalformedLine(f"line {lineno}: non-integer segment bounds") from None
        try:
            seg = PhoneSegment(label=fields[2], begin=begin, end=end)
        except NonMonotonic as exc:
            raise NonMonotonic(f"line {lineno}: {exc}") from None
        if prev_end is not None and seg.begin < prev_end:
            raise NonMonotonic(
                f"line {lineno}: segment begins at {seg.begin} before previous end {prev_end}"
            )
        segments.append(seg)
        prev_end = seg.end
    return PhoneAlignment(utterance_id=utterance_id, segments=tuple(segments))


def format_phn(alignment: PhoneAlignment) -> str:
    """Inverse of parse_phn; round-trips exactly."""
    return "".join(f"{s.begin} {s.end} {s.label}\n" for s in alignment.segments)


def load_phone_mapping(path: str | Path) -> PhoneMapping:
    """Read a two-column tab-separated mapping file.

    Column 1 is the source label, column 2 the reduced label or the literal
    token DROP. Lines starting with '#' are comments.
    """
    rules: dict[str, str | None] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                raise MalformedLine(
                    f"{path}: line {lineno}: expected 'source<TAB>target'"
                )
            source, target = fields[0].strip(), fields[1].strip()
            if source in rules:
                raise MalformedLine(f"{path}: line {lineno}: duplicate rule for {source!r}")
            rules[source] = None if target == DROP else target
    return PhoneMapping(rules=rules)


def apply_mapping(alignment: PhoneAlignment, mapping: PhoneMapping) -> PhoneAlignment:
    """Relabel segments through the reduction table, removing DROP-mapped ones."""
    kept = []
    for seg in alignment.segments:
        if seg.label not in mapping.rules:
            raise UnknownLabel(
                f"utterance {alignment.utterance_id!r}: label {seg.label!r} has no mapping rule"
            )
        target = mapping.rules[seg.label]
        if target is None:
            continue
        kept.append(
            seg if target == seg.label else PhoneSegment(target, seg.begin, seg.end)
        )
    return PhoneAlignment(utterance_id=alignment.utterance_id, segments=tuple(kept))


def align_frames(
    alignment: PhoneAlignment, units: UnitSequence
) -> list[tuple[str, int]]:
    """Assign each frame to the segment containing its center sample.

    Centers sit at offset_samples + t * stride_samples; a center belongs to
    the unique segment whose half-open [begin, end) interval contains it, so a
    center exactly on a boundary goes to the segment that begins there. Frames
    whose centers fall in no segment are omitted.
    """
    if alignment.utterance_id != units.utterance_id:
        raise UtteranceMismatch(
            f"alignment is for {alignment.utterance_id!r}, units for {units.utterance_id!r}"
        )
    begins = [s.begin for s in alignment.segments]
    ends = [s.end for s in alignment.segments]
    labels = [s.label for s in alignment.segments]
    out: list[tuple[str, int]] = []
    for t in range(len(units.frames)):
        center = units.offset_samples + t * units.stride_samples
        i = bisect_right(begins, center) - 1
        if i >= 0 and center < ends[i]:
            out.append((labels[i], t))
    return out


def skipped_segments(alignment: PhoneAlignment, units: UnitSequence) -> list[PhoneSegment]:
    """Segments that contain no frame center (too short for the frame spacing)."""
    stride, offset = units.stride_samples, units.offset_samples
    n_frames = len(units.frames)
    skipped = []
    for seg in alignment.segments:
        # first frame index whose center >= begin
        first = max(0, -(-(seg.begin - offset) // stride))
        if first >= n_frames or units.frame_center(first) >= seg.end:
            skipped.append(seg)
    return skipped


def accumulate_bags(
    assignments: Iterable[tuple[str, int]],
    units: UnitSequence,
    bags: dict[str, UnitObservationBag],
) -> dict[str, UnitObservationBag]:
    """Add one observation per codebook group for every assigned frame.

    Group g of frame t contributes global unit id g * group_size + local
    index, so a frame under G groups adds exactly G observations.
    """
    by_category: dict[str, list[int]] = {}
    for category, t in assignments:
        by_category.setdefault(category, []).append(t)
    if not by_category:
        return bags
    frames = np.asarray(units.frames, dtype=np.int64)
    group_base = np.arange(units.num_groups, dtype=np.int64) * units.group_size
    for category, ts in by_category.items():
        bag = bags.get(category)
        if bag is None:
            bag = UnitObservationBag.empty(category, units.omega_size)
            bags[category] = bag
        unit_ids = (frames[ts] + group_base).ravel()
        np.add.at(bag.counts, unit_ids, 1)
        bag.total += int(unit_ids.size)
    return bags


def _require(record: dict, key: str, where: str):
    if key not in record:
        raise MalformedRecord(f"{where}: missing field {key!r}")
    return record[key]


def unit_sequence_to_record(units: UnitSequence) -> dict:
    return {
        "format_version": INTERCHANGE_FORMAT_VERSION,
        "utterance_id": units.utterance_id,
        "model_id": units.model_id,
        "num_groups": units.num_groups,
        "group_size": units.group_size,
        "stride_samples": units.stride_samples,
        "offset_samples": units.offset_samples,
        "frames": [list(f) for f in units.frames],
    }


def unit_sequence_from_record(record: dict, where: str = "record") -> UnitSequence:
    version = _require(record, "format_version", where)
    if version != INTERCHANGE_FORMAT_VERSION:
        raise MalformedRecord(
            f"{where}: unsupported format_version {version!r} "
            f"(expected {INTERCHANGE_FORMAT_VERSION})"
        )
    try:
        return UnitSequence(
            utterance_id=str(_require(record, "utterance_id", where)),
            model_id=str(_require(record, "model_id", where)),
            num_groups=int(_require(record, "num_groups", where)),
            group_size=int(_require(record, "group_size", where)),
            stride_samples=int(_require(record, "stride_samples", where)),
            offset_samples=int(_require(record, "offset_samples", where)),
            frames=tuple(tuple(f) for f in _require(record, "frames", where)),
        )
    except MalformedRecord:
        raise
    except (TypeError, ValueError) as exc:
        raise MalformedRecord(f"{where}: {exc}") from None


def read_unit_sequences(source: str | Path | IO[str]) -> Iterator[UnitSequence]:
    """Stream UnitSequence records from a JSON-lines interchange file."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from _read_unit_lines(fh, str(source))
    else:
        yield from _read_unit_lines(source, getattr(source, "name", "<stream>"))


def _read_unit_lines(fh: IO[str], name: str) -> Iterator[UnitSequence]:
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
        yield unit_sequence_from_record(record, where)


def write_unit_sequences(
    target: str | Path | IO[str], sequences: Iterable[UnitSequence]
) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _write_unit_lines(fh, sequences)
    else:
        _write_unit_lines(target, sequences)


def _write_unit_lines(fh: IO[str], sequences: Iterable[UnitSequence]) -> None:
    for units in sequences:
        fh.write(json.dumps(unit_sequence_to_record(units), separators=(",", ":")))
        fh.write("\n")
