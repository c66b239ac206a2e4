"""Run a checkpoint over an audio directory and emit the interchange file.

The output is the phonedist unit-sequence interchange format (format_version
1, one JSON object per line); the file format is the whole contract with the
analysis side, so it is written here without importing that package.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .audio import load_waveform
from .errors import AudioDecodeFailure
from .model import CheckpointQuantizer

log = logging.getLogger("phonedist_extractor")

INTERCHANGE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ExtractionJob:
    model_name: str
    audio_dir: Path
    output_path: Path


@dataclass
class ExtractionSummary:
    utterances: int = 0
    skipped: int = 0
    frames: int = 0


def _audio_files(audio_dir: Path) -> list[Path]:
    return sorted(
        p for p in audio_dir.rglob("*") if p.is_file() and p.suffix.lower() == ".wav"
    )


def extract(job: ExtractionJob, quantizer: CheckpointQuantizer | None = None) -> ExtractionSummary:
    """Quantize every wav under audio_dir into one interchange record each.

    Utterance ids are paths relative to audio_dir, extension stripped, POSIX
    separators, matching how the analysis side derives ids from alignments.
    Undecodable files are skipped with a warning.
    """
    if quantizer is None:
        quantizer = CheckpointQuantizer(job.model_name)
    files = _audio_files(Path(job.audio_dir))
    if not files:
        log.warning("no wav files under %s; writing empty interchange file", job.audio_dir)
    summary = ExtractionSummary()
    with open(job.output_path, "w", encoding="utf-8") as fh:
        for path in files:
            uid = path.relative_to(job.audio_dir).with_suffix("").as_posix()
            try:
                waveform = load_waveform(path)
            except AudioDecodeFailure as exc:
                log.warning("skipping %s: %s", uid, exc)
                summary.skipped += 1
                continue
            indices = quantizer.quantize(waveform)
            record = {
                "format_version": INTERCHANGE_FORMAT_VERSION,
                "utterance_id": uid,
                "model_id": quantizer.model_id,
                "num_groups": quantizer.num_groups,
                "group_size": quantizer.group_size,
                "stride_samples": quantizer.stride_samples,
                "offset_samples": quantizer.offset_samples,
                "frames": indices.tolist(),
            }
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
            summary.utterances += 1
            summary.frames += int(indices.shape[0])
    return summary
