"""phonedist-extract: checkpoint + audio directory -> interchange file."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import ExtractorError
from .extract import ExtractionJob, extract


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("PHONEDIST_LOG", "INFO").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.INFO),
        format="%(levelname)s %(message)s",
    )
    parser = argparse.ArgumentParser(
        prog="phonedist-extract",
        description="Extract discrete quantizer units from 16 kHz wav files.",
    )
    parser.add_argument("--model", required=True, help="checkpoint name or local path")
    parser.add_argument("--audio", required=True, type=Path, help="directory of wav files")
    parser.add_argument("--out", required=True, type=Path, help="interchange file to write")
    args = parser.parse_args(argv)
    if not args.audio.is_dir():
        logging.error("audio directory %s does not exist", args.audio)
        return 2
    try:
        summary = extract(ExtractionJob(args.model, args.audio, args.out))
    except ExtractorError as exc:
        logging.error("%s", exc)
        return 1
    print(
        f"utterances: {summary.utterances}\n"
        f"skipped: {summary.skipped}\n"
        f"frames: {summary.frames}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
