"""Discrete-unit extraction from pretrained speech quantizers."""

from .extract import ExtractionJob, ExtractionSummary, extract
from .model import CheckpointQuantizer

__all__ = ["ExtractionJob", "ExtractionSummary", "extract", "CheckpointQuantizer"]
