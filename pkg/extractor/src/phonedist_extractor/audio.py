"""Waveform loading for extraction: 16 kHz mono wav files."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import AudioDecodeFailure

TARGET_RATE = 16000

_PCM_SCALE = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
    np.dtype(np.uint8): 128.0,
}


def load_waveform(path: str | Path) -> np.ndarray:
    """Decode a wav file to float32 in [-1, 1]. Resampling is out of scope:
    anything that is not 16 kHz mono is refused."""
    try:
        rate, data = wavfile.read(path)
    except Exception as exc:
        raise AudioDecodeFailure(f"{path}: {exc}") from exc
    if rate != TARGET_RATE:
        raise AudioDecodeFailure(f"{path}: sample rate {rate}, need {TARGET_RATE}")
    if data.ndim != 1:
        raise AudioDecodeFailure(f"{path}: {data.shape[1]} channels, need mono")
    if data.size == 0:
        raise AudioDecodeFailure(f"{path}: empty audio")
    if data.dtype in _PCM_SCALE:
        offset = 128.0 if data.dtype == np.dtype(np.uint8) else 0.0
        return (data.astype(np.float32) - offset) / _PCM_SCALE[data.dtype]
    if np.issubdtype(data.dtype, np.floating):
        return data.astype(np.float32)
    raise AudioDecodeFailure(f"{path}: unsupported sample format {data.dtype}")
