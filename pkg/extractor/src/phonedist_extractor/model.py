"""Quantizer access for wav2vec2-style checkpoints.

Unit indices are the evaluation-time behavior of the gumbel vector quantizer:
the hard argmax, per codebook group, of the quantizer projection applied to
the layer-normed convolutional features. No sampling, no temperature, and the
transformer encoder is never run, so extraction is fast and deterministic.
"""

from __future__ import annotations

import numpy as np

from .errors import ModelLoadFailure

EXPECTED_GROUPS = 2
EXPECTED_GROUP_SIZE = 320


class CheckpointQuantizer:
    """Loaded checkpoint exposing quantize(waveform) -> (frames, groups) indices."""

    def __init__(self, model_name: str):
        try:
            import torch
            from transformers import Wav2Vec2FeatureExtractor, Wav2Vec2ForPreTraining
        except ImportError as exc:
            raise ModelLoadFailure(f"torch/transformers unavailable: {exc}") from exc
        self._torch = torch
        try:
            self._model = Wav2Vec2ForPreTraining.from_pretrained(model_name)
            self._preprocessor = Wav2Vec2FeatureExtractor.from_pretrained(model_name)
        except Exception as exc:
            raise ModelLoadFailure(f"cannot load checkpoint {model_name!r}: {exc}") from exc
        self._model.eval()
        config = self._model.config
        self.model_id = str(model_name)
        self.num_groups = int(config.num_codevector_groups)
        self.group_size = int(config.num_codevectors_per_group)
        if (self.num_groups, self.group_size) != (EXPECTED_GROUPS, EXPECTED_GROUP_SIZE):
            raise ModelLoadFailure(
                f"{model_name!r}: quantizer is {self.num_groups} x {self.group_size}, "
                f"expected {EXPECTED_GROUPS} codebooks of {EXPECTED_GROUP_SIZE}"
            )
        self.stride_samples, receptive_field = _conv_geometry(
            config.conv_kernel, config.conv_stride
        )
        self.offset_samples = receptive_field // 2

    def expected_frames(self, n_samples: int) -> int:
        """Conv-stack output length for an input of n_samples."""
        length = n_samples
        config = self._model.config
        for kernel, stride in zip(config.conv_kernel, config.conv_stride):
            length = (length - kernel) // stride + 1
        return max(length, 0)

    def quantize(self, waveform: np.ndarray) -> np.ndarray:
        """Per-frame group-local codebook indices, shape (frames, num_groups)."""
        torch = self._torch
        inputs = self._preprocessor(
            waveform, sampling_rate=16000, return_tensors="pt"
        ).input_values
        with torch.inference_mode():
            features = self._model.wav2vec2.feature_extractor(inputs)
            features = features.transpose(1, 2)
            features = self._model.wav2vec2.feature_projection.layer_norm(features)
            logits = self._model.quantizer.weight_proj(features)
            n_frames = logits.shape[1]
            indices = logits.view(n_frames, self.num_groups, self.group_size).argmax(-1)
        return indices.cpu().numpy().astype(np.int64)


def _conv_geometry(kernels, strides) -> tuple[int, int]:
    """Total stride and receptive field of the conv stack, in samples."""
    jump = 1
    receptive = 1
    for kernel, stride in zip(kernels, strides):
        receptive += (int(kernel) - 1) * jump
        jump *= int(stride)
    return jump, receptive
