import os

import numpy as np
import pytest
from scipy.io import wavfile

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    """Tiny randomly-initialized wav2vec2-style checkpoint saved locally.

    Keeps the standard conv geometry (stride 320, receptive field 400) and the
    2 x 320 quantizer, but shrinks every other dimension.
    """
    import torch
    from transformers import (
        Wav2Vec2Config,
        Wav2Vec2FeatureExtractor,
        Wav2Vec2ForPreTraining,
    )

    path = tmp_path_factory.mktemp("checkpoint")
    config = Wav2Vec2Config(
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        conv_dim=(16, 16, 16, 16, 16, 16, 16),
        num_codevector_groups=2,
        num_codevectors_per_group=320,
        codevector_dim=16,
        proj_codevector_dim=16,
        vocab_size=32,
    )
    torch.manual_seed(1234)
    model = Wav2Vec2ForPreTraining(config)
    model.save_pretrained(path)
    Wav2Vec2FeatureExtractor(
        do_normalize=True, return_attention_mask=False
    ).save_pretrained(path)
    return str(path)


def write_wav(path, n_samples, rate=16000, seed=0, dtype=np.int16):
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / rate
    signal = 0.5 * np.sin(2 * np.pi * 220.0 * t) + 0.1 * rng.standard_normal(n_samples)
    if dtype == np.int16:
        data = (np.clip(signal, -1, 1) * 32767).astype(np.int16)
    else:
        data = signal.astype(dtype)
    path.parent.mkdir(parents=True, exist_ok=True)
    wavfile.write(path, rate, data)
    return path
