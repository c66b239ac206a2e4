import json

import numpy as np
import pytest

from conftest import write_wav
from phonedist_extractor import CheckpointQuantizer, ExtractionJob, extract
from phonedist_extractor.audio import load_waveform
from phonedist_extractor.cli import main
from phonedist_extractor.errors import AudioDecodeFailure, ModelLoadFailure


@pytest.fixture(scope="module")
def quantizer(checkpoint):
    return CheckpointQuantizer(checkpoint)


class TestQuantizer:
    def test_geometry_from_config(self, quantizer):
        assert quantizer.num_groups == 2
        assert quantizer.group_size == 320
        assert quantizer.stride_samples == 320
        assert quantizer.offset_samples == 200  # half the 400-sample field

    def test_one_second_frame_count(self, quantizer):
        # closed form floor((16000 - 400)/320) + 1 = 49, checked against the
        # conv stack's actual output length
        rng = np.random.default_rng(0)
        waveform = rng.standard_normal(16000).astype(np.float32) * 0.1
        indices = quantizer.quantize(waveform)
        assert indices.shape == (49, 2)
        assert quantizer.expected_frames(16000) == 49
        assert (16000 - 400) // 320 + 1 == 49

    def test_indices_in_codebook_range(self, quantizer):
        rng = np.random.default_rng(1)
        indices = quantizer.quantize(rng.standard_normal(8000).astype(np.float32))
        assert indices.min() >= 0
        assert indices.max() < 320

    def test_deterministic(self, quantizer):
        rng = np.random.default_rng(2)
        waveform = rng.standard_normal(12000).astype(np.float32)
        first = quantizer.quantize(waveform)
        assert np.array_equal(first, quantizer.quantize(waveform))

    def test_missing_checkpoint(self, tmp_path):
        with pytest.raises(ModelLoadFailure):
            CheckpointQuantizer(str(tmp_path / "nothing-here"))


class TestAudio:
    def test_int16_wav(self, tmp_path):
        path = write_wav(tmp_path / "a.wav", 1600)
        wave = load_waveform(path)
        assert wave.dtype == np.float32
        assert wave.shape == (1600,)
        assert np.abs(wave).max() <= 1.0

    def test_float32_wav(self, tmp_path):
        path = write_wav(tmp_path / "f.wav", 800, dtype=np.float32)
        assert load_waveform(path).shape == (800,)

    def test_wrong_rate_refused(self, tmp_path):
        path = write_wav(tmp_path / "slow.wav", 800, rate=8000)
        with pytest.raises(AudioDecodeFailure, match="8000"):
            load_waveform(path)

    def test_garbage_refused(self, tmp_path):
        path = tmp_path / "not.wav"
        path.write_bytes(b"this is not audio")
        with pytest.raises(AudioDecodeFailure):
            load_waveform(path)


class TestExtraction:
    @pytest.fixture
    def audio_dir(self, tmp_path):
        root = tmp_path / "audio"
        write_wav(root / "spk1" / "u1.wav", 16000, seed=10)
        write_wav(root / "spk1" / "u2.wav", 9000, seed=11)
        write_wav(root / "spk2" / "u3.wav", 4000, seed=12)
        return root

    def test_round_trip_through_analysis_parser(self, checkpoint, quantizer, audio_dir, tmp_path):
        from phonedist.corpus import read_unit_sequences

        out = tmp_path / "units.jsonl"
        summary = extract(ExtractionJob(checkpoint, audio_dir, out), quantizer)
        assert summary.utterances == 3
        assert summary.skipped == 0
        parsed = {u.utterance_id: u for u in read_unit_sequences(out)}
        assert sorted(parsed) == ["spk1/u1", "spk1/u2", "spk2/u3"]
        for uid, n_samples, seed in [
            ("spk1/u1", 16000, 10), ("spk1/u2", 9000, 11), ("spk2/u3", 4000, 12)
        ]:
            units = parsed[uid]
            assert units.model_id == checkpoint
            assert units.num_groups == 2
            assert units.group_size == 320
            assert units.stride_samples == 320
            assert units.offset_samples == 200
            assert len(units.frames) == quantizer.expected_frames(n_samples)
            direct = quantizer.quantize(
                load_waveform(audio_dir / f"{uid}.wav")
            )
            assert np.array_equal(np.asarray(units.frames), direct)
            assert all(0 <= i < 320 for frame in units.frames for i in frame)

    def test_emitted_records_validate_against_schema(self, checkpoint, quantizer, audio_dir, tmp_path):
        out = tmp_path / "units.jsonl"
        extract(ExtractionJob(checkpoint, audio_dir, out), quantizer)
        for line in out.read_text().splitlines():
            record = json.loads(line)
            assert record["format_version"] == 1
            for key in (
                "utterance_id", "model_id", "num_groups", "group_size",
                "stride_samples", "offset_samples", "frames",
            ):
                assert key in record

    def test_byte_deterministic(self, checkpoint, quantizer, audio_dir, tmp_path):
        out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        extract(ExtractionJob(checkpoint, audio_dir, out1), quantizer)
        extract(ExtractionJob(checkpoint, audio_dir, out2), quantizer)
        assert out1.read_bytes() == out2.read_bytes()

    def test_empty_audio_dir(self, checkpoint, quantizer, tmp_path, caplog):
        empty = tmp_path / "none"
        empty.mkdir()
        out = tmp_path / "units.jsonl"
        summary = extract(ExtractionJob(checkpoint, empty, out), quantizer)
        assert summary.utterances == 0
        assert out.read_text() == ""
        assert "no wav files" in caplog.text

    def test_bad_file_skipped_with_warning(self, checkpoint, quantizer, tmp_path, caplog):
        root = tmp_path / "audio"
        write_wav(root / "good.wav", 3200, seed=3)
        (root / "bad.wav").write_bytes(b"junk")
        out = tmp_path / "units.jsonl"
        summary = extract(ExtractionJob(checkpoint, root, out), quantizer)
        assert summary.utterances == 1
        assert summary.skipped == 1
        assert "bad" in caplog.text


class TestCli:
    def test_end_to_end(self, checkpoint, tmp_path, capsys):
        root = tmp_path / "audio"
        write_wav(root / "u.wav", 16000, seed=5)
        out = tmp_path / "units.jsonl"
        code = main(["--model", checkpoint, "--audio", str(root), "--out", str(out)])
        assert code == 0
        assert "utterances: 1" in capsys.readouterr().out
        assert out.is_file()

    def test_missing_audio_dir(self, checkpoint, tmp_path):
        code = main(
            ["--model", checkpoint, "--audio", str(tmp_path / "nope"),
             "--out", str(tmp_path / "o.jsonl")]
        )
        assert code == 2

    def test_bad_model(self, tmp_path):
        root = tmp_path / "audio"
        root.mkdir()
        code = main(
            ["--model", str(tmp_path / "missing"), "--audio", str(root),
             "--out", str(tmp_path / "o.jsonl")]
        )
        assert code == 1
