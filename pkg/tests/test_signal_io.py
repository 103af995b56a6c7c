import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.io import wavfile

from cardiosep.errors import DataFormatError
from cardiosep.signal_io import (
    EPS_POS,
    MixtureSet,
    Signal,
    affine_shift,
    invert_affine,
    load_matrix_csv,
    make_heart_lung_case,
    make_heart_source,
    make_lung_source,
    read_wav,
    read_wav_matrix,
    resolve_offset,
    save_matrix_csv,
    synth_mixtures,
    write_wav,
    write_wav_matrix,
)


class TestSignal:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Signal(np.array([0.0, np.nan]), 100)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            Signal(np.zeros(4), 0)

    def test_duration(self):
        assert Signal(np.zeros(200), 100).duration == pytest.approx(2.0)


class TestWavRoundTrip:
    def test_silence(self, tmp_path):
        path = tmp_path / "silence.wav"
        write_wav(Signal(np.zeros(8000), 8000), path)
        sig = read_wav(path)
        assert sig.sample_rate == 8000
        assert sig.samples.shape == (8000,)
        np.testing.assert_array_equal(sig.samples, 0.0)

    def test_full_scale_int16(self, tmp_path):
        path = tmp_path / "full.wav"
        wavfile.write(path, 8000, np.array([32767, -32768, 0], dtype=np.int16))
        sig = read_wav(path)
        # integer scaling: 32767 / 32768
        assert sig.samples[0] == pytest.approx(0.999969482421875, abs=0)
        assert sig.samples[1] == pytest.approx(-1.0, abs=0)

    def test_stereo_takes_channel_zero(self, tmp_path):
        path = tmp_path / "stereo.wav"
        frames = np.stack(
            [np.linspace(-0.5, 0.5, 50), np.zeros(50)], axis=1
        ).astype(np.float32)
        wavfile.write(path, 4000, frames)
        sig = read_wav(path)
        assert len(sig) == 50
        np.testing.assert_allclose(sig.samples, np.linspace(-0.5, 0.5, 50), atol=1e-7)

    def test_ramp_quantization_bound(self, tmp_path):
        path = tmp_path / "ramp.wav"
        ramp = np.linspace(-1.0, 1.0, 100)
        write_wav(Signal(ramp, 1000), path)
        back = read_wav(path)
        assert np.max(np.abs(back.samples - ramp)) <= 2.0**-15

    def test_noise_round_trip_correlation(self, tmp_path):
        rng = np.random.default_rng(7)
        noise = rng.uniform(-1, 1, 1000)
        path = tmp_path / "noise.wav"
        write_wav(Signal(noise, 8000), path)
        back = read_wav(path)
        assert np.corrcoef(noise, back.samples)[0, 1] >= 0.9999

    def test_empty_signal_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_wav(Signal(np.array([]), 8000), tmp_path / "x.wav")

    def test_unreadable_file(self, tmp_path):
        path = tmp_path / "not_audio.wav"
        path.write_bytes(b"definitely not RIFF")
        with pytest.raises(DataFormatError):
            read_wav(path)

    def test_matrix_round_trip(self, tmp_path):
        path = tmp_path / "multi.wav"
        matrix = np.vstack([np.linspace(-0.9, 0.9, 64), np.linspace(0.9, -0.9, 64)])
        write_wav_matrix(matrix, 4000, path)
        back, rate = read_wav_matrix(path)
        assert rate == 4000
        assert back.shape == (2, 64)
        assert np.max(np.abs(back - matrix)) <= 2.0**-15

    def test_loud_signal_is_peak_normalized(self, tmp_path):
        path = tmp_path / "loud.wav"
        write_wav(Signal(np.array([0.0, 4.0, -2.0]), 8000), path)
        back = read_wav(path)
        np.testing.assert_allclose(back.samples, [0.0, 1.0, -0.5], atol=2.0**-15)


class TestSynthMixtures:
    def test_identity_mixing_is_exact(self):
        rng = np.random.default_rng(0)
        sources = rng.normal(size=(2, 300))
        out = synth_mixtures(sources, np.eye(2), sample_rate=100)
        np.testing.assert_array_equal(out.mixtures, sources)

    def test_weighted_sum_of_impulses(self):
        sources = np.zeros((2, 10))
        sources[0, 2] = 1.0
        sources[1, 7] = 1.0
        mixing = np.array([[1.0, 0.5], [0.5, 1.0]])
        out = synth_mixtures(sources, mixing, sample_rate=100)
        expected = np.zeros((2, 10))
        expected[0, 2], expected[0, 7] = 1.0, 0.5
        expected[1, 2], expected[1, 7] = 0.5, 1.0
        np.testing.assert_array_equal(out.mixtures, expected)

    def test_noise_snr_matches_request(self):
        rng = np.random.default_rng(1)
        sources = rng.normal(size=(2, 100_000))
        out = synth_mixtures(sources, np.eye(2), noise_db=20.0, seed=5, sample_rate=100)
        noise = out.mixtures - sources
        snr = 10 * np.log10(np.mean(sources**2) / np.mean(noise**2))
        assert snr == pytest.approx(20.0, abs=0.5)

    def test_negative_mixing_rejected(self):
        with pytest.raises(ValueError):
            synth_mixtures(np.ones((2, 5)), np.array([[1.0, -0.1], [0.5, 1.0]]))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            synth_mixtures(np.ones((3, 5)), np.eye(2))


class TestAffineShift:
    def test_hand_case(self):
        np.testing.assert_array_equal(
            affine_shift(np.array([[-1.0, 1.0]]), 1.0, 1.0), [[0.0, 2.0]]
        )

    def test_auto_offset_hits_margin(self):
        y = np.array([[0.5, -0.3, 0.1]])
        shifted = affine_shift(y, 1.0, "auto")
        assert np.min(shifted) == pytest.approx(EPS_POS, rel=1e-9)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        y = rng.uniform(-2.0, 2.0, size=(4, 9))
        shifted = affine_shift(y, 2.0, 5.0)
        np.testing.assert_allclose(invert_affine(shifted, 2.0, 5.0), y, atol=1e-12)

    def test_invert_hand_case(self):
        np.testing.assert_array_equal(
            invert_affine(np.array([[0.0, 2.0]]), 1.0, 1.0), [[-1.0, 1.0]]
        )

    def test_invert_identity(self):
        y = np.array([[1.0, 2.0]])
        np.testing.assert_array_equal(invert_affine(y, 1.0, 0.0), y)

    def test_negative_result_rejected(self):
        with pytest.raises(ValueError):
            affine_shift(np.array([[-2.0, 1.0]]), 1.0, 0.5)

    def test_zero_scale_rejected(self):
        with pytest.raises(ValueError):
            invert_affine(np.ones((1, 1)), 0.0, 0.0)
        with pytest.raises(ValueError):
            resolve_offset(np.ones((1, 1)), 0.0, "auto")

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(0, 10_000),
        lam1=st.floats(min_value=1e-3, max_value=10.0),
    )
    def test_auto_shift_is_nonnegative(self, seed, lam1):
        rng = np.random.default_rng(seed)
        y = rng.normal(scale=3.0, size=(3, 7))
        assert np.min(affine_shift(y, lam1, "auto")) >= 0.0


class TestMatrixCsv:
    def test_small_round_trip(self, tmp_path):
        path = tmp_path / "m.csv"
        matrix = np.array([[8.0, 1.0, 6.0], [3.0, 5.0, 7.0], [4.0, 9.0, 2.0]])
        save_matrix_csv(matrix, path)
        np.testing.assert_array_equal(load_matrix_csv(path), matrix)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DataFormatError):
            load_matrix_csv(path)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1,2,3\n4,5\n")
        with pytest.raises(DataFormatError):
            load_matrix_csv(path)

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "alpha.csv"
        path.write_text("1,2\n3,potato\n")
        with pytest.raises(DataFormatError):
            load_matrix_csv(path)

    def test_large_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(11)
        matrix = rng.normal(size=(2, 100_000))
        path = tmp_path / "big.csv"
        save_matrix_csv(matrix, path)
        np.testing.assert_array_equal(load_matrix_csv(path), matrix)


class TestSyntheticSources:
    def test_sources_are_nonnegative(self):
        heart = make_heart_source(800, 6.0, seed=4)
        lung = make_lung_source(800, 6.0, seed=4)
        assert np.min(heart.samples) >= 0.0
        assert np.min(lung.samples) >= 0.0
        assert np.max(heart.samples) == pytest.approx(0.9)
        assert np.max(lung.samples) == pytest.approx(0.9)

    def test_case_carries_ground_truth(self):
        case = make_heart_lung_case(400, 4.0, seed=0)
        assert isinstance(case, MixtureSet)
        assert case.sources.shape == (2, 1600)
        assert case.mixtures.shape == (2, 1600)
        assert case.mixing.shape == (2, 2)
        np.testing.assert_allclose(case.mixtures, case.mixing @ case.sources)
