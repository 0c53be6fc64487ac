"""Unit tests for the optical-network surrogate objective."""

import numpy as np
import pytest

from mfopt.core import QuantizationSpec, RngStream, quantize_array
from mfopt.onn import (OnnConfig, OnnParams, TWO_PI, _Device, mixing_matrix,
                       onn_forward, onn_objective)


def small_cfg(**kw):
    base = dict(n_pixels=16, n_in=8, n_modes=32, n_out=12,
                quantize_scores=False)
    base.update(kw)
    return OnnConfig(**base)


def random_task(cfg, n=20, seed=0):
    rng = RngStream(seed)
    X = (rng.uniform(0, 1, size=(n, cfg.n_pixels)) > 0.5).astype(float)
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return X, y


class TestConfig:
    def test_dim(self):
        assert small_cfg().dim == 8 + 12

    def test_invalid_sizes_rejected(self):
        with pytest.raises(ValueError):
            small_cfg(n_modes=0)
        with pytest.raises(ValueError):
            small_cfg(noise_sigma=-1.0)
        with pytest.raises(ValueError):
            small_cfg(nonlinearity="tanh")

    def test_mixing_matrix_deterministic_and_scaled(self):
        cfg = small_cfg(n_in=400, n_modes=2500)
        M = mixing_matrix(cfg)
        np.testing.assert_array_equal(M, mixing_matrix(cfg))
        # CN(0, 1/n_in): mean squared magnitude approx 1/400
        assert np.mean(np.abs(M) ** 2) == pytest.approx(1 / 400, rel=0.05)


class TestParamsVector:
    def test_phase_wrapped_weight_clipped(self):
        cfg = small_cfg()
        x = np.concatenate([np.full(8, TWO_PI + 1.0), np.full(12, 3.0)])
        p = OnnParams.from_vector(cfg, x)
        np.testing.assert_allclose(p.phi_in, 1.0, atol=1e-12)
        np.testing.assert_array_equal(p.w_out, 1.0)

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            OnnParams.from_vector(small_cfg(), np.zeros(5))

    def test_roundtrip(self):
        cfg = small_cfg()
        x = RngStream(0).uniform(0, 1, cfg.dim)
        p = OnnParams.from_vector(cfg, x)
        np.testing.assert_allclose(p.to_vector(), x, atol=1e-12)


class TestForward:
    def test_zero_weights_give_zero_score(self):
        cfg = small_cfg()
        x = np.concatenate([np.ones(8), np.zeros(12)])
        img = np.ones(16)
        assert onn_forward(cfg, x, img) == 0.0

    def test_dark_image_gives_zero_score(self):
        cfg = small_cfg()
        x = RngStream(1).uniform(0, 1, cfg.dim)
        assert onn_forward(cfg, x, np.zeros(16)) == 0.0

    def test_deterministic_without_noise(self):
        cfg = small_cfg()
        x = RngStream(2).uniform(0, 1, cfg.dim)
        img = (RngStream(3).uniform(0, 1, 16) > 0.5).astype(float)
        assert onn_forward(cfg, x, img) == onn_forward(cfg, x, img)

    def test_global_phase_invariance(self):
        # a phase offset that is a multiple of the input grid step leaves
        # every intensity (and hence the score) unchanged
        cfg = small_cfg()
        rng = RngStream(4)
        x = rng.uniform(0, 1, cfg.dim)
        img = (rng.uniform(0, 1, 16) > 0.5).astype(float)
        step = TWO_PI / (1 << cfg.input_bits)
        shifted = x.copy()
        shifted[:8] += 37 * step
        assert onn_forward(cfg, x, img) == pytest.approx(
            onn_forward(cfg, shifted, img), rel=1e-10)

    def test_linear_regime_intensity_scaling(self):
        # with the nonlinearity off, intensities are quadratic in the field:
        # scaling the image by c scales every raw score by c^2
        cfg = small_cfg(nonlinearity="off")
        rng = RngStream(5)
        x = rng.uniform(0, 1, cfg.dim)
        img = rng.uniform(0, 1, 16)
        s1 = onn_forward(cfg, x, img)
        s2 = onn_forward(cfg, x, 0.5 * img)
        assert s2 == pytest.approx(0.25 * s1, rel=1e-10)

    def test_nonlinearity_changes_output(self):
        x = RngStream(6).uniform(0, 1, small_cfg().dim)
        img = np.ones(16)
        on = onn_forward(small_cfg(nonlinearity="saturable"), x, img)
        off = onn_forward(small_cfg(nonlinearity="off"), x, img)
        assert on != off

    def test_readout_idempotent_under_weight_quantization(self):
        cfg = small_cfg()
        dev = _Device(cfg)
        rng = RngStream(7)
        I = rng.uniform(0, 1, size=(4, cfg.n_out))
        w = rng.uniform(-1, 1, cfg.n_out)
        wq = quantize_array(w, QuantizationSpec(cfg.weight_bits, -1.0, 1.0))
        np.testing.assert_allclose(dev.readout(I, w), dev.readout(I, wq),
                                   atol=1e-12)

    def test_wrong_pixel_count_rejected(self):
        with pytest.raises(ValueError):
            onn_forward(small_cfg(), np.zeros(small_cfg().dim), np.zeros(9))


class TestObjective:
    def _objective(self, **kw):
        cfg = kw.pop("cfg", small_cfg())
        X, y = random_task(cfg)
        return onn_objective(cfg, X, y, rng=RngStream(0, 2), **kw)

    def test_constant_zero_scores_give_unit_mse(self):
        # all-zero readout weights: every score is 0, targets are +/-1,
        # so the MSE is exactly 1 when score quantization is off
        obj = self._objective()
        x = np.concatenate([np.ones(8), np.zeros(12)])
        assert obj(x) == 1.0

    def test_zero_scores_accuracy_is_positive_rate(self):
        obj = self._objective()
        x = np.concatenate([np.ones(8), np.zeros(12)])
        # score 0 >= 0 predicts the positive class everywhere
        assert obj.test_accuracy(x) == 0.5

    def test_targets_01_accepted(self):
        cfg = small_cfg()
        X, y = random_task(cfg)
        obj = onn_objective(cfg, X, (y > 0).astype(float), rng=RngStream(0, 2))
        np.testing.assert_array_equal(obj.y, y)

    def test_bad_targets_rejected(self):
        cfg = small_cfg()
        X, _ = random_task(cfg)
        with pytest.raises(ValueError):
            onn_objective(cfg, X, np.full(len(X), 2.0))

    def test_population_matches_single(self):
        obj = self._objective()
        xs = RngStream(1).uniform(0, 1, size=(6, obj.dim))
        batch = obj.evaluate_population(xs)
        fresh = self._objective()
        singles = np.array([fresh(x) for x in xs[:1]])
        # first candidate only: both objectives start on the same full batch
        assert batch[0] == pytest.approx(singles[0], rel=1e-12)

    def test_common_batch_within_population(self):
        cfg = small_cfg()
        X, y = random_task(cfg, n=64)
        obj = onn_objective(cfg, X, y, batch_size=8, rng=RngStream(0, 2))
        x = RngStream(2).uniform(0, 1, obj.dim)
        scores = obj.evaluate_population(np.stack([x, x, x]))
        assert scores[0] == scores[1] == scores[2]

    def test_deterministic_given_stream(self):
        a, b = self._objective(), self._objective()
        xs = RngStream(3).uniform(0, 1, size=(5, a.dim))
        np.testing.assert_array_equal(a.evaluate_population(xs),
                                      b.evaluate_population(xs))

    def test_score_range_calibrated_positive(self):
        assert self._objective().score_range > 0

    def test_quantized_scores_on_grid(self):
        cfg = small_cfg(quantize_scores=True)
        X, y = random_task(cfg)
        obj = onn_objective(cfg, X, y, rng=RngStream(0, 2))
        q = QuantizationSpec(cfg.score_bits, -obj.score_range, obj.score_range)
        levels = q.lo + np.arange(q.levels) * q.step
        x = RngStream(4).uniform(0, 1, obj.dim)
        out = obj._scores(np.mod(x[:8], TWO_PI), np.clip(x[8:], -1, 1), obj.X)
        for v in out:
            assert np.min(np.abs(levels - v)) < 1e-9

    def test_eval_counter(self):
        obj = self._objective()
        obj.evaluate_population(RngStream(5).uniform(0, 1, size=(4, obj.dim)))
        obj(RngStream(6).uniform(0, 1, obj.dim))
        assert obj.evals == 5

    def test_wrong_dim_rejected(self):
        obj = self._objective()
        with pytest.raises(ValueError):
            obj.evaluate_population(np.zeros((2, obj.dim + 1)))
