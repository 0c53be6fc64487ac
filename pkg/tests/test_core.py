"""Unit tests for shared primitives: quantization, argbest, RNG streams,
run-record CSV serialization."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mfopt.core import (QuantizationSpec, RngStream, RunRecord,
                        RUN_RECORD_FIELDS, argbest, as_param_vector, quantize,
                        quantize_array, records_from_csv, records_to_csv)


# ---------------------------------------------------------------- quantize
class TestQuantize:
    def test_zero_at_8_bits_snaps_to_nearest_level(self):
        # enumerate the 256 levels: 0 sits exactly between levels 127 and 128,
        # and midpoints round toward the higher level: -1 + 128*(2/255)
        spec = QuantizationSpec(bits=8, lo=-1.0, hi=1.0)
        levels = -1.0 + np.arange(256) * spec.step
        dist = np.abs(levels)
        candidates = np.flatnonzero(dist == dist.min())
        expected = levels[candidates.max()]
        assert quantize(0.0, spec) == pytest.approx(expected, abs=0)
        assert quantize(0.0, spec) == pytest.approx(-1.0 + 128 * (2.0 / 255.0))
        assert abs(quantize(0.0, spec) - 0.00392) < 1e-5

    def test_hi_endpoint_is_a_grid_level(self):
        assert quantize(1.0, QuantizationSpec(bits=4)) == 1.0

    def test_2_bit_levels(self):
        # levels are {-1, -1/3, 1/3, 1}; 0.5 is nearer 1/3 than 1
        spec = QuantizationSpec(bits=2, lo=-1.0, hi=1.0)
        assert quantize(0.5, spec) == pytest.approx(1.0 / 3.0)

    def test_midpoint_rounds_up(self):
        # midpoint between 1/3 and 1 is 2/3
        spec = QuantizationSpec(bits=2, lo=-1.0, hi=1.0)
        mid = (1.0 / 3.0 + 1.0) / 2.0
        assert quantize(mid, spec) == pytest.approx(1.0)

    def test_clamps_outside_range(self):
        spec = QuantizationSpec(bits=3, lo=-1.0, hi=1.0)
        assert quantize(17.0, spec) == 1.0
        assert quantize(-17.0, spec) == -1.0

    def test_non_finite_rejected(self):
        spec = QuantizationSpec(bits=4)
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                quantize(bad, spec)

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError):
            QuantizationSpec(bits=0)
        with pytest.raises(ValueError):
            QuantizationSpec(bits=4, lo=1.0, hi=-1.0)

    def test_grid_has_2_pow_bits_levels(self):
        spec = QuantizationSpec(bits=3, lo=0.0, hi=7.0)
        xs = np.linspace(-1.0, 8.0, 4001)
        out = np.unique(quantize_array(xs, spec))
        assert out.size == 8
        np.testing.assert_allclose(out, np.arange(8.0))

    @given(st.floats(min_value=-10, max_value=10),
           st.integers(min_value=1, max_value=10),
           st.floats(min_value=-5, max_value=4.9),
           st.floats(min_value=0.1, max_value=10))
    def test_idempotent_and_bounded(self, x, bits, lo, width):
        spec = QuantizationSpec(bits=bits, lo=lo, hi=lo + width)
        q = quantize(x, spec)
        assert quantize(q, spec) == q
        assert spec.lo <= q <= spec.hi
        clamped = min(max(x, spec.lo), spec.hi)
        assert abs(q - clamped) <= (spec.hi - spec.lo) / (2 * (2 ** bits - 1)) + 1e-12


# ----------------------------------------------------------------- argbest
class TestArgbest:
    def test_unique_minimum(self):
        assert argbest([3.0, 1.0, 2.0]) == 1

    def test_tie_breaks_to_lowest_index(self):
        assert argbest([1.0, 1.0]) == 0

    def test_matches_linear_scan_on_random_input(self):
        scores = RngStream(7).normal(size=100)
        best = 0
        for i, s in enumerate(scores):
            if s < scores[best]:
                best = i
        assert argbest(scores) == best

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            argbest([])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            argbest([1.0, math.nan])


# ------------------------------------------------------------ param vector
class TestParamVector:
    def test_round_trip(self):
        v = as_param_vector([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(v, [1.0, 2.0, 3.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            as_param_vector([1.0, math.inf])

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError):
            as_param_vector([1.0, 2.0], dim=3)


# -------------------------------------------------------------- rng stream
class TestRngStream:
    def test_same_key_reproduces_draws(self):
        a = RngStream(42, 3).normal(size=1000)
        b = RngStream(42, 3).normal(size=1000)
        np.testing.assert_array_equal(a, b)

    def test_different_streams_differ(self):
        a = RngStream(42, 0).normal(size=100)
        b = RngStream(42, 1).normal(size=100)
        assert not np.array_equal(a, b)

    def test_different_seeds_differ(self):
        a = RngStream(1, 0).normal(size=100)
        b = RngStream(2, 0).normal(size=100)
        assert not np.array_equal(a, b)

    def test_child_matches_fresh_stream(self):
        np.testing.assert_array_equal(RngStream(9, 0).child(5).uniform(size=50),
                                      RngStream(9, 5).uniform(size=50))


# -------------------------------------------------------------- run record
class TestRunRecordCsv:
    def _records(self):
        return [RunRecord(0, 10, 0.5, 0.25, 3.5, None),
                RunRecord(1, 20, 1.0, 0.5, 1.25, 0.875)]

    def test_header_row_mandatory(self):
        buf = io.StringIO()
        records_to_csv(self._records(), buf)
        first = buf.getvalue().splitlines()[0]
        assert first == "epoch,evals,eval_time_s,update_time_s,best_score,test_accuracy"

    def test_round_trip(self):
        buf = io.StringIO()
        recs = self._records()
        records_to_csv(recs, buf)
        buf.seek(0)
        back = records_from_csv(buf)
        assert back == recs

    def test_absent_accuracy_serializes_empty(self):
        buf = io.StringIO()
        records_to_csv(self._records()[:1], buf)
        assert buf.getvalue().splitlines()[1].endswith(",")

    def test_wrong_header_rejected(self):
        with pytest.raises(ValueError):
            records_from_csv(io.StringIO("a,b,c\n1,2,3\n"))

    def test_float_round_trip_is_exact(self):
        rec = RunRecord(0, 2, 1 / 3, 2 / 7, math.pi, 1 / 9)
        buf = io.StringIO()
        records_to_csv([rec], buf)
        buf.seek(0)
        assert records_from_csv(buf)[0] == rec

    def test_fields_constant(self):
        assert RUN_RECORD_FIELDS == ("epoch", "evals", "eval_time_s",
                                     "update_time_s", "best_score",
                                     "test_accuracy")
