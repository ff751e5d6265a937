import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from xfmr_aging import metrics
from xfmr_aging.errors import InputError
from xfmr_aging.metrics import EvalReport

finite = st.floats(-1e3, 1e3, allow_nan=False)


class TestMse:
    def test_identical(self):
        assert metrics.mse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_hand_value(self):
        assert metrics.mse([0.0, 2.0], [1.0, 1.0]) == 1.0

    def test_single(self):
        assert metrics.mse([3.0], [3.5]) == 0.25

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            metrics.mse([1.0, 2.0], [1.0])

    @given(arrays(float, 12, elements=finite), arrays(float, 12, elements=finite), st.permutations(range(12)))
    def test_permutation_invariant(self, a, p, perm):
        perm = list(perm)
        assert metrics.mse(a[perm], p[perm]) == pytest.approx(metrics.mse(a, p), rel=1e-12, abs=1e-12)


class TestRSquared:
    def test_perfect(self):
        assert metrics.r_squared([1.0, 2.0, 4.0], [1.0, 2.0, 4.0]) == 1.0

    def test_mean_prediction(self):
        assert metrics.r_squared([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == 0.0

    def test_hand_value(self):
        assert metrics.r_squared([0.0, 1.0, 2.0], [0.0, 0.0, 0.0]) == -1.5

    def test_zero_variance(self):
        with pytest.raises(InputError, match="variance"):
            metrics.r_squared([2.0, 2.0], [1.0, 3.0])

    @settings(max_examples=60)
    @given(arrays(float, 10, elements=finite), arrays(float, 10, elements=finite),
           st.floats(0.1, 10) | st.floats(-10, -0.1), st.floats(-100, 100))
    def test_affine_invariant(self, a, p, scale, shift):
        if np.ptp(a) < 1e-3:
            return
        base = metrics.r_squared(a, p)
        moved = metrics.r_squared(scale * a + shift, scale * p + shift)
        assert moved == pytest.approx(base, rel=1e-9, abs=1e-9)
        assert base <= 1.0


def report(method, mse, r2=0.5, t=0.0, split="s"):
    return EvalReport(method, mse, r2, t, {}, None, split)


class TestCompare:
    def test_two(self):
        ranked = metrics.compare([report("b", 2.0), report("a", 1.0)])
        assert [(r.method, r.rank) for r in ranked] == [("a", 1), ("b", 2)]

    def test_r2_tiebreak(self):
        ranked = metrics.compare([report("low", 1.0, 0.8), report("high", 1.0, 0.9)])
        assert ranked[0].method == "high"

    def test_time_tiebreak(self):
        ranked = metrics.compare([report("slow", 1.0, 0.9, 5.0), report("fast", 1.0, 0.9, 1.0)])
        assert ranked[0].method == "fast"

    def test_table_ordering(self):
        ranked = metrics.compare([report("mlp", 1.6027e-6, 0.15), report("anfis", 2.946e-10, 0.96),
                                  report("rbf", 1.4 * 2.946e-10, 0.89)])
        assert [(r.method, r.rank) for r in ranked] == [("anfis", 1), ("rbf", 2), ("mlp", 3)]

    def test_mismatched_splits(self):
        with pytest.raises(InputError):
            metrics.compare([report("a", 1.0, split="x"), report("b", 2.0, split="y")])

    def test_needs_two(self):
        with pytest.raises(InputError):
            metrics.compare([report("a", 1.0)])

    def test_outputs(self, tmp_path):
        ranked = metrics.compare([report("anfis", 0.5, 0.9, 1.25), report("mlp", 2.0, 0.1, 0.5)])
        metrics.write_comparison_csv(tmp_path / "c.csv", ranked)
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "method,mse,r_squared,rank,config"
        assert lines[1].startswith("anfis,0.5,0.9,1")
        table = metrics.format_table(ranked, include_time=True)
        assert table.splitlines()[0].split() == ["Method", "MSE", "R^2", "Time", "(s)", "Rank"]
        assert "1.25" in table
        assert "Time" not in metrics.format_table(ranked)
