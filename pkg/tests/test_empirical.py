import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wassdetect.empirical import (
    EmpiricalDistribution,
    SlidingWindow,
    from_samples,
    mean,
    read_samples_csv,
    write_samples_csv,
)


def test_masses():
    assert from_samples([[1.0, 2.0]]).mass_at([1.0, 2.0]) == 1.0
    d = from_samples([[0.0], [1.0], [2.0]])
    assert all(d.mass_at([x]) == pytest.approx(1 / 3) for x in (0.0, 1.0, 2.0))
    d = from_samples([[4.0], [4.0], [1.0]])
    assert d.mass_at([4.0]) == pytest.approx(2 / 3)


def test_means():
    assert np.all(mean(from_samples(np.zeros((3, 2)))) == 0)
    assert np.all(mean(from_samples([[1.0, -2.0], [-1.0, 2.0]])) == 0)


def test_samples_are_read_only():
    d = from_samples([[1.0]])
    with pytest.raises(ValueError):
        d.samples[0, 0] = 2.0


def test_window_eviction():
    w = SlidingWindow(3, 1)
    for x in range(4):
        w.push([float(x)])
    assert w.full and 0.0 not in w.samples()[:, 0]
    one = SlidingWindow(1, 1)
    for x in (1.0, 2.0, 3.0):
        one.push([x])
        assert one.samples()[0, 0] == x
    assert SlidingWindow(5, 2).push([0, 0]).full is False


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.lists(st.floats(-10, 10), min_size=1, max_size=40))
def test_window_holds_last_T(T, xs):
    w = SlidingWindow(T, 1)
    for x in xs:
        w.push([x])
    np.testing.assert_array_equal(w.distribution().samples[:, 0], xs[-T:])
    assert len(w) == min(T, len(xs))


def test_csv_round_trip_is_lossless(tmp_path):
    X = np.random.default_rng(0).standard_normal((20, 3))
    write_samples_csv(tmp_path / "s.csv", X)
    assert np.array_equal(read_samples_csv(tmp_path / "s.csv"), X)


def test_csv_errors_carry_line_numbers(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("s_1,s_2\n1,2\n3,oops\n")
    with pytest.raises(ValueError, match=r"bad\.csv:3:"):
        read_samples_csv(p)


def test_empty_rejected():
    with pytest.raises(ValueError):
        EmpiricalDistribution(np.zeros((0, 1)))
