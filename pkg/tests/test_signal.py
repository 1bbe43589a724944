import numpy as np
import pytest
from hypothesis import given, strategies as st

from boolres.errors import DomainError
from boolres.signal import (
    BooleanWaveform,
    SampleTrain,
    boolean_distance,
    constant,
    distance_curve,
    dumps,
    from_intervals,
    invert,
    loads,
    on_time,
    read_waveform,
    sample,
    value_at,
    values_at,
    write_waveform,
    xor_waveforms,
)


def grid_distance(a, b, t, tau, step=0.01):
    # midpoint rule on a fine grid, independent of the transition algebra
    pts = t + step * (np.arange(int(round(tau / step))) + 0.5)
    return float(np.mean(values_at(a, pts) != values_at(b, pts)))


@st.composite
def waveforms(draw, horizon=50.0):
    times = draw(st.lists(st.floats(0, horizon, allow_nan=False), max_size=15, unique=True))
    return BooleanWaveform(draw(st.integers(0, 1)), sorted(times), horizon)


def test_value_at_examples():
    assert value_at(constant(0, 10), 5) == 0
    w = BooleanWaveform(0, [1.0, 3.0], 10)
    assert value_at(w, 2.0) == 1
    assert value_at(BooleanWaveform(1, [1.0, 3.0], 10), 4.0) == 1
    # a transition takes effect at its own timestamp
    assert value_at(w, 1.0) == 1


def test_value_at_outside_horizon():
    with pytest.raises(DomainError):
        value_at(constant(0, 10), 11)


def test_construction_validation():
    with pytest.raises(DomainError):
        BooleanWaveform(0, [2.0, 1.0], 10)
    with pytest.raises(DomainError):
        BooleanWaveform(0, [1.0, 1.0], 10)
    with pytest.raises(DomainError):
        BooleanWaveform(2, [], 10)
    with pytest.raises(DomainError):
        BooleanWaveform(0, [11.0], 10)
    with pytest.raises(DomainError):
        BooleanWaveform(0, [-1.0], 10)


def test_transitions_are_read_only():
    w = BooleanWaveform(0, [1.0], 5)
    with pytest.raises(ValueError):
        w.transitions[0] = 2.0


def test_xor_examples():
    b = BooleanWaveform(0, [1.0, 2.0], 5)
    assert xor_waveforms(b, b) == constant(0, 5)
    assert xor_waveforms(constant(0, 5), b) == b
    assert xor_waveforms(constant(1, 5), b) == invert(b)


def test_xor_horizon_mismatch():
    with pytest.raises(DomainError):
        xor_waveforms(constant(0, 5), constant(0, 6))


def test_distance_analytic_case():
    # 10 ns of disagreement inside a 100 ns window
    a = BooleanWaveform(0, [10.0], 200)
    b = BooleanWaveform(0, [20.0], 200)
    assert boolean_distance(a, b, 0, 100) == pytest.approx(0.1, abs=1e-12)
    assert grid_distance(a, b, 0, 100) == pytest.approx(0.1, abs=1e-9)


def test_distance_extremes():
    x = BooleanWaveform(1, [3.0, 7.5, 9.0], 20)
    assert boolean_distance(x, x, 0, 10) == 0.0
    assert boolean_distance(x, invert(x), 2, 10) == 1.0


def test_distance_window_checks():
    x = constant(0, 20)
    with pytest.raises(DomainError):
        boolean_distance(x, x, 15, 10)
    with pytest.raises(DomainError):
        boolean_distance(x, x, 0, 0)


def test_distance_matches_grid_integration(rng):
    for _ in range(20):
        ta = np.sort(rng.choice(np.arange(1, 1000), size=12, replace=False)) * 0.1
        tb = np.sort(rng.choice(np.arange(1, 1000), size=9, replace=False)) * 0.1
        a = BooleanWaveform(int(rng.integers(2)), ta, 100)
        b = BooleanWaveform(int(rng.integers(2)), tb, 100)
        t0 = float(rng.integers(0, 30))
        assert boolean_distance(a, b, t0, 50) == pytest.approx(grid_distance(a, b, t0, 50), abs=1e-9)


def test_distance_curve_matches_pointwise(rng):
    a = BooleanWaveform(0, np.sort(rng.uniform(0, 300, 40)), 300)
    b = BooleanWaveform(1, np.sort(rng.uniform(0, 300, 25)), 300)
    starts = np.arange(0, 200, 2.5)
    curve = distance_curve(a, b, starts, 100)
    ref = [boolean_distance(a, b, t, 100) for t in starts]
    np.testing.assert_allclose(curve, ref, atol=1e-12)


def test_on_time():
    w = from_intervals([(1, 3), (5, 6)], 10)
    assert on_time(w, 0, 10) == pytest.approx(3.0)
    assert on_time(w, 2, 5.5) == pytest.approx(1.5)


def test_sample_example():
    st_ = sample(BooleanWaveform(0, [2.6], 10), 0, 2.5, 3)
    assert list(st_.values) == [0, 0, 1]
    np.testing.assert_allclose(st_.times, [0, 2.5, 5.0])
    assert list(sample(constant(0, 50), 0, 2.5, 20).values) == [0] * 20


def test_sample_validation():
    with pytest.raises(DomainError):
        sample(constant(0, 5), 0, 2.5, 0)
    with pytest.raises(DomainError):
        sample(constant(0, 5), 0, 0, 3)
    with pytest.raises(DomainError):
        SampleTrain(0, 1, [0, 2])


def test_dump_roundtrip_example(tmp_path):
    w = BooleanWaveform(1, [0.1, 0.30000000000000004, 7.25], 12.5)
    assert loads(dumps(w)) == w
    write_waveform(w, tmp_path / "w.txt")
    assert read_waveform(tmp_path / "w.txt") == w
    assert dumps(w).splitlines()[0] == "initial=1"


def test_loads_rejects_garbage():
    with pytest.raises(DomainError):
        loads("initial=0\n")
    with pytest.raises(DomainError):
        loads("initial=0\nhorizon=5\nbogus=1\n")


@given(waveforms())
def test_dump_roundtrip_property(w):
    assert loads(dumps(w)) == w


@given(waveforms(), waveforms())
def test_distance_symmetric_and_bounded(a, b):
    d = boolean_distance(a, b, 0, 40)
    assert d == boolean_distance(b, a, 0, 40)
    assert 0.0 <= d <= 1.0
    assert boolean_distance(a, a, 5, 40) == 0.0


@given(waveforms(), waveforms(), waveforms())
def test_triangle_inequality(a, b, c):
    dab = boolean_distance(a, b, 0, 50)
    dbc = boolean_distance(b, c, 0, 50)
    dac = boolean_distance(a, c, 0, 50)
    assert dac <= dab + dbc + 1e-12


@given(waveforms(), waveforms())
def test_xor_is_pointwise(a, b):
    x = xor_waveforms(a, b)
    pts = np.linspace(0, 50, 97)
    np.testing.assert_array_equal(values_at(x, pts), values_at(a, pts) ^ values_at(b, pts))


@given(waveforms())
def test_xor_self_inverse(a):
    assert xor_waveforms(a, a) == constant(0, a.horizon)
