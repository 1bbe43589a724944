import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from boolres import metrics
from boolres.encoding import all_words
from boolres.errors import DomainError
from boolres.metrics import (
    DimensionalityResult,
    StateMatrix,
    effective_dimensionality,
    estimate_consistency,
    generalization_ability,
    generalization_matrix,
    generalization_words,
    kernel_matrix,
    kernel_quality,
    normalized_rank,
    numerical_rank,
    window_to_m,
    write_consistency_csv,
)
from boolres.signal import BooleanWaveform, distance_curve, invert
from boolres.simulator import ReservoirConfig

CFG = ReservoirConfig.from_counts(8, 11)


def _hold_last_bit(config, inp, horizon):
    # zero-memory stub: the output holds the most recent input bit
    tr = inp.transitions
    if inp.final_value == 0 and tr.size:
        tr = tr[:-1]
    return BooleanWaveform(inp.initial_value, tr, horizon)


def test_identical_rows_rank_one():
    row = np.array([1, 0, 1, 1, 0, 0, 1, 0], float)
    sm = StateMatrix(np.tile(row, (8, 1)))
    assert normalized_rank(sm) == 1 / 8


def test_identity_full_rank():
    assert normalized_rank(StateMatrix(np.eye(12))) == 1.0


def test_zero_matrix_rank_zero():
    assert numerical_rank(np.zeros((5, 5))) == 0


def test_state_matrix_must_be_square():
    with pytest.raises(DomainError):
        StateMatrix(np.zeros((3, 4)))


def test_noise_floor_drops_small_directions():
    a = np.eye(6)
    a[5, 5] = 0.05
    assert numerical_rank(a) == 6
    assert numerical_rank(a, noise_floor=0.1) == 5
    # a nonzero matrix keeps rank >= 1 even under a huge floor
    assert numerical_rank(a, noise_floor=10.0) == 1


def test_from_repeats():
    x = np.stack([np.eye(4)] * 3, axis=1)
    sm = StateMatrix.from_repeats(x)
    assert sm.noise_floor == 0.0
    np.testing.assert_array_equal(sm.entries, np.eye(4))
    rng = np.random.default_rng(0)
    noisy = rng.integers(0, 2, size=(4, 5, 4)).astype(float)
    sm = StateMatrix.from_repeats(noisy)
    v = noisy.var(axis=1, ddof=1).mean()
    assert sm.noise_floor == pytest.approx(2 * 2 * math.sqrt(v / 5))
    single = StateMatrix.from_repeats(noisy[:, :1, :])
    np.testing.assert_array_equal(single.entries, noisy[:, 0, :])


@given(
    arrays(np.int8, (6, 6), elements=st.integers(0, 1)),
    st.permutations(range(6)),
    st.lists(st.floats(0.1, 10), min_size=6, max_size=6),
)
def test_rank_invariant_under_scaling_and_permutation(a, perm, scale):
    a = a.astype(float)
    b = a[list(perm)] * np.array(scale)[:, None]
    assert numerical_rank(a) == numerical_rank(b)


def test_window_to_m():
    assert window_to_m(30) == 12
    assert window_to_m(300) == 120
    assert window_to_m(5) == 12
    assert window_to_m(1000) == 120
    assert window_to_m(145) == 58


def test_generalization_words_layout():
    w = generalization_words(4, 3)
    assert [x.transmitted for x in w[:2]] == [(0, 0, 0, 0, 0, 1), (1, 0, 0, 0, 0, 1)]
    p = generalization_words(4, 3, layout="prefix-first")
    assert p[1].transmitted == (0, 0, 0, 1, 0, 1)
    with pytest.raises(DomainError):
        generalization_words(4, 0)
    with pytest.raises(DomainError):
        generalization_words(4, 2, layout="sideways")


def test_kernel_bounds_and_errors():
    K = kernel_quality(CFG, 16)
    assert 1 / 16 <= K <= 1
    with pytest.raises(DomainError):
        kernel_quality(CFG, 1)
    with pytest.raises(DomainError):
        kernel_matrix(CFG, 8, repeats=0)


def test_kernel_matrix_entries_are_bits():
    sm = kernel_matrix(CFG, 12)
    assert set(np.unique(sm.entries)) <= {0.0, 1.0}
    avg = kernel_matrix(CFG, 12, repeats=3)
    assert avg.repeats == 3 and np.all((avg.entries >= 0) & (avg.entries <= 1))


def test_generalization_perfect_fading_stub(monkeypatch):
    monkeypatch.setattr(metrics, "simulate", _hold_last_bit)
    m = 16
    assert generalization_ability(CFG, m, 8) == 1 / m
    sm = generalization_matrix(CFG, m, 8, repeats=2)
    assert sm.noise_floor == 0.0


def test_generalization_deterministic_without_jitter():
    cfg = ReservoirConfig.from_counts(9, 14, jitter_sigma=0.0)
    a = generalization_ability(cfg, 4, 8)
    b = generalization_ability(cfg, 4, 8)
    assert a == b
    assert 1 / 4 <= a <= 1


def test_consistency_degenerate_without_jitter():
    cfg = ReservoirConfig.from_counts(8, 11, jitter_sigma=0.0)
    rep = estimate_consistency(cfg, all_words(2), trials=3, horizon=300)
    assert rep.degenerate
    assert rep.window_L == 300
    assert not rep.d_ii.any()


def test_consistency_preconditions():
    with pytest.raises(DomainError):
        estimate_consistency(CFG, all_words(2), trials=1)
    with pytest.raises(DomainError):
        estimate_consistency(CFG, all_words(2), threshold=1.0)
    with pytest.raises(DomainError):
        estimate_consistency(CFG, all_words(1)[:1] * 2)


def test_complementary_transients_distance_one():
    a = BooleanWaveform(0, [3.0, 8.0, 40.0], 200)
    assert distance_curve(a, invert(a), [0.0], 100)[0] == 1.0


def test_consistency_report_properties(tmp_path):
    rep = estimate_consistency(CFG, all_words(2), trials=12, horizon=500)
    assert not rep.degenerate
    assert 0 < rep.window_L <= 500
    for arr in [rep.d_ii, *rep.d_ij.values()]:
        assert np.all((arr >= 0) & (arr <= 1))
    # repeats of one word start closer together than different words
    for i in range(4):
        assert rep.d_ii[i, 0] < rep.cross_mean(i)[0]
    assert rep.lyapunov_slope > 0
    path = tmp_path / "c.csv"
    write_consistency_csv(rep, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t_ns", "pair_label", "distance"]
    assert len(rows) == 1 + rep.times.size * 10
    assert {r[1] for r in rows[1:]} >= {"00-00", "00-10", "01-11"}


def test_dimensionality_arithmetic():
    r = DimensionalityResult.from_parts(1.0, 1 / 40, 100.0, m=40)
    assert r.Delta == 1 - 1 / 40
    assert r.D == 100.0 * r.Delta
    assert DimensionalityResult.from_parts(0.3, 0.3, 80.0).D == 0.0


def test_effective_dimensionality_consistent():
    r = effective_dimensionality(CFG, trials=6, horizon=500, repeats=2)
    assert r.D == r.L * (r.K - r.Gamma)
    assert r.Delta == r.K - r.Gamma
    assert 12 <= r.m <= 120
    assert 1 / r.m <= r.K <= 1 and 1 / r.m <= r.Gamma <= 1
