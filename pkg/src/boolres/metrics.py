"""Consistency window, local divergence rate, kernel quality, generalization
ability and effective computational dimensionality."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from . import runs
from .encoding import BIT_PERIOD, InputWord, all_words, encode
from .errors import DomainError
from .signal import BooleanWaveform, distance_curve, values_at
from .simulator import ReservoirConfig, simulate

__all__ = [
    "DEFAULT_TAU",
    "DEFAULT_THRESHOLD",
    "DEFAULT_RANK_TOL",
    "DEFAULT_HORIZON",
    "DEFAULT_REPEATS",
    "M_MIN",
    "M_MAX",
    "ConsistencyReport",
    "StateMatrix",
    "DimensionalityResult",
    "run_words",
    "estimate_consistency",
    "numerical_rank",
    "normalized_rank",
    "kernel_words",
    "kernel_matrix",
    "generalization_matrix",
    "kernel_quality",
    "generalization_ability",
    "effective_dimensionality",
    "window_to_m",
    "write_consistency_csv",
]

DEFAULT_TAU = 100.0  # ns
DEFAULT_THRESHOLD = 0.9
DEFAULT_RANK_TOL = 1e-6
DEFAULT_HORIZON = 1000.0  # ns, one recorded microsecond
DEFAULT_REPEATS = 4  # runs averaged per state-matrix row
M_MIN, M_MAX = 12, 120


def _run_task(task):
    config, word, seed, horizon = task
    return simulate(config.with_seed(seed), encode(word, horizon), horizon)


def run_words(
    config: ReservoirConfig,
    words: Sequence[InputWord],
    seeds: Sequence[int],
    horizon: float,
    workers: int = 1,
) -> list[BooleanWaveform]:
    """One simulation per ``(word, seed)`` pair, returned in input order."""
    tasks = [(config, w, s, horizon) for w, s in zip(words, seeds)]
    return runs.pool_map(_run_task, tasks, workers)


# --- consistency ----------------------------------------------------------------


@dataclass
class ConsistencyReport:
    times: np.ndarray
    labels: list
    d_ii: np.ndarray  # (inputs, times)
    d_ij: dict  # (i, j) with i < j -> (times,)
    window_L: float
    lyapunov_slope: float
    per_input_window: list = field(default_factory=list)
    per_input_slope: list = field(default_factory=list)
    degenerate: bool = False
    converged: bool = True
    record_length: float = 0.0

    def cross_mean(self, i: int) -> np.ndarray:
        """Mean of d_ij(t) over all j != i."""
        n = len(self.labels)
        return np.mean([self.d_ij[min(i, j), max(i, j)] for j in range(n) if j != i], axis=0)

    def mean_cross(self) -> np.ndarray:
        return np.mean(list(self.d_ij.values()), axis=0)

    def separation_ratios(self) -> list[float]:
        """``d_ii(0) / mean_j d_ij(0)`` for each input."""
        out = []
        for i in range(len(self.labels)):
            ref = self.cross_mean(i)[0]
            out.append(float(self.d_ii[i, 0] / ref) if ref > 0 else math.inf)
        return out

    def rows(self):
        """``(t_ns, pair_label, distance)`` rows for CSV output."""
        for k, t in enumerate(self.times):
            for i, lab in enumerate(self.labels):
                yield float(t), f"{lab}-{lab}", float(self.d_ii[i, k])
            for (i, j), curve in self.d_ij.items():
                yield float(t), f"{self.labels[i]}-{self.labels[j]}", float(curve[k])


def write_consistency_csv(report: ConsistencyReport, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t_ns", "pair_label", "distance"])
        for t, lab, d in report.rows():
            wr.writerow([repr(t), lab, repr(d)])


def _divergence_slope(times, dii, conv_value, t_end):
    """Least-squares slope of ln d_ii over the exponential-divergence stretch."""
    positive = dii[dii > 0]
    if positive.size == 0 or conv_value <= 0:
        return math.nan
    floor = dii[0] if dii[0] > 0 else positive.min()
    lo, hi = 2.0 * floor, 0.5 * conv_value
    sel = (times <= t_end) & (dii >= lo) & (dii <= hi)
    if sel.sum() < 3:
        # a wide distance window can lift the floor past half the plateau;
        # fall back to the whole pre-convergence stretch
        sel = (times <= t_end) & (dii > 0)
    if sel.sum() < 3:
        return math.nan
    return float(np.polyfit(times[sel], np.log(dii[sel]), 1)[0])


def estimate_consistency(
    config: ReservoirConfig,
    inputs: Sequence[InputWord],
    trials: int = 50,
    tau: float = DEFAULT_TAU,
    threshold: float = DEFAULT_THRESHOLD,
    horizon: float = DEFAULT_HORIZON,
    t_step: float = BIT_PERIOD,
    seeds: Sequence[Sequence[int]] | None = None,
    workers: int = 1,
) -> ConsistencyReport:
    """Repeat each input ``trials`` times and compare the transients.

    ``d_ii(t)`` averages the distance over every pair of repeats of input
    ``i``; ``d_ij(t)`` averages over every cross pair. The window for input
    ``i`` ends at the first ``t`` with ``d_ii >= threshold * mean_j d_ij``;
    ``window_L`` is the minimum over inputs. Per-run seeds default to values
    derived from ``config.rng_seed``; pass ``seeds[i][trial]`` to override.
    """
    if trials < 2:
        raise DomainError("need at least two trials per input")
    if not 0 < threshold < 1:
        raise DomainError("threshold must lie in (0, 1)")
    if len({w.transmitted for w in inputs}) != len(inputs) or len(inputs) < 2:
        raise DomainError("need at least two pairwise-distinct inputs")
    if horizon <= tau:
        raise DomainError("horizon must exceed tau")
    if seeds is None:
        seeds = [
            [runs.derive_seed(config.rng_seed, runs.STREAM_CONSISTENCY, i, k) for k in range(trials)]
            for i in range(len(inputs))
        ]
    words = [w for w in inputs for _ in range(trials)]
    flat_seeds = [seeds[i][k] for i in range(len(inputs)) for k in range(trials)]
    waves = run_words(config, words, flat_seeds, horizon, workers)
    by_input = [waves[i * trials:(i + 1) * trials] for i in range(len(inputs))]

    times = np.arange(0.0, horizon - tau + 1e-9, t_step)
    n_in = len(inputs)
    d_ii = np.zeros((n_in, times.size))
    for i, ws in enumerate(by_input):
        acc = np.zeros(times.size)
        for a, b in combinations(ws, 2):
            acc += distance_curve(a, b, times, tau)
        d_ii[i] = acc / (trials * (trials - 1) / 2)
    d_ij = {}
    for i, j in combinations(range(n_in), 2):
        acc = np.zeros(times.size)
        for a in by_input[i]:
            for b in by_input[j]:
                acc += distance_curve(a, b, times, tau)
        d_ij[i, j] = acc / (trials * trials)

    report = ConsistencyReport(
        times=times,
        labels=[w.label for w in inputs],
        d_ii=d_ii,
        d_ij=d_ij,
        window_L=horizon,
        lyapunov_slope=math.nan,
        record_length=horizon,
    )
    if not np.any(d_ii > 0):
        report.degenerate = True
        report.converged = False
        report.per_input_window = [horizon] * n_in
        report.per_input_slope = [math.nan] * n_in
        return report

    windows, slopes = [], []
    for i in range(n_in):
        ref = report.cross_mean(i)
        hit = np.nonzero(d_ii[i] >= threshold * ref)[0]
        if hit.size:
            L_i = float(times[hit[0]])
            conv = float(ref[hit[0]])
        else:
            L_i = math.inf
            conv = float(ref.mean())
        windows.append(L_i)
        slopes.append(_divergence_slope(times, d_ii[i], conv, min(L_i, times[-1])))
    finite = [L for L in windows if math.isfinite(L)]
    report.converged = bool(finite)
    report.window_L = min(finite) if finite else horizon
    report.per_input_window = [L if math.isfinite(L) else horizon for L in windows]
    report.per_input_slope = slopes
    good = [s for s in slopes if math.isfinite(s)]
    report.lyapunov_slope = float(np.mean(good)) if good else math.nan
    return report


# --- rank measures ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateMatrix:
    """``m`` x ``m`` matrix; row ``r`` holds ``m`` output samples for input ``r``.

    With repeated runs per input the entries are per-sample means and
    ``noise_floor`` bounds the singular values that run-to-run jitter alone
    can produce; singular values at or below it are not counted in the rank.
    """

    entries: np.ndarray
    noise_floor: float = 0.0
    repeats: int = 1

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DomainError(f"state matrix must be square, got shape {e.shape}")
        if self.noise_floor < 0:
            raise DomainError("noise_floor must be >= 0")
        object.__setattr__(self, "entries", e)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_repeats(cls, samples) -> "StateMatrix":
        """Average an ``(m, repeats, m)`` stack of 0/1 sample rows.

        The floor is ``2 * sqrt(m) * sqrt(v / repeats)`` where ``v`` is the
        mean per-entry variance across repeats: the spectral-norm scale of an
        ``m`` x ``m`` matrix of independent errors with that variance.
        """
        x = np.asarray(samples, dtype=float)
        if x.ndim != 3 or x.shape[0] != x.shape[2]:
            raise DomainError(f"expected an (m, repeats, m) stack, got shape {x.shape}")
        r = x.shape[1]
        if r < 2:
            return cls(x[:, 0, :])
        v = float(x.var(axis=1, ddof=1).mean())
        floor = 2.0 * math.sqrt(x.shape[0]) * math.sqrt(v / r)
        return cls(x.mean(axis=1), noise_floor=floor, repeats=r)


def numerical_rank(matrix, rank_tol: float = DEFAULT_RANK_TOL, noise_floor: float = 0.0) -> int:
    """Number of singular values >= ``rank_tol`` times the largest one
    and above ``noise_floor``."""
    a = np.asarray(matrix, dtype=float)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    keep = s >= rank_tol * s[0]
    if noise_floor > 0:
        keep &= s > noise_floor
    # a nonzero matrix always has rank >= 1
    return max(1, int(np.count_nonzero(keep)))


def normalized_rank(sm: StateMatrix, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    return numerical_rank(sm.entries, rank_tol, sm.noise_floor) / sm.m


def _word_bits(value: int, b: int) -> tuple:
    return tuple((value >> k) & 1 for k in range(b))


def _sample_stack(config, words, stream, start, m, period, repeats, workers):
    horizon = max(start + period * (m - 1), max(w.duration for w in words))
    flat_words = [w for w in words for _ in range(repeats)]
    seeds = [
        runs.derive_seed(config.rng_seed, stream, r, k) if repeats > 1
        else runs.derive_seed(config.rng_seed, stream, r)
        for r in range(len(words)) for k in range(repeats)
    ]
    waves = run_words(config, flat_words, seeds, horizon, workers)
    times = start + period * np.arange(m)
    rows = np.array([values_at(wv, times) for wv in waves], dtype=float)
    return StateMatrix.from_repeats(rows.reshape(len(words), repeats, m))


def kernel_words(m: int) -> list[InputWord]:
    """The words ``0 .. m-1`` at width ``ceil(log2 m)``, headers included."""
    b = max(1, math.ceil(math.log2(m)))
    return [InputWord(_word_bits(r, b)) for r in range(m)]


def kernel_matrix(
    config: ReservoirConfig,
    m: int,
    sample_start: float | None = None,
    sample_period: float = BIT_PERIOD,
    repeats: int = 1,
    workers: int = 1,
) -> StateMatrix:
    """State matrix for the ``m`` words ``0 .. m-1`` (headers included).

    Each row holds ``m`` samples beginning at ``sample_start``; ``None``
    means the end of the transmitted word. ``repeats > 1`` averages that
    many independently seeded runs per row (see :meth:`StateMatrix.from_repeats`).
    """
    if m < 2:
        raise DomainError("m must be >= 2")
    if repeats < 1:
        raise DomainError("repeats must be >= 1")
    words = kernel_words(m)
    start = words[0].duration if sample_start is None else float(sample_start)
    return _sample_stack(config, words, runs.STREAM_KERNEL, start, m, sample_period, repeats, workers)


def generalization_words(
    m: int, constant_len: int, layout: str = "distinct-first", constant_bit: int = 0
) -> list[InputWord]:
    """Inputs for the generalization matrix.

    ``distinct-first`` sends the word bits, then ``constant_len`` copies of
    ``constant_bit``, then the header, so the shared segment sits right
    before sampling. ``prefix-first`` sends the constant segment first.
    """
    if constant_len < 1:
        raise DomainError("constant segment length must be >= 1")
    if layout not in ("distinct-first", "prefix-first"):
        raise DomainError(f"unknown layout {layout!r}")
    b = max(1, math.ceil(math.log2(m)))
    const = (int(constant_bit),) * constant_len
    out = []
    for r in range(m):
        bits = _word_bits(r, b)
        out.append(InputWord(bits + const if layout == "distinct-first" else const + bits))
    return out


def generalization_matrix(
    config: ReservoirConfig,
    m: int,
    constant_prefix_len: int,
    sample_start: float | None = None,
    sample_period: float = BIT_PERIOD,
    layout: str = "distinct-first",
    constant_bit: int = 0,
    repeats: int = 1,
    workers: int = 1,
) -> StateMatrix:
    if m < 2:
        raise DomainError("m must be >= 2")
    if repeats < 1:
        raise DomainError("repeats must be >= 1")
    words = generalization_words(m, constant_prefix_len, layout, constant_bit)
    start = words[0].duration if sample_start is None else float(sample_start)
    return _sample_stack(
        config, words, runs.STREAM_GENERALIZATION, start, m, sample_period, repeats, workers
    )


def kernel_quality(
    config: ReservoirConfig,
    m: int,
    sample_start: float | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    repeats: int = 1,
    workers: int = 1,
) -> float:
    """K = rank(M_K) / m."""
    sm = kernel_matrix(config, m, sample_start, repeats=repeats, workers=workers)
    return normalized_rank(sm, rank_tol)


def generalization_ability(
    config: ReservoirConfig,
    m: int,
    constant_prefix_len: int,
    sample_start: float | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    layout: str = "distinct-first",
    constant_bit: int = 0,
    repeats: int = 1,
    workers: int = 1,
) -> float:
    """Gamma = rank(M_Gamma) / m."""
    sm = generalization_matrix(
        config, m, constant_prefix_len, sample_start,
        layout=layout, constant_bit=constant_bit, repeats=repeats, workers=workers,
    )
    return normalized_rank(sm, rank_tol)


# --- effective dimensionality -----------------------------------------------------


@dataclass
class DimensionalityResult:
    K: float
    Gamma: float
    Delta: float
    L: float
    D: float
    m: int = 0
    degenerate: bool = False
    consistency: ConsistencyReport | None = field(default=None, repr=False)

    @classmethod
    def from_parts(cls, K, Gamma, L, **kw) -> "DimensionalityResult":
        delta = K - Gamma
        return cls(K=K, Gamma=Gamma, Delta=delta, L=L, D=L * delta, **kw)


def window_to_m(L: float, sample_period: float = BIT_PERIOD) -> int:
    return int(min(max(math.floor(L / sample_period + 1e-9), M_MIN), M_MAX))


def effective_dimensionality(
    config: ReservoirConfig,
    tau: float = DEFAULT_TAU,
    threshold: float = DEFAULT_THRESHOLD,
    rank_tol: float = DEFAULT_RANK_TOL,
    trials: int = 50,
    horizon: float = DEFAULT_HORIZON,
    constant_len: int | None = None,
    layout: str = "distinct-first",
    constant_bit: int = 0,
    repeats: int = DEFAULT_REPEATS,
    workers: int = 1,
) -> DimensionalityResult:
    """D = L * (K - Gamma) with L from the four 2-bit words.

    ``constant_len`` (bits) defaults to the number of bit periods in the
    window, so the distinct bits of the generalization inputs lie a full
    window before sampling begins. ``repeats`` runs per matrix row feed the
    noise-aware rank; ``repeats=1`` gives the plain 0/1 rank.
    """
    rep = estimate_consistency(
        config, all_words(2), trials=trials, tau=tau, threshold=threshold,
        horizon=horizon, workers=workers,
    )
    L = rep.window_L
    m = window_to_m(L)
    c = constant_len if constant_len is not None else max(1, math.ceil(L / BIT_PERIOD))
    K = kernel_quality(config, m, rank_tol=rank_tol, repeats=repeats, workers=workers)
    G = generalization_ability(
        config, m, c, rank_tol=rank_tol, layout=layout, constant_bit=constant_bit,
        repeats=repeats, workers=workers,
    )
    return DimensionalityResult.from_parts(K, G, L, m=m, degenerate=rep.degenerate, consistency=rep)
