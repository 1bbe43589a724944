"""Word classification from sampled reservoir transients.

Each word ``i`` and start index ``j`` gets its own linear readout
``C_i(t_j) = sum_k w_k^{ij} x(t_{j+k})`` over a window of ``W`` samples,
fitted by ridge regression to targets +1 (word ``i``) and -1 (any other
word). A run is assigned to the word whose readout scores highest.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import runs
from .encoding import BIT_PERIOD, InputWord, all_words, encode
from .errors import DomainError
from .signal import SampleTrain, values_at
from .simulator import ReservoirConfig, simulate

__all__ = [
    "BIT_PERIOD",
    "InputWord",
    "encode",
    "all_words",
    "DEFAULT_S",
    "DEFAULT_W",
    "DEFAULT_RIDGE",
    "DEFAULT_TRIALS",
    "ClassifierSet",
    "ErrorCurve",
    "collect_samples",
    "fit_classifiers",
    "train",
    "scores",
    "classify",
    "classify_batch",
    "error_rates",
    "error_curve",
    "write_error_csv",
]

DEFAULT_S = 200
DEFAULT_W = 50
DEFAULT_RIDGE = 1e-6
DEFAULT_TRIALS = 100


@dataclass(frozen=True, eq=False)
class ClassifierSet:
    """Readout weights, ``weights[i, j]`` being the length-``W`` vector for word ``i``
    at start index ``j``."""

    n: int
    W: int
    weights: np.ndarray
    sample_period: float = BIT_PERIOD
    sample_start: float = 0.0
    min_norm_fallback: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 3:
            raise DomainError("weights must have shape (words, starts, W)")
        if w.shape[0] != 2**self.n or w.shape[2] != self.W:
            raise DomainError(f"weights shape {w.shape} does not match n={self.n}, W={self.W}")
        object.__setattr__(self, "weights", w)

    @property
    def n_words(self) -> int:
        return self.weights.shape[0]

    @property
    def n_starts(self) -> int:
        return self.weights.shape[1]

    @property
    def S(self) -> int:
        return self.n_starts + self.W

    @property
    def start_times(self) -> np.ndarray:
        return self.sample_start + self.sample_period * np.arange(self.n_starts)

    def __eq__(self, other):
        if not isinstance(other, ClassifierSet):
            return NotImplemented
        return (
            (self.n, self.W, self.sample_period, self.sample_start, self.min_norm_fallback)
            == (other.n, other.W, other.sample_period, other.sample_start, other.min_norm_fallback)
            and np.array_equal(self.weights, other.weights)
        )

    # text format:
    #   n=<bits> / W=<samples> / starts=<count> / sample_period=<ns>
    #   sample_start=<ns> / fallback=<0|1>
    #   then one line per (i, j): "i j w_0 w_1 ... w_{W-1}"
    def dumps(self) -> str:
        lines = [
            "# boolres classifier set",
            f"n={self.n}",
            f"W={self.W}",
            f"starts={self.n_starts}",
            f"sample_period={self.sample_period!r}",
            f"sample_start={self.sample_start!r}",
            f"fallback={int(self.min_norm_fallback)}",
        ]
        for i in range(self.n_words):
            for j in range(self.n_starts):
                vals = " ".join(repr(float(v)) for v in self.weights[i, j])
                lines.append(f"{i} {j} {vals}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ClassifierSet":
        head: dict[str, str] = {}
        body = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, _, val = line.partition("=")
                head[key.strip()] = val.strip()
            else:
                body.append((lineno, line.split()))
        try:
            n, W, starts = int(head["n"]), int(head["W"]), int(head["starts"])
            period = float(head["sample_period"])
            start = float(head["sample_start"])
            fallback = bool(int(head.get("fallback", "0")))
        except KeyError as exc:
            raise DomainError(f"classifier file missing header {exc}") from None
        weights = np.full((2**n, starts, W), np.nan)
        for lineno, parts in body:
            if len(parts) != W + 2:
                raise DomainError(f"line {lineno}: expected {W + 2} fields, got {len(parts)}")
            weights[int(parts[0]), int(parts[1])] = [float(v) for v in parts[2:]]
        if np.isnan(weights).any():
            raise DomainError("classifier file is missing weight vectors")
        return cls(n, W, weights, period, start, fallback)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ClassifierSet":
        return cls.loads(Path(path).read_text())


def _sample_task(task):
    config, word, seed, times = task
    horizon = max(float(times[-1]), word.duration)
    wave = simulate(config.with_seed(seed), encode(word, horizon), horizon)
    return values_at(wave, times)


def collect_samples(
    config: ReservoirConfig,
    words: Sequence[InputWord],
    seeds: Sequence[int],
    S: int = DEFAULT_S,
    sample_start: float = 0.0,
    sample_period: float = BIT_PERIOD,
    workers: int = 1,
) -> np.ndarray:
    """``(runs, S)`` int8 array of output samples, one run per ``(word, seed)``."""
    if S < 1:
        raise DomainError("S must be >= 1")
    times = sample_start + sample_period * np.arange(S)
    tasks = [(config, w, s, times) for w, s in zip(words, seeds)]
    return np.array(runs.pool_map(_sample_task, tasks, workers), dtype=np.int8).reshape(-1, S)


def _targets(labels: np.ndarray, n_words: int) -> np.ndarray:
    y = -np.ones((labels.size, n_words))
    y[np.arange(labels.size), labels] = 1.0
    return y


def fit_classifiers(
    samples,
    labels,
    n: int,
    W: int = DEFAULT_W,
    ridge: float = DEFAULT_RIDGE,
    sample_period: float = BIT_PERIOD,
    sample_start: float = 0.0,
) -> ClassifierSet:
    """Ridge readouts for every (word, start index) from labelled sample rows.

    Solves ``(X^T X + ridge I) w = X^T y`` per start index. With ``ridge = 0``
    a singular ``X^T X`` falls back to the minimum-norm least-squares
    solution and the returned set is flagged.
    """
    X = np.asarray(samples, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if X.ndim != 2 or X.shape[0] != labels.size:
        raise DomainError("samples must be (runs, S) with one label per run")
    if ridge < 0:
        raise DomainError("ridge must be >= 0")
    S = X.shape[1]
    if not 1 <= W < S:
        raise DomainError(f"need 1 <= W < S, got W={W}, S={S}")
    n_words = 2**n
    if labels.min() < 0 or labels.max() >= n_words:
        raise DomainError("labels out of range for n-bit words")
    Y = _targets(labels, n_words)
    starts = S - W
    weights = np.empty((n_words, starts, W))
    eye = np.eye(W)
    fallback = False
    for j in range(starts):
        Xj = X[:, j:j + W]
        G = Xj.T @ Xj
        rhs = Xj.T @ Y
        if ridge > 0:
            sol = np.linalg.solve(G + ridge * eye, rhs)
        elif np.linalg.matrix_rank(G) < W:
            fallback = True
            sol = np.linalg.lstsq(Xj, Y, rcond=None)[0]
        else:
            sol = np.linalg.solve(G, rhs)
        weights[:, j, :] = sol.T
    return ClassifierSet(n, W, weights, sample_period, sample_start, fallback)


def _word_schedule(n: int, trials: int, words=None):
    words = all_words(n) if words is None else list(words)
    flat = [w for w in words for _ in range(trials)]
    labels = np.repeat(np.arange(len(words)), trials)
    return words, flat, labels


def train(
    config: ReservoirConfig,
    n: int,
    trials_per_word: int = DEFAULT_TRIALS,
    S: int = DEFAULT_S,
    W: int = DEFAULT_W,
    ridge: float = DEFAULT_RIDGE,
    sample_start: float = 0.0,
    sample_period: float = BIT_PERIOD,
    workers: int = 1,
) -> ClassifierSet:
    """Simulate ``trials_per_word`` runs of every ``n``-bit word and fit the readouts."""
    if trials_per_word < 1:
        raise DomainError("trials_per_word must be >= 1")
    if W >= S:
        raise DomainError("W must be smaller than S")
    words, flat, labels = _word_schedule(n, trials_per_word)
    seeds = [
        runs.derive_seed(config.rng_seed, runs.STREAM_TRAIN, n, i, k)
        for i in range(len(words)) for k in range(trials_per_word)
    ]
    X = collect_samples(config, flat, seeds, S, sample_start, sample_period, workers)
    return fit_classifiers(X, labels, n, W, ridge, sample_period, sample_start)


def scores(classifiers: ClassifierSet, window) -> np.ndarray:
    """Scores of every word's readout at every start index for one run.

    ``window`` is the run's full ``(S,)`` sample vector; the result has
    shape ``(words, starts)``.
    """
    x = np.asarray(window, dtype=float)
    W = classifiers.W
    frames = np.lib.stride_tricks.sliding_window_view(x, W)[: classifiers.n_starts]
    return np.einsum("ijk,jk->ij", classifiers.weights[:, : frames.shape[0]], frames)


def classify(classifiers: ClassifierSet, run_samples: SampleTrain, start_index: int) -> int:
    """Word index with the highest score at ``start_index``; ties go to the lowest index."""
    vals = np.asarray(run_samples.values, dtype=float)
    W = classifiers.W
    if not 0 <= start_index < classifiers.n_starts:
        raise DomainError(f"start_index {start_index} outside [0, {classifiers.n_starts})")
    if start_index + W > vals.size:
        raise DomainError("window runs past the end of the sample train")
    s = classifiers.weights[:, start_index, :] @ vals[start_index:start_index + W]
    return int(np.argmax(s))


def classify_batch(classifiers: ClassifierSet, samples) -> np.ndarray:
    """``(runs, starts)`` predicted word indices for a batch of sample rows."""
    X = np.asarray(samples, dtype=float)
    W = classifiers.W
    frames = np.lib.stride_tricks.sliding_window_view(X, W, axis=1)[:, : classifiers.n_starts]
    s = np.einsum("ijk,rjk->rij", classifiers.weights, frames)
    return np.argmax(s, axis=1)


def error_rates(classifiers: ClassifierSet, samples, labels) -> np.ndarray:
    """Fraction of misclassified rows at every start index."""
    pred = classify_batch(classifiers, samples)
    return np.mean(pred != np.asarray(labels)[:, None], axis=0)


@dataclass
class ErrorCurve:
    start_times: np.ndarray
    error_rates: np.ndarray
    A_end: float
    C_start: float
    n: int = 2
    window_span: float = DEFAULT_W * BIT_PERIOD
    extra: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_rates(cls, start_times, rates, L: float, W: int, sample_period: float, n: int):
        span = W * sample_period
        return cls(np.asarray(start_times, float), np.asarray(rates, float), L - span, L, n, span)

    @property
    def chance(self) -> float:
        return 1.0 - 2.0 ** (-self.n)

    def regions(self) -> list[str]:
        """``A`` when the whole classification window lies inside the
        consistency window, ``C`` when it starts after it, ``B`` otherwise."""
        out = []
        for t in self.start_times:
            if t <= self.A_end + 1e-9:
                out.append("A")
            elif t >= self.C_start - 1e-9:
                out.append("C")
            else:
                out.append("B")
        return out

    def region_mask(self, name: str) -> np.ndarray:
        return np.array([r == name for r in self.regions()], dtype=bool)

    def region_mean(self, name: str) -> float:
        mask = self.region_mask(name)
        return float(self.error_rates[mask].mean()) if mask.any() else float("nan")

    def rows(self):
        for t, e, r in zip(self.start_times, self.error_rates, self.regions()):
            yield float(t), float(e), r


def write_error_csv(curve: ErrorCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t_ns", "error_rate", "region"])
        for t, e, r in curve.rows():
            wr.writerow([repr(t), repr(e), r])


def error_curve(
    config: ReservoirConfig,
    classifiers: ClassifierSet,
    n: int,
    test_trials: int = DEFAULT_TRIALS,
    L: float = 0.0,
    workers: int = 1,
) -> ErrorCurve:
    """Error rate against classifier start time on fresh test runs.

    Test seeds come from their own stream, so they never coincide with the
    training seeds for the same master seed.
    """
    if classifiers.n != n:
        raise DomainError(f"classifiers were trained for n={classifiers.n}, not {n}")
    if test_trials < 1:
        raise DomainError("test_trials must be >= 1")
    words, flat, labels = _word_schedule(n, test_trials)
    seeds = [
        runs.derive_seed(config.rng_seed, runs.STREAM_TEST, n, i, k)
        for i in range(len(words)) for k in range(test_trials)
    ]
    X = collect_samples(
        config, flat, seeds, classifiers.S, classifiers.sample_start,
        classifiers.sample_period, workers,
    )
    rates = error_rates(classifiers, X, labels)
    return ErrorCurve.from_rates(
        classifiers.start_times, rates, L, classifiers.W, classifiers.sample_period, n
    )
