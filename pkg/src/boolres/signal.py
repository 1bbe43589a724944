"""Boolean waveforms: construction, sampling, XOR algebra and distance.

A waveform is stored as an initial bit plus a strictly increasing array of
transition timestamps (ns). The value at ``t`` is the initial bit flipped
once for every transition at or before ``t``, so integrals and XORs can be
computed exactly from the transition lists without a time grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "BooleanWaveform",
    "SampleTrain",
    "constant",
    "value_at",
    "values_at",
    "xor_waveforms",
    "invert",
    "on_time",
    "boolean_distance",
    "distance_curve",
    "sample",
    "dumps",
    "loads",
    "write_waveform",
    "read_waveform",
    "from_intervals",
]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class BooleanWaveform:
    """Piecewise-constant binary signal on ``[0, horizon]``."""

    initial_value: int
    transitions: np.ndarray
    horizon: float

    def __post_init__(self):
        if self.initial_value not in (0, 1):
            raise DomainError(f"initial_value must be 0 or 1, got {self.initial_value!r}")
        tr = _frozen(self.transitions)
        object.__setattr__(self, "transitions", tr)
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "initial_value", int(self.initial_value))
        if not np.isfinite(self.horizon) or self.horizon < 0:
            raise DomainError(f"horizon must be finite and >= 0, got {self.horizon}")
        if tr.size:
            if tr[0] < 0:
                raise DomainError("transition timestamps must be >= 0")
            if tr[-1] > self.horizon:
                raise DomainError("transition beyond horizon")
            if np.any(np.diff(tr) <= 0):
                raise DomainError("transitions must be strictly increasing")

    @property
    def final_value(self) -> int:
        return self.initial_value ^ (self.transitions.size & 1)

    def __len__(self):
        return int(self.transitions.size)

    def __eq__(self, other):
        if not isinstance(other, BooleanWaveform):
            return NotImplemented
        return (
            self.initial_value == other.initial_value
            and self.horizon == other.horizon
            and np.array_equal(self.transitions, other.transitions)
        )

    def __hash__(self):
        return hash((self.initial_value, self.horizon, self.transitions.tobytes()))

    def truncate(self, horizon: float) -> "BooleanWaveform":
        """Restrict to ``[0, horizon]`` (``horizon`` must not exceed the current one)."""
        if horizon > self.horizon:
            raise DomainError("cannot extend a waveform by truncation")
        keep = self.transitions[self.transitions <= horizon]
        return BooleanWaveform(self.initial_value, keep, horizon)

    def shifted(self, dt: float, horizon: float | None = None) -> "BooleanWaveform":
        """Delay every transition by ``dt`` (value before the shift is the initial value)."""
        h = self.horizon + dt if horizon is None else horizon
        tr = self.transitions + dt
        return BooleanWaveform(self.initial_value, tr[tr <= h], h)


@dataclass(frozen=True, eq=False)
class SampleTrain:
    """Regularly spaced samples ``values[j]`` taken at ``start + j * period``."""

    start: float
    period: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.int8).reshape(-1)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if not self.period > 0:
            raise DomainError("period must be > 0")
        if vals.size == 0:
            raise DomainError("a sample train needs at least one value")
        if np.any((vals != 0) & (vals != 1)):
            raise DomainError("sample values must be bits")

    @property
    def times(self) -> np.ndarray:
        return self.start + self.period * np.arange(self.values.size)

    def __len__(self):
        return int(self.values.size)

    def __eq__(self, other):
        if not isinstance(other, SampleTrain):
            return NotImplemented
        return (
            self.start == other.start
            and self.period == other.period
            and np.array_equal(self.values, other.values)
        )


def constant(value: int, horizon: float) -> BooleanWaveform:
    return BooleanWaveform(value, np.empty(0), horizon)


def value_at(w: BooleanWaveform, t: float) -> int:
    if not 0 <= t <= w.horizon:
        raise DomainError(f"t={t} outside [0, {w.horizon}]")
    n = int(np.searchsorted(w.transitions, t, side="right"))
    return w.initial_value ^ (n & 1)


def values_at(w: BooleanWaveform, times) -> np.ndarray:
    """Vectorised :func:`value_at`."""
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < 0 or times.max() > w.horizon):
        raise DomainError("sampling outside [0, horizon]")
    n = np.searchsorted(w.transitions, times, side="right")
    return (w.initial_value ^ (n & 1)).astype(np.int8)


def _merge_toggles(*arrays: np.ndarray) -> np.ndarray:
    """Union of toggle times with coincident toggles cancelled mod 2."""
    allt = np.concatenate(arrays)
    if allt.size == 0:
        return allt
    uniq, counts = np.unique(allt, return_counts=True)
    return uniq[(counts & 1) == 1]


def xor_waveforms(a: BooleanWaveform, b: BooleanWaveform) -> BooleanWaveform:
    if a.horizon != b.horizon:
        raise DomainError(f"horizon mismatch: {a.horizon} vs {b.horizon}")
    return BooleanWaveform(
        a.initial_value ^ b.initial_value,
        _merge_toggles(a.transitions, b.transitions),
        a.horizon,
    )


def invert(w: BooleanWaveform) -> BooleanWaveform:
    return BooleanWaveform(1 - w.initial_value, w.transitions, w.horizon)


def _cumulative_on(initial: int, transitions: np.ndarray, points: np.ndarray) -> np.ndarray:
    # knots[k] starts segment k, whose value is initial ^ (k & 1)
    knots = np.concatenate(([0.0], transitions))
    seg_vals = initial ^ (np.arange(knots.size) & 1)
    seg_len = np.diff(knots)
    cum = np.concatenate(([0.0], np.cumsum(seg_len * seg_vals[:-1])))
    k = np.searchsorted(knots, points, side="right") - 1
    k = np.clip(k, 0, None)
    return cum[k] + (points - knots[k]) * seg_vals[k]


def on_time(w: BooleanWaveform, t0: float, t1: float) -> float:
    """Exact measure of ``{t in [t0, t1] : w(t) = 1}``."""
    if not 0 <= t0 <= t1 <= w.horizon:
        raise DomainError(f"[{t0}, {t1}] not inside [0, {w.horizon}]")
    f = _cumulative_on(w.initial_value, w.transitions, np.array([t0, t1]))
    return float(f[1] - f[0])


def boolean_distance(a: BooleanWaveform, b: BooleanWaveform, t: float, tau: float) -> float:
    """Fraction of ``[t, t + tau]`` on which ``a`` and ``b`` disagree."""
    if not tau > 0:
        raise DomainError("tau must be > 0")
    if t < 0 or t + tau > min(a.horizon, b.horizon):
        raise DomainError(f"window [{t}, {t + tau}] exceeds a horizon")
    diff = _merge_toggles(a.transitions, b.transitions)
    f = _cumulative_on(a.initial_value ^ b.initial_value, diff, np.array([t, t + tau]))
    return float(min(max((f[1] - f[0]) / tau, 0.0), 1.0))


def distance_curve(a: BooleanWaveform, b: BooleanWaveform, starts, tau: float) -> np.ndarray:
    """:func:`boolean_distance` evaluated at every window start in ``starts``."""
    starts = np.asarray(starts, dtype=float)
    if not tau > 0:
        raise DomainError("tau must be > 0")
    if starts.size and (starts.min() < 0 or starts.max() + tau > min(a.horizon, b.horizon)):
        raise DomainError("distance windows exceed a horizon")
    diff = _merge_toggles(a.transitions, b.transitions)
    v0 = a.initial_value ^ b.initial_value
    f0 = _cumulative_on(v0, diff, starts)
    f1 = _cumulative_on(v0, diff, starts + tau)
    return np.clip((f1 - f0) / tau, 0.0, 1.0)


def sample(w: BooleanWaveform, start: float, period: float, count: int) -> SampleTrain:
    if count < 1:
        raise DomainError("count must be >= 1")
    if not period > 0:
        raise DomainError("period must be > 0")
    times = start + period * np.arange(count)
    return SampleTrain(start, period, values_at(w, times))


# --- text dump format ---------------------------------------------------------
#   initial=<0|1>
#   horizon=<ns>
#   t=<ns>            (one line per transition)
# floats are written with repr() so parse(emit(w)) is lossless.


def dumps(w: BooleanWaveform) -> str:
    lines = [f"initial={w.initial_value}", f"horizon={float(w.horizon)!r}"]
    lines.extend(f"t={float(t)!r}" for t in w.transitions)
    return "\n".join(lines) + "\n"


def loads(text: str) -> BooleanWaveform:
    initial = None
    horizon = None
    trans: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise DomainError(f"line {lineno}: expected key=value, got {raw!r}")
        key = key.strip()
        if key == "initial":
            initial = int(val)
        elif key == "horizon":
            horizon = float(val)
        elif key == "t":
            trans.append(float(val))
        else:
            raise DomainError(f"line {lineno}: unknown key {key!r}")
    if initial is None or horizon is None:
        raise DomainError("waveform dump needs both initial= and horizon= headers")
    return BooleanWaveform(initial, trans, horizon)


def write_waveform(w: BooleanWaveform, path) -> None:
    Path(path).write_text(dumps(w))


def read_waveform(path) -> BooleanWaveform:
    return loads(Path(path).read_text())


def from_intervals(intervals: Iterable[Sequence[float]], horizon: float) -> BooleanWaveform:
    """Waveform that is high on each half-open ``[start, stop)`` interval.

    Intervals must be disjoint; touching intervals merge.
    """
    toggles = []
    for start, stop in intervals:
        if stop < start:
            raise DomainError("interval stop precedes start")
        toggles.extend([start, stop])
    tr = _merge_toggles(np.array(toggles, dtype=float))
    tr = tr[tr <= horizon]
    return BooleanWaveform(0, tr, horizon)
