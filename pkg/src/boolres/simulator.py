"""Event-driven simulation of a 3-input XOR node with two delayed feedback lines.

The node output obeys

    x(t) = XOR(u(t - g), x(t - g - T1'), x(t - g - T2'))

where ``u`` is the data input, ``g`` the gate delay and ``T1'``/``T2'`` are
the line delays plus per-traversal Gaussian jitter. Output transitions that
would form a pulse narrower than ``pulse_reject_width`` are annihilated in
pairs before they are committed and re-enter the delay lines (an inertial
delay), which is what keeps the otherwise linear XOR dynamics bounded.

:func:`simulate_dense_oracle` is an independent fixed-step implementation of
the same law used to verify the event engine.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CalibrationLookupError, DomainError, ResourceError
from .signal import BooleanWaveform, SampleTrain, values_at

__all__ = [
    "ELEMENT_DELAY_RANGE",
    "MEAN_ELEMENT_DELAY",
    "DEFAULT_GATE_DELAY",
    "DEFAULT_JITTER_SIGMA",
    "DEFAULT_PULSE_REJECT_WIDTH",
    "DEFAULT_MAX_EVENTS",
    "CalibrationTable",
    "DelayLineSpec",
    "ReservoirConfig",
    "EngineStats",
    "build_delay_line",
    "simulate",
    "run_engine",
    "simulate_dense_oracle",
]

ELEMENT_DELAY_RANGE = (0.43, 0.99)  # ns, spread of a single inverter pair
MEAN_ELEMENT_DELAY = 0.59  # ns
DEFAULT_GATE_DELAY = 0.0
DEFAULT_JITTER_SIGMA = 0.012  # ns per element; per-traversal sigma scales with sqrt(N)
DEFAULT_PULSE_REJECT_WIDTH = 0.1  # ns
DEFAULT_MAX_EVENTS = 10_000_000

# Events closer than this are treated as simultaneous. Absorbs floating-point
# round-off between mathematically coincident feedback paths.
TIME_EPS = 1e-9

_INPUT, _LINE1, _LINE2, _COMMIT = 0, 1, 2, 3


@dataclass(frozen=True)
class CalibrationTable:
    """Rows of ``(element_count, T1_ns, T2_ns)``."""

    rows: tuple

    def __post_init__(self):
        rows = tuple((int(n), float(t1), float(t2)) for n, t1, t2 in self.rows)
        counts = [r[0] for r in rows]
        if any(b <= a for a, b in zip(counts, counts[1:])):
            raise DomainError("calibration element counts must be strictly increasing")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def default(cls) -> "CalibrationTable":
        text = resources.files("boolres.data").joinpath("calibration.txt").read_text()
        return cls.loads(text)

    @classmethod
    def loads(cls, text: str) -> "CalibrationTable":
        rows = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise DomainError(f"calibration line {lineno}: expected 'N T1_ns T2_ns'")
            rows.append((int(parts[0]), float(parts[1]), float(parts[2])))
        return cls(tuple(rows))

    @classmethod
    def load(cls, path) -> "CalibrationTable":
        return cls.loads(Path(path).read_text())

    def dumps(self) -> str:
        return "".join(f"{n} {t1!r} {t2!r}\n" for n, t1, t2 in self.rows)

    @property
    def element_counts(self) -> list[int]:
        return [r[0] for r in self.rows]

    def total_delay(self, element_count: int, line: int) -> float:
        if line not in (1, 2):
            raise DomainError("line must be 1 or 2")
        for n, t1, t2 in self.rows:
            if n == element_count:
                return t1 if line == 1 else t2
        raise CalibrationLookupError(f"no calibration row for N={element_count}")


@dataclass(frozen=True)
class DelayLineSpec:
    element_count: int
    element_delays: tuple
    total_delay: float

    def __post_init__(self):
        delays = tuple(float(d) for d in self.element_delays)
        object.__setattr__(self, "element_delays", delays)
        object.__setattr__(self, "total_delay", float(self.total_delay))
        if self.element_count != len(delays):
            raise DomainError("element_count must equal the number of element delays")
        if any(d <= 0 for d in delays):
            raise DomainError("element delays must be positive")
        if abs(sum(delays) - self.total_delay) > 1e-9:
            raise DomainError("total_delay must equal the sum of element delays")


def build_delay_line(
    element_count: int,
    mode: str = "table-calibrated",
    calibration: CalibrationTable | None = None,
    rng_seed: int = 0,
    line: int = 1,
) -> DelayLineSpec:
    """Construct a delay line of ``element_count`` inverter pairs.

    Modes:

    ``table-calibrated``
        heterogeneous element delays rescaled so the total matches the
        calibration table entry for ``line``;
    ``sampled-heterogeneous``
        element delays uniform on :data:`ELEMENT_DELAY_RANGE`;
    ``uniform``
        every element :data:`MEAN_ELEMENT_DELAY`.
    """
    if element_count < 1:
        raise DomainError("element_count must be >= 1")
    lo, hi = ELEMENT_DELAY_RANGE
    if mode == "uniform":
        delays = [MEAN_ELEMENT_DELAY] * element_count
        return DelayLineSpec(element_count, tuple(delays), math.fsum(delays))
    rng = np.random.default_rng(rng_seed)
    raw = rng.uniform(lo, hi, size=element_count)
    if mode == "sampled-heterogeneous":
        return DelayLineSpec(element_count, tuple(raw), math.fsum(raw))
    if mode == "table-calibrated":
        cal = calibration if calibration is not None else CalibrationTable.default()
        total = cal.total_delay(element_count, line)
        scaled = raw * (total / raw.sum())
        return DelayLineSpec(element_count, tuple(scaled), total)
    raise DomainError(f"unknown delay-line mode {mode!r}")


@dataclass(frozen=True)
class ReservoirConfig:
    line1: DelayLineSpec
    line2: DelayLineSpec
    gate_delay: float = DEFAULT_GATE_DELAY
    jitter_sigma: float = DEFAULT_JITTER_SIGMA
    pulse_reject_width: float = DEFAULT_PULSE_REJECT_WIDTH
    rng_seed: int = 0

    def __post_init__(self):
        if self.gate_delay < 0 or self.jitter_sigma < 0 or self.pulse_reject_width < 0:
            raise DomainError("gate_delay, jitter_sigma and pulse_reject_width must be >= 0")
        if self.pulse_reject_width >= min(self.line1.total_delay, self.line2.total_delay):
            raise DomainError("pulse_reject_width must be below both line delays")

    @classmethod
    def from_counts(
        cls,
        n1: int,
        n2: int,
        mode: str = "table-calibrated",
        calibration: CalibrationTable | None = None,
        line_seed: int = 0,
        **kwargs,
    ) -> "ReservoirConfig":
        cal = calibration
        if mode == "table-calibrated" and cal is None:
            cal = CalibrationTable.default()
        line1 = build_delay_line(n1, mode, cal, rng_seed=line_seed, line=1)
        line2 = build_delay_line(n2, mode, cal, rng_seed=line_seed + 1, line=2)
        return cls(line1, line2, **kwargs)

    @property
    def T1(self) -> float:
        return self.line1.total_delay

    @property
    def T2(self) -> float:
        return self.line2.total_delay

    def with_seed(self, seed: int) -> "ReservoirConfig":
        return replace(self, rng_seed=int(seed))


@dataclass
class EngineStats:
    events: int = 0
    last_event_time: float = 0.0
    committed: int = 0
    annihilated: int = 0


def _input_toggles(inp: BooleanWaveform, horizon: float) -> np.ndarray:
    tr = inp.transitions[inp.transitions <= horizon]
    if inp.initial_value:
        # history is all-zero, so an initially-high input is a rising edge at 0
        if tr.size and tr[0] == 0.0:
            tr = tr[1:]
        else:
            tr = np.concatenate(([0.0], tr))
    return tr


def run_engine(
    config: ReservoirConfig,
    inp: BooleanWaveform,
    horizon: float,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> tuple[BooleanWaveform, EngineStats]:
    """Run the event engine; returns the output waveform and run statistics."""
    if horizon < 0:
        raise DomainError("horizon must be >= 0")
    if inp.horizon < horizon:
        raise DomainError(f"input defined to {inp.horizon} ns, need {horizon} ns")

    T1, T2 = config.line1.total_delay, config.line2.total_delay
    g = config.gate_delay
    w = config.pulse_reject_width
    sig1 = config.jitter_sigma * math.sqrt(config.line1.element_count)
    sig2 = config.jitter_sigma * math.sqrt(config.line2.element_count)
    jitter = config.jitter_sigma > 0
    rng = np.random.default_rng(config.rng_seed) if jitter else None
    normals: list[float] = []

    heap: list = []
    push, pop = heapq.heappush, heapq.heappop
    seq = 0
    for t in _input_toggles(inp, horizon):
        heap.append((float(t), seq, _INPUT))
        seq += 1
    heapq.heapify(heap)

    stop = horizon + w + TIME_EPS
    u = a = b = 0
    level = 0  # output value after all pending transitions
    pending: deque = deque()
    out: list[float] = []
    stats = EngineStats()
    n_events = 0

    def commit(s, now):
        nonlocal seq, normals
        out.append(s)
        if jitter:
            if len(normals) < 2:
                normals = rng.standard_normal(4096).tolist()
            r1 = s + T1 + sig1 * normals.pop()
            r2 = s + T2 + sig2 * normals.pop()
            r1 = r1 if r1 > now else now
            r2 = r2 if r2 > now else now
        else:
            r1 = s + T1
            r2 = s + T2
        push(heap, (r1, seq, _LINE1))
        push(heap, (r2, seq + 1, _LINE2))
        seq += 2

    while heap:
        t = heap[0][0]
        if t > stop:
            break
        changed = False
        limit = t + TIME_EPS
        while heap and heap[0][0] <= limit:
            kind = pop(heap)[2]
            n_events += 1
            if kind == _INPUT:
                u ^= 1
                changed = True
            elif kind == _LINE1:
                a ^= 1
                changed = True
            elif kind == _LINE2:
                b ^= 1
                changed = True
        if n_events > max_events:
            raise ResourceError(
                f"event cap {max_events} exceeded at t={t:.3f} ns; runaway oscillation"
            )
        stats.last_event_time = t
        while pending and pending[0] + w <= limit:
            commit(pending.popleft(), t)
        if changed:
            r = u ^ a ^ b
            if r != level:
                s = t + g
                if pending and s - pending[-1] < w:
                    pending.pop()
                    stats.annihilated += 1
                elif w > 0:
                    pending.append(s)
                    push(heap, (s + w, seq, _COMMIT))
                    seq += 1
                else:
                    commit(s, t)
                level = r

    stats.events = n_events
    stats.committed = len(out)
    trans = out + [s for s in pending if s <= horizon]
    trans = [s for s in trans if s <= horizon]
    return BooleanWaveform(0, np.array(trans, dtype=float), horizon), stats


def simulate(
    config: ReservoirConfig,
    inp: BooleanWaveform,
    horizon: float,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> BooleanWaveform:
    """Node output on ``[0, horizon]`` starting from the all-zero fixed point."""
    return run_engine(config, inp, horizon, max_events)[0]


def simulate_dense_oracle(
    config: ReservoirConfig,
    inp: BooleanWaveform,
    horizon: float,
    grid_step: float = 0.01,
) -> SampleTrain:
    """Brute-force fixed-step evaluation of the same delay equation.

    Delays are rounded to whole grid steps. Pulse rejection is applied on the
    grid with the same pairwise rule as the event engine. Only valid without
    jitter.
    """
    if not grid_step > 0:
        raise DomainError("grid_step must be > 0")
    if config.jitter_sigma != 0:
        raise DomainError("the dense oracle is deterministic; set jitter_sigma = 0")
    if inp.horizon < horizon:
        raise DomainError(f"input defined to {inp.horizon} ns, need {horizon} ns")
    n_out = int(math.floor(horizon / grid_step + 1e-9)) + 1
    # run past the horizon so late pulses get the same chance to be rejected
    n = n_out + int(math.ceil(config.pulse_reject_width / grid_step)) + 1
    d1 = int(round(config.line1.total_delay / grid_step))
    d2 = int(round(config.line2.total_delay / grid_step))
    gd = int(round(config.gate_delay / grid_step))
    w = config.pulse_reject_width
    times = np.minimum(grid_step * np.arange(n), inp.horizon)
    u = values_at(inp, times).tolist()  # input held at its last value past the horizon

    y = [0] * n
    prev = 0
    surviving: list[int] = []
    for k in range(n):
        kk = k - gd
        if kk < 0:
            r = 0
        else:
            r = u[kk]
            if kk >= d1:
                r ^= y[kk - d1]
            if kk >= d2:
                r ^= y[kk - d2]
        if r != prev:
            if surviving and (k - surviving[-1]) * grid_step < w:
                p = surviving.pop()
                for q in range(p, k):
                    y[q] = r
            else:
                surviving.append(k)
            prev = r
        y[k] = r
    return SampleTrain(0.0, grid_step, np.array(y[:n_out], dtype=np.int8))
