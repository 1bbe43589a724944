"""Experiment configuration, the (N1, N2) sweep and end-to-end pipelines.

Every pipeline writes its data files plus ``manifest.json`` (resolved
configuration, seeds, package version, SHA-256 of each output) and a copy of
the configuration as ``config.ini``; running the same pipeline again from
that file reproduces byte-identical outputs.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, runs
from .encoding import InputWord, all_words, encode
from .errors import BoolresError, DomainError
from .metrics import (
    DEFAULT_RANK_TOL,
    DEFAULT_REPEATS,
    DEFAULT_TAU,
    DEFAULT_THRESHOLD,
    DimensionalityResult,
    effective_dimensionality,
    estimate_consistency,
    write_consistency_csv,
)
from .reservoir import ClassifierSet, error_curve, train, write_error_csv
from .signal import write_waveform
from .simulator import (
    DEFAULT_GATE_DELAY,
    DEFAULT_JITTER_SIGMA,
    DEFAULT_PULSE_REJECT_WIDTH,
    CalibrationTable,
    ReservoirConfig,
    simulate,
)

__all__ = [
    "EXPERIMENTS",
    "SWEEP_COLUMNS",
    "ExperimentConfig",
    "SweepResult",
    "reservoir_config",
    "sweep_cell_config",
    "run_sweep",
    "write_sweep_csv",
    "run_experiment",
    "replay",
]

EXPERIMENTS = ("transients", "simulate", "consistency", "dimensionality", "sweep", "train", "classify")
SWEEP_COLUMNS = ["N1", "N2", "T1_ns", "T2_ns", "L_ns", "K", "Gamma", "Delta", "D_ns"]
MODES = ("table-calibrated", "sampled-heterogeneous", "uniform")
SECTION = "experiment"


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (S, W)
    return cp


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description; see the README for every key."""

    experiment: str = "consistency"
    n1: int = 8
    n2: int = 11
    delay_mode: str = "table-calibrated"
    calibration_file: str = ""
    line_seed: int = 0
    gate_delay: float = DEFAULT_GATE_DELAY
    jitter_sigma: float = DEFAULT_JITTER_SIGMA
    pulse_reject_width: float = DEFAULT_PULSE_REJECT_WIDTH
    words: str = "00,01,10,11"
    horizon: float = 1000.0
    trials: int = 50
    tau: float = DEFAULT_TAU
    threshold: float = DEFAULT_THRESHOLD
    rank_tol: float = DEFAULT_RANK_TOL
    repeats: int = DEFAULT_REPEATS
    sweep_n1_min: int = 7
    sweep_n1_max: int = 20
    sweep_n2_min: int = 7
    sweep_n2_max: int = 20
    sweep_trials: int = 10
    n: int = 2
    S: int = 200
    W: int = 50
    ridge: float = 1e-6
    train_trials: int = 100
    test_trials: int = 100
    window_L: float = 0.0
    classifiers_file: str = ""
    output: str = "out"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.delay_mode not in MODES:
            raise DomainError(f"unknown delay_mode {self.delay_mode!r}")
        for name in ("n1", "n2", "sweep_n1_min", "sweep_n1_max", "sweep_n2_min", "sweep_n2_max"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1")
        if self.sweep_n1_min > self.sweep_n1_max or self.sweep_n2_min > self.sweep_n2_max:
            raise DomainError("sweep ranges must have min <= max")
        if self.trials < 2 or self.sweep_trials < 2:
            raise DomainError("consistency needs at least two trials")
        if not 0 < self.threshold < 1:
            raise DomainError("threshold must lie in (0, 1)")
        if self.tau <= 0 or self.horizon <= 0:
            raise DomainError("tau and horizon must be > 0")
        if self.rank_tol <= 0 or self.repeats < 1:
            raise DomainError("rank_tol must be > 0 and repeats >= 1")
        if self.n < 1 or not 1 <= self.W < self.S:
            raise DomainError("need n >= 1 and 1 <= W < S")
        if self.ridge < 0 or self.train_trials < 1 or self.test_trials < 1:
            raise DomainError("ridge must be >= 0 and trial counts >= 1")
        if self.window_L < 0 or self.workers < 1 or self.seed < 0:
            raise DomainError("window_L, workers and seed must be non-negative (workers >= 1)")
        self.word_list()

    def word_list(self) -> list[InputWord]:
        out = []
        for tok in self.words.split(","):
            tok = tok.strip()
            if not tok or set(tok) - {"0", "1"}:
                raise DomainError(f"bad word {tok!r} in words")
            out.append(InputWord.from_string(tok))
        return out

    def dumps(self) -> str:
        cp = _parser()
        cp[SECTION] = {
            f.name: repr(v) if isinstance(v, float) else str(v)
            for f in fields(self) for v in [getattr(self, f.name)]
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str, **overrides) -> "ExperimentConfig":
        cp = _parser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise DomainError(f"unreadable config: {exc}") from None
        if SECTION not in cp:
            raise DomainError(f"config needs an [{SECTION}] section")
        raw = dict(cp[SECTION])
        types = {f.name: f.type for f in fields(cls)}
        unknown = set(raw) - set(types)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for key, val in raw.items():
            kind = types[key]
            try:
                kw[key] = int(val) if kind == "int" else float(val) if kind == "float" else val
            except ValueError:
                raise DomainError(f"{key}: cannot parse {val!r} as {kind}") from None
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)

    @classmethod
    def load(cls, path, **overrides) -> "ExperimentConfig":
        return cls.loads(Path(path).read_text(), **overrides)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())


def _calibration(cfg: ExperimentConfig) -> CalibrationTable | None:
    if cfg.delay_mode != "table-calibrated":
        return None
    if cfg.calibration_file:
        return CalibrationTable.load(cfg.calibration_file)
    return CalibrationTable.default()


def reservoir_config(cfg: ExperimentConfig, n1: int | None = None, n2: int | None = None,
                     rng_seed: int | None = None) -> ReservoirConfig:
    """Reservoir for ``cfg``; the run seed defaults to the master seed."""
    return ReservoirConfig.from_counts(
        cfg.n1 if n1 is None else n1,
        cfg.n2 if n2 is None else n2,
        mode=cfg.delay_mode,
        calibration=_calibration(cfg),
        line_seed=cfg.line_seed,
        gate_delay=cfg.gate_delay,
        jitter_sigma=cfg.jitter_sigma,
        pulse_reject_width=cfg.pulse_reject_width,
        rng_seed=cfg.seed if rng_seed is None else rng_seed,
    )


def sweep_cell_config(cfg: ExperimentConfig, n1: int, n2: int) -> ReservoirConfig:
    """Reservoir of sweep cell ``(n1, n2)`` with its own seed stream."""
    return reservoir_config(cfg, n1, n2, runs.derive_seed(cfg.seed, runs.STREAM_SWEEP, n1, n2))


# --- sweep ------------------------------------------------------------------------


@dataclass
class SweepResult:
    n1_values: list
    n2_values: list
    cells: dict  # (n1, n2) -> DimensionalityResult or None when the cell failed
    T: dict = field(default_factory=dict)  # (n1, n2) -> (T1, T2)
    errors: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple:
        return len(self.n1_values), len(self.n2_values)

    def D_grid(self) -> np.ndarray:
        """``D`` indexed ``[n1 index, n2 index]``; NaN for failed cells."""
        g = np.full(self.shape, np.nan)
        for a, n1 in enumerate(self.n1_values):
            for b, n2 in enumerate(self.n2_values):
                r = self.cells.get((n1, n2))
                if r is not None:
                    g[a, b] = r.D
        return g

    @property
    def argmax(self) -> tuple | None:
        """Cell with the largest D; ties go to the first cell in (N1, N2) order."""
        best, best_D = None, -math.inf
        for n1 in self.n1_values:
            for n2 in self.n2_values:
                r = self.cells.get((n1, n2))
                if r is not None and r.D > best_D:
                    best, best_D = (n1, n2), r.D
        return best

    @property
    def invalid(self) -> list:
        return [k for k, v in self.cells.items() if v is None]

    def rows(self):
        for n1 in self.n1_values:
            for n2 in self.n2_values:
                r = self.cells.get((n1, n2))
                T1, T2 = self.T[n1, n2]
                if r is None:
                    yield [n1, n2, T1, T2] + [math.nan] * 5
                else:
                    yield [n1, n2, T1, T2, r.L, r.K, r.Gamma, r.Delta, r.D]


def _sweep_cell(task):
    cfg, n1, n2 = task
    try:
        rc = sweep_cell_config(cfg, n1, n2)
        res = effective_dimensionality(
            rc, tau=cfg.tau, threshold=cfg.threshold, rank_tol=cfg.rank_tol,
            trials=cfg.sweep_trials, horizon=cfg.horizon, repeats=cfg.repeats,
        )
        res.consistency = None  # keep results small across processes
        return (rc.T1, rc.T2), res, None
    except BoolresError as exc:
        return (math.nan, math.nan), None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Effective dimensionality for every cell of the configured (N1, N2) ranges.

    Cells run on ``cfg.workers`` processes; each derives its seed from the
    master seed and its own coordinates, so the grid does not depend on
    scheduling. A cell that raises is recorded as invalid.
    """
    n1s = list(range(cfg.sweep_n1_min, cfg.sweep_n1_max + 1))
    n2s = list(range(cfg.sweep_n2_min, cfg.sweep_n2_max + 1))
    keys = [(a, b) for a in n1s for b in n2s]
    out = runs.pool_map(_sweep_cell, [(cfg, a, b) for a, b in keys], cfg.workers)
    result = SweepResult(n1s, n2s, {})
    for key, (T, res, err) in zip(keys, out):
        result.cells[key] = res
        result.T[key] = T
        if err is not None:
            result.errors[key] = err
    return result


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SWEEP_COLUMNS)
        for row in result.rows():
            wr.writerow([_fmt(v) for v in row])


def _dim_row(rc: ReservoirConfig, n1, n2, r: DimensionalityResult):
    return [n1, n2, rc.T1, rc.T2, r.L, r.K, r.Gamma, r.Delta, r.D]


# --- pipelines ----------------------------------------------------------------------


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _prepare(out) -> Path:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _transients(cfg, out):
    rc = reservoir_config(cfg)
    files = []
    for k, word in enumerate(cfg.word_list()):
        seed = runs.derive_seed(cfg.seed, runs.STREAM_TRANSIENTS, k)
        wave = simulate(rc.with_seed(seed), encode(word, cfg.horizon), cfg.horizon)
        path = out / f"transient_{word.label}.txt"
        write_waveform(wave, path)
        files.append(path)
    return files, {"T1_ns": rc.T1, "T2_ns": rc.T2}


def _consistency(cfg, out):
    rc = reservoir_config(cfg)
    rep = estimate_consistency(
        rc, cfg.word_list(), trials=cfg.trials, tau=cfg.tau, threshold=cfg.threshold,
        horizon=cfg.horizon, workers=cfg.workers,
    )
    curves = out / "consistency.csv"
    write_consistency_csv(rep, curves)
    summary = out / "consistency_summary.csv"
    with open(summary, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["word", "window_ns", "lyapunov_slope_per_ns", "separation_ratio"])
        for lab, L, s, q in zip(rep.labels, rep.per_input_window, rep.per_input_slope,
                                rep.separation_ratios()):
            wr.writerow([lab, _fmt(L), _fmt(s), _fmt(q)])
    info = {
        "window_L_ns": rep.window_L,
        "lyapunov_slope_per_ns": rep.lyapunov_slope,
        "degenerate": rep.degenerate,
        "converged": rep.converged,
    }
    return [curves, summary], info


def _dimensionality(cfg, out):
    rc = reservoir_config(cfg)
    r = effective_dimensionality(
        rc, tau=cfg.tau, threshold=cfg.threshold, rank_tol=cfg.rank_tol, trials=cfg.trials,
        horizon=cfg.horizon, repeats=cfg.repeats, workers=cfg.workers,
    )
    path = out / "dimensionality.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SWEEP_COLUMNS)
        wr.writerow([_fmt(v) for v in _dim_row(rc, cfg.n1, cfg.n2, r)])
    return [path], {"m": r.m, "degenerate": r.degenerate}


def _sweep(cfg, out):
    res = run_sweep(cfg)
    path = out / "sweep.csv"
    write_sweep_csv(res, path)
    best = res.argmax
    info = {
        "argmax": list(best) if best else None,
        "argmax_D_ns": res.cells[best].D if best else None,
        "invalid_cells": {f"{a},{b}": e for (a, b), e in res.errors.items()},
    }
    return [path], info


def _train(cfg, out):
    rc = reservoir_config(cfg)
    cs = train(rc, cfg.n, cfg.train_trials, cfg.S, cfg.W, cfg.ridge, workers=cfg.workers)
    path = out / "classifiers.txt"
    cs.save(path)
    return [path], {"min_norm_fallback": cs.min_norm_fallback}


def _classify(cfg, out):
    rc = reservoir_config(cfg)
    info = {}
    if cfg.classifiers_file:
        cs = ClassifierSet.load(cfg.classifiers_file)
    else:
        cs = train(rc, cfg.n, cfg.train_trials, cfg.S, cfg.W, cfg.ridge, workers=cfg.workers)
    L = cfg.window_L
    if L <= 0:
        rep = estimate_consistency(
            rc, all_words(2), trials=cfg.trials, tau=cfg.tau, threshold=cfg.threshold,
            horizon=cfg.horizon, workers=cfg.workers,
        )
        L = rep.window_L
    curve = error_curve(rc, cs, cfg.n, cfg.test_trials, L, workers=cfg.workers)
    path = out / "error_curve.csv"
    write_error_csv(curve, path)
    info.update(
        window_L_ns=L,
        A_end_ns=curve.A_end,
        C_start_ns=curve.C_start,
        region_means={k: curve.region_mean(k) for k in "ABC"},
    )
    return [path], info


_PIPELINES = {
    "transients": _transients,
    "simulate": _transients,
    "consistency": _consistency,
    "dimensionality": _dimensionality,
    "sweep": _sweep,
    "train": _train,
    "classify": _classify,
}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def run_experiment(cfg: ExperimentConfig, out=None) -> dict:
    """Run the selected pipeline and write its outputs and manifest.

    Returns the manifest as a dict. ``out`` overrides ``cfg.output``.
    """
    if cfg.experiment not in _PIPELINES:
        raise DomainError(f"unknown experiment {cfg.experiment!r}")
    if cfg.calibration_file and not Path(cfg.calibration_file).is_file():
        raise FileNotFoundError(f"calibration file {cfg.calibration_file} not found")
    if cfg.classifiers_file and not Path(cfg.classifiers_file).is_file():
        raise FileNotFoundError(f"classifiers file {cfg.classifiers_file} not found")
    out_dir = _prepare(cfg.output if out is None else out)
    files, info = _PIPELINES[cfg.experiment](cfg, out_dir)
    # the stored config leaves workers at 1: results never depend on it
    stored = replace(cfg, output=str(out_dir), workers=1)
    (out_dir / "config.ini").write_text(stored.dumps())
    manifest = {
        "experiment": cfg.experiment,
        "version": __version__,
        "master_seed": cfg.seed,
        "seed_scheme": "numpy SeedSequence(master, spawn_key=(stream, *indices))",
        "config": asdict(stored),
        "summary": _jsonable(info),
        "outputs": {p.name: _sha256(p) for p in files},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def replay(manifest_path, out) -> dict:
    """Rerun the pipeline recorded in a manifest into ``out``."""
    data = json.loads(Path(manifest_path).read_text())
    kw = dict(data["config"])
    kw["output"] = str(out)
    return run_experiment(ExperimentConfig(**kw), out)
