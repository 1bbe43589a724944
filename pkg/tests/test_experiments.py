import csv
import json
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from boolres.errors import DomainError
from boolres.experiments import (
    SWEEP_COLUMNS,
    ExperimentConfig,
    replay,
    run_experiment,
    run_sweep,
    sweep_cell_config,
)
from boolres.metrics import effective_dimensionality
from boolres.signal import read_waveform

SMALL = dict(horizon=400.0, trials=4, sweep_trials=4, repeats=2)


def test_config_roundtrip_defaults():
    cfg = ExperimentConfig()
    assert ExperimentConfig.loads(cfg.dumps()) == cfg


@given(
    st.sampled_from(["sweep", "classify", "transients"]),
    st.integers(7, 20),
    st.floats(0.0, 0.05, allow_nan=False),
    st.floats(0.01, 0.99, allow_nan=False),
    st.integers(0, 2**40),
)
def test_config_roundtrip_property(exp, n1, sigma, thr, seed):
    cfg = ExperimentConfig(experiment=exp, n1=n1, jitter_sigma=sigma, threshold=thr, seed=seed)
    assert ExperimentConfig.loads(cfg.dumps()) == cfg


def test_config_errors(tmp_path):
    with pytest.raises(DomainError):
        ExperimentConfig(experiment="figure9")
    with pytest.raises(DomainError):
        ExperimentConfig.loads("[experiment]\nbogus = 1\n")
    with pytest.raises(DomainError):
        ExperimentConfig.loads("[experiment]\ntrials = many\n")
    with pytest.raises(DomainError):
        ExperimentConfig.loads("[other]\n")
    with pytest.raises(DomainError):
        ExperimentConfig(words="0a")
    with pytest.raises(DomainError):
        ExperimentConfig(W=200, S=200)
    with pytest.raises(FileNotFoundError):
        run_experiment(ExperimentConfig(calibration_file=str(tmp_path / "none.txt")), tmp_path)


def test_config_overrides():
    cfg = ExperimentConfig.loads("[experiment]\nseed = 3\n", seed=9, output=None)
    assert cfg.seed == 9 and cfg.output == "out"


def test_one_cell_sweep_matches_direct_call():
    cfg = ExperimentConfig(sweep_n1_min=9, sweep_n1_max=9, sweep_n2_min=14, sweep_n2_max=14, **SMALL)
    res = run_sweep(cfg)
    direct = effective_dimensionality(
        sweep_cell_config(cfg, 9, 14), trials=cfg.sweep_trials, horizon=cfg.horizon,
        repeats=cfg.repeats,
    )
    cell = res.cells[9, 14]
    assert (cell.L, cell.K, cell.Gamma, cell.D) == (direct.L, direct.K, direct.Gamma, direct.D)
    assert res.argmax == (9, 14)


def test_sweep_workers_do_not_change_output(tmp_path):
    base = ExperimentConfig(
        experiment="sweep", sweep_n1_min=8, sweep_n1_max=9, sweep_n2_min=10, sweep_n2_max=11, **SMALL
    )
    run_experiment(base, tmp_path / "w1")
    run_experiment(replace(base, workers=2), tmp_path / "w2")
    a = (tmp_path / "w1" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "w2" / "sweep.csv").read_bytes()
    rows = list(csv.reader(a.decode().splitlines()))
    assert rows[0] == SWEEP_COLUMNS and len(rows) == 5


def test_failed_cell_is_marked_invalid(tmp_path):
    cal = tmp_path / "cal.txt"
    cal.write_text("7 3.76 3.75\n8 4.31 4.31\n")
    cfg = ExperimentConfig(
        calibration_file=str(cal), sweep_n1_min=8, sweep_n1_max=9, sweep_n2_min=8, sweep_n2_max=8,
        **SMALL,
    )
    res = run_sweep(cfg)
    assert res.invalid == [(9, 8)]
    assert "CalibrationLookupError" in res.errors[9, 8]
    assert res.argmax == (8, 8)


def test_transients_pipeline(tmp_path):
    cfg = ExperimentConfig(experiment="transients", n1=17, n2=18, horizon=200.0)
    man = run_experiment(cfg, tmp_path)
    assert sorted(man["outputs"]) == [f"transient_{w}.txt" for w in ("00", "01", "10", "11")]
    wave = read_waveform(tmp_path / "transient_01.txt")
    assert wave.horizon == 200.0 and len(wave) > 0


def test_manifest_replay_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(experiment="consistency", trials=4, horizon=300.0, seed=11)
    man = run_experiment(cfg, tmp_path / "a")
    again = replay(tmp_path / "a" / "manifest.json", tmp_path / "b")
    assert again["outputs"] == man["outputs"]
    for name in man["outputs"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    stored = ExperimentConfig.load(tmp_path / "a" / "config.ini")
    assert stored.seed == 11
    data = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert data["master_seed"] == 11 and data["version"]


def test_train_then_classify_from_file(tmp_path):
    common = dict(n=1, S=40, W=8, train_trials=10, test_trials=10, window_L=60.0)
    run_experiment(ExperimentConfig(experiment="train", **common), tmp_path / "t")
    cfg = ExperimentConfig(
        experiment="classify", classifiers_file=str(tmp_path / "t" / "classifiers.txt"), **common
    )
    man = run_experiment(cfg, tmp_path / "c")
    rows = list(csv.reader(open(tmp_path / "c" / "error_curve.csv")))
    assert rows[0] == ["t_ns", "error_rate", "region"] and len(rows) == 33
    assert man["summary"]["A_end_ns"] == 40.0


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        run_experiment(ExperimentConfig(experiment="transients", horizon=50.0), blocker / "sub")
