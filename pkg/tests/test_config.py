"""JSON experiment configs: parsing, validation, emission round trip."""

import json

import numpy as np
import pytest

from eigencollide.config import ExperimentConfig, config_to_dict, emit_config, parse_config


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.beta == 1 and cfg.d == 2
    assert cfg.hurst == (0.3,)
    assert cfg.interval == (1.0, 2.0)
    assert cfg.shift is None
    assert cfg.extras == {}


def test_round_trip(tmp_path):
    cfg = ExperimentConfig(
        beta=2, d=3, hurst=(0.25,), interval=(0.5, 2.5), intervals=512,
        replicas=777, kappa=1.5, seed=99, mesh_ladder=(128, 256, 512),
    )
    path = tmp_path / "cfg.json"
    emit_config(cfg, str(path))
    assert parse_config(str(path)) == cfg


def test_round_trip_with_complex_shift(tmp_path):
    A = np.array([[1.0, 0.5 + 0.25j], [0.5 - 0.25j, -1.0]])
    cfg = ExperimentConfig(beta=2, d=2, shift=A)
    path = tmp_path / "cfg.json"
    emit_config(cfg, str(path))
    back = parse_config(str(path))
    assert back == cfg
    np.testing.assert_array_equal(back.shift, A)


def test_parse_scalar_hurst(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"hurst": 0.25}))
    assert parse_config(str(path)).hurst == (0.25,)


def test_parse_rejects_unknown_keys(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"betaa": 1}))
    with pytest.raises(ValueError, match="c.json"):
        parse_config(str(path))


def test_parse_collects_experiment_sections(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"sweep": {"hurst_values": [0.2, 0.8]}, "gapfit": {"t0": 2.0}}))
    cfg = parse_config(str(path))
    assert cfg.extras["sweep"]["hurst_values"] == [0.2, 0.8]
    assert cfg.extras["gapfit"]["t0"] == 2.0


def test_validation_errors():
    with pytest.raises(ValueError):
        ExperimentConfig(beta=3)
    with pytest.raises(ValueError):
        ExperimentConfig(hurst=(1.2,))
    with pytest.raises(ValueError):
        ExperimentConfig(interval=(2.0, 1.0))
    with pytest.raises(ValueError):
        ExperimentConfig(intervals=0)
    with pytest.raises(ValueError):
        ExperimentConfig(replicas=-1)
    with pytest.raises(ValueError):
        ExperimentConfig(kappa=0.0)
    with pytest.raises(ValueError):
        ExperimentConfig(mesh_ladder=(64, 48))  # finest must be divisible
    with pytest.raises(ValueError):
        ExperimentConfig(shift=np.zeros((3, 3)))  # d = 2 by default


def test_critical_hurst_warns():
    with pytest.warns(UserWarning):
        ExperimentConfig(beta=1, hurst=(0.5,))


def test_ladder_defaults_to_intervals():
    cfg = ExperimentConfig(intervals=512, mesh_ladder=None)
    assert tuple(cfg.ladder()) == (512,)
    cfg = ExperimentConfig(intervals=512, mesh_ladder=(128, 512))
    assert tuple(cfg.ladder()) == (128, 512)


def test_with_hurst_and_replace():
    cfg = ExperimentConfig(hurst=(0.3,))
    c2 = cfg.with_hurst((0.7,))
    assert c2.hurst == (0.7,) and c2.seed == cfg.seed
    c3 = cfg.replace(replicas=5)
    assert c3.replicas == 5 and c3.hurst == cfg.hurst


def test_config_to_dict_json_safe():
    A = np.array([[0.0, 1j], [-1j, 0.0]])
    cfg = ExperimentConfig(beta=2, shift=A)
    d = config_to_dict(cfg)
    json.dumps(d)  # must not raise
    assert d["beta"] == 2


def test_equality_uses_shift_values():
    a = ExperimentConfig(shift=np.zeros((2, 2)))
    b = ExperimentConfig(shift=None)
    assert a == b  # zero shift and no shift are the same experiment
    c = ExperimentConfig(shift=np.eye(2))
    assert a != c
