import os
import json
import pytest
from unittest.mock import patch

from src.settings import (
    DEFAULT_SETTINGS, SETTINGS_ENV, create_default_settings_if_missing, get_effective_settings,
    load_settings, precision_for, save_settings, validate_settings,
)


@pytest.fixture
def settings_file(tmp_path, monkeypatch):
    """把设置文件指向临时目录"""
    monkeypatch.delenv(SETTINGS_ENV, raising=False)
    path = os.path.join(str(tmp_path), "config", "settings.json")
    with patch("src.settings.SETTINGS_FILE", path):
        yield path


def test_create_default_settings(settings_file):
    """第一次创建默认文件，第二次不做改动"""
    assert create_default_settings_if_missing() is True
    assert os.path.exists(settings_file)
    assert create_default_settings_if_missing() is False
    with open(settings_file, encoding="utf-8") as f:
        assert json.load(f) == DEFAULT_SETTINGS


def test_load_settings_merges_with_defaults(settings_file):
    # 不存在时返回默认值
    assert load_settings() == DEFAULT_SETTINGS

    os.makedirs(os.path.dirname(settings_file), exist_ok=True)
    with open(settings_file, "w", encoding="utf-8") as f:
        json.dump({"precision": {"min_stable_digits": 40}, "unknown": {"x": 1}}, f)

    loaded = load_settings()
    assert loaded["precision"]["min_stable_digits"] == 40
    # 其余字段保留默认值
    assert loaded["precision"]["min_bits"] == 256
    assert loaded["harness"] == DEFAULT_SETTINGS["harness"]
    assert "unknown" not in loaded


def test_load_corrupt_file_returns_defaults(settings_file):
    os.makedirs(os.path.dirname(settings_file), exist_ok=True)
    with open(settings_file, "w", encoding="utf-8") as f:
        f.write("{not json")
    assert load_settings() == DEFAULT_SETTINGS


def test_env_var_selects_file(tmp_path, monkeypatch):
    path = tmp_path / "custom.json"
    path.write_text(json.dumps({"harness": {"workers": 3}}), encoding="utf-8")
    monkeypatch.setenv(SETTINGS_ENV, str(path))
    assert load_settings()["harness"]["workers"] == 3


def test_validate_settings_clamps():
    valid = validate_settings({
        "precision": {"min_bits": 1, "max_doublings": 99, "min_stable_digits": "many"},
        "harness": {"volume_floor_fraction": 2.5, "workers": 0},
        "cache": {"enabled": False, "max_entries": -5},
    })
    assert valid["precision"]["min_bits"] == 53
    assert valid["precision"]["max_doublings"] == 10
    # 非法类型回退默认值
    assert valid["precision"]["min_stable_digits"] == 30
    assert valid["harness"]["volume_floor_fraction"] == 1.0
    assert valid["harness"]["workers"] == 1
    assert valid["cache"]["enabled"] is False
    assert valid["cache"]["max_entries"] is None

    assert validate_settings("bad") == DEFAULT_SETTINGS


def test_get_effective_settings_applies_overrides(settings_file):
    eff = get_effective_settings({"harness": {"workers": 4}, "precision": {"min_bits": 10}})
    assert eff["harness"]["workers"] == 4
    assert eff["harness"]["significant_digits"] == 17
    assert eff["precision"]["min_bits"] == 53


def test_save_and_reload(tmp_path):
    path = str(tmp_path / "nested" / "s.json")
    custom = validate_settings({"geometry": {"caustic_epsilon": 1e-10}})
    assert save_settings(custom, path) is True
    assert load_settings(path)["geometry"]["caustic_epsilon"] == 1e-10


@pytest.mark.parametrize("twice_total,bits", [
    (0, 1024),
    (10, 1024),
    (64, 1024),
    (65, 2048),
    (1000, 16384),
])
def test_precision_for(twice_total, bits):
    assert precision_for(twice_total) == bits


def test_precision_for_custom_rounding():
    cfg = validate_settings({"precision": {"round_bits_to": 1, "min_bits": 100}})
    assert precision_for(3, cfg) == 100
    assert precision_for(100, cfg) == 1600
