import os
import copy
import json
import logging
from typing import Dict, Any, Optional

logger = logging.getLogger(__name__)

# 默认设置
DEFAULT_SETTINGS = {
    "precision": {
        "min_bits": 256,
        "bits_per_twice_j": 16,
        "round_bits_to": 1024,   # 向上取整，便于扫描时相邻点复用
        "min_stable_digits": 30,
        "max_doublings": 4,
    },
    "cache": {
        "enabled": True,
        "max_entries": None,     # None 表示不限容量
    },
    "geometry": {
        "caustic_epsilon": 1e-12,
        "acos_tolerance": 1e-12,
        "degenerate_cross_tolerance": 1e-12,
    },
    "harness": {
        "volume_floor_fraction": 0.5,
        "workers": 1,
        "significant_digits": 17,
    },
}

CONFIG_DIR = "config"
SETTINGS_FILE = os.path.join(CONFIG_DIR, "settings.json")
SETTINGS_ENV = "WIGNER_SETTINGS"

# 每个数值字段的 (类型, 下限, 上限)
_NUMERIC_RANGES = {
    ("precision", "min_bits"): (int, 53, 1 << 20),
    ("precision", "bits_per_twice_j"): (int, 1, 1024),
    ("precision", "round_bits_to"): (int, 1, 1 << 16),
    ("precision", "min_stable_digits"): (int, 1, 1000),
    ("precision", "max_doublings"): (int, 0, 10),
    ("geometry", "caustic_epsilon"): (float, 0.0, 1e-3),
    ("geometry", "acos_tolerance"): (float, 0.0, 1e-3),
    ("geometry", "degenerate_cross_tolerance"): (float, 0.0, 1e-3),
    ("harness", "volume_floor_fraction"): (float, 0.0, 1.0),
    ("harness", "workers"): (int, 1, 256),
    ("harness", "significant_digits"): (int, 1, 40),
}


def _settings_path() -> str:
    return os.environ.get(SETTINGS_ENV) or SETTINGS_FILE


def defaults() -> Dict[str, Any]:
    return copy.deepcopy(DEFAULT_SETTINGS)


def ensure_config_dir(path: Optional[str] = None) -> bool:
    """确保配置目录存在"""
    d = os.path.dirname(path or _settings_path()) or "."
    if not os.path.exists(d):
        try:
            os.makedirs(d, exist_ok=True)
            logger.info("创建配置目录: %s", d)
        except Exception as e:
            logger.error("无法创建配置目录 %s: %s", d, e)
            return False
    return True


def load_settings(path: Optional[str] = None) -> Dict[str, Any]:
    """加载设置文件，不存在或损坏时返回默认值；缺失字段用默认值补齐"""
    path = path or _settings_path()
    if not os.path.exists(path):
        logger.debug("设置文件不存在，使用默认配置: %s", path)
        return defaults()

    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except Exception as e:
        logger.error("加载设置文件失败 %s: %s", path, e)
        return defaults()

    if not isinstance(raw, dict):
        logger.error("设置文件格式错误（顶层应为对象）: %s", path)
        return defaults()

    merged = defaults()
    for group, values in raw.items():
        if group in merged and isinstance(values, dict):
            merged[group].update(values)
        else:
            logger.debug("忽略未知设置分组: %s", group)
    logger.info("成功加载设置文件: %s", path)
    return merged


def save_settings(settings: Dict[str, Any], path: Optional[str] = None) -> bool:
    """保存设置到文件"""
    path = path or _settings_path()
    if not ensure_config_dir(path):
        return False
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(settings, f, indent=2, ensure_ascii=False)
        logger.info("设置已保存至: %s", path)
        return True
    except Exception as e:
        logger.error("保存设置失败: %s", e)
        return False


def validate_settings(settings: Dict[str, Any]) -> Dict[str, Any]:
    """验证并修复设置，数值夹到合理范围，非法值回退为默认值；不抛异常"""
    valid = defaults()
    if not isinstance(settings, dict):
        return valid

    for (group, key), (typ, lo, hi) in _NUMERIC_RANGES.items():
        try:
            v = settings.get(group, {}).get(key)
        except AttributeError:
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            continue
        v = typ(v)
        valid[group][key] = max(lo, min(hi, v))

    cache = settings.get("cache")
    if isinstance(cache, dict):
        if "enabled" in cache:
            valid["cache"]["enabled"] = bool(cache["enabled"])
        m = cache.get("max_entries")
        if isinstance(m, int) and not isinstance(m, bool) and m > 0:
            valid["cache"]["max_entries"] = m
    return valid


def get_effective_settings(overrides: Optional[Dict[str, Any]] = None, path: Optional[str] = None) -> Dict[str, Any]:
    """获取有效设置：文件值 + 覆盖参数（按分组逐键合并）后校验"""
    base = load_settings(path)
    if not overrides:
        return validate_settings(base)

    merged = copy.deepcopy(base)
    for group, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(group), dict):
            merged[group].update(value)
        else:
            merged[group] = value
    return validate_settings(merged)


def create_default_settings_if_missing(path: Optional[str] = None) -> bool:
    """如果设置文件不存在，写入默认值"""
    path = path or _settings_path()
    if os.path.exists(path):
        return False
    return save_settings(DEFAULT_SETTINGS, path)


def precision_for(twice_total: int, settings: Optional[Dict[str, Any]] = None) -> int:
    """
    按量子数规模确定工作精度（比特）。

    precision_bits = max(min_bits, bits_per_twice_j * Σ2j)，再向上取整到 round_bits_to 的倍数。
    默认 round_bits_to=1024 大于 min_bits，因此实际精度下限是 1024 位而不是 256 位。
    """
    p = (settings or DEFAULT_SETTINGS)["precision"]
    bits = max(int(p["min_bits"]), int(p["bits_per_twice_j"]) * max(0, int(twice_total)))
    step = max(1, int(p["round_bits_to"]))
    return -(-bits // step) * step
