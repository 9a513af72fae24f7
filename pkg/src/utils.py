# 工具函数模块
"""
通用工具函数
包含数值格式化、布尔值读写、简单校验等可复用的小功能
"""
import math
from typing import Any, Optional, Tuple


def format_number(value: Optional[float], digits: int = 17) -> str:
    """
    将浮点数格式化为 digits 位有效数字（17 位可保证 double 往返无损）。
    None 输出空字符串；nan/inf 按 Python 约定输出。

    参数:
        value (float|None): 数值
        digits (int): 有效数字位数

    返回:
        str: 格式化后的文本
    """
    if value is None:
        return ""
    return format(float(value), f".{int(digits)}g")


def parse_number(text: str) -> Optional[float]:
    """format_number 的逆操作，空字符串返回 None。"""
    if text is None:
        return None
    s = str(text).strip()
    if not s:
        return None
    return float(s)


def format_bool(flag: bool) -> str:
    return "true" if flag else "false"


def parse_bool(text: Any) -> bool:
    """接受 true/false、1/0、yes/no（不区分大小写）。"""
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("true", "1", "yes", "y"):
        return True
    if s in ("false", "0", "no", "n", ""):
        return False
    raise ValueError(f"无法解析布尔值: {text!r}")


def ensure_positive_int(value, name: str = "value") -> Tuple[bool, Optional[int], Optional[str]]:
    """
    验证输入可转换为正整数并返回结果、整数值与错误信息。

    返回:
        (ok: bool, int_value: int|None, error: str|None)
    """
    if value is None:
        return False, None, f"{name} 不能为空"
    if isinstance(value, bool):
        return False, None, f"{name} 必须是整数"
    try:
        iv = int(value)
    except (ValueError, TypeError):
        return False, None, f"{name} 必须是整数"
    if iv <= 0:
        return False, None, f"{name} 必须是正整数 (>0)"
    return True, iv, None


def relative_error(approx: Optional[float], exact: Optional[float]) -> Optional[float]:
    """|approx - exact| / |exact|；exact 为 0 或任一值缺失时返回 None。"""
    if approx is None or exact is None or exact == 0 or not math.isfinite(exact):
        return None
    return abs(approx - exact) / abs(exact)


def format_summary(summary) -> str:
    """
    将 ErrorSummary 格式化为多行文本报告（适合打印或日志）。
    """
    def _stats_lines(title: str, st) -> list:
        if st is None or st.count == 0:
            return [f"{title}: 无数据"]
        rel = "N/A" if st.relative_rms is None else format_number(st.relative_rms, 6)
        return [
            f"{title}: {st.count} 行",
            f"  最大绝对误差: {format_number(st.max_abs_err, 6)}",
            f"  RMS 误差:     {format_number(st.rms_err, 6)}",
            f"  RMS 精确值:   {format_number(st.rms_exact, 6)}",
            f"  相对 RMS:     {rel}",
            f"  最大 |精确值|: {format_number(st.max_abs_exact, 6)}",
        ]

    lines = [f"总行数: {summary.total_rows}（允许区 {summary.allowed_rows}）"]
    if summary.max_volume is not None:
        lines.append(f"最大体积: {format_number(summary.max_volume, 6)}，体积下限比例: {summary.volume_floor_fraction}")
    lines += _stats_lines("体积下限以上", summary.floor)
    lines += _stats_lines("全部允许行", summary.all_allowed)
    if summary.caustic_adjacent:
        lines.append("焦散线附近: " + ", ".join(summary.caustic_adjacent))
    if summary.forbidden:
        lines.append("不在允许区: " + ", ".join(summary.forbidden))
    return "\n".join(lines)
