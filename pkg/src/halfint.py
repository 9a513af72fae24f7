"""
半整数量子数
以 2j 的整数形式精确存储角动量量子数，并提供解析与相位符号工具。
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable

logger = logging.getLogger(__name__)


class HalfIntError(ValueError):
    """输入不是非负半整数（不属于 (1/2)Z 或为负）"""
    pass


class PhaseError(ArithmeticError):
    """(-1)^x 的指数不是整数（通常意味着布局或选择定则出错）"""
    pass


@dataclass(frozen=True, order=True)
class HalfInt:
    """非负半整数 j，字段 twice_value = 2j。"""
    twice_value: int

    def __post_init__(self):
        if isinstance(self.twice_value, bool) or not isinstance(self.twice_value, int):
            raise HalfIntError(f"twice_value 必须是整数: {self.twice_value!r}")
        if self.twice_value < 0:
            raise HalfIntError(f"量子数不能为负: {self.twice_value}/2")

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    @property
    def dimension(self) -> int:
        """2j+1"""
        return self.twice_value + 1

    @property
    def edge_length(self) -> float:
        """半经典边长 J = j + 1/2"""
        return (self.twice_value + 1) / 2.0

    def __float__(self) -> float:
        return self.twice_value / 2.0

    def __str__(self) -> str:
        if self.twice_value % 2 == 0:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"

    def __repr__(self) -> str:
        return f"HalfInt({self})"


def parse_halfint(text: Any) -> HalfInt:
    """
    将用户输入解析为 HalfInt。

    支持 "51/2"、"25.5"、"3"，以及 int / Fraction / float / HalfInt。

    抛出:
        HalfIntError: 输入无法解析、不在 (1/2)Z 中或为负数
    """
    if isinstance(text, HalfInt):
        return text
    if isinstance(text, bool):
        raise HalfIntError(f"无法解析为半整数: {text!r}")
    try:
        if isinstance(text, (int, Fraction)):
            frac = Fraction(text)
        elif isinstance(text, float):
            frac = Fraction(text).limit_denominator(2)
            if float(frac) != text:
                raise HalfIntError(f"不是半整数: {text!r}")
        elif isinstance(text, str):
            s = text.strip()
            if not s:
                raise HalfIntError("空字符串不是半整数")
            frac = Fraction(s)
        else:
            raise HalfIntError(f"不支持的类型: {type(text).__name__}")
    except (ValueError, ZeroDivisionError) as e:
        if isinstance(e, HalfIntError):
            raise
        raise HalfIntError(f"无法解析为半整数: {text!r}") from e

    twice = 2 * frac
    if twice.denominator != 1:
        raise HalfIntError(f"不是半整数: {text!r}")
    return HalfInt(int(twice))


def parse_halfint_list(text: str) -> list:
    """解析逗号或空白分隔的半整数列表，如 "51/2,53/2,28"。"""
    if not isinstance(text, str):
        raise HalfIntError("entries 必须是字符串")
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise HalfIntError("entries 为空")
    return [parse_halfint(p) for p in parts]


def as_twice(value: Any) -> int:
    """返回任意可解析输入的 2j。"""
    return parse_halfint(value).twice_value


def phase_sign(twice_exponent: int) -> int:
    """
    计算 (-1)^x，其中 x = twice_exponent / 2。

    抛出:
        PhaseError: 当 x 不是整数
    """
    if twice_exponent % 2 != 0:
        raise PhaseError(f"相位指数不是整数: {twice_exponent}/2")
    return -1 if (twice_exponent // 2) % 2 else 1


def twice_sum(values: Iterable[Any]) -> int:
    return sum(as_twice(v) for v in values)
