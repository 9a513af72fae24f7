"""
Wigner 小 d 矩阵 d^s_{νμ}(θ)，用于小自旋 s。
约定：d^s_{νμ}(θ) = <s ν| exp(+iθJ_y) |s μ>，即常见教科书矩阵元的转置
（等价于 θ -> -θ）。d^s(0) = I，且 d^s_{νμ}(θ) = (-1)^{μ-ν} d^s_{μν}(θ)。
"""
import math
import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.halfint import HalfInt, parse_halfint

logger = logging.getLogger(__name__)


class IndexOutOfRange(ValueError):
    """|ν| > s、|μ| > s，或 s-ν、s-μ 不是整数"""
    pass


def _signed_twice(value: Any) -> int:
    """投影量子数可为负，按绝对值解析后恢复符号。"""
    if isinstance(value, HalfInt):
        return value.twice_value
    if isinstance(value, str):
        text = value.strip()
        neg = text.startswith("-")
        body = text[1:] if neg else text
    else:
        neg = value < 0
        body = -value if neg else value
    tv = parse_halfint(body).twice_value
    return -tv if neg else tv


@dataclass(frozen=True)
class DSpec:
    """d 矩阵元参数，nu/mu 以 2ν、2μ 存储。"""
    s: HalfInt
    twice_nu: int
    twice_mu: int
    theta: float

    def __post_init__(self):
        s = parse_halfint(self.s)
        object.__setattr__(self, "s", s)
        ts = s.twice_value
        for name, tv in (("nu", self.twice_nu), ("mu", self.twice_mu)):
            if abs(tv) > ts:
                raise IndexOutOfRange(f"|{name}|={abs(tv)}/2 超出 s={s}")
            if (ts - tv) % 2:
                raise IndexOutOfRange(f"s-{name} 不是整数: s={s}, {name}={tv}/2")

    @classmethod
    def of(cls, s: Any, nu: Any, mu: Any, theta: float) -> "DSpec":
        return cls(parse_halfint(s), _signed_twice(nu), _signed_twice(mu), float(theta))


def _d_twice(ts: int, tn: int, tm: int, theta: float) -> float:
    # 教科书形式 <m'|exp(-iθJ_y)|m> 的阶乘求和（2j 单位），tn 对应 m'，tm 对应 m
    jpn, jmn = (ts + tn) // 2, (ts - tn) // 2
    jpm, jmm = (ts + tm) // 2, (ts - tm) // 2
    shift = (tm - tn) // 2          # m - m'
    norm = math.sqrt(math.factorial(jpn) * math.factorial(jmn) * math.factorial(jpm) * math.factorial(jmm))
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)

    total = 0.0
    for k in range(max(0, shift), min(jpm, jmn) + 1):
        denom = (math.factorial(jpm - k) * math.factorial(k)
                 * math.factorial(jmn - k) * math.factorial(k - shift))
        sign = -1.0 if (k - shift) % 2 else 1.0
        total += sign * norm / denom * c ** (ts + shift - 2 * k) * s ** (2 * k - shift)
    return total


def little_d(spec: DSpec) -> float:
    """
    返回 d^s_{νμ}(θ)。

    抛出:
        IndexOutOfRange: 由 DSpec 构造时检查
    """
    return _d_twice(spec.s.twice_value, spec.twice_mu, spec.twice_nu, spec.theta)


def d(s: Any, nu: Any, mu: Any, theta: float) -> float:
    """little_d 的便捷形式，nu、mu 可为负的半整数（如 "-1/2"、-0.5）。"""
    return little_d(DSpec.of(s, nu, mu, theta))


def d_matrix(s: Any, theta: float) -> np.ndarray:
    """
    整个 (2s+1)×(2s+1) 矩阵，第 i 行/列对应投影 s - i。
    """
    ts = parse_halfint(s).twice_value
    dim = ts + 1
    out = np.empty((dim, dim), dtype=float)
    for i in range(dim):
        for k in range(dim):
            out[i, k] = _d_twice(ts, ts - 2 * k, ts - 2 * i, theta)
    return out
