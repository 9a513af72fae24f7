"""
精确 3nj 符号引擎
6j 由 Racah 单重求和以精确整数/有理数计算；9j、12j（第一类）、15j（第一类）
通过 6j 的缩并展开为若干精确项 (系数, 根号下有理数)，再在 mpmath 高精度下求和，
并通过精度加倍校验有效位数。

所有量子数在内部以 2j 的整数形式传递（变量名以 t 开头）。
"""
import math
import threading
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from mpmath import mp, mpf

from src.cache import SymbolCache
from src.halfint import HalfInt, parse_halfint, phase_sign
from src.layouts import (
    SIX_J, NINE_J, TWELVE_J, FIFTEEN_J, SymbolArgs, LayoutError, make_kind,
)
from src.settings import DEFAULT_SETTINGS, precision_for

logger = logging.getLogger(__name__)

# 精确项：value = coef * sqrt(rad)
Term = Tuple[Fraction, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)

_fact_table: List[int] = [1]
_fact_lock = threading.Lock()

# mpmath 的精度是全局状态，所有改动精度的区段都在此锁内执行
_mp_lock = threading.RLock()

_six_j_cache = SymbolCache()
_cache_enabled = True


class PrecisionError(ArithmeticError):
    """精度加倍若干次后仍无法达到要求的稳定位数"""
    pass


@contextmanager
def working_precision(bits: int):
    """在模块锁内临时设置 mpmath 工作精度（线程间互斥）。"""
    with _mp_lock, mp.workprec(bits):
        yield


@dataclass(frozen=True)
class ExactValue:
    """
    经精度校验的数值。

    value: mpmath 浮点数（携带 precision_bits 位尾数）
    precision_bits: 产生 value 的工作精度
    stable_digits: 精度加倍后保持不变的十进制位数；选择定则导致的精确零为 math.inf
    exact_zero: 是否为选择定则给出的精确零
    """
    value: Any
    precision_bits: int
    stable_digits: float
    exact_zero: bool = False

    def __float__(self) -> float:
        return float(self.value)

    def digits(self, n: Optional[int] = None) -> str:
        """以 n 位有效数字输出（默认输出全部稳定位）。"""
        if self.exact_zero or self.value == 0:
            return "0"
        if n is None:
            n = int(min(self.stable_digits, self.precision_bits * math.log10(2)))
        return mp.nstr(self.value, max(1, n), strip_zeros=False)

    def agrees_with(self, other: Union["ExactValue", Any], digits: int) -> bool:
        """两值在相对意义上前 digits 位是否一致（零值按绝对误差比较）。"""
        ov = other.value if isinstance(other, ExactValue) else other
        with working_precision(max(self.precision_bits, 64 + 4 * digits)):
            a, b = mpf(self.value), mpf(ov)
            scale = max(abs(a), abs(b))
            if scale == 0:
                return True
            return abs(a - b) <= scale * mpf(10) ** (-digits)


# ---------------------------------------------------------------------------
# 阶乘与三角选择定则
# ---------------------------------------------------------------------------

def factorial(n: int) -> int:
    """返回 n!，从按需增长的精确整数表中读取。"""
    if n < 0:
        raise ValueError(f"负数阶乘: {n}")
    table = _fact_table
    if n < len(table):
        return table[n]
    with _fact_lock:
        while len(_fact_table) <= n:
            _fact_table.append(_fact_table[-1] * len(_fact_table))
        return _fact_table[n]


def triad_ok_twice(ta: int, tb: int, tc: int) -> bool:
    return (ta + tb + tc) % 2 == 0 and abs(ta - tb) <= tc <= ta + tb


def triad_allowed(a: Any, b: Any, c: Any) -> bool:
    """
    三角选择定则：|a-b| <= c <= a+b 且 a+b+c 为整数。

    参数接受 HalfInt 或任何 parse_halfint 可解析的值。
    """
    return triad_ok_twice(parse_halfint(a).twice_value, parse_halfint(b).twice_value, parse_halfint(c).twice_value)


def _delta_sq(ta: int, tb: int, tc: int) -> Fraction:
    """三角系数的平方 (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!"""
    return Fraction(
        factorial((ta + tb - tc) // 2) * factorial((ta - tb + tc) // 2) * factorial((-ta + tb + tc) // 2),
        factorial((ta + tb + tc) // 2 + 1),
    )


def summation_range(pairs: Iterable[Tuple[int, int]]) -> range:
    """
    中间量 x 的取值范围（2x 单位，步长 2）。

    每对 (p, q) 要求 (p, q, x) 满足三角定则：|p-q| <= x <= p+q 且 p+q+x 为偶数。
    各对的奇偶性不一致或区间为空时返回空 range。
    """
    lo, hi, parity = 0, None, None
    for p, q in pairs:
        par = (p + q) % 2
        if parity is None:
            parity = par
        elif parity != par:
            return range(0)
        lo = max(lo, abs(p - q))
        hi = p + q if hi is None else min(hi, p + q)
    if hi is None or lo > hi:
        return range(0)
    return range(lo, hi + 1, 2)


# ---------------------------------------------------------------------------
# 6j
# ---------------------------------------------------------------------------

# 6j 的 24 种经典对称：3! 列置换 × 4 种（不换 / 任意两列上下互换）
_UPPER_LOWER_SWAPS = ((), (0, 1), (0, 2), (1, 2))


def _six_j_symmetries(t: Sequence[int]):
    cols = ((t[0], t[3]), (t[1], t[4]), (t[2], t[5]))
    for perm in permutations(range(3)):
        pc = [cols[i] for i in perm]
        for swap in _UPPER_LOWER_SWAPS:
            cc = [(lo, up) if i in swap else (up, lo) for i, (up, lo) in enumerate(pc)]
            yield (cc[0][0], cc[1][0], cc[2][0], cc[0][1], cc[1][1], cc[2][1])


def six_j_canonical_key(t: Sequence[int]) -> Tuple[int, ...]:
    """24 种对称下字典序最小的 2j 元组，作为缓存键。"""
    return min(_six_j_symmetries(tuple(t)))


def _six_j_raw(t: Sequence[int]) -> Term:
    """
    Racah 单重求和的精确结果 (S, R)，6j = S * sqrt(R)。

    求和项统一通分到 D = Π(tmax-a_i)! Π(b_k-tmin)!，相邻项权重按比值递推，全程整数运算。
    """
    ta, tb, tc, td, te, tf = t
    if not (triad_ok_twice(ta, tb, tc) and triad_ok_twice(ta, te, tf) and triad_ok_twice(td, tb, tf) and triad_ok_twice(td, te, tc)):
        return _ZERO, _ZERO

    alphas = ((ta + tb + tc) // 2, (ta + te + tf) // 2, (td + tb + tf) // 2, (td + te + tc) // 2)
    betas = ((ta + tb + td + te) // 2, (ta + tc + td + tf) // 2, (tb + tc + te + tf) // 2)
    tmin, tmax = max(alphas), min(betas)
    if tmin > tmax:
        return _ZERO, _ZERO

    denom = 1
    for a in alphas:
        denom *= factorial(tmax - a)
    for b in betas:
        denom *= factorial(b - tmin)

    weight = 1
    for a in alphas:
        weight *= factorial(tmax - a) // factorial(tmin - a)
    fac = factorial(tmin + 1)

    total = 0
    for k in range(tmin, tmax + 1):
        term = fac * weight
        total += -term if k % 2 else term
        if k < tmax:
            num = 1
            for b in betas:
                num *= b - k
            den = 1
            for a in alphas:
                den *= k + 1 - a
            weight = weight * num // den
            fac *= k + 2

    rad = _delta_sq(ta, tb, tc) * _delta_sq(ta, te, tf) * _delta_sq(td, tb, tf) * _delta_sq(td, te, tc)
    return Fraction(total, denom), rad


def _six_j_term(t: Sequence[int], use_cache: bool = True) -> Term:
    if not (use_cache and _cache_enabled):
        return _six_j_raw(t)
    key = six_j_canonical_key(t)
    return _six_j_cache.get_or_compute(key, lambda: _six_j_raw(key))


def configure_cache(max_entries: Optional[int] = None, enabled: bool = True) -> None:
    """设置 6j 缓存容量与开关（每个进程各自一份）。"""
    global _cache_enabled
    _cache_enabled = bool(enabled)
    _six_j_cache.resize(max_entries)
    logger.debug("6j 缓存: enabled=%s max_entries=%s", _cache_enabled, max_entries)


def clear_cache() -> None:
    _six_j_cache.clear()


def cache_metrics() -> Dict[str, int]:
    return _six_j_cache.get_metrics()


# ---------------------------------------------------------------------------
# 缩并：生成精确项列表
# ---------------------------------------------------------------------------

def _mul_terms(coef: Fraction, rad: Fraction, terms: Sequence[Term]) -> List[Term]:
    return [(coef * c, rad * r) for c, r in terms if c]


def _nine_j_terms(t: Sequence[int], use_cache: bool = True) -> List[Term]:
    """9j = Σ_x (-1)^{2x} [x] {a b c; f i x}{d e f; b x h}{g h i; x a d}"""
    ta, tb, tc, td, te, tf, tg, th, ti = t
    rows_cols = ((ta, tb, tc), (td, te, tf), (tg, th, ti), (ta, td, tg), (tb, te, th), (tc, tf, ti))
    if not all(triad_ok_twice(*tri) for tri in rows_cols):
        return []

    xs = summation_range(((ta, ti), (tb, tf), (td, th)))
    logger.debug("9j 求和范围: %s 项", len(xs))
    terms: List[Term] = []
    for tx in xs:
        s1, r1 = _six_j_term((ta, tb, tc, tf, ti, tx), use_cache)
        if not s1:
            continue
        s2, r2 = _six_j_term((td, te, tf, tb, tx, th), use_cache)
        if not s2:
            continue
        s3, r3 = _six_j_term((tg, th, ti, tx, ta, td), use_cache)
        if not s3:
            continue
        sign = -1 if tx % 2 else 1
        terms.append((sign * (tx + 1) * s1 * s2 * s3, r1 * r2 * r3))
    return terms


def _twelve_j_terms(t: Sequence[int], use_cache: bool = True) -> List[Term]:
    """
    12j（第一类）对 x 的缩并：
    Σ_x (-1)^{2s5+j12+j34+j13+j24+2j6} [x] {s5 j12 j125; j34 j6 x}{s5 j13 j135; j24 j6 x}
        · 9j{s1 j2 j12; j3 j4 j34; j13 j24 x}
    """
    s1, j2, j12, j125, j3, j4, j34, j135, j13, j24, s5, j6 = t
    triads = ((s1, j2, j12), (j3, j4, j34), (s5, j12, j125), (j125, j34, j6),
              (s1, j3, j13), (j2, j4, j24), (s5, j13, j135), (j135, j24, j6))
    if not all(triad_ok_twice(*tri) for tri in triads):
        return []

    xs = summation_range(((s5, j6), (j12, j34), (j13, j24)))
    if not xs:
        return []
    sign = phase_sign(2 * s5 + j12 + j34 + j13 + j24 + 2 * j6)

    terms: List[Term] = []
    for tx in xs:
        a, ra = _six_j_term((s5, j12, j125, j34, j6, tx), use_cache)
        if not a:
            continue
        b, rb = _six_j_term((s5, j13, j135, j24, j6, tx), use_cache)
        if not b:
            continue
        inner = _nine_j_terms((s1, j2, j12, j3, j4, j34, j13, j24, tx), use_cache)
        terms.extend(_mul_terms(sign * (tx + 1) * a * b, ra * rb, inner))
    return terms


def _fifteen_j_terms(t: Sequence[int], use_cache: bool = True) -> List[Term]:
    """
    15j（第一类）对 (x, y) 的缩并：
    Σ_{x,y} (-1)^E [x][y] {s6 j125 j1256; j34 j7 y}{s5 j12 j125; j34 y x}
        · 9j{j1 j2 j12; s3 j4 j34; j13 j24 x} · {s5 j13 j135; j24 y x}{s6 j135 j1356; j24 j7 y}
    """
    (j1, j2, j12, j125, j1256,
     s3, j4, j34, j135, j1356,
     j13, j24, s5, s6, j7) = t
    triads = ((j1, j2, j12), (s3, j4, j34), (s5, j12, j125), (s6, j125, j1256), (j1256, j34, j7),
              (j1, s3, j13), (j2, j4, j24), (s5, j13, j135), (s6, j135, j1356), (j1356, j24, j7))
    if not all(triad_ok_twice(*tri) for tri in triads):
        return []

    terms: List[Term] = []
    for ty in summation_range(((s6, j7), (j34, j125), (j24, j135))):
        c, rc = _six_j_term((s6, j125, j1256, j34, j7, ty), use_cache)
        if not c:
            continue
        d, rd = _six_j_term((s6, j135, j1356, j24, j7, ty), use_cache)
        if not d:
            continue
        for tx in summation_range(((s5, ty), (j34, j12), (j24, j13))):
            a, ra = _six_j_term((s5, j12, j125, j34, ty, tx), use_cache)
            if not a:
                continue
            b, rb = _six_j_term((s5, j13, j135, j24, ty, tx), use_cache)
            if not b:
                continue
            exponent = ((s6 + j125 + j34 + j7) + (s5 + j12 + j34 + ty)
                        + (s5 + j13 + j24 + ty) + (s6 + j135 + j24 + j7))
            sign = phase_sign(exponent)
            inner = _nine_j_terms((j1, j2, j12, s3, j4, j34, j13, j24, tx), use_cache)
            weight = sign * (tx + 1) * (ty + 1) * a * b * c * d
            terms.extend(_mul_terms(weight, ra * rb * rc * rd, inner))
    return terms


# ---------------------------------------------------------------------------
# 高精度求和与校验
# ---------------------------------------------------------------------------

def _sum_terms(terms: Sequence[Term], prec: int):
    with working_precision(prec):
        total = mpf(0)
        biggest = mpf(0)
        for coef, rad in terms:
            v = (mpf(coef.numerator) / coef.denominator) * mp.sqrt(mpf(rad.numerator) / rad.denominator)
            total += v
            biggest = max(biggest, abs(v))
        return +total, +biggest


def _stable_digits(v1, v2, prec: int) -> float:
    cap = math.floor(prec * math.log10(2))
    with working_precision(2 * prec):
        if v1 == v2:
            return cap
        rel = abs(mpf(v1) - mpf(v2)) / abs(mpf(v2))
        if rel == 0:
            return cap
        return min(cap, math.floor(float(-mp.log10(rel))))


def certify_terms(
    terms: Sequence[Term],
    twice_total: int,
    precision_bits: Optional[int] = None,
    settings: Optional[Dict[str, Any]] = None,
) -> ExactValue:
    """
    对精确项求和并做精度加倍校验。

    参数:
        terms: (coef, rad) 列表
        twice_total: Σ2j，用于确定默认精度
        precision_bits: 起始精度；None 时按设置计算
        settings: 设置字典（默认 DEFAULT_SETTINGS）

    返回:
        ExactValue

    抛出:
        PrecisionError: 加倍 max_doublings 次后仍不足 min_stable_digits 位
    """
    settings = settings or DEFAULT_SETTINGS
    pset = settings["precision"]
    prec = int(precision_bits) if precision_bits else precision_for(twice_total, settings)

    if not terms:
        return ExactValue(mpf(0), prec, math.inf, exact_zero=True)

    need = int(pset["min_stable_digits"])
    for attempt in range(int(pset["max_doublings"]) + 1):
        v1, biggest = _sum_terms(terms, prec)
        v2, _ = _sum_terms(terms, 2 * prec)
        # 数值零：相消到工作精度以下
        with working_precision(2 * prec):
            if abs(v2) <= biggest * mpf(2) ** (-(prec - 16)):
                logger.debug("数值零（项间完全相消），精度 %d", prec)
                return ExactValue(mpf(0), prec, math.floor(prec * math.log10(2)))
        digits = _stable_digits(v1, v2, prec)
        if digits >= need:
            return ExactValue(v1, prec, digits)
        logger.debug("稳定位数不足 (%s < %d)，精度加倍: %d -> %d", digits, need, prec, 2 * prec)
        prec *= 2
    raise PrecisionError(f"精度提升到 {prec} 位后仍不足 {need} 位稳定数字")


# ---------------------------------------------------------------------------
# 公共接口
# ---------------------------------------------------------------------------

def _coerce(kind: str, args: Union[SymbolArgs, Iterable[Any]]) -> SymbolArgs:
    if isinstance(args, SymbolArgs):
        if args.kind != kind:
            args = args.with_kind(kind)
        return args
    return SymbolArgs.of(kind, args)


def six_j_exact_squared(args: Union[SymbolArgs, Iterable[Any]], use_cache: bool = True) -> Tuple[int, Fraction]:
    """
    6j 的精确形式：返回 (sign, Q)，使 6j = sign * sqrt(Q)。
    选择定则不满足时返回 (0, 0)。
    """
    t = _coerce(SIX_J, args).twice()
    s, r = _six_j_term(t, use_cache)
    if not s:
        return 0, _ZERO
    return (1 if s > 0 else -1), s * s * r


def six_j(args, precision_bits: Optional[int] = None, use_cache: bool = True,
          settings: Optional[Dict[str, Any]] = None) -> ExactValue:
    """6j 符号 {a b c; d e f}"""
    sa = _coerce(SIX_J, args)
    t = sa.twice()
    s, r = _six_j_term(t, use_cache)
    terms = [(s, r)] if s else []
    return certify_terms(terms, sum(t), precision_bits, settings)


def nine_j(args, precision_bits: Optional[int] = None, use_cache: bool = True,
           settings: Optional[Dict[str, Any]] = None) -> ExactValue:
    """9j 符号，布局 (j1 j2 j12 / j3 j4 j34 / j13 j24 j5)"""
    t = _coerce(NINE_J, args).twice()
    return certify_terms(_nine_j_terms(t, use_cache), sum(t), precision_bits, settings)


def twelve_j_first(args, precision_bits: Optional[int] = None, use_cache: bool = True,
                   settings: Optional[Dict[str, Any]] = None) -> ExactValue:
    """第一类 12j 符号，布局 (s1 j2 j12 j125 / j3 j4 j34 j135 / j13 j24 s5 j6)"""
    t = _coerce(TWELVE_J, args).twice()
    return certify_terms(_twelve_j_terms(t, use_cache), sum(t), precision_bits, settings)


def fifteen_j_first(args, precision_bits: Optional[int] = None, use_cache: bool = True,
                    settings: Optional[Dict[str, Any]] = None) -> ExactValue:
    """第一类 15j 符号，布局 (j1 j2 j12 j125 j1256 / s3 j4 j34 j135 j1356 / j13 j24 s5 s6 j7)"""
    t = _coerce(FIFTEEN_J, args).twice()
    return certify_terms(_fifteen_j_terms(t, use_cache), sum(t), precision_bits, settings)


_EVALUATORS = {
    SIX_J: six_j,
    NINE_J: nine_j,
    TWELVE_J: twelve_j_first,
    FIFTEEN_J: fifteen_j_first,
}


def evaluate(kind: str, entries, **kwargs) -> ExactValue:
    """按种类分派到对应的精确符号。"""
    kind = make_kind(kind)
    if kind not in _EVALUATORS:
        raise LayoutError(f"没有 {kind} 的精确算法")
    return _EVALUATORS[kind](entries, **kwargs)


# ---------------------------------------------------------------------------
# 9j 对称操作
# ---------------------------------------------------------------------------

def _nine_j_sign(entries: Sequence[HalfInt]) -> int:
    total = sum(parse_halfint(e).twice_value for e in entries)
    # 选择定则不满足时符号无意义（值为零）
    return phase_sign(total) if total % 2 == 0 else 1


def nine_j_transpose(entries: Sequence[Any]) -> Tuple[HalfInt, ...]:
    e = [parse_halfint(x) for x in entries]
    if len(e) != 9:
        raise LayoutError("9j 需要 9 个条目")
    return tuple(e[3 * c + r] for r in range(3) for c in range(3))


def nine_j_permute_rows(entries: Sequence[Any], order: Sequence[int]) -> Tuple[Tuple[HalfInt, ...], int]:
    """
    按 order 重排 9j 的行，返回 (新条目, 符号)。奇置换带 (-1)^{Σ 全部九个量子数}。
    """
    e = [parse_halfint(x) for x in entries]
    if len(e) != 9 or sorted(order) != [0, 1, 2]:
        raise LayoutError("9j 行置换参数非法")
    out = tuple(e[3 * r + c] for r in order for c in range(3))
    return out, (_nine_j_sign(e) if _is_odd(order) else 1)


def nine_j_permute_cols(entries: Sequence[Any], order: Sequence[int]) -> Tuple[Tuple[HalfInt, ...], int]:
    e = [parse_halfint(x) for x in entries]
    if len(e) != 9 or sorted(order) != [0, 1, 2]:
        raise LayoutError("9j 列置换参数非法")
    out = tuple(e[3 * r + c] for r in range(3) for c in order)
    return out, (_nine_j_sign(e) if _is_odd(order) else 1)


def _is_odd(order: Sequence[int]) -> bool:
    inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if order[i] > order[j])
    return inversions % 2 == 1
