"""
半经典渐近公式
小/大量子数混合极限下的 9j（一个或两个小量）、12j（两个小量）、15j（三个小量）
公式，以及作为几何校准基线的 Ponzano-Regge 6j 公式。

所有公式的值都写成 prefactor × cos(cosine_argument) × Π d_factors，
三个因子分别保存在 AsymResult.components 中，便于定位相位 / 几何 / d 矩阵的误差来源。
"""
import math
import logging
import functools
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Sequence, Tuple

from src.exact3nj import nine_j_permute_cols, nine_j_permute_rows
from src.geometry import (
    ACOS_TOLERANCE, CAUSTIC_EPSILON, CROSS_TOLERANCE, GeometryError, EdgeSet,
    angle_bundle, build_tetrahedron, triangle_theta,
)
from src.halfint import HalfInt, parse_halfint, phase_sign
from src.layouts import (
    NINE_J_ONE_SMALL, NINE_J_TWO_SMALL, TWELVE_J_TWO_SMALL, FIFTEEN_J_THREE_SMALL,
    PONZANO_REGGE, SymbolArgs, LayoutError, make_kind,
)
from src.wigner_d import DSpec, little_d

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AsymComponents:
    prefactor: float                 # 含整体相位符号
    cosine_argument: float
    d_factors: Tuple[float, ...] = ()

    @property
    def d_product(self) -> float:
        out = 1.0
        for f in self.d_factors:
            out *= f
        return out


@dataclass(frozen=True)
class AsymResult:
    value: Optional[float]
    volume: Optional[float]
    in_allowed_region: bool
    components: Optional[AsymComponents] = None
    note: str = ""

    def scaled(self, sign: int) -> "AsymResult":
        """整体乘以 ±1（9j 行列置换带来的符号）。"""
        if sign == 1 or self.components is None:
            return self
        comp = replace(self.components, prefactor=sign * self.components.prefactor)
        return replace(self, value=sign * self.value, components=comp)


def _geometry_options(settings: Optional[Dict[str, Any]]) -> Dict[str, float]:
    g = (settings or {}).get("geometry", {})
    return {
        "epsilon": float(g.get("caustic_epsilon", CAUSTIC_EPSILON)),
        "tol": float(g.get("acos_tolerance", ACOS_TOLERANCE)),
        "cross_tol": float(g.get("degenerate_cross_tolerance", CROSS_TOLERANCE)),
    }


def _args(kind: str, entries: Sequence[Any]) -> Dict[str, int]:
    """将 SymbolArgs / 序列 / 逐个传入的条目统一为 {role: 2j}。"""
    if len(entries) == 1 and not isinstance(entries[0], (HalfInt, str, int, float)):
        entries = entries[0]
    if isinstance(entries, SymbolArgs):
        entries = entries.entries
    return SymbolArgs.of(kind, entries).twice_map()


def _dim(t: int) -> int:
    return t + 1


def _d_factor(ts: int, twice_nu: int, twice_mu: int, theta: float) -> float:
    return little_d(DSpec(HalfInt(ts), twice_nu, twice_mu, theta))


def _check_index(ts: int, *twice_indices: int) -> None:
    # 构造 DSpec 即校验；在几何之前执行，保证 IndexOutOfRange 总是抛出
    for tv in twice_indices:
        DSpec(HalfInt(ts), tv, tv, 0.0)


def _psi_sum(bundle, t: Dict[str, int]) -> float:
    return sum((t[label] + 1) / 2.0 * psi for label, psi in bundle.psi.items())


def _finish(prefactor: float, arg: float, d_factors: Tuple[float, ...], volume: float) -> AsymResult:
    comp = AsymComponents(prefactor, arg, d_factors)
    return AsymResult(prefactor * math.cos(arg) * comp.d_product, volume, True, comp)


def _guarded(fn):
    """按 raise_on_failure 约定处理几何失败：抛出，或返回 in_allowed_region=False。"""
    @functools.wraps(fn)
    def wrapper(*entries, raise_on_failure: bool = True, settings: Optional[Dict[str, Any]] = None):
        try:
            return fn(*entries, settings=settings)
        except GeometryError as e:
            if raise_on_failure:
                raise
            logger.debug("%s: 不在允许区 (%s)", fn.__name__, e)
            return AsymResult(None, None, False, None, note=f"{type(e).__name__}: {e}")
    return wrapper


@_guarded
def asym_9j_one_small(*entries, settings=None) -> AsymResult:
    """
    一个小量 j3 = s 的 9j 渐近公式。

    条目顺序 (j1 j2 j12 / s j4 j34 / j13 j24 j5)；μ = j13 - j1，ν = j34 - j4。

    抛出:
        IndexOutOfRange: |μ| > s 或 |ν| > s
        NotClassicallyAllowed / DegenerateAngle: 几何失败（raise_on_failure=True 时）
    """
    t = _args(NINE_J_ONE_SMALL, entries)
    ts = t["s"]
    mu, nu = t["j13"] - t["j1"], t["j34"] - t["j4"]
    _check_index(ts, mu, nu)

    opts = _geometry_options(settings)
    edges = EdgeSet.from_quantum_numbers(NINE_J_ONE_SMALL, {k: HalfInt(v) for k, v in t.items()})
    config = build_tetrahedron(edges, opts["epsilon"])
    b = angle_bundle(config, NINE_J_ONE_SMALL, opts["tol"], opts["cross_tol"])

    sign = phase_sign(t["j1"] + t["j2"] + t["j4"] + t["j5"] + 2 * ts + nu)
    prefactor = sign / math.sqrt(_dim(t["j13"]) * _dim(t["j34"]) * 12.0 * math.pi * b.V)
    arg = _psi_sum(b, t) + math.pi / 4 - ts / 2.0 * math.pi + mu / 2.0 * b.phi1 + nu / 2.0 * b.phi4
    dfac = _d_factor(ts, nu, mu, b.theta)
    return _finish(prefactor, arg, (dfac,), b.V)


@_guarded
def asym_9j_two_small(*entries, settings=None) -> AsymResult:
    """
    两个小量 j2 = s2、j3 = s3 的 9j 公式，不含体积因子，只需 (J1, J4, J5) 构成三角形。

    条目顺序 (j1 s2 j12 / s3 j4 j34 / j13 j24 j5)。
    """
    t = _args(NINE_J_TWO_SMALL, entries)
    ts2, ts3 = t["s2"], t["s3"]
    nu2, mu2 = t["j12"] - t["j1"], t["j24"] - t["j4"]
    nu3, mu3 = t["j13"] - t["j1"], t["j34"] - t["j4"]
    _check_index(ts2, nu2, mu2)
    _check_index(ts3, nu3, mu3)

    theta = triangle_theta((t["j1"] + 1) / 2.0, (t["j4"] + 1) / 2.0, (t["j5"] + 1) / 2.0)
    sign = phase_sign(2 * (t["j4"] + t["j5"]) + ts2 + ts3 + t["j12"] + t["j13"])
    prefactor = sign / math.sqrt(_dim(t["j13"]) * _dim(t["j24"]) * _dim(t["j12"]) * _dim(t["j34"]))
    d2 = _d_factor(ts2, nu2, mu2, theta)
    d3 = _d_factor(ts3, nu3, mu3, theta)
    return _finish(prefactor, 0.0, (d2, d3), 0.0)


@_guarded
def asym_12j_two_small(*entries, settings=None) -> AsymResult:
    """
    两个小量 s1、s5 的第一类 12j 渐近公式。

    条目顺序 (s1 j2 j12 j125 / j3 j4 j34 j135 / j13 j24 s5 j6)。
    μ1 = j12 - j2，ν1 = j13 - j3，μ5 = j125 - j12，ν5 = j135 - j13。
    """
    t = _args(TWELVE_J_TWO_SMALL, entries)
    ts1, ts5 = t["s1"], t["s5"]
    mu1, nu1 = t["j12"] - t["j2"], t["j13"] - t["j3"]
    mu5, nu5 = t["j125"] - t["j12"], t["j135"] - t["j13"]
    _check_index(ts1, mu1, nu1)
    _check_index(ts5, mu5, nu5)

    opts = _geometry_options(settings)
    edges = EdgeSet.from_quantum_numbers(TWELVE_J_TWO_SMALL, {k: HalfInt(v) for k, v in t.items()})
    config = build_tetrahedron(edges, opts["epsilon"])
    b = angle_bundle(config, TWELVE_J_TWO_SMALL, opts["tol"], opts["cross_tol"])

    sign = phase_sign(t["j24"] + t["j34"] + t["j125"] + t["j135"] + ts1 + ts5 + nu1 + nu5)
    dims = _dim(t["j12"]) * _dim(t["j125"]) * _dim(t["j13"]) * _dim(t["j135"])
    prefactor = sign / math.sqrt(dims * 12.0 * math.pi * b.V)
    arg = (_psi_sum(b, t) + math.pi / 4 - (ts1 + ts5) / 2.0 * math.pi
           + (mu1 + mu5) / 2.0 * b.phi2 + (nu1 + nu5) / 2.0 * b.phi3)
    d1 = _d_factor(ts1, nu1, mu1, b.theta)
    d5 = _d_factor(ts5, nu5, mu5, b.theta)
    return _finish(prefactor, arg, (d1, d5), b.V)


@_guarded
def asym_15j_three_small(*entries, settings=None) -> AsymResult:
    """
    三个小量 s3、s5、s6 的第一类 15j 渐近公式。

    条目顺序 (j1 j2 j12 j125 j1256 / s3 j4 j34 j135 j1356 / j13 j24 s5 s6 j7)。
    """
    t = _args(FIFTEEN_J_THREE_SMALL, entries)
    ts3, ts5, ts6 = t["s3"], t["s5"], t["s6"]
    mu3, nu3 = t["j34"] - t["j4"], t["j13"] - t["j1"]
    mu5, nu5 = t["j125"] - t["j12"], t["j135"] - t["j13"]
    mu6, nu6 = t["j1256"] - t["j125"], t["j1356"] - t["j135"]
    _check_index(ts3, mu3, nu3)
    _check_index(ts5, mu5, nu5)
    _check_index(ts6, mu6, nu6)

    opts = _geometry_options(settings)
    edges = EdgeSet.from_quantum_numbers(FIFTEEN_J_THREE_SMALL, {k: HalfInt(v) for k, v in t.items()})
    config = build_tetrahedron(edges, opts["epsilon"])
    b = angle_bundle(config, FIFTEEN_J_THREE_SMALL, opts["tol"], opts["cross_tol"])

    sign = phase_sign(t["j1"] + t["j2"] + t["j4"] + t["j7"] + 2 * ts3 + nu3 + mu5 + mu6)
    dims = (_dim(t["j34"]) * _dim(t["j13"]) * _dim(t["j135"])
            * _dim(t["j1356"]) * _dim(t["j125"]) * _dim(t["j1256"]))
    prefactor = sign / math.sqrt(dims * 12.0 * math.pi * b.V)
    arg = (_psi_sum(b, t) + math.pi / 4 - ts3 / 2.0 * math.pi
           + mu3 / 2.0 * b.phi4p + nu3 / 2.0 * b.phi1p
           - (mu5 + mu6) / 2.0 * b.phi12_int - (nu5 + nu6) / 2.0 * b.phi1_int)
    d3 = _d_factor(ts3, nu3, mu3, b.theta1)
    d5 = _d_factor(ts5, nu5, mu5, b.theta2)
    d6 = _d_factor(ts6, nu6, mu6, b.theta2)
    return _finish(prefactor, arg, (d3, d5, d6), b.V)


@_guarded
def ponzano_regge_6j(*entries, settings=None) -> AsymResult:
    """cos(Σ J_i ψ_i + π/4) / sqrt(12πV)，6j 布局 {a b c; d e f}。"""
    t = _args(PONZANO_REGGE, entries)
    opts = _geometry_options(settings)
    edges = EdgeSet.from_quantum_numbers(PONZANO_REGGE, {k: HalfInt(v) for k, v in t.items()})
    config = build_tetrahedron(edges, opts["epsilon"])
    b = angle_bundle(config, PONZANO_REGGE, opts["tol"], opts["cross_tol"])
    prefactor = 1.0 / math.sqrt(12.0 * math.pi * b.V)
    return _finish(prefactor, _psi_sum(b, t) + math.pi / 4, (), b.V)


def asym_9j_one_small_at(entries: Sequence[Any], row: int, col: int,
                         raise_on_failure: bool = True, settings=None) -> AsymResult:
    """
    小量位于 9j 任意位置 (row, col)（从 0 计）时，经行列交换移到 (1, 0) 后求值。
    每次交换为奇置换，带 (-1)^{Σ 九个量子数} 的符号。
    """
    if not (0 <= row < 3 and 0 <= col < 3):
        raise LayoutError(f"9j 位置越界: ({row}, {col})")
    if isinstance(entries, SymbolArgs):
        entries = entries.entries
    cur = tuple(parse_halfint(e) for e in entries)
    sign = 1
    if row != 1:
        order = [0, 1, 2]
        order[row], order[1] = order[1], order[row]
        cur, s = nine_j_permute_rows(cur, order)
        sign *= s
    if col != 0:
        order = [0, 1, 2]
        order[col], order[0] = order[0], order[col]
        cur, s = nine_j_permute_cols(cur, order)
        sign *= s
    result = asym_9j_one_small(cur, raise_on_failure=raise_on_failure, settings=settings)
    return result.scaled(sign)


_EVALUATORS = {
    PONZANO_REGGE: ponzano_regge_6j,
    NINE_J_ONE_SMALL: asym_9j_one_small,
    NINE_J_TWO_SMALL: asym_9j_two_small,
    TWELVE_J_TWO_SMALL: asym_12j_two_small,
    FIFTEEN_J_THREE_SMALL: asym_15j_three_small,
}


def evaluate(kind: str, entries, raise_on_failure: bool = True, settings=None) -> AsymResult:
    """按渐近种类分派。"""
    kind = make_kind(kind)
    if kind not in _EVALUATORS:
        raise LayoutError(f"没有 {kind} 的渐近公式")
    return _EVALUATORS[kind](entries, raise_on_failure=raise_on_failure, settings=settings)
