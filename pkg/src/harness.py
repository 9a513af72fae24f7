"""
扫描与误差统计
固定符号的其余条目，让一个自由量子数遍历其选择定则允许的范围，逐点计算精确值与渐近值，
并汇总误差统计、输出 CSV。
"""
import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src import asymptotics, exact3nj, storage
from src.geometry import EdgeSet, is_classically_allowed
from src.halfint import HalfInt, HalfIntError, PhaseError, parse_halfint
from src.layouts import (
    ASYM_KINDS, EXACT_FOR, NINE_J_TWO_SMALL, ROLES, TRIADS, SymbolArgs, LayoutError, make_kind,
)
from src.settings import DEFAULT_SETTINGS
from src.utils import format_bool, format_number, parse_bool, parse_number
from src.wigner_d import IndexOutOfRange

logger = logging.getLogger(__name__)


class InvalidSpec(ValueError):
    """扫描规格不合法（种类、角色或范围）"""
    pass


class EmptyInput(ValueError):
    """误差统计的输入为空"""
    pass


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    fixed: Mapping[str, HalfInt]
    free_role: str
    range: Optional[Tuple[HalfInt, HalfInt]] = None
    precision_bits: Optional[int] = None

    def __post_init__(self):
        try:
            kind = make_kind(self.kind)
        except (LayoutError, TypeError) as e:
            raise InvalidSpec(str(e)) from e
        if kind not in ASYM_KINDS:
            raise InvalidSpec(f"{kind} 不能用于扫描（可用: {', '.join(ASYM_KINDS)}）")
        roles = ROLES[kind]
        if self.free_role not in roles:
            raise InvalidSpec(f"{kind} 没有角色 {self.free_role!r}")
        try:
            fixed = {k: parse_halfint(v) for k, v in self.fixed.items()}
        except HalfIntError as e:
            raise InvalidSpec(str(e)) from e
        unknown = set(fixed) - set(roles)
        if unknown:
            raise InvalidSpec(f"{kind} 没有角色: {sorted(unknown)}")
        if self.free_role in fixed:
            raise InvalidSpec(f"自由角色 {self.free_role} 不能同时被固定")
        missing = [r for r in roles if r != self.free_role and r not in fixed]
        if missing:
            raise InvalidSpec(f"缺少固定值: {missing}")
        rng = None
        if self.range is not None:
            lo, hi = (parse_halfint(x) for x in self.range)
            if lo > hi:
                raise InvalidSpec(f"范围下限大于上限: {lo}:{hi}")
            rng = (lo, hi)
        if self.precision_bits is not None and int(self.precision_bits) <= 0:
            raise InvalidSpec("precision_bits 必须为正")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "range", rng)

    def entries_at(self, twice_free: int) -> SymbolArgs:
        values = dict(self.fixed)
        values[self.free_role] = HalfInt(twice_free)
        return SymbolArgs.from_roles(self.kind, values)


@dataclass
class ComparisonRow:
    free_value: HalfInt
    exact: float
    asym: Optional[float] = None
    abs_err: Optional[float] = None
    volume: Optional[float] = None
    allowed: bool = False
    note: str = field(default="", compare=False)
    exact_text: str = field(default="", compare=False)


@dataclass
class ErrorStats:
    count: int
    max_abs_err: Optional[float] = None
    rms_err: Optional[float] = None
    rms_exact: Optional[float] = None
    relative_rms: Optional[float] = None
    max_abs_exact: Optional[float] = None


@dataclass
class ErrorSummary:
    total_rows: int
    allowed_rows: int
    volume_floor_fraction: float
    max_volume: Optional[float]
    floor: ErrorStats
    all_allowed: ErrorStats
    caustic_adjacent: List[str] = field(default_factory=list)
    forbidden: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def parse_fixed(text: str) -> Dict[str, HalfInt]:
    """解析 "j1=51/2,j2=53/2,..." 形式的固定值。"""
    out: Dict[str, HalfInt] = {}
    if not isinstance(text, str) or not text.strip():
        raise InvalidSpec("--fixed 不能为空")
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InvalidSpec(f"固定值格式应为 role=value: {part!r}")
        role, value = (x.strip() for x in part.split("=", 1))
        if role in out:
            raise InvalidSpec(f"角色重复: {role}")
        try:
            out[role] = parse_halfint(value)
        except HalfIntError as e:
            raise InvalidSpec(str(e)) from e
    return out


def parse_range(text: Optional[str]) -> Optional[Tuple[HalfInt, HalfInt]]:
    """解析 "a:b"；None 或空字符串表示使用完整允许范围。"""
    if text is None or not str(text).strip():
        return None
    if ":" not in text:
        raise InvalidSpec(f"范围格式应为 a:b: {text!r}")
    lo, hi = text.split(":", 1)
    try:
        return parse_halfint(lo), parse_halfint(hi)
    except HalfIntError as e:
        raise InvalidSpec(str(e)) from e


def allowed_range(kind: str, fixed: Mapping[str, Any], free_role: str) -> range:
    """
    自由角色在选择定则下的取值（2j 单位，步长 2）。

    与自由角色同在的每个三元组给出一对约束；不含自由角色的三元组若不满足定则，结果为空。
    """
    kind = make_kind(kind)
    t = {k: parse_halfint(v).twice_value for k, v in fixed.items()}
    pairs = []
    for triad in TRIADS[kind]:
        if free_role in triad:
            others = [r for r in triad if r != free_role]
            if len(others) != 2:
                raise InvalidSpec(f"三元组 {triad} 中自由角色重复")
            pairs.append((t[others[0]], t[others[1]]))
        elif not exact3nj.triad_ok_twice(*(t[r] for r in triad)):
            logger.debug("固定三元组 %s 不满足选择定则", triad)
            return range(0)
    return exact3nj.summation_range(pairs)


def sweep_points(spec: SweepSpec) -> range:
    full = allowed_range(spec.kind, spec.fixed, spec.free_role)
    if spec.range is None:
        return full
    lo, hi = spec.range[0].twice_value, spec.range[1].twice_value
    if not full:
        raise InvalidSpec("固定值不允许任何自由取值，不能再指定范围")
    if lo < full.start or hi > full[-1]:
        raise InvalidSpec(f"范围 {spec.range[0]}:{spec.range[1]} 超出允许范围 "
                          f"{HalfInt(full.start)}:{HalfInt(full[-1])}")
    if (lo - full.start) % 2:
        raise InvalidSpec(f"范围端点 {spec.range[0]} 不满足整数耦合")
    return range(lo, hi + 1, 2)


def evaluate_point(spec: SweepSpec, twice_free: int, settings: Optional[Dict[str, Any]] = None,
                   full_precision: bool = False) -> ComparisonRow:
    """单点：精确值 + 渐近值。单点失败只记录在 note 中，不抛出。"""
    settings = settings or DEFAULT_SETTINGS
    args = spec.entries_at(twice_free)
    free = HalfInt(twice_free)
    notes = []

    try:
        ev = exact3nj.evaluate(EXACT_FOR[spec.kind], args.entries,
                               precision_bits=spec.precision_bits, settings=settings)
        exact = float(ev)
        exact_text = ev.digits() if full_precision else ""
    except exact3nj.PrecisionError as e:
        logger.warning("%s=%s: 精确值校验失败: %s", spec.free_role, free, e)
        exact, exact_text = math.nan, ""
        notes.append(str(e))

    asym = volume = abs_err = None
    allowed = False
    try:
        res = asymptotics.evaluate(spec.kind, args.entries, raise_on_failure=False, settings=settings)
        if res.in_allowed_region:
            allowed = True
            asym = res.value
            volume = None if spec.kind == NINE_J_TWO_SMALL else res.volume
            abs_err = abs(asym - exact)
        else:
            notes.append(res.note)
            logger.warning("%s=%s: 不在经典允许区", spec.free_role, free)
    except (IndexOutOfRange, PhaseError) as e:
        notes.append(f"{type(e).__name__}: {e}")
        logger.warning("%s=%s: 渐近公式不适用: %s", spec.free_role, free, e)

    return ComparisonRow(free, exact, asym, abs_err, volume, allowed, "; ".join(notes), exact_text)


def _init_worker(cache_settings: Dict[str, Any]) -> None:
    # 每个工作进程持有独立的 6j 缓存
    exact3nj.configure_cache(cache_settings.get("max_entries"), cache_settings.get("enabled", True))


def _point_job(job) -> ComparisonRow:
    spec, twice_free, settings, full_precision = job
    return evaluate_point(spec, twice_free, settings, full_precision)


def run_sweep(spec: SweepSpec, workers: Optional[int] = None, settings: Optional[Dict[str, Any]] = None,
              full_precision: bool = False) -> List[ComparisonRow]:
    """
    逐点扫描自由角色，返回按自由值排序的 ComparisonRow 列表。

    参数:
        spec: 扫描规格
        workers: 进程数（None 时取设置中的 harness.workers）
        settings: 设置字典
        full_precision: 是否额外保留精确值的全部稳定位（exact_text）

    抛出:
        InvalidSpec: 规格不合法
    """
    settings = settings or DEFAULT_SETTINGS
    points = sweep_points(spec)
    if not points:
        logger.info("%s 在固定值下没有允许的取值", spec.free_role)
        return []

    workers = int(workers or settings["harness"]["workers"])
    logger.info("扫描 %s: %s 从 %s 到 %s，共 %d 点（进程数 %d）",
                spec.kind, spec.free_role, HalfInt(points.start), HalfInt(points[-1]), len(points), workers)
    jobs = [(spec, tv, settings, full_precision) for tv in points]
    if workers <= 1 or len(jobs) == 1:
        rows = [_point_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(settings.get("cache", {}),)) as pool:
            rows = list(pool.map(_point_job, jobs))
    logger.debug("6j 缓存统计: %s", exact3nj.cache_metrics())
    return sorted(rows, key=lambda r: r.free_value)


def _stats(rows: Sequence[ComparisonRow]) -> ErrorStats:
    if not rows:
        return ErrorStats(0)
    err = np.array([r.abs_err for r in rows], dtype=float)
    ex = np.array([r.exact for r in rows], dtype=float)
    rms_err = float(np.sqrt(np.mean(err ** 2)))
    rms_exact = float(np.sqrt(np.mean(ex ** 2)))
    return ErrorStats(
        count=len(rows),
        max_abs_err=float(np.max(err)),
        rms_err=rms_err,
        rms_exact=rms_exact,
        relative_rms=(rms_err / rms_exact) if rms_exact > 0 else None,
        max_abs_exact=float(np.max(np.abs(ex))),
    )


def error_report(rows: Sequence[ComparisonRow], volume_floor_fraction: float = 0.5) -> ErrorSummary:
    """
    误差统计：体积不低于 volume_floor_fraction × 最大体积的行，以及全部允许行。

    抛出:
        EmptyInput: rows 为空
    """
    if not rows:
        raise EmptyInput("没有可统计的行")
    frac = float(volume_floor_fraction)
    allowed = [r for r in rows if r.allowed and r.asym is not None and math.isfinite(r.exact)]
    forbidden = [str(r.free_value) for r in rows if not r.allowed]

    volumes = [r.volume for r in allowed if r.volume is not None]
    max_volume = max(volumes) if volumes else None
    if max_volume is None:
        floor_rows, caustic = list(allowed), []
    else:
        cut = frac * max_volume
        floor_rows = [r for r in allowed if r.volume is not None and r.volume >= cut]
        caustic = [str(r.free_value) for r in allowed if r.volume is None or r.volume < cut]

    return ErrorSummary(
        total_rows=len(rows),
        allowed_rows=len(allowed),
        volume_floor_fraction=frac,
        max_volume=max_volume,
        floor=_stats(floor_rows),
        all_allowed=_stats(allowed),
        caustic_adjacent=caustic,
        forbidden=forbidden,
    )


def row_allowed_by_geometry(spec: SweepSpec, row: ComparisonRow, settings: Optional[Dict[str, Any]] = None) -> bool:
    """独立于渐近公式重新判定该行是否处于经典允许区。"""
    settings = settings or DEFAULT_SETTINGS
    roles = spec.entries_at(row.free_value.twice_value).role_map()
    if spec.kind == NINE_J_TWO_SMALL:
        J1, J4, J5 = roles["j1"].edge_length, roles["j4"].edge_length, roles["j5"].edge_length
        return J5 <= J1 + J4 and J1 <= J4 + J5 and J4 <= J1 + J5
    edges = EdgeSet.from_quantum_numbers(spec.kind, roles)
    return is_classically_allowed(edges, settings["geometry"]["caustic_epsilon"])


def emit_csv(rows: Sequence[ComparisonRow], destination: str, digits: int = 17, full_precision: bool = False) -> None:
    """
    按 free_value,exact,asym,abs_err,volume,allowed 写出 CSV，缺失值留空。

    抛出:
        storage.StorageError: IO 失败（消息包含路径）
    """
    records = []
    for r in rows:
        exact = r.exact_text if (full_precision and r.exact_text) else format_number(r.exact, digits)
        records.append((str(r.free_value), exact, format_number(r.asym, digits),
                        format_number(r.abs_err, digits), format_number(r.volume, digits),
                        format_bool(r.allowed)))
    storage.write_csv_records(destination, records)


def load_csv(path: str) -> List[ComparisonRow]:
    """读取 emit_csv 写出的文件。"""
    rows = []
    for rec in storage.read_csv_records(path):
        try:
            rows.append(ComparisonRow(
                free_value=parse_halfint(rec["free_value"]),
                exact=parse_number(rec["exact"]),
                asym=parse_number(rec["asym"]),
                abs_err=parse_number(rec["abs_err"]),
                volume=parse_number(rec["volume"]),
                allowed=parse_bool(rec["allowed"]),
            ))
        except (ValueError, TypeError) as e:
            raise storage.StorageError(f"CSV 内容无法解析: {path}: {rec}: {e}") from e
    return rows
