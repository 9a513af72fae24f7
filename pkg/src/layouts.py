"""
符号布局定义
每种 3nj 符号的数组按行优先读取，角色名（role）与数组位置一一对应。
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple

from src.halfint import HalfInt, parse_halfint

logger = logging.getLogger(__name__)

SIX_J = "6j"
NINE_J = "9j"
TWELVE_J = "12j"
FIFTEEN_J = "15j"

NINE_J_ONE_SMALL = "9j1s"
NINE_J_TWO_SMALL = "9j2s"
TWELVE_J_TWO_SMALL = "12j2s"
FIFTEEN_J_THREE_SMALL = "15j3s"
PONZANO_REGGE = "6j"

EXACT_KINDS = (SIX_J, NINE_J, TWELVE_J, FIFTEEN_J)
ASYM_KINDS = (PONZANO_REGGE, NINE_J_ONE_SMALL, NINE_J_TWO_SMALL, TWELVE_J_TWO_SMALL, FIFTEEN_J_THREE_SMALL)

ROLES: Dict[str, Tuple[str, ...]] = {
    SIX_J: ("a", "b", "c", "d", "e", "f"),
    NINE_J: ("j1", "j2", "j12", "j3", "j4", "j34", "j13", "j24", "j5"),
    NINE_J_ONE_SMALL: ("j1", "j2", "j12", "s", "j4", "j34", "j13", "j24", "j5"),
    NINE_J_TWO_SMALL: ("j1", "s2", "j12", "s3", "j4", "j34", "j13", "j24", "j5"),
    TWELVE_J: ("s1", "j2", "j12", "j125",
               "j3", "j4", "j34", "j135",
               "j13", "j24", "s5", "j6"),
    FIFTEEN_J: ("j1", "j2", "j12", "j125", "j1256",
                "s3", "j4", "j34", "j135", "j1356",
                "j13", "j24", "s5", "s6", "j7"),
}
ROLES[TWELVE_J_TWO_SMALL] = ROLES[TWELVE_J]
ROLES[FIFTEEN_J_THREE_SMALL] = ROLES[FIFTEEN_J]


def _nine_j_triads(r: Tuple[str, ...]) -> Tuple[Tuple[str, str, str], ...]:
    return ((r[0], r[1], r[2]), (r[3], r[4], r[5]), (r[6], r[7], r[8]),
            (r[0], r[3], r[6]), (r[1], r[4], r[7]), (r[2], r[5], r[8]))


TRIADS: Dict[str, Tuple[Tuple[str, str, str], ...]] = {
    SIX_J: (("a", "b", "c"), ("a", "e", "f"), ("d", "b", "f"), ("d", "e", "c")),
    NINE_J: _nine_j_triads(ROLES[NINE_J]),
    NINE_J_ONE_SMALL: _nine_j_triads(ROLES[NINE_J_ONE_SMALL]),
    NINE_J_TWO_SMALL: _nine_j_triads(ROLES[NINE_J_TWO_SMALL]),
    TWELVE_J: (("s1", "j2", "j12"), ("j3", "j4", "j34"),
               ("s5", "j12", "j125"), ("j125", "j34", "j6"),
               ("s1", "j3", "j13"), ("j2", "j4", "j24"),
               ("s5", "j13", "j135"), ("j135", "j24", "j6")),
    FIFTEEN_J: (("j1", "j2", "j12"), ("s3", "j4", "j34"),
                ("s5", "j12", "j125"), ("s6", "j125", "j1256"), ("j1256", "j34", "j7"),
                ("j1", "s3", "j13"), ("j2", "j4", "j24"),
                ("s5", "j13", "j135"), ("s6", "j135", "j1356"), ("j1356", "j24", "j7")),
}
TRIADS[TWELVE_J_TWO_SMALL] = TRIADS[TWELVE_J]
TRIADS[FIFTEEN_J_THREE_SMALL] = TRIADS[FIFTEEN_J]

# 渐近种类 -> 用作对照的精确符号种类
EXACT_FOR: Dict[str, str] = {
    SIX_J: SIX_J,
    NINE_J_ONE_SMALL: NINE_J,
    NINE_J_TWO_SMALL: NINE_J,
    TWELVE_J_TWO_SMALL: TWELVE_J,
    FIFTEEN_J_THREE_SMALL: FIFTEEN_J,
}

_ALIASES = {
    "6j": SIX_J, "sixj": SIX_J, "six_j": SIX_J, "pr": SIX_J, "ponzano_regge": SIX_J,
    "9j": NINE_J, "ninej": NINE_J, "nine_j": NINE_J,
    "12j": TWELVE_J, "twelvej": TWELVE_J, "twelvejfirst": TWELVE_J, "twelve_j_first": TWELVE_J,
    "15j": FIFTEEN_J, "fifteenj": FIFTEEN_J, "fifteenjfirst": FIFTEEN_J, "fifteen_j_first": FIFTEEN_J,
    "9j1s": NINE_J_ONE_SMALL, "9j2s": NINE_J_TWO_SMALL,
    "12j2s": TWELVE_J_TWO_SMALL, "15j3s": FIFTEEN_J_THREE_SMALL,
}


class LayoutError(ValueError):
    """符号种类、角色或条目数量不合法"""
    pass


def make_kind(name: str) -> str:
    """
    规范化符号种类名称。

    接受 "9j"、"NineJ"、"nine_j"、" 12J "、"TwelveJFirst" 等写法。

    参数:
        name (str): 原始名称

    返回:
        str: 规范名称（如 "9j"、"12j2s"）

    抛出:
        TypeError: name 不是 str
        LayoutError: 未知种类
    """
    if not isinstance(name, str):
        raise TypeError("kind must be a str")
    key = name.strip().lower().replace("-", "_")
    if key in _ALIASES:
        return _ALIASES[key]
    compact = key.replace("_", "")
    if compact in _ALIASES:
        return _ALIASES[compact]
    raise LayoutError(f"未知符号种类: {name!r}")


@dataclass(frozen=True)
class SymbolArgs:
    """某种符号的一组条目，顺序即数组的行优先布局。"""
    kind: str
    entries: Tuple[HalfInt, ...]

    def __post_init__(self):
        kind = make_kind(self.kind)
        entries = tuple(parse_halfint(e) for e in self.entries)
        expected = len(ROLES[kind])
        if len(entries) != expected:
            raise LayoutError(f"{kind} 需要 {expected} 个条目，实际 {len(entries)}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, kind: str, entries: Iterable) -> "SymbolArgs":
        return cls(kind, tuple(entries))

    @classmethod
    def from_roles(cls, kind: str, values: Mapping[str, object]) -> "SymbolArgs":
        kind = make_kind(kind)
        unknown = set(values) - set(ROLES[kind])
        if unknown:
            raise LayoutError(f"{kind} 不含角色: {sorted(unknown)}")
        missing = [r for r in ROLES[kind] if r not in values]
        if missing:
            raise LayoutError(f"{kind} 缺少角色: {missing}")
        return cls(kind, tuple(values[r] for r in ROLES[kind]))

    @property
    def roles(self) -> Tuple[str, ...]:
        return ROLES[self.kind]

    def role_map(self) -> Dict[str, HalfInt]:
        return dict(zip(self.roles, self.entries))

    def twice(self) -> Tuple[int, ...]:
        return tuple(e.twice_value for e in self.entries)

    def twice_map(self) -> Dict[str, int]:
        return {r: e.twice_value for r, e in zip(self.roles, self.entries)}

    def with_kind(self, kind: str) -> "SymbolArgs":
        """同一组条目换成布局相同的另一种类（如 9j1s -> 9j）。"""
        kind = make_kind(kind)
        if len(ROLES[kind]) != len(self.entries):
            raise LayoutError(f"{self.kind} 与 {kind} 的布局不兼容")
        return SymbolArgs(kind, self.entries)

    def __str__(self) -> str:
        return f"{self.kind}{{{' '.join(str(e) for e in self.entries)}}}"
