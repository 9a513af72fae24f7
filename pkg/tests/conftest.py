import sys
import random
from pathlib import Path

import pytest

# 将项目根目录加入 sys.path（确保 tests 能导入 src 包）
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from src import exact3nj  # noqa: E402
from src.halfint import HalfInt  # noqa: E402
from src.layouts import ROLES, TRIADS, make_kind  # noqa: E402

# 构造随机符号时的赋值顺序：前面的角色随机取值，后面的角色由已赋值的三元组约束
_SAMPLING_ORDER = {
    "6j": ("a", "b", "d", "e", "c", "f"),
    "9j": ("j1", "j2", "j3", "j4", "j12", "j34", "j13", "j24", "j5"),
    "12j": ("s1", "j2", "j3", "j4", "s5", "j12", "j13", "j34", "j24", "j125", "j135", "j6"),
    "15j": ("j1", "j2", "s3", "j4", "s5", "s6", "j12", "j13", "j34", "j24",
            "j125", "j135", "j1256", "j1356", "j7"),
}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 大量子数的完整扫描（耗时较长）")


@pytest.fixture(autouse=True)
def fresh_six_j_cache():
    """每个测试使用干净的 6j 缓存"""
    exact3nj.configure_cache(None, True)
    exact3nj.clear_cache()
    yield
    exact3nj.configure_cache(None, True)


def sample_symbol(kind, rng, max_twice=6, fixed=None, tries=1000):
    """
    随机生成满足全部三角定则的符号条目（2j 均不超过 max_twice）。

    fixed: {role: 2j}，指定某些角色的取值（如把小量置 0）。
    """
    kind = make_kind(kind)
    fixed = fixed or {}
    for _ in range(tries):
        t = {}
        ok = True
        for role in _SAMPLING_ORDER[kind]:
            pairs = []
            for triad in TRIADS[kind]:
                if role in triad:
                    others = [r for r in triad if r != role]
                    if all(o in t for o in others):
                        pairs.append((t[others[0]], t[others[1]]))
            if pairs:
                choices = [x for x in exact3nj.summation_range(pairs) if x <= max_twice]
            else:
                choices = list(range(0, max_twice + 1))
            if role in fixed:
                choices = [x for x in choices if x == fixed[role]]
            if not choices:
                ok = False
                break
            t[role] = rng.choice(choices)
        if ok and all(exact3nj.triad_ok_twice(*(t[r] for r in tri)) for tri in TRIADS[kind]):
            return [HalfInt(t[r]) for r in ROLES[kind]]
    raise RuntimeError(f"无法生成 {kind} 的随机条目")


@pytest.fixture
def rng():
    return random.Random(20240607)


def enumerate_symbols(kind, max_twice, fixed=None):
    """
    穷举满足全部三角定则的符号条目（2j 均不超过 max_twice），按 2j 元组产出。
    """
    kind = make_kind(kind)
    fixed = fixed or {}
    order = _SAMPLING_ORDER[kind]

    def choices_for(role, t):
        pairs = []
        for triad in TRIADS[kind]:
            if role in triad:
                others = [r for r in triad if r != role]
                if all(o in t for o in others):
                    pairs.append((t[others[0]], t[others[1]]))
        if pairs:
            values = [x for x in exact3nj.summation_range(pairs) if x <= max_twice]
        else:
            values = list(range(0, max_twice + 1))
        if role in fixed:
            values = [x for x in values if x == fixed[role]]
        return values

    def walk(depth, t):
        if depth == len(order):
            if all(exact3nj.triad_ok_twice(*(t[r] for r in tri)) for tri in TRIADS[kind]):
                yield tuple(t[r] for r in ROLES[kind])
            return
        role = order[depth]
        for x in choices_for(role, t):
            t[role] = x
            yield from walk(depth + 1, t)
            del t[role]

    yield from walk(0, {})
