"""
完整扫描下渐近公式与精确值的对照（耗时较长，使用 -m "not slow" 跳过）。
"""
import math

import pytest

from src.exact3nj import nine_j
from src.harness import SweepSpec, error_report, parse_fixed, row_allowed_by_geometry, run_sweep
from src.layouts import ROLES

pytestmark = pytest.mark.slow

WORKERS = 4

ONE_SMALL = "j1=51/2,j2=53/2,j12=28,s=1/2,j4=47/2,j34=24,j13=25,j24=27"
ONE_SMALL_LARGE = "j1=201/2,j2=205/2,j12=89,s=3/2,j4=197/2,j34=99,j13=100,j24=92"
TWO_SMALL = "j1=67,s2=1/2,j12=135/2,s3=3/2,j4=54,j34=111/2,j13=135/2,j24=107/2"
TWELVE_J_BASE = "s1=1/2,j2=201/2,j12=100,j125=101,j3=213/2,j4=199/2,j34=117,j135=105,j13=106,j24=98,s5=1"
FIFTEEN_J_BASE = ("j1=203/2,j2=207/2,j12=96,j125=97,j1256=98,s3=3/2,j4=199/2,j34=100,j135=100,j1356=101,"
                  "j13=101,j24=108,s5=1,s6=1")


def _sweep(kind, fixed, free):
    spec = SweepSpec(kind, parse_fixed(fixed), free)
    return spec, run_sweep(spec, workers=WORKERS)


@pytest.fixture(scope="module")
def one_small_sweep():
    return _sweep("9j1s", ONE_SMALL, "j5")


@pytest.fixture(scope="module")
def one_small_large_sweep():
    return _sweep("9j1s", ONE_SMALL_LARGE, "j5")


def _max_abs_err_fraction(rows):
    allowed = [r for r in rows if r.allowed]
    assert allowed
    max_exact = max(abs(r.exact) for r in rows)
    return max(r.abs_err for r in allowed) / max_exact


def test_one_small_at_largest_volume(one_small_sweep):
    _, rows = one_small_sweep
    best = max((r for r in rows if r.allowed), key=lambda r: r.volume)
    assert abs(best.asym - best.exact) / abs(best.exact) < 0.05


def test_one_small_floor_rms(one_small_sweep):
    _, rows = one_small_sweep
    summary = error_report(rows, 0.5)
    assert summary.floor.relative_rms < 0.10
    assert summary.floor.relative_rms <= summary.all_allowed.relative_rms


def test_error_shrinks_with_scale(one_small_sweep, one_small_large_sweep):
    # 绝对误差随 j 增大而减小；相对误差在两组之间基本持平
    small = error_report(one_small_sweep[1], 0.5).floor.rms_err
    large = error_report(one_small_large_sweep[1], 0.5).floor.rms_err
    assert large < small


def test_allowed_flags_follow_geometry(one_small_sweep):
    spec, rows = one_small_sweep
    for row in rows:
        assert row.allowed == row_allowed_by_geometry(spec, row)


def test_two_small_sweep():
    _, rows = _sweep("9j2s", TWO_SMALL, "j5")
    assert _max_abs_err_fraction(rows) < 0.10


def test_twelve_j_sweep():
    _, rows = _sweep("12j2s", TWELVE_J_BASE, "j6")
    summary = error_report(rows, 0.5)
    max_exact = max(abs(r.exact) for r in rows)
    assert summary.floor.count > 0
    assert summary.floor.max_abs_err < 0.10 * max_exact


def test_fifteen_j_sweep():
    _, rows = _sweep("15j3s", FIFTEEN_J_BASE, "j7")
    summary = error_report(rows, 0.5)
    max_exact = max(abs(r.exact) for r in rows)
    assert summary.floor.count > 0
    assert summary.floor.max_abs_err < 0.15 * max_exact


def test_exact_values_survive_precision_doubling(one_small_sweep):
    spec, rows = one_small_sweep
    fixed = spec.fixed
    for row in rows[::8]:
        values = {**fixed, "j5": row.free_value}
        entries = [values[r] for r in ROLES["9j1s"]]
        ev = nine_j(entries)
        doubled = nine_j(entries, precision_bits=2 * ev.precision_bits)
        assert ev.agrees_with(doubled, 30)
        assert math.isclose(float(ev), row.exact, rel_tol=1e-15, abs_tol=1e-300)
