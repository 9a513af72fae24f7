#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
wigner - 3nj 符号精确值与半经典渐近公式对照工具
主程序入口文件

    wigner exact  --kind 9j --entries "51/2,53/2,28,1/2,47/2,24,25,27,26"
    wigner asym   --kind 9j1s --entries "..."
    wigner sweep  --kind 9j1s --fixed j1=51/2,... --free j5 --out rows.csv
    wigner report --in rows.csv [--volume-floor 0.5] [--json summary.json]
"""
import sys
import argparse
import logging
from typing import List, Optional

from src import asymptotics, exact3nj, harness, settings as settings_mod, storage
from src.geometry import GeometryError
from src.halfint import HalfIntError, PhaseError, parse_halfint_list
from src.layouts import ASYM_KINDS, EXACT_FOR, EXACT_KINDS, LayoutError, SymbolArgs
from src.utils import ensure_positive_int, format_number, format_summary, relative_error
from src.wigner_d import IndexOutOfRange

logger = logging.getLogger("wigner")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_SPEC = 2
EXIT_IO_ERROR = 3

_INVALID_SPEC_ERRORS = (HalfIntError, LayoutError, harness.InvalidSpec, harness.EmptyInput,
                        IndexOutOfRange, PhaseError, GeometryError)


def _positive_int(text: str) -> int:
    ok, value, err = ensure_positive_int(text, "参数")
    if not ok:
        raise argparse.ArgumentTypeError(err)
    return value


def _small_at(text: str):
    try:
        row, col = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("--small-at 格式应为 ROW,COL（从 0 计）")
    return row, col


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wigner", description="3nj 符号精确值与渐近公式")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--config", default=None, help="设置文件路径（默认 config/settings.json）")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="精确计算 6j/9j/12j/15j")
    p.add_argument("--kind", required=True, choices=list(EXACT_KINDS))
    p.add_argument("--entries", required=True, help='按行优先顺序，如 "1,1,1,1,1,1"')
    p.add_argument("--precision", type=_positive_int, default=None, help="起始精度（比特）")
    p.add_argument("--digits", type=_positive_int, default=None, help="输出有效数字位数（默认全部稳定位）")
    p.add_argument("--no-cache", action="store_true")

    p = sub.add_parser("asym", help="渐近公式")
    p.add_argument("--kind", required=True, choices=list(ASYM_KINDS))
    p.add_argument("--entries", required=True)
    p.add_argument("--small-at", type=_small_at, default=None,
                   help="9j1s：小量所在位置 ROW,COL（从 0 计），默认为 1,0")
    p.add_argument("--compare", action="store_true", help="同时计算精确值并输出相对误差")

    p = sub.add_parser("sweep", help="扫描一个自由量子数并输出 CSV")
    p.add_argument("--kind", required=True, choices=list(ASYM_KINDS))
    p.add_argument("--fixed", required=True, help="role=value,...")
    p.add_argument("--free", required=True, help="自由角色，如 j5")
    p.add_argument("--range", default=None, help="a:b（默认完整允许范围）")
    p.add_argument("--precision", type=_positive_int, default=None)
    p.add_argument("--workers", type=_positive_int, default=None)
    p.add_argument("--full-precision", action="store_true", help="exact 列输出全部稳定位")
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="读取 CSV 并输出误差统计")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--volume-floor", type=float, default=None)
    p.add_argument("--json", dest="json_out", default=None)
    return parser


def cmd_exact(args, cfg) -> int:
    entries = SymbolArgs.of(args.kind, parse_halfint_list(args.entries))
    ev = exact3nj.evaluate(args.kind, entries, precision_bits=args.precision,
                           use_cache=not args.no_cache, settings=cfg)
    print(f"{entries} = {ev.digits(args.digits)}")
    stable = "inf" if ev.exact_zero else str(ev.stable_digits)
    print(f"precision_bits={ev.precision_bits} stable_digits={stable}")
    logger.debug("6j 缓存统计: %s", exact3nj.cache_metrics())
    return EXIT_OK


def cmd_asym(args, cfg) -> int:
    entries = parse_halfint_list(args.entries)
    if args.small_at is not None:
        if args.kind != "9j1s":
            raise LayoutError("--small-at 只适用于 9j1s")
        res = asymptotics.asym_9j_one_small_at(entries, *args.small_at, settings=cfg)
    else:
        res = asymptotics.evaluate(args.kind, entries, settings=cfg)
    comp = res.components
    print(f"value={format_number(res.value)}")
    print(f"volume={format_number(res.volume)}")
    print(f"prefactor={format_number(comp.prefactor)} cosine_argument={format_number(comp.cosine_argument)} "
          f"d_factors={','.join(format_number(d) for d in comp.d_factors)}")
    if args.compare:
        ev = exact3nj.evaluate(EXACT_FOR[args.kind], entries, settings=cfg)
        print(f"exact={format_number(float(ev))} rel_err={format_number(relative_error(res.value, float(ev)), 6)}")
    return EXIT_OK


def cmd_sweep(args, cfg) -> int:
    spec = harness.SweepSpec(
        kind=args.kind,
        fixed=harness.parse_fixed(args.fixed),
        free_role=args.free,
        range=harness.parse_range(args.range),
        precision_bits=args.precision,
    )
    rows = harness.run_sweep(spec, workers=args.workers, settings=cfg, full_precision=args.full_precision)
    harness.emit_csv(rows, args.out, digits=cfg["harness"]["significant_digits"],
                     full_precision=args.full_precision)
    print(f"{len(rows)} 行已写入 {args.out}")
    return EXIT_OK


def cmd_report(args, cfg) -> int:
    rows = harness.load_csv(args.infile)
    floor = args.volume_floor if args.volume_floor is not None else cfg["harness"]["volume_floor_fraction"]
    summary = harness.error_report(rows, floor)
    print(format_summary(summary))
    if args.json_out:
        storage.save_json(args.json_out, summary.to_dict())
        print(f"统计已保存至 {args.json_out}")
    return EXIT_OK


_COMMANDS = {"exact": cmd_exact, "asym": cmd_asym, "sweep": cmd_sweep, "report": cmd_report}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_INVALID_SPEC

    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s: %(message)s")
    settings_mod.create_default_settings_if_missing(args.config)
    cfg = settings_mod.get_effective_settings(path=args.config)
    exact3nj.configure_cache(cfg["cache"]["max_entries"], cfg["cache"]["enabled"])

    try:
        return _COMMANDS[args.command](args, cfg)
    except storage.StorageError as e:
        logger.error("文件读写失败: %s", e)
        return EXIT_IO_ERROR
    except _INVALID_SPEC_ERRORS as e:
        logger.error("参数不合法: %s", e)
        return EXIT_INVALID_SPEC
    except exact3nj.PrecisionError as e:
        logger.error("%s", e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
