"""Command-line entry point: place, eval, field-bench, gen, plot.

Config files are flat ``key = value`` text. Blank lines and text after ``#``
are ignored; keys are option names with either hyphens or underscores
(``target-density = 0.9``, ``tau_min = 0.1``) and may also name any schedule
constant (``mu_base``, ``gamma_base``, ...). Command-line flags override
file values.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .netlist import BookshelfError, apply_pl, gen_synthetic, parse_bookshelf, write_bookshelf, write_pl
from .optimizer import NumericalError, ScheduleConfig

log = logging.getLogger("accplace")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_config_file(path) -> dict[str, str]:
    out: dict[str, str] = {}
    for no, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected 'key = value'")
        k, v = line.split("=", 1)
        k = k.strip().replace("-", "_")
        if not k:
            raise UsageError(f"{path}:{no}: empty key")
        out[k] = v.strip()
    return out


def parse_every(spec: str | None):
    """'100' means every 100 iterations; '100,200,400' lists iterations."""
    if spec is None or spec == "":
        return None
    try:
        parts = [int(p) for p in str(spec).split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"--every expects an integer or a comma list, got {spec!r}") from None
    if not parts or any(p <= 0 for p in parts):
        raise UsageError("--every values must be positive")
    if len(parts) == 1 and "," not in str(spec):
        n = parts[0]
        return lambda it: it % n == 0
    wanted = set(parts)
    return lambda it: it in wanted


_PLACE_KEYS = {
    "grid": int, "alpha": int, "window": int, "target_density": float, "tau_min": float,
    "solver": str, "short_range": str, "seed": int, "max_iters": int, "threads": int,
    "lambda0": float, "every": str, "out": str, "report": str, "snapshot_dir": str,
}


def _bool(v: str) -> bool:
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


def build_run_config(args: argparse.Namespace):
    """Merge defaults, config-file values and explicit flags into a RunConfig."""
    from .placer import RunConfig

    values: dict = {}
    sched: dict = {}
    sched_types = {f.name: f.type for f in dataclasses.fields(ScheduleConfig)}
    if args.config:
        for k, v in parse_config_file(args.config).items():
            if k in _PLACE_KEYS:
                values[k] = v
            elif k in sched_types:
                sched[k] = v
            elif k in ("fillers", "neutralize"):
                values[k] = v
            else:
                raise UsageError(f"{args.config}: unknown key {k!r}")
    for k in _PLACE_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    try:
        conv = {k: _PLACE_KEYS[k](v) for k, v in values.items() if k in _PLACE_KEYS}
        for k in ("fillers", "neutralize"):
            if k in values:
                conv[k] = _bool(values[k])
        sch = {}
        for k, v in sched.items():
            t = sched_types[k]
            sch[k] = _bool(v) if t in (bool, "bool") else (int(v) if t in (int, "int") else float(v))
    except ValueError as e:
        raise UsageError(str(e)) from None
    grid = conv.pop("grid", 1024)
    extras = {k: conv.pop(k) for k in ("every", "out", "report", "snapshot_dir") if k in conv}
    try:
        cfg = RunConfig(grid=(grid, grid), schedule=ScheduleConfig(**sch), **conv)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from None
    return cfg, extras


def cmd_place(args) -> int:
    from .placer import run_global_placement
    from .plot import problem_rects, write_svg

    cfg, extras = build_run_config(args)
    netlist = parse_bookshelf(args.aux)
    out = Path(extras.get("out") or f"{netlist.name}.gp.pl")
    want = parse_every(extras.get("every"))
    snap_dir = Path(extras.get("snapshot_dir") or out.parent)
    snaps: list[str] = []

    def on_iteration(it, problem, v):
        if want is not None and want(it):
            p = snap_dir / f"{out.stem}_iter{it:05d}.svg"
            write_svg(p, problem.spec.region, problem_rects(problem, v))
            snaps.append(str(p))

    if want is not None:
        snap_dir.mkdir(parents=True, exist_ok=True)
    positions, report = run_global_placement(netlist, cfg, on_iteration)
    write_pl(netlist, positions, out)
    report.design["snapshots"] = snaps
    if extras.get("report"):
        report.write(extras["report"])
    status = "converged" if report.converged else "not converged"
    print(f"{status}: iterations={report.totals['iterations']} tau={report.final_tau:.4f} "
          f"hpwl={report.final_hpwl:.6g} field_time={report.totals['field_time']:.3f}s "
          f"total_time={report.totals['total_time']:.3f}s")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .wirelength import hpwl

    netlist = parse_bookshelf(args.aux)
    if args.pl:
        netlist = apply_pl(netlist, args.pl)
    value = hpwl(netlist)
    print(f"HPWL {value:.6f}")
    print(json.dumps({"design": netlist.name, "hpwl": value, "cells": len(netlist.cells),
                      "nets": len(netlist.nets)}, sort_keys=True))
    return EXIT_OK


def cmd_field_bench(args) -> int:
    from .bench import BENCH_MODES, field_bench, format_table

    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    bad = [m for m in modes if m not in BENCH_MODES]
    if bad:
        raise UsageError(f"unknown mode(s) {', '.join(bad)}; choose from {', '.join(BENCH_MODES)}")
    sr = [m.strip() for m in args.short_range.split(",") if m.strip()]
    if any(m not in ("fft", "direct") for m in sr):
        raise UsageError("--short-range takes fft and/or direct")
    try:
        res = field_bench(args.grid, args.alpha, args.charges, args.seed, modes, args.window, sr,
                          args.oracle_limit, args.repeats, args.threads)
    except ValueError as e:
        raise UsageError(str(e)) from None
    print(format_table(res))
    if args.json:
        Path(args.json).write_text(json.dumps(res, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        nl = gen_synthetic(args.cells, args.nets, seed=args.seed, utilization=args.utilization)
    except ValueError as e:
        raise UsageError(str(e)) from None
    aux = write_bookshelf(nl, args.out, args.name)
    print(str(aux))
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plot import netlist_rects, write_svg

    netlist = parse_bookshelf(args.aux)
    if args.pl:
        netlist = apply_pl(netlist, args.pl)
    write_svg(args.out, netlist.region, netlist_rects(netlist), args.size)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="accplace", description="Electrostatic global placement with an accelerated field solver.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    pl = sub.add_parser("place", help="run global placement on a Bookshelf design")
    pl.add_argument("--aux", required=True)
    pl.add_argument("--config")
    pl.add_argument("--grid", type=int)
    pl.add_argument("--alpha", type=int)
    pl.add_argument("--window", type=int)
    pl.add_argument("--target-density", dest="target_density", type=float)
    pl.add_argument("--tau-min", dest="tau_min", type=float)
    pl.add_argument("--solver", choices=("direct", "fine-fft", "accfft"))
    pl.add_argument("--short-range", dest="short_range", choices=("fft", "direct"))
    pl.add_argument("--max-iters", dest="max_iters", type=int)
    pl.add_argument("--lambda0", type=float)
    pl.add_argument("--out")
    pl.add_argument("--report")
    pl.add_argument("--threads", type=int)
    pl.add_argument("--seed", type=int)
    pl.add_argument("--every", help="snapshot every N iterations, or at a comma list of iterations")
    pl.add_argument("--snapshot-dir", dest="snapshot_dir")
    pl.set_defaults(func=cmd_place)

    ev = sub.add_parser("eval", help="HPWL of a placement")
    ev.add_argument("--aux", required=True)
    ev.add_argument("--pl")
    ev.set_defaults(func=cmd_eval)

    fb = sub.add_parser("field-bench", help="field solver accuracy and timing")
    fb.add_argument("--grid", type=int, default=64)
    fb.add_argument("--alpha", type=int, default=4)
    fb.add_argument("--charges", type=int, default=200)
    fb.add_argument("--seed", type=int, default=1)
    fb.add_argument("--modes", default="direct,fine-fft,accfft")
    fb.add_argument("--window", type=int)
    fb.add_argument("--short-range", dest="short_range", default="fft,direct")
    fb.add_argument("--oracle-limit", dest="oracle_limit", type=int, default=256)
    fb.add_argument("--repeats", type=int, default=3)
    fb.add_argument("--threads", type=int)
    fb.add_argument("--json")
    fb.set_defaults(func=cmd_field_bench)

    g = sub.add_parser("gen", help="write a synthetic Bookshelf design")
    g.add_argument("--cells", type=int, required=True)
    g.add_argument("--nets", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--utilization", type=float, default=0.7)
    g.add_argument("--name", default="synthetic")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    pt = sub.add_parser("plot", help="SVG snapshot of a placement")
    pt.add_argument("--aux", required=True)
    pt.add_argument("--pl")
    pt.add_argument("--out", required=True)
    pt.add_argument("--size", type=int, default=800)
    pt.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericalError as e:
        print(f"accplace: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, BookshelfError, FileNotFoundError, KeyError, ValueError) as e:
        print(f"accplace: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"accplace: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
