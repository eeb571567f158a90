"""Command line entry point: ``alcontinuum {run,sweep,check,oracle}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .errors import ALError, ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERDICT = 0, 1, 2, 3


def _resolve_config(arg: str) -> harness.SimConfig:
    path = Path(arg)
    if not path.exists() and not path.suffix:
        path = harness.builtin_config_path(arg)
    return harness.load_config(path)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="alcontinuum", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, need_config=True):
        sp.add_argument("--config", required=need_config,
                        help="JSON config path, or the name of a built-in config (default, decoupling)")
        sp.add_argument("--out", help="output directory (overrides out_dir)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for the sweep")
        sp.add_argument("--only-h", type=float, action="append", dest="only_h",
                        help="restrict to this mesh size (repeatable)")
        sp.add_argument("--strict", action="store_true", help="exit 3 if any verdict fails")

    common(sub.add_parser("run", help="run one mesh size (first of h_list unless --only-h)"))
    common(sub.add_parser("sweep", help="run the whole h_list and the cross-h verdicts"))
    common(sub.add_parser("check", help="validate a config and print derived quantities"))
    common(sub.add_parser("oracle", help="run the closed-form oracle checks"), need_config=False)
    return p


def _print_verdicts(record: harness.RunRecord) -> None:
    for v in record.all_verdicts():
        state = {True: "PASS", False: "FAIL", None: "----"}[v["passed"]]
        print(f"{state}  {v['scope']:<12} {v['name']:<32} measured={v['measured']!r} tolerance={v['tolerance']!r}")


def _do_check(cfg: harness.SimConfig) -> int:
    print(f"config ok: sign={cfg.sign} gamma={cfg.gamma:g} T={cfg.T:g} L={cfg.L:g} "
          f"total mass={cfg.total_mass():.6g} h0={cfg.h0():.6g}")
    print(f"{'h':>8} {'N':>10} {'2Nh':>8} {'M':>6} {'t_lat':>10} {'dt':>6} {'steps':>8} {'memory':>10}")
    for d in harness.derived_quantities(cfg):
        print(f"{d['h']:>8g} {d['N']:>10.4f} {d['2Nh']:>8.4f} {d['M']:>6d} {d['t_final_lat']:>10g} "
              f"{d['dt']:>6g} {d['steps_estimate']:>8d} {d['memory_bytes_estimate'] / 2**20:>8.1f}MB")
    return EXIT_OK


def _do_oracle(strict: bool) -> int:
    from .oracles import run_oracles

    failed = False
    for r in run_oracles():
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<28} measured={r.measured:.3e} "
              f"tolerance={r.tolerance:.0e} ({r.seconds:.2f}s)")
        failed |= not r.passed
    return EXIT_VERDICT if (failed and strict) else EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.verb == "oracle":
        return _do_oracle(args.strict)
    try:
        cfg = _resolve_config(args.config)
        if args.verb == "check":
            return _do_check(cfg)
        only = args.only_h
        if args.verb == "run":
            only = [only[0]] if only else [cfg.h_list[0]]
        record = harness.run_sweep(cfg, jobs=args.jobs, only_h=only)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ALError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = args.out or cfg.out_dir
    try:
        paths = harness.emit_reports(record, out)
    except OSError as exc:
        print(f"runtime error: cannot write reports to {out}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _print_verdicts(record)
    for p in paths:
        print(f"wrote {p}")
    for b in record.blocks:
        if b["status"] != "ok":
            e = b["error"]
            print(f"h={b['h']!r} failed in {e['stage']}: {e['type']}: {e['message']}", file=sys.stderr)
    if record.partial:
        return EXIT_RUNTIME
    if args.strict and record.failed_verdicts():
        return EXIT_VERDICT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
