"""Command-line front end.

Verbs:
  run <config-path> [--out DIR]      run a JSON scenario config
  preset <name> [--out DIR]          run a named preset
  list-presets                       show the preset catalog
  check-poincare <config-path>       estimate the gap and validate it

The output directory is --out when given, otherwise $PMELAB_OUT/<name>,
otherwise ./pmelab_out/<name>.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import list_presets, parse_config_file, preset_config
from .errors import PmelabError
from .scenario import poincare_report, resolve_out_dir, run_scenario


def _report(result):
    for row in result.rows:
        print(f"{row.check}: {row.status} (measured {row.measured:.6g}, "
              f"bound {row.bound:.6g})")
    print(f"results: {result.trajectory_path} {result.summary_path}")
    return result.status


def _cmd_run(args):
    cfg = parse_config_file(args.config)
    out = resolve_out_dir(Path(args.config).stem, args.out)
    return _report(run_scenario(cfg, out))


def _cmd_preset(args):
    cfg = preset_config(args.name)
    out = resolve_out_dir(args.name, args.out)
    return _report(run_scenario(cfg, out))


def _cmd_list_presets(_args):
    for name, description in list_presets():
        print(f"{name}: {description}")
    return 0


def _cmd_check_poincare(args):
    cfg = parse_config_file(args.config)
    res, worst = poincare_report(cfg)
    print(f"lambda: {res.lam:.12g}")
    print(f"iterations: {res.iterations}")
    print(f"residual: {res.residual:.3e}")
    ok = worst <= 0.0
    print(f"variational check (200 random zero-mean vectors): "
          f"{'pass' if ok else 'fail'} (worst violation {worst:.3e})")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pmelab",
        description="Weighted porous-medium flow lab: run scenarios and "
                    "certificate checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config (JSON)")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_preset = sub.add_parser("preset", help="run a named preset")
    p_preset.add_argument("name")
    p_preset.add_argument("--out", default=None, help="output directory")
    p_preset.set_defaults(func=_cmd_preset)

    p_list = sub.add_parser("list-presets", help="list available presets")
    p_list.set_defaults(func=_cmd_list_presets)

    p_chk = sub.add_parser("check-poincare",
                           help="estimate the spectral gap for a config")
    p_chk.add_argument("config")
    p_chk.set_defaults(func=_cmd_check_poincare)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PmelabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
