"""Command-line front end: ``llcontrol run | presets | verify``.

Exit codes: 0 success, 1 configuration or validation error, 2 numerical
blow-up, 3 verification failure.
"""
import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_VERIFY = 0, 1, 2, 3


def _parser():
    ap = argparse.ArgumentParser(prog="llcontrol", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate one or more scenarios and write CSV/SVG outputs")
    run.add_argument("--config", action="append", default=[], metavar="FILE",
                     help="scenario config file (repeatable; several configs run concurrently)")
    run.add_argument("--preset", action="append", default=[], metavar="NAME",
                     help="built-in scenario fig1..fig6 (repeatable)")
    run.add_argument("--out", metavar="DIR", help="output directory (one subdirectory per scenario "
                                                  "when several are given)")
    run.add_argument("--elements", type=int, metavar="N", help="override the number of elements")
    run.add_argument("--dt", type=float, metavar="DT", help="override the time step")
    run.add_argument("--jobs", type=int, default=None, help="worker processes for several scenarios")
    run.add_argument("--seed", type=int, default=None, help="accepted for symmetry; runs are deterministic")
    run.add_argument("--no-write", action="store_true", help="print the summary only")

    sub.add_parser("presets", help="list the built-in scenarios")

    ver = sub.add_parser("verify", help="run the property suites")
    ver.add_argument("--level", choices=("fast", "full"), default="fast")
    ver.add_argument("--seed", type=int, default=0, help="seed for the randomized suites")
    ver.add_argument("--suite", action="append", default=None, help="run only this suite (repeatable)")
    ver.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")
    return ap


def _load_scenarios(args):
    from dataclasses import replace

    from .config import load_config
    from .presets import get_preset

    cfgs = [load_config(p) for p in args.config] + [get_preset(n) for n in args.preset]
    if not cfgs:
        raise ValueError("nothing to run: pass --config FILE or --preset NAME")
    names = {}
    out = []
    for cfg in cfgs:
        count = names.get(cfg.name, 0)
        names[cfg.name] = count + 1
        label = cfg.name if count == 0 else f"{cfg.name}_{count + 1}"
        if args.out is not None:
            directory = Path(args.out) / label if len(cfgs) > 1 else Path(args.out)
        elif count:
            directory = Path(cfg.outputs.directory + f"_{count + 1}")
        else:
            directory = Path(cfg.outputs.directory)
        cfg = cfg.with_overrides(n_elements=args.elements, dt=args.dt, directory=directory)
        if count:
            cfg = replace(cfg, name=label)
        out.append(cfg.validate())
    return out


def _check_writable(cfg):
    directory = Path(cfg.outputs.directory)
    directory.mkdir(parents=True, exist_ok=True)
    if not os.access(directory, os.W_OK):
        raise PermissionError(f"output directory {directory} is not writable")


def _run_one(cfg, write=True):
    from .scenario import run_scenario

    res = run_scenario(cfg, write=write)
    text = res.summary_text()
    if res.files:
        text += f"outputs in {cfg.outputs.directory}\n"
    return text, res.exit_code


def cmd_run(args):
    from .config import ConfigError

    try:
        cfgs = _load_scenarios(args)
        if not args.no_write:
            for cfg in cfgs:
                _check_writable(cfg)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write = not args.no_write
    if len(cfgs) == 1 or args.jobs == 1:
        results = [_run_one(c, write) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, cfgs, [write] * len(cfgs)))
    code = EXIT_OK
    for text, rc in results:
        sys.stdout.write(text)
        code = max(code, rc)
    return code


def cmd_presets(args):
    from .presets import describe

    for line in describe():
        print(line)
    return EXIT_OK


def cmd_verify(args):
    from .verify import SUITES, run_verify

    unknown = [s for s in (args.suite or []) if s not in SUITES]
    if unknown:
        print(f"error: unknown suite(s) {', '.join(unknown)}; choose from {', '.join(SUITES)}",
              file=sys.stderr)
        return EXIT_CONFIG
    ok, _ = run_verify(args.level, seed=args.seed, jobs=args.jobs, suites=args.suite)
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv=None):
    args = _parser().parse_args(argv)
    handler = {"run": cmd_run, "presets": cmd_presets, "verify": cmd_verify}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
