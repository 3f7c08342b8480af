"""``polyconv`` command line: run, verify, list, fit.

Exit codes: 0 all verdicts pass, 1 operational error, 2 a verdict failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .errors import PolyconvError
from .experiments.fitting import rate_fit
from .experiments.scenarios import SCENARIOS, run_scenario

EXIT_OK, EXIT_ERROR, EXIT_VERDICT = 0, 1, 2
DEFAULT_OUT = Path("reports")
X_COLUMNS = ("n", "p", "N", "k")


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _err(msg: str) -> int:
    print(f"polyconv: error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def cmd_run(config_path, out=None, seed=None, threads=None, tail_eps=None, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        cfg = load_config(config_path)
        overrides = {k: v for k, v in
                     {"seed": seed, "threads": threads, "tail_eps": tail_eps}.items() if v is not None}
        if overrides:
            cfg = replace(cfg, **overrides)
        report = run_scenario(cfg.scenario, cfg)
        out_dir = Path(out) if out is not None else (cfg.output_dir or DEFAULT_OUT)
        atomic_write(out_dir / f"{cfg.scenario}.csv", report.to_csv())
        atomic_write(out_dir / f"{cfg.scenario}.json", report.to_json())
    except (PolyconvError, KeyError, ValueError, OSError) as exc:
        return _err(str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc))
    for v in report.verdicts:
        print(v.line(), file=stream)
    for f in report.flags:
        print(f"FLAG  {f}", file=stream)
    return EXIT_OK if report.passed else EXIT_VERDICT


def cmd_list(stream=None) -> int:
    stream = stream or sys.stdout
    for sid in sorted(SCENARIOS):
        info = SCENARIOS[sid]
        print(f"{sid:<8} [{info.anchor}] {info.description}", file=stream)
    return EXIT_OK


def cmd_fit(csv_path, beta: float, stream=None) -> int:
    """Fit lhs against the sweep column of an emitted CSV, one fit per series."""
    stream = stream or sys.stdout
    try:
        with open(csv_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise PolyconvError(f"{csv_path} has no data rows")
        xcols = [c for c in X_COLUMNS if c in rows[0]]
        if not xcols or "lhs" not in rows[0]:
            raise PolyconvError(f"{csv_path} needs an lhs column and one of {X_COLUMNS}")
        groups: dict[str, list] = {}
        for r in rows:
            groups.setdefault(r.get("series") or r.get("law") or "all", []).append(r)
        fits = {}
        for name, grp in groups.items():
            # the sweep variable is the first candidate column that varies within the series
            xcol = next((c for c in xcols if len({r[c] for r in grp}) > 1), xcols[0])
            fits[name] = {"x": xcol, **rate_fit([(float(r[xcol]), float(r["lhs"])) for r in grp],
                                                 beta).to_dict()}
    except (PolyconvError, OSError, ValueError) as exc:
        return _err(str(exc))
    print(json.dumps(fits, indent=2), file=stream)
    return EXIT_OK


def cmd_verify(stream=None) -> int:
    from .acceptance import run_all

    return run_all(stream or sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyconv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario config and write <scenario>.csv/.json")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: config [output] dir or ./reports)")
    r.add_argument("--seed", type=int)
    r.add_argument("--threads", type=int)
    r.add_argument("--tail-eps", type=float)
    sub.add_parser("verify", help="run the acceptance suite")
    sub.add_parser("list", help="list registered scenarios")
    f = sub.add_parser("fit", help="fit log-log slopes to an emitted CSV")
    f.add_argument("csv")
    f.add_argument("--beta", type=float, required=True, help="nominal decay exponent")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed, args.threads, args.tail_eps)
    if args.command == "verify":
        return cmd_verify()
    if args.command == "list":
        return cmd_list()
    return cmd_fit(args.csv, args.beta)


if __name__ == "__main__":
    sys.exit(main())
