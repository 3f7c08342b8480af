"""Run every bundled scenario config and write CSV/JSON reports.

    python3 scripts/run_all_scenarios.py --out reports --threads 4
"""

import argparse
import sys
import time

from polyconv.acceptance import bundled_configs
from polyconv.cli import cmd_run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="reports")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    worst = 0
    for path in bundled_configs():
        t0 = time.perf_counter()
        print(f"== {path.stem}")
        code = cmd_run(path, out=args.out, threads=args.threads)
        print(f"   exit {code}, {time.perf_counter() - t0:.1f} s", file=sys.stderr)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
