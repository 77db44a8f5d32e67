#!/usr/bin/env python3
"""Run `verify` on every shipped config and print a one-line summary per scenario.

Usage: python scripts/run_scenarios.py [--out results/]
"""
import argparse
import contextlib
import io
import json
from pathlib import Path

from holder_retract.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(path: Path, out: Path | None) -> dict:
    argv = ["verify", "--config", str(path)]
    if out is not None:
        argv += ["--out", str(out), "--format", "both"]
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = main(argv)
    return {"code": code, **json.loads(buf.getvalue())}


def main_() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()
    worst = 0
    for path in sorted(CONFIGS.glob("*.yaml")):
        rep = run(path, args.out)
        crit = rep["criteria"]
        failed = [c["name"] for c in crit if c["status"] == "fail"]
        negative = rep["config"].get("negative_control", False)
        expected = (rep["code"] != 0) if negative else (rep["code"] == 0)
        worst = max(worst, 0 if expected else 1)
        tag = "negative control" if negative else rep.get("regime", "")
        print(f"{path.stem:22s} exit={rep['code']} expected={'yes' if expected else 'NO'} [{tag}] failed={failed}")
    return worst


if __name__ == "__main__":
    raise SystemExit(main_())
