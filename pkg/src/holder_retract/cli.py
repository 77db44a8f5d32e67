"""Command line entry point: ``holder-retract {mean,retract,verify,holder,threshold}``.

Exit status: 0 all criteria pass, 1 a criterion failed (or the mean is
infeasible, or the iteration did not converge), 2 config or input error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import suite
from .analysis import goebel_kirk_threshold, hilbert_modulus, lifschitz_threshold
from .config import (
    ConfigError,
    ExperimentConfig,
    build_action,
    build_mean,
    build_x0,
    load_config,
    rng_streams,
)
from .retraction import DivergenceError, build_retraction, iterate_retraction
from .semigroups import Infeasible

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
MODULUS_GRID = (0.0, 0.5, 1.0, 1.5, 2.0)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Path):
        return str(obj)
    return obj


class Run:
    def __init__(self, command: str, cfg: ExperimentConfig | None):
        self.command = command
        self.cfg = cfg
        self.report: dict = {"command": command}
        if cfg is not None:
            self.report["config"] = cfg.echo()
            self.report["seed"] = cfg.seed
        self.criteria: list[suite.Criterion] = []
        self.timings: dict[str, float] = {}
        self.csv_tables: dict[str, tuple[list[str], list[list]]] = {}
        self._t0 = time.perf_counter()

    def timed(self, name: str, fn, *args, **kw):
        t = time.perf_counter()
        out = fn(*args, **kw)
        self.timings[name] = time.perf_counter() - t
        return out

    def add(self, *crits) -> None:
        for c in crits:
            if isinstance(c, list):
                self.criteria.extend(c)
            else:
                self.criteria.append(c)

    @property
    def failed(self) -> bool:
        return any(c.passed is False for c in self.criteria)

    def finish(self, status: int | None = None) -> dict:
        self.report["criteria"] = [c.as_dict() for c in self.criteria]
        if status is None:
            status = EXIT_FAIL if self.failed else EXIT_PASS
        self.report["exit_status"] = status
        self.report["status"] = {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_ERROR: "error"}[status]
        self.timings["total"] = time.perf_counter() - self._t0
        self.report["timings"] = self.timings
        return self.report


def _trace_table(trace):
    header = ["n", "gap", "residual"] + [f"x{i}" for i in range(trace.limit.size)]
    return header, list(trace.rows())


def cmd_mean(cfg: ExperimentConfig) -> tuple[Run, int]:
    run = Run("mean", cfg)
    mean = run.timed("mean", build_mean, cfg)
    if isinstance(mean, Infeasible):
        run.report["mean"] = {"feasible": False, "status": mean.status, "message": mean.message}
        return run, EXIT_FAIL
    run.report["mean"] = {"feasible": True, **mean.summary()}
    run.add(suite.mean_invariance(mean))
    return run, None


def _setup(run: Run, cfg: ExperimentConfig):
    mean = run.timed("mean", build_mean, cfg)
    if isinstance(mean, Infeasible):
        run.report["mean"] = {"feasible": False, "status": mean.status, "message": mean.message}
        raise _Infeasible()
    run.report["mean"] = {"feasible": True, **mean.summary()}
    action = build_action(cfg)
    run.report["action"] = {"family": action.family, "declared_k": action.declared_k, "params": action.params}
    streams = rng_streams(cfg.seed)
    x0 = build_x0(cfg, action, streams["x0"])
    return mean, action, x0, streams


class _Infeasible(Exception):
    pass


def _retract(run: Run, cfg, mean, action, x0):
    try:
        trace = run.timed("iterate", iterate_retraction, action, mean, x0, cfg.tol, cfg.max_iter)
    except DivergenceError as exc:
        run.report["trace"] = {"diverged_at": exc.index}
        run.add(suite.Criterion("finite_iterates", False, None, None, str(exc)))
        return None
    run.report["trace"] = {"x0": x0.tolist(), **trace.summary()}
    run.csv_tables["trace"] = _trace_table(trace)
    return trace


def cmd_retract(cfg: ExperimentConfig) -> tuple[Run, int | None]:
    run = Run("retract", cfg)
    try:
        mean, action, x0, _ = _setup(run, cfg)
    except _Infeasible:
        return run, EXIT_FAIL
    trace = _retract(run, cfg, mean, action, x0)
    if trace is not None:
        run.add(suite.Criterion("converged", trace.converged, trace.gaps[-1] if trace.gaps else 0.0, cfg.tol, "final gap"))
        if action.family == "contraction":
            run.add(suite.contraction_limit(action, mean, trace))
    return run, None


def cmd_verify(cfg: ExperimentConfig, holder_only: bool = False) -> tuple[Run, int | None]:
    run = Run("holder" if holder_only else "verify", cfg)
    try:
        mean, action, x0, streams = _setup(run, cfg)
    except _Infeasible:
        run.add(suite.Criterion("mean_feasible", False, None, None, "no left invariant mean"))
        return run, None
    opts = cfg.verify_options()
    regime = suite.theorem_regime(action, mean)
    run.report["regime"] = regime
    R = build_retraction(action, mean, cfg.tol, cfg.max_iter)

    if holder_only:
        if regime != "contracting":
            run.add(suite.skip("holder", f"needs an exact mean and 1 < k < sqrt 2 (regime: {regime})"))
            return run, None
        crit, est = run.timed("holder", suite.holder, R, action, opts["pairs"], streams["holder"])
        run.add(crit)
        run.report["holder"] = est.as_dict()
        run.csv_tables["holder_pairs"] = (["d_xy", "d_RxRy"], est.pairs.tolist())
        return run, None

    run.add(suite.mean_invariance(mean))
    run.add(run.timed("structure", suite.action_structure, action, opts["samples"], streams["lipschitz"]))
    trace = _retract(run, cfg, mean, action, x0)

    if regime == "contracting":
        traces = run.timed("traces", suite.traces_from_starts, action, mean, opts["starts"], cfg.tol, cfg.max_iter, streams["starts"])
        if trace is not None:
            traces.append(trace)
        run.add(suite.residual_contraction(action, traces), suite.gap_bound(action, traces), suite.decay_fit(action, traces))
    else:
        run.add(suite.skip("residual_contraction", f"regime {regime}"), suite.skip("gap_bound", f"regime {regime}"))
    if regime == "nonexpansive":
        run.add(suite.one_step_collapse(action, mean, opts["starts"], streams["starts"]))
    else:
        run.add(suite.skip("one_step_collapse", f"regime {regime}"))

    crits, rep = run.timed("retraction", suite.retraction_algebra, R, action, mean, opts["samples"], opts["tol"], streams["verify"])
    run.add(crits)
    run.report["retraction"] = rep
    if mean.exact:
        run.add(suite.oracle_equivalence(R, action, mean, opts["samples"], streams["verify"]))
    if regime == "contracting":
        crit, est = run.timed("holder", suite.holder, R, action, opts["pairs"], streams["holder"])
        run.add(crit)
        run.report["holder"] = est.as_dict()
        run.csv_tables["holder_pairs"] = (["d_xy", "d_RxRy"], est.pairs.tolist())
    if action.family == "contraction" and trace is not None:
        run.add(suite.contraction_limit(action, mean, trace))
    return run, None


def cmd_threshold() -> tuple[Run, int | None]:
    run = Run("threshold", None)
    gk = goebel_kirk_threshold()
    li = lifschitz_threshold()
    run.report["goebel_kirk_threshold"] = gk
    run.report["lifschitz_threshold"] = li
    run.report["modulus_table"] = [{"eps": e, "delta": hilbert_modulus(e)} for e in MODULUS_GRID]
    run.add(
        suite.Criterion("goebel_kirk", abs(gk - math.sqrt(5) / 2) <= 1e-9, gk, math.sqrt(5) / 2, "root of k(1 - delta(1/k)) = 1"),
        suite.Criterion("lifschitz", abs(li - math.sqrt(2)) <= 1e-12, li, math.sqrt(2), "sqrt 2"),
    )
    run.csv_tables["modulus"] = (["eps", "delta"], [[e, hilbert_modulus(e)] for e in MODULUS_GRID])
    return run, None


def _write_outputs(run: Run, report: dict, out: Path, fmt: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    stem = run.cfg.scenario if run.cfg is not None else "thresholds"
    if fmt in ("json", "both"):
        (out / f"{stem}_{run.command}.json").write_text(json.dumps(_clean(report), indent=2, sort_keys=True) + "\n")
    if fmt in ("csv", "both"):
        for name, (header, rows) in run.csv_tables.items():
            with open(out / f"{stem}_{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holder-retract", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs_config in (("mean", True), ("retract", True), ("verify", True), ("holder", True), ("threshold", False)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, required=needs_config)
        sp.add_argument("--out", type=Path, default=None, help="directory for report files")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--format", choices=("json", "csv", "both"), default="json")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "threshold":
            run, status = cmd_threshold()
        else:
            cfg = load_config(args.config, seed=args.seed)
            handler = {
                "mean": cmd_mean,
                "retract": cmd_retract,
                "verify": cmd_verify,
                "holder": lambda c: cmd_verify(c, holder_only=True),
            }[args.command]
            run, status = handler(cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = run.finish(status)
    print(json.dumps(_clean(report), indent=2, sort_keys=True))
    if args.out is not None:
        _write_outputs(run, report, args.out, args.format)
    for c in run.criteria:
        d = c.as_dict()
        print(f"[{d['status'].upper():4}] {c.name}: {d['value']} (threshold {d['threshold']})", file=sys.stderr)
    return report["exit_status"]


if __name__ == "__main__":
    sys.exit(main())
