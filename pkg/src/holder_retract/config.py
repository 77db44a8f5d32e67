"""YAML experiment configs and the objects they describe.

A config looks like::

    scenario: shear
    body: {kind: ellipsoid, shape: [[1, 0.3], [0, 1]], radius: 1.0}
    semigroup: Z_2            # or "N-window:1000", or a table file path
    action: {family: involution, matrix: [[1, -0.6], [0, -1]]}
    mean: exact               # or "folner:1000", or {weights: [1, 0]}
    x0: [0.2, 0.4]            # or "sampled"
    tol: 1.0e-12
    seed: 0
    verify: {samples: 100, pairs: 1000, starts: 20, tol: 1.0e-6}
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import actions
from .geometry import Ball, Box, ConvexBody, Ellipsoid, contains, sample
from .semigroups import (
    FiniteSemigroup,
    Infeasible,
    Mean,
    Naturals,
    custom_mean,
    cyclic_group,
    folner_mean,
    read_table_file,
    solve_left_invariant_mean,
)


class ConfigError(ValueError):
    pass


VERIFY_DEFAULTS = {"samples": 100, "pairs": 1000, "starts": 20, "tol": 1e-6}


@dataclass
class ExperimentConfig:
    scenario: str
    body: dict | None
    semigroup: str
    action: dict | None
    dimension: int | None = None
    mean: object = "exact"
    x0: object = "sampled"
    tol: float = 1e-12
    max_iter: int | None = None
    seed: int = 0
    verify: dict = field(default_factory=dict)
    negative_control: bool = False
    base_dir: Path = field(default=Path("."), repr=False)

    def echo(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "base_dir"}
        out["verify"] = self.verify_options()
        return out

    def verify_options(self) -> dict:
        return {**VERIFY_DEFAULTS, **(self.verify or {})}


def load_config(path, seed: int | None = None) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    known = set(ExperimentConfig.__dataclass_fields__) - {"base_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("scenario", "semigroup"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")
    raw.setdefault("body", None)
    raw.setdefault("action", None)
    cfg = ExperimentConfig(**raw, base_dir=path.parent)
    if seed is not None:
        cfg.seed = seed
    if not (isinstance(cfg.tol, (int, float)) and cfg.tol > 0):
        raise ConfigError("tol must be a positive number")
    if cfg.max_iter is not None and (not isinstance(cfg.max_iter, int) or cfg.max_iter < 1):
        raise ConfigError("max_iter must be a positive integer")
    unknown_verify = set(cfg.verify or {}) - set(VERIFY_DEFAULTS)
    if unknown_verify:
        raise ConfigError(f"unknown verify options {sorted(unknown_verify)}")
    # fail fast on structural errors
    parse_semigroup(cfg)
    if cfg.body is not None:
        build_body(cfg.body)
    return cfg


def _array(spec: dict, key: str, ndim: int | None = None) -> np.ndarray:
    if key not in spec:
        raise ConfigError(f"missing {key!r} in {spec}")
    arr = np.asarray(spec[key], dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ConfigError(f"{key!r} must be {ndim}-dimensional")
    return arr


def build_body(spec: dict) -> ConvexBody:
    """``{kind: ball|box|ellipsoid, ...}`` to a convex body."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("body spec must be a mapping with a 'kind'")
    try:
        kind = spec["kind"]
        if kind == "ball":
            return Ball(_array(spec, "center", 1), float(spec.get("radius", 1.0)))
        if kind == "box":
            return Box(_array(spec, "lower", 1), _array(spec, "upper", 1))
        if kind == "ellipsoid":
            S = _array(spec, "shape", 2)
            center = spec.get("center")
            return Ellipsoid(S, float(spec.get("radius", 1.0)), None if center is None else np.asarray(center, float))
    except ValueError as exc:
        raise ConfigError(f"invalid body {spec}: {exc}") from exc
    raise ConfigError(f"unknown body kind {spec['kind']!r}")


_ZN = re.compile(r"^Z_(\d+)$")
_WINDOW = re.compile(r"^N-window:(\d+)$")


def parse_semigroup(cfg: ExperimentConfig) -> FiniteSemigroup | tuple[Naturals, int]:
    spec = str(cfg.semigroup)
    if m := _ZN.match(spec):
        n = int(m.group(1))
        if n < 1:
            raise ConfigError("Z_n needs n >= 1")
        return cyclic_group(n)
    if m := _WINDOW.match(spec):
        N = int(m.group(1))
        if N < 1:
            raise ConfigError("window length must be >= 1")
        return Naturals(), N
    path = Path(spec)
    if not path.is_absolute():
        path = cfg.base_dir / path
    if not path.is_file():
        raise ConfigError(f"semigroup table file not found: {path}")
    try:
        return read_table_file(path)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def build_mean(cfg: ExperimentConfig) -> Mean | Infeasible:
    sg = parse_semigroup(cfg)
    mode = cfg.mean
    if isinstance(mode, dict):
        if "weights" not in mode:
            raise ConfigError("custom mean needs 'weights'")
        domain = sg if isinstance(sg, FiniteSemigroup) else sg[0]
        try:
            return custom_mean(domain, mode["weights"], mode.get("support"))
        except ValueError as exc:
            raise ConfigError(f"invalid custom mean: {exc}") from exc
    mode = str(mode)
    if mode == "exact":
        if not isinstance(sg, FiniteSemigroup):
            raise ConfigError("exact means exist only for finite semigroups; use folner:N")
        return solve_left_invariant_mean(sg)
    if m := re.match(r"^folner:(\d+)$", mode):
        if isinstance(sg, FiniteSemigroup):
            raise ConfigError("folner means need an N-window semigroup")
        return folner_mean(int(m.group(1)))
    raise ConfigError(f"unknown mean mode {mode!r}")


def build_action(cfg: ExperimentConfig) -> actions.LipschitzAction:
    spec = cfg.action
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("action spec must be a mapping with a 'family'")
    if cfg.body is None:
        raise ConfigError("an action needs a body")
    body = build_body(cfg.body)
    if cfg.dimension is not None and cfg.dimension != body.dimension:
        raise ConfigError(f"dimension {cfg.dimension} does not match the body dimension {body.dimension}")
    family = spec["family"]
    try:
        if family == "involution":
            action = actions.involution_action(_array(spec, "matrix", 2), body)
        elif family == "cyclic":
            n = int(spec["n"])
            if "D" in spec:
                D = _array(spec, "D", 2)
            else:
                D = actions.rotation(2 * np.pi / n)
            S = np.asarray(spec.get("conjugator", np.eye(body.dimension)), dtype=float)
            action = actions.cyclic_linear_action(S, D, n, body)
        elif family == "twisted_involution":
            if not isinstance(body, Ball) or np.any(body.center != 0):
                raise ConfigError("twisted_involution needs a ball centered at the origin")
            action = actions.twisted_involution_action(float(spec["beta"]), body.radius, body.dimension)
        elif family == "contraction":
            action = actions.contraction_action(_array(spec, "p", 1), float(spec["q"]), body)
        elif family == "dist_perturbation":
            if "F_points" in spec:
                F = actions.PointSet(_array(spec, "F_points", 2))
            else:
                F = build_body(spec["F"])
            action = actions.dist_perturbation_map(F, _array(spec, "z", 1), float(spec["eps"]), body)
        else:
            raise ConfigError(f"unknown action family {family!r}")
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid action {spec}: {exc}") from exc
    sg = parse_semigroup(cfg)
    if action.is_finite:
        if not isinstance(sg, FiniteSemigroup) or sg.order != action.index.order:
            raise ConfigError(f"action family {family!r} is indexed by {action.index.order} elements, semigroup is {cfg.semigroup}")
        action = actions.with_index(action, sg)
    elif isinstance(sg, FiniteSemigroup):
        raise ConfigError(f"action family {family!r} needs an N-window semigroup")
    return action


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent named generators spawned from the single run seed."""
    names = ["x0", "verify", "holder", "starts", "lipschitz"]
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(child) for name, child in zip(names, children)}


def build_x0(cfg: ExperimentConfig, action: actions.LipschitzAction, rng: np.random.Generator) -> np.ndarray:
    if isinstance(cfg.x0, str):
        if cfg.x0 != "sampled":
            raise ConfigError(f"x0 must be a point or 'sampled', got {cfg.x0!r}")
        return sample(action.body, rng)
    x0 = np.asarray(cfg.x0, dtype=float)
    if x0.shape != (action.dimension,):
        raise ConfigError(f"x0 must have dimension {action.dimension}")
    if not contains(action.body, x0):
        raise ConfigError("x0 must lie in the body")
    return x0
