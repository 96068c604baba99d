"""Run configuration: JSON schema, validation, and resolved defaults.

Configs are strict: unknown keys are rejected and every rational value is
either an integer or a "num/den" string, so a config round-trips exactly.
The resolved form (defaults filled in) is echoed into output metadata.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import ConfigError
from .rootsys import FAMILIES, QParams, RootSystem, build_root_system
from .walk import WalkSpec

_TOP_KEYS = {
    "family", "q", "walk", "p_list", "n_schedule", "gamma", "r_n_rule",
    "resolution", "precision", "out_dir", "seed", "threads",
}

_DEFAULT_WALKS = {
    # Lazified nearest-generator walks, aperiodic for every family.
    1: [([0], "1/10"), ([1], "9/10")],
    2: [([0, 0], "1/10"), ([1, 0], "9/20"), ([0, 1], "9/20")],
}


def parse_rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where}: bad rational {value!r}: {exc}") from exc
    raise ConfigError(f"{where}: expected int or 'num/den' string, got {type(value).__name__}")


def rational_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_p(value: Any, where: str) -> float:
    if value in ("inf", "Infinity", "oo"):
        return math.inf
    if isinstance(value, str):
        value = float(Fraction(value))
    p = float(value)
    if p < 1:
        raise ConfigError(f"{where}: p must be >= 1, got {p}")
    return p


@dataclass
class RunConfig:
    family: str
    q: dict[int, Fraction]
    walk_coeffs: dict[tuple, Fraction]
    p_list: list[float]
    n_schedule: list[int]
    gamma_lt2: float | None
    gamma_eq2: float | None
    r_n_rule: str
    resolution: int | None
    precision: str
    out_dir: str
    seed: int
    threads: int
    raw: dict = field(default_factory=dict, repr=False)

    def root_system(self) -> RootSystem:
        return build_root_system(self.family)

    def qparams(self) -> QParams:
        return QParams.create(self.root_system(), self.q)

    def walk(self) -> WalkSpec:
        return WalkSpec.create(self.root_system(), self.walk_coeffs)

    def resolved(self) -> dict:
        """Fully resolved form for provenance metadata."""
        return {
            "family": self.family,
            "q": {str(k): rational_str(v) for k, v in sorted(self.q.items())},
            "walk": {"coeffs": [
                {"lambda": list(lam), "c": rational_str(c)}
                for lam, c in sorted(self.walk_coeffs.items())
            ]},
            "p_list": ["inf" if p == math.inf else p for p in self.p_list],
            "n_schedule": self.n_schedule,
            "gamma": {"lt2": self.gamma_lt2, "eq2": self.gamma_eq2},
            "r_n_rule": self.r_n_rule,
            "resolution": self.resolution,
            "precision": self.precision,
            "out_dir": self.out_dir,
            "seed": self.seed,
            "threads": self.threads,
        }


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} line {exc.lineno}: {exc.msg}") from exc
    return parse_config(data, overrides)


def parse_config(data: dict, overrides: dict | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    data = dict(data)
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "family" not in data:
        raise ConfigError("config key 'family' is required")
    family = data["family"]
    if family not in FAMILIES:
        raise ConfigError(f"key 'family': unknown family {family!r}; choose from {FAMILIES}")
    rs = build_root_system(family)

    qmap: dict[int, Fraction] = {}
    q_raw = data.get("q")
    if q_raw is None:
        qmap = {i: Fraction(2) for i in range(rs.rank + 1)}
    else:
        if not isinstance(q_raw, dict):
            raise ConfigError("key 'q': expected an object {label: value}")
        for k, v in q_raw.items():
            try:
                label = int(k)
            except ValueError as exc:
                raise ConfigError(f"key 'q': bad label {k!r}") from exc
            qmap[label] = parse_rational(v, f"q[{k}]")

    walk_raw = data.get("walk")
    coeffs: dict[tuple, Fraction] = {}
    if walk_raw is None:
        for lam, c in _DEFAULT_WALKS[rs.rank]:
            coeffs[tuple(lam)] = Fraction(c)
    else:
        if not isinstance(walk_raw, dict) or set(walk_raw) != {"coeffs"}:
            raise ConfigError("key 'walk': expected {'coeffs': [...]}")
        for i, rec in enumerate(walk_raw["coeffs"]):
            if set(rec) != {"lambda", "c"}:
                raise ConfigError(f"walk.coeffs[{i}]: expected keys 'lambda' and 'c'")
            lam = tuple(int(x) for x in rec["lambda"])
            if len(lam) != rs.rank:
                raise ConfigError(f"walk.coeffs[{i}]: lambda must have rank {rs.rank}")
            coeffs[lam] = parse_rational(rec["c"], f"walk.coeffs[{i}].c")

    p_list = [parse_p(p, "p_list") for p in data.get("p_list", [1, "3/2", 2, 3, "inf"])]
    n_schedule = [int(n) for n in data.get("n_schedule", [50, 100, 200, 400])]
    if any(n < 0 for n in n_schedule):
        raise ConfigError("n_schedule entries must be nonnegative")

    gamma = data.get("gamma", {})
    if not isinstance(gamma, dict) or set(gamma) - {"lt2", "eq2"}:
        raise ConfigError("key 'gamma': expected {'lt2': float?, 'eq2': float?}")

    r_n_rule = data.get("r_n_rule", "log_sq")
    precision = data.get("precision", "double")
    if precision not in ("double", "extended"):
        raise ConfigError("key 'precision': must be 'double' or 'extended'")
    resolution = data.get("resolution")
    if resolution is not None:
        resolution = int(resolution)
        if resolution < 16:
            raise ConfigError("key 'resolution': must be >= 16")

    cfg = RunConfig(
        family=family,
        q=qmap,
        walk_coeffs=coeffs,
        p_list=p_list,
        n_schedule=sorted(n_schedule),
        gamma_lt2=gamma.get("lt2"),
        gamma_eq2=gamma.get("eq2"),
        r_n_rule=r_n_rule,
        resolution=resolution,
        precision=precision,
        out_dir=str(data.get("out_dir", "out")),
        seed=int(data.get("seed", 0)),
        threads=int(data.get("threads", 1)),
        raw=data,
    )
    # Eagerly validate q and walk against the family.
    cfg.qparams()
    cfg.walk()
    return cfg


__all__ = ["RunConfig", "load_config", "parse_config", "parse_rational", "rational_str"]
