"""JSON run configuration: schema, validation and construction of model objects."""
from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .domain import build_domain
from .energy import Problem
from .io import read_grid_function
from .model import PowerNonlinearity, Potential
from .solver import SolverConfig


class ConfigError(ValueError):
    pass


_number = {"type": "number"}
_posint = {"type": "integer", "minimum": 1}
_table = {"type": "array"}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "plattice run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["domain", "p", "nonlinearity"],
    "properties": {
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dim", "side"],
            "properties": {
                "dim": _posint,
                "side": _posint,
                "boundary": {"enum": ["dirichlet", "torus"]},
                "generators": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "integer"}},
                },
            },
        },
        "p": {"type": "number", "exclusiveMinimum": 1},
        "potential": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["mode"],
                    "properties": {"mode": {"const": "constant"}, "value": _number},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["mode", "period", "table"],
                    "properties": {"mode": {"const": "periodic"}, "period": _posint, "table": _table},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["mode", "limit"],
                    "properties": {
                        "mode": {"const": "decaying"},
                        "limit": _number,
                        "depth": {"type": "number", "minimum": 0},
                        "width": {"type": "number", "exclusiveMinimum": 0},
                        "deviations": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["at", "value"],
                                "properties": {
                                    "at": {"type": "array", "items": {"type": "integer"}},
                                    "value": {"type": "number", "maximum": 0},
                                },
                            },
                        },
                    },
                },
            ]
        },
        "nonlinearity": {
            "type": "object",
            "additionalProperties": False,
            "required": ["q"],
            "properties": {
                "family": {"const": "power"},
                "q": {"type": "number", "exclusiveMinimum": 1},
                "weight": {
                    "oneOf": [
                        {"type": "number", "exclusiveMinimum": 0},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["period", "table"],
                            "properties": {"period": _posint, "table": _table},
                        },
                    ]
                },
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_iterations": _posint,
                "residual_tol": {"type": "number", "exclusiveMinimum": 0},
                "fiber_tol": {"type": "number", "exclusiveMinimum": 0},
                "initial_guess": {
                    "oneOf": [
                        {"enum": ["bump", "random", "random_signed"]},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["file"],
                            "properties": {"file": {"type": "string"}},
                        },
                    ]
                },
                "bump_center": {"type": "array", "items": _number},
                "bump_width": {"type": "number", "exclusiveMinimum": 0},
                "step_initial": {"type": "number", "exclusiveMinimum": 0},
                "backtrack": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "armijo_c": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "step_rule": {"enum": ["bb", "reset"]},
                "negative_part_exponent": {"type": "number"},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "override_hypotheses": {"type": "boolean"},
        "sobolev": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"q": {"type": "number"}, "starts": _posint},
        },
        "fiber": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "u": {"type": "string"},
                "t": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
            },
        },
        "distinct": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "starts": _posint,
                "start_mode": {"enum": ["translated", "cells", "random", "mixed"]},
                "period": _posint,
                "delta": {"oneOf": [{"type": "number", "minimum": 0}, {"const": "inf"}, {"type": "null"}]},
                "sign_companions": {"type": "boolean"},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"axis": {"type": "string"}, "values": {"type": "array", "items": _number}},
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tolerances": {"type": "object", "additionalProperties": _number},
                "samples": {"type": "object", "additionalProperties": _posint},
            },
        },
    },
}

AXIS_ALIASES = {"side": "domain.side", "q": "nonlinearity.q", "p": "p"}


@dataclass
class RunConfig:
    raw: dict
    source: Path | None
    problem: Problem
    solver: SolverConfig
    seed: int

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})


def _line_of(text: str, path: list) -> int | None:
    """Best-effort line number of the innermost key of ``path`` in ``text``."""
    keys = [k for k in path if isinstance(k, str)]
    pos = 0
    line = None
    for key in keys:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if not m:
            break
        pos = m.end()
        line = text.count("\n", 0, m.start()) + 1
    return line


def validate(raw: Any, text: str | None = None, where: str = "config") -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if not errors:
        return
    err = jsonschema.exceptions.best_match(errors)
    path = list(err.absolute_path)
    dotted = ".".join(str(k) for k in path) or "<root>"
    anchor = path
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        if extra:
            anchor = path + [extra[0]]
    line = _line_of(text, anchor) if text else None
    loc = f"{where}:{line}" if line else where
    raise ConfigError(f"{loc}: {dotted}: {err.message}")


def load_raw(path: str | Path) -> tuple[dict, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    validate(raw, text, str(path))
    return raw, text


def build(raw: dict, source: Path | None = None, seed: int | None = None,
          override: bool | None = None) -> RunConfig:
    """Construct model objects from a validated config dict."""
    validate(raw, where=str(source) if source else "config")
    where = str(source) if source else "config"
    try:
        dom = raw["domain"]
        d = build_domain(dom["dim"], dom["side"], dom.get("boundary", "dirichlet"), dom.get("generators"))
        potential = Potential.from_dict(raw.get("potential", {"mode": "constant", "value": 0.0}))
        nl = PowerNonlinearity.from_dict(raw["nonlinearity"])
        pr = Problem(d, potential, nl, float(raw["p"]))
    except (ValueError, KeyError, IndexError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc

    seed = int(raw.get("seed", 0)) if seed is None else int(seed)
    override = bool(raw.get("override_hypotheses", False)) if override is None else override
    s = dict(raw.get("solver", {}))
    guess = s.pop("initial_guess", "bump")
    if isinstance(guess, dict):
        gpath = Path(guess["file"])
        if source is not None and not gpath.is_absolute():
            gpath = source.parent / gpath
        try:
            guess = read_grid_function(gpath, d)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{where}: solver.initial_guess: {exc}") from exc
    if "bump_center" in s:
        s["bump_center"] = tuple(s["bump_center"])
    try:
        solver = SolverConfig(pr, initial_guess=guess, seed=seed, override_hypotheses=override, **s)
    except ValueError as exc:
        raise ConfigError(f"{where}: solver: {exc}") from exc
    return RunConfig(raw, source, pr, solver, seed)


def load(path: str | Path, seed: int | None = None, override: bool | None = None) -> RunConfig:
    raw, _ = load_raw(path)
    return build(raw, Path(path), seed, override)


def with_value(raw: dict, dotted: str, value: Any) -> dict:
    """Copy of ``raw`` with the entry at ``dotted`` (e.g. ``potential.value``) replaced."""
    dotted = AXIS_ALIASES.get(dotted, dotted)
    out = copy.deepcopy(raw)
    node = out
    keys = dotted.split(".")
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise ConfigError(f"sweep axis {dotted!r}: no section {k!r} in config")
        node = node[k]
    if isinstance(node.get(keys[-1]), (dict, list)):
        raise ConfigError(f"sweep axis {dotted!r} does not name a scalar")
    if keys[-1] in ("side", "dim", "period", "max_iterations"):
        if float(value) != int(value):
            raise ConfigError(f"sweep axis {dotted!r} needs integer values, got {value}")
        value = int(value)
    node[keys[-1]] = value
    return out
