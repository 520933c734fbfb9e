"""Experiment configuration files (YAML, or JSON by ``.json`` suffix).

Example::

    experiment: inverse
    seed: 0
    domain: {kind: periodic, N: 1024}
    function: {builder: lacunary, n: 1, gamma: 0.5, J: 8}
    params:
      n: 1
      k: 2
      omega: {form: power, gamma: 0.5}

Validation errors are raised as :class:`ConfigError` carrying the dotted
field path and, where the source text allows it, the line number.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .approx import METHODS, ModulusSpec
from .builders import BUILDERS
from .errors import ConfigError, ParameterError
from .function_space import Domain
from .weights import WeightSpec

EXPERIMENTS = ("bernstein", "bernstein_delta", "jackson", "inverse", "weights_check")
TOP_KEYS = ("experiment", "name", "seed", "output", "domain", "weight", "function", "params")
RANDOMIZED = ("bernstein", "bernstein_delta")
NEEDS_FUNCTION = ("jackson", "inverse")

_POW2 = [1, 2, 4, 8, 16, 32, 64]

# per-experiment parameter defaults; the keys double as the allowed set
DEFAULTS = {
    "bernstein": {"n_max": 8, "alphas": _POW2, "p": 2, "probes": 20, "eigen_probes": True},
    "bernstein_delta": {"k": 1, "alphas": _POW2[:5], "h_vals": [0.01, 0.05, 0.1, 0.5], "p": 2,
                        "probes": 20, "eigen_probes": True},
    "jackson": {"k": 1, "r_vals": [2, 4, 8, 16, 32, 64, 128], "p": 2, "method": None,
                "sobolev_m": 0, "n_tau": 64, "spread_tol": 10.0},
    "inverse": {"n": 1, "k": 1, "omega": {"form": "power", "gamma": 0.5}, "m": None,
                "t_vals": [2.0**-j for j in range(10, 0, -1)], "p": 2, "method": None,
                "r_max": None, "n_tau": 64, "expect_hypothesis": "hold"},
    "weights_check": {"T_max": 20.0, "n_samples": 200, "expect_admissible": True},
}
GRIDS = ("alphas", "h_vals", "r_vals", "t_vals")
INTS = ("n_max", "probes", "k", "n", "sobolev_m", "n_tau", "n_samples")


def _line_map(text: str) -> dict:
    """Dotted key path -> 1-based line, from the YAML node tree (JSON is YAML too)."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    out = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = f"{path}.{k.value}" if path else str(k.value)
                out[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                p = f"{path}[{i}]"
                out[p] = v.start_mark.line + 1
                walk(v, p)

    if root is not None:
        walk(root, "")
    return out


def parse_p(value, where: str = "params.p") -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
        return math.inf
    try:
        p = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number >= 1 or 'inf', got {value!r}", where) from None
    if not p >= 1:
        raise ConfigError(f"norm index must be >= 1, got {value!r}", where)
    return p


@dataclass
class ExperimentConfig:
    experiment: str
    domain: dict
    params: dict
    seed: int | None = None
    name: str | None = None
    weight: dict | None = None
    function: dict | None = None
    output: str | None = None
    lines: dict = field(default_factory=dict, repr=False, compare=False)
    source: str | None = field(default=None, compare=False)

    # ------------------------------------------------------------------ load
    @classmethod
    def from_dict(cls, raw, lines: dict | None = None, source: str | None = None,
                  experiment: str | None = None) -> "ExperimentConfig":
        lines = lines or {}

        def err(msg, path):
            raise ConfigError(msg, path, lines.get(path), source)

        if not isinstance(raw, dict):
            err("config must be a mapping at the top level", "")
        for k in raw:
            if k not in TOP_KEYS:
                err(f"unknown key {k!r}; expected one of {', '.join(TOP_KEYS)}", str(k))
        exp = raw.get("experiment", experiment)
        if exp is None:
            err("missing 'experiment'", "experiment")
        if exp not in EXPERIMENTS:
            err(f"unknown experiment {exp!r}; expected one of {', '.join(EXPERIMENTS)}",
                "experiment")
        if experiment is not None and exp != experiment:
            err(f"config is for {exp!r} but the subcommand is {experiment!r}", "experiment")
        params = raw.get("params") or {}
        if not isinstance(params, dict):
            err("params must be a mapping", "params")
        for k in params:
            if k not in DEFAULTS[exp]:
                err(f"unknown parameter {k!r} for {exp}; expected one of "
                    f"{', '.join(DEFAULTS[exp])}", f"params.{k}")
        merged = copy.deepcopy(DEFAULTS[exp])
        merged.update(copy.deepcopy(params))
        seed = raw.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)
                                 or not 0 <= seed < 2**64):
            err(f"seed must be an unsigned 64-bit integer, got {seed!r}", "seed")
        cfg = cls(exp, raw.get("domain") or {"kind": "periodic", "N": 1024}, merged, seed,
                  raw.get("name"), raw.get("weight"), raw.get("function"), raw.get("output"),
                  lines, source)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path, experiment: str | None = None) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
        try:
            if path.suffix.lower() == ".json":
                raw = json.loads(text)
            else:
                raw = yaml.safe_load(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, line=exc.lineno, source=str(path)) from None
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            msg = getattr(exc, "problem", None) or str(exc)
            raise ConfigError(msg, line=mark.line + 1 if mark else None,
                              source=str(path)) from None
        return cls.from_dict(raw, _line_map(text), str(path), experiment)

    # -------------------------------------------------------------- validate
    def _err(self, msg, path):
        raise ConfigError(msg, path, self.lines.get(path), self.source)

    def validate(self) -> None:
        exp, prm = self.experiment, self.params
        try:
            self.build_domain()
        except (ParameterError, KeyError, TypeError, ValueError) as exc:
            self._err(f"invalid domain: {exc}", "domain")
        if exp == "weights_check":
            if self.weight is None:
                self._err("weights_check needs a 'weight' record {class, params}", "weight")
            try:
                self.build_weight()
            except (ParameterError, KeyError, TypeError, ValueError) as exc:
                self._err(f"invalid weight: {exc}", "weight")
        if exp in NEEDS_FUNCTION:
            f = self.function
            if not isinstance(f, dict) or "builder" not in f:
                self._err(f"{exp} needs a 'function' record with a 'builder'", "function")
            if f["builder"] not in BUILDERS:
                self._err(f"unknown builder {f['builder']!r}; expected one of "
                          f"{', '.join(BUILDERS)}", "function.builder")
        elif self.function is not None:
            self._err(f"{exp} takes no test function", "function")
        if exp in RANDOMIZED and self.seed is None:
            self._err("seed is required for randomized probes", "seed")
        for g in GRIDS:
            if g in prm:
                v = prm[g]
                if not isinstance(v, list) or not v:
                    self._err("grid must be a non-empty list", f"params.{g}")
                for i, a in enumerate(v):
                    if isinstance(a, bool) or not isinstance(a, (int, float)):
                        self._err(f"grid entries must be numbers, got {a!r}", f"params.{g}[{i}]")
        for key in INTS:
            if key in prm and (isinstance(prm[key], bool) or not isinstance(prm[key], int)):
                self._err(f"must be an integer, got {prm[key]!r}", f"params.{key}")
        if "p" in prm:
            try:
                prm["p"] = parse_p(prm["p"])
            except ConfigError as exc:
                self._err(exc.msg, "params.p")
        if prm.get("method") is not None and prm["method"] not in METHODS:
            self._err(f"method must be one of {', '.join(METHODS)}", "params.method")
        if exp == "inverse":
            try:
                ModulusSpec.from_record(prm["omega"])
            except (ParameterError, KeyError, TypeError, ValueError) as exc:
                self._err(f"invalid modulus: {exc}", "params.omega")
            if prm["expect_hypothesis"] not in ("hold", "fail"):
                self._err("must be 'hold' or 'fail'", "params.expect_hypothesis")
        for key in ("eigen_probes", "expect_admissible"):
            if key in prm and not isinstance(prm[key], bool):
                self._err(f"must be true or false, got {prm[key]!r}", f"params.{key}")

    # ----------------------------------------------------------------- build
    def build_domain(self) -> Domain:
        return Domain.from_record(self.domain)

    def build_weight(self) -> WeightSpec:
        return WeightSpec.from_record(self.weight)

    def resolved(self) -> dict:
        """Full config with defaults filled in, for echoing into reports."""
        prm = dict(self.params)
        if "p" in prm and math.isinf(prm["p"]):
            prm["p"] = "inf"
        out = {
            "experiment": self.experiment,
            "domain": self.build_domain().to_record(),
            "params": prm,
            "seed": self.seed,
        }
        if self.name is not None:
            out["name"] = self.name
        if self.weight is not None:
            out["weight"] = self.build_weight().to_record()
        if self.function is not None:
            out["function"] = self.function
        return out
