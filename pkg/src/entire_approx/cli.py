"""Command-line batch runner.

    entire-approx <experiment> --config cfg.yaml [--out DIR] [--seed U64]
    entire-approx all [--config suite.yaml] [--out DIR] [--seed U64]

Exit status: 0 when every verdict passes, 1 when a verdict fails (the
failing check and table row are printed), 2 on config or parameter errors.
The output directory is ``--out``, else ``$ENTIRE_APPROX_OUT``, else the
config's ``output`` key, else ``./results``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import yaml

from .approx import ModulusSpec
from .builders import build
from .config import EXPERIMENTS, ExperimentConfig, _line_map
from .errors import ConfigError, ParameterError, RangeError, ResolutionError
from .experiments import (
    ExperimentReport,
    run_bernstein,
    run_bernstein_delta,
    run_inverse,
    run_jackson,
    run_weights_check,
)

OUT_ENV = "ENTIRE_APPROX_OUT"
DEFAULT_OUT = "results"


def execute(cfg: ExperimentConfig, seed: int | None = None) -> ExperimentReport:
    """Run one configured experiment; ``seed`` overrides the config's seed."""
    if seed is not None:
        cfg.seed = seed
    prm, d = cfg.params, cfg.build_domain()
    exp = cfg.experiment
    if exp == "bernstein":
        rep = run_bernstein(d, prm["n_max"], prm["alphas"], prm["p"], prm["probes"], cfg.seed,
                            prm["eigen_probes"])
    elif exp == "bernstein_delta":
        rep = run_bernstein_delta(d, prm["k"], prm["alphas"], prm["h_vals"], prm["p"],
                                  prm["probes"], cfg.seed, prm["eigen_probes"])
    elif exp == "jackson":
        rep = run_jackson(d, build(d, cfg.function), prm["k"], prm["r_vals"], prm["p"],
                          prm["method"], prm["sobolev_m"], prm["n_tau"], prm["spread_tol"])
    elif exp == "inverse":
        rep = run_inverse(d, build(d, cfg.function), prm["n"], prm["k"],
                          ModulusSpec.from_record(prm["omega"]), prm["m"], prm["t_vals"],
                          prm["p"], prm["method"], prm["r_max"], prm["n_tau"],
                          expect_hypothesis=prm["expect_hypothesis"])
    else:
        rep = run_weights_check(cfg.build_weight(), prm["T_max"], prm["n_samples"],
                                prm["expect_admissible"])
    rep.inputs["config"] = cfg.resolved()
    return rep


def _pow2(a, b):
    return [2**j for j in range(a, b + 1)]


def builtin_suite() -> list[dict]:
    """Configs run by ``all``: positive cases plus negative controls with expected failures."""
    per = {"kind": "periodic", "N": 1024}
    lac = {"builder": "lacunary", "n": 1, "gamma": 0.5, "J": 8}
    root_exp = {"class": "exp_power", "params": {"beta": 0.5}}
    line = {"kind": "line", "L": 128.0, "N": 2048, "weight": root_exp}
    suite = [
        {"name": "bernstein_eigen", "experiment": "bernstein", "seed": 0, "domain": per,
         "params": {"n_max": 5, "alphas": list(range(1, 65)), "probes": 0}},
        {"name": "bernstein_l2", "experiment": "bernstein", "seed": 0, "domain": per,
         "params": {"n_max": 8, "alphas": _pow2(0, 6), "probes": 100}},
        {"name": "bernstein_sup", "experiment": "bernstein", "seed": 0,
         "domain": {"kind": "periodic", "N": 4096},
         "params": {"n_max": 3, "alphas": _pow2(0, 6), "p": "inf", "probes": 20}},
        {"name": "bernstein_line", "experiment": "bernstein", "seed": 0, "domain": line,
         "params": {"n_max": 4, "alphas": _pow2(0, 3), "probes": 20}},
        {"name": "bernstein_delta_k1", "experiment": "bernstein_delta", "seed": 0, "domain": per,
         "params": {"k": 1}},
        {"name": "bernstein_delta_k2", "experiment": "bernstein_delta", "seed": 0, "domain": per,
         "params": {"k": 2}},
        {"name": "bernstein_delta_line", "experiment": "bernstein_delta", "seed": 0,
         "domain": line, "params": {"k": 1, "alphas": _pow2(0, 3), "h_vals": [0.05, 0.5, 4.0]}},
        {"name": "jackson_abs_sin", "experiment": "jackson", "domain": per,
         "function": {"builder": "abs_sin"}},
        {"name": "jackson_lacunary", "experiment": "jackson", "domain": per,
         "function": {"builder": "lacunary", "coeffs": [2.0**-j for j in range(9)]},
         "params": {"r_vals": _pow2(0, 7)}},
        {"name": "inverse_k1", "experiment": "inverse", "domain": per, "function": lac,
         "params": {"k": 1}},
        {"name": "inverse_k2", "experiment": "inverse", "domain": per, "function": lac,
         "params": {"k": 2}},
        {"name": "inverse_mismatched_gamma", "experiment": "inverse", "domain": per,
         "function": lac,
         "params": {"omega": {"form": "power", "gamma": 1.0}, "expect_hypothesis": "fail"}},
    ]
    weights = [
        ("constant", {"class": "constant", "params": {}}, True),
        ("polynomial", {"class": "polynomial", "params": {"M": 1.0, "k": 2}}, True),
        ("exp_power", root_exp, True),
        ("factorial_power_series", {"class": "power_series",
                                    "params": {"m_seq": {"rule": "factorial_power", "s": 2}}},
         True),
        ("exp_abs_forced", {"class": "exp_power", "params": {"beta": 1.0, "force": True}}, False),
        ("factorial_series", {"class": "power_series",
                              "params": {"m_seq": {"rule": "factorial"}}}, False),
    ]
    for name, w, ok in weights:
        suite.append({"name": f"weights_{name}", "experiment": "weights_check", "weight": w,
                      "params": {"expect_admissible": ok}})
    return suite


def _out_dir(arg: str | None, cfg_out: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or cfg_out or DEFAULT_OUT)


def _report_failures(label: str, rep: ExperimentReport) -> None:
    for c in rep.failures():
        print(f"FAIL {label}: {c['name']}: {c['detail']}", file=sys.stderr)


def _load_suite(path: str) -> tuple[list, dict, str]:
    p = Path(path)
    try:
        text = p.read_text()
        raw = json.loads(text) if p.suffix.lower() == ".json" else yaml.safe_load(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=path) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno, source=path) from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(getattr(exc, "problem", None) or str(exc),
                          line=mark.line + 1 if mark else None, source=path) from None
    if not isinstance(raw, dict) or not isinstance(raw.get("cases"), list) or not raw["cases"]:
        raise ConfigError("suite config needs a non-empty 'cases' list", "cases", source=path)
    return raw["cases"], _line_map(text), raw.get("output")


def run_all(cases: list, out: Path, seed: int | None, lines: dict | None = None,
            source: str | None = None) -> int:
    configs = []
    for i, raw in enumerate(cases):
        prefix = f"cases[{i}]."
        sub = {k[len(prefix):]: v for k, v in (lines or {}).items() if k.startswith(prefix)}
        name = raw.get("name") if isinstance(raw, dict) else None
        if not name:
            raise ConfigError("every suite case needs a 'name'", f"cases[{i}]",
                              (lines or {}).get(f"cases[{i}]"), source)
        configs.append((name, ExperimentConfig.from_dict(raw, sub, source)))
    names = [n for n, _ in configs]
    if len(set(names)) != len(names):
        raise ConfigError("suite case names must be unique", "cases", source=source)
    summary = {}
    for name, cfg in configs:
        rep = execute(cfg, seed)
        rep.write(out, name)
        summary[name] = {"kind": rep.kind, "passed": rep.passed,
                         "failed_checks": [c["name"] for c in rep.failures()]}
        print(f"{'PASS' if rep.passed else 'FAIL'} {name}")
        if not rep.passed:
            _report_failures(name, rep)
    ok = all(v["passed"] for v in summary.values())
    (out / "summary.json").write_text(
        json.dumps({"passed": ok, "cases": summary}, sort_keys=True, indent=2) + "\n")
    return 0 if ok else 1


def _u64(s: str) -> int:
    try:
        v = int(s, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="entire-approx",
        description="Run approximation-estimate experiments and weight admissibility checks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("all",):
        sp = sub.add_parser(name, help="run the built-in suite" if name == "all"
                            else f"run a {name} experiment")
        sp.add_argument("--config", required=name != "all",
                        help="YAML or JSON config" + (" with a 'cases' list" if name == "all"
                                                      else ""))
        sp.add_argument("--out", help=f"output directory (overrides ${OUT_ENV})")
        sp.add_argument("--seed", type=_u64, help="override the config seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "all":
            if args.config:
                cases, lines, cfg_out = _load_suite(args.config)
                return run_all(cases, _out_dir(args.out, cfg_out), args.seed, lines, args.config)
            return run_all(builtin_suite(), _out_dir(args.out, None), args.seed)
        cfg = ExperimentConfig.load(args.config, args.command)
        rep = execute(cfg, args.seed)
        out = _out_dir(args.out, cfg.output)
        stem = cfg.name or Path(args.config).stem
        for path in rep.write(out, stem):
            print(path)
        if not rep.passed:
            _report_failures(stem, rep)
            return 1
        print(f"PASS {stem}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, RangeError, ResolutionError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
