"""Verification harnesses for the approximation estimates.

Each harness returns an :class:`ExperimentReport` whose tables are plain
column lists so they serialize to both JSON and CSV without loss.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import weights as wts
from .approx import (
    ModulusSpec,
    best_approximation,
    default_method,
    inverse_rhs,
    omega_integral_transform,
    residual_projection,
)
from .bandlimit import BandlimitedFunction, derivative, derivative_symbol, max_type, synthesize
from .builders import random_bandlimited
from .errors import ParameterError, RangeError
from .function_space import (
    Domain,
    GridFunction,
    batch_norm,
    check_truncation,
    difference_symbol,
    group_norm_bound,
    modulus_curve,
    norm,
)

SLOPE_TOL = 0.05
PARSEVAL_SLACK = 1e-9
CHAIN_SLACK = 1e-8
MONOTONE_SLACK = 1e-9
TELESCOPE_CUTOFF = 1e-10
ZERO_RTOL = 1e-12


@dataclass
class ExperimentReport:
    kind: str
    inputs: dict
    tables: dict = field(default_factory=dict)
    fitted_constants: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add_table(self, name: str, columns: dict) -> None:
        lengths = {len(v) for v in columns.values()}
        if len(lengths) != 1:
            raise ValueError(f"table {name!r} has ragged columns")
        self.tables[name] = {k: list(v) for k, v in columns.items()}

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c["passed"]]

    def to_dict(self) -> dict:
        return _clean({
            "kind": self.kind,
            "inputs": self.inputs,
            "tables": self.tables,
            "fitted_constants": self.fitted_constants,
            "flags": self.flags,
            "verdict": {
                "passed": self.passed,
                "checks": self.checks,
                "tolerances": self.tolerances,
            },
            "warnings": self.warnings,
            "notes": self.notes,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def write(self, out_dir, stem: str | None = None) -> list[Path]:
        """Write ``<stem>.json`` plus one ``<stem>.<table>.csv`` per table."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = stem or self.kind
        paths = [out / f"{stem}.json"]
        paths[0].write_text(self.to_json())
        for name, cols in self.tables.items():
            path = out / f"{stem}.{name}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(list(cols))
                for row in zip(*cols.values()):
                    w.writerow([_fmt(v) for v in row])
            paths.append(path)
        return paths


def _fmt(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v


def _clean(obj):
    """Make ``obj`` strict-JSON: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x over positive entries."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2 or np.ptp(np.log(x[ok])) == 0:
        return 0.0
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def _grid_values(d: Domain, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifft(coeffs * np.exp(1j * d.xi * d.origin), axis=-1) * d.N


def _probe_coeffs(d: Domain, alpha: float, probes: int, rng, eigen: bool):
    rows = []
    for _ in range(probes):
        b = random_bandlimited(d, alpha, rng)
        check_truncation(synthesize(b))
        rows.append(b.coeffs)
    eig_row = None
    if eigen and d.kind == "periodic":
        c = np.zeros(d.N, dtype=complex)
        c[int(math.floor(alpha)) % d.N] = 1.0
        eig_row = len(rows)
        rows.append(c)
    if not rows:
        raise ParameterError("need at least one probe (random or eigenfunction)")
    return np.array(rows), eig_row


def _inputs(**kw) -> dict:
    out = {}
    for k, v in kw.items():
        if isinstance(v, Domain):
            v = v.to_record()
        elif isinstance(v, ModulusSpec):
            v = v.to_record()
        elif isinstance(v, wts.WeightSpec):
            v = v.to_record()
        elif isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def run_bernstein(d: Domain, n_max: int = 8, alphas=(1, 2, 4, 8, 16, 32, 64), p=2,
                  probes: int = 20, seed: int = 0, eigen_probes: bool = True,
                  slope_tol: float = SLOPE_TOL) -> ExperimentReport:
    """Measure c(n, alpha) = max_x ||A^n x|| / (alpha^n ||x||) over probes of type <= alpha."""
    rep = ExperimentReport("bernstein", _inputs(domain=d, n_max=n_max, alphas=alphas, p=p,
                                                probes=probes, seed=seed,
                                                eigen_probes=eigen_probes))
    rep.tolerances = {"slope_tol": slope_tol, "parseval_slack": PARSEVAL_SLACK}
    rng = np.random.default_rng(seed)
    alphas = sorted(float(a) for a in alphas)
    if any(a < 1 for a in alphas):
        raise ParameterError("alphas must be >= 1")
    cols = {"n": [], "alpha": [], "c_meas": [], "c_random": [], "c_eigen": []}
    for alpha in alphas:
        C, eig = _probe_coeffs(d, alpha, probes, rng, eigen_probes)
        nx = batch_norm(d, _grid_values(d, C), p)
        sym = derivative_symbol(d, 1)
        Cn = C.copy()
        for n in range(1, n_max + 1):
            Cn = Cn * sym
            ratio = batch_norm(d, _grid_values(d, Cn), p) / (alpha**n * nx)
            rnd = np.delete(ratio, eig) if eig is not None else ratio
            cols["n"].append(n)
            cols["alpha"].append(alpha)
            cols["c_meas"].append(float(ratio.max()))
            cols["c_random"].append(float(rnd.max()) if rnd.size else math.nan)
            cols["c_eigen"].append(float(ratio[eig]) if eig is not None else math.nan)
    rep.add_table("c_meas", cols)
    c = np.array(cols["c_meas"])
    n_col = np.array(cols["n"])
    rep.check("finite", bool(np.all(np.isfinite(c))))
    for n in range(1, n_max + 1):
        sel = n_col == n
        rep.fitted_constants[f"c_{n}"] = float(c[sel].max())
        finite_spread = c[sel].min() > 0
        if finite_spread:
            rep.fitted_constants[f"spread_{n}"] = float(c[sel].max() / c[sel].min())
        rep.check(f"finite_spread_n{n}", bool(finite_spread))
        if len(alphas) > 1:
            s = loglog_slope(np.array(cols["alpha"])[sel], c[sel])
            rep.fitted_constants[f"slope_{n}"] = s
            rep.check(f"no_upward_trend_n{n}", s <= slope_tol,
                      f"slope of log c_meas vs log alpha = {s:.4g} (n={n})")
    if d.kind == "periodic" and float(p) == 2:
        bad = [(cols["n"][i], cols["alpha"][i], c[i]) for i in range(c.size)
               if c[i] > 1 + PARSEVAL_SLACK]
        rep.check("parseval_bound", not bad,
                  "c_meas <= 1 for all rows" if not bad else
                  f"row n={bad[0][0]}, alpha={bad[0][1]:g}: c_meas={bad[0][2]!r} > 1")
    return rep


def run_bernstein_delta(d: Domain, k: int = 1, alphas=(1, 2, 4, 8, 16),
                        h_vals=(0.01, 0.05, 0.1, 0.5), p=2, probes: int = 20, seed: int = 0,
                        eigen_probes: bool = True,
                        slope_tol: float = SLOPE_TOL) -> ExperimentReport:
    """Ratio ||Delta_h^k x|| / ((h alpha)^k M_U(kh) ||x||) over probes of type <= alpha.

    Each ratio is checked against the same probe's Bernstein ratio
    ||A^k x|| / (alpha^k ||x||), which bounds it through the integral
    representation of the k-th difference.
    """
    if int(k) != k or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    rep = ExperimentReport("bernstein_delta", _inputs(domain=d, k=k, alphas=alphas,
                                                      h_vals=h_vals, p=p, probes=probes,
                                                      seed=seed, eigen_probes=eigen_probes))
    rep.tolerances = {"chain_slack": CHAIN_SLACK, "slope_tol": slope_tol}
    rng = np.random.default_rng(seed)
    for h in h_vals:
        if k * abs(h) > d.max_shift:
            raise RangeError(f"k*h = {k * h:g} exceeds L/4 = {d.max_shift:g}")
    alphas = sorted(float(a) for a in alphas)
    cols = {"k": [], "alpha": [], "h": [], "ratio_max": [], "ratio_eigen": [], "bernstein_max": []}
    violations = []
    for alpha in alphas:
        C, eig = _probe_coeffs(d, alpha, probes, rng, eigen_probes)
        nx = batch_norm(d, _grid_values(d, C), p)
        bern = batch_norm(d, _grid_values(d, C * derivative_symbol(d, k)), p) / (alpha**k * nx)
        for h in sorted(float(h) for h in h_vals):
            D = _grid_values(d, C * difference_symbol(d, h, k))
            ratio = batch_norm(d, D, p) / ((h * alpha) ** k * group_norm_bound(d, k * h) * nx)
            cols["k"].append(k)
            cols["alpha"].append(alpha)
            cols["h"].append(h)
            cols["ratio_max"].append(float(ratio.max()))
            cols["ratio_eigen"].append(float(ratio[eig]) if eig is not None else math.nan)
            cols["bernstein_max"].append(float(bern.max()))
            over = np.flatnonzero(ratio > bern * (1 + CHAIN_SLACK))
            if over.size:
                violations.append((alpha, h, float(ratio[over[0]]), float(bern[over[0]])))
    rep.add_table("ratios", cols)
    r = np.array(cols["ratio_max"])
    rep.fitted_constants[f"c_{k}"] = float(r.max())
    rep.check("finite", bool(np.all(np.isfinite(r))))
    rep.check("bounded_by_bernstein", not violations,
              "every ratio <= the probe's ||A^k x|| / (alpha^k ||x||)" if not violations else
              "row alpha={:g}, h={:g}: ratio {:.6g} > {:.6g}".format(*violations[0]))
    if len(alphas) > 1:
        per_alpha = [max(cols["ratio_max"][i] for i in range(len(r)) if cols["alpha"][i] == a)
                     for a in alphas]
        s = loglog_slope(alphas, per_alpha)
        rep.fitted_constants["slope_alpha"] = s
        rep.check("no_upward_trend", s <= slope_tol,
                  f"slope of log max-ratio vs log alpha = {s:.4g}")
    return rep


def _best_curve(x, r_vals, p, method, rep):
    vals, approximants = [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for r in r_vals:
            y, v = best_approximation(x, r, p, method)
            vals.append(v)
            approximants.append(y)
    for w in caught:
        msg = f"{w.category.__name__}: {w.message}"
        if msg not in rep.warnings:
            rep.warnings.append(msg)
    return np.array(vals), approximants


def run_jackson(d: Domain, x: GridFunction, k: int = 1, r_vals=(2, 4, 8, 16, 32, 64, 128), p=2,
                method: str | None = None, sobolev_m: int = 0, n_tau: int = 64,
                spread_tol: float = 10.0) -> ExperimentReport:
    """E_r(x) against omega_k(1/r, x^(m)) scaled by mu(m/r)/r^m."""
    if x.domain != d:
        raise ParameterError("test function lives on a different domain")
    if any(r < 1 for r in r_vals):
        raise ParameterError("r_vals must be >= 1")
    check_truncation(x)
    method = method or default_method(x, p)
    rep = ExperimentReport("jackson", _inputs(domain=d, k=k, r_vals=r_vals, p=p, method=method,
                                              sobolev_m=sobolev_m, n_tau=n_tau,
                                              spread_tol=spread_tol))
    rep.tolerances = {"spread_tol": spread_tol, "monotone_slack": MONOTONE_SLACK}
    rep.notes.append("the modulus in the direct estimate is taken to be omega_k of the shift group")
    r_vals = sorted(float(r) for r in r_vals)
    nx = norm(x, p)
    E, _ = _best_curve(x, r_vals, p, method, rep)
    f = derivative(x, sobolev_m) if sobolev_m else x
    t = 1.0 / np.array(r_vals)
    om = modulus_curve(f, t, k, p, n_tau)
    factor = np.array([group_norm_bound(d, sobolev_m / r) / r**sobolev_m for r in r_vals])
    upper = []
    for r in r_vals:
        proj = residual_projection(x, r)
        upper.append(norm(x - synthesize(proj), p) if proj is not None else nx)
    denom = factor * om
    ratio = np.where(denom > 0, E / np.where(denom > 0, denom, 1), np.where(E > 0, np.inf, 0.0))
    rep.add_table("jackson", {"r": r_vals, "E_r": E.tolist(), "omega_k": om.tolist(),
                              "weight_factor": factor.tolist(), "ratio": ratio.tolist(),
                              "projection_residual": upper})
    rep.check("E_nonincreasing", bool(np.all(np.diff(E) <= MONOTONE_SLACK * max(nx, 1.0))))
    bad = [r for r, e, u in zip(r_vals, E, upper) if e > u * (1 + 1e-12) + 1e-15]
    rep.check("projection_sandwich", not bad,
              "E_r <= ||x - P x|| for stop <= r" if not bad else f"row r={bad[0]:g}")
    rep.check("finite", bool(np.all(np.isfinite(ratio))))
    if np.all(np.isfinite(ratio)):
        rep.fitted_constants[f"m_{k + sobolev_m}"] = float(np.max(ratio))
    pos = ratio[(E > ZERO_RTOL * max(nx, 1e-300)) & np.isfinite(ratio)]
    if pos.size:
        spread = float(pos.max() / pos.min())
        rep.fitted_constants["spread"] = spread
        rep.check("bounded_spread", spread <= spread_tol,
                  f"max/min ratio over the r-grid = {spread:.4g}")
    else:
        rep.notes.append("x has type <= min(r_vals): every E_r vanishes")
    return rep


def dyadic_levels(d: Domain, r_max: float | None = None) -> list[int]:
    top = max_type(d) if r_max is None else min(r_max, max_type(d))
    return list(range(0, int(math.floor(math.log2(top))) + 1))


def run_inverse(d: Domain, x: GridFunction, n: int = 1, k: int = 1,
                omega: ModulusSpec | None = None, m: float | None = None,
                t_vals=tuple(2.0**-j for j in range(10, 0, -1)), p=2,
                method: str | None = None, r_max: float | None = None, n_tau: int = 64,
                slope_tol: float = SLOPE_TOL,
                expect_hypothesis: str = "hold") -> ExperimentReport:
    """Decay of E_{2^j}(x) -> modulus bound for A^n x via the dyadic telescoping series."""
    omega = omega or ModulusSpec("power", 0.5)
    if int(n) != n or n < 1 or int(k) != k or k < 1:
        raise ParameterError("n and k must be positive integers")
    if any(not 0 < t <= 0.5 for t in t_vals):
        raise ParameterError("t_vals must lie in (0, 1/2]")
    if expect_hypothesis not in ("hold", "fail"):
        raise ParameterError("expect_hypothesis must be 'hold' or 'fail'")
    check_truncation(x)
    method = method or default_method(x, p)
    rep = ExperimentReport("inverse", _inputs(domain=d, n=n, k=k, omega=omega, m=m,
                                              t_vals=t_vals, p=p, method=method, r_max=r_max,
                                              n_tau=n_tau, expect_hypothesis=expect_hypothesis))
    rep.tolerances = {"slope_tol": slope_tol, "telescope_cutoff": TELESCOPE_CUTOFF}
    for name, ok in omega.check().items():
        rep.check(f"omega_{name}", ok)

    js = dyadic_levels(d, r_max)
    r = [2.0**j for j in js]
    nx = norm(x, p)
    E, u = _best_curve(x, r, p, method, rep)
    w_at = np.array([omega(1.0 / ri) for ri in r])
    q = E * np.array(r) ** n / w_at
    nonzero = E > ZERO_RTOL * nx
    fitted = m is None
    m_val = float(q.max()) if fitted else float(m)
    rep.fitted_constants["m"] = m_val
    rep.flags["m_auto_fitted"] = fitted
    bound = m_val * w_at / np.array(r) ** n
    rep.add_table("hypothesis", {"j": js, "r": r, "E_r": E.tolist(), "bound": bound.tolist(),
                                 "normalized": q.tolist()})
    failed_at = None
    if not fitted:
        over = [j for j, e, b in zip(js, E, bound) if e > b * (1 + 1e-9)]
        failed_at = over[0] if over else None
        why = "E_r exceeds m omega(1/r) / r^n"
    elif nonzero.sum() >= 3:
        s = loglog_slope(np.array(r)[nonzero], q[nonzero])
        rep.fitted_constants["hypothesis_slope"] = s
        if s > slope_tol:
            failed_at = int(np.array(js)[nonzero][np.argmax(q[nonzero])])
        why = f"E_r r^n / omega(1/r) grows (log-log slope {s:.4g})"
    holds = failed_at is None
    if expect_hypothesis == "fail":
        rep.check("hypothesis_fails_as_expected", not holds,
                  f"hypothesis-failed at j={failed_at}: {why}" if not holds else
                  "hypothesis unexpectedly holds")
        return rep
    if not rep.check("hypothesis", holds,
                     "E_r <= m omega(1/r) / r^n at every dyadic r" if holds else
                     f"hypothesis-failed at j={failed_at}: {why}"):
        return rep

    # telescoping series A^n u_0 + sum (A^n u_j - A^n u_{j-1})
    An = [synthesize(BandlimitedFunction(uj.domain, uj.coeffs * derivative_symbol(d, n),
                                         uj.sigma)) for uj in u]
    # the tail is cut where every later increment is below the cutoff
    incr = [math.nan] + [float(batch_norm(d, An[j].values - An[j - 1].values, p))
                         for j in range(1, len(An))]
    ref = norm(An[-1], p)
    stop = len(An) - 1
    while stop > 0 and incr[stop] < TELESCOPE_CUTOFF * ref:
        stop -= 1
    stop = min(stop + 1, len(An) - 1)
    total = An[0].values.copy()
    for j in range(1, stop + 1):
        total += An[j].values - An[j - 1].values
    Anx = GridFunction(d, total)
    used = incr[1:stop + 1]
    converged = stop < len(An) - 1 or len(used) < 2 or used[-1] < used[-2] or used[-1] == 0
    if not rep.check("telescoping_converges", converged,
                     f"increments summable up to j={js[stop]}" if converged else
                     f"telescoping series non-convergent at j={js[stop]}: increment "
                     f"{used[-1]:.3e} >= {used[-2]:.3e}"):
        return rep
    Omega = np.array([omega_integral_transform(omega, 2.0**-j) if 2.0**-j <= 1 else math.nan
                      for j in js[:stop + 1]])
    tail = np.array([norm(Anx - An[j], p) for j in range(stop + 1)])
    tail_ratio = np.where(Omega > 0, tail / Omega, math.nan)
    rep.add_table("telescoping", {"j": js[:stop + 1], "increment": incr[:stop + 1],
                                  "tail": tail.tolist(), "Omega": Omega.tolist(),
                                  "tail_over_Omega": tail_ratio.tolist()})
    rep.fitted_constants["c_tilde"] = float(np.nanmax(tail_ratio))

    t_vals = sorted(float(t) for t in t_vals)
    om = modulus_curve(Anx, t_vals, k, p, n_tau)
    bracket = np.array([inverse_rhs(omega, t, k) for t in t_vals])
    ratio = om / bracket
    rep.add_table("modulus", {"t": t_vals, "omega_k_Anx": om.tolist(),
                              "bracket": bracket.tolist(), "ratio": ratio.tolist()})
    if np.all(np.isfinite(ratio)):
        rep.fitted_constants[f"m_{k}"] = float(np.max(ratio))
    rep.check("finite", bool(np.all(np.isfinite(ratio))))
    s = loglog_slope(t_vals, ratio)
    rep.fitted_constants["ratio_slope"] = s
    rep.check("no_blowup_as_t_to_0", s >= -slope_tol,
              f"log-log slope of ratio vs t = {s:.4g}")
    tt = np.array([2.0**-j for j in range(1, 11)])
    Om = np.array([omega_integral_transform(omega, t) for t in tt])
    Om2 = np.array([omega_integral_transform(omega, 2 * t) for t in tt])
    rep.check("Omega_properties",
              omega_integral_transform(omega, 0.0) == 0.0 and bool(np.all(np.diff(Om) <= 0))
              and bool(np.all(Om2 <= omega.doubling_c * Om * (1 + 1e-9))),
              "Omega(0)=0, nondecreasing, Omega(2t) <= c Omega(t)")
    return rep


def run_weights_check(w: wts.WeightSpec, T_max: float = 20.0, n_samples: int = 200,
                      expect_admissible: bool = True) -> ExperimentReport:
    rep = ExperimentReport("weights_check", _inputs(weight=w, T_max=T_max, n_samples=n_samples,
                                                    expect_admissible=expect_admissible))
    a = wts.check_admissibility(w, T_max, n_samples)
    rep.tolerances = {"tol_diverge": wts.TOL_DIVERGE, "tol_submult": wts.TOL_SUBMULT}
    ip, sp = np.array(a.integral_partials), np.array(a.series_partials)
    rep.add_table("condition4", {"T": ip[:, 0].tolist(), "integral_partial": ip[:, 1].tolist(),
                                 "K": sp[:, 0].tolist(), "series_partial": sp[:, 1].tolist()})
    rep.flags.update({k: v for k, v in a.to_dict().items() if isinstance(v, bool)})
    rep.fitted_constants["worst_submult_excess"] = a.worst_submult_excess
    rep.notes.extend(a.notes)
    rep.check("admissible" if expect_admissible else "inadmissible_as_expected",
              a.admissible == expect_admissible,
              f"admissible: {str(a.admissible).lower()}")
    return rep
