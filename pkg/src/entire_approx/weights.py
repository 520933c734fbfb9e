"""Admissible weights mu(t) for the weighted line spaces L_p(R, mu^p).

Five families are supported:

* ``constant``        mu(t) = 1
* ``polynomial``      mu(t) = M (1 + |t|)^k
* ``exp_power``       mu(t) = exp(|t|^beta), 0 < beta < 1
* ``power_series``    mu(t) = sum_n |t|^n / m_n
* ``entire_modulus``  mu(t) = C prod_k |1 - t / (i t_k)| = C prod_k sqrt(1 + t^2 / t_k^2)

All evaluation goes through :func:`log_weight` so that fast-growing weights
do not overflow inside quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy import integrate, special

from .errors import ParameterError

KINDS = ("constant", "polynomial", "exp_power", "power_series", "entire_modulus")

SERIES_REL_CUTOFF = 1e-18
SERIES_MAX_TERMS = 10_000
PRODUCT_TAIL_CUTOFF = 1e-12
TOL_SUBMULT = 1e-12
TOL_DIVERGE = 0.05


@dataclass(frozen=True)
class WeightSpec:
    """A weight family plus its parameters.

    ``params`` by kind:

    - polynomial: ``M`` (>= 1), ``k`` (integer >= 0)
    - exp_power: ``beta`` in (0, 1); ``force=True`` admits beta >= 1 for
      negative examples
    - power_series: ``m_seq`` = ``{"rule": "factorial"}``,
      ``{"rule": "factorial_power", "s": s}`` (m_n = (n!)^s) or
      ``{"rule": "list", "values": [m_0, m_1, ...]}``
    - entire_modulus: ``C`` (>= 1) and ``t_seq`` = ``{"rule": "power",
      "a": a, "q": q}`` (t_k = a k^q, q > 1) or ``{"rule": "list",
      "values": [...]}``
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        validate(self)

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "WeightSpec":
        """Build from the tagged config record ``{class: ..., params: {...}}``."""
        if "class" not in record:
            raise ParameterError("weight record needs a 'class' field")
        return cls(str(record["class"]), dict(record.get("params") or {}))

    def to_record(self) -> dict:
        return {"class": self.kind, "params": dict(self.params)}

    def __call__(self, t):
        return eval_weight(self, t)


def constant() -> WeightSpec:
    return WeightSpec("constant")


def polynomial(M: float = 1.0, k: int = 1) -> WeightSpec:
    return WeightSpec("polynomial", {"M": M, "k": k})


def exp_power(beta: float, force: bool = False) -> WeightSpec:
    params = {"beta": beta}
    if force:
        params["force"] = True
    return WeightSpec("exp_power", params)


def power_series(m_seq: Mapping[str, Any]) -> WeightSpec:
    return WeightSpec("power_series", {"m_seq": dict(m_seq)})


def entire_modulus(t_seq: Mapping[str, Any], C: float = 1.0) -> WeightSpec:
    return WeightSpec("entire_modulus", {"t_seq": dict(t_seq), "C": C})


def validate(w: WeightSpec) -> None:
    p = w.params
    if w.kind not in KINDS:
        raise ParameterError(f"unknown weight class {w.kind!r}; expected one of {KINDS}")
    if w.kind == "polynomial":
        M, k = p.get("M", 1.0), p.get("k", 1)
        if not M >= 1:
            raise ParameterError(f"polynomial weight needs M >= 1, got {M}")
        if int(k) != k or k < 0:
            raise ParameterError(f"polynomial weight needs integer k >= 0, got {k}")
    elif w.kind == "exp_power":
        beta = p.get("beta")
        if beta is None or not beta > 0:
            raise ParameterError(f"exp_power weight needs beta > 0, got {beta}")
        if beta >= 1 and not p.get("force", False):
            raise ParameterError(f"exp_power weight needs beta in (0, 1), got {beta}")
    elif w.kind == "power_series":
        _series_log_m(p.get("m_seq"))
    elif w.kind == "entire_modulus":
        C = p.get("C", 1.0)
        if not C >= 1:
            raise ParameterError(f"entire_modulus weight needs C >= 1, got {C}")
        _product_sequence(p.get("t_seq"))


def _series_log_m(rule):
    """Return (vectorized log m_n, number of terms or None, peak index or None).

    The peak index locates the largest term of sum |t|^n / m_n.
    """
    if not isinstance(rule, Mapping) or "rule" not in rule:
        raise ParameterError("power_series needs m_seq = {'rule': ...}")
    name = rule["rule"]
    if name in ("factorial", "factorial_power"):
        s = 1.0 if name == "factorial" else float(rule.get("s", 2.0))
        if s <= 0:
            raise ParameterError(f"factorial_power needs s > 0, got {s}")
        # ratio of consecutive terms is |t| / (n+1)^s
        return (
            (lambda n: s * special.gammaln(np.asarray(n, float) + 1)),
            None,
            (lambda a: int(a ** (1.0 / s))),
        )
    if name == "list":
        values = np.asarray(rule.get("values", []), dtype=float)
        if values.size == 0 or np.any(values <= 0):
            raise ParameterError("m_seq list must be non-empty with positive entries")
        logs = np.log(values)
        return (lambda n: logs[np.asarray(n, int)]), values.size, None
    raise ParameterError(f"unknown m_seq rule {name!r}")


def _product_sequence(rule):
    """Return (t_k on an index array, finite length or None, (a, q) for power rules)."""
    if not isinstance(rule, Mapping) or "rule" not in rule:
        raise ParameterError("entire_modulus needs t_seq = {'rule': ...}")
    name = rule["rule"]
    if name == "power":
        a, q = float(rule.get("a", 1.0)), float(rule.get("q", 2.0))
        if a <= 0 or q <= 1:
            raise ParameterError(f"t_k = a k^q needs a > 0 and q > 1, got a={a}, q={q}")
        return (lambda k: a * np.asarray(k, float) ** q), None, (a, q)
    if name == "list":
        values = np.asarray(rule.get("values", []), dtype=float)
        if values.size == 0 or np.any(values <= 0):
            raise ParameterError("t_seq list must be non-empty with positive entries")
        if np.any(np.diff(values) < 0):
            raise ParameterError("t_seq must be nondecreasing")
        return (lambda k: values[np.asarray(k, int) - 1]), values.size, None
    raise ParameterError(f"unknown t_seq rule {name!r}")


def _log_series(rule, t: float) -> float:
    log_m, n_terms, peak_of = _series_log_m(rule)
    a = abs(t)
    if a == 0.0:
        return float(-log_m(0))
    la = math.log(a)
    if n_terms is not None:
        n = np.arange(n_terms)
    else:
        # sum outward from the peak until the edge terms drop below the cutoff
        peak = peak_of(a)
        width = 32
        while True:
            n = np.arange(max(0, peak - width), peak + width + 1)
            lt = n * la - log_m(n)
            edge = max(lt[0] if n[0] > 0 else -math.inf, lt[-1])
            if edge - lt.max() < math.log(SERIES_REL_CUTOFF) or 2 * width >= SERIES_MAX_TERMS:
                break
            width *= 2
    lt = n * la - log_m(n)
    top = lt.max()
    return float(top + math.log(np.sum(np.exp(lt - top))))


def _log_product(rule, t: float) -> float:
    gen, n_finite, power = _product_sequence(rule)
    if t == 0.0:
        return 0.0
    if n_finite is not None:
        return 0.5 * math.fsum(np.log1p((t / gen(np.arange(1, n_finite + 1))) ** 2))
    a, q = power
    # exact head while t / t_k > 0.1, then the log1p series summed with Hurwitz zeta
    K = max(16, math.ceil((10.0 * t / a) ** (1.0 / q)))
    head = 0.5 * math.fsum(np.log1p((t / gen(np.arange(1, K + 1))) ** 2))
    y = (t / a) ** 2
    tail_terms = []
    for j in range(1, 200):
        term = (-1) ** (j + 1) / j * y**j * special.zeta(2 * q * j, K + 1)
        tail_terms.append(term)
        if abs(term) < PRODUCT_TAIL_CUTOFF * 1e-6:
            break
    return head + 0.5 * math.fsum(tail_terms)


def log_weight(w: WeightSpec, t) -> np.ndarray | float:
    """ln mu(t); vectorized over ``t``."""
    if np.ndim(t) > 0:
        return np.array([log_weight(w, float(s)) for s in np.ravel(t)]).reshape(np.shape(t))
    t = abs(float(t))
    p = w.params
    if w.kind == "constant":
        return 0.0
    if w.kind == "polynomial":
        return math.log(p.get("M", 1.0)) + p.get("k", 1) * math.log1p(t)
    if w.kind == "exp_power":
        return t ** p["beta"]
    if w.kind == "power_series":
        return _log_series(p["m_seq"], t)
    return math.log(p.get("C", 1.0)) + _log_product(p["t_seq"], t)


def eval_weight(w: WeightSpec, t):
    """mu(t) >= 1, even in t."""
    if w.kind == "constant":
        return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0
    if w.kind == "polynomial":
        out = w.params.get("M", 1.0) * (1.0 + np.abs(np.asarray(t, float))) ** w.params.get("k", 1)
    elif w.kind == "exp_power":
        out = np.exp(np.abs(np.asarray(t, float)) ** w.params["beta"])
    else:
        out = np.exp(log_weight(w, t))
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class AdmissibilityReport:
    weight: dict
    T_max: float
    n_samples: int
    geq_one: bool
    even: bool
    monotone: bool
    submultiplicative: bool
    worst_submult_excess: float
    log_integrable: bool
    log_summable: bool
    integral_partials: list
    series_partials: list
    conditions_agree: bool
    notes: list = field(default_factory=list)

    @property
    def admissible(self) -> bool:
        return (
            self.geq_one
            and self.even
            and self.monotone
            and self.submultiplicative
            and self.log_integrable
        )

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items()}
        out["admissible"] = self.admissible
        return out


def _relative_increase(partials) -> float:
    prev, last = partials[-2][1], partials[-1][1]
    if last == 0.0:
        return 0.0
    if prev <= 0.0:
        return math.inf
    return (last - prev) / prev


def _doubling_points(T_max: float, n_doublings: int):
    return [T_max / 4 * 2**i for i in range(n_doublings + 1)]


def log_integral_partials(w: WeightSpec, T_max: float, n_doublings: int = 12):
    """Partial integrals of ln mu(t) / (1 + t^2) over [0, T] at doubling T."""
    points = _doubling_points(T_max, n_doublings)
    edges = [0.0] + points
    total = 0.0
    partials = []
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda s: log_weight(w, s) / (1.0 + s * s), a, b, limit=200)
        total += val
        partials.append((b, total))
    return partials


def log_series_partials(w: WeightSpec, T_max: float, n_doublings: int = 12):
    """Partial sums of ln mu(k) / k^2 for k <= K at doubling K."""
    points = [max(1, int(round(T))) for T in _doubling_points(T_max, n_doublings)]
    k = np.arange(1, points[-1] + 1, dtype=float)
    if w.kind in ("constant", "polynomial", "exp_power"):
        terms = np.asarray(log_weight_vec(w, k)) / k**2
    else:
        terms = np.array([log_weight(w, float(s)) for s in k]) / k**2
    csum = np.cumsum(terms)
    return [(K, float(csum[K - 1])) for K in points]


def log_weight_vec(w: WeightSpec, t: np.ndarray) -> np.ndarray:
    t = np.abs(np.asarray(t, dtype=float))
    p = w.params
    if w.kind == "constant":
        return np.zeros_like(t)
    if w.kind == "polynomial":
        return math.log(p.get("M", 1.0)) + p.get("k", 1) * np.log1p(t)
    if w.kind == "exp_power":
        return t ** p["beta"]
    return np.array([log_weight(w, float(s)) for s in t.ravel()]).reshape(t.shape)


def check_admissibility(
    w: WeightSpec,
    T_max: float = 20.0,
    n_samples: int = 200,
    tol_diverge: float = TOL_DIVERGE,
    n_doublings: int = 12,
) -> AdmissibilityReport:
    """Sampled checks of conditions 1-3 and a doubling heuristic for condition 4.

    The log-integrability verdict is heuristic: the partial integral of
    ln mu / (1 + t^2) is evaluated at T = T_max/4 * 2^i, and the weight is
    flagged divergent when the last doubling still adds more than
    ``tol_diverge`` relative increase. The series form is evaluated the same
    way on integers and any disagreement is recorded in ``notes``.
    """
    if T_max < 10:
        raise ParameterError(f"T_max must be >= 10, got {T_max}")
    if n_samples < 100:
        raise ParameterError(f"n_samples must be >= 100, got {n_samples}")
    t = np.linspace(0.0, T_max, n_samples)
    lw = log_weight_vec(w, t)
    lw_neg = log_weight_vec(w, -t) if w.kind in ("constant", "polynomial", "exp_power") else \
        np.array([log_weight(w, -float(s)) for s in t])
    geq_one = bool(np.all(lw >= -1e-15))
    even = bool(np.allclose(lw, lw_neg, rtol=1e-14, atol=0.0))
    monotone = bool(np.all(np.diff(lw) >= -1e-14 * np.maximum(1.0, np.abs(lw[1:]))))

    # deterministic lattice over [-T_max, T_max]^2
    lat = np.linspace(-T_max, T_max, min(n_samples, 61))
    S, T = np.meshgrid(lat, lat)
    ls = log_weight_vec(w, S)
    lt = log_weight_vec(w, T)
    lsum = log_weight_vec(w, S + T)
    excess = lsum - (ls + lt)
    worst = float(np.max(excess))
    submult = bool(worst <= math.log1p(TOL_SUBMULT))

    ipart = log_integral_partials(w, T_max, n_doublings)
    spart = log_series_partials(w, T_max, n_doublings)
    integrable = _relative_increase(ipart) <= tol_diverge
    summable = _relative_increase(spart) <= tol_diverge
    notes = [
        "condition 4 verdict is a doubling heuristic, not a proof "
        f"(tol_diverge={tol_diverge}, final T={ipart[-1][0]:g})"
    ]
    if integrable != summable:
        notes.append("integral and series forms of condition 4 disagree")
    if not submult:
        notes.append(f"submultiplicativity violated: max ln-excess {worst:.3e}")
    return AdmissibilityReport(
        weight=w.to_record(),
        T_max=float(T_max),
        n_samples=int(n_samples),
        geq_one=geq_one,
        even=even,
        monotone=monotone,
        submultiplicative=submult,
        worst_submult_excess=worst,
        log_integrable=bool(integrable),
        log_summable=bool(summable),
        integral_partials=[[float(a), float(b)] for a, b in ipart],
        series_partials=[[float(a), float(b)] for a, b in spart],
        conditions_agree=bool(integrable == summable),
        notes=notes,
    )
