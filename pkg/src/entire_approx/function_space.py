"""Grid realizations of the periodic and weighted-line function spaces.

A :class:`GridFunction` is identified with its N-point trigonometric
interpolant on the domain's period (2*pi for the circle, 2L for the
truncated line).  With that identification the shift group acts exactly as
a phase rotation of the Fourier coefficients, so group laws hold to
rounding error.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.special import comb

from .errors import ParameterError, RangeError
from .weights import WeightSpec, constant, eval_weight

MAX_DIFFERENCE_ORDER = 8


@dataclass(frozen=True)
class Domain:
    """Periodic circle [0, 2*pi) or truncated line [-L, L) sampled at N points."""

    kind: str
    N: int
    L: float | None = None
    weight: WeightSpec = field(default_factory=constant)

    def __post_init__(self):
        if self.kind not in ("periodic", "line"):
            raise ParameterError(f"domain kind must be 'periodic' or 'line', got {self.kind!r}")
        N = self.N
        if int(N) != N or N < 64 or (int(N) & (int(N) - 1)):
            raise ParameterError(f"N must be a power of two >= 64, got {N}")
        if self.kind == "line":
            if self.L is None or not self.L > 0:
                raise ParameterError(f"line domain needs L > 0, got {self.L}")
        elif self.weight.kind != "constant":
            raise ParameterError("periodic domain carries no weight")

    @classmethod
    def periodic(cls, N: int = 1024) -> "Domain":
        return cls("periodic", N)

    @classmethod
    def line(cls, L: float, N: int, weight: WeightSpec | None = None) -> "Domain":
        return cls("line", N, float(L), weight or constant())

    @classmethod
    def from_record(cls, record: dict) -> "Domain":
        kind = record.get("kind")
        if kind == "periodic":
            return cls.periodic(int(record.get("N", 1024)))
        if kind == "line":
            w = record.get("weight")
            return cls.line(
                float(record["L"]),
                int(record.get("N", 1024)),
                WeightSpec.from_record(w) if w else None,
            )
        raise ParameterError(f"domain kind must be 'periodic' or 'line', got {kind!r}")

    def to_record(self) -> dict:
        if self.kind == "periodic":
            return {"kind": "periodic", "N": self.N}
        return {"kind": "line", "L": self.L, "N": self.N, "weight": self.weight.to_record()}

    @property
    def period(self) -> float:
        return 2 * math.pi if self.kind == "periodic" else 2 * self.L

    @property
    def origin(self) -> float:
        return 0.0 if self.kind == "periodic" else -self.L

    @property
    def dt(self) -> float:
        return self.period / self.N

    @property
    def dxi(self) -> float:
        """Frequency spacing: 1 on the circle, pi/L on the line."""
        return 2 * math.pi / self.period

    @cached_property
    def t(self) -> np.ndarray:
        return self.origin + self.dt * np.arange(self.N)

    @cached_property
    def xi(self) -> np.ndarray:
        """Angular frequencies in FFT order."""
        return np.fft.fftfreq(self.N) * self.N * self.dxi

    @cached_property
    def mu(self) -> np.ndarray:
        """Weight sampled on the grid (ones on the circle)."""
        if self.weight.kind == "constant":
            return np.ones(self.N)
        return np.asarray(eval_weight(self.weight, self.t), dtype=float)

    @property
    def max_shift(self) -> float:
        return math.inf if self.kind == "periodic" else self.L / 4

    def __hash__(self):
        return hash(json.dumps(self.to_record(), sort_keys=True))


@dataclass(frozen=True, eq=False)
class GridFunction:
    domain: Domain
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.domain.N,):
            raise ParameterError(f"expected {self.domain.N} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("grid function has non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, domain: Domain, f) -> "GridFunction":
        return cls(domain, f(domain.t))

    @property
    def t(self) -> np.ndarray:
        return self.domain.t

    def coefficients(self) -> np.ndarray:
        """c_m with x(t) = sum_m c_m exp(i xi_m t), FFT order."""
        d = self.domain
        return np.fft.fft(self.values) / d.N * np.exp(-1j * d.xi * d.origin)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.domain, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.domain, self.values - other.values)

    def __mul__(self, a: complex) -> "GridFunction":
        return GridFunction(self.domain, a * self.values)

    __rmul__ = __mul__

    def to_csv(self, path) -> None:
        path = Path(path)
        lines = ["# domain: " + json.dumps(self.domain.to_record(), sort_keys=True), "t,re,im"]
        lines += [f"{float(t)!r},{float(v.real)!r},{float(v.imag)!r}"
                  for t, v in zip(self.t, self.values)]
        path.write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path, domain: Domain | None = None) -> "GridFunction":
        text = Path(path).read_text().splitlines()
        if domain is None:
            if not text or not text[0].startswith("# domain:"):
                raise ParameterError(f"{path}: missing '# domain:' header line")
            domain = Domain.from_record(json.loads(text[0].split(":", 1)[1]))
        rows = [ln for ln in text if ln and not ln.startswith("#")]
        if rows and rows[0].replace(" ", "") == "t,re,im":
            rows = rows[1:]
        data = np.array([[float(c) for c in r.split(",")] for r in rows])
        if data.shape != (domain.N, 3):
            raise ParameterError(f"{path}: expected {domain.N} rows of t,re,im")
        if not np.allclose(data[:, 0], domain.t, rtol=0, atol=1e-9 * domain.period):
            raise ParameterError(f"{path}: t column does not match the domain grid")
        return cls(domain, data[:, 1] + 1j * data[:, 2])


def _check_p(p) -> float:
    p = float(p)
    if not p >= 1:
        raise ParameterError(f"norm index p must be >= 1, got {p}")
    return p


def batch_norm(domain: Domain, values: np.ndarray, p) -> np.ndarray:
    """Norms of the rows of ``values`` (shape (..., N))."""
    p = _check_p(p)
    a = np.abs(values) * domain.mu
    top = a.max(axis=-1)
    if math.isinf(p):
        return top
    # scale by the row maximum so a**p neither underflows nor overflows
    scale = np.where(top > 0, top, 1.0)
    a = a / scale[..., None]
    if p == 2:
        return top * np.sqrt(domain.dt * np.sum(a * a, axis=-1))
    return top * (domain.dt * np.sum(a**p, axis=-1)) ** (1.0 / p)


def norm(x: GridFunction, p=2) -> float:
    """Rectangle-rule L_p norm; weighted by mu^p on the line, grid max for p=inf."""
    return float(batch_norm(x.domain, x.values, p))


def apply_multiplier(x: GridFunction, multiplier: np.ndarray) -> GridFunction:
    return GridFunction(x.domain, np.fft.ifft(np.fft.fft(x.values) * multiplier))


def _check_shift(domain: Domain, tau: float) -> None:
    if abs(tau) > domain.max_shift:
        raise RangeError(
            f"shift {tau:g} exceeds L/4 = {domain.max_shift:g} on the truncated line"
        )


def shift(x: GridFunction, tau: float) -> GridFunction:
    """U(tau) x : t -> x(t + tau)."""
    if tau == 0:
        return x
    _check_shift(x.domain, tau)
    return apply_multiplier(x, np.exp(1j * x.domain.xi * tau))


def difference_symbol(domain: Domain, h: float, k: int) -> np.ndarray:
    """Fourier symbol (exp(i xi h) - 1)^k of the k-th difference."""
    return (np.expm1(1j * domain.xi * h)) ** k


def _check_order(k: int) -> None:
    if int(k) != k or k < 0:
        raise ParameterError(f"difference order must be an integer >= 0, got {k}")
    if k > MAX_DIFFERENCE_ORDER:
        raise ParameterError(f"difference order {k} > {MAX_DIFFERENCE_ORDER} not supported")


def finite_difference(x: GridFunction, h: float, k: int) -> GridFunction:
    """Delta_h^k x = sum_j (-1)^(k-j) C(k, j) U(j h) x, applied as one multiplier."""
    _check_order(k)
    if k == 0:
        return x
    _check_shift(x.domain, k * h)
    return apply_multiplier(x, difference_symbol(x.domain, h, k))


def finite_difference_by_shifts(x: GridFunction, h: float, k: int) -> GridFunction:
    """Literal binomial sum of shifts; kept as a cross-check of :func:`finite_difference`."""
    _check_order(k)
    out = np.zeros(x.domain.N, dtype=complex)
    for j in range(k + 1):
        out += (-1) ** (k - j) * comb(k, j, exact=True) * shift(x, j * h).values
    return GridFunction(x.domain, out)


def _tau_grid(t: float, n_tau: int) -> np.ndarray:
    return np.linspace(0.0, t, n_tau)


def difference_norms(x: GridFunction, taus: np.ndarray, k: int, p) -> np.ndarray:
    """||Delta_tau^k x||_p for every tau in ``taus``."""
    _check_order(k)
    d = x.domain
    taus = np.asarray(taus, dtype=float)
    if taus.size and np.max(np.abs(taus)) * k > d.max_shift:
        raise RangeError(f"k*tau up to {k * np.max(np.abs(taus)):g} exceeds L/4 = {d.max_shift:g}")
    xhat = np.fft.fft(x.values)
    out = np.empty(taus.size)
    # chunk to bound memory at large N
    step = max(1, 2**22 // d.N)
    for s in range(0, taus.size, step):
        sym = np.expm1(1j * np.outer(taus[s:s + step], d.xi)) ** k
        out[s:s + step] = batch_norm(d, np.fft.ifft(xhat * sym, axis=-1), p)
    return out


def modulus_of_continuity(x: GridFunction, t: float, k: int = 1, p=2, n_tau: int = 64) -> float:
    """omega_k(t, x): max of ||Delta_tau^k x||_p over a uniform tau-grid on [0, t]."""
    if t == 0:
        return 0.0
    if not t > 0:
        raise ParameterError(f"t must be > 0, got {t}")
    if k < 1:
        raise ParameterError(f"modulus order k must be >= 1, got {k}")
    if n_tau < 16:
        raise ParameterError(f"n_tau must be >= 16, got {n_tau}")
    return float(difference_norms(x, _tau_grid(t, n_tau), k, p).max())


def modulus_curve(x: GridFunction, t_vals, k: int = 1, p=2, n_tau: int = 64) -> np.ndarray:
    """omega_k at each t in ``t_vals``, made monotone by a running sup over increasing t.

    The value at t is the max over the union of the tau-grids of every
    requested t' <= t, so it stays a lower estimate of the true supremum.
    """
    t_vals = np.asarray(t_vals, dtype=float)
    order = np.argsort(t_vals, kind="stable")
    raw = np.array([modulus_of_continuity(x, t, k, p, n_tau) for t in t_vals[order]])
    out = np.empty_like(raw)
    out[order] = np.maximum.accumulate(raw)
    return out


def group_norm_bound(d: Domain, t: float) -> float:
    """Upper bound for M_U(t): 1 on the circle, mu(t) on the weighted line."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    if d.kind == "periodic":
        return 1.0
    return float(eval_weight(d.weight, t))


def check_truncation(x: GridFunction, tol: float = 1e-8, p=2) -> None:
    """Require |x(+-L)| mu(L) < tol ||x|| on the line so truncation is negligible."""
    d = x.domain
    if d.kind != "line":
        return
    edge = max(abs(x.values[0]), abs(x.values[-1])) * float(eval_weight(d.weight, d.L))
    nx = norm(x, p)
    if edge >= tol * nx:
        raise ParameterError(
            f"test function does not decay at the truncation edge: "
            f"|x(+-L)| mu(L) = {edge:.3e} >= {tol:g} * ||x|| = {tol * nx:.3e}"
        )
