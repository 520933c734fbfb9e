"""Best approximation by exponential-type vectors and modulus majorants."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg

from .bandlimit import (
    BandlimitedFunction,
    MultiplierSpec,
    band_mask,
    check_representable,
    project,
    synthesize,
)
from .errors import ConvergenceWarning, DivergenceError, ParameterError
from .function_space import GridFunction, batch_norm, norm

METHODS = ("exact_l2", "least_squares_weighted", "subgradient")
MAX_ITER = 2000
STALL_ITER = 200


def default_method(x: GridFunction, p) -> str:
    p = float(p)
    if p == 2:
        return "exact_l2" if x.domain.weight.kind == "constant" else "least_squares_weighted"
    return "subgradient"


def _basis(x: GridFunction, r: float):
    d = x.domain
    idx = np.flatnonzero(band_mask(d, r))
    B = np.exp(1j * np.outer(d.t, d.xi[idx]))
    return idx, B


def _pack(x: GridFunction, idx, c, r) -> BandlimitedFunction:
    full = np.zeros(x.domain.N, dtype=complex)
    full[idx] = c
    return BandlimitedFunction(x.domain, full, float(r))


def _weighted_lstsq(B, x, w):
    sw = np.sqrt(w)
    c, *_ = np.linalg.lstsq(B * sw[:, None], x * sw, rcond=None)
    return c


def _objective(d, resid, p) -> float:
    return float(batch_norm(d, resid, p))


class _GramSolver:
    """Weighted least squares over the grid-frequency basis via FFTs.

    The basis columns are exp(i xi_a t_j) with xi_a on the frequency grid, so
    B^H W B is Toeplitz with entries read off one FFT of the weights and
    B^H W x is one FFT of W x.  Each solve costs O(N log N + k^3).
    """

    def __init__(self, d, idx):
        self.d, self.idx = d, idx
        a = np.asarray(idx)
        self.diff = (a[None, :] - a[:, None]) % d.N
        self.phase = np.exp(1j * d.xi[idx] * d.origin)

    def solve(self, B, x, w):
        d = self.d
        col = np.fft.ifft(w) * d.N
        G = np.conj(self.phase)[:, None] * col[self.diff] * self.phase[None, :]
        rhs = np.conj(self.phase) * np.fft.fft(w * x)[self.idx]
        try:
            c = linalg.cho_solve(linalg.cho_factor(G, check_finite=False), rhs,
                                 check_finite=False)
        except linalg.LinAlgError:
            return _weighted_lstsq(B, x, w)
        # an indefinite-looking factorization of a near-singular G shows up here
        return c if np.all(np.isfinite(c)) else _weighted_lstsq(B, x, w)


CONVERGE_WINDOW = 100
CONVERGE_RTOL = 1e-5


def _descend(x: GridFunction, B: np.ndarray, idx, starts, p: float, max_iter: int):
    """Reweighted least squares, then normalized subgradient steps s0/sqrt(i).

    The reweighting phase is IRLS with weights |e|^(p-2) for finite p and
    Lawson's multiplicative update for p = inf.  It ends when the best value
    has improved by less than ``CONVERGE_RTOL`` over ``CONVERGE_WINDOW``
    iterations, or stalls when nothing improves for ``STALL_ITER``
    iterations.  A short subgradient polish follows.  Returns
    ``(c, f, unconverged)``: the best coefficients with their value, plus a
    flag that is set when the run ended unconverged.
    """
    d = x.domain
    xv = x.values
    mu = d.mu
    f = lambda c: _objective(d, xv - B @ c, p)
    best_c = min(starts, key=f)
    best_f = f(best_c)
    if best_f == 0.0:
        return best_c, best_f, False
    gram = _GramSolver(d, idx)
    it, since = 0, 0
    converged = stalled = False
    history = [best_f]
    c = best_c
    w = np.ones(d.N) / d.N if math.isinf(p) else None
    while it < max_iter:
        it += 1
        e = np.abs(xv - B @ c) * mu
        if math.isinf(p):
            w = w * e
            if not w.sum() > 0:
                converged = True
                break
            w /= w.sum()
            ww = w * mu**2
        else:
            ww = mu**2 * np.maximum(e, 1e-12 * e.max()) ** (p - 2)
        c = gram.solve(B, xv, ww)
        fc = f(c)
        if fc < best_f * (1 - 1e-15):
            best_c, best_f, since = c, fc, 0
        else:
            since += 1
        history.append(best_f)
        if len(history) > CONVERGE_WINDOW and \
                history[-CONVERGE_WINDOW - 1] - best_f <= CONVERGE_RTOL * best_f:
            converged = True
            break
        if since >= STALL_ITER:
            stalled = True
            break

    basis_norm = float(batch_norm(d, np.ones(d.N), p))
    s0 = 0.1 * best_f / basis_norm
    c = best_c.copy()
    since = 0
    for i in range(1, min(max_iter - it, STALL_ITER) + 1):
        e = xv - B @ c
        a = np.abs(e) * mu
        phase = np.where(np.abs(e) > 0, e / np.where(np.abs(e) > 0, np.abs(e), 1), 0)
        if math.isinf(p):
            j = int(np.argmax(a))
            g = -mu[j] * phase[j] * np.conj(B[j])
        else:
            g = -(mu * a ** (p - 1) * phase) @ np.conj(B)
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        c = c - (s0 / math.sqrt(i)) * g / gn
        fc = f(c)
        if fc < best_f * (1 - 1e-15):
            best_c, best_f = c.copy(), fc
    return best_c, best_f, stalled or not converged


def residual_projection(x: GridFunction, r: float) -> BandlimitedFunction | None:
    """Projection P_phi x with stop <= r, i.e. a certified element of type <= r.

    ``||x - P_phi x||`` is an upper bound for E_r(x).  On the line alpha is
    rounded down to the frequency grid so the stop band never exceeds r.
    """
    d = x.domain
    alpha = r / 3.0 if d.kind == "periodic" else math.floor(r / (3.0 * d.dxi)) * d.dxi
    if alpha <= 0:
        return None
    return project(x, MultiplierSpec(alpha))


def best_approximation(x: GridFunction, r: float, p=2, method: str | None = None,
                       max_iter: int = MAX_ITER):
    """E_r(x): distance from x to vectors of type <= r, with a minimizer.

    ``exact_l2`` truncates coefficients (exact for p = 2, constant weight),
    ``least_squares_weighted`` solves the weighted normal equations (p = 2),
    ``subgradient`` handles general p starting from the better of the
    projection residual and the weighted L2 fit.  Returns ``(y, ||x - y||_p)``.
    """
    if r < 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    d = x.domain
    check_representable(d, r)
    p = float(p)
    method = method or default_method(x, p)
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "exact_l2":
        if p != 2 or d.weight.kind != "constant":
            raise ParameterError("exact_l2 needs p = 2 and a constant weight")
        y = BandlimitedFunction.from_coefficients(d, x.coefficients(), r)
        return y, norm(x - synthesize(y), p)

    idx, B = _basis(x, r)
    w2 = d.mu**2
    c_ls = _weighted_lstsq(B, x.values, w2)
    if method == "least_squares_weighted":
        if p != 2:
            raise ParameterError("least_squares_weighted needs p = 2")
        y = _pack(x, idx, c_ls, r)
        return y, norm(x - synthesize(y), p)

    starts = [c_ls]
    proj = residual_projection(x, r)
    if proj is not None:
        starts.append(proj.coeffs[idx])
    c, val, unconverged = _descend(x, B, idx, starts, p, max_iter)
    if unconverged:
        warnings.warn(
            f"subgradient did not converge within {max_iter} iterations "
            f"(stall window {STALL_ITER}) at r={r:g}, p={p:g}",
            ConvergenceWarning,
            stacklevel=2,
        )
    y = _pack(x, idx, c, r)
    return y, norm(x - synthesize(y), p)


@dataclass
class ApproxCurve:
    r_vals: list
    e_vals: list
    p: float
    method: str

    def is_nonincreasing(self, slack: float = 1e-9) -> bool:
        e = np.asarray(self.e_vals)
        scale = max(1.0, float(np.max(e))) if e.size else 1.0
        return bool(np.all(np.diff(e) <= slack * scale))


def approximation_curve(x: GridFunction, r_vals, p=2, method: str | None = None) -> ApproxCurve:
    method = method or default_method(x, p)
    r_vals = sorted(float(r) for r in r_vals)
    e = [best_approximation(x, r, p, method)[1] for r in r_vals]
    return ApproxCurve(r_vals, e, float(p), method)


# --- modulus majorants -------------------------------------------------------

FORMS = ("power", "log_power", "tabulated")


@dataclass
class ModulusSpec:
    """A majorant omega(t) of modulus-of-continuity type on [0, 1].

    ``power``: t^gamma; ``log_power``: t^gamma (1 + ln(1/t))^delta with
    delta <= gamma; ``tabulated``: piecewise linear through (t_vals, w_vals)
    with omega(0) = 0 unless the table says otherwise.
    """

    form: str
    gamma: float = 1.0
    delta: float = 0.0
    t_vals: list = field(default_factory=list)
    w_vals: list = field(default_factory=list)
    doubling_c: float | None = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise ParameterError(f"modulus form must be one of {FORMS}, got {self.form!r}")
        if self.form in ("power", "log_power") and not 0 < self.gamma <= 1:
            raise ParameterError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.form == "log_power" and self.delta > self.gamma:
            raise ParameterError("log_power needs delta <= gamma to stay nondecreasing")
        if self.form == "tabulated":
            t, w = np.asarray(self.t_vals, float), np.asarray(self.w_vals, float)
            if t.size < 2 or t.shape != w.shape or np.any(np.diff(t) <= 0) or t[0] < 0:
                raise ParameterError("tabulated modulus needs increasing t_vals >= 0 matching w_vals")
        if self.doubling_c is None:
            self.doubling_c = 2.0**self.gamma if self.form == "power" else self.measured_doubling()

    @classmethod
    def from_record(cls, rec: dict) -> "ModulusSpec":
        return cls(
            rec["form"], float(rec.get("gamma", 1.0)), float(rec.get("delta", 0.0)),
            list(rec.get("t_vals", [])), list(rec.get("w_vals", [])), rec.get("doubling_c"),
        )

    def to_record(self) -> dict:
        out = {"form": self.form, "doubling_c": self.doubling_c}
        if self.form == "tabulated":
            out.update(t_vals=list(self.t_vals), w_vals=list(self.w_vals))
        else:
            out["gamma"] = self.gamma
            if self.form == "log_power":
                out["delta"] = self.delta
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.form == "power":
            out = np.abs(t) ** self.gamma
        elif self.form == "log_power":
            a = np.abs(t)
            with np.errstate(divide="ignore", invalid="ignore"):
                lg = 1.0 + np.log(1.0 / np.where(a > 0, np.minimum(a, 1.0), 1.0))
                out = np.where(a > 0, a**self.gamma * lg**self.delta, 0.0)
        else:
            tv, wv = np.asarray(self.t_vals, float), np.asarray(self.w_vals, float)
            if tv[0] > 0:
                tv, wv = np.concatenate([[0.0], tv]), np.concatenate([[0.0], wv])
            out = np.interp(t, tv, wv)
        return float(out) if out.ndim == 0 else out

    def sample_grid(self, n: int = 257) -> np.ndarray:
        return np.concatenate([[0.0], np.logspace(-12, 0, n)])

    def measured_doubling(self) -> float:
        t = self.sample_grid()[1:]
        t = t[t <= 0.5]
        w = self(t)
        ok = w > 0
        return float(np.max(self(2 * t[ok]) / w[ok])) if ok.any() else math.inf

    def check(self) -> dict:
        """Sampled verdicts for the four conditions on omega."""
        t = self.sample_grid()
        w = self(t)
        half = t[(t > 0) & (t <= 0.5)]
        dbl = self(2 * half) <= self.doubling_c * self(half) * (1 + 1e-12)
        try:
            omega_integral_transform(self, 1.0)
            integrable = True
        except DivergenceError:
            integrable = False
        return {
            "nondecreasing": bool(np.all(np.diff(w) >= -1e-15)),
            "zero_at_zero": bool(self(0.0) == 0.0),
            "doubling": bool(np.all(dbl)),
            "integrable": integrable,
        }


def _divergent_table(w: ModulusSpec) -> bool:
    return w.form == "tabulated" and float(w.t_vals[0]) == 0.0 and float(w.w_vals[0]) > 0.0


def omega_integral_transform(w: ModulusSpec, t: float) -> float:
    """Omega(t) = int_0^t omega(u)/u du, integrated in s with u = t exp(-s)."""
    if t == 0:
        return 0.0
    if not 0 < t <= 1:
        raise ParameterError(f"t must be in (0, 1], got {t}")
    if _divergent_table(w):
        raise DivergenceError("omega(0+) > 0: omega(u)/u is not integrable at 0")
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(lambda s: w(t * math.exp(-s)), 0.0, math.inf,
                                    epsabs=0.0, epsrel=1e-11, limit=400)
        except integrate.IntegrationWarning as exc:
            raise DivergenceError(f"int_0^t omega(u)/u du did not converge: {exc}") from None
    return val


def inverse_rhs(w: ModulusSpec, t: float, k: int) -> float:
    """t^k int_t^1 omega(u)/u^(k+1) du + int_0^t omega(u)/u du."""
    if not 0 < t <= 0.5:
        raise ParameterError(f"t must be in (0, 1/2], got {t}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    # u = exp(v) on [ln t, 0]
    val, _ = integrate.quad(lambda v: w(math.exp(v)) * math.exp(-k * v), math.log(t), 0.0,
                            epsabs=0.0, epsrel=1e-11, limit=400)
    return t**k * val + omega_integral_transform(w, t)
