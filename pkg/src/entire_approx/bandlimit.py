"""Exponential-type (band-limited) vectors and Fourier multiplier projections.

On the circle the entire vectors of d/dt are trigonometric polynomials and
the type is the degree; on the weighted line they are the band-limited
functions with spectrum in [-sigma, sigma].  Both are stored here as
coefficient arrays over the domain's frequency grid with exact zeros
outside the band.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError, ResolutionError
from .function_space import (
    Domain,
    GridFunction,
    apply_multiplier,
    batch_norm,
    group_norm_bound,
    norm,
)

MAX_DERIVATIVE = 20
SUPPORT_RTOL = 1e-12


def max_type(domain: Domain) -> float:
    """Largest type a band-limited vector may declare on this grid."""
    if domain.kind == "periodic":
        return domain.N / 2 - 1
    return math.pi * domain.N / (2 * domain.L) / 2


def check_representable(domain: Domain, sigma: float) -> None:
    if sigma > max_type(domain) * (1 + 1e-12):
        raise ResolutionError(
            f"type {sigma:g} not representable on this grid (max {max_type(domain):g})"
        )


def band_mask(domain: Domain, sigma: float) -> np.ndarray:
    # tolerance so that sigma landing on a grid frequency is inclusive
    return np.abs(domain.xi) <= sigma + 1e-9 * domain.dxi


@dataclass(frozen=True, eq=False)
class BandlimitedFunction:
    """Coefficients c_m of x(t) = sum c_m exp(i xi_m t), zero for |xi_m| > sigma.

    ``tight`` records whether ``sigma`` is the actual band edge (the largest
    |xi| with a nonzero coefficient) or only an upper bound.
    """

    domain: Domain
    coeffs: np.ndarray
    sigma: float
    tight: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.domain.N,):
            raise ParameterError(f"expected {self.domain.N} coefficients, got shape {c.shape}")
        if self.sigma < 0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")
        check_representable(self.domain, self.sigma)
        if np.any(c[~band_mask(self.domain, self.sigma)] != 0):
            raise ParameterError("coefficients outside [-sigma, sigma] must be exactly zero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_coefficients(cls, domain: Domain, coeffs, sigma: float, tight: bool = False):
        """Mask ``coeffs`` (FFT order) to the band and wrap them."""
        check_representable(domain, sigma)
        c = np.where(band_mask(domain, sigma), np.asarray(coeffs, dtype=complex), 0)
        return cls(domain, c, float(sigma), tight)

    @classmethod
    def from_modes(cls, domain: Domain, modes: dict) -> "BandlimitedFunction":
        """Build from {frequency index m: coefficient}; frequency is m * dxi."""
        c = np.zeros(domain.N, dtype=complex)
        for m, a in modes.items():
            c[int(m) % domain.N] = a
        nz = [abs(int(m)) for m, a in modes.items() if a != 0]
        sigma = max(nz, default=0) * domain.dxi
        return cls(domain, c, sigma, tight=True)

    @property
    def frequencies(self) -> np.ndarray:
        return self.domain.xi

    def band_edge(self) -> float:
        """max |xi| over nonzero coefficients."""
        nz = self.coeffs != 0
        return float(np.max(np.abs(self.domain.xi[nz]))) if nz.any() else 0.0

    def __add__(self, other):
        return BandlimitedFunction(
            self.domain, self.coeffs + other.coeffs, max(self.sigma, other.sigma)
        )

    def __mul__(self, a: complex):
        return BandlimitedFunction(self.domain, a * self.coeffs, self.sigma, self.tight and a != 0)

    __rmul__ = __mul__


def synthesize(b: BandlimitedFunction) -> GridFunction:
    d = b.domain
    return GridFunction(d, np.fft.ifft(b.coeffs * np.exp(1j * d.xi * d.origin)) * d.N)


def analyze(x: GridFunction, sigma: float | None = None) -> BandlimitedFunction:
    """Coefficients of x truncated to |xi| <= sigma.

    Without ``sigma`` the band edge is detected as the largest frequency
    whose coefficient exceeds ``SUPPORT_RTOL`` times the largest one, and
    the result is marked tight.
    """
    c = x.coefficients()
    if sigma is not None:
        return BandlimitedFunction.from_coefficients(x.domain, c, sigma)
    big = np.abs(c) > SUPPORT_RTOL * np.max(np.abs(c)) if np.any(c) else np.zeros(c.shape, bool)
    edge = float(np.max(np.abs(x.domain.xi[big]))) if big.any() else 0.0
    return BandlimitedFunction.from_coefficients(x.domain, np.where(big, c, 0), edge, tight=True)


def derivative_symbol(domain: Domain, n: int) -> np.ndarray:
    """(i xi)^n; the unpaired Nyquist mode is dropped so real inputs stay real."""
    sym = (1j * domain.xi) ** n
    sym[domain.N // 2] = 0
    return sym


def differentiate(b: BandlimitedFunction, n: int = 1) -> BandlimitedFunction:
    """A^n b, i.e. the n-th derivative; the type bound is unchanged."""
    if int(n) != n or n < 1 or n > MAX_DERIVATIVE:
        raise ParameterError(f"derivative order must be in 1..{MAX_DERIVATIVE}, got {n}")
    return BandlimitedFunction(
        b.domain, b.coeffs * derivative_symbol(b.domain, n), b.sigma, b.tight
    )


def derivative(x: GridFunction, n: int = 1) -> GridFunction:
    """Spectral n-th derivative of a grid function."""
    if n == 0:
        return x
    return apply_multiplier(x, derivative_symbol(x.domain, n))


def estimate_type(b: BandlimitedFunction, p=2, n_max: int = 256) -> float:
    """Numerical type: limit of ||A^n b||^(1/n) read off the growth of the norms.

    log ||A^n b|| is accumulated with renormalization at every step so no
    overflow occurs.  The per-step growth is estimated over two steps,
    (||A^n b|| / ||A^(n-2) b||)^(1/2), which cancels the period-two
    oscillation of the +sigma and -sigma modes, and the maximum over the
    second half of the range is returned.
    """
    if n_max < 8:
        raise ParameterError(f"n_max must be >= 8, got {n_max}")
    d = b.domain
    if not np.any(b.coeffs):
        return 0.0
    phase = np.exp(1j * d.xi * d.origin) * d.N
    sym = derivative_symbol(d, 1)
    c = b.coeffs.copy()
    log_norms = [math.log(float(batch_norm(d, np.fft.ifft(c * phase), p)))]
    for _ in range(n_max):
        c = c * sym
        nc = float(batch_norm(d, np.fft.ifft(c * phase), p))
        if nc == 0.0:
            return 0.0
        log_norms.append(log_norms[-1] + math.log(nc))
        c /= nc
    log_norms = np.array(log_norms)
    lo = max(2, n_max // 2)
    rates = [(log_norms[n] - log_norms[n - 2]) / 2 for n in range(lo, n_max + 1)]
    return float(math.exp(max(rates)))


TRANSITIONS = ("raised_cosine", "smooth_bump")


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 at u <= 0, 0 at u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = lambda s: np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        a, b = f(1.0 - u), f(u)
    return a / (a + b)


@dataclass(frozen=True)
class MultiplierSpec:
    """Even frequency cutoff: 1 on [-alpha, alpha], 0 outside (-stop, stop)."""

    alpha: float
    transition: str = "raised_cosine"
    stop: float | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if self.transition not in TRANSITIONS:
            raise ParameterError(f"transition must be one of {TRANSITIONS}")
        if self.stop is None:
            object.__setattr__(self, "stop", 3.0 * self.alpha)
        if not self.stop > self.alpha:
            raise ParameterError(f"stop ({self.stop}) must exceed alpha ({self.alpha})")

    def profile(self, xi) -> np.ndarray:
        a = np.abs(np.asarray(xi, dtype=float))
        u = (a - self.alpha) / (self.stop - self.alpha)
        if self.transition == "raised_cosine":
            out = 0.5 * (1.0 + np.cos(math.pi * np.clip(u, 0.0, 1.0)))
        else:
            out = _smooth_step(u)
        return np.where(a <= self.alpha, 1.0, np.where(a >= self.stop, 0.0, out))


def snap(m: MultiplierSpec, domain: Domain) -> MultiplierSpec:
    """On the line, move alpha to the nearest multiple of the frequency spacing."""
    if domain.kind == "periodic":
        return m
    k = max(1, round(m.alpha / domain.dxi))
    alpha = k * domain.dxi
    if not math.isclose(alpha, m.alpha, rel_tol=1e-12):
        warnings.warn(
            f"alpha {m.alpha:g} snapped to grid frequency {alpha:g} (spacing pi/L)",
            stacklevel=3,
        )
    stop = m.stop * alpha / m.alpha
    return MultiplierSpec(alpha, m.transition, stop)


def multiplier_values(m: MultiplierSpec, domain: Domain) -> np.ndarray:
    return m.profile(domain.xi)


def project(x: GridFunction, m: MultiplierSpec) -> BandlimitedFunction:
    """P_phi x: Fourier multiplier with the cutoff profile; the result has type <= stop."""
    m = snap(m, x.domain)
    check_representable(x.domain, m.stop)
    c = x.coefficients() * multiplier_values(m, x.domain)
    return BandlimitedFunction.from_coefficients(x.domain, c, m.stop)


def kernel_weights(m: MultiplierSpec, domain: Domain) -> tuple[np.ndarray, np.ndarray]:
    """Discrete kernel k_j and offsets s_j with P_phi x = sum_j k_j U(-s_j) x."""
    m = snap(m, domain)
    k = np.fft.ifft(multiplier_values(m, domain))
    j = np.arange(domain.N)
    offsets = np.where(j < domain.N // 2, j, j - domain.N) * domain.dt
    return k, offsets


def kernel_norm_bound(m: MultiplierSpec, domain: Domain) -> float:
    """C_phi = sum_j |k_j| M_U(|s_j|), a bound for ||P_phi|| on the grid space."""
    k, s = kernel_weights(m, domain)
    if domain.kind == "periodic":
        return float(np.sum(np.abs(k)))
    return float(sum(abs(kj) * group_norm_bound(domain, abs(sj)) for kj, sj in zip(k, s)))


def commutation_check(x: GridFunction, m: MultiplierSpec, p=2) -> float:
    """||A P_phi x - P_phi A x|| / ||x||."""
    nx = norm(x, p)
    if nx == 0:
        return 0.0
    m = snap(m, x.domain)
    mult = multiplier_values(m, x.domain)
    dsym = derivative_symbol(x.domain, 1)
    xhat = np.fft.fft(x.values)
    ap = np.fft.ifft(dsym * (mult * xhat))
    pa = np.fft.ifft(mult * (dsym * xhat))
    return float(batch_norm(x.domain, ap - pa, p)) / nx


def multiplier_to_csv(m: MultiplierSpec, domain: Domain, path) -> None:
    m = snap(m, domain)
    order = np.argsort(domain.xi, kind="stable")
    xi = domain.xi[order]
    vals = m.profile(xi)
    lines = ["xi,mhat"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(xi, vals)]
    Path(path).write_text("\n".join(lines) + "\n")
