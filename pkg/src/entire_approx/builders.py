"""Named test-function builders used by the harnesses and the CLI."""
from __future__ import annotations

import numpy as np

from .bandlimit import BandlimitedFunction, band_mask, check_representable, synthesize
from .errors import ParameterError
from .function_space import Domain, GridFunction, norm


def eigenfunction(domain: Domain, m: float) -> GridFunction:
    """exp(i m t); m must be a grid frequency."""
    k = m / domain.dxi
    if abs(k - round(k)) > 1e-9:
        raise ParameterError(f"frequency {m} is not on the grid (spacing {domain.dxi:g})")
    return synthesize(BandlimitedFunction.from_modes(domain, {round(k): 1.0}))


def lacunary_coefficients(n: int, gamma: float, J: int) -> list[float]:
    """a_j = 2^(-j (n + gamma)), j = 0..J."""
    return [2.0 ** (-j * (n + gamma)) for j in range(J + 1)]


def lacunary_series(domain: Domain, coeffs) -> BandlimitedFunction:
    """sum_j a_j exp(i 2^j t) on the circle."""
    if domain.kind != "periodic":
        raise ParameterError("lacunary series are built on the periodic domain")
    modes = {2**j: a for j, a in enumerate(coeffs)}
    return BandlimitedFunction.from_modes(domain, modes)


def lacunary(domain: Domain, n: int, gamma: float, J: int) -> GridFunction:
    return synthesize(lacunary_series(domain, lacunary_coefficients(n, gamma, J)))


def abs_sin(domain: Domain) -> GridFunction:
    if domain.kind != "periodic":
        raise ParameterError("abs_sin is a periodic test function")
    return GridFunction(domain, np.abs(np.sin(domain.t)))


def gaussian_packet(domain: Domain, center: float = 0.0, width: float = 1.0,
                    freq: float = 0.0) -> GridFunction:
    t = domain.t
    return GridFunction(domain, np.exp(-0.5 * ((t - center) / width) ** 2 + 1j * freq * t))


def random_bandlimited(domain: Domain, alpha: float, rng: np.random.Generator) -> BandlimitedFunction:
    """Seeded random vector of type <= alpha.

    On the circle: Gaussian coefficients on |m| <= alpha.  On the line: a
    sum of three Gaussian wave packets centred in [-L/16, L/16] with carrier
    frequencies in [-alpha/4, alpha/4], band-limited by hard truncation to
    |xi| <= alpha.  The width sqrt(1.25 L / alpha) puts the same number of
    standard deviations between the packet and the spatial edge as between
    its spectrum and the band edge, so both truncations are negligible.
    """
    check_representable(domain, alpha)
    mask = band_mask(domain, alpha)
    if domain.kind == "periodic":
        c = (rng.standard_normal(domain.N) + 1j * rng.standard_normal(domain.N)) * mask
        return BandlimitedFunction.from_coefficients(domain, c, alpha)
    width = np.sqrt(1.25 * domain.L / alpha)
    vals = np.zeros(domain.N, dtype=complex)
    for _ in range(3):
        center = rng.uniform(-domain.L / 16, domain.L / 16)
        freq = rng.uniform(-alpha / 4, alpha / 4)
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        vals += amp * gaussian_packet(domain, center, width, freq).values
    x = GridFunction(domain, vals)
    return BandlimitedFunction.from_coefficients(domain, x.coefficients(), alpha)


def smooth_random(domain: Domain, rng: np.random.Generator, decay: float = 0.5) -> GridFunction:
    """Seeded smooth grid function with coefficients decaying like exp(-decay |xi|)."""
    d = domain
    if d.kind == "periodic":
        env = np.exp(-decay * np.abs(d.xi))
        env[d.N // 2] = 0
        c = (rng.standard_normal(d.N) + 1j * rng.standard_normal(d.N)) * env
        return synthesize(BandlimitedFunction.from_coefficients(d, c, (d.N / 2 - 1) * d.dxi))
    vals = np.zeros(d.N, dtype=complex)
    for _ in range(3):
        vals += (rng.standard_normal() + 1j * rng.standard_normal()) * gaussian_packet(
            d, rng.uniform(-d.L / 8, d.L / 8), rng.uniform(1.0, 3.0), rng.uniform(-2, 2)
        ).values
    return GridFunction(d, vals)


BUILDERS = ("eigenfunction", "lacunary", "abs_sin", "gaussian_packet", "custom_csv")


def build(domain: Domain, record: dict) -> GridFunction:
    """Dispatch a config ``function`` record to its builder."""
    name = record.get("builder")
    if name == "eigenfunction":
        return eigenfunction(domain, float(record["m"]))
    if name == "lacunary":
        if "coeffs" in record:
            return synthesize(lacunary_series(domain, [float(a) for a in record["coeffs"]]))
        return lacunary(domain, int(record["n"]), float(record["gamma"]), int(record["J"]))
    if name == "abs_sin":
        return abs_sin(domain)
    if name == "gaussian_packet":
        return gaussian_packet(
            domain, float(record.get("center", 0.0)), float(record.get("width", 1.0)),
            float(record.get("freq", 0.0)),
        )
    if name == "custom_csv":
        return GridFunction.from_csv(record["path"], domain)
    raise ParameterError(f"unknown function builder {name!r}; expected one of {BUILDERS}")


def normalized(x: GridFunction, p=2) -> GridFunction:
    n = norm(x, p)
    return x if n == 0 else x * (1.0 / n)

