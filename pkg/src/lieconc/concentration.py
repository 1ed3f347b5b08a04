"""Exact and Monte Carlo concentration diagnostics.

Masses are those of ``{|f - c| > eps}`` for a scalar observable ``f`` with
centre ``c``.  Built-in families carry the centre of their concentration
locus and a closed form; generic samplers fall back to the empirical median.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import betaincc

from . import stats
from .examples import sample_zn, zn_mass_outside
from .sampling import RandomStream, cpn_zeta0_sq, sample_cpn_xi, uniform_sphere

__all__ = [
    "InsufficientDataError",
    "CriterionInapplicableError",
    "sphere_band_mass",
    "sphere_band_mass_quad",
    "cpn_band_mass",
    "cpn_band_mass_quad",
    "Family",
    "BUILTIN_FAMILIES",
    "builtin_family",
    "ReportEntry",
    "ConcentrationReport",
    "estimate_concentration",
    "concentration_sweep",
    "levy_trend",
    "ScaledFamily",
    "apply_rescaling",
]

MIN_TRIALS = 1000
HALF_PI = math.pi / 2


class InsufficientDataError(ValueError):
    pass


class CriterionInapplicableError(ValueError):
    """Ricci lower bound not positive, so the rescaling argument does not apply."""


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps <= HALF_PI:
        raise ValueError("epsilon must lie in [0, pi/2]")
    return eps


def sphere_band_mass(dim: int, eps: float) -> float:
    """Normalized mass of points of ``S^dim`` at geodesic distance ``>= eps`` from the equator.

    Equal to ``P(x_1^2 >= sin^2 eps)`` with ``x_1^2 ~ Beta(1/2, dim/2)``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    eps = _check_eps(eps)
    if eps == HALF_PI:
        return 0.0
    return float(betaincc(0.5, dim / 2.0, math.sin(eps) ** 2))


def sphere_band_mass_quad(dim: int, eps: float) -> float:
    """Quadrature oracle: ``int_eps^{pi/2} cos^{dim-1} / int_0^{pi/2} cos^{dim-1}``."""
    eps = _check_eps(eps)
    f = lambda t: math.cos(t) ** (dim - 1)
    num, _ = integrate.quad(f, eps, HALF_PI, epsabs=1e-12, epsrel=1e-12, limit=200)
    den, _ = integrate.quad(f, 0.0, HALF_PI, epsabs=1e-12, epsrel=1e-12, limit=200)
    return num / den


def cpn_band_mass(n: int, eps: float) -> float:
    """Mass of ``{xi <= pi/2 - eps}`` in CP^n: ``cos^{2n} eps``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    eps = _check_eps(eps)
    c = math.cos(eps)
    return 0.0 if c <= 0.0 else math.exp(2 * n * math.log(c))


def cpn_band_mass_quad(n: int, eps: float) -> float:
    """Quadrature of the ``xi`` marginal ``2n cos(xi) sin^{2n-1}(xi)`` over ``[0, pi/2 - eps]``."""
    eps = _check_eps(eps)
    f = lambda x: 2 * n * math.cos(x) * math.sin(x) ** (2 * n - 1)
    val, _ = integrate.quad(f, 0.0, HALF_PI - eps, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


# -- observable families ------------------------------------------------------------


@dataclass(frozen=True)
class Family:
    """A scalar observable ``draw(size, gen)`` of the ``n``-th space of a family.

    ``center=None`` measures deviation from the empirical median.
    """

    label: str
    n: int
    draw: Callable[[int, np.random.Generator], np.ndarray]
    center: float | None = None
    exact: Callable[[float], float] | None = None


def _cpn(n: int) -> Family:
    return Family("cpn", n, lambda size, gen: sample_cpn_xi(n, size, gen), HALF_PI,
                  lambda eps: cpn_band_mass(n, eps))


def _cpn_haar(n: int) -> Family:
    def draw(size, gen):
        return np.arccos(np.sqrt(np.clip(cpn_zeta0_sq(n, size, gen, method="vector"), 0.0, 1.0)))
    return Family("cpn-haar", n, draw, HALF_PI, lambda eps: cpn_band_mass(n, eps))


def _sphere_coordinate(n: int) -> Family:
    # first coordinate of a uniform point of S^n in R^{n+1}
    def exact(eps):
        return 0.0 if eps >= 1.0 else sphere_band_mass(n, math.asin(eps))
    return Family("sphere-coordinate", n, lambda size, gen: uniform_sphere(n + 1, size, gen)[:, 0],
                  0.0, exact)


def _circle_z(n: int) -> Family:
    def exact(eps):
        return 0.0 if eps >= math.pi else 1.0 if eps <= 0 else zn_mass_outside(n, eps)
    return Family("circle-z", n, lambda size, gen: sample_zn(n, size, gen), math.pi, exact)


BUILTIN_FAMILIES = {
    "cpn": _cpn,
    "cpn-haar": _cpn_haar,
    "sphere-coordinate": _sphere_coordinate,
    "circle-z": _circle_z,
}


def builtin_family(label: str, n: int) -> Family:
    try:
        make = BUILTIN_FAMILIES[label]
    except KeyError:
        raise ValueError(f"unknown family {label!r}; choose from {sorted(BUILTIN_FAMILIES)}") from None
    if n < 1:
        raise ValueError("n must be >= 1")
    return make(n)


@dataclass(frozen=True)
class ReportEntry:
    n: int
    epsilon: float
    exact_mass: float | None
    mc_mass: float
    mc_halfwidth: float
    trials: int

    def __post_init__(self):
        if not 0.0 <= self.mc_mass <= 1.0:
            raise ValueError("mc_mass outside [0, 1]")
        if self.mc_halfwidth < 0:
            raise ValueError("negative halfwidth")


@dataclass(frozen=True)
class ConcentrationReport:
    family_label: str
    entries: tuple[ReportEntry, ...]
    seed: int | None = None
    flags: tuple[str, ...] = field(default=())

    def records(self) -> list[dict]:
        return [{"family": self.family_label, "n": e.n, "epsilon": e.epsilon, "exact": e.exact_mass,
                 "mc": e.mc_mass, "halfwidth": e.mc_halfwidth, "trials": e.trials, "seed": self.seed}
                for e in self.entries]

    def n_values(self) -> list[int]:
        return sorted({e.n for e in self.entries})

    def merged(self, other: "ConcentrationReport") -> "ConcentrationReport":
        if other.family_label != self.family_label:
            raise ValueError("cannot merge reports of different families")
        flags = tuple(dict.fromkeys(self.flags + other.flags))
        return ConcentrationReport(self.family_label, self.entries + other.entries, self.seed, flags)


def estimate_concentration(sampler, epsilon_grid, trials: int, rng: RandomStream) -> ConcentrationReport:
    """Fraction of draws with ``|f - c| > eps`` for each ``eps``, with 99% exact halfwidths.

    ``sampler`` is a :class:`Family` or a bare ``draw(size, gen)`` callable.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}")
    fam = sampler if isinstance(sampler, Family) else Family("custom", 0, sampler)
    values = stats.chunked_draws(fam.draw, trials, rng).astype(float)
    flags = []
    if np.all(values == values[0]):
        flags.append("degenerate")
    center = float(np.median(values)) if fam.center is None else fam.center
    dev = np.abs(values - center)
    entries = []
    for eps in epsilon_grid:
        eps = float(eps)
        k = int(np.count_nonzero(dev > eps))
        p, hw = stats.binomial_estimate(k, trials)
        exact = None if fam.exact is None else float(fam.exact(eps))
        entries.append(ReportEntry(fam.n, eps, exact, p, hw, trials))
    return ConcentrationReport(fam.label, tuple(entries), rng.seed, tuple(flags))


def concentration_sweep(label: str, n_values, epsilon_grid, trials: int, rng: RandomStream) -> ConcentrationReport:
    """Estimate a built-in family at each ``n``; ``n`` selects an independent substream."""
    report = None
    for n in n_values:
        part = estimate_concentration(builtin_family(label, n), epsilon_grid, trials,
                                      rng.substream(1_000_000 + int(n)))
        report = part if report is None else report.merged(part)
    if report is None:
        raise InsufficientDataError("no n values given")
    return report


def levy_trend(report: ConcentrationReport) -> dict[float, bool]:
    """Per ``eps``: does the mass fall strictly with ``n``, beyond the confidence halfwidths?"""
    by_eps: dict[float, list[ReportEntry]] = {}
    for e in report.entries:
        by_eps.setdefault(e.epsilon, []).append(e)
    verdict = {}
    for eps, rows in by_eps.items():
        rows = sorted(rows, key=lambda r: r.n)
        if len({r.n for r in rows}) < 3:
            raise InsufficientDataError(f"need at least 3 values of n at epsilon={eps}")
        verdict[eps] = all(b.mc_mass + b.mc_halfwidth < a.mc_mass - a.mc_halfwidth
                           for a, b in zip(rows, rows[1:]))
    if not verdict:
        raise InsufficientDataError("empty report")
    return verdict


# -- metric rescaling ---------------------------------------------------------------


@dataclass(frozen=True)
class ScaledFamily:
    """Metrics ``c_i g_i`` on a base family; ``c_i`` positive and nondecreasing."""

    base_family: str
    scale_constants: tuple[float, ...]
    growth: str = "custom"

    def __post_init__(self):
        c = np.asarray(self.scale_constants, dtype=float)
        if c.size == 0 or np.any(c <= 0) or not np.all(np.isfinite(c)):
            raise ValueError("scale constants must be finite and strictly positive")
        if np.any(np.diff(c) < 0):
            raise ValueError("scale constants must be nondecreasing")

    @classmethod
    def linear(cls, base_family: str, indices) -> "ScaledFamily":
        return cls(base_family, tuple(float(i) for i in indices), "linear")

    @classmethod
    def quadratic(cls, base_family: str, indices) -> "ScaledFamily":
        return cls(base_family, tuple(float(i) ** 2 for i in indices), "quadratic")


def apply_rescaling(family: ScaledFamily, base_ricci) -> list[float]:
    """Ricci lower bounds ``c_i R_i`` of the rescaled family."""
    r = [float(x) for x in base_ricci]
    if len(r) != len(family.scale_constants):
        raise ValueError("one Ricci bound per scale constant")
    if any(x <= 0 for x in r):
        raise CriterionInapplicableError("Ricci lower bounds must be strictly positive")
    return [c * x for c, x in zip(family.scale_constants, r)]
