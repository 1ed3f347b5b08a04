"""Worked concentration examples.

* circle families: ``Y_n`` (shrinking metric ``dtheta^2 / (4 pi^2 n^2)``) and
  ``Z_n`` (density ``~ sin^{2n}(theta/2)``, concentrating at ``pi``);
* pushforward ("induced") measures ``mu^x(A) = Haar{g : g.x in A}`` for
  trivial, transitive, axis-rotation and U(1)-weight actions and for SO(N)
  acting on a finite truncation of the Hilbert ball;
* the embedding ``U(n) -> SU(n+1)``, ``X -> diag(X, det X^{-1})``;
* Sobolev norms of ``u_n = sin(nx) / sqrt(pi (n^2+1))`` on ``[0, 2 pi]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from . import stats
from .sampling import (
    RandomStream,
    haar_orthogonal,
    haar_special_unitary,
    haar_unitary,
    uniform_complex_sphere,
    uniform_sphere,
)

__all__ = [
    "CircleFamilyY",
    "CircleFamilyZ",
    "ActionSpec",
    "TargetSet",
    "PushforwardEstimate",
    "MomentEstimate",
    "NonUnitaryError",
    "ResolutionError",
    "yn_diameter",
    "yn_tube_is_whole_space",
    "zn_log_norm_const",
    "zn_density",
    "zn_normalization",
    "zn_mass_outside",
    "sample_zn",
    "act",
    "induced_measure",
    "hilbert_coordinate_moment",
    "u1_block_action",
    "u1_min_displacement",
    "embedding_J",
    "sobolev_norms",
]

# above this size Haar matrices are replaced by the exactly equivalent orbit draw
HAAR_MATRIX_MAX = 64
_DOMAIN_TOL = 1e-9


class NonUnitaryError(ValueError):
    pass


class ResolutionError(ValueError):
    """Too few quadrature points for the oscillation frequency."""


# -- circle families -----------------------------------------------------------------


@dataclass(frozen=True)
class CircleFamilyY:
    n: int

    @property
    def metric_scale(self) -> float:
        """Length element factor: ``ds = dtheta / (2 pi n)``."""
        return 1.0 / (2.0 * math.pi * self.n)

    @property
    def diameter(self) -> float:
        return yn_diameter(self.n)


def yn_diameter(n: int) -> float:
    """Half the circumference ``2 pi / (2 pi n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1.0 / (2.0 * n)


def yn_tube_is_whole_space(n: int, epsilon: float) -> bool:
    """Whether ``N_eps(A_n)`` is the whole circle by the criterion ``n > pi / eps``."""
    if n < 1 or epsilon <= 0:
        raise ValueError("need n >= 1 and epsilon > 0")
    return n > math.pi / epsilon


def zn_log_norm_const(n: int) -> float:
    """``log[(1/2pi) 2^{2n-1} Gamma(n) n! / Gamma(2n)]``."""
    return (-math.log(2 * math.pi) + (2 * n - 1) * math.log(2.0)
            + float(gammaln(n) + gammaln(n + 1) - gammaln(2 * n)))


def zn_density(theta, n: int):
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore"):
        log_s = np.log(np.abs(np.sin(theta / 2.0)))
    return np.exp(zn_log_norm_const(n) + 2 * n * log_s)


@dataclass(frozen=True)
class CircleFamilyZ:
    n: int

    @property
    def norm_const(self) -> float:
        return math.exp(zn_log_norm_const(self.n))

    def density(self, theta):
        return zn_density(theta, self.n)

    def normalization(self) -> float:
        return zn_normalization(self.n)


def zn_normalization(n: int) -> float:
    val, _ = integrate.quad(zn_density, 0.0, 2 * math.pi, args=(n,), points=[math.pi],
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def zn_mass_outside(n: int, delta: float) -> float:
    """Mass of ``[0, pi - delta] U [pi + delta, 2 pi]`` (the density is symmetric about ``pi``)."""
    if not 0.0 < delta < math.pi:
        raise ValueError("delta must lie in (0, pi)")
    val, _ = integrate.quad(zn_density, 0.0, math.pi - delta, args=(n,),
                            epsabs=1e-12, epsrel=1e-10, limit=200)
    return 2.0 * val


def sample_zn(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """Draws from ``Z_n``: ``theta = pi + 2x`` with ``x`` of density ``~ cos^{2n} x``.

    ``sin^2 x`` is then ``Beta(1/2, n + 1/2)``.
    """
    b = gen.beta(0.5, n + 0.5, size)
    sign = np.where(gen.random(size) < 0.5, -1.0, 1.0)
    return math.pi + 2.0 * np.arcsin(sign * np.sqrt(b))


# -- group actions and pushforward measures -----------------------------------------


@dataclass(frozen=True)
class ActionSpec:
    """Declarative description of an action ``rho(g, x)``.

    ``mode`` is one of

    ``"trivial"``      every point fixed;
    ``"fundamental"``  matrix action on the first ``group_dim`` coordinates
                       (identity on the rest), SO for real and SU/U for complex x;
    ``"axis"``         SO(2) rotating ``R^3`` about ``axis``;
    ``"weights"``      U(1) acting by ``diag(R_{m_1 t}, R_{m_2 t}, ...)``.

    ``space`` is ``"sphere"`` (unit vectors of ``R^space_dim``; ``"circle"`` is
    the case ``space_dim = 2``) or ``"hilbert"`` (vectors of norm <= 1 in a
    ``space_dim`` truncation of the Hilbert space).
    """

    group: str
    group_dim: int
    space: str
    space_dim: int
    mode: str = "fundamental"
    weights: tuple[int, ...] = ()
    axis: tuple[float, ...] = ()

    def __post_init__(self):
        if self.mode not in ("trivial", "fundamental", "axis", "weights"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.space not in ("sphere", "circle", "hilbert"):
            raise ValueError(f"unknown space {self.space!r}")
        if self.space == "circle" and self.space_dim != 2:
            raise ValueError("circle lives in R^2")
        if self.mode == "fundamental" and self.group_dim > self.space_dim:
            raise ValueError("group acts on more coordinates than the space has")
        if self.mode == "fundamental" and self.space != "hilbert" and self.group_dim != self.space_dim:
            raise ValueError("fundamental action on a sphere needs group_dim == space_dim")
        if self.mode == "weights":
            if not self.weights or any(m == 0 for m in self.weights):
                raise ValueError("weights must be nonzero (a zero weight has fixed points)")
            if 2 * len(self.weights) != self.space_dim:
                raise ValueError("need one weight per 2-plane")
        if self.mode == "axis":
            if self.space_dim != 3 or len(self.axis) != 3:
                raise ValueError("axis rotations act on R^3")


@dataclass(frozen=True)
class TargetSet:
    """Measurable target ``A`` for ``mu^x(A)``.

    ``arc``: points ``(cos t, sin t)`` with ``(t - start) mod 2 pi < length``.
    ``cylinder``: ``|<v, y - x0>| < eps`` (``outside=True`` for the complement);
    these are the basic weak-topology neighbourhoods.
    ``halfspace``: ``y[index] > threshold``.  ``ball``: ``|y - center| < radius``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def arc(cls, start: float, length: float) -> "TargetSet":
        return cls("arc", {"start": float(start), "length": float(length)})

    @classmethod
    def cylinder(cls, v, eps: float, x0=None, outside: bool = False) -> "TargetSet":
        return cls("cylinder", {"v": tuple(np.ravel(v)), "eps": float(eps),
                                "x0": None if x0 is None else tuple(np.ravel(x0)),
                                "outside": bool(outside)})

    @classmethod
    def halfspace(cls, index: int, threshold: float) -> "TargetSet":
        return cls("halfspace", {"index": int(index), "threshold": float(threshold)})

    @classmethod
    def ball(cls, center, radius: float) -> "TargetSet":
        return cls("ball", {"center": tuple(np.ravel(center)), "radius": float(radius)})

    def contains(self, points) -> np.ndarray:
        y = np.atleast_2d(points)
        p = self.params
        if self.kind == "arc":
            t = np.arctan2(y[:, 1].real, y[:, 0].real)
            return np.mod(t - p["start"], 2 * math.pi) < p["length"]
        if self.kind == "cylinder":
            v = np.zeros(y.shape[1], dtype=y.dtype)
            vv = np.asarray(p["v"])[: y.shape[1]]
            v[: len(vv)] = vv
            shift = y if p["x0"] is None else y - _pad(p["x0"], y.shape[1])
            inside = np.abs(shift @ v.conj()) < p["eps"]
            return ~inside if p["outside"] else inside
        if self.kind == "halfspace":
            return y[:, p["index"]].real > p["threshold"]
        if self.kind == "ball":
            return np.linalg.norm(y - _pad(p["center"], y.shape[1]), axis=1) < p["radius"]
        raise ValueError(f"unknown target kind {self.kind!r}")


def _pad(vec, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=np.result_type(np.asarray(vec)))
    v = np.asarray(vec)[:dim]
    out[: len(v)] = v
    return out


def _rotation_blocks(angles: np.ndarray) -> np.ndarray:
    """``R_a = [[cos a, sin a], [-sin a, cos a]]`` for each angle."""
    c, s = np.cos(angles), np.sin(angles)
    return np.stack([np.stack([c, s], -1), np.stack([-s, c], -1)], -2)


def _axis_rotation(axis, angles: np.ndarray) -> np.ndarray:
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    a = angles[:, None, None]
    return np.eye(3) + np.sin(a) * K + (1 - np.cos(a)) * (K @ K)


def check_domain(action: ActionSpec, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (action.space_dim,):
        raise ValueError(f"base point must have shape ({action.space_dim},)")
    norm = float(np.linalg.norm(x))
    if action.space == "hilbert":
        if norm > 1.0 + _DOMAIN_TOL:
            raise ValueError("base point outside the unit ball")
    elif abs(norm - 1.0) > _DOMAIN_TOL:
        raise ValueError("base point not on the unit sphere")
    return x


def act(action: ActionSpec, x, size: int, gen: np.random.Generator) -> np.ndarray:
    """Images ``rho(g, x)`` for ``size`` Haar-random ``g``."""
    x = check_domain(action, x)
    if action.mode == "trivial":
        return np.broadcast_to(x, (size, len(x))).copy()
    if action.mode == "axis":
        R = _axis_rotation(action.axis, gen.uniform(0, 2 * math.pi, size))
        return R @ x.astype(float)
    if action.mode == "weights":
        theta = gen.uniform(0, 2 * math.pi, size)
        return u1_block_action(action.weights, theta, x)

    N = action.group_dim
    head, tail = x[:N], x[N:]
    cplx = action.group in ("SU", "U") or np.iscomplexobj(x)
    if N <= HAAR_MATRIX_MAX:
        if action.group == "SO":
            g = haar_orthogonal(N, size, gen)
        elif action.group == "SU":
            g = haar_special_unitary(N, size, gen)
        elif action.group == "U":
            g = haar_unitary(N, size, gen)
        else:
            raise ValueError(f"group {action.group!r} has no fundamental action here")
        images = g @ head.astype(complex if cplx else float)
    else:
        # g.head is uniform on the sphere of radius |head| (transitivity + invariance)
        r = float(np.linalg.norm(head))
        sphere = uniform_complex_sphere(N, size, gen) if cplx else uniform_sphere(N, size, gen)
        images = r * sphere
    out = np.empty((size, len(x)), dtype=images.dtype)
    out[:, :N] = images
    out[:, N:] = tail
    return out


@dataclass(frozen=True)
class PushforwardEstimate:
    action: ActionSpec
    base_point: tuple
    target: TargetSet
    probability: float
    halfwidth: float
    trials: int
    exact: float | None = None


def _chunk_for(dim: int) -> int:
    return max(256, min(stats.CHUNK, 4_000_000 // max(dim, 1)))


def induced_measure(action: ActionSpec, x, target: TargetSet, trials: int, rng: RandomStream,
                    exact: float | None = None) -> PushforwardEstimate:
    """Monte Carlo estimate of ``Haar{g : rho(g, x) in target}`` with a 99% exact interval."""
    x = check_domain(action, x)
    hits = stats.chunked_draws(lambda size, gen: target.contains(act(action, x, size, gen)),
                               trials, rng, chunk=_chunk_for(action.space_dim))
    p, hw = stats.binomial_estimate(int(hits.sum()), trials)
    return PushforwardEstimate(action, tuple(x.tolist()), target, p, hw, trials, exact)


@dataclass(frozen=True)
class MomentEstimate:
    estimate: float
    stderr: float
    exact: float
    trials: int


def hilbert_coordinate_moment(N: int, v, trials: int, rng: RandomStream) -> MomentEstimate:
    """``E <v, X_N>^2`` for ``X_N`` uniform on the unit sphere of ``span(e_1..e_N)``.

    Exact value ``sum_{j <= N} v_j^2 / N``.
    """
    v = np.asarray(v, dtype=float)
    head = np.zeros(N)
    m = min(N, len(v))
    head[:m] = v[:m]
    exact = float(head @ head) / N

    def draw(size, gen):
        return (uniform_sphere(N, size, gen) @ head) ** 2

    vals = stats.chunked_draws(draw, trials, rng, chunk=_chunk_for(N))
    stderr = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return MomentEstimate(float(vals.mean()), stderr, exact, trials)


def u1_block_action(weights, theta, x) -> np.ndarray:
    """Apply ``diag(R_{m_1 theta}, ..., R_{m_k theta})`` to ``x`` (broadcasts over ``theta``)."""
    w = np.asarray(weights, dtype=float)
    if np.any(w == 0):
        raise ValueError("zero weight: the action has fixed points")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2 * len(w):
        raise ValueError("x must have two coordinates per weight")
    theta = np.asarray(theta, dtype=float)
    R = _rotation_blocks(theta[..., None] * w)  # (..., k, 2, 2)
    blocks = x.reshape(*x.shape[:-1], len(w), 2)
    out = np.einsum("...kij,...kj->...ki", R, blocks)
    return out.reshape(*out.shape[:-2], 2 * len(w))


def u1_min_displacement(weights, theta_grid=64, sphere_samples: int = 10_000, rng=None) -> float:
    """``min_x max_theta |R(theta) x - x|`` over sampled unit ``x`` and a theta grid.

    A positive value certifies that no sampled point is (nearly) fixed.
    """
    w = np.asarray(weights, dtype=float)
    if w.size == 0 or np.any(w == 0):
        raise ValueError("weights must be nonzero")
    if np.isscalar(theta_grid):
        theta = 2 * math.pi * np.arange(int(theta_grid)) / int(theta_grid)
    else:
        theta = np.asarray(theta_grid, dtype=float)
    rng = RandomStream(0) if rng is None else rng
    x = uniform_sphere(2 * len(w), sphere_samples, rng.generator())
    r2 = (x.reshape(len(x), len(w), 2) ** 2).sum(axis=2)
    # |R_{m t} y - y| = 2 |sin(m t / 2)| |y| on each plane
    gain = 4.0 * np.sin(np.outer(w, theta) / 2.0) ** 2
    disp2 = r2 @ gain
    return float(np.sqrt(disp2.max(axis=1).min()))


def embedding_J(X) -> np.ndarray:
    """``diag(X, 1/det X)`` in SU(n+1)."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    n = X.shape[0]
    if X.shape != (n, n):
        raise ValueError("X must be square")
    res = np.abs(X.conj().T @ X - np.eye(n)).max()
    if res > 1e-8:
        raise NonUnitaryError(f"X is not unitary (residual {res:.2e})")
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[:n, :n] = X
    out[n, n] = 1.0 / np.linalg.det(X)
    return out


def sobolev_norms(n: int, quadrature_points: int) -> tuple[float, float]:
    """``(W^{1,2} norm, L^2 norm)`` of ``u_n`` on ``[0, 2 pi]``.

    Periodic trapezoid rule with a spectral (FFT) derivative, both exact for
    trigonometric polynomials once ``quadrature_points > 2n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if quadrature_points < 20 * n:
        raise ResolutionError(f"need at least {20 * n} points for n={n}")
    M = int(quadrature_points)
    x = 2 * math.pi * np.arange(M) / M
    u = np.sin(n * x) / math.sqrt(math.pi * (n * n + 1))
    k = np.fft.rfftfreq(M, d=1.0 / M)
    du = np.fft.irfft(1j * k * np.fft.rfft(u), n=M)
    h = 2 * math.pi / M
    l2_sq = h * float(np.sum(u * u))
    d_sq = h * float(np.sum(du * du))
    return math.sqrt(l2_sq + d_sq), math.sqrt(l2_sq)
