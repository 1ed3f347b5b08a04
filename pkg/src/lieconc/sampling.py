"""Haar sampling on the classical groups and the angular law on CP^n.

Haar samplers orthonormalise Gaussian matrices and then fix the residual
phases (``R_ii > 0``) so the result is exactly Haar on O(n)/U(n); plain QR
output is not.  Determinants are then fixed by rescaling a single column, which
keeps left-invariance because ``det(hU) = det(U)`` for ``h`` in SO/SU.

Randomness comes from :class:`RandomStream`, a (seed, stream_id) pair mapped to
an independent counter-based Philox generator.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "RandomStream",
    "HaarSample",
    "CpnAngles",
    "as_generator",
    "haar_orthogonal",
    "haar_unitary",
    "haar_special_unitary",
    "haar_symplectic",
    "sample_orthogonal",
    "sample_unitary",
    "sample_special_unitary",
    "sample_symplectic",
    "uniform_sphere",
    "uniform_complex_sphere",
    "xi_from_uniform",
    "phi_from_uniform",
    "sample_cpn_angles",
    "sample_cpn_xi",
    "angles_to_homogeneous",
    "cpn_point_from_haar",
    "cpn_zeta0_sq",
    "fs_metric_components",
    "symplectic_form",
    "write_sample_dump",
    "read_sample_dump",
]


@dataclass(frozen=True)
class RandomStream:
    """Reproducible random stream.

    Identical ``(seed, stream_id, spawn)`` give identical draws; anything else
    gives an independent stream via :class:`numpy.random.SeedSequence`.
    """

    seed: int
    stream_id: int = 0
    spawn: tuple[int, ...] = field(default=())

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.spawn))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, k: int) -> "RandomStream":
        return RandomStream(self.seed, self.stream_id, (*self.spawn, int(k)))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RandomStream or numpy Generator, got {type(rng).__name__}")


def _complex_normal(gen, shape) -> np.ndarray:
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / math.sqrt(2.0)


def _fix_phases(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def haar_orthogonal(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """``size`` Haar samples from SO(n), shape ``(size, n, n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return np.ones((size, 1, 1))
    g = gen.standard_normal((size, n, n))
    q, r = np.linalg.qr(g)
    q = _fix_phases(q, r)
    neg = np.linalg.det(q) < 0
    q[neg, :, -1] *= -1.0
    return q


def haar_unitary(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """``size`` Haar samples from U(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = _complex_normal(gen, (size, n, n))
    q, r = np.linalg.qr(g)
    return _fix_phases(q, r)


def haar_special_unitary(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """Haar U(n) with the last column divided by the determinant."""
    u = haar_unitary(n, size, gen)
    det = np.linalg.det(u)
    u[:, :, -1] /= det[:, None]
    return u


def symplectic_form(n: int) -> np.ndarray:
    """``J = [[0, I], [-I, 0]]`` of size ``2n``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _partner(v: np.ndarray, n: int) -> np.ndarray:
    # (x; y) -> (-conj(y); conj(x)); commutes with USp(2n) and is orthogonal to v
    return np.concatenate([-np.conj(v[..., n:]), np.conj(v[..., :n])], axis=-1)


def haar_symplectic(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """``size`` Haar samples from USp(2n) in the block form ``[[P, Q], [-conj Q, conj P]]``.

    Quaternionic Gram-Schmidt of Gaussian columns ``g_k``: each new column is
    orthogonalised against all previous columns and their partners.  Ordering
    the columns as ``g_1, tau g_1, g_2, tau g_2, ...`` makes a phase-fixed QR
    produce exactly ``v_1, tau v_1, v_2, tau v_2, ...`` (``tau`` is
    antilinear with ``tau^2 = -1``), so LAPACK does the work.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    N = 2 * n
    g = _complex_normal(gen, (size, n, N))
    cols = np.empty((size, N, N), dtype=complex)
    cols[:, :, 0::2] = np.swapaxes(g, 1, 2)
    cols[:, :, 1::2] = np.swapaxes(_partner(g, n), 1, 2)
    q, r = np.linalg.qr(cols)
    q = _fix_phases(q, r)
    out = np.empty_like(q)
    out[:, :, :n] = q[:, :, 0::2]
    out[:, :, n:] = q[:, :, 1::2]
    return out


@dataclass(frozen=True)
class HaarSample:
    """One Haar-distributed group element; ``group`` is SO/U/SU/USp."""

    group: str
    n: int
    matrix: np.ndarray

    def unitarity_residual(self) -> float:
        m = self.matrix
        return float(np.abs(m.conj().T @ m - np.eye(len(m))).max())

    def determinant_residual(self) -> float:
        return float(abs(np.linalg.det(self.matrix) - 1.0))

    def symplectic_residual(self) -> float:
        J = symplectic_form(len(self.matrix) // 2)
        m = self.matrix
        return float(np.abs(m.T @ J @ m - J).max())


def sample_orthogonal(n: int, rng) -> HaarSample:
    return HaarSample("SO", n, haar_orthogonal(n, 1, as_generator(rng))[0])


def sample_unitary(n: int, rng) -> HaarSample:
    return HaarSample("U", n, haar_unitary(n, 1, as_generator(rng))[0])


def sample_special_unitary(n: int, rng) -> HaarSample:
    return HaarSample("SU", n, haar_special_unitary(n, 1, as_generator(rng))[0])


def sample_symplectic(n: int, rng) -> HaarSample:
    """Haar element of USp(2n); the matrix is ``2n x 2n``."""
    return HaarSample("USp", n, haar_symplectic(n, 1, as_generator(rng))[0])


def uniform_sphere(dim: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """``size`` uniform points on the unit sphere of ``R^dim``."""
    g = gen.standard_normal((size, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def uniform_complex_sphere(dim: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """``size`` uniform points on the unit sphere of ``C^dim``."""
    g = _complex_normal(gen, (size, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass(frozen=True)
class CpnAngles:
    """Angular coordinates on CP^n: ``xi`` in [0, pi/2), ``phi`` (n-1 values), ``theta`` (n)."""

    n: int
    xi: float
    phi: tuple[float, ...]
    theta: tuple[float, ...]

    def __post_init__(self):
        half = math.pi / 2
        if not 0.0 <= self.xi <= half:
            raise ValueError(f"xi={self.xi} outside [0, pi/2]")
        if len(self.phi) != self.n - 1 or len(self.theta) != self.n:
            raise ValueError("need n-1 phi angles and n theta angles")
        if any(not 0.0 <= p <= half for p in self.phi):
            raise ValueError("phi angles must lie in [0, pi/2]")
        if any(not 0.0 <= t < 2 * math.pi for t in self.theta):
            raise ValueError("theta angles must lie in [0, 2 pi)")


def xi_from_uniform(u, n: int):
    """Inverse CDF of the density ``2n cos(xi) sin^{2n-1}(xi)`` on [0, pi/2]."""
    return np.arcsin(np.asarray(u, dtype=float) ** (1.0 / (2 * n)))


def phi_from_uniform(u, a: int):
    """Inverse CDF of the density ``2a sin(phi) cos^{2a-1}(phi)`` on [0, pi/2]."""
    return np.arccos((1.0 - np.asarray(u, dtype=float)) ** (1.0 / (2 * a)))


def sample_cpn_xi(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    return xi_from_uniform(gen.random(size), n)


def sample_cpn_angles(n: int, rng) -> CpnAngles:
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_generator(rng)
    u = gen.random(n)
    xi = float(xi_from_uniform(u[0], n))
    phi = tuple(float(phi_from_uniform(u[a], a)) for a in range(1, n))
    theta = tuple(float(t) for t in gen.uniform(0.0, 2 * math.pi, n))
    return CpnAngles(n, xi, phi, theta)


def angles_to_homogeneous(a: CpnAngles, sphere_coords) -> np.ndarray:
    """Unit representative of ``(1 : tan(xi) R_1 e^{i psi_1} : ...)``, ``psi = theta``.

    Written as ``(cos xi, sin xi R e^{i psi})`` so ``xi = pi/2`` lands on the
    hyperplane at infinity ``(0 : R e^{i psi})``.
    """
    R = np.asarray(sphere_coords, dtype=float)
    if R.shape != (a.n,):
        raise ValueError(f"need {a.n} sphere coordinates")
    if abs(float(R @ R) - 1.0) > 1e-9:
        raise ValueError("sphere coordinates must satisfy sum R_i^2 = 1")
    tail = math.sin(a.xi) * R * np.exp(1j * np.asarray(a.theta))
    return np.concatenate([[math.cos(a.xi) + 0j], tail])


def cpn_zeta0_sq(n: int, size: int, gen: np.random.Generator, method: str = "vector") -> np.ndarray:
    """``|zeta_0|^2 = cos^2 xi`` for Haar-random points of CP^n.

    ``method="haar"`` reads the first column of Haar SU(n+1) matrices;
    ``"vector"`` draws the same column directly as a uniform unit vector of
    ``C^{n+1}`` (cheaper for large ``n``).
    """
    if method == "haar":
        col = haar_special_unitary(n + 1, size, gen)[:, :, 0]
    elif method == "vector":
        col = uniform_complex_sphere(n + 1, size, gen)
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.abs(col[:, 0]) ** 2


def cpn_point_from_haar(n: int, rng) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(cpn_zeta0_sq(n, 1, as_generator(rng), method="haar")[0])


def fs_metric_components(z) -> np.ndarray:
    """Fubini-Study ``g_{i jbar} = delta_ij / (1+|z|^2) - conj(z_i) z_j / (1+|z|^2)^2``."""
    z = np.asarray(z, dtype=complex).ravel()
    s = 1.0 + float(np.vdot(z, z).real)
    return np.eye(len(z)) / s - np.outer(z.conj(), z) / s**2


_DUMP_MAGIC = b"LCSAMPLE"


def write_sample_dump(path, samples) -> Path:
    """Row-major little-endian float64 with a 16-byte header (magic, n, count)."""
    a = np.asarray(samples, dtype="<f8")
    if a.ndim != 2:
        raise ValueError("samples must be 2-D (count, n)")
    count, n = a.shape
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_DUMP_MAGIC + struct.pack("<II", n, count))
        fh.write(np.ascontiguousarray(a).tobytes())
    return path


def read_sample_dump(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != _DUMP_MAGIC:
        raise ValueError("not a sample dump")
    n, count = struct.unpack("<II", raw[8:16])
    return np.frombuffer(raw[16:], dtype="<f8").reshape(count, n).copy()
