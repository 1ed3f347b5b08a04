"""Defining-representation bases, structure constants and the Killing form.

Bases are orthonormal for the standard normalisation ``-1/2 Tr(T_i T_j) =
delta_ij``.  With such a basis the structure constants are
``c_ij^k = -1/2 Tr([T_i, T_j] T_k)`` and the coefficient reported as ``chi``
is ``-1/2 Tr(ad_{T_1}^2)``.  The full Killing matrix is then ``-2 chi * I``
and the Ricci curvature of the bi-invariant metric is ``-K/4 = chi/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .rootdata import GroupSpec, SeriesTag

__all__ = [
    "SizeGuardError",
    "BasisCorruptionError",
    "NonSimpleError",
    "LieBasis",
    "StructureConstants",
    "KillingReport",
    "su_basis",
    "so_basis",
    "usp_basis",
    "build_basis",
    "structure_constants",
    "adjoint_matrix",
    "killing_matrix",
    "chi_coefficient",
    "chi_closed_form",
    "jacobi_residual",
    "orbit_length_check",
    "two_plane_labels",
]

MAX_DIM_ALG = 400
BASIS_TOL = 1e-12
JACOBI_TOL = 1e-9
CHI_TOL = 1e-9
KILLING_TOL = 1e-8


class SizeGuardError(ValueError):
    """Algebra too large for dense (dim)^3 structure-constant storage."""


class BasisCorruptionError(ValueError):
    """Basis is not orthonormal, or produced complex structure constants."""


class NonSimpleError(ValueError):
    """Killing matrix is not proportional to the identity."""


@dataclass(frozen=True)
class LieBasis:
    """Generators ``T_i`` of a matrix Lie algebra, stacked as ``(dim_alg, N, N)``.

    ``kind`` is ``"su"``, ``"so"`` or ``"usp"`` and ``size`` the parameter the
    kind was built from (``N`` for su/so, ``n`` for usp(2n)).
    """

    kind: str
    size: int
    generators: np.ndarray
    labels: tuple
    spec: GroupSpec | None = None

    @property
    def dim_rep(self) -> int:
        return self.generators.shape[1]

    @property
    def dim_alg(self) -> int:
        return self.generators.shape[0]

    def index(self, label) -> int:
        return self.labels.index(tuple(label))

    def gram(self) -> np.ndarray:
        """``-1/2 Tr(T_i T_j)``; identity for a normalised basis."""
        T = self.generators
        flat = T.reshape(len(T), -1)
        flat_t = np.transpose(T, (0, 2, 1)).reshape(len(T), -1)
        return -0.5 * (flat @ flat_t.T)

    def scaled(self, factor: float) -> "LieBasis":
        return LieBasis(self.kind, self.size, factor * self.generators, self.labels, self.spec)


def _guard(dim_alg: int):
    if dim_alg > MAX_DIM_ALG:
        raise SizeGuardError(f"dim_alg = {dim_alg} exceeds the dense-storage guard {MAX_DIM_ALG}")


def _E(N: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((N, N), dtype=complex)
    m[i, j] = 1.0
    return m


def _stack(gens, labels, kind, size, spec) -> LieBasis:
    arr = np.array(gens, dtype=complex)
    arr.setflags(write=False)
    return LieBasis(kind, size, arr, tuple(labels), spec)


def su_basis(n: int, spec: GroupSpec | None = None) -> LieBasis:
    """``H_k`` (Cartan), then ``S_kj``, then ``A_kj``; labels are 1-based."""
    if n < 2:
        raise ValueError("su(n) needs n >= 2")
    _guard(n * n - 1)
    gens, labels = [], []
    for k in range(1, n):
        diag = np.zeros(n)
        diag[:k] = 1.0
        diag[k] = -k
        gens.append(1j * math.sqrt(2.0) / math.sqrt(k * k + k) * np.diag(diag))
        labels.append(("H", k))
    pairs = list(combinations(range(n), 2))
    for k, j in pairs:
        gens.append(1j * (_E(n, k, j) + _E(n, j, k)))
        labels.append(("S", k + 1, j + 1))
    for k, j in pairs:
        gens.append(_E(n, k, j) - _E(n, j, k))
        labels.append(("A", k + 1, j + 1))
    return _stack(gens, labels, "su", n, spec)


def so_basis(n: int, spec: GroupSpec | None = None) -> LieBasis:
    """Two-plane generators ``A_kj = E_kj - E_jk``, ``k < j``."""
    if n < 2:
        raise ValueError("so(n) needs n >= 2")
    _guard(n * (n - 1) // 2)
    gens, labels = [], []
    for k, j in combinations(range(n), 2):
        gens.append(_E(n, k, j) - _E(n, j, k))
        labels.append(("A", k + 1, j + 1))
    return _stack(gens, labels, "so", n, spec)


def usp_basis(n: int, spec: GroupSpec | None = None) -> LieBasis:
    """usp(2n) as ``2n x 2n`` anti-Hermitian matrices ``[[A, B], [C, -A^T]]``.

    Families in order: ``H_a, S^d_ij, A^d_ij, T_a, S^a_ij, U_a, A^a_ij``.
    """
    if n < 1:
        raise ValueError("usp(2n) needs n >= 1")
    _guard(n * (2 * n + 1))
    N = 2 * n
    E = lambda i, j: _E(N, i, j)  # noqa: E731
    r = 1.0 / math.sqrt(2.0)
    pairs = list(combinations(range(n), 2))
    gens, labels = [], []

    def add(label, mat):
        gens.append(mat)
        labels.append(label)

    for a in range(n):
        add(("H", a + 1), 1j * (E(a, a) - E(a + n, a + n)))
    for i, j in pairs:
        add(("Sd", i + 1, j + 1), 1j * r * (E(i, j) + E(j, i) - E(i + n, j + n) - E(j + n, i + n)))
    for i, j in pairs:
        add(("Ad", i + 1, j + 1), r * (E(i, j) - E(j, i) + E(i + n, j + n) - E(j + n, i + n)))
    for a in range(n):
        add(("T", a + 1), 1j * (E(a, a + n) + E(a + n, a)))
    for i, j in pairs:
        add(("Sa", i + 1, j + 1), 1j * r * (E(i, j + n) + E(j, i + n) + E(i + n, j) + E(j + n, i)))
    for a in range(n):
        add(("U", a + 1), E(a, a + n) - E(a + n, a))
    for i, j in pairs:
        add(("Aa", i + 1, j + 1), r * (E(i, j + n) + E(j, i + n) - E(i + n, j) - E(j + n, i)))
    return _stack(gens, labels, "usp", n, spec)


def build_basis(spec: GroupSpec) -> LieBasis:
    """Basis of the Lie algebra of ``spec`` in its defining representation.

    B and D both map to so(N) with ``N = 2n+1`` or ``2n``.
    """
    s, n = spec.series, spec.n
    if s is SeriesTag.A:
        return su_basis(n, spec)
    if s is SeriesTag.B:
        return so_basis(2 * n + 1, spec)
    if s is SeriesTag.D:
        return so_basis(2 * n, spec)
    return usp_basis(n, spec)


@dataclass(frozen=True)
class StructureConstants:
    """``c[i, j, k] = c_ij^k`` with ``[T_i, T_j] = sum_k c_ij^k T_k``."""

    c: np.ndarray

    @property
    def dim(self) -> int:
        return self.c.shape[0]


def structure_constants(basis: LieBasis, check_normalized: bool = True) -> StructureConstants:
    """Project commutators back onto the basis with the trace form.

    Raises
    ------
    BasisCorruptionError
        If the basis is not orthonormal (when checked) or an imaginary part
        above ``1e-12`` survives.
    """
    T = basis.generators
    d = len(T)
    _guard(d)
    if check_normalized:
        dev = np.abs(basis.gram() - np.eye(d)).max()
        if dev > BASIS_TOL:
            raise BasisCorruptionError(f"basis not orthonormal: max deviation {dev:.3e}")
    # Tr(X T_k) = sum_ab X_ab (T_k)_ba
    t_flat = np.transpose(T, (0, 2, 1)).reshape(d, -1)
    c = np.empty((d, d, d), dtype=complex)
    for i in range(d):
        comm = T[i] @ T - T @ T[i]
        c[i] = -0.5 * (comm.reshape(d, -1) @ t_flat.T)
    imag = np.abs(c.imag).max() if d else 0.0
    if imag > BASIS_TOL:
        raise BasisCorruptionError(f"structure constants not real: max |Im| = {imag:.3e}")
    real = np.ascontiguousarray(c.real)
    real.setflags(write=False)
    return StructureConstants(real)


def adjoint_matrix(sc: StructureConstants, i: int) -> np.ndarray:
    """``(ad_i)_{kj} = c_ij^k``."""
    return sc.c[i].T.copy()


def killing_matrix(sc: StructureConstants) -> np.ndarray:
    """``K_ij = Tr(ad_i ad_j) = sum_{k,l} c_ik^l c_jl^k``."""
    return np.einsum("ikl,jlk->ij", sc.c, sc.c, optimize=True)


def jacobi_residual(sc: StructureConstants) -> float:
    """Max-norm of the cyclic Jacobi sum, computed one ``i`` slice at a time."""
    c = sc.c
    worst = 0.0
    for i in range(sc.dim):
        # [[T_i,T_j],T_k] + [[T_j,T_k],T_i] + [[T_k,T_i],T_j], coefficient on T_l
        t1 = np.einsum("jm,mkl->jkl", c[i], c)
        t2 = np.einsum("jkm,ml->jkl", c, c[:, i, :])
        t3 = np.einsum("km,mjl->jkl", c[:, i, :], c)
        worst = max(worst, float(np.abs(t1 + t2 + t3).max()))
    return worst


@dataclass(frozen=True)
class KillingReport:
    """``chi = -1/2 Tr(ad_probe^2)``; Killing matrix ``K ~ killing_constant * I``.

    ``killing_diagonal_spread`` is ``max |K_ij - killing_constant * delta_ij|``
    and ``ricci_bound`` the Ricci eigenvalue ``-killing_constant / 4``.
    """

    chi: float
    killing_constant: float
    killing_diagonal_spread: float
    ricci_bound: float
    probe: int = 0


def chi_coefficient(sc: StructureConstants, probe: int = 0) -> KillingReport:
    """Killing coefficient from a single probe generator, plus proportionality check.

    Raises
    ------
    NonSimpleError
        If ``K`` deviates from a multiple of the identity by more than ``1e-8``.
    """
    K = killing_matrix(sc)
    kappa = float(np.mean(np.diag(K)))
    spread = float(np.abs(K - kappa * np.eye(sc.dim)).max())
    if spread > KILLING_TOL:
        raise NonSimpleError(f"Killing matrix not proportional to identity (spread {spread:.3e})")
    ad = adjoint_matrix(sc, probe)
    chi = -0.5 * float(np.trace(ad @ ad))
    return KillingReport(chi=chi, killing_constant=kappa, killing_diagonal_spread=spread,
                         ricci_bound=-kappa / 4.0, probe=probe)


def chi_closed_form(kind: str, size: int) -> float:
    """Literature values ``n+2`` (su(n)), ``n-2`` (so(n)), ``2n+2`` (usp(2n))."""
    return {"su": size + 2, "so": size - 2, "usp": 2 * size + 2}[kind]


def two_plane_labels(basis: LieBasis) -> list:
    """Labels of the generators of two-plane rotations (``A_kj``, or ``U_a`` for usp)."""
    tag = "U" if basis.kind == "usp" else "A"
    return [lab for lab in basis.labels if lab[0] == tag]


def orbit_length_check(basis: LieBasis, k, j=None) -> float:
    """Length ``2 pi sqrt(-1/2 Tr(T^2))`` of the orbit ``exp(theta T)``, ``theta in [0, 2 pi]``.

    ``(k, j)`` selects ``A_kj``; a single integer ``k`` with ``j=None`` selects
    ``U_k`` in usp.  A full label tuple is also accepted as ``k``.
    """
    if isinstance(k, tuple):
        label = k
    elif j is None:
        label = ("U", k)
    else:
        label = ("A", k, j)
    T = basis.generators[basis.index(label)]
    norm2 = -0.5 * np.trace(T @ T).real
    return 2.0 * math.pi * math.sqrt(norm2)
