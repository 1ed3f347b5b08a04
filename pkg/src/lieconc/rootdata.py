"""Root data for the classical series and the Macdonald volume formula.

Volumes of compact simple groups grow (and shrink) super-exponentially with the
rank, so everything here lives in the natural-log domain.  Factorials go
through :func:`scipy.special.gammaln`.

Conventions follow the standard normalisation: long roots of A, B and D have
squared length 2; the B series has short roots ``e_i`` whose coroots are
``2 e_i``; the C series is the coroot dual of B.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.special import gammaln

__all__ = [
    "InvalidSpecError",
    "SeriesTag",
    "GroupSpec",
    "RootSystem",
    "LogVolume",
    "build_root_system",
    "macdonald_log_volume",
    "closed_form_log_volume",
    "log_volume_ratio",
    "normalized_volume_ratio",
    "ratio_asymptote",
    "volume_table",
    "VOLUME_COLUMNS",
]

LOG_2PI = math.log(2.0 * math.pi)


class InvalidSpecError(ValueError):
    """Series/rank combination outside the valid range."""


class SeriesTag(str, enum.Enum):
    A = "A"  # SU(n), rank n-1
    B = "B"  # Spin(2n+1)
    C = "C"  # USp(2n)
    D = "D"  # Spin(2n)

    @property
    def min_n(self) -> int:
        return 4 if self is SeriesTag.D else 2

    def group_name(self, n: int) -> str:
        return {"A": f"SU({n})", "B": f"Spin({2 * n + 1})",
                "C": f"USp({2 * n})", "D": f"Spin({2 * n})"}[self.value]


def _as_series(series) -> SeriesTag:
    try:
        return SeriesTag(series)
    except ValueError:
        raise InvalidSpecError(f"unknown series {series!r}") from None


def check_rank(series, n: int) -> SeriesTag:
    s = _as_series(series)
    if int(n) != n or n < s.min_n:
        raise InvalidSpecError(f"series {s.value} needs n >= {s.min_n}, got {n}")
    return s


@dataclass(frozen=True)
class GroupSpec:
    """A concrete compact group ``G / Gamma`` with ``|Gamma| = center_order``."""

    series: SeriesTag
    n: int
    center_order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "series", check_rank(self.series, self.n))
        object.__setattr__(self, "n", int(self.n))
        z = self.simply_connected_center
        if self.center_order < 1 or z % self.center_order:
            raise InvalidSpecError(
                f"center_order {self.center_order} does not divide |Z| = {z} "
                f"for {self.series.group_name(self.n)}")

    @property
    def simply_connected_center(self) -> int:
        return {SeriesTag.A: self.n, SeriesTag.B: 2, SeriesTag.C: 2, SeriesTag.D: 4}[self.series]

    @property
    def rank(self) -> int:
        return self.n - 1 if self.series is SeriesTag.A else self.n

    @property
    def dimension(self) -> int:
        n = self.n
        return {
            SeriesTag.A: n * n - 1,
            SeriesTag.B: n * (2 * n + 1),
            SeriesTag.C: n * (2 * n + 1),
            SeriesTag.D: n * (2 * n - 1),
        }[self.series]

    @property
    def name(self) -> str:
        base = self.series.group_name(self.n)
        return base if self.center_order == 1 else f"{base}/Z{self.center_order}"


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RootSystem:
    """Root data of one classical series member.

    Arrays are stored read-only.  ``positive_roots`` is kept alongside the
    coroots so the duality ``coroot = 2 a / (a|a)`` can be checked.
    """

    series: SeriesTag | None
    n: int
    rank: int
    ambient_dim: int
    simple_roots: np.ndarray
    simple_coroots: np.ndarray
    positive_roots: np.ndarray
    positive_coroots: np.ndarray
    invariant_degrees: tuple[int, ...]
    torus_volume: float = field(default=float("nan"))

    def __post_init__(self):
        for name in ("simple_roots", "simple_coroots", "positive_roots", "positive_coroots"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.size == 0:
                arr = arr.reshape(0, self.ambient_dim)
            object.__setattr__(self, name, _frozen(arr))
        object.__setattr__(self, "invariant_degrees", tuple(int(d) for d in self.invariant_degrees))
        if math.isnan(self.torus_volume):
            object.__setattr__(self, "torus_volume", lattice_volume(self.simple_coroots))

    @property
    def num_positive(self) -> int:
        return len(self.positive_coroots)


def lattice_volume(vectors) -> float:
    """``|v_1 ^ ... ^ v_r|`` as the square root of the Gram determinant."""
    v = np.asarray(vectors, dtype=float)
    if v.shape[0] == 0:
        return 1.0
    gram = v @ v.T
    return math.sqrt(abs(np.linalg.det(gram)))


def _coroot(alpha: np.ndarray) -> np.ndarray:
    return 2.0 * alpha / float(alpha @ alpha)


def _unit(dim: int, i: int) -> np.ndarray:
    e = np.zeros(dim)
    e[i] = 1.0
    return e


def build_root_system(series, n: int) -> RootSystem:
    """Simple roots, positive (co)roots, invariant degrees and torus volume.

    For ``A`` the roots live in the hyperplane ``sum x_i = 0`` of ``R^n``; for
    ``B``, ``C``, ``D`` they live in ``R^n``.

    Raises
    ------
    InvalidSpecError
        If ``n`` is below the series' validity range.
    """
    s = check_rank(series, n)
    n = int(n)
    e = [_unit(n, i) for i in range(n)]
    chain = [e[i] - e[i + 1] for i in range(n - 1)]
    pairs = list(combinations(range(n), 2))

    if s is SeriesTag.A:
        simple = chain
        positive = [e[i] - e[j] for i, j in pairs]
        degrees = [i + 1 for i in range(1, n)]
    else:
        long_roots = [e[i] - e[j] for i, j in pairs] + [e[i] + e[j] for i, j in pairs]
        if s is SeriesTag.B:
            simple = chain + [e[n - 1]]
            positive = long_roots + [e[i] for i in range(n)]
            degrees = [2 * i for i in range(1, n + 1)]
        elif s is SeriesTag.C:
            simple = chain + [2.0 * e[n - 1]]
            positive = long_roots + [2.0 * e[i] for i in range(n)]
            degrees = [2 * i for i in range(1, n + 1)]
        else:
            simple = chain + [e[n - 2] + e[n - 1]]
            positive = long_roots
            degrees = [2 * i for i in range(1, n)] + [n]

    return RootSystem(
        series=s,
        n=n,
        rank=len(simple),
        ambient_dim=n,
        simple_roots=simple,
        simple_coroots=[_coroot(a) for a in simple],
        positive_roots=positive,
        positive_coroots=[_coroot(a) for a in positive],
        invariant_degrees=degrees,
    )


@dataclass(frozen=True)
class LogVolume:
    log_value: float

    @property
    def value(self) -> float:
        """May overflow to ``inf`` for large groups; prefer ``log_value``."""
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf


def log_odd_sphere_volume(d: int) -> float:
    """``log V(S^{2d-1}) = log(2 pi^d / (d-1)!)``."""
    return math.log(2.0) + d * math.log(math.pi) - float(gammaln(d))


def macdonald_log_volume(rs: RootSystem, center_order: int = 1) -> LogVolume:
    """Log of ``V(T) * prod V(S^{2d_i-1}) * prod (c|c) / |Gamma|``.

    The last product runs over the positive coroots.
    """
    if center_order < 1:
        raise InvalidSpecError("center_order must be >= 1")
    terms = [-math.log(center_order), math.log(rs.torus_volume)]
    terms += [log_odd_sphere_volume(d) for d in rs.invariant_degrees]
    terms += [math.log(float(c @ c)) for c in rs.positive_coroots]
    return LogVolume(math.fsum(terms))


def _log_odd_factorials(n: int) -> float:
    # sum_{i=1}^n log (2i-1)!
    return float(np.sum(gammaln(2.0 * np.arange(1, n + 1))))


def _closed_form(series: SeriesTag, n: int) -> float:
    # no range check: the ratio diagnostics evaluate one step below the range
    if series is SeriesTag.A:
        log_fact = float(np.sum(gammaln(np.arange(2, n + 1))))  # prod_{i<n} i!
        return 0.5 * math.log(n) + (n * (n + 1) / 2 - 1) * LOG_2PI - log_fact
    if series is SeriesTag.B:
        return ((n * (n + 2) + 1) * math.log(2.0) + n * (n + 1) * math.log(math.pi)
                - _log_odd_factorials(n))
    if series is SeriesTag.C:
        return n * n * math.log(2.0) + n * (n + 1) * math.log(math.pi) - _log_odd_factorials(n)
    return ((n * n + 1) * math.log(2.0) + n * n * math.log(math.pi)
            - float(gammaln(n)) - _log_odd_factorials(n - 1))


def closed_form_log_volume(spec: GroupSpec) -> LogVolume:
    """Log volume from the per-series closed forms, divided by ``|Gamma|``."""
    if not isinstance(spec, GroupSpec):
        raise InvalidSpecError(f"expected GroupSpec, got {type(spec).__name__}")
    return LogVolume(_closed_form(spec.series, spec.n) - math.log(spec.center_order))


def _ratio_pair(series: SeriesTag, n: int) -> tuple[int, int]:
    """(smaller, larger) series parameters compared by the ratio at ``n``."""
    return (n, n + 1) if series is SeriesTag.A else (n - 1, n)


def _dim(series: SeriesTag, n: int) -> int:
    return {SeriesTag.A: n * n - 1, SeriesTag.B: n * (2 * n + 1),
            SeriesTag.C: n * (2 * n + 1), SeriesTag.D: n * (2 * n - 1)}[series]


def log_volume_ratio(series, n: int) -> tuple[float, int]:
    """Log of the volume ratio between consecutive groups and their dimension gap.

    ``A``: ``V(SU(n+1)) / V(SU(n))`` with gap ``2n+1``.
    ``B``/``C``: ``V(G_n) / V(G_{n-1})`` with gap ``4n-1``.
    ``D``: ``V(Spin(2n)) / V(Spin(2n-2))`` with gap ``4n-3``.
    """
    s = check_rank(series, n)
    lo, hi = _ratio_pair(s, int(n))
    return _closed_form(s, hi) - _closed_form(s, lo), _dim(s, hi) - _dim(s, lo)


def normalized_volume_ratio(series, n: int) -> float:
    """Volume ratio raised to one over the dimension gap."""
    log_ratio, gap = log_volume_ratio(series, n)
    return math.exp(log_ratio / gap)


def ratio_asymptote(series, n: int) -> float:
    """Large-``n`` equivalent of :func:`normalized_volume_ratio`.

    ``sqrt(2 pi e / n)`` for ``A`` and ``sqrt(2 pi e / (2n))`` for ``B, C, D``
    (the defining representation has size ~``2n`` there).
    """
    s = check_rank(series, n)
    size = n if s is SeriesTag.A else 2 * n
    return math.sqrt(2.0 * math.pi * math.e / size)


VOLUME_COLUMNS = ("series", "n", "log_volume", "ratio", "normalized_ratio", "asymptote")


def volume_table(series, n_values) -> list[dict]:
    """Rows ``series,n,log_volume,ratio,normalized_ratio,asymptote``."""
    s = _as_series(series)
    rows = []
    for n in n_values:
        spec = GroupSpec(s, n)
        log_ratio, _ = log_volume_ratio(s, n)
        try:
            ratio = math.exp(log_ratio)
        except OverflowError:
            ratio = math.inf
        rows.append({
            "series": s.value,
            "n": int(n),
            "log_volume": closed_form_log_volume(spec).log_value,
            "ratio": ratio,
            "normalized_ratio": normalized_volume_ratio(s, n),
            "asymptote": ratio_asymptote(s, n),
        })
    return rows


def coroot_length_counts(rs: RootSystem) -> dict[int, int]:
    """Histogram of rounded squared coroot lengths."""
    counts: dict[int, int] = {}
    for c in rs.positive_coroots:
        key = int(round(float(c @ c)))
        counts[key] = counts.get(key, 0) + 1
    return counts
