"""Exact arithmetic for the rectangular unimodular lattice and its dual.

The torus is R^2 / 2*pi*L0 with L0 = Z(a,0) + Z(0,1/a) and a^2 = p/q a
reduced positive rational.  Dual-lattice vectors are indexed by integer
pairs (m, n) embedding as xi = (m/a, n*a), so

    |xi|^2 = m^2/a^2 + n^2*a^2 = (q^2*m^2 + p^2*n^2) / (p*q).

All squared norms therefore live on the fixed denominator p*q, and every
comparison (enumeration cutoffs, annulus membership, spectrum grouping)
is done on integer numerators.  No floats enter until a value is exported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

__all__ = [
    "AspectRatio",
    "DualVector",
    "QValue",
    "SpectrumEntry",
    "Spectrum",
    "Annulus",
    "q_form",
    "inner",
    "enumerate_up_to",
    "counting_function",
    "distinct_spectrum",
    "annulus",
    "qnum_grid",
]


class DualVector(NamedTuple):
    """Integer index (m, n) of the dual-lattice vector (m/a, n*a)."""

    m: int
    n: int

    def __neg__(self) -> "DualVector":
        return DualVector(-self.m, -self.n)

    def __add__(self, other) -> "DualVector":  # type: ignore[override]
        return DualVector(self.m + other[0], self.n + other[1])

    def __sub__(self, other) -> "DualVector":
        return DualVector(self.m - other[0], self.n - other[1])


class QValue(NamedTuple):
    """Exact squared norm num/den with den = p*q fixed per aspect ratio."""

    num: int
    den: int

    @property
    def value(self) -> float:
        return self.num / self.den

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)


@dataclass(frozen=True)
class AspectRatio:
    """Aspect parameter a^2 = p/q of the rectangular torus, in lowest terms."""

    p: int = 1
    q: int = 1

    def __post_init__(self) -> None:
        if self.p < 1 or self.q < 1:
            raise ValueError(f"aspect ratio needs positive p, q; got p={self.p}, q={self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"aspect ratio p/q must be coprime; got p={self.p}, q={self.q}")

    @property
    def den(self) -> int:
        return self.p * self.q

    @property
    def a(self) -> float:
        return math.sqrt(self.p / self.q)

    def q_num(self, m: int, n: int) -> int:
        """Numerator of |xi|^2 over the fixed denominator p*q."""
        return self.q * self.q * m * m + self.p * self.p * n * n

    def qvalue(self, num: int) -> QValue:
        return QValue(num, self.den)

    def embed(self, v: DualVector) -> tuple[float, float]:
        """Euclidean coordinates (m/a, n*a) of the dual vector."""
        a = self.a
        return (v.m / a, v.n * a)


SQUARE = AspectRatio(1, 1)


def q_form(v: DualVector, aspect: AspectRatio) -> QValue:
    """Exact squared norm of a dual vector; zero iff v = (0, 0)."""
    return QValue(aspect.q_num(v[0], v[1]), aspect.den)


def inner(v: DualVector, w: DualVector, aspect: AspectRatio) -> Fraction:
    """Exact Euclidean inner product m1*m2/a^2 + n1*n2*a^2."""
    num = aspect.q * aspect.q * v[0] * w[0] + aspect.p * aspect.p * v[1] * w[1]
    return Fraction(num, aspect.den)


def _num_threshold(t, aspect: AspectRatio) -> int:
    """Largest integer numerator with num/den <= t, computed exactly."""
    frac = Fraction(t) * aspect.den
    return frac.numerator // frac.denominator


def _coordinate_bound(thr_num: int, coeff_sq: int) -> int:
    """Largest k >= 0 with coeff_sq * k^2 <= thr_num."""
    if thr_num < 0:
        return -1
    return math.isqrt(thr_num // coeff_sq)


def enumerate_up_to(t, aspect: AspectRatio = SQUARE) -> list[DualVector]:
    """All dual vectors with |xi|^2 <= t, sorted by (|xi|^2, m, n).

    The cutoff comparison is exact: num <= t*p*q is decided in integer
    arithmetic after converting t to a rational, so boundary vectors are
    always included.
    """
    if t < 0:
        raise ValueError(f"cutoff must be nonnegative, got {t}")
    thr = _num_threshold(t, aspect)
    qq = aspect.q * aspect.q
    pp = aspect.p * aspect.p
    m_max = _coordinate_bound(thr, qq)
    out = []
    for m in range(-m_max, m_max + 1):
        rem = thr - qq * m * m
        n_max = _coordinate_bound(rem, pp)
        for n in range(-n_max, n_max + 1):
            out.append(DualVector(m, n))
    out.sort(key=lambda v: (aspect.q_num(v[0], v[1]), v[0], v[1]))
    return out


def counting_function(t, aspect: AspectRatio = SQUARE) -> tuple[int, float]:
    """Number of dual vectors with |xi|^2 <= t and the residual count - pi*t."""
    if t < 0:
        raise ValueError(f"cutoff must be nonnegative, got {t}")
    thr = _num_threshold(t, aspect)
    qq = aspect.q * aspect.q
    pp = aspect.p * aspect.p
    m_max = _coordinate_bound(thr, qq)
    count = 0
    for m in range(0, m_max + 1):
        rem = thr - qq * m * m
        n_max = _coordinate_bound(rem, pp)
        col = 2 * n_max + 1
        count += col if m == 0 else 2 * col
    return count, count - math.pi * float(t)


class SpectrumEntry(NamedTuple):
    value: QValue
    multiplicity: int
    vectors: tuple[DualVector, ...]


@dataclass(frozen=True)
class Spectrum:
    """Ordered distinct Laplace eigenvalues with multiplicities up to a cutoff."""

    aspect: AspectRatio
    cutoff: float
    entries: tuple[SpectrumEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, k: int) -> SpectrumEntry:
        return self.entries[k]

    @property
    def nums(self) -> list[int]:
        return [e.value.num for e in self.entries]

    @property
    def values_float(self) -> np.ndarray:
        den = self.aspect.den
        return np.array([e.value.num for e in self.entries], dtype=np.float64) / den

    def index_of_num(self, num: int) -> int:
        """Index k of the entry with exact numerator num; raises if absent."""
        import bisect

        nums = self.nums
        k = bisect.bisect_left(nums, num)
        if k == len(nums) or nums[k] != num:
            raise KeyError(f"no Laplace value with numerator {num}")
        return k

    def bracket(self, lam: float, atol: float = 1e-10) -> tuple[int, bool]:
        """Locate lam between consecutive distinct values.

        Returns (k, ambiguous): lam in the open interval (n_k, n_{k+1}),
        with k = -1 when lam lies below the bottom of the spectrum.
        ambiguous is True when lam sits within atol of some spectrum value,
        in which case k is the index of that value.  Raises if lam is at or
        above the last covered value (successor unknown).
        """
        vals = self.values_float
        if lam >= vals[-1]:
            raise ValueError(f"lambda={lam} outside spectrum coverage (< {vals[-1]})")
        import bisect

        j = bisect.bisect_right(vals, lam)
        # vals[j-1] <= lam < vals[j]
        if j > 0 and abs(lam - vals[j - 1]) <= atol:
            return j - 1, True
        if j < len(vals) and abs(vals[j] - lam) <= atol:
            return j, True
        return j - 1, False


def distinct_spectrum(t, aspect: AspectRatio = SQUARE) -> Spectrum:
    """Group the enumeration by exact squared-norm equality."""
    vecs = enumerate_up_to(t, aspect)
    entries = []
    group: list[DualVector] = []
    cur = None
    for v in vecs:
        num = aspect.q_num(v[0], v[1])
        if num != cur:
            if group:
                entries.append(SpectrumEntry(aspect.qvalue(cur), len(group), tuple(group)))
            cur = num
            group = []
        group.append(v)
    if group:
        entries.append(SpectrumEntry(aspect.qvalue(cur), len(group), tuple(group)))
    return Spectrum(aspect=aspect, cutoff=float(t), entries=tuple(entries))


@dataclass(frozen=True)
class Annulus:
    """Dual vectors whose squared norm lies within width of the center value."""

    center: QValue
    width: float
    members: tuple[DualVector, ...]

    def __len__(self) -> int:
        return len(self.members)

    def member_nums(self, aspect: AspectRatio) -> list[int]:
        return [aspect.q_num(v[0], v[1]) for v in self.members]


def annulus(n: QValue, width, aspect: AspectRatio = SQUARE) -> Annulus:
    """Members xi with | |xi|^2 - n | <= width, ties rounded toward inclusion."""
    if width <= 0:
        raise ValueError(f"annulus width must be positive, got {width}")
    half = Fraction(width) * aspect.den
    lo = n.num - half  # fractions; membership is |num - n.num| <= half
    hi = n.num + half
    hi_num = hi.numerator // hi.denominator
    members = []
    for v in enumerate_up_to(Fraction(hi_num, aspect.den), aspect):
        num = aspect.q_num(v[0], v[1])
        if num >= lo:
            members.append(v)
    members.sort(key=lambda v: (aspect.q_num(v[0], v[1]), v[0], v[1]))
    return Annulus(center=n, width=float(width), members=tuple(members))


def qnum_grid(t, aspect: AspectRatio = SQUARE) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized enumeration: integer arrays (m, n, num) for all |xi|^2 <= t.

    Same membership rule as enumerate_up_to but returned as unsorted numpy
    int64 arrays; used by the scan-heavy consumers where the pure-Python
    enumeration would dominate the runtime.
    """
    if t < 0:
        raise ValueError(f"cutoff must be nonnegative, got {t}")
    thr = _num_threshold(t, aspect)
    qq = aspect.q * aspect.q
    pp = aspect.p * aspect.p
    m_max = _coordinate_bound(thr, qq)
    n_max = _coordinate_bound(thr, pp)
    ms = np.arange(-m_max, m_max + 1, dtype=np.int64)
    ns = np.arange(-n_max, n_max + 1, dtype=np.int64)
    mg, ng = np.meshgrid(ms, ns, indexing="ij")
    num = qq * mg * mg + pp * ng * ng
    mask = num <= thr
    return mg[mask], ng[mask], num[mask]
