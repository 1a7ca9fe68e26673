"""Construction of the full-density set of well-spaced spectral annuli.

A Laplace value n is *good* when every lattice vector in the thin annulus
A(n, n^delta) stays at squared-norm distance >= c*n^delta from n after any
small dual-lattice shift zeta with |zeta| <= n^epsilon.  Goodness is decided
two independent ways:

  * scan-based: mark every value whose annulus meets the near-orthogonal
    ("bad") vector set of some admissible zeta, and complement (q1);
  * direct: certify each annulus by exhausting all (xi, zeta) pairs and
    measuring the worst shifted margin (certify_good_annulus).

The two are cross-checked, never silently reconciled.  A separate gap
filter (q2) keeps only values whose successor is close; the final good set
is the intersection.

Boundary rule used throughout: integer numerators are compared against
double-precision thresholds (value^exponent * den) with ties rounded
toward membership; integer-vs-float comparisons are exact in both the
scalar and the vectorized paths, so the two always agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattice import (
    SQUARE,
    AspectRatio,
    DualVector,
    QValue,
    Spectrum,
    enumerate_up_to,
    qnum_grid,
)

__all__ = [
    "GoodSetParams",
    "GoodSetParamError",
    "BadVectorCount",
    "CertificateResult",
    "GoodValueRow",
    "GoodSetReport",
    "log_squared_gap",
    "is_bad_vector",
    "bad_vector_count",
    "bad_values",
    "q1",
    "q2",
    "certify_good_annulus",
    "qprime",
    "sigma_good_nums",
]


def log_squared_gap(n: float) -> float:
    """Default gap threshold (log(2+n))^2, a slowly growing surrogate."""
    return math.log(2.0 + n) ** 2


class GoodSetParamError(ValueError):
    """Raised when parameters violate the good-set hypotheses."""


@dataclass(frozen=True)
class GoodSetParams:
    """Exponents and margins steering the good-set construction.

    delta sizes the annulus window n^delta, epsilon the shift range
    n^epsilon, margin is the certificate constant c, theta the lattice
    counting-error exponent used in bound curves.  Construction does not
    validate (single operations are well-defined for any exponents);
    call validate() at run boundaries to enforce the density hypotheses.
    """

    delta: float = 0.17
    epsilon: float = 0.01
    margin: float = 0.5
    theta: float = 517 / 1648
    gap_fn: Callable[[float], float] = log_squared_gap

    def validate(self) -> None:
        if not (0.25 <= self.theta < 1 / 3):
            raise GoodSetParamError(
                f"theta={self.theta} outside [1/4, 1/3); the counting-error "
                "exponent must lie in the proven-to-conjectural window"
            )
        if not (self.theta / 2 < self.delta < 0.5 - self.theta):
            raise GoodSetParamError(
                f"delta={self.delta} violates the annulus-spacing hypothesis "
                f"theta/2 < delta < 1/2 - theta = "
                f"({self.theta / 2:.6g}, {0.5 - self.theta:.6g})"
            )
        if not (0 < self.epsilon < 0.5 - self.theta - self.delta):
            raise GoodSetParamError(
                f"epsilon={self.epsilon} violates the shift-range hypothesis "
                f"0 < epsilon < 1/2 - theta - delta = "
                f"{0.5 - self.theta - self.delta:.6g}"
            )
        if not (0 < self.margin <= 2):
            raise GoodSetParamError(
                f"margin c={self.margin} must lie in (0, 2]"
            )

    @property
    def complement_exponent(self) -> float:
        """Growth exponent 1/2 + delta + theta + epsilon of the bad-value count."""
        return 0.5 + self.delta + self.theta + self.epsilon


def is_bad_vector(xi: DualVector, zeta: DualVector, delta: float,
                  aspect: AspectRatio = SQUARE) -> bool:
    """True when |<xi, zeta>| <= |xi|^(2*delta).

    The inner product is an exact integer over the fixed denominator; the
    right side is evaluated in double precision and ties count as bad.
    The origin is vacuously bad (0 <= 0).
    """
    qn = aspect.q_num(xi[0], xi[1])
    in_num = abs(aspect.q * aspect.q * xi[0] * zeta[0]
                 + aspect.p * aspect.p * xi[1] * zeta[1])
    return in_num <= (qn / aspect.den) ** delta * aspect.den


class _NormScan:
    """Norm-sorted integer grid up to a cutoff, for fast annulus slicing."""

    def __init__(self, t, aspect: AspectRatio):
        ms, ns, nums = qnum_grid(t, aspect)
        order = np.lexsort((ns, ms, nums))
        self.ms = ms[order]
        self.ns = ns[order]
        self.nums = nums[order]
        self.aspect = aspect
        self.cutoff = float(t)

    def window(self, lo: float, hi: float) -> slice:
        """Indices of vectors with lo <= num <= hi (float bounds, ties in)."""
        i = int(np.searchsorted(self.nums, lo, side="left"))
        j = int(np.searchsorted(self.nums, hi, side="right"))
        return slice(i, j)

    def distinct_nums(self, max_num: int) -> np.ndarray:
        vals = np.unique(self.nums)
        return vals[vals <= max_num]


def _inner_nums(ms: np.ndarray, ns: np.ndarray, zeta: DualVector,
                aspect: AspectRatio) -> np.ndarray:
    return (aspect.q * aspect.q * zeta[0]) * ms + (aspect.p * aspect.p * zeta[1]) * ns


def _bad_mask(ms: np.ndarray, ns: np.ndarray, nums: np.ndarray,
              zeta: DualVector, delta: float, aspect: AspectRatio) -> np.ndarray:
    rhs = (nums / aspect.den) ** delta * aspect.den
    return np.abs(_inner_nums(ms, ns, zeta, aspect)) <= rhs


@dataclass(frozen=True)
class BadVectorCount:
    zeta: DualVector
    cutoff: float
    delta: float
    count: int
    ratio: float  # count * |zeta| / cutoff^(1/2 + delta)


def bad_vector_count(zeta: DualVector, x, delta: float,
                     aspect: AspectRatio = SQUARE) -> BadVectorCount:
    """Count lattice vectors with squared norm <= x that are bad for zeta.

    Also reports count * |zeta| / x^(1/2+delta), the normalized size whose
    boundedness across cutoffs is the quantitative smallness statement.
    """
    if x < 1:
        raise ValueError(f"cutoff must be >= 1, got {x}")
    if zeta == (0, 0):
        raise ValueError("zeta must be nonzero")
    ms, ns, nums = qnum_grid(x, aspect)
    count = int(np.count_nonzero(_bad_mask(ms, ns, nums, zeta, delta, aspect)))
    znorm = math.sqrt(aspect.q_num(zeta[0], zeta[1]) / aspect.den)
    ratio = count * znorm / float(x) ** (0.5 + delta)
    return BadVectorCount(zeta=DualVector(*zeta), cutoff=float(x), delta=delta,
                          count=count, ratio=ratio)


def _bad_value_mask(spec_nums: np.ndarray, scan: _NormScan, zeta: DualVector,
                    x: float, delta: float, aspect: AspectRatio) -> np.ndarray:
    """Mark spectrum values n <= x with |n - |eta|^2| <= n^delta for a bad eta.

    Scans bad vectors out to x + 2*x^delta; a vector beyond that window
    cannot reach any n <= x since n^delta <= x^delta.
    """
    den = aspect.den
    bad = _bad_mask(scan.ms, scan.ns, scan.nums, zeta, delta, aspect)
    bad_nums = np.unique(scan.nums[bad])
    marked = np.zeros(spec_nums.size, dtype=bool)
    w = float(x) ** delta * den  # widest possible half-window in numerator units
    radii = (spec_nums / den) ** delta * den
    for bm in bad_nums.tolist():
        i = int(np.searchsorted(spec_nums, bm - w, side="left"))
        j = int(np.searchsorted(spec_nums, bm + w, side="right"))
        if i >= j:
            continue
        sub = spec_nums[i:j]
        marked[i:j] |= np.abs(sub - bm) <= radii[i:j]
    return marked


def _scan_cutoff(x: float, delta: float) -> float:
    return float(x) + 2.0 * float(x) ** delta + 1.0


def bad_values(zeta: DualVector, x, params: GoodSetParams,
               aspect: AspectRatio = SQUARE) -> set[QValue]:
    """Laplace values n <= x whose annulus A(n, n^delta) meets the bad set of zeta."""
    if x < 1:
        raise ValueError(f"cutoff must be >= 1, got {x}")
    scan = _NormScan(_scan_cutoff(float(x), params.delta), aspect)
    spec_nums = scan.distinct_nums(int(math.floor(float(x) * aspect.den)))
    mask = _bad_value_mask(spec_nums, scan, zeta, float(x), params.delta, aspect)
    den = aspect.den
    return {QValue(int(n), den) for n in spec_nums[mask]}


def _canonical_zetas(max_q_num: float, aspect: AspectRatio) -> list[DualVector]:
    """Nonzero representatives (|m|, |n|) with q_num <= max_q_num (float, ties in).

    Sign flips of either coordinate leave both the bad-vector norms and the
    marked values unchanged, so one quadrant representative suffices.
    """
    out = []
    m = 0
    qq = aspect.q * aspect.q
    pp = aspect.p * aspect.p
    while qq * m * m <= max_q_num:
        n = 0
        while qq * m * m + pp * n * n <= max_q_num:
            if (m, n) != (0, 0):
                out.append(DualVector(m, n))
            n += 1
        m += 1
    out.sort(key=lambda v: (aspect.q_num(v[0], v[1]), v[0], v[1]))
    return out


def _zeta_threshold(n_val: float, epsilon: float, den: int) -> float:
    """Numerator threshold for the shift range |zeta| <= n^epsilon."""
    return n_val ** (2.0 * epsilon) * den


def q1(x, params: GoodSetParams, aspect: AspectRatio = SQUARE) -> set[QValue]:
    """Values n <= x avoiding every bad-value set B_zeta with |zeta| <= n^epsilon.

    Each n uses its own shift threshold n^epsilon; values too small to admit
    any nonzero zeta are vacuously included.
    """
    spec_nums, in_q1 = _q1_mask(float(x), params, aspect)
    den = aspect.den
    return {QValue(int(n), den) for n in spec_nums[in_q1]}


def _q1_mask(x: float, params: GoodSetParams,
             aspect: AspectRatio = SQUARE) -> tuple[np.ndarray, np.ndarray]:
    if x < 1:
        raise ValueError(f"cutoff must be >= 1, got {x}")
    den = aspect.den
    scan = _NormScan(_scan_cutoff(x, params.delta), aspect)
    spec_nums = scan.distinct_nums(int(math.floor(x * den)))
    complement = np.zeros(spec_nums.size, dtype=bool)
    zeta_cap = _zeta_threshold(x, params.epsilon, den)
    for zeta in _canonical_zetas(zeta_cap, aspect):
        zq = aspect.q_num(zeta[0], zeta[1])
        applicable = zq <= _zeta_threshold(spec_nums / den, params.epsilon, den)
        if not applicable.any():
            continue
        marked = _bad_value_mask(spec_nums, scan, zeta, x, params.delta, aspect)
        complement |= marked & applicable
    return spec_nums, ~complement


@dataclass(frozen=True)
class Q2Result:
    members: set[QValue]
    boundary: QValue  # last value below the cutoff, excluded: successor unknown


def q2(x, gap_fn: Callable[[float], float] = log_squared_gap,
       aspect: AspectRatio = SQUARE) -> Q2Result:
    """Values whose gap to the next distinct value is at most gap_fn(n)."""
    if x < 1:
        raise ValueError(f"cutoff must be >= 1, got {x}")
    den = aspect.den
    _, _, nums = qnum_grid(x, aspect)
    spec_nums = np.unique(nums)
    members = set()
    for k in range(spec_nums.size - 1):
        cur = int(spec_nums[k])
        gap_num = int(spec_nums[k + 1]) - cur
        if gap_num <= gap_fn(cur / den) * den:
            members.add(QValue(cur, den))
    return Q2Result(members=members, boundary=QValue(int(spec_nums[-1]), den))


@dataclass(frozen=True)
class CertificateResult:
    n: QValue
    passed: bool
    margin: float
    witness: tuple[DualVector, DualVector] | None


def certify_good_annulus(n: QValue, params: GoodSetParams,
                         aspect: AspectRatio = SQUARE,
                         scan: _NormScan | None = None) -> CertificateResult:
    """Exhaustively check the shifted-annulus spacing for one value.

    Passes when every xi in A(n, n^delta) and every nonzero zeta with
    |zeta| <= n^epsilon satisfy ||xi+zeta|^2 - n| >= c * n^delta.  The
    reported margin is the minimum of ||xi+zeta|^2 - n| / n^delta over all
    pairs (+inf when no admissible pair exists); the witness is the pair
    attaining it, the last one in (xi, zeta) canonical order on ties.
    """
    den = aspect.den
    n_val = n.num / den
    if n_val < 1:
        raise ValueError(f"certificate requires n >= 1, got {n_val}")
    if scan is None:
        scan = _NormScan(n_val + n_val ** params.delta + 1.0, aspect)
    w = n_val ** params.delta * den
    sl = scan.window(n.num - w, n.num + w)
    xis = list(zip(scan.ms[sl].tolist(), scan.ns[sl].tolist()))
    zetas = [z for z in enumerate_up_to((n_val ** (2 * params.epsilon)) + 1.0, aspect)
             if z != (0, 0)
             and aspect.q_num(z[0], z[1]) <= _zeta_threshold(n_val, params.epsilon, den)]
    qq = aspect.q * aspect.q
    pp = aspect.p * aspect.p
    best = math.inf
    witness = None
    scale = 1.0 / (n_val ** params.delta * den)
    for xm, xn in xis:
        for zm, zn in zetas:
            sm = xm + zm
            sn = xn + zn
            margin = abs(qq * sm * sm + pp * sn * sn - n.num) * scale
            if margin <= best:
                best = margin
                witness = (DualVector(xm, xn), DualVector(zm, zn))
    passed = best >= params.margin
    return CertificateResult(n=n, passed=passed, margin=best,
                             witness=None if passed else witness)


@dataclass(frozen=True)
class GoodValueRow:
    value: QValue
    in_q1: bool
    in_q2: bool | None  # None when the successor is unknown (boundary)
    in_qprime: bool
    cert_pass: bool | None  # None below the certificate domain n >= 1
    cert_margin: float
    witness: tuple[DualVector, DualVector] | None


@dataclass(frozen=True)
class GoodSetReport:
    aspect: AspectRatio
    params: GoodSetParams
    cutoff: float
    rows: tuple[GoodValueRow, ...]
    q1_complement_count: int
    qprime_count: int
    qprime_density: float
    q1_not_certified: tuple[int, ...]
    certified_not_q1: tuple[int, ...]
    boundary_num: int

    @property
    def complement_bound_exponent(self) -> float:
        return self.params.complement_exponent


def qprime(x, params: GoodSetParams, aspect: AspectRatio = SQUARE) -> GoodSetReport:
    """Full good-set report up to x: flags, certificates, and cross-checks.

    The good set is q1 AND q2.  Each value additionally gets the direct
    certificate at the configured margin; disagreements between the
    scan-based q1 flag and the certificate are listed, not reconciled.
    """
    x = float(x)
    den = aspect.den
    spec_nums, in_q1 = _q1_mask(x, params, aspect)
    scan = _NormScan(_scan_cutoff(x, params.delta), aspect)
    gap_fn = params.gap_fn
    rows = []
    q1_not_cert = []
    cert_not_q1 = []
    n_count = spec_nums.size
    qprime_count = 0
    for k in range(n_count):
        num = int(spec_nums[k])
        val = num / den
        if k + 1 < n_count:
            gap_num = int(spec_nums[k + 1]) - num
            in_q2 = gap_num <= gap_fn(val) * den
        else:
            in_q2 = None
        if val >= 1:
            cert = certify_good_annulus(QValue(num, den), params, aspect, scan=scan)
            cert_pass, cert_margin, witness = cert.passed, cert.margin, cert.witness
        else:
            cert_pass, cert_margin, witness = None, math.inf, None
        inq1 = bool(in_q1[k])
        in_qp = inq1 and bool(in_q2)
        if in_qp:
            qprime_count += 1
        if inq1 and cert_pass is False:
            q1_not_cert.append(num)
        if cert_pass and not inq1:
            cert_not_q1.append(num)
        rows.append(GoodValueRow(value=QValue(num, den), in_q1=inq1, in_q2=in_q2,
                                 in_qprime=in_qp, cert_pass=cert_pass,
                                 cert_margin=cert_margin, witness=witness))
    return GoodSetReport(
        aspect=aspect,
        params=params,
        cutoff=x,
        rows=tuple(rows),
        q1_complement_count=int(n_count - int(np.count_nonzero(in_q1))),
        qprime_count=qprime_count,
        qprime_density=qprime_count / n_count,
        q1_not_certified=tuple(q1_not_cert),
        certified_not_q1=tuple(cert_not_q1),
        boundary_num=int(spec_nums[-1]),
    )


def sigma_good_nums(spectrum: Spectrum, params: GoodSetParams) -> set[int]:
    """Numerators of values that are certificate-good with a small gap.

    This is the auditable finite stand-in for the asymptotic good set used
    when flagging solved eigenvalue brackets: the annulus certificate must
    pass and the gap to the next distinct value must be below the gap
    threshold.  The last value (unknown successor) is never included.
    """
    aspect = spectrum.aspect
    den = aspect.den
    nums = spectrum.nums
    if not nums:
        return set()
    top = nums[-1] / den
    scan = _NormScan(top + top ** params.delta + 2.0, aspect)
    good = set()
    for k in range(len(nums) - 1):
        num = nums[k]
        val = num / den
        if val < 1:
            continue
        if (nums[k + 1] - num) > params.gap_fn(val) * den:
            continue
        if certify_good_annulus(QValue(num, den), params, aspect, scan=scan).passed:
            good.add(num)
    return good
