"""Equidistribution diagnostics: discrepancies, truncations, rate formulas.

Observables are trigonometric data over plain exponentials,
a(x) = sum_zeta a_hat(zeta) e^{i<zeta,x>}, so the mean of a is a_hat(0) and
the matrix element <a psi, psi> equals sum_zeta a_hat(zeta) * P(-zeta) with
P the pair-correlation sum below.  The discrepancy of an eigenfunction
against a is |<a psi, psi> - a_hat(0)|, compared to the envelope
||V|| * lambda^(-(1-3theta)/2 + eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real
from typing import Mapping, Sequence

import numpy as np

from .lattice import SQUARE, AspectRatio, DualVector, QValue, enumerate_up_to
from .solver import BasisSet, EigenPair, TruncatedPair

__all__ = [
    "Observable",
    "RateParams",
    "DiscrepancyRecord",
    "DecayFit",
    "DecayFitError",
    "ChainCheck",
    "monomial_pair",
    "synthetic_smooth",
    "pair_correlation",
    "matrix_element",
    "discrepancy",
    "truncate_observable",
    "theoretical_rate",
    "equi_condition",
    "localization_bound",
    "decay_fit",
    "monomial_chain_check",
    "annulus_min_gap",
]


@dataclass(frozen=True)
class Observable:
    """Finitely supported observable coefficients over plain exponentials."""

    coeffs: Mapping[DualVector, complex]
    obs_id: str = ""
    smoothness: float | None = None  # decay order of synthetic smooth data

    def coeff(self, zeta) -> complex:
        return self.coeffs.get(DualVector(zeta[0], zeta[1]), 0.0)

    @property
    def mean(self) -> complex:
        return self.coeff((0, 0))

    @property
    def zero_mean(self) -> bool:
        return self.mean == 0

    @property
    def l1_norm(self) -> float:
        return float(sum(abs(v) for v in self.coeffs.values()))

    @property
    def sup_bound(self) -> float:
        """l1 norm of the coefficients, an upper bound for ||a||_inf."""
        return self.l1_norm

    def is_real(self) -> bool:
        return all(self.coeffs.get(-z, 0.0) == v.conjugate()
                   for z, v in self.coeffs.items())

    def support(self) -> list[DualVector]:
        return sorted(self.coeffs.keys())


def monomial_pair(zeta, obs_id: str | None = None) -> Observable:
    """Real observable e_zeta + e_{-zeta} = 2 cos<zeta, x>."""
    z = DualVector(int(zeta[0]), int(zeta[1]))
    if z == (0, 0):
        raise ValueError("zero-frequency monomial is a constant; use a direct map")
    return Observable(coeffs={z: 1.0 + 0j, -z: 1.0 + 0j},
                      obs_id=obs_id or f"cos({z.m},{z.n})")


def synthetic_smooth(k_order: float, radius: float,
                     aspect: AspectRatio = SQUARE,
                     obs_id: str | None = None) -> Observable:
    """Zero-mean real observable with power-law coefficients |zeta|^(-K).

    Supported on 0 < |zeta| <= radius; models a smooth function whose
    coefficient tail decays at the prescribed order.
    """
    if k_order <= 2:
        raise ValueError(f"decay order must exceed 2, got {k_order}")
    cmap: dict[DualVector, complex] = {}
    for z in enumerate_up_to(radius * radius, aspect):
        if z == (0, 0):
            continue
        qv = aspect.q_num(z.m, z.n) / aspect.den
        cmap[z] = qv ** (-k_order / 2.0) + 0j
    if not cmap:
        raise ValueError(f"no lattice vectors with |zeta| <= {radius}")
    return Observable(coeffs=cmap, obs_id=obs_id or f"smooth(K={k_order},R={radius})",
                      smoothness=k_order)


# The basis content is a pure function of (aspect, cutoff), so cached shift
# tables can be keyed by those instead of hashing the vector tuple itself.
_INDEX_CACHE: dict[tuple, dict[DualVector, int]] = {}
_SHIFT_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _basis_key(basis: BasisSet) -> tuple:
    return (basis.aspect, basis.cutoff, len(basis.vectors))


def _index_map(basis: BasisSet) -> dict[DualVector, int]:
    key = _basis_key(basis)
    hit = _INDEX_CACHE.get(key)
    if hit is None:
        hit = basis.index_map()
        if len(_INDEX_CACHE) > 64:
            _INDEX_CACHE.clear()
        _INDEX_CACHE[key] = hit
    return hit


def _shift_indices(basis: BasisSet, zeta: DualVector) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j) with vectors[j] = vectors[i] - zeta."""
    key = _basis_key(basis) + (zeta,)
    hit = _SHIFT_CACHE.get(key)
    if hit is None:
        idx = _index_map(basis)
        src = []
        dst = []
        for i, v in enumerate(basis.vectors):
            j = idx.get(v - zeta)
            if j is not None:
                src.append(i)
                dst.append(j)
        hit = (np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp))
        if len(_SHIFT_CACHE) > 100_000:
            _SHIFT_CACHE.clear()
        _SHIFT_CACHE[key] = hit
    return hit


def pair_correlation(pair: EigenPair | TruncatedPair, zeta) -> complex:
    """Shifted coefficient pairing sum_xi psi_hat(xi) * conj(psi_hat(xi - zeta)).

    The sum runs over the pair's support: the whole basis for a full
    eigenpair, the annulus part (both factors) for a truncated one.
    Coefficients outside the basis are zero; zeta = 0 returns the support
    mass (1 for a full unit-norm pair).
    """
    z = DualVector(int(zeta[0]), int(zeta[1]))
    src, dst = _shift_indices(pair.basis, z)
    psi = pair.psi_hat
    return complex(np.sum(psi[src] * np.conj(psi[dst])))


def matrix_element(a: Observable, pair: EigenPair | TruncatedPair) -> complex:
    """<a psi, psi> = integral of a |psi|^2 over the torus.

    Computed coefficient-side as sum_zeta a_hat(zeta) * P(-zeta); agrees
    with physical-space quadrature and is real for real observables.
    """
    total = 0.0 + 0.0j
    for z, av in a.coeffs.items():
        total += av * pair_correlation(pair, -z)
    return total


@dataclass(frozen=True)
class RateParams:
    """Counting-error exponent theta and envelope slack epsilon.

    Arithmetic preserves the input number types, so exact rationals give
    exact rates.  theta = 1/4 is the conjectural ("optimal") choice; the
    default is the best proven exponent.
    """

    theta: Real = 517 / 1648
    epsilon: Real = 0.01

    def validate(self) -> None:
        if not (0 < self.theta < 1 / 3 + 1e-12):
            raise ValueError(f"theta={self.theta} outside (0, 1/3]")
        if self.epsilon < 0:
            raise ValueError(f"epsilon={self.epsilon} must be nonnegative")


def theoretical_rate(params: RateParams):
    """Envelope decay rate (1 - 3*theta)/2 - epsilon, in the input arithmetic."""
    return (1 - 3 * params.theta) / 2 - params.epsilon


@dataclass(frozen=True)
class DiscrepancyRecord:
    lam: float
    n_k: QValue | None
    in_sigma: bool
    obs_id: str
    discrepancy: float
    envelope: float
    tail_mass: float = math.nan


def discrepancy(a: Observable, pair: EigenPair | TruncatedPair,
                rate: RateParams, v_norm: float,
                tail_mass: float = math.nan) -> DiscrepancyRecord:
    """Equidistribution defect |<a psi, psi> - mean(a)| with its envelope.

    Requires a real observable (the defect of a complex one is not a
    signed physical quantity).  The envelope is ||V|| * lambda^(-rate).
    """
    if not a.is_real():
        raise ValueError(f"observable {a.obs_id!r} is not real-valued")
    me = matrix_element(a, pair)
    d = abs(me - a.mean)
    r = float(theoretical_rate(rate))
    getter = getattr(pair, "parent", pair)
    lam = getter.lam
    envelope = v_norm * lam ** (-r) if lam > 0 else math.inf
    return DiscrepancyRecord(lam=lam, n_k=getter.n_lo, in_sigma=getter.in_sigma,
                             obs_id=a.obs_id, discrepancy=float(d),
                             envelope=float(envelope), tail_mass=tail_mass)


def truncate_observable(a: Observable, cutoff: float,
                        aspect: AspectRatio = SQUARE) -> tuple[Observable, float]:
    """Restrict coefficients to |zeta| <= cutoff; returns the dropped l1 mass.

    The boundary |zeta|^2 <= cutoff^2 is an integer-numerator-vs-double
    comparison with ties kept, as everywhere else.
    """
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    thr = cutoff * cutoff * aspect.den
    kept: dict[DualVector, complex] = {}
    tail = 0.0
    for z, v in a.coeffs.items():
        if aspect.q_num(z.m, z.n) <= thr:
            kept[z] = v
        else:
            tail += abs(v)
    return (Observable(coeffs=kept, obs_id=f"{a.obs_id}|trunc{cutoff:g}",
                       smoothness=a.smoothness), tail)


@dataclass(frozen=True)
class EquiCondition:
    lhs: float
    rhs: float
    satisfied: bool


def equi_condition(rho: float, alpha: float, v_norm: float, big_l: float,
                   energy: float, params: RateParams) -> EquiCondition:
    """Strong-disorder smallness test rho*|alpha|*||V||*L^(2+3theta+eps) < E^rate."""
    for name, val in (("rho", rho), ("v_norm", v_norm), ("big_l", big_l),
                      ("energy", energy)):
        if val <= 0 and not (name == "v_norm" and alpha == 0):
            raise ValueError(f"{name} must be positive, got {val}")
    lhs = rho * abs(alpha) * v_norm * float(big_l) ** float(2 + 3 * params.theta + params.epsilon)
    rhs = float(energy) ** float(theoretical_rate(params))
    return EquiCondition(lhs=lhs, rhs=rhs, satisfied=lhs < rhs)


def localization_bound(alpha: float, energy: float, rho: float, v_norm: float,
                       params: RateParams) -> float:
    """Length-scale lower bound (E^rate / (rho |alpha| ||V||))^(1/(2+3theta+eps)).

    Pure formula evaluation, no hidden constant; undefined at alpha = 0.
    """
    if alpha == 0:
        raise ValueError("localization bound undefined at zero coupling")
    if min(energy, rho, v_norm) <= 0:
        raise ValueError("energy, rho and v_norm must be positive")
    rate = float(theoretical_rate(params))
    expo = 1.0 / float(2 + 3 * params.theta + params.epsilon)
    return (energy ** rate / (rho * abs(alpha) * v_norm)) ** expo


class DecayFitError(ValueError):
    """Raised when the discrepancy data cannot support a decay fit."""


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    fitted_c: float  # max discrepancy / envelope over the fitted records
    n_used: int


def decay_fit(records: Sequence[DiscrepancyRecord],
              floor: float = 1e-12) -> DecayFit:
    """Least-squares slope of log D against log lambda over good-bracket records.

    Requires at least 8 distinct eigenvalues, all flagged in the good
    region; records at or below the floor are excluded from the fit.
    """
    if any(not r.in_sigma for r in records):
        raise DecayFitError("decay fit requires records in the good region only")
    lams = {r.lam for r in records}
    if len(lams) < 8:
        raise DecayFitError(f"decay fit needs >= 8 distinct eigenvalues, got {len(lams)}")
    used = [r for r in records if r.discrepancy > floor]
    if not used:
        raise DecayFitError("all discrepancies at the zero floor; slope undefined")
    x = np.log([r.lam for r in used])
    y = np.log([r.discrepancy for r in used])
    slope, intercept = np.polyfit(x, y, 1)
    fitted_c = max(r.discrepancy / r.envelope for r in used)
    return DecayFit(slope=float(slope), intercept=float(intercept),
                    fitted_c=float(fitted_c), n_used=len(used))


# ---------------------------------------------------------------------------
# finite-size inequality chain for one monomial


def annulus_min_gap(trunc: TruncatedPair, zetas: Sequence[DualVector]) -> float:
    """min over annulus members xi and the given zetas of ||xi - zeta|^2 - lambda|."""
    aspect = trunc.basis.aspect
    den = aspect.den
    lam = trunc.parent.lam
    vecs = trunc.basis.vectors
    inside = trunc.inside
    ms = np.array([v.m for v in vecs], dtype=np.int64)[inside]
    ns = np.array([v.n for v in vecs], dtype=np.int64)[inside]
    if ms.size == 0:
        return math.inf
    qq = aspect.q * aspect.q
    pp = aspect.p * aspect.p
    best = math.inf
    for z in zetas:
        qn = qq * (ms - z[0]) ** 2 + pp * (ns - z[1]) ** 2
        best = min(best, float(np.min(np.abs(qn / den - lam))))
    return best


@dataclass(frozen=True)
class ChainCheck:
    zeta: DualVector
    lhs: float  # measured discrepancy of the monomial
    rhs: float  # v_norm / min_gap * sqrt(#A) + 2 ||tail|| + ||tail||^2
    min_gap: float
    annulus_count: int
    tail_norm: float
    ok: bool


def monomial_chain_check(pair: EigenPair, trunc: TruncatedPair, zeta,
                         v_norm: float) -> ChainCheck:
    """Assemble the finite-size bound for one zero-mean monomial.

    lhs is the full-pair discrepancy |<e_zeta psi, psi>|; rhs combines the
    shifted-annulus coefficient bound (with the measured minimal shifted
    gap and the annulus cardinality) and the truncation remainder
    2||psi_tail|| + ||psi_tail||^2; every quantity is computed, none
    asymptotic.
    """
    z = DualVector(int(zeta[0]), int(zeta[1]))
    if z == (0, 0):
        raise ValueError("chain check applies to zero-mean monomials only")
    lhs = abs(pair_correlation(pair, z))
    gap = annulus_min_gap(trunc, [z])
    count = int(np.count_nonzero(trunc.inside))
    tail = trunc.tail_norm
    if gap == 0:
        rhs = math.inf
    else:
        rhs = v_norm / gap * math.sqrt(count) + 2.0 * tail + tail * tail
    return ChainCheck(zeta=z, lhs=float(lhs), rhs=float(rhs), min_gap=float(gap),
                      annulus_count=count, tail_norm=float(tail), ok=lhs <= rhs)
