"""Fourier-space potentials: trigonometric data, scatterer sums, disorder models.

Conventions
-----------
Potentials and observables expand over plain exponentials,
V(x) = sum_zeta v(zeta) e^{i<zeta,x>}, so Parseval reads
||V||^2_{L2} = 4*pi^2 * sum |v(zeta)|^2.

Scatterer positions are stored in unit-torus (fractional) coordinates
u in [0,1)^2; the physical point is 2*pi*(a*u1, u2/a).  With that choice
the phase attached to a dual vector (m, n) is exp(-2*pi*i*(m*u1 + n*u2))
independently of the aspect ratio, and ball-counting for the disorder
hypothesis happens in fractional units where the natural scatterer
spacing is 1/sqrt(N).

The single scatterer shape is a separable raised cosine
W(u) = A * prod_i (1 + cos(pi*u_i/r))/2 supported on [-r, r]^2, chosen for
its closed-form transform and closed-form autocorrelation; the support is
contained in the ball of radius r*sqrt(2), which is the radius to use in
any bound stated for ball-supported potentials.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .lattice import SQUARE, AspectRatio, DualVector, enumerate_up_to

__all__ = [
    "BumpProfile",
    "FourierPotential",
    "ScattererConfig",
    "RDMConfig",
    "StrongDisorderPotential",
    "MissingCoefficientError",
    "SymmetryError",
    "trig_potential",
    "bump_fourier",
    "scatterer_potential",
    "strong_disorder_potential",
    "grid_positions",
    "distorted_lattice",
    "rdm_sample",
    "weak_disorder_check",
    "l2_norm_bound_check",
    "pairwise_l2_sq",
    "subseed",
]


class MissingCoefficientError(KeyError):
    """A coefficient outside the declared coverage of a truncated potential."""


class SymmetryError(ValueError):
    """Hermitian symmetry violated on a real-flagged potential."""


def subseed(seed: int, tag: str, index: int) -> np.random.Generator:
    """Independent generator for (seed, purpose, index), order-insensitive."""
    tag_int = int.from_bytes(hashlib.blake2s(tag.encode(), digest_size=8).digest(), "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag_int, int(index)]))


# ---------------------------------------------------------------------------
# bump profile


@dataclass(frozen=True)
class BumpProfile:
    """Separable raised-cosine bump of half-width radius and given amplitude."""

    radius: float = 2.0
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError(f"bump radius must be positive, got {self.radius}")

    @property
    def ball_radius(self) -> float:
        """Radius of the smallest centered ball containing the square support."""
        return self.radius * math.sqrt(2.0)

    @property
    def l2_norm(self) -> float:
        """L2 norm of the unscaled bump: |A| * 3r/4."""
        return abs(self.amplitude) * 0.75 * self.radius

    def transform_1d(self, k: float) -> float:
        """1D transform of the unit-amplitude factor: sin(kr)/k * pi^2/(pi^2 - k^2 r^2).

        Both removable singularities (k = 0 and k*r = +-pi) are evaluated
        through pole-free rewrites; the value at k*r = pi is r/2.
        """
        r = self.radius
        x = abs(k) * r
        pi2 = math.pi * math.pi
        if x < 1.0:
            return r * _sinc(x) * pi2 / (pi2 - x * x)
        # sin(x) = sin(pi - x): removes the pole at x = pi
        return r * pi2 * _sinc(math.pi - x) / (x * (math.pi + x))

    def autocorr_1d(self, v: np.ndarray | float) -> np.ndarray | float:
        """1D autocorrelation of the unit-amplitude factor at separation v.

        Closed form for |v| <= 2r:
        h(v) = ((2r-|v|) * (1 + cos(pi v/r)/2) + (3r/2pi) sin(pi|v|/r)) / 4,
        zero beyond; h(0) = 3r/4.
        """
        r = self.radius
        av = np.abs(v)
        x = np.pi * av / r
        h = 0.25 * ((2.0 * r - av) * (1.0 + 0.5 * np.cos(x)) + (1.5 * r / np.pi) * np.sin(x))
        return np.where(av <= 2.0 * r, h, 0.0)


def _sinc(t: float) -> float:
    if abs(t) < 1e-8:
        return 1.0 - t * t / 6.0
    return math.sin(t) / t


def bump_fourier(profile: BumpProfile, zeta: DualVector, scale: float,
                 aspect: AspectRatio = SQUARE) -> float:
    """Plain-exponential coefficient of the bump rescaled by scale.

    v(zeta) = A/(4 pi^2 s^2) * f(k1/s) * f(k2/s) with (k1, k2) the embedding
    of zeta and f the 1D raised-cosine transform; v(0) = A r^2 / (4 pi^2 s^2).
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    k1, k2 = aspect.embed(DualVector(*zeta))
    return (profile.amplitude / (4.0 * math.pi ** 2 * scale ** 2)
            * profile.transform_1d(k1 / scale)
            * profile.transform_1d(k2 / scale))


# ---------------------------------------------------------------------------
# Fourier potential container


@dataclass(frozen=True)
class FourierPotential:
    """Finitely supported coefficient map zeta -> v(zeta) with its L2 norm.

    When cutoff_q is None the map is complete (absent coefficients are
    exactly zero, l2_norm follows from Parseval).  Otherwise the map is a
    truncation: coefficients are known for |zeta|^2 <= cutoff_q, anything
    beyond raises, and l2_norm is the externally computed exact value.
    """

    coeffs: Mapping[DualVector, complex]
    l2_norm: float
    aspect: AspectRatio = SQUARE
    real: bool = True
    cutoff_q: float | None = None
    support_ball_radius: float | None = None

    def coeff(self, zeta: DualVector) -> complex:
        v = self.coeffs.get(DualVector(*zeta))
        if v is not None:
            return v
        if self.cutoff_q is not None:
            qv = self.aspect.q_num(zeta[0], zeta[1]) / self.aspect.den
            if qv > self.cutoff_q:
                raise MissingCoefficientError(
                    f"coefficient at zeta={tuple(zeta)} (|zeta|^2={qv:g}) beyond "
                    f"declared coverage |zeta|^2 <= {self.cutoff_q:g}")
        return 0.0

    def sum_abs(self) -> float:
        return float(sum(abs(v) for v in self.coeffs.values()))

    def parseval_sq(self) -> float:
        """4 pi^2 sum |v|^2 over the stored coefficients."""
        return 4.0 * math.pi ** 2 * float(sum(abs(v) ** 2 for v in self.coeffs.values()))

    def parseval_gap(self) -> float:
        """l2_norm^2 minus the stored-coefficient Parseval sum (truncation tail)."""
        return self.l2_norm ** 2 - self.parseval_sq()


ZERO_POTENTIAL = FourierPotential(coeffs={}, l2_norm=0.0)


def trig_potential(coeffs: Mapping[tuple[int, int], complex], real: bool = True,
                   aspect: AspectRatio = SQUARE) -> FourierPotential:
    """Potential from explicit coefficients; validates symmetry when real.

    A real-flagged potential must satisfy v(-zeta) == conj(v(zeta)) exactly.
    The norm comes from Parseval since the map is complete.
    """
    cmap = {DualVector(int(z[0]), int(z[1])): complex(v) for z, v in coeffs.items()}
    cmap = {z: v for z, v in cmap.items() if v != 0}
    if real:
        for z, v in cmap.items():
            if cmap.get(-z, 0.0) != v.conjugate():
                raise SymmetryError(
                    f"real-flagged potential needs v(-zeta) = conj(v(zeta)); "
                    f"violated at zeta={tuple(z)}")
    norm = math.sqrt(4.0 * math.pi ** 2 * sum(abs(v) ** 2 for v in cmap.values()))
    return FourierPotential(coeffs=cmap, l2_norm=norm, aspect=aspect, real=real,
                            cutoff_q=None)


# ---------------------------------------------------------------------------
# scatterer configurations


def _as_positions(omega) -> np.ndarray:
    pos = np.asarray(omega, dtype=np.float64)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ValueError(f"positions must have shape (N, 2), got {pos.shape}")
    return np.mod(pos, 1.0)


@dataclass(frozen=True)
class ScattererConfig:
    """Scatterer positions (fractional coords), scale and amplitude."""

    positions: np.ndarray
    scale: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "positions", _as_positions(self.positions))
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def n_scatterers(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class RDMConfig:
    """Base point set plus i.i.d. compactly supported displacements."""

    base: np.ndarray
    r1: float
    seed: int
    distribution: str = "uniform-disc"

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", _as_positions(self.base))
        if self.r1 < 0:
            raise ValueError(f"displacement radius must be nonnegative, got {self.r1}")
        if self.distribution != "uniform-disc":
            raise ValueError(f"unknown displacement distribution {self.distribution!r}")

    @property
    def n_scatterers(self) -> int:
        return self.base.shape[0]


def _phase_sums(positions: np.ndarray, zetas: Sequence[DualVector]) -> np.ndarray:
    """sum_j exp(-2 pi i (m u1_j + n u2_j)) for each zeta = (m, n)."""
    mn = np.array(zetas, dtype=np.float64)  # (Z, 2)
    phases = positions @ mn.T  # (N, Z): m*u1 + n*u2
    return np.exp(-2j * np.pi * phases).sum(axis=0)


def pairwise_l2_sq(config: ScattererConfig, profile: BumpProfile,
                   aspect: AspectRatio = SQUARE) -> float:
    """Exact squared L2 norm of the scatterer sum via pairwise overlaps.

    integral |V_N|^2 = amp^2 * sum_{j,k} (A^2/s^2) h(s*dx1) h(s*dx2) with h
    the closed-form 1D autocorrelation and (dx1, dx2) the minimum-image
    physical separation.  Only pairs with per-coordinate physical distance
    <= 2r/s contribute; requires the scaled support to fit in a half torus.
    """
    s = config.scale
    r = profile.radius
    if 2.0 * r / s > math.pi * min(aspect.a, 1.0 / aspect.a):
        raise ValueError(
            f"scaled support 2r/s={2 * r / s:g} exceeds the half torus; "
            "periodic images would overlap")
    pos = config.positions
    du = pos[:, None, :] - pos[None, :, :]
    du -= np.rint(du)  # minimum image, fractional coords in [-1/2, 1/2]
    dx1 = (2.0 * math.pi * aspect.a) * du[..., 0] * s
    dx2 = (2.0 * math.pi / aspect.a) * du[..., 1] * s
    h = profile.autocorr_1d
    total = float(np.sum(h(dx1) * h(dx2)))
    return (config.amplitude ** 2) * (profile.amplitude ** 2) * total / s ** 2


def scatterer_potential(config: ScattererConfig, profile: BumpProfile,
                        coeff_cutoff: float, aspect: AspectRatio = SQUARE) -> FourierPotential:
    """Fourier potential of amplitude * sum_j W(s(x - omega_j)).

    Coefficients are emitted for every zeta with |zeta|^2 <= coeff_cutoff
    (callers solving on a basis with |xi|^2 <= Lambda need 4*Lambda).  The
    L2 norm is exact, from the physical-space pairwise-overlap formula,
    not from the truncated coefficients.
    """
    zetas = enumerate_up_to(coeff_cutoff, aspect)
    phases = _phase_sums(config.positions, zetas)
    cmap: dict[DualVector, complex] = {}
    for z, ph in zip(zetas, phases):
        v = config.amplitude * complex(ph) * bump_fourier(profile, z, config.scale, aspect)
        cmap[z] = v
    norm = math.sqrt(pairwise_l2_sq(config, profile, aspect))
    return FourierPotential(coeffs=cmap, l2_norm=norm, aspect=aspect, real=True,
                            cutoff_q=float(coeff_cutoff),
                            support_ball_radius=profile.ball_radius / config.scale)


@dataclass(frozen=True)
class StrongDisorderPotential:
    """Rescaled strong-disorder potential alpha*L^2 sum_j W(L(x - omega_j)).

    rho is the empirical scatterer density over the large-torus area
    (2 pi L)^2; energies map to unit-torus eigenvalues by lambda = E * L^2.
    """

    potential: FourierPotential
    alpha: float
    big_l: int
    rho: float

    def lambda_of(self, energy: float) -> float:
        return energy * self.big_l ** 2

    def energy_window(self, e_lo: float, e_hi: float) -> tuple[float, float]:
        return (self.lambda_of(e_lo), self.lambda_of(e_hi))


def strong_disorder_potential(alpha: float, big_l: int, omega, profile: BumpProfile,
                              coeff_cutoff: float,
                              aspect: AspectRatio = SQUARE) -> StrongDisorderPotential:
    """Scatterer potential at scale L with amplitude alpha*L^2."""
    if big_l < 1:
        raise ValueError(f"rescaling parameter must be a positive integer, got {big_l}")
    pos = _as_positions(omega)
    config = ScattererConfig(positions=pos, scale=float(big_l),
                             amplitude=alpha * big_l ** 2)
    if alpha == 0:
        pot = FourierPotential(coeffs={}, l2_norm=0.0, aspect=aspect, real=True,
                               cutoff_q=float(coeff_cutoff))
    else:
        pot = scatterer_potential(config, profile, coeff_cutoff, aspect)
    rho = pos.shape[0] / (2.0 * math.pi * big_l) ** 2
    return StrongDisorderPotential(potential=pot, alpha=alpha, big_l=big_l, rho=rho)


# ---------------------------------------------------------------------------
# position generators


def grid_positions(n: int) -> np.ndarray:
    """Exact M x M grid in fractional coordinates for n = M^2 points."""
    m = math.isqrt(n)
    if m * m != n:
        raise ValueError(f"scatterer count must be a perfect square, got {n}")
    idx = np.arange(m, dtype=np.float64)
    g1, g2 = np.meshgrid(idx, idx, indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()]) / m


def _uniform_disc(rng: np.random.Generator, radius: float) -> np.ndarray:
    rad = radius * math.sqrt(rng.uniform())
    ang = 2.0 * math.pi * rng.uniform()
    return np.array([rad * math.cos(ang), rad * math.sin(ang)])


def distorted_lattice(n: int, r0: float, seed: int) -> np.ndarray:
    """M x M grid with per-site displacements of norm <= r0 lattice spacings.

    Site j draws from its own generator keyed by (seed, j), so the sample
    is independent of evaluation order; r0 = 0 returns the exact grid.
    """
    if not (0 <= r0 < 0.5):
        raise ValueError(f"distortion radius must lie in [0, 1/2), got {r0}")
    base = grid_positions(n)
    if r0 == 0:
        return base
    m = math.isqrt(n)
    disp = np.empty_like(base)
    for j in range(n):
        disp[j] = _uniform_disc(subseed(seed, "distort", j), r0)
    return np.mod(base + disp / m, 1.0)


def rdm_sample(config: RDMConfig) -> np.ndarray:
    """Base set plus i.i.d. displacements of norm <= r1/sqrt(N)."""
    n = config.n_scatterers
    if config.r1 == 0:
        return config.base.copy()
    root_n = math.sqrt(n)
    disp = np.empty_like(config.base)
    for j in range(n):
        disp[j] = _uniform_disc(subseed(config.seed, "rdm", j), config.r1)
    return np.mod(config.base + disp / root_n, 1.0)


# ---------------------------------------------------------------------------
# disorder diagnostics


@dataclass(frozen=True)
class WeakDisorderResult:
    passed: bool
    worst_ratio: float
    witness_radius: float  # the R value, in units of 1/sqrt(N)
    witness_center: tuple[float, float]
    witness_count: int


def weak_disorder_check(omega, n: int, c: float,
                        r_grid: Sequence[float]) -> WeakDisorderResult:
    """Ball-counting test: #(Omega in B(x0, R/sqrt(N))) <= c * max(1, R^2).

    Centers run over a grid of pitch R/(2 sqrt(N)) plus every scatterer;
    distances are Euclidean in fractional coordinates with wraparound.
    Reports the worst count/max(1, R^2) ratio and the ball attaining it.
    """
    pos = _as_positions(omega)
    if pos.shape[0] != n:
        raise ValueError(f"expected {n} positions, got {pos.shape[0]}")
    root_n = math.sqrt(n)
    worst = -1.0
    witness = (0.0, (0.0, 0.0), 0)
    for big_r in r_grid:
        if not (0 < big_r <= root_n):
            raise ValueError(f"R values must lie in (0, sqrt(N)], got {big_r}")
        rad = big_r / root_n
        pitch = big_r / (2.0 * root_n)
        k = max(1, math.ceil(1.0 / pitch))
        axis = np.arange(k, dtype=np.float64) / k
        g1, g2 = np.meshgrid(axis, axis, indexing="ij")
        centers = np.concatenate(
            [np.column_stack([g1.ravel(), g2.ravel()]), pos], axis=0)
        d = np.abs(centers[:, None, :] - pos[None, :, :])
        d = np.minimum(d, 1.0 - d)
        counts = np.count_nonzero((d ** 2).sum(axis=2) <= rad * rad, axis=1)
        denom = max(1.0, big_r * big_r)
        i = int(np.argmax(counts))
        ratio = counts[i] / denom
        if ratio > worst:
            worst = ratio
            witness = (float(big_r), (float(centers[i, 0]), float(centers[i, 1])),
                       int(counts[i]))
    return WeakDisorderResult(passed=bool(worst <= c), worst_ratio=float(worst),
                              witness_radius=witness[0], witness_center=witness[1],
                              witness_count=witness[2])


def l2_norm_bound_check(config: ScattererConfig, profile: BumpProfile, c: float,
                        aspect: AspectRatio = SQUARE) -> tuple[float, float, bool]:
    """Uniformity bound on the scatterer-sum norm.

    lhs is the exact pairwise-overlap integral of |V_N|^2; rhs is
    c * max(1, (2*sqrt(2)*r)^2) * ||amp*W||^2, the ball-counting constant c
    applied at the overlap radius of the square support (circumscribed-ball
    radius r*sqrt(2), doubled for pair separation).
    """
    lhs = pairwise_l2_sq(config, profile, aspect)
    base = (config.amplitude * profile.l2_norm) ** 2
    rhs = c * max(1.0, 8.0 * profile.radius ** 2) * base
    return lhs, rhs, lhs <= rhs
