"""Batch runs behind the CLI subcommands: compute, then write CSV/JSON.

Every CSV starts with a comment line carrying the config hash, then the
header row.  All floats are serialized with 17 significant digits, so a
rerun with the same config and seed reproduces the files byte for byte.
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .config import ConfigError, RunConfig
from .diagnostics import (
    Observable,
    RateParams,
    annulus_min_gap,
    discrepancy,
    equi_condition,
    localization_bound,
    monomial_pair,
    synthetic_smooth,
)
from .goodset import GoodSetParams, qprime, sigma_good_nums
from .lattice import AspectRatio, distinct_spectrum
from .potentials import (
    BumpProfile,
    FourierPotential,
    RDMConfig,
    ScattererConfig,
    distorted_lattice,
    grid_positions,
    l2_norm_bound_check,
    pairwise_l2_sq,
    rdm_sample,
    scatterer_potential,
    strong_disorder_potential,
    trig_potential,
    weak_disorder_check,
)
from .solver import (
    EigenPair,
    assemble,
    build_basis,
    eigensolve,
    fourier_bound_check,
    truncate_eigenfunction,
)

__all__ = [
    "run_spectrum",
    "run_goodset",
    "run_solve",
    "run_equidist",
    "run_disorder",
    "run_locbound",
]

EXIT_OK = 0
EXIT_TOLERANCE = 3


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def _write_csv(path: str, config_hash: str, header: Sequence[str],
               rows: Iterable[Sequence[Any]]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(cfg: RunConfig) -> str:
    out = cfg.out_dir or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _aspect(cfg: RunConfig) -> AspectRatio:
    p, q = cfg.aspect_pq
    return AspectRatio(p, q)


def _vec_str(v) -> str:
    return "" if v is None else f"{v[0]};{v[1]}"


# ---------------------------------------------------------------------------
# spectrum


def run_spectrum(cfg: RunConfig) -> int:
    aspect = _aspect(cfg)
    cutoff = float(cfg.section("spectrum").get("cutoff", 100.0))
    if cutoff < 0:
        raise ConfigError(f"spectrum cutoff must be nonnegative, got {cutoff}")
    spec = distinct_spectrum(cutoff, aspect)
    out = _outdir(cfg)
    rows = []
    for k, entry in enumerate(spec.entries):
        for _ in range(entry.multiplicity):
            rows.append((k, entry.value.num, entry.value.den,
                         entry.value.num / entry.value.den, entry.multiplicity))
    _write_csv(os.path.join(out, "spectrum.csv"), cfg.config_hash,
               ["index", "num", "den", "value_float", "multiplicity"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# goodset


def run_goodset(cfg: RunConfig) -> int:
    aspect = _aspect(cfg)
    params = cfg.goodset_params(validate=True)
    cutoff = float(cfg.section("goodset").get("cutoff", 1e4))
    if cutoff < 1:
        raise ConfigError(f"goodset cutoff must be >= 1, got {cutoff}")
    report = qprime(cutoff, params, aspect)
    out = _outdir(cfg)
    rows = []
    for r in report.rows:
        wx, wz = (r.witness if r.witness else (None, None))
        rows.append((r.value.num, r.value.den, r.value.num / r.value.den,
                     r.in_q1, r.in_q2, r.in_qprime, r.cert_pass,
                     r.cert_margin if math.isfinite(r.cert_margin) else None,
                     _vec_str(wx), _vec_str(wz)))
    _write_csv(os.path.join(out, "goodset.csv"), cfg.config_hash,
               ["num", "den", "value_float", "in_q1", "in_q2", "in_qprime",
                "certificate_pass", "certificate_margin", "witness_xi",
                "witness_zeta"], rows)

    nums = np.array([r.value.num for r in report.rows], dtype=np.int64)
    in_q1 = np.array([r.in_q1 for r in report.rows], dtype=bool)
    curve = []
    for x in (cutoff / 100.0, cutoff / 10.0, cutoff):
        if x < 10:
            continue
        sel = nums <= x * aspect.den
        total = int(sel.sum())
        comp = int((~in_q1[sel]).sum())
        curve.append({"cutoff": x, "values": total, "q1_complement": comp,
                      "q1_complement_density": comp / total if total else 0.0,
                      "bound_curve": cutoff_power(x, params)})
    summary = {
        "cutoff": cutoff,
        "values": len(report.rows),
        "q1_complement_count": report.q1_complement_count,
        "q1_complement_density": report.q1_complement_count / len(report.rows),
        "qprime_count": report.qprime_count,
        "qprime_density": report.qprime_density,
        "complement_bound_exponent": report.complement_bound_exponent,
        "q1_not_certified": list(report.q1_not_certified),
        "certified_not_q1_count": len(report.certified_not_q1),
        "boundary_num": report.boundary_num,
        "complement_curve": curve,
    }
    _write_json(os.path.join(out, "goodset_summary.json"), summary)
    return EXIT_OK


def cutoff_power(x: float, params: GoodSetParams) -> float:
    return float(x) ** params.complement_exponent


# ---------------------------------------------------------------------------
# potentials from config


@dataclass(frozen=True)
class PotentialBundle:
    kind: str
    potential: FourierPotential
    positions: np.ndarray | None
    base: np.ndarray | None
    profile: BumpProfile | None
    scale: float
    amplitude: float
    alpha: float | None = None
    big_l: int | None = None
    rho: float | None = None


def _load_positions_file(path: str) -> np.ndarray:
    import csv

    rows = []
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for rec in csv.DictReader(lines):
        rows.append((float(rec["omega_x"]), float(rec["omega_y"])))
    if not rows:
        raise ConfigError(f"positions file {path} holds no rows")
    return np.array(rows, dtype=np.float64)


def build_potential(cfg: RunConfig, aspect: AspectRatio, coeff_cutoff: float,
                    seed: int) -> PotentialBundle:
    sec = cfg.raw.get("potential", {"kind": "zero"})
    kind = sec.get("kind", "zero")
    if kind == "zero":
        return PotentialBundle(kind=kind, potential=trig_potential({}, aspect=aspect),
                               positions=None, base=None, profile=None,
                               scale=1.0, amplitude=0.0)
    if kind == "trig":
        cmap = {(int(m), int(n)): complex(re, im)
                for m, n, re, im in sec.get("coeffs", [])}
        return PotentialBundle(kind=kind,
                               potential=trig_potential(cmap, aspect=aspect),
                               positions=None, base=None, profile=None,
                               scale=1.0, amplitude=1.0)
    profile = BumpProfile(radius=float(sec.get("bump_radius", 2.0)),
                          amplitude=float(sec.get("bump_amplitude", 1.0)))
    pos_file = sec.get("positions_file")
    n = int(sec.get("n", 64))
    if kind == "scatterer":
        if pos_file is not None:
            pos, base = _load_positions_file(pos_file), None
            n = pos.shape[0]
        else:
            pos, base = distorted_lattice(n, float(sec.get("r0", 0.0)), seed), grid_positions(n)
        config = ScattererConfig(positions=pos, scale=math.sqrt(n))
        pot = scatterer_potential(config, profile, coeff_cutoff, aspect)
        return PotentialBundle(kind=kind, potential=pot, positions=pos,
                               base=base, profile=profile,
                               scale=math.sqrt(n), amplitude=1.0)
    if kind == "rdm":
        base = _load_positions_file(pos_file) if pos_file else grid_positions(n)
        n = base.shape[0]
        pos = rdm_sample(RDMConfig(base=base, r1=float(sec.get("r1", 0.4)), seed=seed))
        config = ScattererConfig(positions=pos, scale=math.sqrt(n))
        pot = scatterer_potential(config, profile, coeff_cutoff, aspect)
        return PotentialBundle(kind=kind, potential=pot, positions=pos, base=base,
                               profile=profile, scale=math.sqrt(n), amplitude=1.0)
    if kind == "strong_disorder":
        big_l = int(sec.get("big_l", 1))
        alpha = float(sec.get("alpha", 1.0))
        pos = distorted_lattice(n, float(sec.get("r0", 0.0)), seed)
        model = strong_disorder_potential(alpha, big_l, pos, profile, coeff_cutoff, aspect)
        return PotentialBundle(kind=kind, potential=model.potential, positions=pos,
                               base=grid_positions(n), profile=profile,
                               scale=float(big_l), amplitude=alpha * big_l ** 2,
                               alpha=alpha, big_l=big_l, rho=model.rho)
    raise ConfigError(f"unhandled potential kind {kind!r}")


def _write_positions(path: str, config_hash: str, positions: np.ndarray,
                     base: np.ndarray | None) -> None:
    rows = []
    for j in range(positions.shape[0]):
        bx, by = (base[j] if base is not None else (None, None))
        rows.append((j, float(positions[j, 0]), float(positions[j, 1]),
                     None if bx is None else float(bx),
                     None if by is None else float(by)))
    _write_csv(path, config_hash,
               ["j", "omega_x", "omega_y", "base_x", "base_y"], rows)


def _write_potential_json(path: str, bundle: PotentialBundle) -> None:
    coeffs = sorted(bundle.potential.coeffs.items(),
                    key=lambda kv: (kv[0].m, kv[0].n))
    payload = {
        "kind": bundle.kind,
        "profile": (None if bundle.profile is None else
                    {"radius": bundle.profile.radius,
                     "amplitude": bundle.profile.amplitude}),
        "scale": bundle.scale,
        "amplitude": bundle.amplitude,
        "l2_norm": bundle.potential.l2_norm,
        "coefficients": [[z.m, z.n, v.real, v.imag] for z, v in coeffs],
    }
    _write_json(path, payload)


# ---------------------------------------------------------------------------
# solve / equidist


@dataclass
class SolveResult:
    aspect: AspectRatio
    basis_cutoff: float
    bundle: PotentialBundle
    pairs: list[EigenPair]
    goodset: GoodSetParams
    tolerance_failures: list[str]


def _solve_pipeline(cfg: RunConfig) -> SolveResult:
    aspect = _aspect(cfg)
    params = cfg.goodset_params(validate=True)
    solver_sec = cfg.section("solver")
    lam_max = float(solver_sec.get("cutoff", 200.0))
    hard_cap = int(solver_sec.get("hard_cap", 4096))
    basis = build_basis(lam_max, aspect, hard_cap=hard_cap)
    bundle = build_potential(cfg, aspect, coeff_cutoff=4.0 * lam_max, seed=cfg.seed)
    ham = assemble(bundle.potential, basis)
    spectrum = distinct_spectrum(ham.gershgorin_upper() + 16.0, aspect)
    good = sigma_good_nums(spectrum, params)
    pairs = eigensolve(ham, spectrum, good_nums=good)
    failures = [f"pair {p.pair_id}: residual {p.residual:.3g} above tolerance"
                for p in pairs if p.truncation_safe and not p.residual_ok]
    return SolveResult(aspect=aspect, basis_cutoff=lam_max, bundle=bundle,
                       pairs=pairs, goodset=params, tolerance_failures=failures)


def _eigenpair_rows(result: SolveResult) -> list[tuple]:
    rows = []
    for p in result.pairs:
        if p.n_lo is not None and p.n_lo.num / p.n_lo.den >= 1:
            tail03 = truncate_eigenfunction(p, 0.3).tail_mass
        else:
            tail03 = None
        ratio, _ = fourier_bound_check(p, result.bundle.potential)
        rows.append((p.pair_id, p.lam,
                     None if p.n_lo is None else p.n_lo.num,
                     None if p.n_lo is None else p.n_lo.den,
                     p.in_sigma, p.residual, tail03, ratio))
    return rows


def _write_eigvecs(path: str, pairs: list[EigenPair]) -> None:
    dim = len(pairs[0].psi_hat) if pairs else 0
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", len(pairs), dim))
        for p in pairs:
            fh.write(np.ascontiguousarray(p.psi_hat, dtype="<c16").tobytes())


def run_solve(cfg: RunConfig) -> int:
    result = _solve_pipeline(cfg)
    out = _outdir(cfg)
    _write_csv(os.path.join(out, "eigenpairs.csv"), cfg.config_hash,
               ["pair_id", "lambda", "n_k_num", "n_k_den", "in_sigma",
                "residual", "tail_mass_delta0.3", "fourier_bound_max_ratio"],
               _eigenpair_rows(result))
    _write_eigvecs(os.path.join(out, "eigvecs.bin"), result.pairs)
    if result.bundle.positions is not None:
        _write_positions(os.path.join(out, "positions.csv"), cfg.config_hash,
                         result.bundle.positions, result.bundle.base)
        _write_potential_json(os.path.join(out, "potential.json"), result.bundle)
    if result.tolerance_failures:
        print("\n".join(result.tolerance_failures))
        return EXIT_TOLERANCE
    return EXIT_OK


def _observables(cfg: RunConfig, aspect: AspectRatio) -> list[Observable]:
    sec = cfg.raw.get("observables", {})
    monomials = sec.get("monomials", [[1, 0], [0, 1], [1, 1]])
    obs = [monomial_pair((int(m), int(n))) for m, n in monomials]
    if "smooth_k" in sec:
        obs.append(synthetic_smooth(float(sec["smooth_k"]),
                                    float(sec.get("smooth_radius", 5.0)), aspect))
    return obs


def run_equidist(cfg: RunConfig) -> int:
    result = _solve_pipeline(cfg)
    aspect = result.aspect
    rates_sec = cfg.raw.get("rates", {})
    rates = RateParams(theta=float(rates_sec.get("theta", 517 / 1648)),
                       epsilon=float(rates_sec.get("epsilon", 0.01)))
    observables = _observables(cfg, aspect)
    v_norm = result.bundle.potential.l2_norm
    out = _outdir(cfg)
    _write_csv(os.path.join(out, "eigenpairs.csv"), cfg.config_hash,
               ["pair_id", "lambda", "n_k_num", "n_k_den", "in_sigma",
                "residual", "tail_mass_delta0.3", "fourier_bound_max_ratio"],
               _eigenpair_rows(result))
    _write_eigvecs(os.path.join(out, "eigvecs.bin"), result.pairs)
    if result.bundle.positions is not None:
        _write_positions(os.path.join(out, "positions.csv"), cfg.config_hash,
                         result.bundle.positions, result.bundle.base)
        _write_potential_json(os.path.join(out, "potential.json"), result.bundle)

    rows = []
    fourier_failures = []
    for p in result.pairs:
        if p.n_lo is None or p.n_lo.num / p.n_lo.den < 1:
            continue
        trunc = truncate_eigenfunction(p, result.goodset.delta)
        if p.truncation_safe:
            ratio, ok = fourier_bound_check(p, result.bundle.potential)
            if not ok:
                fourier_failures.append(
                    f"pair {p.pair_id}: coefficient bound ratio {ratio:.3g} > 1.05")
        for a in observables:
            rec = discrepancy(a, p, rates, v_norm, tail_mass=trunc.tail_mass)
            gap = annulus_min_gap(trunc, [z for z in a.coeffs if z != (0, 0)])
            rows.append((cfg.config_hash, p.lam, p.n_lo.num / p.n_lo.den,
                         p.in_sigma, a.obs_id, rec.discrepancy, rec.envelope,
                         trunc.tail_mass, gap if math.isfinite(gap) else None))
    _write_csv(os.path.join(out, "equidist.csv"), cfg.config_hash,
               ["run_id", "lambda", "n_k_float", "in_sigma", "observable_id",
                "discrepancy", "envelope", "tail_mass", "ann_min_gap"], rows)
    failures = result.tolerance_failures + fourier_failures
    if failures:
        print("\n".join(failures))
        return EXIT_TOLERANCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# disorder sweeps


def _default_r_grid(n: int) -> list[float]:
    grid = []
    r = 2.0
    while r <= math.sqrt(n):
        grid.append(r)
        r *= 2.0
    return grid or [math.sqrt(n)]


def run_disorder(cfg: RunConfig) -> int:
    aspect = _aspect(cfg)
    sec = cfg.section("disorder")
    pot_sec = cfg.raw.get("potential", {})
    kind = pot_sec.get("kind", "rdm")
    if kind not in ("rdm", "scatterer", "strong_disorder"):
        raise ConfigError(f"disorder sweeps need a scatterer-family potential, got {kind!r}")
    profile = BumpProfile(radius=float(pot_sec.get("bump_radius", 2.0)),
                          amplitude=float(pot_sec.get("bump_amplitude", 1.0)))
    wd_c = float(sec.get("wd_constant", 8.0))
    sweep = sec.get("sweep")
    if not sweep:
        raise ConfigError("disorder sweep list is empty")
    rates_sec = cfg.raw.get("rates", {})
    rates = RateParams(theta=float(rates_sec.get("theta", 517 / 1648)),
                       epsilon=float(rates_sec.get("epsilon", 0.01)))
    e_min = float(cfg.raw.get("window", {}).get("e_min", 1.0))
    pos_file = pot_sec.get("positions_file")
    file_pos = _load_positions_file(pos_file) if pos_file else None
    rows = []
    for value in sweep:
        if kind == "strong_disorder":
            big_l = int(value)
            n = int(pot_sec.get("n", 16)) * big_l * big_l
            pos = distorted_lattice(n, float(pot_sec.get("r0", 0.0)), cfg.seed)
            alpha = float(pot_sec.get("alpha", 1.0))
            config = ScattererConfig(positions=pos, scale=float(big_l),
                                     amplitude=alpha * big_l ** 2)
            rho = n / (2.0 * math.pi * big_l) ** 2
            param = big_l
        elif file_pos is not None:
            n = int(value)
            if n != file_pos.shape[0]:
                raise ConfigError(
                    f"sweep count {n} does not match the {file_pos.shape[0]} "
                    f"positions in {pos_file}")
            base = file_pos
            if kind == "rdm":
                pos = rdm_sample(RDMConfig(base=base, r1=float(pot_sec.get("r1", 0.4)),
                                           seed=cfg.seed))
            else:
                pos = file_pos
            config = ScattererConfig(positions=pos, scale=math.sqrt(n))
            rho, alpha, big_l = None, None, None
            param = n
        else:
            n = int(value)
            if math.isqrt(n) ** 2 != n:
                raise ConfigError(f"sweep counts must be perfect squares, got {n}")
            base = grid_positions(n)
            if kind == "rdm":
                pos = rdm_sample(RDMConfig(base=base, r1=float(pot_sec.get("r1", 0.4)),
                                           seed=cfg.seed))
            else:
                pos = distorted_lattice(n, float(pot_sec.get("r0", 0.0)), cfg.seed)
            config = ScattererConfig(positions=pos, scale=math.sqrt(n))
            rho, alpha, big_l = None, None, None
            param = n
        r_grid = [float(r) for r in sec.get("r_grid", _default_r_grid(n))]
        wd = weak_disorder_check(pos, n, wd_c, r_grid)
        lhs, rhs, l2_pass = l2_norm_bound_check(config, profile, wd_c, aspect)
        if kind == "strong_disorder":
            ec = equi_condition(rho, alpha, profile.l2_norm, big_l, e_min, rates)
            loc = (localization_bound(alpha, e_min, rho, profile.l2_norm, rates)
                   if alpha != 0 else None)
            equi_lhs, equi_rhs, equi_sat = ec.lhs, ec.rhs, ec.satisfied
        else:
            equi_lhs = equi_rhs = equi_sat = loc = None
        rows.append((kind, param, n, math.sqrt(lhs), lhs, rhs, l2_pass,
                     wd.worst_ratio, wd.passed, wd.witness_radius,
                     equi_lhs, equi_rhs, equi_sat, loc))
    out = _outdir(cfg)
    _write_csv(os.path.join(out, "disorder.csv"), cfg.config_hash,
               ["kind", "param", "n_scatterers", "v_l2_norm", "v_l2_sq",
                "l2_bound", "l2_pass", "wd_worst_ratio", "wd_pass",
                "wd_witness_r", "equi_lhs", "equi_rhs", "equi_satisfied",
                "loc_bound"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# localization bound


def run_locbound(cfg: RunConfig) -> int:
    sec = cfg.section("locbound")
    rates = RateParams(theta=float(sec.get("theta", 517 / 1648)),
                       epsilon=float(sec.get("epsilon", 0.01)))
    alpha = float(sec.get("alpha", 1.0))
    energy = float(sec.get("energy", 1.0))
    rho = float(sec.get("rho", 1.0))
    v_norm = float(sec.get("v_norm", 1.0))
    if alpha == 0:
        raise ConfigError("localization bound undefined at zero coupling alpha")
    bound = localization_bound(alpha, energy, rho, v_norm, rates)
    out = _outdir(cfg)
    _write_json(os.path.join(out, "locbound.json"), {
        "alpha": alpha, "energy": energy, "rho": rho, "v_norm": v_norm,
        "theta": float(rates.theta), "epsilon": float(rates.epsilon),
        "rate": float((1 - 3 * float(rates.theta)) / 2 - float(rates.epsilon)),
        "bound": bound,
    })
    return EXIT_OK
