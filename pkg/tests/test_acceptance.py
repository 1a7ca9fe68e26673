"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete.  Every tolerance is pinned here, none deferred.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from toralab.diagnostics import (
    RateParams,
    discrepancy,
    localization_bound,
    monomial_chain_check,
    monomial_pair,
    pair_correlation,
    synthetic_smooth,
    theoretical_rate,
)
from toralab.goodset import (
    GoodSetParams,
    bad_values,
    bad_vector_count,
    certify_good_annulus,
    q1,
    sigma_good_nums,
)
from toralab.lattice import (
    AspectRatio,
    DualVector,
    QValue,
    counting_function,
    distinct_spectrum,
    enumerate_up_to,
)
from toralab.potentials import (
    BumpProfile,
    RDMConfig,
    ScattererConfig,
    grid_positions,
    distorted_lattice,
    pairwise_l2_sq,
    rdm_sample,
    scatterer_potential,
    trig_potential,
    weak_disorder_check,
)
from toralab.solver import (
    TAIL_SUM_C,
    assemble,
    build_basis,
    eigensolve,
    fourier_bound_check,
    sorted_qvalues,
    tail_sum_bound,
    truncate_eigenfunction,
)

from oracles import brute_tail_sum, brute_vectors

A1 = AspectRatio(1, 1)
PARAMS = GoodSetParams()


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _solve(potential, lam_max=200.0):
    basis = build_basis(lam_max, A1)
    ham = assemble(potential, basis)
    spectrum = distinct_spectrum(ham.gershgorin_upper() + 16.0, A1)
    good = sigma_good_nums(spectrum, PARAMS)
    return basis, eigensolve(ham, spectrum, good_nums=good)


@pytest.fixture(scope="module")
def run_matrix():
    """Weak-coupling run matrix: two cosine couplings and one RDM sample."""
    runs = {}
    for c in (0.1, 0.5):
        pot = trig_potential({(1, 0): c, (-1, 0): c})
        runs[f"cos{c}"] = (pot, *_solve(pot))
    profile = BumpProfile(radius=2.0, amplitude=0.5)
    for n in (64, 256):
        pos = rdm_sample(RDMConfig(base=grid_positions(n), r1=0.4, seed=2024))
        cfg = ScattererConfig(positions=pos, scale=math.sqrt(n))
        pot = scatterer_potential(cfg, profile, 800.0, A1)
        runs[f"rdm{n}"] = (pot, *_solve(pot))
    return runs


def test_c01_lattice_exactness():
    t0 = time.monotonic()
    count, _ = counting_function(100, A1)
    brute = len(brute_vectors(100, 1, 1))
    spec8 = [e.value.num for e in distinct_spectrum(8, A1).entries]
    spec = distinct_spectrum(10, A1)
    r5 = spec.entries[spec.index_of_num(5)].multiplicity
    elapsed = time.monotonic() - t0
    ok = count == 317 == brute and spec8 == [0, 1, 2, 4, 5, 8] and r5 == 8 \
        and elapsed < 1.0
    _report("lattice-exactness", ok,
            f"count(100)={count} (oracle {brute}), values<=8={spec8}, "
            f"r(5)={r5}, {elapsed:.2f}s")


def test_c02_free_laplacian_identity():
    t0 = time.monotonic()
    basis, pairs = _solve(trig_potential({}), lam_max=200.0)
    lams = np.array([p.lam for p in pairs])
    eig_err = float(np.max(np.abs(lams - np.sort(basis.q_values))))
    worst_d = 0.0
    observables = [monomial_pair(z) for z in ((1, 0), (0, 1), (1, 1), (2, 1))]
    rate = RateParams()
    for p in pairs:
        for a in observables:
            worst_d = max(worst_d, discrepancy(a, p, rate, 0.0).discrepancy)
    elapsed = time.monotonic() - t0
    ok = eig_err <= 1e-10 and worst_d < 1e-12 and elapsed < 10.0
    _report("free-laplacian-identity", ok,
            f"eigenvalue error {eig_err:.2e}, max discrepancy {worst_d:.2e}, "
            f"{elapsed:.1f}s at cutoff 200")


def test_c03_cutoff_doubling():
    t0 = time.monotonic()
    worst = 0.0
    for c in (0.1, 0.5):
        pot = trig_potential({(1, 0): c, (-1, 0): c})
        lam_small = np.array([p.lam for p in _solve(pot, 200.0)[1]])
        lam_big = np.array([p.lam for p in _solve(pot, 400.0)[1]])
        sel = lam_small <= 50.0
        worst = max(worst, float(np.max(np.abs(lam_small[sel] - lam_big[:sel.sum()]))))
    elapsed = time.monotonic() - t0
    ok = worst < 1e-6 and elapsed < 120.0
    _report("cutoff-doubling", ok,
            f"max eigenvalue move {worst:.2e} for lambda <= cutoff/4, {elapsed:.1f}s")


def test_c04_coefficient_bound(run_matrix):
    checked = 0
    worst = 0.0
    for name in ("cos0.1", "cos0.5", "rdm64"):
        pot, _, pairs = run_matrix[name]
        for p in pairs:
            if not p.truncation_safe:
                continue
            ratio, ok = fourier_bound_check(p, pot)
            checked += 1
            worst = max(worst, ratio)
            assert ok, f"{name} pair {p.pair_id} ratio {ratio}"
    ok = worst <= 1.05 and checked > 0
    _report("coefficient-bound", ok,
            f"{checked} truncation-safe pairs, worst ratio {worst:.4f} <= 1.05")


def test_c05_tail_sum_envelope():
    rng = np.random.default_rng(20240801)
    vals = sorted_qvalues(2.2e6, A1)
    checked = 0
    worst_margin = 0.0
    for _ in range(50):
        lam = float(rng.uniform(10.0, 1000.0))
        n = QValue(int(lam), 1)
        if rng.uniform() < 0.5:
            window = (n.num) ** float(rng.choice([0.17, 0.25]))
        else:
            window = float(rng.uniform(1.0, 3.3))
        window = max(1.0, window)
        ts = tail_sum_bound(lam, n, window, A1, values=vals)
        assert ts.within_bound, f"lam={lam} L={window}: {ts.exact_sum} > {ts.bound}"
        worst_margin = max(worst_margin, ts.exact_sum / ts.bound)
        checked += 1
    # two-way enumeration agreement on a subsample, both sides cut at 1e4
    for lam, window in ((50.5, 5.0), (123.4, 2.0), (803.7, 3.0)):
        sub = vals[vals <= 1e4]
        diff = sub - lam
        sel = np.abs(diff) >= window
        mine = float(np.sum(1.0 / diff[sel] ** 2))
        brute = brute_tail_sum(lam, window, 1e4)
        assert abs(mine - brute) <= 1e-6 * brute
    ok = checked == 50
    _report("tail-sum-envelope", ok,
            f"50 pairs within frozen C={TAIL_SUM_C} envelope "
            f"(worst fill {worst_margin:.2f}), two-way agreement 1e-6")


def test_c06_good_annulus_machinery():
    t0 = time.monotonic()
    # exact witness at n=4
    cert = certify_good_annulus(QValue(4, 1), GoodSetParams(delta=0.3, epsilon=0.05,
                                                            margin=0.5))
    witness_ok = (not cert.passed
                  and cert.witness == (DualVector(2, 1), DualVector(0, -1)))
    sweep = (1e3, 1e4, 1e5)
    stable_ok = True
    fit_ok = True
    for z in ((1, 0), (1, 1), (2, 1)):
        zeta = DualVector(*z)
        znorm = math.sqrt(A1.q_num(*z))
        ratios = [bad_vector_count(zeta, x, PARAMS.delta).ratio for x in sweep]
        stable_ok &= max(ratios) <= 2.0 * float(np.median(ratios))
        stable_ok &= max(ratios) <= 2.0 * min(ratios)
        expo = 0.5 + PARAMS.theta + PARAMS.delta
        counts = [len(bad_values(zeta, x, PARAMS)) for x in sweep]
        c_fit = counts[0] * znorm / sweep[0] ** expo
        fit_ok &= all(counts[i] * znorm <= c_fit * sweep[i] ** expo
                      for i in (1, 2))
    densities = []
    for x in sweep:
        total = len(distinct_spectrum(x, A1))
        densities.append((total - len(q1(x, PARAMS))) / total)
    monotone_ok = densities[0] > densities[1] > densities[2]
    elapsed = time.monotonic() - t0
    ok = witness_ok and stable_ok and fit_ok and monotone_ok and elapsed < 300.0
    _report("good-annulus-machinery", ok,
            f"witness {cert.witness}, size-ratio stability x2 ok={stable_ok}, "
            f"marked-value fit ok={fit_ok}, complement density "
            f"{[round(d, 4) for d in densities]} decreasing, {elapsed:.0f}s")


def test_c07_weak_disorder_and_norm():
    lattice = distorted_lattice(1024, 0.3, seed=7)
    res = weak_disorder_check(lattice, 1024, 8.0, [2, 4, 8, 16, 32])
    adversary = np.full((1024, 2), 0.5) + (np.arange(1024)[:, None] % 7) * 1e-5
    adv = weak_disorder_check(adversary, 1024, 8.0, [2, 4, 8])
    profile = BumpProfile(radius=2.0, amplitude=1.0)
    norms = []
    for n in (64, 256, 1024):
        pos = rdm_sample(RDMConfig(base=grid_positions(n), r1=0.4, seed=11))
        norms.append(pairwise_l2_sq(ScattererConfig(positions=pos,
                                                    scale=math.sqrt(n)), profile))
    spread = max(norms) / min(norms)
    ok = res.passed and not adv.passed and spread <= 4.0
    _report("weak-disorder-and-norm", ok,
            f"distorted worst ratio {res.worst_ratio:.2f} <= 8, adversary ratio "
            f"{adv.worst_ratio:.0f} fails, norm spread x{spread:.3f} <= 4")


def test_c08_finite_size_chain(run_matrix):
    checked = 0
    for name in ("cos0.1", "rdm64"):
        pot, _, pairs = run_matrix[name]
        for p in pairs:
            if not (p.in_sigma and p.truncation_safe):
                continue
            trunc = truncate_eigenfunction(p, PARAMS.delta)
            n_val = p.n_lo.value
            cap = n_val ** (2 * PARAMS.epsilon)
            for z in enumerate_up_to(cap + 1.0, A1):
                if z == (0, 0) or A1.q_num(z.m, z.n) > cap:
                    continue
                res = monomial_chain_check(p, trunc, z, pot.l2_norm)
                checked += 1
                assert res.ok, (f"{name} pair {p.pair_id} zeta {tuple(z)}: "
                                f"{res.lhs} > {res.rhs}")
    ok = checked > 100
    _report("finite-size-chain", ok,
            f"{checked} (pair, monomial) inequalities hold as computed numbers")


def test_c09_scale_invariance_proxy(run_matrix):
    obs = synthetic_smooth(4.0, 5.0)
    rate = RateParams()
    maxes = []
    for name in ("rdm64", "rdm256"):
        pot, _, pairs = run_matrix[name]
        window = [p for p in pairs
                  if p.in_sigma and p.truncation_safe and 16.0 <= p.lam <= 32.0]
        assert window, f"{name}: no good-bracket pairs in [16, 32]"
        maxes.append(max(discrepancy(obs, p, rate, pot.l2_norm).discrepancy
                         for p in window))
    ratio = max(maxes) / min(maxes)
    ok = ratio <= 3.0
    _report("scale-invariance-proxy", ok,
            f"max discrepancy over good brackets in [16,32]: N=64 {maxes[0]:.4g} "
            f"vs N=256 {maxes[1]:.4g}, ratio {ratio:.2f} <= 3")


def test_c10_formula_evaluations():
    r1 = theoretical_rate(RateParams(Fraction(1, 4), 0))
    r2 = theoretical_rate(RateParams(Fraction(517, 1648), 0))
    lb = localization_bound(1.0, 1024.0, 1.0, 1.0, RateParams(0.25, 0.0))
    err = abs(lb - 1024.0 ** (1 / 22))
    ok = r1 == Fraction(1, 8) and r2 == Fraction(97, 3296) and err <= 1e-12
    _report("formula-evaluations", ok,
            f"rates 1/8 and 97/3296 exact, length-scale bound error {err:.1e}")
