import math

import numpy as np
import pytest

from toralab.lattice import AspectRatio, DualVector, QValue, distinct_spectrum
from toralab.potentials import (
    BumpProfile,
    MissingCoefficientError,
    ScattererConfig,
    scatterer_potential,
    trig_potential,
)
from toralab.solver import (
    TAIL_SUM_C,
    BasisSizeError,
    assemble,
    build_basis,
    eigensolve,
    fourier_bound_check,
    sorted_qvalues,
    tail_sum_bound,
    truncate_eigenfunction,
)

from oracles import brute_tail_sum

A1 = AspectRatio(1, 1)


class TestBasis:
    def test_square_100(self, square):
        basis = build_basis(100, square)
        assert basis.size == 317

    def test_tiny_cutoff(self, square):
        basis = build_basis(0.5, square)
        assert basis.vectors == (DualVector(0, 0),)

    def test_hard_cap(self, square):
        with pytest.raises(BasisSizeError, match="hard cap"):
            build_basis(100, square, hard_cap=100)

    def test_order_matches_enumeration(self, square):
        from toralab.lattice import enumerate_up_to

        basis = build_basis(42, square)
        assert list(basis.vectors) == enumerate_up_to(42, square)


class TestAssemble:
    def test_zero_potential_is_diagonal(self, square):
        basis = build_basis(30, square)
        ham = assemble(trig_potential({}), basis)
        off = ham.matrix - np.diag(np.diag(ham.matrix))
        assert np.all(off == 0)
        assert np.array_equal(np.diag(ham.matrix).real, basis.q_values)

    def test_cosine_convention(self, square):
        # V = 2 cos x: entries are exactly 1 at index differences +-(1,0)
        basis = build_basis(10, square)
        ham = assemble(trig_potential({(1, 0): 1.0, (-1, 0): 1.0}), basis)
        vecs = basis.vectors
        for i, v in enumerate(vecs):
            for j, w in enumerate(vecs):
                d = (v.m - w.m, v.n - w.n)
                if i == j:
                    assert ham.matrix[i, j] == basis.q_values[i]
                elif d in ((1, 0), (-1, 0)):
                    assert ham.matrix[i, j] == 1.0
                else:
                    assert ham.matrix[i, j] == 0.0

    def test_hermitian_bitwise(self, square):
        n = 16
        cfg = ScattererConfig(positions=[[0.21, 0.47], [0.68, 0.11]], scale=math.sqrt(n))
        pot = scatterer_potential(cfg, BumpProfile(2.0, 1.0), 4 * 30.0, square)
        ham = assemble(pot, build_basis(30, square))
        assert np.max(np.abs(ham.matrix - ham.matrix.conj().T)) == 0.0

    def test_missing_coefficient_named(self, square):
        n = 16
        cfg = ScattererConfig(positions=[[0.0, 0.0]], scale=math.sqrt(n))
        pot = scatterer_potential(cfg, BumpProfile(2.0, 1.0), 10.0, square)
        with pytest.raises(MissingCoefficientError, match=r"zeta="):
            assemble(pot, build_basis(30, square))


class TestEigensolve:
    def test_free_laplacian_exact(self, square):
        basis = build_basis(60, square)
        ham = assemble(trig_potential({}), basis)
        pairs = eigensolve(ham, distinct_spectrum(80, square))
        lams = np.array([p.lam for p in pairs])
        assert np.array_equal(lams, np.sort(basis.q_values))
        # coordinate eigenvectors, each ambiguous (lambda on a Laplace value)
        for p in pairs:
            assert p.bracket_ambiguous
            assert not p.in_sigma
            assert np.count_nonzero(p.psi_hat) == 1

    def test_weyl_perturbation(self, cos_run, square):
        basis = cos_run["basis"]
        ham0 = assemble(trig_potential({}), basis)
        free = np.sort(basis.q_values)
        lams = np.array([p.lam for p in cos_run["pairs"]])
        assert np.max(np.abs(lams - free)) <= cos_run["potential"].sum_abs() + 1e-12

    def test_residuals_and_flags(self, cos_run):
        for p in cos_run["pairs"]:
            assert p.residual_ok
            assert p.truncation_safe == (p.lam <= cos_run["basis"].cutoff / 4)

    def test_spectral_completeness(self, cos_run):
        h = cos_run["ham"].matrix
        lams = np.array([p.lam for p in cos_run["pairs"]])
        assert np.sum(lams) == pytest.approx(np.trace(h).real, rel=1e-8)
        assert np.sum(lams ** 2) == pytest.approx(
            np.linalg.norm(h, "fro") ** 2, rel=1e-8)

    def test_orthonormality(self, cos_run):
        u = np.column_stack([p.psi_hat for p in cos_run["pairs"]])
        gram = u.conj().T @ u - np.eye(u.shape[1])
        assert np.max(np.abs(gram)) <= 1e-8

    def test_bracket_consistency(self, cos_run):
        spec = cos_run["spectrum"]
        for p in cos_run["pairs"]:
            if p.bracket_ambiguous or p.n_lo is None:
                continue
            assert p.n_lo.value < p.lam < p.n_hi.value

    def test_determinism(self, square):
        pot = trig_potential({(1, 0): 0.3, (-1, 0): 0.3})
        spec = distinct_spectrum(80, square)
        basis = build_basis(50, square)
        a = eigensolve(assemble(pot, basis), spec)
        b = eigensolve(assemble(pot, basis), spec)
        assert all(x.lam == y.lam for x, y in zip(a, b))
        assert all(np.array_equal(x.psi_hat, y.psi_hat) for x, y in zip(a, b))

    def test_spectrum_coverage_required(self, square):
        basis = build_basis(50, square)
        ham = assemble(trig_potential({}), basis)
        with pytest.raises(ValueError, match="cover"):
            eigensolve(ham, distinct_spectrum(40, square))


class TestTruncation:
    def test_coordinate_vector_no_tail(self, square):
        basis = build_basis(30, square)
        pairs = eigensolve(assemble(trig_potential({}), basis),
                           distinct_spectrum(50, square))
        for p in pairs:
            if p.n_lo is None or p.n_lo.value < 1:
                continue
            for delta in (0.1, 0.3, 0.45):
                assert truncate_eigenfunction(p, delta).tail_mass == 0.0

    def test_mass_split(self, cos_run):
        for p in cos_run["pairs"]:
            if p.n_lo is None or p.n_lo.value < 1:
                continue
            t = truncate_eigenfunction(p, 0.3)
            assert t.inside_mass + t.tail_mass == pytest.approx(1.0, abs=1e-12)

    def test_tail_monotone_in_delta(self, cos_run):
        p = next(q for q in cos_run["pairs"]
                 if q.truncation_safe and q.n_lo is not None and q.n_lo.value >= 4)
        tails = [truncate_eigenfunction(p, d).tail_mass for d in (0.1, 0.25, 0.4)]
        assert tails == sorted(tails, reverse=True)

    def test_tail_below_coefficient_bound_sum(self, cos_run, square):
        # sum over excluded xi of ||V||^2 (q - lambda)^-2 dominates the tail
        v2 = cos_run["potential"].l2_norm ** 2
        qv = cos_run["basis"].q_values
        for p in cos_run["pairs"]:
            if not (p.truncation_safe and p.n_lo is not None and p.n_lo.value >= 1):
                continue
            t = truncate_eigenfunction(p, 0.17)
            outside = ~t.inside
            diff = qv[outside] - p.lam
            assert t.tail_mass <= v2 * float(np.sum(1.0 / diff ** 2)) + 1e-12


class TestFourierBound:
    def test_zero_potential(self, square):
        basis = build_basis(30, square)
        pairs = eigensolve(assemble(trig_potential({}), basis),
                           distinct_spectrum(50, square))
        for p in pairs:
            ratio, ok = fourier_bound_check(p, trig_potential({}))
            assert ratio == 0.0 and ok

    def test_weak_coupling_within_slack(self, cos_run):
        for p in cos_run["pairs"]:
            if p.truncation_safe:
                ratio, ok = fourier_bound_check(p, cos_run["potential"])
                assert ok, f"pair {p.pair_id} ratio {ratio}"

    def test_scaling_homogeneity(self, cos_run):
        p = cos_run["pairs"][10]
        base, _ = fourier_bound_check(p, cos_run["potential"])
        scaled = trig_potential({(1, 0): 0.3, (-1, 0): 0.3})  # t = 3
        got, _ = fourier_bound_check(p, scaled)
        assert got == pytest.approx(base / 9.0, rel=1e-12)


class TestTailSum:
    def test_monotone_in_window(self, square):
        vals = sorted_qvalues(1e5, square)
        sums = [tail_sum_bound(50.5, QValue(50, 1), w, square, values=vals).exact_sum
                for w in (1.0, 2.0, 4.0)]
        assert sums == sorted(sums, reverse=True)

    def test_two_way_enumeration_agreement(self, square):
        lam, window = 50.5, 5.0
        vals = sorted_qvalues(1e4, square)
        diff = vals - lam
        sel = np.abs(diff) >= window
        mine = float(np.sum(1.0 / diff[sel] ** 2))
        brute = brute_tail_sum(lam, window, 1e4)
        assert mine == pytest.approx(brute, rel=1e-6)

    def test_frozen_envelope_holds_on_sample(self, square):
        vals = sorted_qvalues(1.2e6, square)
        rng = np.random.default_rng(0)
        for _ in range(10):
            lam = float(rng.uniform(10, 900)) + 0.5
            window = float(rng.uniform(1.0, 3.0))
            ts = tail_sum_bound(lam, QValue(int(lam), 1), window, square, values=vals)
            assert ts.within_bound
            assert ts.bound == TAIL_SUM_C * (1 / window + int(lam) ** (517 / 1648) / window ** 2)

    def test_remainder_control(self, square):
        ts = tail_sum_bound(100.5, QValue(100, 1), 2.0, square)
        assert math.pi / (ts.enumeration_cutoff - ts.lam) <= 1e-6 * ts.exact_sum

    def test_window_validation(self, square):
        with pytest.raises(ValueError):
            tail_sum_bound(10.0, QValue(10, 1), 0.5, square)
