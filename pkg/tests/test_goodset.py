import math
from fractions import Fraction

import numpy as np
import pytest

from toralab.goodset import (
    GoodSetParamError,
    GoodSetParams,
    bad_values,
    bad_vector_count,
    certify_good_annulus,
    is_bad_vector,
    log_squared_gap,
    q1,
    q2,
    qprime,
    sigma_good_nums,
)
from toralab.lattice import (
    AspectRatio,
    DualVector,
    QValue,
    annulus,
    distinct_spectrum,
    enumerate_up_to,
    inner,
    q_form,
)

A1 = AspectRatio(1, 1)
P3 = GoodSetParams(delta=0.3, epsilon=0.05, margin=0.5)


class TestIsBadVector:
    def test_small_inner_is_bad(self):
        assert is_bad_vector(DualVector(2, 3), DualVector(1, 0), 0.3)

    def test_large_inner_is_not(self):
        assert not is_bad_vector(DualVector(5, 1), DualVector(1, 0), 0.3)

    def test_orthogonal_always_bad(self):
        for k in (1, 2, 7, 30):
            assert is_bad_vector(DualVector(0, k), DualVector(1, 0), 0.3)

    def test_symmetries(self):
        zeta = DualVector(2, 1)
        for xi in enumerate_up_to(60, A1):
            if xi == (0, 0):
                continue
            flag = is_bad_vector(xi, zeta, 0.25)
            assert is_bad_vector(-xi, zeta, 0.25) == flag
            assert is_bad_vector(xi, -zeta, 0.25) == flag


class TestBadVectorCount:
    def test_matches_pointwise_oracle(self):
        zeta = DualVector(1, 0)
        want = sum(1 for v in enumerate_up_to(100, A1)
                   if is_bad_vector(v, zeta, 0.3))
        got = bad_vector_count(zeta, 100, 0.3)
        assert got.count == want

    def test_monotone_in_cutoff(self):
        zeta = DualVector(1, 1)
        counts = [bad_vector_count(zeta, x, 0.2).count for x in (50, 200, 800)]
        assert counts == sorted(counts)

    def test_rejects_zero_zeta(self):
        with pytest.raises(ValueError):
            bad_vector_count(DualVector(0, 0), 100, 0.3)


class TestBadValues:
    def test_examples_with_wide_window(self):
        nums = {v.num for v in bad_values(DualVector(1, 0), 30, P3)}
        assert 9 in nums  # (0,3) sits in the annulus of 9 and is orthogonal
        assert 2 in nums  # (0,1) sits in the annulus of 2

    def test_scan_agrees_with_direct_definition(self):
        params = GoodSetParams(delta=0.22, epsilon=0.05)
        zeta = DualVector(1, 1)
        x = 400.0
        scan = {v.num for v in bad_values(zeta, x, params)}
        direct = set()
        for entry in distinct_spectrum(x, A1).entries:
            n = entry.value
            if n.num == 0:
                if is_bad_vector(DualVector(0, 0), zeta, params.delta):
                    direct.add(0)
                continue
            width = (n.num / n.den) ** params.delta
            for xi in annulus(n, width, A1).members:
                if is_bad_vector(xi, zeta, params.delta):
                    direct.add(n.num)
                    break
        assert scan == direct

    def test_count_bound_fitted_then_validated(self):
        params = GoodSetParams()
        zeta = DualVector(1, 0)
        expo = 0.5 + params.theta + params.delta
        c_fit = len(bad_values(zeta, 1e3, params)) / 1e3 ** expo
        for x in (1e4, 1e5):
            assert len(bad_values(zeta, x, params)) <= c_fit * x ** expo


class TestQ1:
    def test_tiny_values_vacuous(self):
        members = {v.num for v in q1(50, GoodSetParams())}
        assert 0 in members  # no nonzero zeta below 0^epsilon

    def test_density_improves(self):
        params = GoodSetParams()
        d = []
        for x in (1e3, 1e4):
            spec_count = len(distinct_spectrum(x, A1))
            comp = spec_count - len(q1(x, params))
            d.append(comp / spec_count)
        assert d[1] < d[0]


class TestQ2:
    def test_small_gap_in(self):
        res = q2(30, log_squared_gap)
        assert QValue(1, 1) in res.members  # gap to 2 is 1

    def test_all_small_gaps_up_to_1e4(self):
        # only the tiny values 0 and 2 have gaps above log^2(2+n); every
        # value from 4 on stays, so the density tends to 1
        res = q2(1e4, log_squared_gap)
        spec = distinct_spectrum(1e4, A1)
        member_nums = {v.num for v in res.members}
        excluded = [e.value.num for e in spec.entries[:-1]
                    if e.value.num not in member_nums]
        assert excluded == [0, 2]
        assert res.boundary.num == 10000

    def test_zero_gap_fn_gives_empty(self):
        assert q2(100, lambda n: 0.0).members == set()


class TestCertify:
    def test_four_fails_with_exact_witness(self):
        res = certify_good_annulus(QValue(4, 1), P3)
        assert not res.passed
        assert res.margin == 0.0
        assert res.witness == (DualVector(2, 1), DualVector(0, -1))

    def test_smallest_good_value(self):
        # golden: exhaustive upward scan at delta=0.3, epsilon=0.05, c=1/2
        spec = distinct_spectrum(60, A1)
        first = next(e.value.num for e in spec.entries
                     if e.value.num >= 1
                     and certify_good_annulus(e.value, P3).passed)
        assert first == 8

    def test_passing_margins_exceed_c(self):
        for e in distinct_spectrum(120, A1).entries:
            if e.value.num < 1:
                continue
            res = certify_good_annulus(e.value, P3)
            if res.passed:
                assert res.margin >= P3.margin
                assert res.witness is None
            else:
                assert res.margin < P3.margin
                assert res.witness is not None

    def test_requires_unit_value(self):
        with pytest.raises(ValueError):
            certify_good_annulus(QValue(0, 1), P3)


def test_shift_margin_triangle_chain_exact():
    # |q(xi+zeta) - n| >= 2|<xi,zeta>| - |q(xi) - n| - q(zeta), term by term
    rng = np.random.default_rng(3)
    aspect = AspectRatio(3, 2)
    for _ in range(300):
        xi = DualVector(int(rng.integers(-20, 21)), int(rng.integers(-20, 21)))
        zeta = DualVector(int(rng.integers(-4, 5)), int(rng.integers(-4, 5)))
        n = Fraction(int(rng.integers(0, 500)), aspect.den)
        lhs = abs(q_form(xi + zeta, aspect).as_fraction() - n)
        rhs = (2 * abs(inner(xi, zeta, aspect))
               - abs(q_form(xi, aspect).as_fraction() - n)
               - q_form(zeta, aspect).as_fraction())
        assert lhs >= rhs


@pytest.fixture(scope="module")
def report():
    return qprime(2000, GoodSetParams(), A1)


class TestQPrime:
    def test_intersection(self, report):
        for row in report.rows:
            assert row.in_qprime == (row.in_q1 and bool(row.in_q2))

    def test_boundary_has_unknown_gap(self, report):
        assert report.rows[-1].in_q2 is None
        assert not report.rows[-1].in_qprime

    def test_q1_members_pass_certificate(self, report):
        assert report.q1_not_certified == ()

    def test_density_golden(self):
        report = qprime(1e4, GoodSetParams(), A1)
        assert report.qprime_count == 2127
        assert len(report.rows) == 2750
        assert report.qprime_density > 0.5

    def test_complement_below_fitted_curve(self, report):
        params = report.params
        nums = np.array([r.value.num for r in report.rows])
        inq1 = np.array([r.in_q1 for r in report.rows])
        c_fit = (~inq1[nums <= 200]).sum() / 200 ** params.complement_exponent
        comp = (~inq1).sum()
        assert comp <= c_fit * 2000 ** params.complement_exponent


class TestParams:
    def test_defaults_valid(self):
        GoodSetParams().validate()

    def test_delta_window_enforced(self):
        with pytest.raises(GoodSetParamError, match="delta"):
            GoodSetParams(delta=0.3).validate()
        with pytest.raises(GoodSetParamError, match="delta"):
            GoodSetParams(delta=0.1).validate()

    def test_epsilon_window_enforced(self):
        with pytest.raises(GoodSetParamError, match="epsilon"):
            GoodSetParams(epsilon=0.2).validate()

    def test_theta_window_enforced(self):
        with pytest.raises(GoodSetParamError, match="theta"):
            GoodSetParams(theta=0.5).validate()

    def test_margin_window_enforced(self):
        with pytest.raises(GoodSetParamError, match="margin"):
            GoodSetParams(margin=0.0).validate()


def test_sigma_good_nums_starts_at_eight(square):
    spec = distinct_spectrum(120, square)
    good = sorted(sigma_good_nums(spec, GoodSetParams()))
    assert good[:6] == [8, 13, 18, 20, 29, 32]
    assert 4 not in good and 25 not in good
