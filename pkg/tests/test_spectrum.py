import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hillspps.exceptions import DegenerateError, SeriesBudgetError
from hillspps.spectrum import (ANTIPERIODIC, PERIODIC, band_edges, band_structure, bloch_factors,
                               bloch_solution, eigenvalues, self_matching, self_matching_solution)

from reference_values import MATHIEU_BOUNDARY, MATHIEU_CHARACTERISTIC, PUBLISHED_SPPS


def values(eigs):
    return np.array([e.value for e in eigs])


class TestEigenvalues:
    def test_mathieu_r1(self, r1):
        eigs = eigenvalues(r1.series_, 11)
        np.testing.assert_allclose(values(eigs), MATHIEU_CHARACTERISTIC[1], atol=1e-6)
        assert eigs[4].value == pytest.approx(4.371299, abs=1e-4)

    def test_mathieu_r5(self, r5):
        eigs = eigenvalues(r5.series_, 11)
        np.testing.assert_allclose(values(eigs), MATHIEU_CHARACTERISTIC[5], atol=1e-7)
        np.testing.assert_allclose(values(eigs)[:5], PUBLISHED_SPPS[5][:5], atol=1e-3)

    def test_free(self, free):
        eigs = eigenvalues(free.series_, 5)
        np.testing.assert_allclose(values(eigs), [0, 1, 1, 4, 4], atol=1e-9)
        assert [e.boundary for e in eigs] == [PERIODIC, ANTIPERIODIC, ANTIPERIODIC, PERIODIC, PERIODIC]

    @pytest.mark.parametrize("name", ["r1", "r5"])
    def test_label_pattern(self, name, request):
        eigs = eigenvalues(request.getfixturevalue(name).series_, 11)
        assert [e.boundary for e in eigs] == MATHIEU_BOUNDARY
        assert [e.index for e in eigs] == list(range(11))

    @pytest.mark.parametrize("name", ["free", "r1", "r5"])
    def test_ordering_and_residual(self, name, request):
        est = request.getfixturevalue(name)
        eigs = eigenvalues(est.series_, 11)
        v = values(eigs)
        assert np.all(np.diff(v) >= 0)
        assert v[0] < v[1]
        for e in eigs:
            assert abs(est.series_(e.value) - e.level) <= 1e-6

    def test_budget_truncation(self, r1):
        with pytest.raises(SeriesBudgetError, match="truncation insufficient") as info:
            eigenvalues(r1.series_, 500)
        partial = info.value.partial
        assert 11 < len(partial) < 500
        np.testing.assert_allclose(values(partial[:11]), MATHIEU_CHARACTERISTIC[1], atol=1e-6)

    def test_count_validated(self, r1):
        with pytest.raises(ValueError):
            eigenvalues(r1.series_, 0)


class TestBandStructure:
    def test_free(self, free):
        bands = band_structure(free.series_, -1, 5)
        assert len(bands.unstable_intervals) == 1
        lo, hi = bands.unstable_intervals[0]
        assert lo == -1 and hi == pytest.approx(0, abs=1e-9)
        # closed gaps at 1 and 4 leave touching stable pieces covering [0, 5]
        stable = bands.stable_intervals
        assert stable[0][0] == pytest.approx(0, abs=1e-9) and stable[-1][1] == 5
        assert all(a[1] == b[0] for a, b in zip(stable, stable[1:]))

    def test_mathieu_r1_first_band_and_gap(self, r1):
        bands = band_structure(r1.series_, -1, 2)
        a0, b1, a1 = MATHIEU_CHARACTERISTIC[1][:3]
        # D falls from +2 to -2 between a_0 and b_1: that is a stability band
        (s_lo, s_hi), (t_lo, t_hi) = bands.stable_intervals
        assert s_lo == pytest.approx(a0, abs=1e-8) and s_hi == pytest.approx(b1, abs=1e-8)
        assert t_lo == pytest.approx(a1, abs=1e-8) and t_hi == 2
        gaps = bands.unstable_intervals
        assert gaps[0] == (-1.0, pytest.approx(a0, abs=1e-8))
        assert gaps[1][0] == pytest.approx(b1, abs=1e-8) and gaps[1][1] == pytest.approx(a1, abs=1e-8)

    def test_partition(self, r1):
        bands = band_structure(r1.series_, -1, 26)
        pieces = sorted(bands.stable_intervals + bands.unstable_intervals)
        assert pieces[0][0] == -1 and pieces[-1][1] == 26
        assert all(a[1] == b[0] for a, b in zip(pieces, pieces[1:]))
        for lo, hi in bands.stable_intervals:
            assert abs(r1.series_(0.5 * (lo + hi))) <= 2
        for lo, hi in bands.unstable_intervals:
            assert abs(r1.series_(0.5 * (lo + hi))) > 2
        assert len(bands.edges) == 11

    def test_edges_separate_band_from_gap(self, r5):
        bands = band_structure(r5.series_, -7, 26)
        stable_ends = {x for iv in bands.stable_intervals for x in iv}
        unstable_ends = {x for iv in bands.unstable_intervals for x in iv}
        for e in bands.edges:
            assert e.value in stable_ends
            assert e.value in unstable_ends or sum(e.value in iv for iv in bands.stable_intervals) == 2

    def test_empty_range(self, r1):
        with pytest.raises(ValueError):
            band_structure(r1.series_, 1.0, 1.0)

    def test_band_edges_labels(self, r1):
        edges = band_edges(r1.series_, -1, 5)
        assert [b for _, b in edges] == MATHIEU_BOUNDARY[:5]


class TestBlochFactors:
    def test_edges(self):
        assert bloch_factors(2.0) == (1, 1)
        assert bloch_factors(-2.0) == (-1, -1)

    def test_zero(self):
        bp, bm = bloch_factors(0.0)
        assert bp == pytest.approx(-1j) and bm == pytest.approx(1j)

    @given(st.floats(-1e3, 1e3))
    def test_product_is_one(self, d):
        bp, bm = bloch_factors(d)
        assert abs(bp * bm - 1) <= 1e-9 * max(1, abs(d))
        if abs(d) <= 2:
            assert abs(abs(bp) - 1) <= 1e-9 and abs(abs(bm) - 1) <= 1e-9
        else:
            assert bp.imag == 0 and bm.imag == 0 and abs(bp) < 1 < abs(bm)

    @given(st.floats(-2, 2))
    def test_band_branch(self, d):
        bp, bm = bloch_factors(d)
        assert bm.imag >= 0 and bp == pytest.approx(bm.conjugate())


class TestSelfMatching:
    def test_free_quarter(self, free):
        data, _ = free.bloch(0.25)
        assert data.beta_plus == pytest.approx(-1j, abs=1e-9)
        assert data.beta_minus == pytest.approx(1j, abs=1e-9)

    def test_free_below_spectrum(self, free):
        data, _ = free.bloch(-1.0)
        bp, bm = data.beta_plus, data.beta_minus
        assert bp.imag == 0 and bm.imag == 0
        assert abs(bp) < 1 < abs(bm)
        assert bp * bm == pytest.approx(1, abs=1e-9)
        assert bp + bm == pytest.approx(2 * np.cosh(np.pi), rel=1e-10)

    def test_at_ground_state(self, r1):
        data, pair = r1.bloch(r1.lambda0_)
        assert data.alpha_plus == pytest.approx(data.alpha_minus, abs=1e-5)
        assert data.beta_plus == pytest.approx(1, abs=1e-5)
        F = self_matching_solution(data, pair).real
        f0 = r1.f0_.values.astype(float)
        np.testing.assert_allclose(F, f0 / f0[0], atol=1e-6)

    def test_degenerate(self, free):
        # f2(T) = sin(pi) = 0 at lambda = 1 (coexistence of periodic solutions)
        with pytest.raises(DegenerateError, match="degenerate quadratic"):
            free.bloch(1.0)

    def test_ratio_check(self, r5):
        pair = r5.solutions(5.0)
        data = self_matching(pair, r5.problem_)
        for alpha, beta in ((data.alpha_plus, data.beta_plus), (data.alpha_minus, data.beta_minus)):
            F = pair.f1.values.astype(complex) + alpha * pair.f2.values.astype(complex)
            assert F[-1] / F[0] == pytest.approx(beta, rel=1e-8)

    @pytest.mark.parametrize("name", ["r1", "r5"])
    def test_unimodular_at_eigenvalues(self, name, request):
        est = request.getfixturevalue(name)
        for e in est.eigenvalues(11):
            bp, bm = bloch_factors(est.series_(e.value))
            assert abs(abs(bp) - 1) <= 1e-6 and abs(abs(bm) - 1) <= 1e-6


class TestBlochSolution:
    def test_first_period(self, r1):
        data, pair = r1.bloch(2.5)
        F = self_matching_solution(data, pair, "+")
        x = pair.grid.nodes[:-1]
        np.testing.assert_allclose(bloch_solution(data, pair, x, "+"), F[:-1], rtol=0, atol=1e-14)

    def test_shift_by_period(self, r1):
        data, pair = r1.bloch(2.5)
        T = pair.grid.period
        x0 = np.array([0.1, 1.0, 2.9])
        for branch, beta in (("+", data.beta_plus), ("-", data.beta_minus)):
            np.testing.assert_allclose(bloch_solution(data, pair, x0 + T, branch),
                                       beta * bloch_solution(data, pair, x0, branch), atol=1e-12)

    def test_periodic_at_ground_state(self, r5):
        data, pair = r5.bloch(r5.lambda0_)
        T = pair.grid.period
        x = np.linspace(0, T, 13)[:-1]
        np.testing.assert_allclose(np.abs(bloch_solution(data, pair, x + 2 * T)),
                                   np.abs(bloch_solution(data, pair, x)), rtol=1e-6)

    def test_quasiperiodic_in_bands(self, r5, rng):
        bands = r5.band_structure(-7, 26)
        lo, hi = max(bands.stable_intervals, key=lambda iv: iv[1] - iv[0])
        T = r5.problem_.period
        for lam in rng.uniform(lo, hi, 10):
            data, pair = r5.bloch(lam)
            x = rng.uniform(0, 3 * T, 10)
            for branch, beta in (("+", data.beta_plus), ("-", data.beta_minus)):
                F = self_matching_solution(data, pair, branch)
                diff = bloch_solution(data, pair, x + T, branch) - beta * bloch_solution(data, pair, x, branch)
                assert np.max(np.abs(diff)) <= 1e-6 * np.max(np.abs(F))

    def test_free_unit_modulus(self, free):
        data, pair = free.bloch(0.25)
        x = np.linspace(0, 9.42, 500)
        # f+ = exp(-i x / 2): constant modulus
        mod = np.abs(bloch_solution(data, pair, x, "+"))
        assert np.max(np.abs(mod - 1)) <= 1e-6

    def test_bad_branch(self, r1):
        data, pair = r1.bloch(2.5)
        with pytest.raises(ValueError):
            bloch_solution(data, pair, 1.0, "x")
