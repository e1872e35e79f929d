"""Eisenstein Hecke eigenvalues (twisted divisor sums)."""

import itertools

import pytest

from eiskit.core import Partition, SpectralPoint
from eiskit.forms import FormSet, const_form, hecke_extend, mock_maass_form
from eiskit.hecke import (
    check_permutation_covariance,
    divisor_sigma,
    eis_hecke_eigenvalue,
)


def _compositions(n):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def _mock_formset(partition, base_seed=1):
    return FormSet(tuple(
        const_form() if nj == 1 else mock_maass_form(nj, base_seed + j)
        for j, nj in enumerate(partition.parts)))


class TestDivisorSigma:
    def test_small_values(self):
        # sigma_s(m) = sum_{d | m} d^s; exact integers at s = 1
        assert divisor_sigma(1, 6) == pytest.approx(12)
        assert divisor_sigma(1, 28) == pytest.approx(56)
        assert divisor_sigma(0, 12) == pytest.approx(6)

    def test_multiplicative(self):
        s = 0.7 + 0.3j
        assert divisor_sigma(s, 35) == pytest.approx(
            divisor_sigma(s, 5) * divisor_sigma(s, 7), rel=1e-12)


class TestEigenvalue:
    def test_m_one_is_one(self):
        p = Partition((1, 1, 1))
        s = SpectralPoint.from_leading(p, [0.5, 0.25])
        assert eis_hecke_eigenvalue(p, _mock_formset(p), s, 1) == 1

    def test_borel_gl2_is_divisor_sum(self):
        # sum_{c d = m} c^{s1} d^{s2} = m^{s2} sigma_{s1 - s2}(m)
        p = Partition((1, 1))
        s = SpectralPoint((0.4, -0.4), p)
        forms = FormSet((const_form(), const_form()))
        for m in (2, 6, 12, 100):
            expect = m ** (-0.4) * divisor_sigma(0.8, m)
            assert eis_hecke_eigenvalue(p, forms, s, m) == pytest.approx(
                expect, rel=1e-12)

    def test_direct_factorization_sum(self):
        # brute force over ordered factorizations c1 c2 = m for P(2,1)
        p = Partition((2, 1))
        phi = mock_maass_form(2, 1)
        forms = FormSet((phi, const_form()))
        s = SpectralPoint.from_leading(p, [0.3 + 0.1j])
        m = 24
        expect = 0j
        for c1 in range(1, m + 1):
            if m % c1:
                continue
            c2 = m // c1
            expect += (hecke_extend(phi, c1) * c1 ** s.values[0]
                       * c2 ** s.values[1])
        assert eis_hecke_eigenvalue(p, forms, s, m) == pytest.approx(
            expect, rel=1e-12)

    def test_multiplicative_in_m(self):
        p = Partition((1, 2))
        forms = _mock_formset(p)
        s = SpectralPoint.from_leading(p, [0.6])
        a = eis_hecke_eigenvalue(p, forms, s, 8)
        b = eis_hecke_eigenvalue(p, forms, s, 9)
        ab = eis_hecke_eigenvalue(p, forms, s, 72)
        assert ab == pytest.approx(a * b, rel=1e-12)

    def test_rejects_nonpositive(self):
        p = Partition((1, 1))
        s = SpectralPoint((0.5, -0.5), p)
        with pytest.raises(ValueError):
            eis_hecke_eigenvalue(p, FormSet((const_form(),) * 2), s, 0)


class TestPermutationCovariance:
    def test_all_partitions_small_n(self):
        # exact covariance for every sigma, every partition of n <= 6
        sample_m = (2, 3, 4, 9, 30, 64, 210, 729, 1000)
        for n in range(2, 7):
            for parts in _compositions(n):
                p = Partition(parts)
                forms = _mock_formset(p)
                s = SpectralPoint.from_leading(
                    p, [0.31 * (j + 1) + 0.07j for j in range(p.r - 1)])
                for sigma in itertools.permutations(range(p.r)):
                    for m in sample_m:
                        passed, residual = check_permutation_covariance(
                            p, forms, s, m, sigma)
                        assert passed, (parts, sigma, m, residual)
