"""Divisor sums and Hecke eigenvalues of Eisenstein series.

Ordered factorizations c_1 ... c_r = m are enumerated per prime as weak
compositions of the exponents (never a global divisor scan), so m up to 1e6
with r up to 6 stays fast.
"""

from __future__ import annotations

from typing import Sequence

from .core import Partition, SpectralPoint
from .forms import FormSet, _factorize, hecke_extend

__all__ = [
    "divisor_sigma",
    "eis_hecke_eigenvalue",
    "check_permutation_covariance",
]

COVARIANCE_TOL = 1e-12


def divisor_sigma(s: complex, m: int) -> complex:
    """sigma_s(m) = sum over positive divisors d of m of d^s."""
    if m < 1:
        raise ValueError(f"need a positive integer, got {m}")
    s = complex(s)
    divisors = [1]
    for p, k in _factorize(m).items():
        divisors = [d * p**e for d in divisors for e in range(k + 1)]
    return sum(complex(d) ** s for d in divisors)


def _weak_compositions(total: int, parts: int):
    """All tuples of `parts` non-negative integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def eis_hecke_eigenvalue(partition: Partition, forms: FormSet,
                         s: SpectralPoint, m: int) -> complex:
    """sum over c_1 ... c_r = m of prod_j lambda_{phi_j}(c_j) c_j^{s_j}."""
    forms.check_against(partition)
    if m < 1:
        raise ValueError(f"need a positive integer, got {m}")
    r = partition.r
    total = 1.0 + 0.0j
    # the sum over ordered factorizations is multiplicative in m, so it
    # factors into one compositions-sum per prime
    for p, a in _factorize(m).items():
        weight = [
            [
                hecke_extend(forms.forms[j], p**e) * complex(p) ** (e * s.values[j])
                for e in range(a + 1)
            ]
            for j in range(r)
        ]
        local = 0.0 + 0.0j
        for exps in _weak_compositions(a, r):
            term = 1.0 + 0.0j
            for j in range(r):
                term *= weight[j][exps[j]]
            local += term
        total *= local
    return total


def check_permutation_covariance(partition: Partition, forms: FormSet,
                                 s: SpectralPoint, m: int,
                                 sigma: Sequence[int]) -> tuple[bool, float]:
    """Assert lambda_{sigma P, sigma Phi}(m, sigma s) = lambda_{P, Phi}(m, s).

    Returns (passed, residual).
    """
    left = eis_hecke_eigenvalue(partition, forms, s, m)
    right = eis_hecke_eigenvalue(
        partition.permuted(sigma), forms.permuted(sigma), s.permuted(sigma), m
    )
    residual = abs(left - right)
    scale = max(1.0, abs(left))
    return residual <= COVARIANCE_TOL * scale, residual
