from fractions import Fraction

import pytest

from conftest import table_for
from heckemoney.hecke import brandt_matrix, restrict_and_symmetrize
from heckemoney.oracles import ec_point_count_ap, eta_product_ap, eta_product_coefficients, mass_identity

PRIMES = (2, 3, 5, 7, 13, 17, 19)


def test_eta_product_normalization():
    assert eta_product_coefficients(2) == [0, 1]
    assert eta_product_coefficients(8)[:8] == [0, 1, -2, -1, 2, 1, 2, -2]


@pytest.mark.parametrize("p, a_p", [(2, -2), (3, -1)])
def test_small_coefficients(p, a_p):
    assert eta_product_ap(p) == a_p
    assert ec_point_count_ap(p) == a_p


@pytest.mark.parametrize("p", PRIMES)
def test_dual_oracle_agreement(p):
    assert eta_product_ap(p, 40) == ec_point_count_ap(p)


def test_eta_multiplicativity():
    c = eta_product_coefficients(60)
    assert c[6] == c[2] * c[3]
    assert c[35] == c[5] * c[7]
    # a_{p^2} = a_p^2 - p for good p
    assert c[9] == c[3] ** 2 - 3
    assert c[25] == c[5] ** 2 - 5


def test_oracle_errors():
    with pytest.raises(ValueError):
        ec_point_count_ap(11)
    with pytest.raises(ValueError):
        ec_point_count_ap(10007)
    with pytest.raises(ValueError):
        eta_product_ap(7, 5)


@pytest.mark.parametrize("level, mass", [(11, Fraction(5, 12)), (23, Fraction(11, 12)), (47, Fraction(46, 24))])
def test_mass_identity(level, mass):
    computed, expected = mass_identity(table_for(level))
    assert computed == expected == mass


@pytest.mark.parametrize("p", [2, 3, 5, 7, 13])
def test_brandt_eigenvalue_matches_oracle(table11, p):
    op = restrict_and_symmetrize(brandt_matrix(table11, p), table11.weights)
    value = op.matrix[0, 0]
    assert abs(value - round(value)) < 1e-9
    assert round(value) == eta_product_ap(p) == ec_point_count_ap(p)
