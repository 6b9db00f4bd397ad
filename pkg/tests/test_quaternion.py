from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckemoney.quaternion import (
    AlgebraParams,
    ParameterError,
    Quaternion,
    conj_trace_norm,
    det,
    gram_matrix,
    maximal_order,
    multiply,
)

N = 11
H = Fraction(1, 2)

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)
quats = st.builds(lambda *c: Quaternion(c, N), small, small, small, small)


def q(*c):
    return Quaternion(c, N)


def test_defining_relations():
    i, J, K = q(0, 1, 0, 0), q(0, 0, 1, 0), q(0, 0, 0, 1)
    assert i * i == q(-1, 0, 0, 0)
    assert J * J == q(-N, 0, 0, 0)
    assert K * K == q(-N, 0, 0, 0)
    assert i * J == K
    assert J * i == -K


def test_half_j_squared():
    x = q(H, 0, H, 0)
    assert multiply(x, x) == q(Fraction(1 - N, 4), 0, H, 0)


def test_square_matches_structure_constants():
    o = maximal_order(N)
    # (1 + J)/2 is the third order basis vector
    prod = o.mul([0, 0, 1, 0], [0, 0, 1, 0])
    assert o.element(prod) == multiply(o.basis[2], o.basis[2])


@pytest.mark.parametrize(
    "x, norm, trace",
    [((1, 1, 0, 0), 2, 1), ((1, 1, 1, 0), 13, 1), ((H, 0, H, 0), 3, H)],
)
def test_conj_trace_norm_examples(x, norm, trace):
    z = q(*x)
    conj, tr, nm = conj_trace_norm(z)
    assert nm == norm and tr == trace
    assert z * conj == q(nm, 0, 0, 0)
    assert (z + conj) / 2 == q(tr, 0, 0, 0)


@settings(max_examples=1000, deadline=None)
@given(quats, quats)
def test_norm_is_multiplicative(x, y):
    assert (x * y).norm() == x.norm() * y.norm()


@settings(max_examples=300, deadline=None)
@given(quats, quats)
def test_conjugation_reverses_products(x, y):
    assert (x * y).conjugate() == y.conjugate() * x.conjugate()


@settings(max_examples=200, deadline=None)
@given(quats, quats, quats)
def test_associative(x, y, z):
    assert (x * y) * z == x * (y * z)


@given(quats)
def test_inverse(x):
    if x:
        assert x * x.inverse() == q(1, 0, 0, 0)


def test_order_gram_determinant():
    o = maximal_order(N)
    assert det(gram_matrix(o.basis)) == N * N
    assert det(o.gram) == N * N


@pytest.mark.parametrize("level", [11, 19, 23, 599])
def test_order_basis_integral(level):
    o = maximal_order(level)
    for b in o.basis:
        assert b.reduced_trace().denominator == 1
        assert b.norm().denominator == 1
    for x in o.basis:
        for y in o.basis:
            assert all(c.denominator == 1 for c in o.coordinates(x * y))


def test_closure_example():
    o = maximal_order(N)
    coords = o.coordinates(o.basis[2] * o.basis[1])
    assert all(c.denominator == 1 for c in coords)


@pytest.mark.parametrize("bad", [13, 7, 9, 15, 2, True, 11.0])
def test_rejects_bad_levels(bad):
    with pytest.raises(ParameterError):
        AlgebraParams(bad)


def test_mixing_levels_fails():
    with pytest.raises(ValueError):
        Quaternion((1, 0, 0, 0), 11) * Quaternion((1, 0, 0, 0), 19)
