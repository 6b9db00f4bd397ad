import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import table_for
from heckemoney.ideals import (
    BOX_CONSTANT,
    ClassGroupTable,
    IdealError,
    LeftIdeal,
    TripleCode,
    canonical_rep,
    enumerate_classes,
    is_canonical_triple,
    p_neighbors,
    triple_decode,
    triple_encode,
    unit_group_order,
)
from heckemoney.lattice import Lattice, index, reduce
from heckemoney.quaternion import maximal_order

UNIT11 = LeftIdeal.unit(11)


def admissible_box(level):
    bound = BOX_CONSTANT * BOX_CONSTANT * level
    d = 1
    while d * d <= bound:
        md = math.isqrt(bound // (d * d))
        for b in range(1, md + 1):
            for a in range(1, b + 1):
                if math.gcd(a, d, b) == 1 and math.gcd(d * b, level) == 1:
                    yield TripleCode(d, a, b)
        d += 1


def test_canonical_rep_of_order():
    rep = canonical_rep(UNIT11)
    assert rep.m == 1
    assert rep.canonical_lattice == reduce(UNIT11.lattice)
    assert rep.integral_form == UNIT11


def test_principal_ideals_collapse():
    assert canonical_rep(UNIT11.right_mul([3, 1, 0, 0])) == canonical_rep(UNIT11)


def test_nonprincipal_neighbor():
    reps = {canonical_rep(J).key for J in p_neighbors(UNIT11, 2)}
    assert len(reps) == 2
    assert canonical_rep(UNIT11).key in reps


def test_enumerate_level_11(table11):
    assert table11.h == 2
    assert sorted(table11.weights) == [4, 6]
    assert table11.mass() == Fraction(10, 24)
    assert enumerate_classes(11) == table11


def test_enumerate_level_23(table23):
    assert table23.h == 3
    assert table23.mass() == Fraction(22, 24)


@pytest.mark.parametrize("level, h", [(11, 2), (19, 2), (23, 3), (31, 3), (43, 4), (47, 5), (59, 6), (67, 6), (71, 7)])
def test_class_numbers_and_mass(level, h):
    table = table_for(level)
    assert table.h == h
    assert table.mass() == Fraction(level - 1, 24)
    assert len({r.key for r in table.reps}) == h
    assert all(w >= 2 and w % 2 == 0 for w in table.weights)
    assert all(r.m <= BOX_CONSTANT * math.sqrt(level) for r in table.reps)
    assert all(math.gcd(r.m, level) == 1 for r in table.reps)


def test_unit_counts_level_11(table11):
    assert unit_group_order(canonical_rep(UNIT11)) == 4
    other = next(r for r in table11.reps if r.m > 1)
    assert unit_group_order(other) == 6


@pytest.mark.parametrize("level", [11, 19, 23])
def test_triple_round_trip(level):
    table = table_for(level)
    for rep in table.reps:
        code = triple_encode(rep)
        ideal = triple_decode(code, level)
        assert canonical_rep(ideal) == rep
        assert ideal == rep.integral_form
        assert is_canonical_triple(code, level)
        assert code.m == rep.m
    assert triple_encode(canonical_rep(LeftIdeal.unit(level))) == TripleCode(1, 1, 1)


def test_nonprincipal_triple_level_11(table11):
    rep = next(r for r in table11.reps if r.m > 1)
    code = triple_encode(rep)
    assert code.m > 1
    assert canonical_rep(triple_decode(code, 11)).key == rep.key


@pytest.mark.parametrize("level", [11, 19, 23])
def test_decoded_ideals_sit_between(level):
    order = Lattice.from_generators(level, [[int(i == j) for j in range(4)] for i in range(4)])
    for code in list(admissible_box(level))[:150]:
        ideal = triple_decode(code, level).lattice
        m = code.m
        assert ideal.contains_lattice(order.scale(m))
        assert index(ideal, order) == m * m


@pytest.mark.parametrize("level", [11, 19, 23])
def test_canonical_triples_count_equals_h(level):
    table = table_for(level)
    canon = [c for c in admissible_box(level) if is_canonical_triple(c, level)]
    assert len(canon) == table.h
    assert sorted(table.locate(triple_decode(c, level).lattice) for c in canon) == list(range(table.h))


def test_principal_multiples_are_rejected(table11):
    principal = table11.position(canonical_rep(UNIT11))
    rejected = 0
    for code in admissible_box(11):
        if code.m > 1 and table11.locate(triple_decode(code, 11).lattice) == principal:
            assert not is_canonical_triple(code, 11)
            rejected += 1
    assert rejected > 0
    assert is_canonical_triple(TripleCode(1, 1, 1), 11)


def test_triple_validation():
    with pytest.raises(IdealError):
        TripleCode(2, 3, 2)
    with pytest.raises(IdealError):
        TripleCode(2, 2, 4)
    with pytest.raises(IdealError):
        TripleCode(0, 1, 1)
    with pytest.raises(IdealError):
        triple_decode(TripleCode(1, 1, 11), 11)
    # gcd(a, d) > 1 but gcd(a, d, b) = 1 is accepted and lifted to a primitive point
    code = TripleCode(2, 2, 3)
    assert not code.coprime
    x, y = code.point()
    assert math.gcd(x, y, code.m) == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=4, max_size=4), st.integers(1, 5))
def test_class_function(num, den):
    if not any(num):
        return
    rep = next(r for r in table_for(23).reps if r.m > 1)
    moved = rep.ideal.lattice.right_mul(num, den)
    assert canonical_rep(moved) == canonical_rep(rep.ideal)


def test_left_ideal_closure_check():
    with pytest.raises(IdealError):
        LeftIdeal(Lattice.from_generators(11, [[1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]]))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_neighbor_indices(table23, p):
    for rep in table23.reps:
        I = rep.integral_form
        nbs = p_neighbors(I, p)
        assert len(nbs) == p + 1
        assert len(set(nbs)) == p + 1
        for J in nbs:
            assert index(J.lattice, I.lattice) == p * p
            assert index(I.lattice.scale(p), J.lattice) == p * p


def test_neighbor_rejects_level():
    with pytest.raises(ValueError):
        p_neighbors(UNIT11, 11)


def test_table_text_round_trip(table23):
    text = table23.dumps()
    assert ClassGroupTable.loads(text) == table23
    with pytest.raises(ValueError):
        ClassGroupTable.loads(text.replace("rule canon-v1", "rule canon-v0"))
    with pytest.raises(ValueError):
        ClassGroupTable.loads("nonsense\n")
