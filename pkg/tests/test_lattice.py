import json
import math
from fractions import Fraction
from itertools import product as iproduct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soldisk.lattice import (
    FiniteQuotient,
    IntegerLattice,
    LatticeChain,
    LatticeError,
    RationalRep,
    chain_from_json,
    chain_to_json,
    det_int,
    dumps_canonical,
    exact_inverse,
    extend_chain,
    hermite_column_form,
    identity,
    kernel_lattice,
    mat_mul,
    oriented_basis,
    quotient,
    smith_normal_form,
)

F = Fraction


def rep(rows):
    mat = tuple(tuple(F(x) for x in row) for row in rows)
    return RationalRep(len(mat[0]), len(mat), mat)


def is_unimodular(m):
    return abs(det_int(m)) == 1


int_entries = st.integers(min_value=-12, max_value=12)


def matrix_strategy(max_dim=3):
    return st.integers(min_value=1, max_value=max_dim).flatmap(
        lambda n: st.integers(min_value=1, max_value=max_dim).flatmap(
            lambda m: st.lists(
                st.lists(int_entries, min_size=m, max_size=m),
                min_size=n, max_size=n)))


# -- smith normal form --------------------------------------------------------


def test_snf_diag_2_3():
    u, d, v = smith_normal_form([[2, 0], [0, 3]])
    assert d == ((1, 0), (0, 6))
    assert is_unimodular(u) and is_unimodular(v)
    assert mat_mul(mat_mul(u, [[2, 0], [0, 3]]), v) == d


def test_snf_identity():
    u, d, v = smith_normal_form(identity(3))
    assert d == identity(3)


def test_snf_rank_deficient():
    u, d, v = smith_normal_form([[2, 4], [4, 8]])
    assert d == ((2, 0), (0, 0))
    assert is_unimodular(u) and is_unimodular(v)


@settings(max_examples=60, deadline=None)
@given(matrix_strategy())
def test_snf_properties(rows):
    m = tuple(tuple(r) for r in rows)
    u, d, v = smith_normal_form(m)
    assert is_unimodular(u) and is_unimodular(v)
    assert mat_mul(mat_mul(u, m), v) == d
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    for i in range(len(d)):
        for j in range(len(d[0])):
            if i != j:
                assert d[i][j] == 0
    assert all(x >= 0 for x in diag)
    for a, b in zip(diag, diag[1:]):
        if b:
            assert a != 0 and b % a == 0


# -- hermite form and bases ----------------------------------------------------


def test_hermite_orients_and_reduces():
    h = hermite_column_form([[0, 2], [3, 0]])
    assert h == ((2, 0), (0, 3))


def test_hermite_canonical_under_column_ops():
    base = [[4, 1], [0, 6]]
    # same lattice, different generating set
    other = mat_mul(base, [[1, 3], [1, 4]])  # det 1 transform
    assert hermite_column_form(base) == hermite_column_form(other)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(int_entries, min_size=2, max_size=2),
                min_size=2, max_size=2),
       st.integers(min_value=-3, max_value=3),
       st.integers(min_value=-3, max_value=3))
def test_hermite_properties(rows, s, t):
    m = tuple(tuple(r) for r in rows)
    if det_int(m) == 0:
        return
    h = hermite_column_form(m)
    assert det_int(h) == abs(det_int(m))
    uni = ((1, s), (0, 1)) if t % 2 else ((1, 0), (t, 1))
    assert hermite_column_form(mat_mul(m, uni)) == h
    for i in range(2):
        assert h[i][i] > 0
        for j in range(i + 1, 2):
            assert h[i][j] == 0  # lower triangular
        for j in range(i):
            assert 0 <= h[i][j] < h[i][i]


def test_oriented_basis():
    lat = IntegerLattice(2, ((0, 2), (3, 0)))  # det -6
    fixed = oriented_basis(lat)
    assert det_int(fixed.basis) == 6
    lat1 = oriented_basis(IntegerLattice(1, ((-2,),)))
    assert lat1.basis == ((2,),)
    assert oriented_basis(IntegerLattice(2, identity(2))).basis == identity(2)


# -- kernels and quotients -----------------------------------------------------


def test_kernel_half():
    lat = kernel_lattice(rep([[F(1, 2)]]))
    assert lat.basis == ((2,),)


def test_kernel_half_third():
    lat = kernel_lattice(rep([[F(1, 2), F(1, 3)]]))
    assert lat.index() == 6
    assert lat.contains((2, 0)) and lat.contains((0, 3))
    assert not lat.contains((1, 0)) and not lat.contains((0, 1))


def test_kernel_trivial_rep():
    lat = kernel_lattice(rep([[0, 0], [0, 0]]))
    assert lat.index() == 1


def test_quotient_2z_3z():
    q = quotient(IntegerLattice(2, ((2, 0), (0, 3))))
    assert q.invariant_factors == (6,)
    assert q.order == 6


def test_quotient_trivial():
    q = quotient(IntegerLattice(2, identity(2)))
    assert q.order == 1 and q.invariant_factors == ()


def test_quotient_cyclic_6():
    q = quotient(IntegerLattice(1, ((6,),)))
    assert q.order == 6
    assert sorted(q.representatives()) == [(i,) for i in range(6)]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(int_entries, min_size=2, max_size=2),
                min_size=2, max_size=2),
       st.lists(st.integers(min_value=-40, max_value=40), min_size=2, max_size=2))
def test_quotient_reduce_properties(rows, v):
    m = tuple(tuple(r) for r in rows)
    if det_int(m) == 0:
        return
    q = quotient(IntegerLattice(2, m))
    r = q.reduce(v)
    assert q.reduce(r) == r  # idempotent
    shifted = [v[i] + sum(q.basis[i][j] * 3 for j in range(2)) for i in range(2)]
    assert q.reduce(shifted) == r  # class function
    reps = list(q.representatives())
    assert len(reps) == q.order
    assert all(q.reduce(w) == w for w in reps)


def test_kernel_brute_force_oracle():
    # enumerate residues in the lcm box; count of distinct fractional parts
    # must equal the quotient order
    cases = [
        [[F(1, 2), F(1, 3)]],
        [[F(1, 4), F(1, 5)]],
        [[F(2, 3), F(1, 6)]],
        [[F(1, 2), F(0)], [F(0), F(1, 3)]],
        [[F(3, 4), F(1, 2)], [F(1, 3), F(1, 3)]],
    ]
    for rows in cases:
        a = rep(rows)
        q = quotient(kernel_lattice(a))
        n = math.lcm(*(x.denominator for row in rows for x in row))
        seen = set()
        for v in iproduct(range(n), repeat=a.k):
            img = tuple((sum(rows[i][j] * v[j] for j in range(a.k))) % 1
                        for i in range(a.m))
            seen.add(img)
        assert len(seen) == q.order


def test_kernel_columns_integral_nonkernel_not():
    a = rep([[F(1, 4), F(1, 6)]])
    lat = kernel_lattice(a)
    for j in range(lat.rank):
        col = tuple(lat.basis[i][j] for i in range(lat.rank))
        assert a.is_integral_on(col)
    q = quotient(lat)
    import random
    rng = random.Random(0)
    hits = 0
    while hits < 100:
        w = (rng.randrange(-50, 50), rng.randrange(-50, 50))
        if q.is_zero(w):
            continue
        assert not a.is_integral_on(w)
        hits += 1


# -- exact inverse -------------------------------------------------------------


def test_exact_inverse_example():
    inv = exact_inverse([[2, 1], [0, 3]])
    assert inv == ((F(1, 2), F(-1, 6)), (F(0), F(1, 3)))


def test_exact_inverse_identity_product():
    m = ((2, 1), (0, 3))
    prod = mat_mul(m, exact_inverse(m))
    assert prod == ((F(1), F(0)), (F(0), F(1)))


def test_exact_inverse_singular():
    with pytest.raises(LatticeError):
        exact_inverse([[1, 2], [2, 4]])


# -- chains --------------------------------------------------------------------


def chain_from_degrees(ns):
    chain = LatticeChain(1, 1)
    for n in ns:
        chain = extend_chain(chain, rep([[F(1, n)]]))
    return chain


def test_chain_example_values():
    chain = chain_from_degrees([2, 3])
    assert chain.cumulative(2) == ((6,),)
    assert exact_inverse(chain.cumulative(2)) == ((F(1, 6),),)
    assert chain.total_rotation(2, (1,)) == (F(2, 3),)
    chain = extend_chain(chain, rep([[F(1, 4)]]))
    assert chain.total_rotation(3, (1,)) == (F(17, 24),)
    assert det_int(chain.cumulative(3)) == 24
    assert [lvl.group.order for lvl in chain.levels] == [2, 3, 4]


def test_chain_degree_product_invariant():
    chain = chain_from_degrees([2, 3, 4])
    prod = 1
    for lv, level in enumerate(chain.levels, start=1):
        prod *= level.group.order
        assert det_int(chain.cumulative(lv)) == prod


def test_chain_rotation_recurrence():
    chain = chain_from_degrees([2, 5, 3])
    for lv in range(2, 4):
        for g in [(1,), (2,), (-1,)]:
            prev = chain.total_rotation(lv - 1, g)
            step = chain.local_rotation(lv, g)
            cur = chain.total_rotation(lv, g)
            assert tuple(p + s for p, s in zip(prev, step)) == cur


def test_chain_rejects_trivial():
    chain = LatticeChain(1, 1)
    with pytest.raises(LatticeError):
        extend_chain(chain, rep([[0]]))
    with pytest.raises(LatticeError):
        extend_chain(chain, rep([[3]]))  # integral, quotient trivial


def test_chain_k2_level_order_6():
    chain = LatticeChain(2, 1)
    chain = extend_chain(chain, rep([[F(1, 2), F(1, 3)]]))
    assert chain.levels[0].group.order == 6


def test_chain_json_round_trip():
    chain = chain_from_degrees([2, 3, 4])
    doc = chain_to_json(chain)
    text = dumps_canonical(doc)
    again = chain_from_json(json.loads(text))
    assert dumps_canonical(chain_to_json(again)) == text
    assert again.total_rotation(3, (1,)) == (F(17, 24),)


def test_chain_json_rejects_tamper():
    chain = chain_from_degrees([2, 3])
    doc = chain_to_json(chain)
    doc["levels"][1]["cumulative"] = [[7]]
    with pytest.raises(LatticeError):
        chain_from_json(doc)
