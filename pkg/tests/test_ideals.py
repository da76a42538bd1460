import itertools

import pytest

from ivmeasure.cubical_space import Polyinterval, TorusGrid, restriction_map
from ivmeasure.graded_algebra import AlgebraMorphism, augmentation, product, qh_sphere, torus
from ivmeasure.ideals import (
    GradedIdeal, IdealError, a_slash_r, d_rank, every_nonzero_ideal_contains_top,
    ideal_from_generators, ideal_intersect, ideal_power, ideal_product, ideal_sum,
    kernel_of_morphism, kunneth_rank_witness, lattice_ops, principal, whole, zero_ideal,
)


# ---------------------------------------------------------------------------
# brute-force oracle over F2: elements are bitmasks over the basis


def _mult_table(alg):
    n = alg.dim
    table = [[0] * n for _ in range(n)]
    for i, j in itertools.product(range(n), repeat=2):
        for k, c in alg.mul_basis(i, j).items():
            if c % 2:
                table[i][j] ^= 1 << k
    return table


def _mul(table, x, y):
    out = 0
    for i in range(len(table)):
        if x >> i & 1:
            for j in range(len(table)):
                if y >> j & 1:
                    out ^= table[i][j]
    return out


def _span(vectors):
    out = {0}
    for v in vectors:
        out |= {x ^ v for x in out}
    return frozenset(out)


def _subspaces(coords):
    vecs = [sum(1 << coords[b] for b in range(len(coords)) if s >> b & 1)
            for s in range(1, 1 << len(coords))]
    found = set()
    for k in range(len(coords) + 1):
        for combo in itertools.combinations(vecs, k):
            found.add(_span(combo))
    return found


def oracle_ideals(alg):
    table = _mult_table(alg)
    per_degree = [_subspaces(alg.component(d)) for d in alg.degree_list()]
    out = []
    for choice in itertools.product(*per_degree):
        space = _span([v for sp in choice for v in sp])
        if all(_mul(table, 1 << i, v) in space for i in range(alg.dim) for v in space):
            out.append(space)
    return out


def oracle_slash(alg, ideals, r):
    full = _span([1 << i for i in range(alg.dim)])
    out = full
    for ideal in ideals:
        codim = alg.dim - (len(ideal).bit_length() - 1)
        if codim < r:
            out = out & ideal
    return out


def oracle_power_nonzero(alg, space, d):
    table = _mult_table(alg)
    cur = space
    for _ in range(d - 1):
        cur = _span([_mul(table, x, y) for x in cur for y in space])
    return len(cur) > 1


def as_set(ideal):
    return _span([sum(1 << i for i, c in v.items() if c % 2) for v in ideal.basis()])


# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def t2():
    return torus(2, names=["a", "b"])


def test_generated_ideals(t2):
    assert ideal_from_generators(t2, [{}]).is_zero()
    assert principal(t2, t2.basis("a")) == GradedIdeal.from_vectors(t2, [t2.basis("a"), t2.basis("a^b")])
    s2 = qh_sphere()
    assert principal(s2, s2.basis("h")).is_whole()


def test_non_homogeneous_generator_rejected(t2):
    with pytest.raises(IdealError):
        principal(t2, t2.element({"1": 1, "a": 1}))


def test_lattice_operations(t2):
    a, b = principal(t2, t2.basis("a")), principal(t2, t2.basis("b"))
    top = GradedIdeal.from_vectors(t2, [t2.basis("a^b")])
    assert ideal_sum(a, zero_ideal(t2)) == a
    assert ideal_intersect(a, whole(t2)) == a
    assert ideal_product(a, b) == top
    assert lattice_ops(a, b, "intersect") == top
    assert lattice_ops(a, b, "sum").dim == 3
    assert ideal_power(a, 2).is_zero()
    with pytest.raises(IdealError):
        lattice_ops(a, b, "quotient")


def test_kernels(t2):
    ident = AlgebraMorphism(t2, t2, [t2.basis(i) for i in range(t2.dim)])
    assert kernel_of_morphism(ident).is_zero()
    aug = kernel_of_morphism(augmentation(t2))
    assert aug == GradedIdeal.from_vectors(t2, [t2.basis(i) for i in (1, 2, 3)])


def test_circle_kernel_of_restriction_to_arc():
    grid = TorusGrid(1, 4)
    arc = Polyinterval.of(("closed", 0, 2)).closed_subcomplex(grid)
    res = restriction_map(grid, arc)
    alg = grid.algebra()
    assert res.kernel == GradedIdeal.from_vectors(alg, [alg.basis("x1")])


def test_slash_extremes(t2):
    assert a_slash_r(t2, 1).ideal.is_whole()
    assert a_slash_r(t2, t2.dim + 1).ideal.is_zero()


def test_slash_two_of_t2_is_augmentation_ideal(t2):
    # the only codimension-one graded ideal is the positive-degree part
    res = a_slash_r(t2, 2)
    assert res.status == "exact"
    assert res.ideal == GradedIdeal.from_vectors(t2, [t2.basis(i) for i in (1, 2, 3)])


@pytest.mark.parametrize("n", [2, 3])
def test_slash_matches_brute_force(n):
    alg = torus(n)
    ideals = oracle_ideals(alg)
    for ideal in ideals:
        gens = [{i: 1 for i in alg.component(d) if v >> i & 1} for v in ideal for d in alg.degree_list()]
        got = ideal_from_generators(alg, gens)
        assert as_set(got) == ideal
    for r in range(1, alg.dim + 2):
        assert as_set(a_slash_r(alg, r).ideal) == oracle_slash(alg, ideals, r), r


@pytest.mark.parametrize("n,d", [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
def test_d_rank_matches_brute_force(n, d):
    alg = torus(n)
    ideals = oracle_ideals(alg)
    want = max(r for r in range(1, alg.dim + 1)
               if oracle_power_nonzero(alg, oracle_slash(alg, ideals, r), d))
    rep = d_rank(alg, d)
    assert rep.status == "exact" and rep.value == want


def test_d_rank_values(t2):
    assert d_rank(t2, 2).value == 2
    assert d_rank(qh_sphere(), 3).value >= 1
    with pytest.raises(IdealError):
        d_rank(t2, 0)


def test_d_rank_lower_bound_mode():
    alg = product([torus(2), torus(2)])
    rep = d_rank(alg, 2, mode="lower_bound")
    assert rep.status == "lower_bound" and rep.value == 4


def test_kunneth_witness_two_circles():
    t1a, t1b = torus(1, names=["a"]), torus(1, names=["b"])
    rep = kunneth_rank_witness([t1a, t1b], 2)
    alg = rep.algebra
    assert [alg.format(w) for w in rep.witnesses] == ["a⊗1", "1⊗b"]
    assert alg.format(rep.product) == "a⊗b"
    assert rep.ok and rep.bound == 2


def test_kunneth_witness_single_factor():
    rep = kunneth_rank_witness([torus(1)], 1)
    assert rep.ok and rep.bound == 1


def test_kunneth_witness_torus_pair_spot_check():
    f = torus(2)
    rep = kunneth_rank_witness([f, f], 4, mode="spot-check")
    assert rep.ok and rep.bound == 4
    assert rep.checks["product_is_top"] and rep.checks["witnesses_in_slash"]


def test_top_class_certificate():
    assert every_nonzero_ideal_contains_top(torus(3))
    assert every_nonzero_ideal_contains_top(qh_sphere())


def test_json_round_trip(t2):
    ideal = principal(t2, t2.basis("a"))
    assert GradedIdeal.from_json(t2, ideal.to_json()) == ideal
