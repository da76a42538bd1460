import itertools

import pytest

from ivmeasure.graded_algebra import (
    AlgebraError, AlgebraMorphism, GradedAlgebra, augmentation, binomial_dims, build_algebra,
    cpn, exterior_algebra, product, qh_sphere, qh_torus, regrade_mod, standard_model, swap_map,
    tensor_kunneth, torus,
)
from ivmeasure.novikov import F2, QQ, NovikovField, NovikovScalar

T2_DOC = {
    "ring": {"kind": "F2"},
    "basis": [{"label": "1", "degree": 0}, {"label": "a", "degree": 1},
              {"label": "b", "degree": 1}, {"label": "ab", "degree": 2}],
    "unit": "1",
    "products": [{"i": "a", "j": "b", "k": "ab"}],
}


def test_exterior_one_generator():
    alg = exterior_algebra(["a"])
    assert alg.dim == 2
    assert alg.mul(alg.basis("a"), alg.basis("a")) == {}


def test_build_torus2_from_schema():
    alg = build_algebra(T2_DOC)
    a, b = alg.basis("a"), alg.basis("b")
    assert alg.mul(a, b) == alg.basis("ab")
    assert alg.mul(b, a) == alg.basis("ab")  # sign -1 = +1 over F2
    assert alg.mul(a, a) == {} and alg.mul(b, b) == {}


def test_build_over_q_completes_skew_sign():
    doc = dict(T2_DOC, ring={"kind": "Q"})
    alg = build_algebra(doc)
    assert alg.mul(alg.basis("b"), alg.basis("a")) == {alg.index("ab"): -1}


def test_build_rejects_inconsistent_data():
    bad = dict(T2_DOC, products=[{"i": "a", "j": "b", "k": "a"}])
    with pytest.raises(AlgebraError, match="degree additivity"):
        build_algebra(bad)
    quadratic = {
        "ring": {"kind": "F2"},
        "basis": [{"label": "1", "degree": 0}, {"label": "x", "degree": 0}],
        "products": [{"i": "x", "j": "x", "k": "1"}, {"i": "x", "j": "x", "k": "x"}],
    }
    build_algebra(quadratic)  # x^2 = 1 + x is associative and commutative
    with pytest.raises(AlgebraError):
        build_algebra(dict(T2_DOC, modulus=3))
    nonassoc = {
        "ring": {"kind": "F2"},
        "basis": [{"label": "1", "degree": 0}, {"label": "x", "degree": 0},
                  {"label": "y", "degree": 0}],
        "products": [{"i": "x", "j": "x", "k": "y"}, {"i": "x", "j": "y", "k": "x"}],
    }
    with pytest.raises(AlgebraError, match="associativity"):
        build_algebra(nonassoc)


def test_qh_sphere():
    alg = qh_sphere()
    assert alg.labels == ["1", "h"] and alg.modulus == 4
    h = alg.basis("h")
    t = NovikovScalar.monomial(F2, 1, 1)
    assert alg.mul(h, h) == {0: t}
    assert alg.power(h, 3) == {1: t}


def test_regrade():
    s2 = cpn(1)
    r = regrade_mod(s2, 4)
    assert sorted(set(r.degrees)) == [0, 2] and r.modulus == 4
    assert regrade_mod(s2, 0) is s2
    t3 = regrade_mod(torus(3), 2)
    assert t3.component_dims() == {0: 4, 1: 4}
    with pytest.raises(AlgebraError):
        regrade_mod(s2, 3)


def test_tensor_with_ground_is_identity():
    t2 = torus(2)
    ground = GradedAlgebra(F2, ["1"], [0], 0, {(0, 0): {0: 1}})
    out = tensor_kunneth(t2, ground)
    assert out.dim == t2.dim
    for i, j in itertools.product(range(t2.dim), repeat=2):
        assert out.mul_basis(i, j) == t2.mul_basis(i, j)


@pytest.mark.parametrize("ring", [F2, QQ])
def test_tensor_of_circles_is_torus(ring):
    t1 = torus(1, ring)
    prod = tensor_kunneth(t1, t1)
    t2 = torus(2, ring)
    # product basis order: 1⊗1, 1⊗x1, x1⊗1, x1⊗x1 maps to 1, x2, x1, x1^x2
    relabel = {0: 0, 1: 2, 2: 1, 3: 3}
    for i, j in itertools.product(range(4), repeat=2):
        got = {relabel[k]: c for k, c in prod.mul_basis(i, j).items()}
        assert got == t2.mul_basis(relabel[i], relabel[j])


def test_qh_torus6_times_sphere():
    t6, s2 = qh_torus(6), qh_sphere()
    alg = tensor_kunneth(t6, s2)
    alpha = t6.index("p1^q1")
    beta = t6.index("p2^q2")
    ab = t6.index("p1^p2^q1^q2")
    x = alg.basis(alpha * 2 + 1)
    y = alg.basis(beta * 2 + 1)
    assert alg.mul(x, y) == {ab * 2: NovikovScalar.monomial(F2, 1, 1)}


def test_cpn_and_torus_models():
    c2 = cpn(2)
    assert [len(c2.component(d)) for d in range(5)] == [1, 0, 1, 0, 1]
    assert c2.power(c2.basis("h"), 3) == {}
    t3 = torus(3)
    assert t3.dim == 8
    assert [len(t3.component(d)) for d in range(4)] == binomial_dims(3) == [1, 3, 3, 1]


def test_standard_model_dispatch():
    alg = standard_model("product", factors=[{"name": "torus", "n": 2}, {"name": "torus", "n": 2}])
    assert alg.dim == 16
    with pytest.raises(AlgebraError):
        standard_model("klein")


def test_product_swap_is_multiplicative_over_q():
    a, b = torus(1, QQ, ["x"]), torus(2, QQ, ["y", "z"])
    ab, ba = tensor_kunneth(a, b), tensor_kunneth(b, a)
    swap = swap_map(a, b)
    for i, j in itertools.product(range(ab.dim), repeat=2):
        lhs = swap(ab.mul(ab.basis(i), ab.basis(j)))
        rhs = ba.mul(swap(ab.basis(i)), swap(ab.basis(j)))
        assert lhs == rhs


def test_json_round_trip():
    alg = torus(2, QQ)
    again = build_algebra(alg.to_json())
    assert again.products == alg.products and again.labels == alg.labels


def test_morphism_checks():
    t2 = torus(2)
    aug = augmentation(t2)
    assert aug.apply(t2.basis("x1")) == {}
    with pytest.raises(AlgebraError):
        AlgebraMorphism(t2, t2, [t2.basis(0)] * 4)


def test_base_change_to_novikov():
    alg = torus(2).base_change(NovikovField(F2))
    alg.validate()
    assert alg.mul(alg.basis("x1"), alg.basis("x2")) == alg.basis("x1^x2")


def test_product_validates_sampled():
    alg = product([torus(3), torus(3)])
    assert alg.dim == 64
