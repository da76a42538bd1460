from fractions import Fraction

import pytest

from ivmeasure import ivm_engine as ie
from ivmeasure.cli import hemisphere_areas
from ivmeasure.cubical_space import AxisInterval, Polyinterval, SphereModel, TorusGrid, coh_ivm_value
from ivmeasure.graded_algebra import qh_sphere, tensor_kunneth
from ivmeasure.ideals import GradedIdeal, ideal_from_generators, whole
from ivmeasure.novikov import F2, QQ


def closed(start, length):
    return AxisInterval("closed", start, length)


FULL = AxisInterval("full")
EMPTY = AxisInterval("empty")


# ---------------------------------------------------------------------------
# sphere


@pytest.fixture(scope="module")
def skewed_sphere():
    areas, hemi = hemisphere_areas(0, "1/15", "1/10")
    return SphereModel(areas), hemi


def test_sphere_disk_values(skewed_sphere):
    model, hemi = skewed_sphere
    meas = ie.SphereIVQM(model)
    small = model.region(hemi)
    big = model.region([f for f in range(12) if f not in hemi])
    assert model.area(small[0]) == Fraction(2, 5) and model.is_disk(small)
    assert model.area(big[0]) == Fraction(3, 5) and model.is_disk(big)
    assert ie.sphere_ivqm_value(model, small).is_zero()
    assert ie.sphere_ivqm_value(model, big).is_whole()
    assert meas.displaceable(small) and not meas.displaceable(big)


def test_sphere_annulus_between_quarter_disks():
    base = SphereModel()
    adj = base.face_adjacency()
    near = {0} | adj[0]
    far = next(g for g in range(12) if not (adj[g] | {g}) & near)
    areas = [Fraction(1, 4) if f in (0, far) else Fraction(1, 20) for f in range(12)]
    model = SphereModel(areas)
    annulus = model.region([f for f in range(12) if f not in (0, far)])
    comps = model.complement_components(annulus)
    assert sorted(model.area(c) for c in comps) == [Fraction(1, 4), Fraction(1, 4)]
    assert ie.sphere_ivqm_value(model, annulus).is_whole()


def test_sphere_suite_on_skewed_model(skewed_sphere):
    model, _ = skewed_sphere
    rep = ie.check_sphere_ivqm(ie.SphereIVQM(model))
    assert rep.ok, rep.to_json()
    assert rep.results["disk values"].checked > 0
    assert rep.results["vanishing"].checked > 0


def test_sphere_cover_by_large_disks_is_not_obstructed(skewed_sphere):
    # the closed complements are disks of area 2/5, which carry value 0
    model, hemi = skewed_sphere
    meas = ie.SphereIVQM(model)
    ring = set(f for f in range(12) if f not in hemi and any(g in hemi for g in model.face_adjacency()[f]))
    first = model.region(hemi)  # complement of an open disk of area 3/5
    second_faces = [f for f in range(12) if f not in hemi and f not in ring]
    second = model.region(second_faces)
    assert model.area(first[0]) < Fraction(1, 2) and model.area(second[0]) < Fraction(1, 2)
    rep = ie.sphere_cover_obstruction(meas, [first, second])
    assert not rep.obstructed


def test_sphere_cover_must_cover():
    meas = ie.SphereIVQM()
    k = meas.model.region([0])
    with pytest.raises(ie.MeasureError):
        ie.sphere_cover_obstruction(meas, [k, k])


# ---------------------------------------------------------------------------
# torus closed form


def test_torus_lagrangian_value():
    for n in (1, 2, 3):
        point = Polyinterval(tuple(closed(0, 0) for _ in range(n)))
        val = ie.torus_ivqm_value(n, point)
        alg = val.algebra
        gen = ie._subset_element(alg, list(range(n)))
        assert val == ideal_from_generators(alg, [gen])
        assert val.dim == 2 ** n


def test_torus_empty_and_band():
    assert ie.torus_ivqm_value(2, Polyinterval((EMPTY, EMPTY))).is_zero()
    val = ie.torus_ivqm_value(2, Polyinterval((closed(0, 2), FULL)))
    alg = val.algebra
    assert val == ideal_from_generators(alg, [alg.basis("p1")])
    assert val.dim == 8


def test_displaceable_box_flag():
    meas = ie.TorusIVQM(1)
    box = ie.TorusBox((closed(0, 1), closed(0, 1)), (4, 4))
    assert box.displaceable() and meas.value(box).is_zero()
    with pytest.raises(ie.MeasureError):
        ie.torus_ivqm_value(1, box)


def test_oracle_gate_small_grid():
    grid = TorusGrid(2, 4)
    opts = [FULL, EMPTY] + [closed(s, L) for s in range(4) for L in range(4)]
    sets = [Polyinterval((a, b)) for a in opts for b in opts]
    rep = ie.torus_oracle_gate(grid, sets)
    assert rep.ok and rep.checked == 18 * 18
    lifted = ie.torus_oracle_gate(grid, sets[:40], lift=True)
    assert lifted.ok


def test_torus_additivity_against_oracle():
    grid = TorusGrid(2, 8)
    a = Polyinterval((closed(0, 1), FULL))
    b = Polyinterval((closed(4, 2), FULL))
    union = a.closed_subcomplex(grid) | b.closed_subcomplex(grid)
    assert ie.torus_oracle_value(grid, union) == ie.torus_ivqm_value(2, a) + ie.torus_ivqm_value(2, b)


def test_torus_over_q_matches_f2_shape():
    val = ie.torus_ivqm_value(1, Polyinterval((closed(0, 0),)), QQ)
    assert val.dim == 2


# ---------------------------------------------------------------------------
# axioms, pushforward, chains


def test_trivial_measure_axioms():
    grid = TorusGrid(2, 3)
    lattice = ie.torus_square_lattice(grid)
    meas = ie.TrivialMeasure(grid.algebra(), lambda s: s.is_full())
    rep = ie.check_axioms(meas, lattice)
    assert rep.ok and rep.kind == "IVM"


def test_axiom_suite_catches_broken_measure():
    grid = TorusGrid(1, 4)
    lattice = ie.torus_square_lattice(grid)
    meas = ie.TrivialMeasure(grid.algebra(), lambda s: not s.is_empty())
    rep = ie.check_axioms(meas, lattice)
    # disjoint nonempty sets: A * A is not inside the value 0 of the intersection
    assert not rep.results["multiplicativity"].passed
    assert not rep.ok


def test_pushforward_identity():
    grid = TorusGrid(2, 3)
    meas = ie.CohomologyMeasure(grid)
    push = ie.pushforward(meas, lambda s: s)
    for s in ie.torus_square_lattice(grid, with_symmetries=False).elements[:60]:
        assert push.value(s) == meas.value(s)


def test_circle_pushforward_is_ivm():
    push = ie.circle_pushforward(ie.TorusIVQM(1), 4)
    assert push.kind == "IVM"
    rep = ie.check_axioms(push, ie.circle_lattice(4))
    assert rep.ok
    alg = push.algebra
    arc = (0b0011, 0b0001)
    assert push.value(arc) == ideal_from_generators(alg, [alg.basis("p1")])


def test_stabilize_chain():
    grid = TorusGrid(2, 4)
    alg = grid.algebra()
    v = coh_ivm_value(grid, Polyinterval((closed(0, 1), FULL)))
    assert ie.stabilize_chain([v, v, v]) == v
    # closed bands inside an open annulus at three grid scales
    values = []
    for m in (4, 8, 16):
        g = TorusGrid(2, m)
        values.append(coh_ivm_value(g, Polyinterval((closed(m // 4, m // 4), FULL))))
    assert ie.stabilize_chain(values) == ideal_from_generators(alg, [alg.basis("x1")])
    growing = [coh_ivm_value(grid, Polyinterval((closed(0, L), FULL))) for L in range(4)]
    growing.append(coh_ivm_value(grid, Polyinterval((FULL, FULL))))
    assert ie.stabilize_chain(growing).is_whole()
    with pytest.raises(ie.MeasureError):
        ie.stabilize_chain([whole(alg), GradedIdeal(alg)])


# ---------------------------------------------------------------------------
# certificates


@pytest.mark.parametrize("n,ground,by_omega,by_vol", [
    (1, F2, True, True), (2, QQ, True, True), (2, F2, False, True), (3, QQ, True, True),
])
def test_meridian_product(n, ground, by_omega, by_vol):
    rep = ie.meridian_product(n, ground)
    assert not rep.product.is_zero()
    assert rep.spanned_by_omega_power == by_omega
    assert rep.spanned_by_volume == by_vol


def test_heavy_criterion():
    rep = ie.meridian_product(1)
    meas = ie.TorusIVQM(1)
    lag = meas.value(ie.TorusBox((closed(0, 0), FULL), (4, 4)))
    assert ie.sh_heavy_and_criterion(lag, lag).rigid_pair is False  # p1 * p1 = 0
    other = meas.value(ie.TorusBox((FULL, closed(0, 0)), (4, 4)))
    crit = ie.sh_heavy_and_criterion(lag, other)
    assert crit.rigid_pair and crit.product == rep.product
    zero = GradedIdeal(lag.algebra)
    assert not ie.sh_heavy_and_criterion(zero, other).rigid_pair


def test_stabilized_meridians():
    rep = ie.stabilized_meridians(1)
    assert rep.contains_top_tensor_all and not rep.product.is_zero()


def test_three_set_cover():
    meas = ie.TorusIVQM(1)
    sizes = (6, 6)
    cover = [ie.TorusBox((AxisInterval("open", 0, 2), FULL), sizes),
             ie.TorusBox((FULL, AxisInterval("open", 0, 3)), sizes),
             ie.TorusBox((AxisInterval("open", 1, 6), AxisInterval("open", 2, 6)), sizes)]
    rep = ie.torus_box_cover_obstruction(meas, cover)
    alg = meas.algebra
    assert rep.values[0] == ideal_from_generators(alg, [alg.basis("p1")])
    assert rep.values[1] == ideal_from_generators(alg, [alg.basis("q1")])
    assert rep.values[2].is_whole()
    assert rep.obstructed and rep.product == GradedIdeal.from_vectors(alg, [alg.basis("p1^q1")])
    with pytest.raises(ie.MeasureError):
        ie.torus_box_cover_obstruction(meas, cover[:2])


def test_cover_by_whole_space():
    meas = ie.TorusIVQM(1)
    rep = ie.torus_box_cover_obstruction(meas, [ie.TorusBox((FULL, FULL), (4, 4))])
    assert not rep.obstructed and rep.product.is_zero()


def test_product_lower_bound():
    meas = ie.TorusIVQM(1)
    s2 = qh_sphere()
    alg = tensor_kunneth(meas.algebra, s2, validate=False)
    lag = meas.value(ie.TorusBox((closed(0, 0), FULL), (4, 4)))
    bound = ie.product_ivqm_lower_bound(alg, lag, s2, True)
    assert bound.dim == lag.dim * s2.dim
    assert ie.product_ivqm_lower_bound(alg, GradedIdeal(meas.algebra), s2, True).is_zero()
    with pytest.raises(ie.MeasureError):
        ie.product_ivqm_lower_bound(alg, lag, s2, False)


@pytest.mark.parametrize("ground,text", [
    (F2, "(T^1)*p1^p2^p3^q1^q2^q3⊗h"),
    (QQ, "(-1*T^1)*p1^p2^p3^q1^q2^q3⊗h"),  # Koszul sign survives in characteristic 0
])
def test_cross_core(ground, text):
    rep = ie.torus_cross_core(ground)
    assert rep.ok
    doc = rep.to_json()
    assert doc["witness"] == text
    assert doc["cube_nonzero"]
