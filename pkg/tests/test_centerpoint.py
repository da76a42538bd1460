import random

import pytest

from ivmeasure import centerpoint as cp
from ivmeasure import ivm_engine as ie
from ivmeasure.cubical_space import TorusGrid
from ivmeasure.ideals import ideal_from_generators, whole, zero_ideal


def test_target_shapes():
    path = cp.FiniteTarget.path(4)
    assert len(path.vertices) == 4 and len(path.cells) == 7 and path.kind == "path"
    cyc = cp.FiniteTarget.cycle(5)
    assert len(cyc.vertices) == 5 and len(cyc.cells) == 10 and cyc.kind == "cycle"
    grid = cp.FiniteTarget.grid(3, 3)
    assert len(grid.vertices) == 9 and len(grid.cells) == 25 and grid.d == 2
    assert cp.FiniteTarget.from_json(grid.to_json()) == grid
    with pytest.raises(cp.CenterpointError):
        cp.FiniteTarget.cycle(2)
    with pytest.raises(cp.CenterpointError):
        cp.FiniteTarget.path(0)


def test_lattice_is_closed_sets():
    t = cp.FiniteTarget.path(3)
    lat = t.lattice()
    assert all(t.closure(z) == z for z in lat)
    # closed subsets of a path with 3 vertices and 2 edges
    assert len(lat) == 13


def test_non_cellwise_map_rejected():
    grid = TorusGrid(1, 4)
    with pytest.raises(cp.CenterpointError):
        cp.map_from_function(grid, cp.FiniteTarget.path(5), lambda v: 2 * v[0])


def _problem(grid, fmap, ideal):
    base = ie.CohomologyMeasure(grid)
    return cp.CenterpointProblem(fmap.target, lambda z: base.value(fmap.preimage(z)), ideal)


def test_constant_map_centerpoint():
    grid = TorusGrid(2, 3)
    target = cp.FiniteTarget.path(4)
    fmap = cp.map_from_function(grid, target, lambda v: 2)
    prob = _problem(grid, fmap, whole(grid.algebra()))
    res = cp.find_centerpoints(prob)
    assert res.status == "protected" and res.power_nonzero
    assert res.points == frozenset({((2, 0),)})
    assert cp.centerpoints_by_enumeration(prob) == res.points
    assert res.stabilization == {((2, 0),): True}


@pytest.mark.parametrize("kind", ["whole", "top", "zero"])
def test_projection_solver_matches_enumeration(kind):
    grid = TorusGrid(2, 4)
    alg = grid.algebra()
    target = cp.FiniteTarget.path(3)
    fmap = cp.map_from_function(grid, target, lambda v: min(v[0], 4 - v[0]))
    ideal = {"whole": whole(alg), "zero": zero_ideal(alg),
             "top": ideal_from_generators(alg, [alg.basis(alg.dim - 1)])}[kind]
    prob = _problem(grid, fmap, ideal)
    res = cp.find_centerpoints(prob)
    assert res.points == cp.centerpoints_by_enumeration(prob)
    # the top class squares to zero, so that ideal gives no guarantee
    assert res.status == ("protected" if kind == "whole" else "unprotected")
    assert res.to_json()["lattice_size"] == len(target.lattice())


def test_gromov_constant_map_has_full_rank():
    grid = TorusGrid(2, 4)
    fmap = cp.map_from_function(grid, cp.FiniteTarget.path(3), lambda v: 1)
    res = cp.gromov_centerpoint(fmap)
    assert res.codim == grid.algebra().dim and res.ok
    assert res.point == ((1, 0),)


def test_gromov_projection_meets_bound():
    grid = TorusGrid(2, 8)
    # fold the circle factor onto a segment
    fmap = cp.map_from_function(grid, cp.FiniteTarget.path(5), lambda v: min(v[0], 8 - v[0]))
    res = cp.gromov_centerpoint(fmap)
    assert cp.rank_bound(grid, 1) == (2, "exact")
    assert res.codim >= 2 and res.ok


def test_gromov_harness_small():
    rep = cp.gromov_harness(count=6, size=8, path_vertices=5, seed=1)
    assert rep.ok and rep.runs == 6


def test_random_lipschitz_map_is_cellwise():
    grid = TorusGrid(2, 6)
    rng = random.Random(5)
    for _ in range(10):
        cp.random_lipschitz_map(grid, cp.FiniteTarget.path(6), rng)
    with pytest.raises(cp.CenterpointError):
        cp.random_lipschitz_map(grid, cp.FiniteTarget.cycle(4), rng)


def test_simplex_constant_and_harness():
    s = cp.SimplexGrid(4)
    assert len(s.vertices) == 15 and len(s.triangles) == 16
    cert = cp.simplex_big_fiber_check(s, {v: 3 for v in s.vertices}, 5)
    assert cert.point == 3 and set(cert.witnesses) == {0, 1, 2}
    rep = cp.simplex_harness(count=20, N=8, levels=6, seed=2)
    assert rep.ok


def test_simplex_rejects_bad_maps():
    s = cp.SimplexGrid(3)
    jump = {v: 2 * v[0] for v in s.vertices}
    with pytest.raises(cp.CenterpointError):
        cp.simplex_big_fiber_check(s, jump, 10)
    with pytest.raises(cp.CenterpointError):
        cp.simplex_big_fiber_check(s, {v: 5 for v in s.vertices}, 3)


def test_segment_cover_two_colors():
    t = cp.FiniteTarget.path(3)
    cover = [cp.open_star(t, [((0, 0),), ((1, 0),)]), cp.open_star(t, [((2, 0),)])]
    ref = cp.refine_cover(t, cover)
    assert ref.colors == 2
    assert cp.verify_refinement(ref, cover)["ok"]


def test_cycle_cover():
    t = cp.FiniteTarget.cycle(3)
    cover = [cp.open_star(t, [((v, 0),)]) for v in range(3)]
    ref = cp.refine_cover(t, cover)
    assert len(ref.pieces) <= 6 and ref.colors == 2
    assert cp.verify_refinement(ref, cover)["ok"]


def test_grid_quadrant_cover_three_colors():
    t = cp.FiniteTarget.grid(3, 3)
    squares = [c for c in t.cells if t.dim(c) == 2]
    cover = [cp.open_star(t, t.closure([sq])) for sq in squares]
    ref = cp.refine_cover(t, cover)
    assert ref.colors == 3
    rep = cp.verify_refinement(ref, cover)
    assert rep == {"colors_ok": True, "disjoint": True, "contained": True, "covers": True, "ok": True}


def test_refinement_rejects_bad_covers():
    t = cp.FiniteTarget.path(3)
    with pytest.raises(cp.CenterpointError, match="not a cover"):
        cp.refine_cover(t, [cp.open_star(t, [((0, 0),)])])
    with pytest.raises(cp.CenterpointError, match="not open"):
        cp.refine_cover(t, [t.whole(), frozenset({((1, 0),)})])


def test_refinement_verifier_catches_wrong_pieces():
    t = cp.FiniteTarget.path(3)
    cover = [cp.open_star(t, [((0, 0),), ((1, 0),)]), cp.open_star(t, [((2, 0),)])]
    ref = cp.refine_cover(t, cover)
    ref.pieces[0].box = ((-20, 40),)
    assert not cp.verify_refinement(ref, cover)["ok"]
