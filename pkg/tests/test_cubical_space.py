import random
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from ivmeasure.cubical_space import (
    AxisInterval, BudgetError, ModelError, OpenComplement, Polyinterval, SphereModel, TorusGrid,
    all_axis_intervals, build_torus_complex, coh_ivm_value, complement_model, duality_value,
    restriction_map,
)
from ivmeasure.ideals import GradedIdeal


def gf2_rank(mat: np.ndarray) -> int:
    """Dense Gaussian elimination mod 2, independent of the library kernels."""
    m = mat.copy() % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, c]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def oracle_dims(sub):
    """Cohomology dims of a subcomplex from dense face-incidence matrices."""
    g = sub.grid
    cells = [sub.cells(k) for k in range(g.n + 1)]
    index = [{c: i for i, c in enumerate(cs)} for cs in cells]
    ranks = []
    for k in range(g.n):
        mat = np.zeros((len(cells[k + 1]), len(cells[k])), dtype=np.uint8)
        for i, c in enumerate(cells[k + 1]):
            for f in g.faces_of(c):
                mat[i, index[k][f]] ^= 1
        ranks.append(gf2_rank(mat) if mat.size else 0)
    ranks.append(0)
    return [len(cells[k]) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(g.n + 1)]


def random_subcomplex(grid, rng, count):
    cells = [c for cs in grid.cells for c in cs]
    return grid.closure(rng.sample(cells, count))


def test_cell_counts():
    assert build_torus_complex(1, 4).cell_counts() == [4, 4]
    assert build_torus_complex(2, 8).cell_counts() == [64, 128, 64]


@pytest.mark.parametrize("n,m", [(1, 3), (1, 7), (2, 3), (2, 5), (3, 3), (3, 4)])
def test_euler_and_betti(n, m):
    g = build_torus_complex(n, m)
    assert g.euler_characteristic() == 0
    assert g.cohomology_dims() == [comb(n, k) for k in range(n + 1)]
    assert g.cohomology_dims() == oracle_dims(g.full())


def test_point():
    g = TorusGrid(0, [])
    assert g.cohomology_dims() == [1]


def test_budget_and_validation():
    with pytest.raises(ModelError):
        TorusGrid(2, 2)
    with pytest.raises(BudgetError):
        TorusGrid(9, 3)


def test_random_subcomplexes_match_dense_oracle():
    rng = random.Random(7)
    g = TorusGrid(2, 4)
    for _ in range(40):
        sub = random_subcomplex(g, rng, rng.randint(1, 12))
        assert sub.is_closed()
        assert sub.cohomology_dims() == oracle_dims(sub)


def test_restriction_maps():
    g = TorusGrid(2, 4)
    full = restriction_map(g, g.full())
    assert full.kernel.is_zero() and full.rank == 4
    meridian = Polyinterval.of(("closed", 0, 0), "full").closed_subcomplex(g)
    assert restriction_map(g, meridian).rank == 2
    square = Polyinterval.of(("closed", 0, 1), ("closed", 0, 1)).closed_subcomplex(g)
    assert restriction_map(g, square).rank == 1


def test_cohomology_measure_values():
    g = TorusGrid(2, 4)
    alg = g.algebra()
    empty = Polyinterval.of("empty", "empty")
    assert coh_ivm_value(g, empty).is_zero()
    assert coh_ivm_value(g, Polyinterval.of("full", "full")).is_whole()
    annulus = Polyinterval.of(AxisInterval("open", 0, 2), "full")
    want = GradedIdeal.from_vectors(alg, [alg.basis("x1"), alg.basis("x1^x2")])
    assert coh_ivm_value(g, annulus) == want
    box = Polyinterval.of(("closed", 0, 1), ("closed", 0, 1))
    disk = box.closed_subcomplex(g)
    # the disk's complement is a punctured torus: only the top class dies
    assert coh_ivm_value(g, box) == GradedIdeal.from_vectors(alg, [alg.basis("x1^x2")])
    # the punctured torus restricts to a contractible disk: everything positive dies
    punctured = coh_ivm_value(g, OpenComplement(disk))
    assert punctured == GradedIdeal.from_vectors(alg, [alg.basis(i) for i in (1, 2, 3)])


def test_duality_matches_complement_model():
    # two independent routes to ker(H*(X) -> H*(X \ K))
    rng = random.Random(3)
    g = TorusGrid(2, 4)
    compared = 0
    for _ in range(60):
        k = random_subcomplex(g, rng, rng.randint(1, 6))
        try:
            gg, model = complement_model(g, k)
        except ModelError:
            continue
        assert duality_value(g, k) == restriction_map(gg, model).kernel
        compared += 1
    assert compared >= 20


def test_closed_polyintervals_on_3_torus():
    g = TorusGrid(3, 3)
    box = Polyinterval.of(("closed", 0, 1), "full", "full")
    alg = g.algebra()
    got = coh_ivm_value(g, box)
    assert got == duality_value(g, box.closed_subcomplex(g))
    assert {d: k for d, k in got.component_dims().items() if k} == {1: 1, 2: 2, 3: 1}
    assert alg.index("x1") in {i for v in got.basis() for i in v}


def test_axis_intervals():
    assert len(all_axis_intervals(4)) == 2 + 16
    with pytest.raises(ModelError):
        AxisInterval("closed", 0, 4).validate(4)
    with pytest.raises(ModelError):
        Polyinterval.of(("closed", 0, 1), ("open", 0, 1)).kind
    p = Polyinterval.of(("closed", 1, 2), "full")
    assert Polyinterval.from_json(p.to_json()) == p


def test_sphere_model():
    s = SphereModel()
    whole = s.whole()
    assert (len(whole[0]), len(whole[1]), len(whole[2])) == (12, 30, 20)
    assert len(s.rotations) == 60
    assert s.area(range(12)) == 1
    disk = s.region([0])
    assert s.is_disk(disk) and len(s.complement_components(disk)) == 1
    band = s.region([f for f in range(12) if f not in (0,) and f not in s.face_adjacency()[0]
                     and f != _antipode(s, 0)])
    assert len(s.complement_components(band)) == 2
    with pytest.raises(ModelError):
        SphereModel([Fraction(1, 11)] * 12)


def _antipode(s, f):
    adj = s.face_adjacency()
    near = {f} | adj[f]
    return next(g for g in range(12) if not (adj[g] | {g}) & near)
