"""Centerpoints, big fibers and constructive cover refinements.

Targets are small cell complexes: paths and cycles (dimension 1) and
rectangular grids (dimension 2).  Maps into them are vertex maps whose
images on every cell span a cell; the fiber over a point is the closed star
of the cells whose image contains it.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .cubical_space import ModelError, Subcomplex, TorusGrid, build_torus_complex, restriction_map
from .ideals import GradedIdeal, d_rank, ideal_power


class CenterpointError(ValueError):
    """Invalid target, map or cover."""


# ----------------------------------------------------------------------------
# targets


@dataclass(frozen=True)
class FiniteTarget:
    """Product of path/cycle factors.  Each axis is (edges, wraps); a path
    with L edges has L + 1 vertices, a cycle with m edges has m vertices."""

    axes: tuple

    @classmethod
    def path(cls, vertices: int) -> "FiniteTarget":
        if vertices < 1:
            raise CenterpointError("a path needs at least one vertex")
        return cls(((vertices - 1, False),))

    @classmethod
    def cycle(cls, vertices: int) -> "FiniteTarget":
        if vertices < 3:
            raise CenterpointError("a cycle needs at least three vertices")
        return cls(((vertices, True),))

    @classmethod
    def grid(cls, a: int, b: int) -> "FiniteTarget":
        return cls(((a - 1, False), (b - 1, False)))

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def kind(self) -> str:
        if self.d == 2:
            return "grid"
        return "cycle" if self.axes[0][1] else "path"

    def _axis_cells(self, a: int) -> list[tuple[int, int]]:
        L, wrap = self.axes[a]
        nv = L if wrap else L + 1
        return [(p, 0) for p in range(nv)] + [(p, 1) for p in range(L)]

    @property
    def cells(self) -> list[tuple]:
        return [tuple(c) for c in itertools.product(*[self._axis_cells(a) for a in range(self.d)])]

    @property
    def vertices(self) -> list[tuple]:
        return [c for c in self.cells if all(e == 0 for _, e in c)]

    def dim(self, cell: tuple) -> int:
        return sum(e for _, e in cell)

    def faces(self, cell: tuple) -> list[tuple]:
        """All faces of a cell, including itself."""
        opts = []
        for a, (p, e) in enumerate(cell):
            L, wrap = self.axes[a]
            if e:
                opts.append([(p, 1), (p, 0), ((p + 1) % L if wrap else p + 1, 0)])
            else:
                opts.append([(p, 0)])
        return [tuple(c) for c in itertools.product(*opts)]

    def closure(self, cells: Iterable[tuple]) -> frozenset:
        out = set()
        for c in cells:
            out.update(self.faces(c))
        return frozenset(out)

    def whole(self) -> frozenset:
        return frozenset(self.cells)

    def axis_cell(self, a: int, lo: int, hi: int) -> tuple[int, int]:
        """Smallest cell of axis a containing vertex positions lo..hi."""
        L, wrap = self.axes[a]
        if lo == hi:
            return (lo, 0)
        if wrap:
            if (lo + 1) % L == hi:
                return (lo, 1)
            if (hi + 1) % L == lo:
                return (hi, 1)
        elif hi == lo + 1:
            return (lo, 1)
        raise CenterpointError(f"vertex images {lo}, {hi} do not span a cell (map is not cellwise)")

    def image_cell(self, points: Sequence[tuple]) -> tuple:
        """Smallest cell containing a set of target vertices."""
        out = []
        for a in range(self.d):
            vals = sorted({p[a] for p in points})
            if len(vals) == 1:
                out.append((vals[0], 0))
            elif len(vals) == 2:
                out.append(self.axis_cell(a, vals[0], vals[1]))
            else:
                raise CenterpointError("map is not cellwise: a cell spreads over three vertices")
        return tuple(out)

    def contains_face(self, big: tuple, small: tuple) -> bool:
        return small in self.faces(big)

    def lattice(self) -> list[frozenset]:
        """Closed sets used by the solver: every subcomplex for 1-D targets,
        products of closed sub-intervals for grids."""
        if self.d == 1:
            return list(_all_subcomplexes_1d(self))
        per_axis = []
        for a, (L, wrap) in enumerate(self.axes):
            arcs = [()]
            for s in range(L + 1):
                for t in range(s, L + 1):
                    arcs.append((s, t))
            per_axis.append(arcs)
        out = []
        for combo in itertools.product(*per_axis):
            if any(iv == () for iv in combo):
                out.append(frozenset())
                continue
            cells = [c for c in self.cells
                     if all(_in_interval(p, e, iv) for (p, e), iv in zip(c, combo))]
            out.append(frozenset(cells))
        return list(dict.fromkeys(out))

    def open_star_complement(self, vertex: tuple) -> frozenset:
        """Largest closed subcomplex avoiding a vertex."""
        return frozenset(c for c in self.cells if vertex not in self.faces(c))

    def to_json(self) -> dict:
        return {"kind": self.kind, "axes": [{"edges": L, "wrap": w} for L, w in self.axes]}

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteTarget":
        return cls(tuple((int(a["edges"]), bool(a["wrap"])) for a in doc["axes"]))


def _in_interval(p: int, e: int, iv: tuple) -> bool:
    s, t = iv
    return s <= p <= t if not e else s <= p and p + 1 <= t


def _all_subcomplexes_1d(target: FiniteTarget):
    L, wrap = target.axes[0]
    nv = L if wrap else L + 1
    for vm in range(1 << nv):
        allowed = [i for i in range(L) if vm >> i & 1 and vm >> ((i + 1) % nv if wrap else i + 1) & 1]
        for r in range(len(allowed) + 1):
            for es in itertools.combinations(allowed, r):
                yield frozenset([((v, 0),) for v in range(nv) if vm >> v & 1] + [((i, 1),) for i in es])


# ----------------------------------------------------------------------------
# cellwise maps


@dataclass
class CellwiseMap:
    """Vertex map from a torus grid to a finite target."""

    grid: TorusGrid
    target: FiniteTarget
    images: dict

    def __post_init__(self):
        self._cell_image = {}
        for k in range(self.grid.n + 1):
            for c in self.grid.cells[k]:
                self._cell_image[c] = self.target.image_cell([self.images[v] for v in self.grid.vertices_of(c)])

    def image(self, cell: tuple) -> tuple:
        return self._cell_image[cell]

    def preimage(self, closed: frozenset) -> Subcomplex:
        """Cells whose image cell lies in a closed subcomplex of the target."""
        g = self.grid
        masks = [0] * (g.n + 1)
        for k in range(g.n + 1):
            for i, c in enumerate(g.cells[k]):
                if self._cell_image[c] in closed:
                    masks[k] |= 1 << i
        return Subcomplex(g, masks)

    def fiber(self, cell: tuple) -> Subcomplex:
        """Closed star of the cells whose image contains the given target cell."""
        t = self.target
        hits = [c for c in self._cell_image if t.contains_face(self._cell_image[c], cell)]
        return self.grid.closure(hits)


def torus_vertex_positions(grid: TorusGrid) -> list[tuple]:
    return [tuple(p for p, _ in v) for v in grid.cells[0]]


def map_from_function(grid: TorusGrid, target: FiniteTarget, fn: Callable) -> CellwiseMap:
    """Build a cellwise map from a function of vertex coordinates returning
    a target vertex position (int for 1-D targets, tuple for grids)."""
    images = {}
    for v in grid.cells[0]:
        y = fn(tuple(p for p, _ in v))
        images[v] = y if isinstance(y, tuple) else (int(y),)
    return CellwiseMap(grid, target, images)


def random_lipschitz_map(grid: TorusGrid, target: FiniteTarget, rng: random.Random) -> CellwiseMap:
    """min over a few cones a_k + d_inf(v, p_k), clipped to a path target;
    1-Lipschitz for the sup metric, hence cellwise."""
    if target.kind != "path":
        raise CenterpointError("random maps are generated for path targets")
    top = target.axes[0][0]
    cones = [(rng.randint(0, top), tuple(rng.randrange(m) for m in grid.sizes)) for _ in range(rng.randint(1, 4))]

    def dist(a, b):
        return max(min(abs(x - y), m - abs(x - y)) for x, y, m in zip(a, b, grid.sizes))

    def fn(v):
        return min(top, max(0, min(a + dist(v, p) for a, p in cones)))

    return map_from_function(grid, target, fn)


# ----------------------------------------------------------------------------
# centerpoints


@dataclass
class CenterpointProblem:
    """Measure on a finite target (a callable on closed subcomplexes) and an
    ideal I of its algebra."""

    target: FiniteTarget
    measure: Callable
    ideal: GradedIdeal
    lattice: list | None = None


@dataclass
class CenterpointResult:
    points: frozenset
    status: str
    qualifying: int
    lattice_size: int
    power_nonzero: bool
    stabilization: dict = field(default_factory=dict)

    @property
    def vertices(self) -> list[tuple]:
        return sorted(c for c in self.points if all(e == 0 for _, e in c))

    def to_json(self) -> dict:
        return {"status": self.status, "vertices": [[p for p, _ in v] for v in self.vertices],
                "cells": len(self.points), "qualifying": self.qualifying, "lattice_size": self.lattice_size,
                "power_nonzero": self.power_nonzero,
                "stabilization": {str(k): v for k, v in self.stabilization.items()}}


def find_centerpoints(problem: CenterpointProblem) -> CenterpointResult:
    """Intersection of all lattice sets Z with I contained in nu(Z).

    Status "protected" when I^{d+1} != 0; "unprotected" otherwise (no
    guarantee of nonemptiness); "inconsistent" when a protected problem
    yields an empty set."""
    t = problem.target
    lattice = problem.lattice if problem.lattice is not None else t.lattice()
    power_nonzero = not ideal_power(problem.ideal, t.d + 1).is_zero()
    inter = t.whole()
    count = 0
    for z in lattice:
        if problem.ideal <= problem.measure(z):
            count += 1
            inter = inter & z
    if power_nonzero:
        status = "protected" if inter else "inconsistent"
    else:
        status = "unprotected"
    stab = {}
    for v in sorted(c for c in inter if all(e == 0 for _, e in c)):
        rest = t.open_star_complement(v)
        stab[v] = not problem.ideal <= problem.measure(rest)
    return CenterpointResult(inter, status, count, len(lattice), power_nonzero, stab)


def centerpoints_by_enumeration(problem: CenterpointProblem) -> frozenset:
    """Independent route: a cell is a centerpoint cell iff no qualifying set
    misses it."""
    t = problem.target
    lattice = problem.lattice if problem.lattice is not None else t.lattice()
    qualifying = [z for z in lattice if problem.measure(z).contains_ideal(problem.ideal)]
    return frozenset(c for c in t.cells if all(c in z for z in qualifying))


# ----------------------------------------------------------------------------
# rank bound for big fibers


@dataclass
class GromovResult:
    point: tuple
    codim: int
    ranks: dict
    bound: int
    bound_status: str

    @property
    def ok(self) -> bool:
        return self.codim >= self.bound

    def to_json(self) -> dict:
        return {"point": [p for p, _ in self.point], "codim": self.codim, "bound": self.bound,
                "bound_status": self.bound_status, "ok": self.ok,
                "ranks": {str([p for p, _ in k]): v for k, v in self.ranks.items()}}


_RANK_CACHE: dict = {}


def rank_bound(grid: TorusGrid, d: int) -> tuple[int, str]:
    key = (grid.n, d)
    if key not in _RANK_CACHE:
        rep = d_rank(grid.algebra(), d + 1)
        _RANK_CACHE[key] = (rep.value, rep.status)
    return _RANK_CACHE[key]


def gromov_centerpoint(fmap: CellwiseMap, bound: int | None = None) -> GromovResult:
    """Point maximizing dim A / nu(Y minus y) = rank(H*(X) -> H*(fiber))."""
    grid = fmap.grid
    d = fmap.target.d
    status = "given"
    if bound is None:
        bound, status = rank_bound(grid, d)
    ranks = {}
    for v in fmap.target.vertices:
        ranks[v] = restriction_map(grid, fmap.fiber(v)).rank
    best = max(ranks, key=lambda v: (ranks[v], [-p for p, _ in v]))
    return GromovResult(best, ranks[best], ranks, bound, status)


@dataclass
class HarnessReport:
    runs: int
    failures: list
    details: list

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"runs": self.runs, "failures": self.failures, "ok": self.ok}


def gromov_harness(count: int = 100, size: int = 16, path_vertices: int = 10, seed: int = 0) -> HarnessReport:
    """Random Lipschitz maps T^2 -> path; each must have a fiber with
    restriction rank at least the certified rank bound."""
    grid = build_torus_complex(2, size)
    target = FiniteTarget.path(path_vertices)
    rng = random.Random(seed)
    fails = []
    details = []
    for i in range(count):
        res = gromov_centerpoint(random_lipschitz_map(grid, target, rng))
        details.append((res.point[0][0], res.codim))
        if not res.ok:
            fails.append(i)
    return HarnessReport(count, fails, details)


# ----------------------------------------------------------------------------
# the triangle harness


@dataclass(frozen=True)
class SimplexGrid:
    """Triangulated 2-simplex: vertices (i, j) with i + j <= N."""

    N: int

    @property
    def vertices(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.N + 1) for j in range(self.N + 1 - i)]

    @property
    def triangles(self) -> list[tuple]:
        out = []
        for i, j in self.vertices:
            if i + j + 1 <= self.N:
                out.append(((i, j), (i + 1, j), (i, j + 1)))
            if i + j + 2 <= self.N:
                out.append(((i + 1, j), (i, j + 1), (i + 1, j + 1)))
        return out

    @property
    def edges(self) -> list[tuple]:
        es = set()
        for t in self.triangles:
            for a, b in itertools.combinations(t, 2):
                es.add(tuple(sorted((a, b))))
        return sorted(es)

    def cells(self) -> list[tuple]:
        return [(v,) for v in self.vertices] + self.edges + self.triangles

    def sides(self, v: tuple[int, int]) -> set[int]:
        """Sides containing a vertex: 0 is i = 0, 1 is j = 0, 2 is i + j = N."""
        i, j = v
        out = set()
        if i == 0:
            out.add(0)
        if j == 0:
            out.add(1)
        if i + j == self.N:
            out.add(2)
        return out

    @staticmethod
    def distance(a, b) -> int:
        di, dj = a[0] - b[0], a[1] - b[1]
        return max(abs(di), abs(dj), abs(di + dj))


@dataclass
class SimplexCertificate:
    point: int | None
    witnesses: dict
    status: str

    def to_json(self) -> dict:
        return {"point": self.point, "status": self.status,
                "witnesses": {str(k): list(v) for k, v in self.witnesses.items()}}


def simplex_big_fiber_check(simplex: SimplexGrid, values: dict, levels: int) -> SimplexCertificate:
    """Search a path target 0..levels-1 for a point whose fiber star meets
    every side of the triangle; returns per-side witness vertices."""
    for c in simplex.cells():
        vals = [values[v] for v in c]
        if max(vals) - min(vals) > 1:
            raise CenterpointError("map is not cellwise")
        if not all(0 <= x < levels for x in vals):
            raise CenterpointError("value outside the target")
    for y in range(levels):
        touched: dict = {}
        for c in simplex.cells():
            vals = [values[v] for v in c]
            if min(vals) <= y <= max(vals):
                for v in c:
                    for s in simplex.sides(v):
                        touched.setdefault(s, v)
        if len(touched) == 3:
            return SimplexCertificate(y, touched, "found")
    return SimplexCertificate(None, {}, "not found at this resolution; refine the triangle")


def random_simplex_map(simplex: SimplexGrid, levels: int, rng: random.Random) -> dict:
    cones = [(rng.randint(0, levels - 1), rng.choice(simplex.vertices)) for _ in range(rng.randint(1, 4))]
    return {v: min(levels - 1, max(0, min(a + simplex.distance(v, p) for a, p in cones)))
            for v in simplex.vertices}


def simplex_harness(count: int = 50, N: int = 12, levels: int = 10, seed: int = 0) -> HarnessReport:
    simplex = SimplexGrid(N)
    rng = random.Random(seed)
    fails = []
    details = []
    for i in range(count):
        cert = simplex_big_fiber_check(simplex, random_simplex_map(simplex, levels, rng), levels)
        details.append(cert.point)
        if cert.point is None:
            fails.append(i)
    return HarnessReport(count, fails, details)


# ----------------------------------------------------------------------------
# cover refinement

# Fine coordinates use 12 units per target edge.  Pieces are open boxes:
# vertex pieces |x - v| < 4 on every axis, edge pieces 2 < x < 10 along the
# edge and |y - v| < 2 across it, square pieces 1 < x, y < 11.
_UNIT = 12
_VERTEX = (-4, 4)
_EDGE_ALONG = (2, 10)
_EDGE_ACROSS = (-2, 2)
_FACE = (1, 11)


@dataclass
class Piece:
    color: int
    cell: tuple
    box: tuple
    cover_index: int

    def to_json(self) -> dict:
        return {"color": self.color, "cell": [list(c) for c in self.cell], "box": [list(b) for b in self.box],
                "cover": self.cover_index}


@dataclass
class Refinement:
    target: FiniteTarget
    pieces: list

    @property
    def colors(self) -> int:
        return len({p.color for p in self.pieces})

    def to_json(self) -> dict:
        return {"colors": self.colors, "pieces": [p.to_json() for p in self.pieces]}


def _piece_box(target: FiniteTarget, cell: tuple) -> tuple:
    box = []
    d = target.dim(cell)
    for p, e in cell:
        base = p * _UNIT
        if e:
            lo, hi = _FACE if d == 2 else _EDGE_ALONG
        else:
            lo, hi = _EDGE_ACROSS if d == 1 else _VERTEX
        box.append((base + lo, base + hi))
    return tuple(box)


def _open_cover_check(target: FiniteTarget, cover: Sequence[frozenset]) -> None:
    for i, u in enumerate(cover):
        for c in u:
            for big in target.cells:
                if c in target.faces(big) and big not in u:
                    raise CenterpointError(f"cover element {i} is not open (missing coface {big} of {c})")
    missing = [c for c in target.cells if not any(c in u for u in cover)]
    if missing:
        raise CenterpointError(f"input is not a cover (cell {missing[0]} is missed)")


def refine_cover(target: FiniteTarget, cover: Sequence[Iterable[tuple]]) -> Refinement:
    """Colored refinement of an open cover (each element a set of target
    cells closed under cofaces) into d + 1 classes of disjoint pieces.

    The piece of a cell lies in the open star of that cell, which is inside
    every open cover element containing the cell."""
    cover = [frozenset(u) for u in cover]
    _open_cover_check(target, cover)
    pieces = []
    for c in target.cells:
        idx = next(i for i, u in enumerate(cover) if c in u)
        pieces.append(Piece(target.dim(c), c, _piece_box(target, c), idx))
    return Refinement(target, pieces)


def _fine_axis(L: int, wrap: bool) -> tuple[int, bool]:
    return L * _UNIT, wrap


def _in_open(x: float, iv: tuple, length: int, wrap: bool) -> bool:
    lo, hi = iv
    if wrap:
        return any(lo < x + k * length < hi for k in (-1, 0, 1))
    return lo < x < hi


def _fine_points(target: FiniteTarget) -> list[tuple]:
    """Sample points: every half-unit of the fine grid on each axis."""
    axes = []
    for L, wrap in target.axes:
        n = L * _UNIT
        pts = [x / 2 for x in range(0, 2 * n + (0 if wrap else 1))]
        axes.append(pts)
    return list(itertools.product(*axes))


def _point_cell(target: FiniteTarget, pt: tuple) -> tuple:
    out = []
    for x, (L, wrap) in zip(pt, target.axes):
        q, r = divmod(x, _UNIT)
        q = int(q)
        if r == 0:
            out.append(((q % L) if wrap else q, 0))
        else:
            out.append(((q % L) if wrap else q, 1))
    return tuple(out)


def verify_refinement(ref: Refinement, cover: Sequence[Iterable[tuple]]) -> dict:
    """Check colors, disjointness within a color, containment in the cover
    and covering, by sampling every half fine unit (piece boundaries sit on
    integer fine coordinates, so this sampling decides each property)."""
    t = ref.target
    cover = [frozenset(u) for u in cover]
    pts = _fine_points(t)
    lengths = [(L * _UNIT, w) for L, w in t.axes]

    def inside(piece, pt):
        return all(_in_open(x, iv, n, w) for x, iv, (n, w) in zip(pt, piece.box, lengths))

    ok_colors = ref.colors <= t.d + 1
    disjoint = True
    contained = True
    covered = True
    for pt in pts:
        hit = [p for p in ref.pieces if inside(p, pt)]
        if not hit:
            covered = False
        cols = [p.color for p in hit]
        if len(cols) != len(set(cols)):
            disjoint = False
        cell = _point_cell(t, pt)
        for p in hit:
            if cell not in cover[p.cover_index]:
                contained = False
    return {"colors_ok": ok_colors, "disjoint": disjoint, "contained": contained, "covers": covered,
            "ok": ok_colors and disjoint and contained and covered}


def open_star(target: FiniteTarget, cells: Iterable[tuple]) -> frozenset:
    """Smallest open set containing the given cells."""
    cells = set(cells)
    return frozenset(big for big in target.cells if any(c in target.faces(big) for c in cells))
