"""Combinatorial space models and their F2 cohomology.

* :class:`TorusGrid` -- the product cell structure on T^n with a given
  number of edges per circle.  Cochains are Python ints used as bit sets
  (bit i = cell i of the given dimension), so coboundaries are XORs.
* :class:`Polyinterval` and :class:`Subcomplex` -- representable sets.
* :class:`SphereModel` -- the dodecahedral cell structure on S^2 with
  rational face areas summing to 1.

Degree-k cohomology classes of a torus grid are written in the basis of
product cocycles ``e_I`` (I a k-subset of the axes), which matches the
exterior basis of :func:`ivmeasure.graded_algebra.torus`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import _linalg as la
from .graded_algebra import GradedAlgebra, torus
from .ideals import GradedIdeal


class ModelError(ValueError):
    """A set cannot be realized on the given model."""


class BudgetError(RuntimeError):
    """The requested model exceeds the configured size budget."""


MAX_TORUS_DIM = 4
MAX_CELLS = 400_000


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ----------------------------------------------------------------------------
# torus grids


class TorusGrid:
    """Cubical T^n; a cell is a tuple of per-axis pairs (position, extent)."""

    def __init__(self, n: int, subdivisions: int | Sequence[int] = 4):
        if n < 0:
            raise ModelError("dimension must be nonnegative")
        if n > MAX_TORUS_DIM:
            raise BudgetError(f"torus dimension {n} exceeds the budget {MAX_TORUS_DIM}")
        sizes = tuple([subdivisions] * n) if isinstance(subdivisions, int) else tuple(subdivisions)
        if len(sizes) != n:
            raise ModelError("need one subdivision count per axis")
        if any(m < 3 for m in sizes):
            raise ModelError("each axis needs at least 3 edges")
        total = 1
        for m in sizes:
            total *= 2 * m
        if total > MAX_CELLS:
            raise BudgetError(f"{total} cells exceed the budget {MAX_CELLS}")
        self.n = n
        self.sizes = sizes
        self.cells: list[list[tuple]] = [[] for _ in range(n + 1)]
        per_axis = [[(p, e) for e in (0, 1) for p in range(m)] for m in sizes]
        for c in itertools.product(*per_axis):
            self.cells[sum(e for _, e in c)].append(c)
        for k in range(n + 1):
            self.cells[k].sort()
        self.index = [{c: i for i, c in enumerate(cs)} for cs in self.cells]
        self.cofaces: list[list[int]] = []
        for k in range(n):
            nxt = self.index[k + 1]
            rows = []
            for c in self.cells[k]:
                mask = 0
                for a, (p, e) in enumerate(c):
                    if e:
                        continue
                    m = sizes[a]
                    for q in (p, (p - 1) % m):
                        d = c[:a] + ((q, 1),) + c[a + 1:]
                        mask |= 1 << nxt[d]
                rows.append(mask)
            self.cofaces.append(rows)

    def __repr__(self):
        return f"TorusGrid(n={self.n}, sizes={self.sizes})"

    # counts and checks
    def cell_counts(self) -> list[int]:
        return [len(c) for c in self.cells]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(c) for k, c in enumerate(self.cells))

    def check_coboundary(self) -> bool:
        """delta o delta = 0 over F2."""
        for k in range(self.n - 1):
            nxt = self.cofaces[k + 1]
            for mask in self.cofaces[k]:
                acc = 0
                for j in _bits(mask):
                    acc ^= nxt[j]
                if acc:
                    return False
        return True

    def full(self) -> "Subcomplex":
        return Subcomplex(self, [(1 << len(c)) - 1 for c in self.cells])

    def empty(self) -> "Subcomplex":
        return Subcomplex(self, [0] * (self.n + 1))

    # cell geometry
    def vertices_of(self, c: tuple) -> list[tuple]:
        choices = []
        for a, (p, e) in enumerate(c):
            m = self.sizes[a]
            choices.append((p, (p + 1) % m) if e else (p,))
        return [tuple(((q, 0)) for q in v) for v in itertools.product(*choices)]

    def faces_of(self, c: tuple) -> list[tuple]:
        """Codimension-one faces."""
        out = []
        for a, (p, e) in enumerate(c):
            if e:
                m = self.sizes[a]
                for q in (p, (p + 1) % m):
                    out.append(c[:a] + ((q, 0),) + c[a + 1:])
        return out

    def closure(self, cells: Iterable[tuple]) -> "Subcomplex":
        masks = [0] * (self.n + 1)
        stack = list(cells)
        while stack:
            c = stack.pop()
            k = sum(e for _, e in c)
            bit = 1 << self.index[k][c]
            if masks[k] & bit:
                continue
            masks[k] |= bit
            stack.extend(self.faces_of(c))
        return Subcomplex(self, masks)

    # cohomology
    @cached_property
    def subsets(self) -> list[tuple[int, ...]]:
        out = []
        for k in range(self.n + 1):
            out.extend(itertools.combinations(range(self.n), k))
        return out

    def product_cocycle(self, axes: Sequence[int]) -> int:
        """e_I: the cells spanning exactly the axes I, at position 0 on them."""
        axes = set(axes)
        k = len(axes)
        mask = 0
        for i, c in enumerate(self.cells[k]):
            if all((e == 1) == (a in axes) for a, (_, e) in enumerate(c)) and all(
                    c[a][0] == 0 for a in axes):
                mask |= 1 << i
        return mask

    @cached_property
    def _cocycles(self) -> dict[tuple, int]:
        return {s: self.product_cocycle(s) for s in self.subsets}

    def cohomology_dims(self, sub: "Subcomplex | None" = None) -> list[int]:
        sub = sub or self.full()
        return sub.cohomology_dims()

    def algebra(self) -> GradedAlgebra:
        """The exterior algebra H*(T^n; F2) in the product-cocycle basis."""
        return _torus_algebra(self.n)

    def cohomology_basis(self):
        """Distinguished cocycles keyed by algebra label, and the algebra."""
        alg = self.algebra()
        return {alg.labels[i]: self._cocycles[s] for i, s in enumerate(alg.meta["subsets"])}, alg

    def refine(self, factor: int = 2) -> "TorusGrid":
        return TorusGrid(self.n, [m * factor for m in self.sizes])

    def refine_cells(self, c: tuple, factor: int = 2) -> list[tuple]:
        per_axis = []
        for a, (p, e) in enumerate(c):
            if e:
                opts = [(factor * p + t, 1) for t in range(factor)] + [(factor * p + t, 0) for t in range(1, factor)]
            else:
                opts = [(factor * p, 0)]
            per_axis.append(opts)
        return list(itertools.product(*per_axis))


_ALGEBRAS: dict[int, GradedAlgebra] = {}


def _torus_algebra(n: int) -> GradedAlgebra:
    if n not in _ALGEBRAS:
        _ALGEBRAS[n] = torus(n)
    return _ALGEBRAS[n]


def build_torus_complex(n: int, subdivisions: int | Sequence[int] = 4) -> TorusGrid:
    grid = TorusGrid(n, subdivisions)
    if not grid.check_coboundary():
        raise ModelError("coboundary does not square to zero")
    return grid


class Subcomplex:
    """Closed set of cells of a :class:`TorusGrid`, one bit mask per dimension."""

    def __init__(self, grid: TorusGrid, masks: Sequence[int]):
        self.grid = grid
        self.masks = list(masks)

    def __eq__(self, other):
        return isinstance(other, Subcomplex) and other.grid is self.grid and other.masks == self.masks

    def __hash__(self):
        return hash(tuple(self.masks))

    def __or__(self, other):
        return Subcomplex(self.grid, [a | b for a, b in zip(self.masks, other.masks)])

    def __and__(self, other):
        return Subcomplex(self.grid, [a & b for a, b in zip(self.masks, other.masks)])

    def is_empty(self) -> bool:
        return not any(self.masks)

    def is_full(self) -> bool:
        return self.masks == self.grid.full().masks

    def cells(self, k: int) -> list[tuple]:
        cs = self.grid.cells[k]
        return [cs[i] for i in _bits(self.masks[k])]

    def all_cells(self):
        for k in range(self.grid.n + 1):
            yield from self.cells(k)

    def contains_cell(self, c: tuple) -> bool:
        k = sum(e for _, e in c)
        return bool(self.masks[k] >> self.grid.index[k][c] & 1)

    def is_closed(self) -> bool:
        return all(self.contains_cell(f) for c in self.all_cells() for f in self.grid.faces_of(c))

    def vertex_set(self) -> set:
        return set(self.cells(0))

    def coboundary_rows(self, k: int) -> list[int]:
        """Rows of the restricted coboundary C^k(Z) -> C^{k+1}(Z)."""
        zmask = self.masks[k + 1]
        cof = self.grid.cofaces[k]
        return [cof[i] & zmask for i in _bits(self.masks[k])]

    def cohomology_dims(self) -> list[int]:
        n = self.grid.n
        ranks = [la.gf2_rank(self.coboundary_rows(k)) for k in range(n)] + [0]
        out = []
        for k in range(n + 1):
            size = bin(self.masks[k]).count("1")
            out.append(size - ranks[k] - (ranks[k - 1] if k else 0))
        return out

    def is_vertex_full(self) -> bool:
        """For every cell, the vertices lying in this subcomplex span a face
        of that cell which itself lies in the subcomplex (or there are none).
        Under this condition the complement deformation retracts onto the
        cells that avoid every vertex of the subcomplex."""
        g = self.grid
        verts = self.vertex_set()
        if not verts:
            return True
        for k in range(1, g.n + 1):
            for c in g.cells[k]:
                inside = [v for v in g.vertices_of(c) if v in verts]
                if not inside:
                    continue
                face = _span_face(g, c, inside)
                if face is None or not self.contains_cell(face):
                    return False
        return True

    def avoiding_cells(self) -> "Subcomplex":
        """Cells none of whose vertices lie in this subcomplex."""
        g = self.grid
        verts = self.vertex_set()
        masks = [0] * (g.n + 1)
        for k in range(g.n + 1):
            for i, c in enumerate(g.cells[k]):
                if not any(v in verts for v in g.vertices_of(c)):
                    masks[k] |= 1 << i
        return Subcomplex(g, masks)

    def refined(self, fine: TorusGrid, factor: int = 2) -> "Subcomplex":
        masks = [0] * (fine.n + 1)
        for c in self.all_cells():
            for d in self.grid.refine_cells(c, factor):
                k = sum(e for _, e in d)
                masks[k] |= 1 << fine.index[k][d]
        return Subcomplex(fine, masks)


def _span_face(g: TorusGrid, c: tuple, verts: list[tuple]):
    """The face of c whose vertex set is exactly ``verts``, else None."""
    face = []
    for a, (p, e) in enumerate(c):
        coords = {v[a][0] for v in verts}
        if not e or len(coords) == 1:
            face.append((coords.pop(), 0))
        else:
            face.append((p, 1))
    face = tuple(face)
    if sorted(g.vertices_of(face)) != sorted(verts):
        return None
    return face


# ----------------------------------------------------------------------------
# representable sets on the torus


@dataclass(frozen=True)
class AxisInterval:
    """One factor of a polyinterval on a circle with ``m`` edges.

    kind "full" (whole circle), "empty", "closed" (vertices start..start+length,
    length 0 is a point) or "open" (strictly between start and start+length).
    """

    kind: str
    start: int = 0
    length: int = 0

    def validate(self, m: int):
        if self.kind in ("full", "empty"):
            return
        if self.kind == "closed":
            if not 0 <= self.length <= m - 1:
                raise ModelError(f"closed arc length must be in [0, {m - 1}]")
        elif self.kind == "open":
            if not 1 <= self.length <= m:
                raise ModelError(f"open arc length must be in [1, {m}]")
        else:
            raise ModelError(f"unknown interval kind {self.kind!r}")

    def proper_nonempty(self) -> bool:
        return self.kind in ("closed", "open")

    def meets(self, p: int, e: int, m: int) -> bool:
        """Does the cell (p, e) of the circle meet this interval?"""
        if self.kind == "full":
            return True
        if self.kind == "empty":
            return False
        off = (p - self.start) % m
        if self.kind == "closed":
            return off <= self.length or (e and (off + 1) % m <= self.length)
        # open arc: vertex inside, or edge inside the closed hull
        if not e:
            return 0 < off < self.length
        return off < self.length

    def contains_cell(self, p: int, e: int, m: int) -> bool:
        """Is the closed cell (p, e) inside a closed interval?"""
        if self.kind == "full":
            return True
        if self.kind != "closed":
            return False
        off = (p - self.start) % m
        return off <= self.length if not e else off < self.length

    def refined(self, factor: int = 2) -> "AxisInterval":
        if self.kind in ("full", "empty"):
            return self
        return AxisInterval(self.kind, self.start * factor, self.length * factor)

    def to_json(self):
        if self.kind in ("full", "empty"):
            return {"kind": self.kind}
        return {"kind": self.kind, "start": self.start, "length": self.length}

    @classmethod
    def from_json(cls, doc) -> "AxisInterval":
        if isinstance(doc, str):
            return cls(doc)
        return cls(doc["kind"], int(doc.get("start", 0)), int(doc.get("length", 0)))


@dataclass(frozen=True)
class Polyinterval:
    """Product of circle intervals inside a torus grid."""

    axes: tuple

    @classmethod
    def of(cls, *axes) -> "Polyinterval":
        return cls(tuple(a if isinstance(a, AxisInterval)
                         else AxisInterval(a) if isinstance(a, str) else AxisInterval(*a)
                         for a in axes))

    @property
    def kind(self) -> str:
        kinds = {a.kind for a in self.axes}
        if "empty" in kinds:
            return "empty"
        if "closed" in kinds and "open" in kinds:
            raise ModelError("polyinterval mixes open and closed factors")
        return "open" if "open" in kinds else "closed"

    def validate(self, grid: TorusGrid):
        if len(self.axes) != grid.n:
            raise ModelError("polyinterval needs one interval per axis")
        for a, m in zip(self.axes, grid.sizes):
            a.validate(m)
        _ = self.kind

    def proper_axes(self) -> list[int]:
        return [i for i, a in enumerate(self.axes) if a.proper_nonempty()]

    def closed_subcomplex(self, grid: TorusGrid) -> Subcomplex:
        """Cells of a closed polyinterval."""
        masks = [0] * (grid.n + 1)
        for k in range(grid.n + 1):
            for i, c in enumerate(grid.cells[k]):
                if all(a.contains_cell(p, e, m) for a, (p, e), m in zip(self.axes, c, grid.sizes)):
                    masks[k] |= 1 << i
        return Subcomplex(grid, masks)

    def complement_subcomplex(self, grid: TorusGrid) -> Subcomplex:
        """Cells disjoint from an open polyinterval (a closed set)."""
        masks = [0] * (grid.n + 1)
        for k in range(grid.n + 1):
            for i, c in enumerate(grid.cells[k]):
                if not all(a.meets(p, e, m) for a, (p, e), m in zip(self.axes, c, grid.sizes)):
                    masks[k] |= 1 << i
        return Subcomplex(grid, masks)

    def refined(self, factor: int = 2) -> "Polyinterval":
        return Polyinterval(tuple(a.refined(factor) for a in self.axes))

    def to_json(self) -> dict:
        return {"kind": "polyinterval", "axes": [a.to_json() for a in self.axes]}

    @classmethod
    def from_json(cls, doc) -> "Polyinterval":
        return cls(tuple(AxisInterval.from_json(a) for a in doc["axes"]))


def all_axis_intervals(m: int, include_open: bool = False) -> list[AxisInterval]:
    out = [AxisInterval("empty"), AxisInterval("full")]
    for s in range(m):
        for length in range(0, m):
            out.append(AxisInterval("closed", s, length))
    if include_open:
        for s in range(m):
            for length in range(1, m + 1):
                out.append(AxisInterval("open", s, length))
    return out


# ----------------------------------------------------------------------------
# restriction maps and the cohomology measure


@dataclass
class RestrictionMap:
    """Induced map H*(X) -> H*(Z) on F2 cohomology of a torus grid."""

    grid: TorusGrid
    target: Subcomplex
    kernel: GradedIdeal
    ranks: list
    target_dims: list

    @property
    def rank(self) -> int:
        return sum(self.ranks)


def restriction_map(grid: TorusGrid, target: Subcomplex) -> RestrictionMap:
    """Kernel and degree-wise ranks of restriction to a subcomplex."""
    alg = grid.algebra()
    subsets = alg.meta["subsets"]
    by_degree: dict[int, list[int]] = {}
    for idx, s in enumerate(subsets):
        by_degree.setdefault(len(s), []).append(idx)
    cocycles = grid._cocycles
    kernel_vecs = []
    ranks = []
    for k in range(grid.n + 1):
        basis = la.GF2Basis()
        if k:
            for row in target.coboundary_rows(k - 1):
                basis.add(row, 0)
        idxs = by_degree.get(k, [])
        dim_ker = 0
        for bit, idx in enumerate(idxs):
            v = cocycles[subsets[idx]] & target.masks[k]
            res, tag = basis.add(v, 1 << bit)
            if not res:
                dim_ker += 1
                kernel_vecs.append({idxs[b]: 1 for b in _bits(tag)})
        ranks.append(len(idxs) - dim_ker)
    kernel = GradedIdeal.from_vectors(alg, kernel_vecs)
    return RestrictionMap(grid, target, kernel, ranks, target.cohomology_dims())


def complement_model(grid: TorusGrid, compact: Subcomplex, max_refine: int = 2):
    """A subcomplex homotopy equivalent to the complement of ``compact``,
    refining the grid by 2 until the vertex-fullness condition holds.
    Returns (grid, model)."""
    for _ in range(max_refine + 1):
        if compact.is_vertex_full():
            return grid, compact.avoiding_cells()
        fine = grid.refine(2)
        compact = compact.refined(fine)
        grid = fine
    raise ModelError("compact set is not realizable after refinement")


def duality_value(grid: TorusGrid, compact: Subcomplex) -> GradedIdeal:
    """ker(H*(X) -> H*(X \\ K)) through Lefschetz duality: the classes dual
    to the image of H_*(K) -> H_*(X).  Works for every subcomplex K.

    A cycle z of K in degree j contributes the class whose coefficient on
    e_{J^c} is <e_J, z>."""
    alg = grid.algebra()
    pos = {s: i for i, s in enumerate(alg.meta["subsets"])}
    axes = set(range(grid.n))
    cocycles = grid._cocycles
    gens = []
    for j in range(grid.n + 1):
        cells = compact.cells(j)
        if not cells:
            continue
        basis = la.GF2Basis()
        cycles = []
        for c in cells:
            bnd = 0
            if j:
                for f in grid.faces_of(c):
                    bnd ^= 1 << grid.index[j - 1][f]
            res, tag = basis.add(bnd, 1 << grid.index[j][c])
            if not res:
                cycles.append(tag)
        js = [s for s in grid.subsets if len(s) == j]
        for z in cycles:
            vec = {}
            for s in js:
                if bin(cocycles[s] & z).count("1") & 1:
                    vec[pos[tuple(sorted(axes - set(s)))]] = 1
            if vec:
                gens.append(vec)
    return GradedIdeal.from_vectors(alg, gens)


def _as_subcomplex(grid: TorusGrid, s) -> Subcomplex:
    if isinstance(s, Subcomplex):
        return s
    raise ModelError(f"cannot realize {s!r} as a subcomplex")


@dataclass(frozen=True)
class OpenComplement:
    """The open set X \\ K for a closed subcomplex K."""

    closed: Subcomplex


def compact_value(grid: TorusGrid, compact) -> GradedIdeal:
    """Regularized cohomology measure of a compact set:
    ker(H*(X) -> H*(X \\ K)), computed on a complement model."""
    if isinstance(compact, Polyinterval):
        compact.validate(grid)
        if compact.kind == "empty":
            return GradedIdeal(grid.algebra())
        if compact.kind != "closed":
            raise ModelError("expected a closed polyinterval")
        g, sub = grid, compact.closed_subcomplex(grid)
        if not sub.is_vertex_full():
            g = grid.refine(2)
            sub = compact.refined(2).closed_subcomplex(g)
        _, model = complement_model(g, sub)
        return _retag(grid, restriction_map(model.grid, model).kernel)
    sub = _as_subcomplex(grid, compact)
    if sub.is_empty():
        return GradedIdeal(grid.algebra())
    if not sub.is_vertex_full():
        return duality_value(grid, sub)
    return restriction_map(grid, sub.avoiding_cells()).kernel


def open_value(grid: TorusGrid, open_set) -> GradedIdeal:
    """Cohomology measure of an open set: ker(H*(X) -> H*(X \\ U))."""
    if isinstance(open_set, Polyinterval):
        open_set.validate(grid)
        if open_set.kind == "empty":
            return GradedIdeal(grid.algebra())
        if open_set.kind != "open":
            raise ModelError("expected an open polyinterval")
        return restriction_map(grid, open_set.complement_subcomplex(grid)).kernel
    if isinstance(open_set, OpenComplement):
        return restriction_map(grid, open_set.closed).kernel
    raise ModelError(f"cannot realize {open_set!r} as an open set")


def _retag(grid: TorusGrid, ideal: GradedIdeal) -> GradedIdeal:
    # refinements share the algebra object, so nothing to translate
    return ideal


def coh_ivm_value(grid: TorusGrid, model_set) -> GradedIdeal:
    """Cohomology measure of a representable set (compact or open)."""
    if isinstance(model_set, Polyinterval):
        model_set.validate(grid)
        kind = model_set.kind
        if kind == "open":
            return open_value(grid, model_set)
        return compact_value(grid, model_set)
    if isinstance(model_set, OpenComplement):
        return open_value(grid, model_set)
    return compact_value(grid, model_set)


def cohomology_basis(grid: TorusGrid):
    return grid.cohomology_basis()


# ----------------------------------------------------------------------------
# the sphere


class SphereModel:
    """Dodecahedral S^2: 12 pentagonal faces, 30 edges, 20 vertices.

    ``areas`` are nonnegative rationals summing to 1 (default 1/12 each).
    Regions are subcomplexes given as (faces, edges, vertices) frozensets,
    always closed under taking faces.
    """

    def __init__(self, areas: Sequence | None = None):
        import networkx as nx

        g = nx.dodecahedral_graph()
        ok, emb = nx.check_planarity(g)
        if not ok:
            raise ModelError("dodecahedral graph should be planar")
        faces = []
        seen = set()
        for u, v in emb.edges():
            if (u, v) in seen:
                continue
            cyc = emb.traverse_face(u, v, mark_half_edges=seen)
            faces.append(tuple(cyc))
        faces.sort(key=lambda c: sorted(c))
        self.face_cycles = faces
        self.n_faces = len(faces)
        if self.n_faces != 12:
            raise ModelError("unexpected face count")
        self.vertices = sorted(g.nodes())
        self.edges = sorted(tuple(sorted(e)) for e in g.edges())
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        self.face_edges = []
        self.face_vertices = []
        for cyc in faces:
            es = frozenset(self.edge_index[tuple(sorted((cyc[i], cyc[(i + 1) % len(cyc)])))]
                           for i in range(len(cyc)))
            self.face_edges.append(es)
            self.face_vertices.append(frozenset(cyc))
        self.edge_faces = {i: [] for i in range(len(self.edges))}
        for f, es in enumerate(self.face_edges):
            for e in es:
                self.edge_faces[e].append(f)
        if areas is None:
            areas = [Fraction(1, 12)] * 12
        areas = [Fraction(a) for a in areas]
        if len(areas) != 12:
            raise ModelError("need 12 face areas")
        if any(a < 0 for a in areas) or sum(areas) != 1:
            raise ModelError("face areas must be nonnegative and sum to 1")
        self.areas = areas
        self.graph = g
        self.full_mask = (1 << 12) - 1

    # regions
    def region(self, faces: Iterable[int] = (), edges: Iterable[int] = (),
               vertices: Iterable[int] = ()) -> tuple:
        fs = frozenset(faces)
        es = set(edges)
        vs = set(vertices)
        for f in fs:
            es |= self.face_edges[f]
        for e in es:
            vs |= set(self.edges[e])
        return (fs, frozenset(es), frozenset(vs))

    def face_region(self, mask: int) -> tuple:
        return self.region([f for f in range(12) if mask >> f & 1])

    def area(self, faces: Iterable[int]) -> Fraction:
        return sum((self.areas[f] for f in faces), Fraction(0))

    def union(self, a: tuple, b: tuple) -> tuple:
        return (a[0] | b[0], a[1] | b[1], a[2] | b[2])

    def intersection(self, a: tuple, b: tuple) -> tuple:
        return (a[0] & b[0], a[1] & b[1], a[2] & b[2])

    def whole(self) -> tuple:
        return self.region(range(12))

    def components(self, region: tuple) -> list[tuple]:
        """Connected components of a closed region (shared vertices connect)."""
        fs, es, vs = region
        parent = {v: v for v in vs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in es:
            a, b = self.edges[e]
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        groups: dict = {}
        for v in vs:
            groups.setdefault(find(v), set()).add(v)
        out = []
        for vset in groups.values():
            cf = frozenset(f for f in fs if self.face_vertices[f] <= vset)
            ce = frozenset(e for e in es if set(self.edges[e]) <= vset)
            out.append((cf, ce, frozenset(vset)))
        return out

    def complement_components(self, region: tuple) -> list[frozenset]:
        """Components of S^2 minus a closed region, as sets of open faces.

        Faces outside the region are glued across edges outside it; every
        component contains at least one open face."""
        fs, es, _ = region
        outside = [f for f in range(12) if f not in fs]
        parent = {f: f for f in outside}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e, adj in self.edge_faces.items():
            if e in es:
                continue
            a, b = adj
            if a in parent and b in parent:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        groups: dict = {}
        for f in outside:
            groups.setdefault(find(f), set()).add(f)
        return [frozenset(g) for g in groups.values()]

    def boundary(self, region: tuple) -> tuple:
        """Topological boundary of a closed region: lower-dimensional cells
        of the region that touch an outside face, plus cells with no face."""
        fs, es, vs = region
        be = set()
        for e in es:
            adj = self.edge_faces[e]
            if not all(f in fs for f in adj):
                be.add(e)
        bv = set()
        for v in vs:
            around = [f for f in range(12) if v in self.face_vertices[f]]
            if not all(f in fs for f in around):
                bv.add(v)
        return (frozenset(), frozenset(be), frozenset(bv))

    def is_disk(self, region: tuple) -> bool:
        """A nonempty face-union whose faces are edge-connected, whose
        complement is connected, and whose boundary is a single cycle."""
        fs, es, vs = region
        if not fs or len(fs) == 12:
            return False
        if len(self.components(region)) != 1 or len(self.complement_components(region)) != 1:
            return False
        # Euler characteristic 1 for a closed disk
        return len(vs) - len(es) + len(fs) == 1

    # symmetries
    @cached_property
    def rotations(self) -> list[dict]:
        """Orientation-preserving automorphisms (vertex maps) that preserve areas."""
        import networkx as nx

        gm = nx.algorithms.isomorphism.GraphMatcher(self.graph, self.graph)
        cyc_index = {}
        for f, cyc in enumerate(self.face_cycles):
            cyc_index[frozenset(cyc)] = f
        out = []
        for phi in gm.isomorphisms_iter():
            fmap = self.face_map(phi)
            if fmap is None:
                continue
            if any(self.areas[f] != self.areas[fmap[f]] for f in range(12)):
                continue
            # orientation: compare cyclic order of face 0's image
            img = [phi[v] for v in self.face_cycles[0]]
            tgt = list(self.face_cycles[fmap[0]])
            k = tgt.index(img[0])
            rot = tgt[k:] + tgt[:k]
            if rot == img:
                out.append(phi)
        return out

    def face_map(self, phi: dict):
        lookup = {fv: f for f, fv in enumerate(self.face_vertices)}
        out = {}
        for f, fv in enumerate(self.face_vertices):
            img = frozenset(phi[v] for v in fv)
            if img not in lookup:
                return None
            out[f] = lookup[img]
        return out

    def apply(self, phi: dict, region: tuple) -> tuple:
        fmap = self.face_map(phi)
        fs = frozenset(fmap[f] for f in region[0])
        es = frozenset(self.edge_index[tuple(sorted((phi[a], phi[b])))]
                       for a, b in (self.edges[e] for e in region[1]))
        vs = frozenset(phi[v] for v in region[2])
        return (fs, es, vs)

    def face_adjacency(self) -> list[set]:
        adj = [set() for _ in range(12)]
        for e, (a, b) in self.edge_faces.items():
            adj[a].add(b)
            adj[b].add(a)
        return adj
