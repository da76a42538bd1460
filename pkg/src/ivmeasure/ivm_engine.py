"""Ideal-valued measures and quasi-measures on the model spaces.

Concrete measures:

* :class:`TrivialMeasure` -- 0 on proper subsets, A on the whole space.
* :class:`CohomologyMeasure` -- ker(H*(X) -> H*(X minus the set)) on torus grids.
* :class:`SphereIVQM` -- the quantum cohomology quasi-measure on S^2,
  evaluated by the complementary-area rule on the dodecahedral model.
* :class:`TorusIVQM` -- the quasi-measure on T^{2n} for products of circle
  intervals, in closed form, cross-checked against the cubical kernel.
* :class:`PushforwardMeasure` -- value of the preimage.

Measures are evaluated on compact sets (the regularized extension); open
sets are handled through their closed complements where needed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import graded_algebra as ga
from .cubical_space import (AxisInterval, ModelError, Polyinterval, SphereModel, Subcomplex,
                            TorusGrid, build_torus_complex, coh_ivm_value, compact_value)
from .graded_algebra import GradedAlgebra
from .ideals import GradedIdeal, ideal_from_generators, ideal_power, ideal_product, whole
from .novikov import F2, GroundField, NovikovScalar


class MeasureError(ValueError):
    """Invalid input to a measure or one of its certificates."""


class OracleMismatch(AssertionError):
    """Closed-form values disagree with the cubical oracle."""


# ----------------------------------------------------------------------------
# measures


class Measure:
    """Base class: ``value`` maps a compact model set to a graded ideal."""

    algebra: GradedAlgebra
    kind = "IVM"
    name = "measure"

    def value(self, s) -> GradedIdeal:
        raise NotImplementedError

    def zero(self) -> GradedIdeal:
        return GradedIdeal(self.algebra)

    def whole(self) -> GradedIdeal:
        return whole(self.algebra)


class TrivialMeasure(Measure):
    """mu = 0 on every proper subset, A on the whole (connected) space."""

    kind = "IVM"
    name = "trivial"

    def __init__(self, algebra: GradedAlgebra, is_whole: Callable):
        self.algebra = algebra
        self.is_whole = is_whole

    def value(self, s) -> GradedIdeal:
        return self.whole() if self.is_whole(s) else self.zero()


class CohomologyMeasure(Measure):
    """The cohomology measure of a torus grid with F2 coefficients."""

    kind = "IVM"
    name = "cohomology"

    def __init__(self, grid: TorusGrid):
        self.grid = grid
        self.algebra = grid.algebra()
        self._memo: dict = {}

    def value(self, s) -> GradedIdeal:
        key = tuple(s.masks) if isinstance(s, Subcomplex) else s
        if key not in self._memo:
            self._memo[key] = coh_ivm_value(self.grid, s)
        return self._memo[key]


class PushforwardMeasure(Measure):
    """f_* mu (V) = mu(f^{-1} V)."""

    def __init__(self, base: Measure, preimage: Callable, name: str = "pushforward", kind: str | None = None):
        self.base = base
        self.preimage = preimage
        self.algebra = base.algebra
        self.kind = kind or base.kind
        self.name = name

    def value(self, s) -> GradedIdeal:
        return self.base.value(self.preimage(s))


def pushforward(measure: Measure, preimage: Callable, name: str = "pushforward",
                kind: str | None = None) -> PushforwardMeasure:
    return PushforwardMeasure(measure, preimage, name, kind)


# ----------------------------------------------------------------------------
# the sphere


class SphereIVQM(Measure):
    """Quantum cohomology quasi-measure on the dodecahedral sphere.

    For a connected closed region Q the value is 0 when some component of
    the complement has area > 1/2 (then Q lies in a disk of area < 1/2)
    and the whole algebra otherwise; values of disconnected regions add up.
    """

    kind = "IVQM"
    name = "sphere"

    def __init__(self, model: SphereModel | None = None, ground: GroundField = F2):
        self.model = model or SphereModel()
        self.algebra = ga.qh_sphere(ground)
        self._memo: dict = {}

    def heavy(self, region: tuple) -> bool:
        """True when the value is the whole algebra."""
        key = region
        if key in self._memo:
            return self._memo[key]
        half = Fraction(1, 2)
        m = self.model
        out = False
        for comp in m.components(region):
            if all(m.area(c) <= half for c in m.complement_components(comp)):
                out = True
                break
        self._memo[key] = out
        return out

    def value(self, region: tuple) -> GradedIdeal:
        return self.whole() if self.heavy(region) else self.zero()

    def open_heavy(self, closed_complement: tuple) -> bool:
        """Value on the open set S^2 minus a closed region: A when some
        component has every complementary component of area < 1/2."""
        m = self.model
        half = Fraction(1, 2)
        fs, es, vs = closed_complement
        for comp_faces in m.complement_components(closed_complement):
            # closed complement of this open component
            inner_edges = {e for e, adj in m.edge_faces.items()
                           if e not in es and all(f in comp_faces for f in adj)}
            inner_vertices = {v for v in m.vertices if v not in vs and all(
                f in comp_faces for f in range(12) if v in m.face_vertices[f])}
            rest = (frozenset(f for f in range(12) if f not in comp_faces),
                    frozenset(e for e in range(len(m.edges)) if e not in inner_edges),
                    frozenset(v for v in m.vertices if v not in inner_vertices))
            parts = m.components(rest)
            if all(m.area(p[0]) < half for p in parts):
                return True
        return False

    def open_value(self, closed_complement: tuple) -> GradedIdeal:
        return self.whole() if self.open_heavy(closed_complement) else self.zero()

    def displaceable(self, region: tuple) -> bool:
        """Model flag: a closed disk of area < 1/2 is displaceable (a
        rotation carries it into the complementary disk of larger area)."""
        return self.model.is_disk(region) and self.model.area(region[0]) < Fraction(1, 2)


def sphere_ivqm_value(model: SphereModel, region: tuple, ground: GroundField = F2) -> GradedIdeal:
    return SphereIVQM(model, ground).value(region)


# ----------------------------------------------------------------------------
# the torus


def _complement_interval(a: AxisInterval, m: int) -> AxisInterval:
    if a.kind == "full":
        return AxisInterval("empty")
    if a.kind == "empty":
        return AxisInterval("full")
    if a.kind == "closed":
        return AxisInterval("open", (a.start + a.length) % m, m - a.length)
    return AxisInterval("closed", (a.start + a.length) % m, m - a.length)


@dataclass(frozen=True)
class TorusBox:
    """Product of circle intervals in T^{2n} with coordinates ordered
    p1..pn, q1..qn; ``sizes`` are the edge counts of the circles."""

    axes: tuple
    sizes: tuple

    @property
    def n(self) -> int:
        return len(self.axes) // 2

    @property
    def kind(self) -> str:
        return Polyinterval(self.axes).kind

    @classmethod
    def from_polyinterval(cls, s: Polyinterval, sizes: Sequence[int], coords: Sequence[str] | None = None):
        """S x T^n, with S living in the circle coordinates ``coords``
        (default p1..pn)."""
        n = len(s.axes)
        names = [f"p{i + 1}" for i in range(n)] + [f"q{i + 1}" for i in range(n)]
        coords = list(coords) if coords is not None else names[:n]
        if len(coords) != n:
            raise MeasureError("need one coordinate per interval")
        pos = [names.index(c) for c in coords]
        taken = {p % n for p in pos}
        if len(taken) != n:
            raise MeasureError("coordinates must not contain a conjugate pair")
        axes = [AxisInterval("full")] * (2 * n)
        for p, a in zip(pos, s.axes):
            axes[p] = a
        sz = list(sizes) if len(sizes) == 2 * n else list(sizes) * 2
        return cls(tuple(axes), tuple(sz))

    def validate(self):
        for a, m in zip(self.axes, self.sizes):
            a.validate(m)
        _ = self.kind

    def proper(self) -> list[int]:
        return [i for i, a in enumerate(self.axes) if a.proper_nonempty()]

    def is_lagrangian_product(self) -> bool:
        """No conjugate pair (p_i, q_i) is constrained."""
        n = self.n
        prop = set(self.proper())
        return all(not (i in prop and i + n in prop) for i in range(n))

    def displaceable(self) -> bool:
        """Model flag: if both p_i and q_i are proper intervals, the set lies
        in (arc x arc) x T^{2n-2}, and a cut-off Hamiltonian translating
        along p_i displaces it."""
        return self.kind != "empty" and not self.is_lagrangian_product()

    def complement(self) -> "TorusBox":
        """Closure-complement for boxes with at most one proper axis."""
        prop = self.proper()
        if len(prop) > 1:
            raise ModelError("complement of a box with several proper axes is not a box")
        if not prop:
            if self.kind == "empty":
                return TorusBox(tuple(AxisInterval("full") for _ in self.axes), self.sizes)
            return TorusBox(tuple(AxisInterval("empty") for _ in self.axes), self.sizes)
        i = prop[0]
        axes = list(self.axes)
        axes[i] = _complement_interval(axes[i], self.sizes[i])
        return TorusBox(tuple(axes), self.sizes)

    def meets_cell(self, cell: tuple) -> bool:
        return all(a.meets(p, e, m) for a, (p, e), m in zip(self.axes, cell, self.sizes))

    def to_json(self) -> dict:
        return {"kind": "torus_box", "axes": [a.to_json() for a in self.axes], "sizes": list(self.sizes)}

    @classmethod
    def from_json(cls, doc) -> "TorusBox":
        return cls(tuple(AxisInterval.from_json(a) for a in doc["axes"]), tuple(doc["sizes"]))


_QH_TORUS: dict = {}


def _qh_torus(two_n: int, ground: GroundField) -> GradedAlgebra:
    key = (two_n, ground)
    if key not in _QH_TORUS:
        _QH_TORUS[key] = ga.qh_torus(two_n, ground)
    return _QH_TORUS[key]


def _subset_element(alg: GradedAlgebra, gens: Sequence[int]) -> dict:
    pos = {s: i for i, s in enumerate(alg.meta["subsets"])}
    return alg.basis(pos[tuple(sorted(gens))])


def torus_ivqm_value(n: int, s, ground: GroundField = F2, coords: Sequence[str] | None = None,
                     sizes: Sequence[int] | None = None) -> GradedIdeal:
    """Closed form on T^{2n}: the ideal generated by the wedge of the
    generators of the constrained coordinates; 0 for the empty set.

    ``s`` is a :class:`TorusBox` or a polyinterval S (then the set is S x T^n
    in the coordinates ``coords``)."""
    alg = _qh_torus(2 * n, ground)
    if isinstance(s, Polyinterval):
        s = TorusBox.from_polyinterval(s, sizes or [4] * n, coords)
    if not isinstance(s, TorusBox):
        raise MeasureError("expected a polyinterval or a torus box")
    if len(s.axes) != 2 * n:
        raise MeasureError("box dimension does not match the torus")
    s.validate()
    if s.kind == "empty":
        return GradedIdeal(alg)
    if not s.is_lagrangian_product():
        raise MeasureError("closed form needs a Lagrangian product set; this one is flagged displaceable")
    return ideal_from_generators(alg, [_subset_element(alg, s.proper())])


def torus_oracle_value(grid: TorusGrid, s: Polyinterval | Subcomplex, ground: GroundField = F2) -> GradedIdeal:
    """Cubical route: ker(H*(T^n) -> H*(T^n minus S)) tensored with the
    q-factor, expressed inside QH*(T^{2n})."""
    n = grid.n
    kernel = coh_ivm_value(grid, s)
    alg = _qh_torus(2 * n, ground)
    small = grid.algebra()
    gens = []
    for v in kernel.basis():
        elt = {}
        for i in v:
            idx = next(iter(_subset_element(alg, small.meta["subsets"][i])))
            elt[idx] = alg.ring.one()
        gens.append(elt)
    return ideal_from_generators(alg, gens)


def torus_closed_form_small(grid: TorusGrid, s: Polyinterval) -> GradedIdeal:
    """The closed form restricted to the p-factor, inside H*(T^n; F2)."""
    alg = grid.algebra()
    s.validate(grid)
    if s.kind == "empty":
        return GradedIdeal(alg)
    return ideal_from_generators(alg, [_subset_element(alg, s.proper_axes())])


@dataclass
class GateReport:
    checked: int
    mismatches: list
    grid: str

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {"checked": self.checked, "mismatches": self.mismatches[:10], "grid": self.grid, "ok": self.ok}


def torus_oracle_gate(grid: TorusGrid, sets: Iterable[Polyinterval], lift: bool = False,
                      ground: GroundField = F2) -> GateReport:
    """Compare the closed form with the cubical kernel on every given set.

    With ``lift`` both sides are compared inside QH*(T^{2n}); otherwise
    inside H*(T^n; F2), where both are canonical echelon forms."""
    checked = 0
    bad = []
    n = grid.n
    for s in sets:
        checked += 1
        if lift:
            a = torus_ivqm_value(n, s, ground, sizes=grid.sizes)
            b = torus_oracle_value(grid, s, ground)
        else:
            a = torus_closed_form_small(grid, s)
            b = coh_ivm_value(grid, s)
        if a != b:
            bad.append({"set": s.to_json(), "closed_form": a.describe(), "oracle": b.describe()})
    return GateReport(checked, bad, repr(grid))


_GATE_PASSED: dict = {}


def _default_gate(n: int) -> GateReport:
    """Build-time gate on a small grid: every closed polyinterval on T^n
    with 4 edges per axis (n <= 2), or a fixed family for larger n."""
    if n in _GATE_PASSED:
        return _GATE_PASSED[n]
    m = 4
    grid = build_torus_complex(n, m) if n <= 3 else build_torus_complex(n, 3)
    if n <= 2:
        opts = [AxisInterval("full"), AxisInterval("empty")] + [AxisInterval("closed", s, L)
                                                              for s in range(m) for L in range(m)]
        sets = [Polyinterval(tuple(c)) for c in itertools.product(opts, repeat=n)]
    else:
        opts = [AxisInterval("full"), AxisInterval("closed", 0, 0), AxisInterval("closed", 0, 1)]
        sets = [Polyinterval(tuple(c)) for c in itertools.product(opts, repeat=n)]
    rep = torus_oracle_gate(grid, sets)
    if not rep.ok:
        raise OracleMismatch(f"closed form disagrees with the cubical oracle: {rep.mismatches[:3]}")
    _GATE_PASSED[n] = rep
    return rep


class TorusIVQM(Measure):
    """Quasi-measure on T^{2n} = T^n(p) x T^n(q) for products of intervals.

    The closed form is released only after agreeing with the cubical
    oracle on a gate family (``gate=True``)."""

    kind = "IVQM"
    name = "torus"

    def __init__(self, n: int, ground: GroundField = F2, gate: bool = True):
        self.n = n
        self.ground = ground
        self.algebra = _qh_torus(2 * n, ground)
        self.gate = _default_gate(n) if gate and n <= 3 else None

    def value(self, s) -> GradedIdeal:
        if isinstance(s, (list, tuple)):
            # pairwise disjoint pieces: values add up
            out = self.zero()
            for piece in s:
                out = out + self.value(piece)
            return out
        if isinstance(s, TorusBox) and s.displaceable():
            return self.zero()
        return torus_ivqm_value(self.n, s, self.ground)

    def complement_value(self, box: TorusBox) -> GradedIdeal:
        """Value of the closed complement of an open box."""
        box.validate()
        if box.kind == "empty":
            return self.whole()
        if box.displaceable():
            return self.whole()
        return self.value(box.complement())

    def generator(self, names: Sequence[str]) -> dict:
        labels = [f"p{i + 1}" for i in range(self.n)] + [f"q{i + 1}" for i in range(self.n)]
        return _subset_element(self.algebra, [labels.index(x) for x in names])


# ----------------------------------------------------------------------------
# subcomplexes of a circle and the projection of the torus onto a circle


def circle_subcomplexes(m: int) -> list[tuple[int, int]]:
    """All closed subcomplexes of an m-cycle as (vertex mask, edge mask);
    edge i joins vertices i and i+1."""
    out = []
    for vm in range(1 << m):
        allowed = [i for i in range(m) if vm >> i & 1 and vm >> ((i + 1) % m) & 1]
        for r in range(len(allowed) + 1):
            for es in itertools.combinations(allowed, r):
                out.append((vm, sum(1 << i for i in es)))
    return out


def circle_arcs(sub: tuple[int, int], m: int) -> list[AxisInterval]:
    """Connected components of a circle subcomplex as closed arcs."""
    vm, em = sub
    if em == (1 << m) - 1:
        return [AxisInterval("full")]
    arcs = []
    for v in range(m):
        if not vm >> v & 1 or em >> ((v - 1) % m) & 1:
            continue
        length = 0
        while em >> ((v + length) % m) & 1:
            length += 1
        arcs.append(AxisInterval("closed", v, length))
    return arcs


def circle_pushforward(measure: TorusIVQM, m: int, coordinate: str = "p1") -> PushforwardMeasure:
    """Push the torus measure forward along the projection to one circle
    coordinate; a circle subcomplex pulls back to a union of bands.  All
    preimages of one projection commute, so the result is a full IVM."""
    names = [f"p{i + 1}" for i in range(measure.n)] + [f"q{i + 1}" for i in range(measure.n)]
    axis = names.index(coordinate)
    sizes = tuple([m] * (2 * measure.n))

    def preimage(sub):
        boxes = []
        for arc in circle_arcs(sub, m):
            axes = [AxisInterval("full")] * (2 * measure.n)
            axes[axis] = arc
            boxes.append(TorusBox(tuple(axes), sizes))
        if not boxes:
            boxes.append(TorusBox(tuple(AxisInterval("empty") for _ in names), sizes))
        return boxes

    return PushforwardMeasure(measure, preimage, f"pushforward to {coordinate}", kind="IVM")


def circle_lattice(m: int) -> SetLattice:
    """All closed subcomplexes of an m-cycle with rotations as symmetries."""
    full = ((1 << m) - 1, (1 << m) - 1)

    def rot(s, k):
        vm, em = s
        mask = (1 << m) - 1
        return (((vm << k) | (vm >> (m - k))) & mask, ((em << k) | (em >> (m - k))) & mask)

    syms = [lambda s, k=k: rot(s, k) for k in range(1, m)]
    chain = [(0, 0)]
    for v in range(m):
        vm = chain[-1][0] | 1 << v
        em = sum(1 << i for i in range(v))
        chain.append((vm, em))
    chain.append(full)
    return SetLattice(
        circle_subcomplexes(m),
        union=lambda a, b: (a[0] | b[0], a[1] | b[1]),
        intersection=lambda a, b: (a[0] & b[0], a[1] & b[1]),
        subset=lambda a, b: a[0] & ~b[0] == 0 and a[1] & ~b[1] == 0,
        disjoint=lambda a, b: a[0] & b[0] == 0,
        covers=lambda a, b: (a[0] | b[0], a[1] | b[1]) == full,
        is_empty=lambda s: s == (0, 0),
        is_whole=lambda s: s == full,
        symmetries=syms,
        displaceable=lambda s: False,
        chains=[chain],
    )


# ----------------------------------------------------------------------------
# commutation, axiom checking


@dataclass
class CommutationPredicate:
    """Sufficient conditions for two compact model regions to commute:
    disjoint boundaries, or both preimages of one axis projection."""

    boundary: Callable | None = None
    same_projection: Callable | None = None

    def __call__(self, a, b) -> bool:
        if self.same_projection is not None and self.same_projection(a, b):
            return True
        if self.boundary is not None:
            return self.boundary(a, b)
        return False


def always_commute(a, b) -> bool:
    return True


def sphere_commutation(model: SphereModel) -> CommutationPredicate:
    """Regions of the sphere model commute when their boundaries are disjoint."""

    def boundary(a, b):
        ba, bb = model.boundary(a), model.boundary(b)
        return not (ba[2] & bb[2])

    return CommutationPredicate(boundary=boundary)


def torus_commutation() -> CommutationPredicate:
    """Boxes commute when both constrain only p-coordinates, or only
    q-coordinates, or when their closures are disjoint."""
    def same(a, b):
        n = a.n
        pa, pb = set(a.proper()), set(b.proper())
        return (pa | pb) <= set(range(n)) or (pa | pb) <= set(range(n, 2 * n))

    def apart(a, b):
        return any(not _arcs_meet(x, y, m) for x, y, m in zip(a.axes, b.axes, a.sizes))

    return CommutationPredicate(boundary=apart, same_projection=same)


def _arcs_meet(a: AxisInterval, b: AxisInterval, m: int) -> bool:
    """Do the closures of two circle intervals meet?"""
    if "empty" in (a.kind, b.kind):
        return False
    if "full" in (a.kind, b.kind):
        return True
    va = {(a.start + i) % m for i in range(a.length + 1)}
    vb = {(b.start + i) % m for i in range(b.length + 1)}
    return bool(va & vb)


@dataclass
class AxiomResult:
    passed: bool = True
    checked: int = 0
    witness: object = None

    def fail(self, witness):
        if self.passed:
            self.witness = witness
        self.passed = False

    def to_json(self) -> dict:
        return {"passed": self.passed, "checked": self.checked,
                "witness": None if self.witness is None else str(self.witness)}


@dataclass
class AxiomReport:
    kind: str
    results: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results.values())

    def to_json(self) -> dict:
        return {"kind": self.kind, "ok": self.ok, "notes": self.notes,
                "axioms": {k: v.to_json() for k, v in self.results.items()}}


@dataclass
class SetLattice:
    """A finite family of compact model sets with the operations the axiom
    suite needs.  ``union`` and ``intersection`` may leave the family; the
    measure must be able to evaluate their results."""

    elements: list
    union: Callable
    intersection: Callable
    subset: Callable
    disjoint: Callable
    covers: Callable
    is_empty: Callable
    is_whole: Callable
    key: Callable = lambda s: s
    symmetries: list = field(default_factory=list)
    displaceable: Callable | None = None
    complement_value: Callable | None = None
    chains: list = field(default_factory=list)


def stabilize_chain(values: Sequence[GradedIdeal]) -> GradedIdeal:
    """Stable value of an increasing chain of ideals (finite dimension
    forces stabilization)."""
    if not values:
        raise MeasureError("empty chain")
    for a, b in zip(values, values[1:]):
        if not a <= b:
            raise MeasureError("chain is not increasing")
    return values[-1]


def check_axioms(measure: Measure, lattice: SetLattice, commutes: Callable | None = None) -> AxiomReport:
    """Exhaustive axiom suite on a finite lattice of compact sets.

    Multiplicativity is checked on all pairs for IVMs and on commuting pairs
    for IVQMs.  Intersection is checked on covering pairs, additivity on
    disjoint pairs, monotonicity on comparable pairs.  Continuity is checked
    on the supplied increasing chains (the values of a finite chain must
    stabilize at the value of its union)."""
    memo: dict = {}

    def val(s):
        k = lattice.key(s)
        if k not in memo:
            memo[k] = measure.value(s)
        return memo[k]

    quasi = measure.kind == "IVQM"
    if commutes is None:
        commutes = always_commute
    rep = AxiomReport(measure.kind)
    R = {name: AxiomResult() for name in
         ("normalization", "monotonicity", "continuity", "additivity",
          "quasi-multiplicativity" if quasi else "multiplicativity", "intersection")}
    if quasi:
        R["invariance"] = AxiomResult()
        R["vanishing"] = AxiomResult()
        rep.notes.append("invariance checked on the model symmetry group")
    rep.results = R
    els = lattice.elements
    for s in els:
        if lattice.is_empty(s):
            R["normalization"].checked += 1
            if not val(s).is_zero():
                R["normalization"].fail(("empty", s))
        if lattice.is_whole(s):
            R["normalization"].checked += 1
            if not val(s).is_whole():
                R["normalization"].fail(("whole", s))
    mult = R["quasi-multiplicativity" if quasi else "multiplicativity"]
    for a, b in itertools.product(els, repeat=2):
        va, vb = val(a), val(b)
        if lattice.subset(a, b):
            R["monotonicity"].checked += 1
            if not va <= vb:
                R["monotonicity"].fail((a, b))
        if lattice.disjoint(a, b):
            R["additivity"].checked += 1
            if val(lattice.union(a, b)) != va + vb:
                R["additivity"].fail((a, b))
        if not quasi or commutes(a, b):
            mult.checked += 1
            if not (va * vb) <= val(lattice.intersection(a, b)):
                mult.fail((a, b))
        if lattice.covers(a, b):
            R["intersection"].checked += 1
            if val(lattice.intersection(a, b)) != (va & vb):
                R["intersection"].fail((a, b))
    for chain in lattice.chains:
        R["continuity"].checked += 1
        top = chain[-1]
        for s in chain:
            if not lattice.subset(s, top):
                raise MeasureError("chain elements must lie in its last set")
        if stabilize_chain([val(s) for s in chain]) != val(top):
            R["continuity"].fail(chain)
    if quasi:
        for phi in lattice.symmetries:
            for s in els:
                R["invariance"].checked += 1
                if val(phi(s)) != val(s):
                    R["invariance"].fail((phi, s))
        if lattice.displaceable is not None:
            for s in els:
                if lattice.displaceable(s):
                    R["vanishing"].checked += 1
                    ok = val(s).is_zero()
                    if lattice.complement_value is not None:
                        ok = ok and lattice.complement_value(s).is_whole()
                    if not ok:
                        R["vanishing"].fail(s)
    return rep


def torus_square_lattice(grid: TorusGrid, with_symmetries: bool = True) -> SetLattice:
    """Closures of all sets of top cells of a small torus grid."""
    top = grid.cells[grid.n]
    elements = []
    for r in range(len(top) + 1):
        for combo in itertools.combinations(top, r):
            elements.append(grid.closure(combo))
    full = grid.full()

    def union(a, b):
        return a | b

    def inter(a, b):
        return a & b

    def subset(a, b):
        return all(x & ~y == 0 for x, y in zip(a.masks, b.masks))

    def disjoint(a, b):
        return a.masks[0] & b.masks[0] == 0

    def covers(a, b):
        return (a | b).masks == full.masks

    syms = []
    if with_symmetries:
        for shift in itertools.product(*[range(m) for m in grid.sizes]):
            def phi(s, shift=shift):
                cells = [tuple(((p + d) % m, e) for (p, e), d, m in zip(c, shift, grid.sizes))
                         for c in s.all_cells()]
                return grid.closure(cells)
            syms.append(phi)
    chains = []
    acc = []
    for c in top:
        acc.append(c)
        chains.append([grid.closure(acc[:i + 1]) for i in range(len(acc))])
    return SetLattice(elements, union, inter, subset, disjoint, covers,
                      lambda s: s.is_empty(), lambda s: s.is_full(), key=lambda s: tuple(s.masks),
                      symmetries=syms, chains=chains[-1:] if chains else [])


# ----------------------------------------------------------------------------
# fast exhaustive suite for the sphere


def check_sphere_ivqm(measure: SphereIVQM) -> AxiomReport:
    """Exhaustive IVQM suite over all 4096 face-unions of the sphere model.

    Values are 0 or A, so they are stored as booleans; intersections of
    face-unions are general subcomplexes and are evaluated directly."""
    m = measure.model
    N = 1 << 12
    regions = [m.face_region(F) for F in range(N)]
    heavy = np.array([measure.heavy(r) for r in regions], dtype=bool)
    vmask = np.zeros(N, dtype=np.int64)
    bmask = np.zeros(N, dtype=np.int64)
    for F, r in enumerate(regions):
        vmask[F] = sum(1 << v for v in r[2])
        bnd = m.boundary(r)
        bmask[F] = sum(1 << v for v in bnd[2])
    rep = AxiomReport("IVQM", notes=["invariance checked on the model symmetry group (area-preserving rotations)",
                                     "continuity: finite chains stabilize at the value of their union"])
    R = {k: AxiomResult() for k in ("normalization", "monotonicity", "continuity", "additivity",
                                    "quasi-multiplicativity", "intersection", "invariance",
                                    "vanishing", "disk values")}
    rep.results = R
    R["normalization"].checked = 2
    if heavy[0] or not heavy[N - 1]:
        R["normalization"].fail("empty or whole")
    idx = np.arange(N)
    # monotonicity: every subset of a light set is light
    for G in range(N):
        subs = idx[(idx & ~G) == 0]
        R["monotonicity"].checked += len(subs)
        if not heavy[G] and heavy[subs].any():
            R["monotonicity"].fail((int(subs[heavy[subs]][0]), G))
    # additivity on vertex-disjoint pairs: value of union = sum of values
    for F in range(N):
        dis = (vmask & vmask[F]) == 0
        G = idx[dis]
        R["additivity"].checked += len(G)
        bad = heavy[F | G] != (heavy[F] | heavy[G])
        if bad.any():
            R["additivity"].fail((F, int(G[bad][0])))
    # quasi-multiplicativity on pairs with disjoint boundaries; the product
    # of two values is nonzero only when both are A
    inter_memo: dict = {}

    def inter_heavy(F, G):
        key = (F, G) if F <= G else (G, F)
        if key not in inter_memo:
            inter_memo[key] = measure.heavy(m.intersection(regions[F], regions[G]))
        return inter_memo[key]

    heavy_idx = idx[heavy]
    for F in heavy_idx:
        comm = heavy_idx[(bmask[heavy_idx] & bmask[F]) == 0]
        R["quasi-multiplicativity"].checked += len(comm)
        for G in comm:
            if not inter_heavy(int(F), int(G)):
                R["quasi-multiplicativity"].fail((int(F), int(G)))
    R["quasi-multiplicativity"].checked += int((~heavy).sum()) * N  # trivially true pairs
    # intersection on covering pairs: F | G = all faces
    full = N - 1
    for F in range(N):
        rest = full & ~F
        # G ranges over supersets of rest
        sub = idx[(idx & ~F) == 0]
        Gs = rest | sub
        R["intersection"].checked += len(Gs)
        for G in Gs:
            G = int(G)
            expect = heavy[F] and heavy[G]
            if inter_heavy(F, G) != expect:
                R["intersection"].fail((F, G))
    # continuity along a maximal chain
    chain = [0]
    for f in range(12):
        chain.append(chain[-1] | 1 << f)
    vals = [bool(heavy[F]) for F in chain]
    R["continuity"].checked = 1
    if any(a and not b for a, b in zip(vals, vals[1:])) or vals[-1] != heavy[chain[-1]]:
        R["continuity"].fail(chain)
    # invariance under rotations preserving areas
    for phi in m.rotations:
        fmap = m.face_map(phi)
        img = np.zeros(N, dtype=np.int64)
        for f in range(12):
            img |= ((idx >> f) & 1) << fmap[f]
        R["invariance"].checked += N
        bad = heavy[img] != heavy
        if bad.any():
            R["invariance"].fail(int(idx[bad][0]))
    # vanishing and the disk rule
    half = Fraction(1, 2)
    for F in range(N):
        r = regions[F]
        if m.is_disk(r):
            R["disk values"].checked += 1
            if heavy[F] != (m.area(r[0]) >= half):
                R["disk values"].fail(F)
        if measure.displaceable(r):
            R["vanishing"].checked += 1
            if heavy[F] or not measure.open_heavy(r):
                R["vanishing"].fail(F)
    return rep


# ----------------------------------------------------------------------------
# certificates


@dataclass
class HeavyReport:
    heavy_first: bool
    heavy_second: bool
    rigid_pair: bool
    product: GradedIdeal

    def to_json(self) -> dict:
        return {"heavy_first": self.heavy_first, "heavy_second": self.heavy_second,
                "rigid_pair": self.rigid_pair, "product": self.product.to_json(),
                "product_text": self.product.describe()}


def sh_heavy_and_criterion(first: GradedIdeal, second: GradedIdeal) -> HeavyReport:
    """Heavy means a nonzero value; a nonzero product of the two values
    means the sets cannot be displaced from one another."""
    prod = ideal_product(first, second)
    return HeavyReport(not first.is_zero(), not second.is_zero(), not prod.is_zero(), prod)


@dataclass
class CoverReport:
    values: list
    product: GradedIdeal
    obstructed: bool

    def to_json(self) -> dict:
        return {"values": [v.describe() for v in self.values], "product": self.product.describe(),
                "obstructed": self.obstructed}


def cover_obstruction(complement_values: Sequence[GradedIdeal]) -> CoverReport:
    """Product of the values of the complements of a cover; nonzero means
    the cover cannot be realized by pairwise commuting sets."""
    if not complement_values:
        raise MeasureError("empty cover")
    prod = complement_values[0]
    for v in complement_values[1:]:
        prod = ideal_product(prod, v)
    return CoverReport(list(complement_values), prod, not prod.is_zero())


def torus_box_cover_obstruction(measure: TorusIVQM, cover: Sequence[TorusBox]) -> CoverReport:
    """Verify that open boxes cover the torus, then run the obstruction."""
    if not cover:
        raise MeasureError("empty cover")
    sizes = cover[0].sizes
    per_axis = [[(p, e) for e in (0, 1) for p in range(m)] for m in sizes]
    for cell in itertools.product(*per_axis):
        if not any(b.meets_cell(cell) for b in cover):
            raise MeasureError(f"sets do not cover the torus (cell {cell} is missed)")
    for b in cover:
        if b.kind == "closed" and b.proper():
            raise MeasureError("cover elements must be open")
    return cover_obstruction([measure.complement_value(b) for b in cover])


def sphere_cover_obstruction(measure: SphereIVQM, closed_complements: Sequence[tuple]) -> CoverReport:
    """Cover of S^2 by open sets U_i given through their closed complements K_i."""
    m = measure.model
    common = closed_complements[0]
    for k in closed_complements[1:]:
        common = m.intersection(common, k)
    if any(common):
        raise MeasureError("sets do not cover the sphere")
    return cover_obstruction([measure.value(k) for k in closed_complements])


def tensor_ideal(prod_alg: GradedAlgebra, left: GradedIdeal, right: GradedIdeal) -> GradedIdeal:
    """The ideal I (x) J inside a tensor product algebra."""
    nb = right.algebra.dim
    gens = []
    for x in left.basis():
        for y in right.basis():
            elt = {}
            for i, a in x.items():
                for j, b in y.items():
                    elt[i * nb + j] = prod_alg.ring.mul(a, b)
            gens.append(elt)
    return ideal_from_generators(prod_alg, gens)


def product_ivqm_lower_bound(prod_alg: GradedAlgebra, value_k: GradedIdeal, factor_n: GradedAlgebra,
                             complement_displaceable: bool) -> GradedIdeal:
    """Lower bound tau(K) (x) A_N for tau(K x L), valid when N minus L splits
    into finitely many pairwise disjoint displaceable pieces (a model flag)."""
    if not complement_displaceable:
        raise MeasureError("the complement of L must be flagged as a union of displaceable pieces")
    return tensor_ideal(prod_alg, value_k, whole(factor_n))


@dataclass
class CrossCoreReport:
    algebra: GradedAlgebra
    ideal: GradedIdeal
    cube: GradedIdeal
    witness: dict
    expected: dict

    @property
    def ok(self) -> bool:
        return not self.cube.is_zero() and self.witness == self.expected and self.cube.contains(self.witness)

    def to_json(self) -> dict:
        alg = self.algebra
        return {"ideal_dim": self.ideal.dim, "cube_dim": self.cube.dim, "cube_nonzero": not self.cube.is_zero(),
                "witness": alg.format(self.witness), "expected": alg.format(self.expected), "ok": self.ok,
                "ground_field": alg.ring.ground.name}


def torus_cross_core(ground: GroundField = F2) -> CrossCoreReport:
    """I = <a(x)h, b(x)h, c(x)h> in QH*(T^6) (x) QH*(S^2) with a = dq1 dq2,
    b = dp1 dp3, c = dp2 dq3; reports I^3 and the product of the three
    generators, which equals (abc)(x)(T h)."""
    t6 = _qh_torus(6, ground)
    s2 = ga.qh_sphere(ground)
    alg = ga.tensor_kunneth(t6, s2, validate=False)
    labels = ["p1", "p2", "p3", "q1", "q2", "q3"]

    def gen(*names):
        return _subset_element(t6, [labels.index(x) for x in names])

    h = s2.index("h")
    nb = s2.dim

    def lift(x):
        return {i * nb + h: c for i, c in x.items()}

    a, b, c = gen("q1", "q2"), gen("p1", "p3"), gen("p2", "q3")
    gens = [lift(a), lift(b), lift(c)]
    ideal = ideal_from_generators(alg, gens)
    cube = ideal_power(ideal, 3)
    witness = alg.mul(alg.mul(gens[0], gens[1]), gens[2])
    abc = t6.mul(t6.mul(a, b), c)
    h3 = s2.power(s2.basis("h"), 3)
    expected = {}
    for i, x in abc.items():
        for j, y in h3.items():
            expected[i * nb + j] = alg.ring.mul(x, y)
    return CrossCoreReport(alg, ideal, cube, witness, expected)


@dataclass
class MeridianReport:
    n: int
    product: GradedIdeal
    omega_power: dict
    spanned_by_omega_power: bool
    spanned_by_volume: bool

    def to_json(self) -> dict:
        alg = self.product.algebra
        return {"n": self.n, "product": self.product.describe(), "omega_power": alg.format(self.omega_power),
                "spanned_by_omega_power": self.spanned_by_omega_power,
                "spanned_by_volume": self.spanned_by_volume, "nonzero": not self.product.is_zero()}


def meridian_product(n: int, ground: GroundField = F2, m: int = 4) -> MeridianReport:
    """tau({pt} x T^n(q)) * tau(T^n(p) x {pt}) inside QH*(T^{2n})."""
    meas = TorusIVQM(n, ground, gate=n <= 2)
    point = Polyinterval(tuple(AxisInterval("closed", 0, 0) for _ in range(n)))
    sizes = [m] * n
    lag = meas.value(TorusBox.from_polyinterval(point, sizes))
    lag2 = meas.value(TorusBox.from_polyinterval(point, sizes, [f"q{i + 1}" for i in range(n)]))
    prod = ideal_product(lag, lag2)
    alg = meas.algebra
    omega = {}
    for i in range(n):
        x = meas.generator([f"p{i + 1}", f"q{i + 1}"])
        omega = alg.add(omega, x)
    omega_n = alg.power(omega, n)
    vol = meas.generator([f"p{i + 1}" for i in range(n)] + [f"q{i + 1}" for i in range(n)])
    by_omega = bool(omega_n) and prod == GradedIdeal.from_vectors(alg, [omega_n])
    by_vol = prod == GradedIdeal.from_vectors(alg, [vol])
    return MeridianReport(n, prod, omega_n, by_omega, by_vol)


@dataclass
class StabilizedMeridianReport:
    lower_first: GradedIdeal
    lower_second: GradedIdeal
    product: GradedIdeal
    contains_top_tensor_all: bool

    def to_json(self) -> dict:
        return {"product_dim": self.product.dim, "nonzero": not self.product.is_zero(),
                "contains_top_tensor_all": self.contains_top_tensor_all}


def stabilized_meridians(n: int = 1, ground: GroundField = F2) -> StabilizedMeridianReport:
    """L x E and L' x E in T^{2n} x S^2 via the product lower bound."""
    rep = meridian_product(n, ground)
    t = rep.product.algebra
    s2 = ga.qh_sphere(ground)
    alg = ga.tensor_kunneth(t, s2, validate=False)
    sphere = SphereIVQM(ground=ground)
    equator = _equator(sphere.model)
    if not sphere.heavy(equator):
        raise MeasureError("equator should have the whole algebra as value")
    meas = TorusIVQM(n, ground, gate=n <= 2)
    point = Polyinterval(tuple(AxisInterval("closed", 0, 0) for _ in range(n)))
    v1 = meas.value(TorusBox.from_polyinterval(point, [4] * n))
    v2 = meas.value(TorusBox.from_polyinterval(point, [4] * n, [f"q{i + 1}" for i in range(n)]))
    low1 = product_ivqm_lower_bound(alg, v1, s2, True)
    low2 = product_ivqm_lower_bound(alg, v2, s2, True)
    prod = ideal_product(low1, low2)
    top = t.meta["top"]
    target = tensor_ideal(alg, GradedIdeal.from_vectors(t, [t.basis(top)]), whole(s2))
    return StabilizedMeridianReport(low1, low2, prod, target <= prod)


def _equator(model: SphereModel) -> tuple:
    """A cycle of edges splitting the faces into two halves of area 1/2."""
    half = Fraction(1, 2)
    for F in range(1 << 12):
        faces = [f for f in range(12) if F >> f & 1]
        if model.area(faces) != half:
            continue
        r = model.region(faces)
        if not model.is_disk(r):
            continue
        comp = model.region([f for f in range(12) if f not in faces])
        if not model.is_disk(comp):
            continue
        inter = model.intersection(r, comp)
        return inter
    raise MeasureError("no equator on this model")


def equator(model: SphereModel) -> tuple:
    return _equator(model)
