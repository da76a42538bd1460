"""Graded ideals of a :class:`GradedAlgebra`: generation, lattice
operations, kernels of morphisms, the filtration ``A^{/r}`` and d-ranks.

An ideal stores one :class:`RowSpace` per degree.  Over a ground field the
row spaces are in reduced echelon form, so equality is a comparison of
pivot rows.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import _linalg as la
from .graded_algebra import AlgebraError, AlgebraMorphism, GradedAlgebra, product, tensor_kunneth


class IdealError(ValueError):
    """Raised for malformed ideal input or a failed closure check."""


class BudgetExceeded(RuntimeError):
    """An enumeration ran past its configured candidate budget."""


class GradedIdeal:
    """Homogeneous ideal given by per-degree row spaces."""

    def __init__(self, algebra: GradedAlgebra, spaces: dict | None = None):
        self.algebra = algebra
        self.spaces: dict[int, la.RowSpace] = {}
        for d, sp in (spaces or {}).items():
            if sp.rank:
                self.spaces[d] = sp

    # construction helpers
    @classmethod
    def from_vectors(cls, algebra: GradedAlgebra, vectors: Iterable[dict]) -> "GradedIdeal":
        """Span of homogeneous vectors; closure is not taken here."""
        spaces: dict[int, la.RowSpace] = {}
        for v in vectors:
            v = la.clean(algebra.ring, v)
            if not v:
                continue
            d = algebra.degree_of(v)
            spaces.setdefault(d, la.RowSpace(algebra.ring)).add(v)
        return cls(algebra, spaces)

    # queries
    @property
    def dim(self) -> int:
        return sum(sp.rank for sp in self.spaces.values())

    @property
    def codim(self) -> int:
        return self.algebra.dim - self.dim

    def is_zero(self) -> bool:
        return not self.spaces

    def is_whole(self) -> bool:
        return self.dim == self.algebra.dim

    def component(self, d: int) -> list[dict]:
        sp = self.spaces.get(d)
        return sp.basis() if sp else []

    def component_dims(self) -> dict[int, int]:
        return {d: self.spaces[d].rank if d in self.spaces else 0 for d in self.algebra.degree_list()}

    def basis(self) -> list[dict]:
        out = []
        for d in sorted(self.spaces):
            out.extend(self.spaces[d].basis())
        return out

    def contains(self, x: dict) -> bool:
        alg = self.algebra
        parts: dict[int, dict] = {}
        for i, c in x.items():
            parts.setdefault(alg.degrees[i], {})[i] = c
        for d, v in parts.items():
            sp = self.spaces.get(d)
            if sp is None or not sp.contains(v):
                return False
        return True

    def contains_ideal(self, other: "GradedIdeal") -> bool:
        return all(self.contains(v) for v in other.basis())

    def is_closed(self) -> bool:
        """Closure under multiplication by every basis element."""
        alg = self.algebra
        for v in self.basis():
            for i in range(alg.dim):
                if not self.contains(alg.mul(alg.basis(i), v)):
                    return False
        return True

    def check_closed(self) -> "GradedIdeal":
        if not self.is_closed():
            raise IdealError("subspace is not closed under multiplication")
        return self

    def _same_parent(self, other: "GradedIdeal"):
        if other.algebra is not self.algebra:
            raise IdealError("ideals live in different algebras")

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedIdeal):
            return NotImplemented
        if other.algebra is not self.algebra:
            return False
        if set(self.spaces) != set(other.spaces):
            return False
        for d, sp in self.spaces.items():
            osp = other.spaces[d]
            if sp.canonical and osp.canonical:
                if sp.pivots != osp.pivots:
                    return False
            elif not la.same_span(self.algebra.ring, sp.basis(), osp.basis()):
                return False
        return True

    def __le__(self, other: "GradedIdeal") -> bool:
        return other.contains_ideal(self)

    def __repr__(self):
        return f"GradedIdeal(dim={self.dim}, {self.describe()})"

    def describe(self) -> str:
        if self.is_zero():
            return "0"
        if self.is_whole():
            return "A"
        alg = self.algebra
        return "span{" + ", ".join(alg.format(v) for v in self.basis()) + "}"

    # lattice operations
    def __add__(self, other: "GradedIdeal") -> "GradedIdeal":
        return ideal_sum(self, other)

    def __and__(self, other: "GradedIdeal") -> "GradedIdeal":
        return ideal_intersect(self, other)

    def __mul__(self, other: "GradedIdeal") -> "GradedIdeal":
        return ideal_product(self, other)

    def power(self, k: int) -> "GradedIdeal":
        return ideal_power(self, k)

    # serialization
    def to_json(self) -> dict:
        alg = self.algebra
        ring = alg.ring
        comps = []
        for d in sorted(self.spaces):
            rows = [{alg.labels[i]: ring.to_json(c) for i, c in sorted(v.items())}
                    for v in self.spaces[d].basis()]
            comps.append({"degree": d, "rows": rows})
        return {"kind": "ideal", "algebra": alg.name, "dim": self.dim, "components": comps}

    @classmethod
    def from_json(cls, algebra: GradedAlgebra, doc: dict) -> "GradedIdeal":
        vecs = []
        for comp in doc.get("components", []):
            for row in comp["rows"]:
                vecs.append(algebra.element(row))
        return ideal_from_generators(algebra, vecs)


def zero_ideal(alg: GradedAlgebra) -> GradedIdeal:
    return GradedIdeal(alg)


def whole(alg: GradedAlgebra) -> GradedIdeal:
    return GradedIdeal.from_vectors(alg, [alg.basis(i) for i in range(alg.dim)])


def ideal_from_generators(alg: GradedAlgebra, gens: Iterable[dict]) -> GradedIdeal:
    """Smallest graded ideal containing homogeneous generators."""
    ring = alg.ring
    spaces: dict[int, la.RowSpace] = {}
    queue = []
    for g in gens:
        g = la.clean(ring, g)
        if not g:
            continue
        if not alg.is_homogeneous(g):
            raise IdealError(f"generator {alg.format(g)} is not homogeneous")
        queue.append(g)
    while queue:
        v = queue.pop()
        d = alg.degree_of(v)
        sp = spaces.setdefault(d, la.RowSpace(ring))
        if not sp.add(v):
            continue
        for i in range(alg.dim):
            if i == alg.unit:
                continue
            w = alg.mul(alg.basis(i), v)
            if w:
                queue.append(w)
    return GradedIdeal(alg, spaces)


def principal(alg: GradedAlgebra, x: dict) -> GradedIdeal:
    return ideal_from_generators(alg, [x])


def ideal_sum(a: GradedIdeal, b: GradedIdeal) -> GradedIdeal:
    a._same_parent(b)
    return GradedIdeal.from_vectors(a.algebra, a.basis() + b.basis())


def ideal_intersect(a: GradedIdeal, b: GradedIdeal) -> GradedIdeal:
    a._same_parent(b)
    alg = a.algebra
    vecs = []
    for d in set(a.spaces) & set(b.spaces):
        vecs.extend(la.intersect(alg.ring, a.component(d), b.component(d), alg.dim))
    return GradedIdeal.from_vectors(alg, vecs)


def ideal_product(a: GradedIdeal, b: GradedIdeal) -> GradedIdeal:
    """Span of pairwise products of basis vectors."""
    a._same_parent(b)
    alg = a.algebra
    vecs = [alg.mul(x, y) for x in a.basis() for y in b.basis()]
    return GradedIdeal.from_vectors(alg, vecs)


def ideal_power(a: GradedIdeal, k: int) -> GradedIdeal:
    if k < 1:
        raise IdealError("ideal powers start at 1")
    out = a
    for _ in range(k - 1):
        out = ideal_product(out, a)
    return out


def lattice_ops(a: GradedIdeal, b: GradedIdeal, op: str) -> GradedIdeal:
    ops = {"sum": ideal_sum, "intersect": ideal_intersect, "product": ideal_product}
    if op not in ops:
        raise IdealError(f"unknown lattice operation {op!r}")
    return ops[op](a, b)


def kernel_of_linear(source: GradedAlgebra, images: Sequence[dict],
                     check: bool = True) -> GradedIdeal:
    """Degree-wise kernel of the linear map sending basis i to ``images[i]``
    (vectors in any target coordinates)."""
    ring = source.ring
    vecs = []
    for d in source.degree_list():
        idx = source.component(d)
        for kv in la.kernel(ring, [images[i] for i in idx]):
            vecs.append({idx[j]: c for j, c in kv.items()})
    ideal = GradedIdeal.from_vectors(source, vecs)
    if check and not ideal.is_closed():
        raise IdealError("kernel is not an ideal; the restriction map is not multiplicative")
    return ideal


def kernel_of_morphism(phi: AlgebraMorphism) -> GradedIdeal:
    return kernel_of_linear(phi.source, phi.images, check=not phi.check_multiplicative)


# ----------------------------------------------------------------------------
# A^{/r} by enumeration of small quotients


def _subspace_annihilators(p: int, n: int, c: int):
    """Every c-dimensional subspace of F_p^n as a c x n RREF matrix (dense rows)."""
    if c == 0:
        yield ()
        return
    for pivots in itertools.combinations(range(n), c):
        free = [(r, j) for r in range(c) for j in range(pivots[r] + 1, n) if j not in pivots]
        for vals in itertools.product(range(p), repeat=len(free)):
            rows = [[0] * n for _ in range(c)]
            for r, j in enumerate(pivots):
                rows[r][j] = 1
            for (r, j), x in zip(free, vals):
                rows[r][j] = x
            yield tuple(tuple(r) for r in rows)


def _null_basis(p: int, rows: tuple, n: int) -> list[list[int]]:
    """Kernel basis of an RREF matrix over F_p."""
    pivots = [next(j for j, x in enumerate(r) if x) for r in rows]
    out = []
    for f in range(n):
        if f in pivots:
            continue
        v = [0] * n
        v[f] = 1
        for r, pc in zip(rows, pivots):
            v[pc] = (-r[f]) % p
        out.append(v)
    return out


@dataclass
class SlashResult:
    """Outcome of the A^{/r} computation.

    ``status`` is "exact" when every graded ideal of codimension < r was
    examined; "partial" when the budget ran out, in which case ``ideal`` is
    only an outer bound (it contains the true A^{/r}).
    """

    ideal: GradedIdeal
    status: str
    candidates: int
    ideals_found: int
    r: int
    found: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"r": self.r, "status": self.status, "candidates": self.candidates,
                "ideals_found": self.ideals_found, "ideal": self.ideal.to_json()}


def _mult_blocks(alg: GradedAlgebra, p: int):
    """Dense matrices of left multiplication by non-unit basis elements,
    keyed by (source degree, target degree)."""
    comps = {d: alg.component(d) for d in alg.degree_list()}
    pos = {i: k for d, idx in comps.items() for k, i in enumerate(idx)}
    blocks: dict[tuple[int, int], list] = {}
    for i in range(alg.dim):
        if i == alg.unit:
            continue
        for d, idx in comps.items():
            t = (d + alg.degrees[i]) % alg.modulus if alg.modulus else d + alg.degrees[i]
            if t not in comps:
                continue
            m = [[0] * len(idx) for _ in comps[t]]
            nonzero = False
            for col, j in enumerate(idx):
                for k, c in alg.mul_basis(i, j).items():
                    m[pos[k]][col] = int(c) % p
                    nonzero = True
            if nonzero:
                blocks.setdefault((d, t), []).append(m)
    return blocks


def enumerate_small_quotients(alg: GradedAlgebra, max_codim: int, budget: int = 2_000_000,
                              stats: dict | None = None):
    """Enumerate graded ideals of codimension <= max_codim.

    Each ideal is described by per-degree annihilator matrices.  Yields
    ``dict degree -> RREF rows``; raises :class:`BudgetExceeded` once more
    than ``budget`` candidate subspaces have been tried.
    """
    ground = alg.ring
    if not getattr(ground, "is_finite", False) or hasattr(ground, "ground"):
        raise BudgetExceeded("enumeration needs a finite ground field")
    p = ground.characteristic
    degs = alg.degree_list()
    dims = {d: len(alg.component(d)) for d in degs}
    blocks = _mult_blocks(alg, p)
    cache: dict[tuple[int, int], list] = {}
    stats = stats if stats is not None else {}
    stats["candidates"] = 0

    def options(d, c):
        key = (d, c)
        if key not in cache:
            opts = []
            for rows in _subspace_annihilators(p, dims[d], c):
                opts.append((rows, _null_basis(p, rows, dims[d])))
            cache[key] = opts
        return cache[key]

    def compatible(assign, d):
        # check every constraint between d and already assigned degrees
        for (s, t), mats in blocks.items():
            if (s == d and t in assign) or (t == d and s in assign):
                ann = assign[t][0]
                if not ann:
                    continue
                kb = assign[s][1]
                for m in mats:
                    for v in kb:
                        img = [sum(m[r][c] * v[c] for c in range(len(v))) % p for r in range(len(m))]
                        for row in ann:
                            if sum(a * b for a, b in zip(row, img)) % p:
                                return False
        return True

    def rec(k, left, assign):
        if k == len(degs):
            yield {d: assign[d][0] for d in degs}
            return
        d = degs[k]
        for c in range(0, min(left, dims[d]) + 1):
            for opt in options(d, c):
                stats["candidates"] += 1
                if stats["candidates"] > budget:
                    raise BudgetExceeded(f"more than {budget} candidate subspaces")
                assign[d] = opt
                if compatible(assign, d):
                    yield from rec(k + 1, left - c, assign)
                del assign[d]

    yield from rec(0, max_codim, {})


def ideal_from_annihilators(alg: GradedAlgebra, ann: dict) -> GradedIdeal:
    ring = alg.ring
    p = ring.characteristic
    vecs = []
    for d, rows in ann.items():
        idx = alg.component(d)
        for v in _null_basis(p, rows, len(idx)) if rows else [[1 if i == j else 0 for j in range(len(idx))]
                                                             for i in range(len(idx))]:
            vecs.append({idx[j]: ring.coerce(x) for j, x in enumerate(v) if x})
    return GradedIdeal.from_vectors(alg, vecs)


def a_slash_r(alg: GradedAlgebra, r: int, budget: int = 2_000_000, keep: bool = False) -> SlashResult:
    """A^{/r}: intersection of all graded ideals of codimension < r."""
    if r < 1:
        raise IdealError("r must be at least 1")
    if r == 1:
        return SlashResult(whole(alg), "exact", 0, 1, r)
    ring = alg.ring
    spans: dict[int, la.RowSpace] = {d: la.RowSpace(ring) for d in alg.degree_list()}
    dims = {d: len(alg.component(d)) for d in alg.degree_list()}
    found = 0
    kept = []
    status = "exact"
    stats: dict = {}
    try:
        gen = enumerate_small_quotients(alg, r - 1, budget, stats)
        for ann in gen:
            found += 1
            if keep:
                kept.append(ann)
            for d, rows in ann.items():
                for row in rows:
                    spans[d].add({j: ring.coerce(x) for j, x in enumerate(row) if x})
            if not keep and all(spans[d].rank == dims[d] for d in dims):
                break
    except BudgetExceeded:
        status = "partial"
    candidates = stats.get("candidates", 0)
    vecs = []
    for d in alg.degree_list():
        idx = alg.component(d)
        rows = spans[d].basis()
        # kernel of the stacked annihilator rows
        images = [{r_i: row.get(j, ring.zero()) for r_i, row in enumerate(rows)} for j in range(len(idx))]
        images = [la.clean(ring, v) for v in images]
        for kv in la.kernel(ring, images, offset=len(rows)):
            vecs.append({idx[j]: c for j, c in kv.items()})
    ideal = GradedIdeal.from_vectors(alg, vecs)
    return SlashResult(ideal, status, candidates, found, r, kept)


@dataclass
class RankReport:
    d: int
    value: int
    mode: str
    status: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"d": self.d, "value": self.value, "mode": self.mode, "status": self.status,
                "detail": self.detail}


def d_rank(alg: GradedAlgebra, d: int, mode: str = "exact", budget: int = 2_000_000,
           factors: Sequence[GradedAlgebra] | None = None) -> RankReport:
    """rk_d A = max r with (A^{/r})^{*d} != 0.

    Exact mode walks r upward and stops at the first vanishing power.  When
    enumeration exceeds the budget the report is downgraded to a lower bound:
    the largest r certified so far, improved by a Kunneth witness when the
    algebra's factors are known.
    """
    if d < 1:
        raise IdealError("d must be at least 1")
    if alg.dim == 0:
        raise IdealError("zero algebra")
    witness_bound = 1
    if factors is None:
        factors = alg.meta.get("factors")
    if mode == "lower_bound" or mode == "exact":
        pass
    else:
        raise IdealError(f"unknown mode {mode!r}")
    if mode == "lower_bound":
        if factors and len(factors) == d:
            w = kunneth_rank_witness(factors, min(f.dim for f in factors), mode="certificate")
            witness_bound = w.bound if w.ok else 1
        return RankReport(d, witness_bound, mode, "lower_bound", {"source": "kunneth" if witness_bound > 1 else "trivial"})
    best = 1
    r = 2
    history = []
    while r <= alg.dim + 1:
        res = a_slash_r(alg, r, budget)
        nonzero = not ideal_power(res.ideal, d).is_zero() if not res.ideal.is_zero() else False
        history.append({"r": r, "status": res.status, "dim": res.ideal.dim, "power_nonzero": nonzero})
        if res.status != "exact":
            return RankReport(d, best, "exact", "lower_bound",
                              {"history": history, "reason": "budget exceeded"})
        if not nonzero:
            break
        best = r
        r += 1
    return RankReport(d, best, "exact", "exact", {"history": history})


# ----------------------------------------------------------------------------
# Kunneth witnesses


def every_nonzero_ideal_contains_top(alg: GradedAlgebra, exhaustive_limit: int = 1 << 12) -> bool:
    """True when every nonzero graded ideal contains the top class.

    Certificate: the top degree is spanned by the top class and the pairing
    (x, y) -> coefficient of top in xy is nondegenerate between
    complementary degrees, so each nonzero homogeneous x has a multiple
    equal to a nonzero multiple of top.  Over a small finite field the
    statement is also confirmed by brute force over homogeneous elements.
    """
    top = alg.meta.get("top")
    if top is None:
        raise AlgebraError("algebra has no designated top class")
    ring = alg.ring
    top_deg = alg.degrees[top]
    if alg.component(top_deg) != [top]:
        return False
    for d in alg.degree_list():
        idx = alg.component(d)
        dual = alg.component(top_deg - d)
        images = [{k: alg.mul_basis(i, j)[top] for k, j in enumerate(dual) if top in alg.mul_basis(i, j)}
                  for i in idx]
        if la.rank(ring, images) != len(idx):
            return False
    finite = getattr(ring, "is_finite", False) and not hasattr(ring, "ground")
    if finite:
        top_vec = alg.basis(top)
        for d in alg.degree_list():
            idx = alg.component(d)
            if ring.characteristic ** len(idx) > exhaustive_limit:
                continue
            for coeffs in itertools.product(ring.elements(), repeat=len(idx)):
                if not any(coeffs):
                    continue
                x = {i: ring.coerce(c) for i, c in zip(idx, coeffs) if c}
                if not principal(alg, x).contains(top_vec):
                    return False
    return True


@dataclass
class WitnessReport:
    algebra: GradedAlgebra
    witnesses: list
    product: dict
    bound: int
    d: int
    ok: bool
    checks: dict

    def to_json(self) -> dict:
        alg = self.algebra
        return {"witnesses": [alg.format(w) for w in self.witnesses], "product": alg.format(self.product),
                "bound": self.bound, "d": self.d, "ok": self.ok, "checks": self.checks}


def kunneth_rank_witness(factors: Sequence[GradedAlgebra], m: int, mode: str = "certificate",
                         budget: int = 2_000_000, algebra: GradedAlgebra | None = None) -> WitnessReport:
    """Witnesses 1 x ... x [X_i] x ... x 1 in the tensor product.

    ``mode`` "certificate" verifies that every nonzero graded ideal of each
    factor contains its top class (so each witness lies in A^{/m});
    "spot-check" additionally enumerates the codim < m ideals of the
    product and tests membership directly.
    """
    if not factors:
        raise AlgebraError("need at least one factor")
    for f in factors:
        if "top" not in f.meta:
            raise AlgebraError(f"factor {f.name} has no designated top class")
        if f.dim < m:
            raise AlgebraError(f"factor {f.name} has dimension {f.dim} < m = {m}")
    alg = algebra if algebra is not None else (factors[0] if len(factors) == 1 else product(list(factors), validate=False))
    dims = [f.dim for f in factors]
    witnesses = []
    for k, f in enumerate(factors):
        # index in row-major product basis
        idx = 0
        for j, g in enumerate(factors):
            idx = idx * dims[j] + (f.meta["top"] if j == k else g.unit)
        witnesses.append(alg.basis(idx))
    prod = alg.one()
    for w in witnesses:
        prod = alg.mul(prod, w)
    checks = {"product_nonzero": bool(prod)}
    if "top" in alg.meta:
        checks["product_is_top"] = set(prod) == {alg.meta["top"]}
    checks["factor_top_in_every_ideal"] = all(every_nonzero_ideal_contains_top(f) for f in factors)
    if mode == "spot-check":
        res = a_slash_r(alg, m, budget)
        checks["enumeration_status"] = res.status
        checks["witnesses_in_slash"] = all(res.ideal.contains(w) for w in witnesses)
    elif mode != "certificate":
        raise IdealError(f"unknown witness mode {mode!r}")
    ok = checks["product_nonzero"] and checks["factor_top_in_every_ideal"] and checks.get("witnesses_in_slash", True)
    return WitnessReport(alg, witnesses, prod, m if ok else 1, len(factors), ok, checks)
