"""Finite-dimensional graded skew-commutative unital algebras given by
structure constants, their regradings, graded tensor products and the
standard models (tori, projective spaces, quantum cohomology of the
sphere and of tori).

Elements are sparse dicts ``{basis index: coefficient}``.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from . import _linalg as la
from .novikov import F2, GroundField, NovikovField, NovikovScalar, ring_from_json


class AlgebraError(ValueError):
    """An algebra or morphism violates one of its defining invariants."""


def _norm_degree(d: int, modulus: int) -> int:
    return d % modulus if modulus else d


@dataclass
class GradedAlgebra:
    """Graded algebra with basis ``labels``, degrees, a unit basis element
    and structure constants ``products[(i, j)] = {k: c_ij^k}``.

    ``modulus`` is 0 for Z-graded algebras and an even 2k otherwise.
    ``meta`` carries optional model data (generator subsets for exterior
    algebras, top class index, factor list for tensor products).
    """

    ring: object
    labels: list
    degrees: list
    unit: int
    products: dict
    modulus: int = 0
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.modulus < 0 or self.modulus % 2:
            raise AlgebraError(f"modulus must be 0 or even positive, got {self.modulus}")
        self.degrees = [_norm_degree(d, self.modulus) for d in self.degrees]
        if len(self.labels) != len(self.degrees):
            raise AlgebraError("labels and degrees differ in length")
        cleaned = {}
        for key, val in self.products.items():
            v = la.clean(self.ring, val)
            if v:
                cleaned[key] = v
        self.products = cleaned
        self._components: dict[int, list[int]] = {}
        for i, d in enumerate(self.degrees):
            self._components.setdefault(d, []).append(i)
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    # basic structure
    @property
    def dim(self) -> int:
        return len(self.labels)

    def degree_list(self) -> list[int]:
        return sorted(self._components)

    def component(self, d: int) -> list[int]:
        return self._components.get(_norm_degree(d, self.modulus), [])

    def component_dims(self) -> dict[int, int]:
        return {d: len(v) for d, v in sorted(self._components.items())}

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise AlgebraError(f"no basis element labelled {label!r}") from None

    def basis(self, i) -> dict:
        if isinstance(i, str):
            i = self.index(i)
        return {i: self.ring.one()}

    def element(self, coeffs: dict) -> dict:
        """Element from ``{label or index: coefficient}``."""
        out = {}
        for k, c in coeffs.items():
            i = self.index(k) if isinstance(k, str) else k
            c = self.ring.coerce(c)
            if not self.ring.is_zero(c):
                out[i] = c
        return out

    def one(self) -> dict:
        return {self.unit: self.ring.one()}

    def degree_of(self, x: dict):
        """Degree of a homogeneous element, None for zero; raises otherwise."""
        degs = {self.degrees[i] for i in x}
        if not degs:
            return None
        if len(degs) > 1:
            raise AlgebraError("element is not homogeneous")
        return degs.pop()

    def is_homogeneous(self, x: dict) -> bool:
        return len({self.degrees[i] for i in x}) <= 1

    def mul_basis(self, i: int, j: int) -> dict:
        return self.products.get((i, j), {})

    def mul(self, x: dict, y: dict) -> dict:
        ring = self.ring
        out: dict = {}
        for i, a in x.items():
            for j, b in y.items():
                p = self.products.get((i, j))
                if p:
                    out = la.axpy(ring, out, ring.mul(a, b), p)
        return out

    def power(self, x: dict, k: int) -> dict:
        out = self.one()
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def add(self, x: dict, y: dict) -> dict:
        return la.axpy(self.ring, x, self.ring.one(), y)

    def scale(self, a, x: dict) -> dict:
        return la.scale(self.ring, self.ring.coerce(a), x)

    def format(self, x: dict) -> str:
        if not x:
            return "0"
        parts = []
        for i in sorted(x):
            c = x[i]
            cs = repr(c) if not isinstance(c, int) else str(c)
            parts.append(self.labels[i] if c == self.ring.one() else f"({cs})*{self.labels[i]}")
        return " + ".join(parts)

    # validation
    def validate(self, mode: str = "full", sample: int = 4000, seed: int = 0) -> None:
        """Check degree additivity, unit laws, skew-commutativity and
        associativity.  ``mode`` is "full" (all triples) or "sampled"
        (all pairs, a deterministic sample of triples)."""
        ring = self.ring
        n = self.dim
        if not 0 <= self.unit < n:
            raise AlgebraError("unit index out of range")
        if self.degrees[self.unit] != 0:
            raise AlgebraError("unit must have degree 0")
        for (i, j), val in self.products.items():
            for k in val:
                if self.degrees[k] != _norm_degree(self.degrees[i] + self.degrees[j], self.modulus):
                    raise AlgebraError(f"degree additivity fails at ({self.labels[i]}, {self.labels[j]}) -> {self.labels[k]}")
        e = self.one()
        for i in range(n):
            b = self.basis(i)
            if self.mul(e, b) != b or self.mul(b, e) != b:
                raise AlgebraError(f"unit law fails at {self.labels[i]}")
        for i in range(n):
            for j in range(i, n):
                s = ring.sign(self.degrees[i] * self.degrees[j])
                lhs = self.mul_basis(i, j)
                rhs = la.scale(ring, s, self.mul_basis(j, i))
                if lhs != rhs:
                    raise AlgebraError(
                        f"skew-commutativity fails at ({self.labels[i]}, {self.labels[j]})")
        if mode == "full":
            triples = itertools.product(range(n), repeat=3)
        else:
            rng = random.Random(seed)
            triples = ((rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(sample))
        for i, j, k in triples:
            a, b, c = self.basis(i), self.basis(j), self.basis(k)
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                raise AlgebraError(
                    f"associativity fails at ({self.labels[i]}, {self.labels[j]}, {self.labels[k]})")

    # serialization
    def to_json(self) -> dict:
        prods = []
        for (i, j), val in sorted(self.products.items()):
            for k, c in sorted(val.items()):
                prods.append({"i": i, "j": j, "k": k, "coeff": self.ring.to_json(c)})
        return {
            "ring": self.ring.describe(),
            "modulus": self.modulus,
            "basis": [{"label": lab, "degree": d} for lab, d in zip(self.labels, self.degrees)],
            "unit": self.unit,
            "products": prods,
        }

    def base_change(self, ring) -> "GradedAlgebra":
        """Same structure constants over a larger ring (F -> Lambda)."""
        prods = {key: {k: ring.coerce(c) for k, c in val.items()}
                 for key, val in self.products.items()}
        return GradedAlgebra(ring, list(self.labels), list(self.degrees), self.unit, prods,
                             self.modulus, self.name, dict(self.meta))


def _validation_mode(dim: int) -> str:
    return "full" if dim <= 32 else "sampled"


def build_algebra(doc: dict, ring=None, validate: bool = True) -> GradedAlgebra:
    """Build and validate an algebra from the structured schema
    ``{modulus, basis: [{label, degree}], unit, products: [{i, j, k, coeff}]}``.

    Indices may be integers or labels.  Omitted products are zero.  A pair
    (i, j) given without its swap (j, i) is completed by skew-symmetry.
    """
    if ring is None:
        ring = ring_from_json(doc.get("ring"))
    try:
        basis = doc["basis"]
        labels = [b["label"] for b in basis]
        degrees = [int(b["degree"]) for b in basis]
    except (KeyError, TypeError) as exc:
        raise AlgebraError(f"malformed basis: {exc}") from None
    index = {lab: i for i, lab in enumerate(labels)}

    def idx(x):
        if isinstance(x, str):
            if x not in index:
                raise AlgebraError(f"unknown label {x!r}")
            return index[x]
        return int(x)

    unit = idx(doc.get("unit", 0))
    modulus = int(doc.get("modulus", 0))
    products: dict = {}
    for p in doc.get("products", []):
        i, j, k = idx(p["i"]), idx(p["j"]), idx(p["k"])
        c = ring.coerce(p.get("coeff", 1))
        slot = products.setdefault((i, j), {})
        slot[k] = ring.add(slot[k], c) if k in slot else c
    # completion by skew-symmetry for pairs given once
    given = set(products)
    for (i, j) in list(given):
        if (j, i) not in given and i != j:
            s = ring.sign(degrees[i] * degrees[j])
            products[(j, i)] = la.scale(ring, s, products[(i, j)])
    # unit products are implied
    for i in range(len(labels)):
        products.setdefault((unit, i), {i: ring.one()})
        products.setdefault((i, unit), {i: ring.one()})
    alg = GradedAlgebra(ring, labels, degrees, unit, products, modulus, doc.get("name", ""))
    if validate:
        alg.validate(_validation_mode(alg.dim))
    return alg


def regrade_mod(alg: GradedAlgebra, modulus: int) -> GradedAlgebra:
    """Regrade a Z-graded algebra modulo an even modulus; 0 is a no-op."""
    if modulus == 0:
        return alg
    if modulus < 0 or modulus % 2:
        raise AlgebraError("regrading modulus must be even and positive")
    if alg.modulus != 0:
        if alg.modulus % modulus == 0:
            pass
        else:
            raise AlgebraError("only Z-graded algebras (or compatible moduli) can be regraded")
    return GradedAlgebra(alg.ring, list(alg.labels), list(alg.degrees), alg.unit,
                         dict(alg.products), modulus, alg.name, dict(alg.meta))


def tensor_kunneth(a: GradedAlgebra, b: GradedAlgebra, validate: bool = True) -> GradedAlgebra:
    """Graded tensor product with (x (x) y)(x' (x) y') = (-1)^{|y||x'|} xx' (x) yy'."""
    if a.ring != b.ring:
        raise AlgebraError("tensor factors must share a coefficient ring")
    if a.modulus and b.modulus and a.modulus != b.modulus:
        raise AlgebraError(f"incompatible moduli {a.modulus} and {b.modulus}")
    modulus = a.modulus or b.modulus
    ring = a.ring
    nb = b.dim
    labels, degrees = [], []
    for i in range(a.dim):
        for j in range(nb):
            labels.append(f"{a.labels[i]}⊗{b.labels[j]}")
            degrees.append(a.degrees[i] + b.degrees[j])
    products = {}
    for (i, i2), pa in a.products.items():
        for (j, j2), pb in b.products.items():
            s = ring.sign(b.degrees[j] * a.degrees[i2])
            out = {}
            for k, ca in pa.items():
                for l, cb in pb.items():
                    c = ring.mul(s, ring.mul(ca, cb))
                    if not ring.is_zero(c):
                        out[k * nb + l] = c
            if out:
                products[(i * nb + j, i2 * nb + j2)] = out
    meta = {"factors": list(a.meta.get("factors", [a])) + list(b.meta.get("factors", [b]))}
    if "top" in a.meta and "top" in b.meta:
        meta["top"] = a.meta["top"] * nb + b.meta["top"]
    if "subsets" in a.meta and "subsets" in b.meta:
        na = len(a.meta.get("generators", []))
        subs = []
        for sa in a.meta["subsets"]:
            for sb in b.meta["subsets"]:
                subs.append(tuple(sa) + tuple(na + x for x in sb))
        meta["subsets"] = subs
        meta["generators"] = list(a.meta.get("generators", [])) + list(b.meta.get("generators", []))
    alg = GradedAlgebra(ring, labels, degrees, a.unit * nb + b.unit, products, modulus,
                        f"{a.name or 'A'}⊗{b.name or 'B'}", meta)
    if validate:
        alg.validate(_validation_mode(alg.dim))
    return alg


def swap_map(a: GradedAlgebra, b: GradedAlgebra):
    """Signed swap A (x) B -> B (x) A as a function on elements."""
    ring = a.ring
    na, nb = a.dim, b.dim

    def apply(x: dict) -> dict:
        out = {}
        for idx, c in x.items():
            i, j = divmod(idx, nb)
            s = ring.sign(a.degrees[i] * b.degrees[j])
            out[j * na + i] = ring.mul(s, c)
        return out

    return apply


# ----------------------------------------------------------------------------
# standard models


def _subset_order(n: int) -> list[tuple[int, ...]]:
    out = []
    for k in range(n + 1):
        out.extend(itertools.combinations(range(n), k))
    return out


def _merge_sign(s: Sequence[int], t: Sequence[int]) -> int:
    inv = 0
    for x in s:
        for y in t:
            if x > y:
                inv += 1
    return inv % 2


def exterior_algebra(names: Sequence[str], ring=F2, degree: int = 1) -> GradedAlgebra:
    """Exterior algebra on generators of the given odd degree."""
    n = len(names)
    subsets = _subset_order(n)
    pos = {s: i for i, s in enumerate(subsets)}
    labels = ["1" if not s else "^".join(names[k] for k in s) for s in subsets]
    degrees = [degree * len(s) for s in subsets]
    products = {}
    for s in subsets:
        for t in subsets:
            if set(s) & set(t):
                continue
            u = tuple(sorted(s + t))
            products[(pos[s], pos[t])] = {pos[u]: ring.sign(_merge_sign(s, t))}
    meta = {"subsets": subsets, "generators": list(names), "top": pos[tuple(range(n))]}
    return GradedAlgebra(ring, labels, degrees, 0, products, 0, f"Ext({','.join(names)})", meta)


def torus(n: int, ring=F2, names: Sequence[str] | None = None, validate: bool = True) -> GradedAlgebra:
    """H*(T^n): exterior algebra on degree-1 classes dual to the circle factors."""
    if n < 0:
        raise AlgebraError("torus dimension must be nonnegative")
    names = list(names) if names is not None else [f"x{i + 1}" for i in range(n)]
    if len(names) != n:
        raise AlgebraError("need one generator name per circle factor")
    alg = exterior_algebra(names, ring)
    alg.name = f"H*(T^{n})"
    alg.meta["model"] = ("torus", n)
    if validate:
        alg.validate(_validation_mode(alg.dim))
    return alg


def cpn(n: int, ring=F2, validate: bool = True) -> GradedAlgebra:
    """H*(CP^n) = F[h]/(h^{n+1}) with deg h = 2."""
    if n < 0:
        raise AlgebraError("CP^n needs n >= 0")
    labels = ["1"] + ["h" if k == 1 else f"h^{k}" for k in range(1, n + 1)]
    degrees = [2 * k for k in range(n + 1)]
    products = {(i, j): {i + j: ring.one()} for i in range(n + 1) for j in range(n + 1) if i + j <= n}
    alg = GradedAlgebra(ring, labels, degrees, 0, products, 0, f"H*(CP^{n})",
                        {"top": n, "model": ("cpn", n)})
    if validate:
        alg.validate()
    return alg


def qh_sphere(ground: GroundField = F2, validate: bool = True) -> GradedAlgebra:
    """QH*(S^2) over the Novikov field: basis {1, h}, h*h = T*1, graded mod 4."""
    ring = NovikovField(ground)
    t = NovikovScalar.monomial(ground, 1, 1)
    products = {(0, 0): {0: ring.one()}, (0, 1): {1: ring.one()}, (1, 0): {1: ring.one()},
                (1, 1): {0: t}}
    alg = GradedAlgebra(ring, ["1", "h"], [0, 2], 0, products, 4, "QH*(S^2)",
                        {"top": 1, "model": ("qh_sphere",)})
    if validate:
        alg.validate()
    return alg


def qh_torus(two_n: int, ground: GroundField = F2, validate: bool = True) -> GradedAlgebra:
    """QH*(T^{2n}) = H*(T^{2n}; Lambda) with the classical product.

    Generators are named p1..pn, q1..qn; the p-classes are the ones dual to
    the first n circle factors.
    """
    if two_n % 2:
        raise AlgebraError("qh_torus needs an even dimension")
    n = two_n // 2
    names = [f"p{i + 1}" for i in range(n)] + [f"q{i + 1}" for i in range(n)]
    alg = exterior_algebra(names, NovikovField(ground))
    alg.name = f"QH*(T^{two_n})"
    alg.meta["model"] = ("qh_torus", two_n)
    if validate:
        alg.validate(_validation_mode(alg.dim))
    return alg


def product(factors: Sequence[GradedAlgebra], validate: bool = True) -> GradedAlgebra:
    if not factors:
        raise AlgebraError("empty product")
    out = factors[0]
    for f in factors[1:]:
        out = tensor_kunneth(out, f, validate=validate)
    return out


def standard_model(name: str, ground: GroundField = F2, **params) -> GradedAlgebra:
    """Dispatch for the named models: torus, cpn, qh_sphere, qh_torus, product."""
    if name == "torus":
        return torus(int(params["n"]), ground)
    if name == "cpn":
        return cpn(int(params["n"]), ground)
    if name == "qh_sphere":
        return qh_sphere(ground)
    if name == "qh_torus":
        return qh_torus(int(params["dim"]), ground)
    if name == "product":
        return product([standard_model(f["name"], ground, **{k: v for k, v in f.items() if k != "name"})
                        for f in params["factors"]])
    raise AlgebraError(f"unknown model {name!r}")


def binomial_dims(n: int) -> list[int]:
    return [comb(n, k) for k in range(n + 1)]


@dataclass
class AlgebraMorphism:
    """Degree-0 linear map given by images of basis elements."""

    source: GradedAlgebra
    target: GradedAlgebra
    images: list  # images[i] = element of target
    check_multiplicative: bool = True

    def __post_init__(self):
        if len(self.images) != self.source.dim:
            raise AlgebraError("need one image per source basis element")
        for i, img in enumerate(self.images):
            for k in img:
                if self.target.degrees[k] != _norm_degree(self.source.degrees[i], self.target.modulus):
                    raise AlgebraError(f"morphism is not degree 0 at {self.source.labels[i]}")
        if self.check_multiplicative:
            if self.apply(self.source.one()) != self.target.one():
                raise AlgebraError("morphism is not unital")
            s = self.source
            for i in range(s.dim):
                for j in range(s.dim):
                    lhs = self.apply(s.mul_basis(i, j))
                    rhs = self.target.mul(self.images[i], self.images[j])
                    if lhs != rhs:
                        raise AlgebraError(
                            f"morphism not multiplicative at ({s.labels[i]}, {s.labels[j]})")

    def apply(self, x: dict) -> dict:
        ring = self.target.ring
        out: dict = {}
        for i, c in x.items():
            out = la.axpy(ring, out, c, self.images[i])
        return out


def augmentation(alg: GradedAlgebra) -> AlgebraMorphism:
    """Restriction to a point: H*(X) -> H*(pt) = F, keeping the unit."""
    pt = GradedAlgebra(alg.ring, ["1"], [0], 0, {(0, 0): {0: alg.ring.one()}}, alg.modulus, "pt")
    images = [{0: alg.ring.one()} if i == alg.unit else {} for i in range(alg.dim)]
    return AlgebraMorphism(alg, pt, images)


def binomial_component_dims(alg: GradedAlgebra) -> list[int]:
    return [len(alg.component(d)) for d in alg.degree_list()]
