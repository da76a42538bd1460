"""Novikov coefficients: ground fields, truncated series in T, valuations,
interval modules and completed colimits of based module rays.

A scalar is a finite list of terms ``c * T**e`` with exact rational
exponents, together with a precision ``r``: the scalar is known modulo
``T**r``.  Exact (untruncated) scalars have ``precision == INF``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

INF = math.inf


class NovikovError(ValueError):
    """Raised for malformed scalars or unsupported operations."""


class IndeterminateError(NovikovError):
    """The leading term of a truncated scalar is not resolved."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise NovikovError("exponents must be exact rationals, got a float")
    return Fraction(x)


def _prec(x):
    if x is None or x == INF:
        return INF
    return _frac(x)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class GroundField:
    """The base field F: ``F2``, ``Fp`` (with prime ``p``) or ``Q``."""

    kind: str = "F2"
    p: int = 2

    def __post_init__(self):
        if self.kind == "F2":
            object.__setattr__(self, "p", 2)
        elif self.kind == "Fp":
            if not _is_prime(self.p):
                raise NovikovError(f"Fp needs a prime, got {self.p}")
            if self.p == 2:
                object.__setattr__(self, "kind", "F2")
        elif self.kind == "Q":
            object.__setattr__(self, "p", 0)
        else:
            raise NovikovError(f"unknown ground field kind {self.kind!r}")

    @property
    def name(self) -> str:
        return {"F2": "F2", "Q": "Q"}.get(self.kind, f"F{self.p}")

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def is_finite(self) -> bool:
        return self.kind != "Q"

    # ring interface shared with NovikovField
    def zero(self):
        return Fraction(0) if self.kind == "Q" else 0

    def one(self):
        return Fraction(1) if self.kind == "Q" else 1

    def coerce(self, x):
        if self.kind == "Q":
            if isinstance(x, str):
                return Fraction(x)
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator != 1:
                return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
            x = x.numerator
        if isinstance(x, str):
            return self.coerce(Fraction(x))
        return int(x) % self.p

    def add(self, a, b):
        return a + b if self.kind == "Q" else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.kind == "Q" else (a - b) % self.p

    def neg(self, a):
        return -a if self.kind == "Q" else (-a) % self.p

    def mul(self, a, b):
        return a * b if self.kind == "Q" else (a * b) % self.p

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a) if self.kind == "Q" else pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def exact_div(self, a, b):
        return self.div(a, b)

    def is_zero(self, a) -> bool:
        return a == 0

    def is_unit(self, a) -> bool:
        return a != 0

    def sign(self, k: int):
        """(-1)**k as a field element."""
        return self.one() if k % 2 == 0 else self.neg(self.one())

    def elements(self):
        if not self.is_finite:
            raise NovikovError("cannot enumerate an infinite field")
        return range(self.p)

    def to_json(self, a):
        if self.kind == "Q":
            a = Fraction(a)
            return a.numerator if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
        return int(a)

    def from_json(self, x):
        return self.coerce(x)

    def describe(self) -> dict:
        return {"kind": self.kind, "p": self.p} if self.kind == "Fp" else {"kind": self.kind}


F2 = GroundField("F2")
QQ = GroundField("Q")


class NovikovScalar:
    """Element of the Novikov field, truncated at ``precision``."""

    __slots__ = ("field", "terms", "precision")

    def __init__(self, field: GroundField, terms: Iterable = (), precision=INF):
        self.field = field
        self.precision = _prec(precision)
        acc: dict[Fraction, object] = {}
        for c, e in terms:
            e = _frac(e)
            if e >= self.precision:
                continue
            c = field.coerce(c)
            acc[e] = field.add(acc[e], c) if e in acc else c
        self.terms = tuple((e, c) for e, c in sorted(acc.items()) if not field.is_zero(c))

    @classmethod
    def _raw(cls, field, terms, precision):
        x = cls.__new__(cls)
        x.field = field
        x.terms = terms
        x.precision = precision
        return x

    @classmethod
    def monomial(cls, field: GroundField, coeff=1, exponent=0, precision=INF):
        return cls(field, [(coeff, exponent)], precision)

    # basic predicates
    def is_zero(self) -> bool:
        """True when no term survives below the precision."""
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    @property
    def nonnegative(self) -> bool:
        return all(e >= 0 for e, _ in self.terms)

    def valuation(self):
        if self.terms:
            return self.terms[0][0]
        if self.precision == INF:
            return INF
        raise IndeterminateError(
            f"leading term unresolved below precision {self.precision}")

    def leading(self):
        if not self.terms:
            self.valuation()
            raise NovikovError("zero has no leading term")
        e, c = self.terms[0]
        return c, e

    def _lowest(self):
        return self.terms[0][0] if self.terms else self.precision

    # arithmetic
    def _coerce_other(self, other):
        if isinstance(other, NovikovScalar):
            if other.field != self.field:
                raise NovikovError("ground field mismatch")
            return other
        return NovikovScalar(self.field, [(other, 0)])

    def __add__(self, other):
        other = self._coerce_other(other)
        return NovikovScalar(self.field, self.terms_as_pairs() + other.terms_as_pairs(),
                             min(self.precision, other.precision))

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        return NovikovScalar._raw(f, tuple((e, f.neg(c)) for e, c in self.terms), self.precision)

    def __sub__(self, other):
        return self + (-self._coerce_other(other))

    def __rsub__(self, other):
        return self._coerce_other(other) - self

    def __mul__(self, other):
        other = self._coerce_other(other)
        # the product is known modulo T**p with p below both inputs' cutoffs
        # shifted by the other factor's lowest exponent; for nonnegative
        # inputs this is min(precision) or better.
        p1, p2 = self.precision, other.precision
        prec = min(p1 + min(0, other._lowest()) if p1 != INF else INF,
                   p2 + min(0, self._lowest()) if p2 != INF else INF)
        f = self.field
        out = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                out.append((f.mul(c1, c2), e1 + e2))
        return NovikovScalar(f, out, prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = NovikovScalar.monomial(self.field)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self, precision=None):
        """Multiplicative inverse.

        A monomial is inverted exactly.  Otherwise the leading monomial is
        factored out and ``1/(1+u)`` is expanded as a geometric series up to
        the working precision, which is the input precision (or the explicit
        ``precision`` argument for exact inputs), shifted by ``-2*valuation``.
        """
        if self.is_zero():
            if self.precision != INF:
                raise IndeterminateError("cannot invert: leading term unresolved")
            raise ZeroDivisionError("inverse of zero")
        f = self.field
        c, a = self.leading()
        cinv = f.inv(c)
        if self.is_monomial() and self.precision == INF:
            return NovikovScalar._raw(f, ((-a, cinv),), INF)
        target = self.precision if precision is None else min(_prec(precision), self.precision)
        if target == INF:
            raise NovikovError(
                "inverse of a non-monomial is an infinite series; pass a precision")
        rel = target - a  # relative precision of the normalised unit
        u = NovikovScalar(f, [(f.mul(cinv, cc), e - a) for e, cc in self.terms[1:]], rel)
        series = NovikovScalar(f, [(1, 0)], rel)
        power = NovikovScalar(f, [(1, 0)], rel)
        neg_u = -u
        while True:
            power = power * neg_u
            if power.is_zero():
                break
            series = series + power
        out = [(f.mul(cinv, cc), e - a) for e, cc in series.terms]
        return NovikovScalar(f, out, rel - a)

    def __truediv__(self, other):
        other = self._coerce_other(other)
        return self * other.inverse()

    def exact_div(self, other):
        """Exact quotient of finite polynomials; raises if not divisible."""
        other = self._coerce_other(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero")
        if self.precision != INF or other.precision != INF:
            raise NovikovError("exact division needs untruncated operands")
        if other.is_monomial():
            return self * other.inverse()
        f = self.field
        c0, e0 = other.leading()
        c0inv = f.inv(c0)
        top_self = self.terms[-1][0] if self.terms else 0
        bound = top_self - other.terms[-1][0]
        rem = self
        quot = []
        while not rem.is_zero():
            c, e = rem.leading()
            qe = e - e0
            if qe > bound:
                raise NovikovError("polynomial division is not exact")
            qc = f.mul(c, c0inv)
            quot.append((qc, qe))
            rem = rem - NovikovScalar._raw(f, ((qe, qc),), INF) * other
        return NovikovScalar(f, quot)

    def truncate(self, r):
        """Image in the quotient by T**r."""
        r = _frac(r)
        if r <= 0:
            raise NovikovError("truncation cutoff must be positive")
        prec = min(self.precision, r)
        return NovikovScalar._raw(self.field, tuple(t for t in self.terms if t[0] < prec), prec)

    def shift(self, e):
        """Multiply by T**e."""
        e = _frac(e)
        prec = self.precision + e if self.precision != INF else INF
        return NovikovScalar._raw(self.field, tuple((x + e, c) for x, c in self.terms), prec)

    # comparison / hashing
    def terms_as_pairs(self):
        return [(c, e) for e, c in self.terms]

    def __eq__(self, other):
        if isinstance(other, NovikovScalar):
            return (self.field == other.field and self.terms == other.terms
                    and self.precision == other.precision)
        if isinstance(other, (int, Fraction)):
            return self == self._coerce_other(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.terms, self.precision))

    def equal_mod(self, other, r) -> bool:
        return self.truncate(r).terms == self._coerce_other(other).truncate(r).terms

    def __repr__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for e, c in self.terms:
                cs = self.field.to_json(c)
                if e == 0:
                    parts.append(f"{cs}")
                else:
                    parts.append(("" if cs == 1 else f"{cs}*") + f"T^{e}")
            body = " + ".join(parts)
        if self.precision != INF:
            body += f" + O(T^{self.precision})"
        return body

    def to_json(self) -> dict:
        prec = self.precision
        return {
            "terms": [[self.field.to_json(c), e.numerator, e.denominator] for e, c in self.terms],
            "precision": None if prec == INF else [prec.numerator, prec.denominator],
        }

    @classmethod
    def from_json(cls, field: GroundField, doc) -> "NovikovScalar":
        if isinstance(doc, (int, str)):
            return cls(field, [(doc, 0)])
        prec = doc.get("precision")
        if prec is not None:
            prec = Fraction(prec[0], prec[1]) if isinstance(prec, list) else Fraction(prec)
        return cls(field, [(c, Fraction(n, d)) for c, n, d in doc["terms"]], prec)


def T(field: GroundField = F2, exponent=1, coeff=1) -> NovikovScalar:
    return NovikovScalar.monomial(field, coeff, exponent)


def valuation(x: NovikovScalar):
    return x.valuation()


def truncate(x: NovikovScalar, r) -> NovikovScalar:
    return x.truncate(r)


def arithmetic(x: NovikovScalar, y: NovikovScalar | None, op: str) -> NovikovScalar:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "invert":
        return x.inverse()
    raise NovikovError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class NovikovField:
    """The Novikov field over a ground field, as a coefficient ring."""

    ground: GroundField = F2

    @property
    def name(self) -> str:
        return f"Lambda[{self.ground.name}]"

    @property
    def characteristic(self) -> int:
        return self.ground.characteristic

    is_finite = False

    def zero(self):
        return NovikovScalar._raw(self.ground, (), INF)

    def one(self):
        return NovikovScalar._raw(self.ground, ((Fraction(0), self.ground.one()),), INF)

    def coerce(self, x):
        if isinstance(x, NovikovScalar):
            if x.field != self.ground:
                raise NovikovError("ground field mismatch")
            return x
        if isinstance(x, dict):
            return NovikovScalar.from_json(self.ground, x)
        return NovikovScalar(self.ground, [(x, 0)])

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return a.inverse()

    def div(self, a, b):
        return a * b.inverse()

    def exact_div(self, a, b):
        return a.exact_div(b)

    def is_zero(self, a) -> bool:
        return a.is_zero()

    def is_unit(self, a) -> bool:
        """Units that can be inverted without truncation: monomials."""
        return a.is_monomial() and a.precision == INF

    def sign(self, k: int):
        return self.one() if k % 2 == 0 else -self.one()

    def monomial(self, coeff=1, exponent=0):
        return NovikovScalar.monomial(self.ground, coeff, exponent)

    def to_json(self, a):
        return a.to_json()

    def from_json(self, x):
        return self.coerce(x)

    def describe(self) -> dict:
        return {"kind": "Lambda", "ground": self.ground.describe()}


def ring_from_json(doc) -> GroundField | NovikovField:
    """Coefficient ring from its description (inverse of ``describe``)."""
    if doc is None:
        return F2
    if isinstance(doc, str):
        doc = {"kind": doc}
    kind = doc.get("kind", "F2")
    if kind == "Lambda":
        return NovikovField(ring_from_json(doc.get("ground")))
    if kind == "Fp":
        return GroundField("Fp", int(doc["p"]))
    return GroundField(kind)


@dataclass(frozen=True)
class IntervalModule:
    """The subquotient Lambda_{[a,b)} = Lambda_{>=a} / Lambda_{>=b}."""

    lower: Fraction
    upper: object = INF

    def __post_init__(self):
        object.__setattr__(self, "lower", _frac(self.lower))
        object.__setattr__(self, "upper", _prec(self.upper))
        if not self.lower < self.upper:
            raise NovikovError("interval module needs lower < upper")

    def contains(self, x: NovikovScalar) -> bool:
        """Whether x represents an element (valuation at least ``lower``)."""
        if x.is_zero():
            return True
        return x.valuation() >= self.lower

    def reduce(self, x: NovikovScalar) -> NovikovScalar:
        if not self.contains(x):
            raise NovikovError("element below the interval's lower end")
        if self.upper == INF:
            return x
        return x.truncate(self.upper)

    def is_zero_element(self, x: NovikovScalar) -> bool:
        return self.reduce(x).is_zero()


@dataclass
class BasedModule:
    """Free module with a finite labelled, graded basis."""

    ring: object
    labels: list = field(default_factory=list)
    degrees: list = field(default_factory=list)

    def __post_init__(self):
        if not self.degrees:
            self.degrees = [0] * len(self.labels)
        if len(self.degrees) != len(self.labels):
            raise NovikovError("labels and degrees differ in length")

    @property
    def rank(self) -> int:
        return len(self.labels)

    def zero_vector(self):
        return [self.ring.zero()] * self.rank


def apply_matrix(ring, matrix: Sequence[Sequence], vector: Sequence) -> list:
    """matrix is a list of rows (target x source)."""
    out = []
    for row in matrix:
        acc = ring.zero()
        for a, x in zip(row, vector):
            if not ring.is_zero(a) and not ring.is_zero(x):
                acc = ring.add(acc, ring.mul(a, x))
        out.append(acc)
    return out


def _identity(ring, n):
    return [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]


@dataclass
class Ray:
    """A ray C_1 -> C_2 -> ... of based modules.

    ``modules`` and ``maps`` may be lists or callables ``i -> object``
    (1-based), so infinite rays are stored lazily.  ``maps(i)`` goes from
    stage i to stage i+1 and is a list of rows with entries in Lambda_{>=0}.
    ``tail`` describes what happens beyond any finite prefix: "stabilized"
    (all later maps are identities), "contracting" (every later map has all
    entries of valuation >= ``contraction``) or "unknown".
    """

    modules: object
    maps: object
    tail: str = "unknown"
    contraction: Fraction | None = None
    length: int | None = None

    def module(self, i: int) -> BasedModule:
        return self.modules(i) if callable(self.modules) else self.modules[i - 1]

    def map(self, i: int):
        return self.maps(i) if callable(self.maps) else self.maps[i - 1]

    def known_maps(self) -> int:
        if self.length is not None:
            return self.length - 1
        if callable(self.maps):
            raise NovikovError("lazy ray without a declared prefix length")
        return len(self.maps)


def constant_ray(module: BasedModule, length: int = 3) -> Ray:
    ident = _identity(module.ring, module.rank)
    return Ray([module] * length, [ident] * (length - 1), tail="stabilized", length=length)


def multiplication_ray(field: GroundField = F2, c=1) -> Ray:
    """Lambda_{>=0} -> Lambda_{>=0} -> ..., every map multiplication by T**c."""
    ring = NovikovField(field)
    mod = BasedModule(ring, ["1"], [0])
    step = [[NovikovScalar.monomial(field, 1, c)]]
    return Ray(lambda i: mod, lambda i: step, tail="contracting",
               contraction=_frac(c), length=None)


@dataclass
class CompletedColimit:
    """The completed direct limit of a ray, represented at ``precision``."""

    module: BasedModule
    precision: object
    stages_checked: int
    reason: str

    @property
    def is_zero(self) -> bool:
        return self.module.rank == 0


def _map_min_valuation(ring, matrix) -> Fraction | float:
    vals = [x.valuation() for row in matrix for x in row if not x.is_zero()]
    return min(vals) if vals else INF


def _is_identity(ring, matrix) -> bool:
    n = len(matrix)
    for i, row in enumerate(matrix):
        if len(row) != n:
            return False
        for j, x in enumerate(row):
            want = ring.one() if i == j else ring.zero()
            if ring.coerce(x) != want:
                return False
    return True


def completed_image(ray: Ray, stage: int, vector: Sequence, precision, max_steps: int = 10_000):
    """Image of ``vector`` (in stage ``stage``) in the completed colimit at
    the given precision.

    Returns ``(stage_reached, image)`` where ``image`` is the truncated
    vector in that stage, or ``None`` once it is zero modulo T**precision.
    For a contracting tail the vector is pushed until it vanishes; for a
    stabilized tail it is pushed to the end of the known prefix.
    """
    r = _frac(precision)
    ring = ray.module(stage).ring
    vec = [ring.coerce(x).truncate(r) for x in vector]
    i = stage
    steps = 0
    while True:
        if all(x.is_zero() for x in vec):
            return i, None
        if ray.tail == "stabilized":
            if ray.length is not None and i >= ray.length:
                return i, vec
            if not callable(ray.maps) and i > len(ray.maps):
                return i, vec
        elif ray.tail != "contracting":
            if ray.length is not None and i >= ray.length:
                raise NovikovError("ray tail is unknown; completed image undefined")
        if steps >= max_steps:
            raise NovikovError("ray did not vanish within the step budget")
        vec = [x.truncate(r) for x in apply_matrix(ring, ray.map(i), vec)]
        i += 1
        steps += 1


def completed_colimit(ray: Ray, precision, check_stages: int = 3) -> CompletedColimit:
    """Completed direct limit of a ray of based modules at a precision.

    Supported shapes: rays whose tail is stabilized (the answer is the last
    module of the prefix, after checking the maps there are identities) and
    rays with monomial-weighted maps whose valuations are bounded below by a
    fixed c > 0 (the answer is the zero module).  For the latter every basis
    vector of the first ``check_stages`` stages is pushed along the ray until
    its image is zero modulo T**precision.
    """
    r = _frac(precision)
    if r <= 0:
        raise NovikovError("precision must be positive")
    first = ray.module(1)
    ring = first.ring
    if ray.tail == "stabilized":
        n = ray.known_maps()
        last = ray.module(n + 1)
        if n and not _is_identity(ring, ray.map(n)):
            raise NovikovError("stabilized ray must end with identity maps")
        return CompletedColimit(last, r, n + 1, "stabilized tail: colimit is the last module")
    if ray.tail == "contracting":
        c = ray.contraction
        if c is None or c <= 0:
            raise NovikovError("contracting ray needs a positive contraction exponent")
        for i in range(1, check_stages + 1):
            mat = ray.map(i)
            if _map_min_valuation(ring, mat) < c:
                raise NovikovError(f"map {i} has an entry of valuation below {c}")
            mod = ray.module(i)
            for j in range(mod.rank):
                e = [ring.zero()] * mod.rank
                e[j] = ring.one()
                _, img = completed_image(ray, i, e, r)
                if img is not None:
                    raise NovikovError("basis vector survived in a contracting ray")
        return CompletedColimit(BasedModule(ring, [], []), r, check_stages,
                                f"every map factors through T^{c}; images vanish below T^{r}")
    raise NovikovError("unsupported ray shape: tail must be 'stabilized' or 'contracting'")


def steps_to_vanish(c, precision) -> int:
    """Number of T**c-contracting steps after which T**precision divides."""
    return math.ceil(_frac(precision) / _frac(c))

