"""Exact elimination over the coefficient rings used in the package.

Vectors are sparse dicts ``{column: nonzero entry}``.  A *ring* is any
object with the interface of :class:`~ivmeasure.novikov.GroundField`
(``zero, one, add, sub, neg, mul, inv, is_zero, is_unit, exact_div``).
Over a ground field every nonzero entry is a unit and :class:`RowSpace`
keeps a reduced row echelon form.  Over the Novikov field only monomials
are inverted exactly; a column whose entries are all non-monomial is
eliminated by cross multiplication and the space is flagged
non-canonical, so equality falls back to rank tests.
"""
from __future__ import annotations

from typing import Iterable, Sequence


def axpy(ring, x: dict, a, y: dict) -> dict:
    """Return x + a*y (new dict)."""
    out = dict(x)
    for k, v in y.items():
        t = ring.mul(a, v)
        if k in out:
            s = ring.add(out[k], t)
            if ring.is_zero(s):
                del out[k]
            else:
                out[k] = s
        elif not ring.is_zero(t):
            out[k] = t
    return out


def scale(ring, a, x: dict) -> dict:
    out = {}
    for k, v in x.items():
        t = ring.mul(a, v)
        if not ring.is_zero(t):
            out[k] = t
    return out


def clean(ring, x: dict) -> dict:
    return {k: v for k, v in x.items() if not ring.is_zero(v)}


class RowSpace:
    """Incrementally maintained row space in reduced echelon form."""

    def __init__(self, ring, rows: Iterable[dict] = ()):
        self.ring = ring
        self.pivots: dict[int, dict] = {}
        self.canonical = True
        for r in rows:
            self.add(r)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def copy(self) -> "RowSpace":
        other = RowSpace(self.ring)
        other.pivots = dict(self.pivots)
        other.canonical = self.canonical
        return other

    def reduce(self, v: dict) -> dict:
        ring = self.ring
        v = clean(ring, v)
        for c in sorted(self.pivots):
            a = v.get(c)
            if a is None:
                continue
            row = self.pivots[c]
            p = row[c]
            if ring.is_unit(p) and p == ring.one():
                v = axpy(ring, v, ring.neg(a), row)
            elif ring.is_unit(p):
                v = axpy(ring, v, ring.neg(ring.div(a, p)), row)
            else:
                v = axpy(ring, scale(ring, p, v), ring.neg(a), row)
        return v

    def contains(self, v: dict) -> bool:
        return not self.reduce(v)

    def add(self, v: dict) -> bool:
        """Insert v; return True when it enlarged the span."""
        ring = self.ring
        r = self.reduce(v)
        if not r:
            return False
        c = min(r)
        p = r[c]
        if ring.is_unit(p):
            inv = ring.inv(p)
            r = scale(ring, inv, r)
            for k, row in list(self.pivots.items()):
                a = row.get(c)
                if a is not None:
                    self.pivots[k] = axpy(ring, row, ring.neg(a), r)
        else:
            self.canonical = False
            for k, row in list(self.pivots.items()):
                a = row.get(c)
                if a is not None:
                    self.pivots[k] = axpy(ring, scale(ring, p, row), ring.neg(a), r)
        self.pivots[c] = r
        return True

    def basis(self) -> list[dict]:
        return [self.pivots[c] for c in sorted(self.pivots)]


def rank(ring, rows: Iterable[dict]) -> int:
    return RowSpace(ring, rows).rank


def same_span(ring, a: Sequence[dict], b: Sequence[dict]) -> bool:
    ra = RowSpace(ring, a)
    if ra.rank != rank(ring, b):
        return False
    return all(ra.contains(v) for v in b)


def kernel(ring, images: Sequence[dict], offset: int | None = None) -> list[dict]:
    """Kernel of the linear map sending basis vector i to ``images[i]``.

    Uses the augmented-row trick: rows ``[image_i | e_i]``; rows whose
    image part is eliminated carry kernel vectors in the second block.
    Returned vectors are indexed by source basis position.
    """
    if offset is None:
        offset = 1 + max((max(v) for v in images if v), default=-1)
    space = RowSpace(ring)
    for i, img in enumerate(images):
        row = dict(img)
        row[offset + i] = ring.one()
        space.add(row)
    out = []
    for c, row in sorted(space.pivots.items()):
        if c >= offset:
            out.append({k - offset: v for k, v in row.items()})
    return out


def intersect(ring, a: Sequence[dict], b: Sequence[dict], offset: int) -> list[dict]:
    """Basis of span(a) & span(b) (Zassenhaus); coordinates below ``offset``."""
    space = RowSpace(ring)
    for v in a:
        row = dict(v)
        row.update({k + offset: x for k, x in v.items()})
        space.add(row)
    for v in b:
        space.add(dict(v))
    out = []
    for c, row in sorted(space.pivots.items()):
        if c >= offset:
            out.append({k - offset: x for k, x in row.items()})
    return out


def bareiss_rank(ring, rows: Sequence[Sequence]) -> int:
    """Rank of a dense matrix by fraction-free elimination.

    Divisions are exact, so polynomial entries over the Novikov field stay
    polynomials of controlled size.  Over a ground field this is ordinary
    elimination in disguise.
    """
    m = [list(r) for r in rows if any(not ring.is_zero(x) for x in r)]
    if not m:
        return 0
    ncols = len(m[0])
    prev = ring.one()
    rk = 0
    col = 0
    nrows = len(m)
    while rk < nrows and col < ncols:
        piv = None
        best = None
        for i in range(rk, nrows):
            x = m[i][col]
            if ring.is_zero(x):
                continue
            key = _pivot_key(ring, x)
            if best is None or key < best:
                best, piv = key, i
        if piv is None:
            col += 1
            continue
        m[rk], m[piv] = m[piv], m[rk]
        p = m[rk][col]
        for i in range(rk + 1, nrows):
            a = m[i][col]
            row_i = m[i]
            row_k = m[rk]
            for j in range(col + 1, ncols):
                t = ring.sub(ring.mul(p, row_i[j]), ring.mul(a, row_k[j]))
                row_i[j] = ring.exact_div(t, prev) if not ring.is_zero(t) else t
            row_i[col] = ring.zero()
        prev = p
        rk += 1
        col += 1
    return rk


def _pivot_key(ring, x):
    """Prefer monomials, then short polynomials of low valuation."""
    terms = getattr(x, "terms", None)
    if terms is None:
        return (0,)
    return (len(terms), terms[0][0])


class Matrix:
    """Sparse matrix ``rows x cols`` over a ring, stored as row dicts."""

    __slots__ = ("ring", "nrows", "ncols", "rows")

    def __init__(self, ring, nrows: int, ncols: int, rows: dict | None = None):
        self.ring = ring
        self.nrows = nrows
        self.ncols = ncols
        self.rows: dict[int, dict] = {}
        if rows:
            for i, r in rows.items():
                r = clean(ring, r)
                if r:
                    self.rows[i] = r

    @classmethod
    def zero(cls, ring, nrows, ncols):
        return cls(ring, nrows, ncols)

    @classmethod
    def identity(cls, ring, n):
        return cls(ring, n, n, {i: {i: ring.one()} for i in range(n)})

    @classmethod
    def from_dense(cls, ring, dense: Sequence[Sequence], ncols: int | None = None):
        nrows = len(dense)
        if ncols is None:
            ncols = len(dense[0]) if dense else 0
        return cls(ring, nrows, ncols,
                   {i: {j: ring.coerce(x) for j, x in enumerate(r)} for i, r in enumerate(dense)})

    @classmethod
    def from_entries(cls, ring, nrows, ncols, entries: Iterable):
        rows: dict[int, dict] = {}
        for i, j, x in entries:
            x = ring.coerce(x)
            if ring.is_zero(x):
                continue
            r = rows.setdefault(i, {})
            r[j] = ring.add(r[j], x) if j in r else x
        return cls(ring, nrows, ncols, rows)

    def entries(self):
        for i in sorted(self.rows):
            r = self.rows[i]
            for j in sorted(r):
                yield i, j, r[j]

    def get(self, i, j):
        return self.rows.get(i, {}).get(j, self.ring.zero())

    def is_zero(self) -> bool:
        return not self.rows

    def dense(self) -> list[list]:
        z = self.ring.zero()
        return [[self.rows.get(i, {}).get(j, z) for j in range(self.ncols)] for i in range(self.nrows)]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        ring = self.ring
        out = {}
        for i, r in self.rows.items():
            acc: dict = {}
            for k, a in r.items():
                o = other.rows.get(k)
                if o:
                    acc = axpy(ring, acc, a, o)
            if acc:
                out[i] = acc
        return Matrix(ring, self.nrows, other.ncols, out)

    def __add__(self, other: "Matrix") -> "Matrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in addition")
        ring = self.ring
        out = {i: dict(r) for i, r in self.rows.items()}
        for i, r in other.rows.items():
            out[i] = axpy(ring, out.get(i, {}), ring.one(), r)
        return Matrix(ring, self.nrows, self.ncols, out)

    def __neg__(self) -> "Matrix":
        return self.scaled(self.ring.neg(self.ring.one()))

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def scaled(self, a) -> "Matrix":
        ring = self.ring
        return Matrix(ring, self.nrows, self.ncols, {i: scale(ring, a, r) for i, r in self.rows.items()})

    def signed(self, k: int) -> "Matrix":
        return self if k % 2 == 0 else -self

    def transpose(self) -> "Matrix":
        out: dict[int, dict] = {}
        for i, r in self.rows.items():
            for j, x in r.items():
                out.setdefault(j, {})[i] = x
        return Matrix(self.ring, self.ncols, self.nrows, out)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and self.rows == other.rows

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols}, nnz={sum(len(r) for r in self.rows.values())})"

    def columns(self) -> list[dict]:
        cols: list[dict] = [{} for _ in range(self.ncols)]
        for i, r in self.rows.items():
            for j, x in r.items():
                cols[j][i] = x
        return cols

    def rank(self) -> int:
        ring = self.ring
        if hasattr(ring, "ground"):
            return bareiss_rank(ring, self.dense())
        return RowSpace(ring, self.rows.values()).rank

    def map_entries(self, fn) -> "Matrix":
        return Matrix(self.ring, self.nrows, self.ncols,
                      {i: {j: fn(x) for j, x in r.items()} for i, r in self.rows.items()})


def block(ring, blocks: Sequence[Sequence[Matrix | None]], row_sizes: Sequence[int],
          col_sizes: Sequence[int]) -> Matrix:
    """Assemble a block matrix; ``None`` blocks are zero."""
    roff = [0]
    for s in row_sizes:
        roff.append(roff[-1] + s)
    coff = [0]
    for s in col_sizes:
        coff.append(coff[-1] + s)
    rows: dict[int, dict] = {}
    for bi, brow in enumerate(blocks):
        for bj, m in enumerate(brow):
            if m is None or m.is_zero():
                continue
            if (m.nrows, m.ncols) != (row_sizes[bi], col_sizes[bj]):
                raise ValueError("block shape mismatch")
            for i, r in m.rows.items():
                tgt = rows.setdefault(roff[bi] + i, {})
                for j, x in r.items():
                    tgt[coff[bj] + j] = x
    return Matrix(ring, roff[-1], coff[-1], rows)


def sub_block(m: Matrix, r0: int, r1: int, c0: int, c1: int) -> Matrix:
    rows = {}
    for i, r in m.rows.items():
        if r0 <= i < r1:
            sel = {j - c0: x for j, x in r.items() if c0 <= j < c1}
            if sel:
                rows[i - r0] = sel
    return Matrix(m.ring, r1 - r0, c1 - c0, rows)


class GF2Basis:
    """Echelon basis of bit-vectors (Python ints) over F2 with combination
    tracking, used for the cubical cochain computations."""

    __slots__ = ("rows", "tags")

    def __init__(self):
        self.rows: dict[int, int] = {}
        self.tags: dict[int, int] = {}

    def reduce(self, v: int, tag: int = 0) -> tuple[int, int]:
        rows = self.rows
        tags = self.tags
        while v:
            hb = v.bit_length() - 1
            r = rows.get(hb)
            if r is None:
                break
            v ^= r
            tag ^= tags[hb]
        return v, tag

    def add(self, v: int, tag: int = 0) -> tuple[int, int]:
        """Insert; returns the reduced residual and its combination tag."""
        v, tag = self.reduce(v, tag)
        if v:
            hb = v.bit_length() - 1
            self.rows[hb] = v
            self.tags[hb] = tag
        return v, tag

    @property
    def rank(self) -> int:
        return len(self.rows)


def gf2_rank(vectors: Iterable[int]) -> int:
    rows: dict[int, int] = {}
    for v in vectors:
        while v:
            hb = v.bit_length() - 1
            r = rows.get(hb)
            if r is None:
                rows[hb] = v
                break
            v ^= r
    return len(rows)
