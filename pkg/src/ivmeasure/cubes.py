"""Cubes of based complexes and the homotopical constructions built on them.

An n-cube assigns a based cochain complex to every vertex of [0,1]^n and a
map ``f_F`` of degree ``1 - |F|`` to every face ``F``.  Vertices are bit
masks (bit ``i-1`` is coordinate ``i``); a face is a pair ``(ini, ter)`` of
vertex masks with ``ini`` a submask of ``ter``.  Matrices have rows indexed
by the target generators and columns by the source generators.  Absent face
maps are zero.

Every generator also carries a coniform label (a bit mask).  Coning in
direction 1 sets the next label bit on the generators coming from the far
face, which is what lets :func:`inverse_cone` undo iterated cones.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import _linalg as la
from ._linalg import Matrix, block, sub_block
from .novikov import INF, F2, QQ, GroundField, NovikovField, NovikovScalar, ring_from_json


class CubeError(ValueError):
    """Structural problem with cube data."""


class RelationError(CubeError):
    """The cube relation fails on a face."""

    def __init__(self, face: str, residual: Matrix):
        self.face = face
        self.residual = residual
        super().__init__(f"cube relation fails on face {face} "
                         f"({sum(len(r) for r in residual.rows.values())} nonzero residual entries)")


class ConiformError(CubeError):
    """Data is not coniform with respect to its labels."""


class PrecisionError(CubeError):
    """A pivot cannot be resolved at the requested truncation."""


# ----------------------------------------------------------------------------
# bits, faces and signs


def popcount(x: int) -> int:
    return bin(x).count("1")


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def submasks(mask: int) -> Iterable[int]:
    """All submasks of ``mask`` (including 0 and ``mask``)."""
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def faces(n: int) -> list[tuple[int, int]]:
    """All faces of [0,1]^n as (ini, ter), ordered by dimension."""
    out = []
    full = (1 << n) - 1
    for free in range(1 << n):
        rest = full & ~free
        for ini in submasks(rest):
            out.append((ini, ini | free))
    out.sort(key=lambda f: (popcount(f[1] & ~f[0]), f))
    return out


def face_id(face: tuple[int, int], n: int) -> str:
    """Coordinate string: '0', '1' or '*' per coordinate, coordinate 1 first."""
    ini, ter = face
    chars = []
    for i in range(n):
        b = 1 << i
        chars.append("*" if (ter & b) and not (ini & b) else ("1" if ini & b else "0"))
    return "".join(chars)


def parse_face(text: str) -> tuple[int, int]:
    ini = ter = 0
    for i, ch in enumerate(text):
        b = 1 << i
        if ch == "1":
            ini |= b
            ter |= b
        elif ch == "*":
            ter |= b
        elif ch != "0":
            raise CubeError(f"bad face id {text!r}")
    return ini, ter


def vertex_id(v: int, n: int) -> str:
    return "".join("1" if v >> i & 1 else "0" for i in range(n))


def parse_vertex(text: str) -> int:
    if any(ch not in "01" for ch in text):
        raise CubeError(f"bad vertex id {text!r}")
    return sum(1 << i for i, ch in enumerate(text) if ch == "1")


def shuffle_sign(first: Iterable[int], second: Iterable[int]) -> int:
    """Sign of the shuffle putting ``first`` before ``second``.

    Both sets are read inside their ordered union; the sign is the parity of
    pairs ``a`` in ``first``, ``b`` in ``second`` with ``a > b``.
    """
    a = sorted(first)
    b = sorted(second)
    if set(a) & set(b) or len(set(a)) != len(a) or len(set(b)) != len(b):
        raise CubeError("shuffle needs two disjoint sets")
    inv = sum(1 for x in a for y in b if x > y)
    return -1 if inv % 2 else 1


def _mask_shuffle_sign(first: int, second: int) -> int:
    inv = 0
    for j in _bits(second):
        inv += popcount(first >> (j + 1))
    return -1 if inv % 2 else 1


# ----------------------------------------------------------------------------
# the cube type


def _norm_degree(d: int, modulus: int) -> int:
    return d % modulus if modulus else d


@dataclass
class Cube:
    """An n-cube of based complexes over ``ring``.

    ``degrees[v]`` lists the generator degrees at vertex ``v``; ``maps``
    holds the nonzero face maps keyed by ``(ini, ter)``; ``labels[v]`` the
    coniform labels and ``depth`` how many label bits are in use.
    """

    ring: object
    n: int
    degrees: dict
    maps: dict = field(default_factory=dict)
    modulus: int = 0
    labels: dict | None = None
    depth: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise CubeError("cube dimension must be nonnegative")
        nv = 1 << self.n
        if set(self.degrees) != set(range(nv)):
            raise CubeError(f"need generator degrees at all {nv} vertices")
        self.degrees = {v: tuple(_norm_degree(int(d), self.modulus) for d in ds)
                        for v, ds in self.degrees.items()}
        if self.labels is None:
            self.labels = {v: (0,) * len(ds) for v, ds in self.degrees.items()}
        else:
            self.labels = {v: tuple(ls) for v, ls in self.labels.items()}
        clean = {}
        for (ini, ter), m in self.maps.items():
            if ini & ~ter or ter >= nv:
                raise CubeError(f"({ini}, {ter}) is not a face of the {self.n}-cube")
            if (m.nrows, m.ncols) != (self.size(ter), self.size(ini)):
                raise CubeError(f"face {face_id((ini, ter), self.n)}: matrix shape "
                                f"{m.nrows}x{m.ncols}, expected {self.size(ter)}x{self.size(ini)}")
            if not m.is_zero():
                clean[(ini, ter)] = m
        self.maps = clean

    # basic access
    def size(self, v: int) -> int:
        return len(self.degrees[v])

    def face(self, ini: int, ter: int) -> Matrix:
        m = self.maps.get((ini, ter))
        if m is None:
            return Matrix(self.ring, self.size(ter), self.size(ini))
        return m

    def differential(self, v: int) -> Matrix:
        return self.face(v, v)

    @property
    def total_size(self) -> int:
        return sum(len(d) for d in self.degrees.values())

    def __eq__(self, other):
        if not isinstance(other, Cube):
            return NotImplemented
        return (self.n == other.n and self.modulus == other.modulus
                and self.degrees == other.degrees and self.maps == other.maps)

    def same_data(self, other: "Cube") -> bool:
        """Equality including coniform labels."""
        return self == other and self.labels == other.labels and self.depth == other.depth

    def __repr__(self):
        return (f"Cube(n={self.n}, sizes={[self.size(v) for v in range(1 << self.n)]}, "
                f"faces={len(self.maps)}, ring={self.ring.name})")

    # validation
    def degree_violations(self) -> list[str]:
        out = []
        mod = self.modulus
        for (ini, ter), m in self.maps.items():
            shift = 1 - popcount(ter & ~ini)
            for i, j, _ in m.entries():
                want = _norm_degree(self.degrees[ini][j] + shift, mod)
                if self.degrees[ter][i] != want:
                    out.append(face_id((ini, ter), self.n))
                    break
        return out

    def valuation_violations(self) -> list[str]:
        out = []
        if not hasattr(self.ring, "ground"):
            return out
        for (ini, ter), m in self.maps.items():
            if any(x.valuation() < 0 for _, _, x in m.entries()):
                out.append(face_id((ini, ter), self.n))
        return out

    def relation_residual(self, ini: int, ter: int) -> Matrix:
        """Left side of the cube relation on the face (ini, ter)."""
        ring = self.ring
        free = ter & ~ini
        acc = Matrix(ring, self.size(ter), self.size(ini))
        for mid_free in submasks(free):
            u = ini | mid_free
            first = self.maps.get((ini, u))
            if first is None:
                continue
            second = self.maps.get((u, ter))
            if second is None:
                continue
            sign = _mask_shuffle_sign(mid_free, free & ~mid_free)
            if popcount(mid_free) % 2:
                sign = -sign
            prod = second @ first
            acc = acc + (prod if sign > 0 else -prod)
        return acc

    def validate(self, check_valuation: bool = True) -> "Cube":
        bad = self.degree_violations()
        if bad:
            raise CubeError(f"face map on {bad[0]} has the wrong degree")
        if check_valuation:
            bad = self.valuation_violations()
            if bad:
                raise CubeError(f"face map on {bad[0]} has negative valuation entries")
        for ini, ter in faces(self.n):
            res = self.relation_residual(ini, ter)
            if not res.is_zero():
                raise RelationError(face_id((ini, ter), self.n), res)
        return self

    def is_valid(self) -> bool:
        try:
            self.validate()
        except CubeError:
            return False
        return True

    # serialization
    def to_json(self) -> dict:
        n = self.n
        doc = {
            "kind": "cube",
            "ring": self.ring.describe(),
            "n": n,
            "modulus": self.modulus,
            "vertices": {vertex_id(v, n): {"degrees": list(self.degrees[v])}
                         for v in range(1 << n)},
            "maps": [],
        }
        if self.depth:
            doc["depth"] = self.depth
            for v in range(1 << n):
                doc["vertices"][vertex_id(v, n)]["labels"] = list(self.labels[v])
        for (ini, ter) in sorted(self.maps, key=lambda f: (popcount(f[1] & ~f[0]), f)):
            m = self.maps[(ini, ter)]
            doc["maps"].append({
                "face": face_id((ini, ter), n),
                "entries": [[i, j, self.ring.to_json(x)] for i, j, x in m.entries()],
            })
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Cube":
        ring = ring_from_json(doc.get("ring"))
        n = int(doc["n"])
        modulus = int(doc.get("modulus", 0))
        degrees = {}
        labels = {}
        for key, vdoc in doc["vertices"].items():
            if len(key) != n:
                raise CubeError(f"vertex id {key!r} has the wrong length")
            v = parse_vertex(key)
            degrees[v] = tuple(vdoc["degrees"])
            labels[v] = tuple(vdoc.get("labels", [0] * len(vdoc["degrees"])))
        if set(degrees) != set(range(1 << n)):
            raise CubeError("missing vertices")
        maps = {}
        for mdoc in doc.get("maps", []):
            ini, ter = parse_face(mdoc["face"])
            if len(mdoc["face"]) != n:
                raise CubeError(f"face id {mdoc['face']!r} has the wrong length")
            rows, cols = len(degrees[ter]), len(degrees[ini])
            for i, j, _ in mdoc["entries"]:
                if not (0 <= i < rows and 0 <= j < cols):
                    raise CubeError(f"entry ({i}, {j}) out of range on face {mdoc['face']}")
            maps[(ini, ter)] = Matrix.from_entries(
                ring, rows, cols, [(i, j, ring.from_json(x)) for i, j, x in mdoc["entries"]])
        return cls(ring, n, degrees, maps, modulus, labels, int(doc.get("depth", 0)))


# ----------------------------------------------------------------------------
# based complexes (0-cubes)


@dataclass
class BasedComplex:
    """A based cochain complex with optional generator names and actions."""

    ring: object
    degrees: tuple
    d: Matrix
    actions: tuple | None = None
    names: tuple | None = None
    modulus: int = 0

    def __post_init__(self):
        self.degrees = tuple(_norm_degree(int(x), self.modulus) for x in self.degrees)
        k = len(self.degrees)
        if (self.d.nrows, self.d.ncols) != (k, k):
            raise CubeError("differential must be square on the generators")
        if self.actions is not None:
            self.actions = tuple(Fraction(a) for a in self.actions)
            if len(self.actions) != k:
                raise CubeError("need one action per generator")
        if self.names is not None and len(self.names) != k:
            raise CubeError("need one name per generator")

    @classmethod
    def from_differential(cls, ring, degrees, entries, **kw) -> "BasedComplex":
        k = len(degrees)
        return cls(ring, tuple(degrees), Matrix.from_entries(ring, k, k, entries), **kw)

    def to_cube(self) -> Cube:
        return Cube(self.ring, 0, {0: self.degrees}, {(0, 0): self.d}, self.modulus)

    @classmethod
    def from_cube(cls, cube: Cube) -> "BasedComplex":
        if cube.n != 0:
            raise CubeError("only a 0-cube is a complex")
        return cls(cube.ring, cube.degrees[0], cube.differential(0), modulus=cube.modulus)

    def validate(self) -> "BasedComplex":
        self.to_cube().validate()
        return self


def _as_cube(x) -> Cube:
    if isinstance(x, BasedComplex):
        return x.to_cube()
    return x


# ----------------------------------------------------------------------------
# restriction, shift, sums, tensor products


def _embedding(ini: int, ter: int, n: int):
    """Map from vertices of the face (ini, ter) to vertices of the cube."""
    free = _bits(ter & ~ini)

    def emb(w: int) -> int:
        v = ini
        for k, c in enumerate(free):
            if w >> k & 1:
                v |= 1 << c
        return v
    return emb, len(free)


def restrict(cube: Cube, ini: int, ter: int) -> Cube:
    """The sub-cube on a face, with coordinates renumbered in order."""
    cube = _as_cube(cube)
    if ini & ~ter or ter >> cube.n:
        raise CubeError("not a face")
    emb, k = _embedding(ini, ter, cube.n)
    degrees = {w: cube.degrees[emb(w)] for w in range(1 << k)}
    labels = {w: cube.labels[emb(w)] for w in range(1 << k)}
    maps = {}
    for a, b in faces(k):
        m = cube.maps.get((emb(a), emb(b)))
        if m is not None:
            maps[(a, b)] = m
    return Cube(cube.ring, k, degrees, maps, cube.modulus, labels, cube.depth)


def restrict_id(cube: Cube, text: str) -> Cube:
    return restrict(cube, *parse_face(text))


def shift(cube: Cube, k: int) -> Cube:
    """``C[k]``: degrees drop by ``k`` and every map is multiplied by (-1)^k."""
    cube = _as_cube(cube)
    degrees = {v: tuple(d - k for d in ds) for v, ds in cube.degrees.items()}
    maps = {f: m.signed(k) for f, m in cube.maps.items()}
    return Cube(cube.ring, cube.n, degrees, maps, cube.modulus, cube.labels, cube.depth)


def _check_compatible(a: Cube, b: Cube):
    if a.n != b.n:
        raise CubeError("cubes of different dimensions")
    if a.modulus != b.modulus:
        raise CubeError("incompatible gradings")
    if a.ring != b.ring:
        raise CubeError("cubes over different rings")


def direct_sum(*cubes: Cube) -> Cube:
    cubes = [_as_cube(c) for c in cubes]
    if not cubes:
        raise CubeError("empty direct sum")
    first = cubes[0]
    for c in cubes[1:]:
        _check_compatible(first, c)
    ring, n = first.ring, first.n
    depth = max(c.depth for c in cubes)
    degrees = {v: sum((c.degrees[v] for c in cubes), ()) for v in range(1 << n)}
    labels = {v: sum((c.labels[v] for c in cubes), ()) for v in range(1 << n)}
    keys = set().union(*(c.maps for c in cubes))
    maps = {}
    for ini, ter in keys:
        rs = [c.size(ter) for c in cubes]
        cs = [c.size(ini) for c in cubes]
        blocks = [[c.maps.get((ini, ter)) if i == j else None for j, c in enumerate(cubes)]
                  for i, c in enumerate(cubes)]
        maps[(ini, ter)] = block(ring, blocks, rs, cs)
    return Cube(ring, n, degrees, maps, first.modulus, labels, depth)


def _kron(ring, a: Matrix, b: Matrix, signs: Sequence[int] | None = None) -> Matrix:
    """Kronecker product with row-major generator pairs; ``signs`` is indexed
    by the column generator of ``a`` and multiplies the whole column block."""
    rows: dict[int, dict] = {}
    for i, ra in a.rows.items():
        for k, x in ra.items():
            s = 1 if signs is None else signs[k]
            for j, rb in b.rows.items():
                tgt = rows.setdefault(i * b.nrows + j, {})
                for l, y in rb.items():
                    p = ring.mul(x, y)
                    tgt[k * b.ncols + l] = p if s > 0 else ring.neg(p)
    return Matrix(ring, a.nrows * b.nrows, a.ncols * b.ncols, rows)


def tensor(left: Cube, right: Cube) -> Cube:
    """Graded tensor product; coordinates of ``left`` come first.

    A generator pair is indexed row-major.  The Koszul sign on ``id (x) g``
    is (-1)^{|g| |a|} with ``a`` the left generator.
    """
    a, b = _as_cube(left), _as_cube(right)
    if a.modulus != b.modulus:
        raise CubeError("incompatible gradings")
    if a.ring != b.ring:
        raise CubeError("cubes over different rings")
    ring = a.ring
    n = a.n + b.n
    sh = a.n
    degrees = {}
    for va in range(1 << a.n):
        for vb in range(1 << b.n):
            degrees[va | vb << sh] = tuple(x + y for x in a.degrees[va] for y in b.degrees[vb])
    maps: dict = {}

    def put(key, m):
        if m.is_zero():
            return
        maps[key] = maps[key] + m if key in maps else m

    for (ini, ter), f in a.maps.items():
        for vb in range(1 << b.n):
            put((ini | vb << sh, ter | vb << sh), _kron(ring, f, Matrix.identity(ring, b.size(vb))))
    for (ini, ter), g in b.maps.items():
        gdeg = 1 - popcount(ter & ~ini)
        for va in range(1 << a.n):
            signs = [(-1) ** ((gdeg * d) % 2) for d in a.degrees[va]]
            put((va | ini << sh, va | ter << sh),
                _kron(ring, Matrix.identity(ring, a.size(va)), g, signs))
    return Cube(ring, n, degrees, maps, a.modulus)


def ground_cube(ring, degrees: Sequence[int] = (0,), modulus: int = 0) -> Cube:
    """The free module on generators of the given degrees, zero differential."""
    return Cube(ring, 0, {0: tuple(degrees)}, {}, modulus)


def permute_coordinates(cube: Cube, order: Sequence[int]) -> Cube:
    """Relabel coordinates: old coordinate ``order[k]`` (1-based) becomes ``k+1``.

    Pure relabelling is only a cube isomorphism up to the shuffle sign of the
    reordering on each face; that sign is applied here.
    """
    n = cube.n
    if sorted(order) != list(range(1, n + 1)):
        raise CubeError("not a permutation of the coordinates")

    def move(v: int) -> int:
        w = 0
        for k, old in enumerate(order):
            if v >> (old - 1) & 1:
                w |= 1 << k
        return w

    def sign(free: int) -> int:
        coords = [order.index(i + 1) for i in _bits(free)]
        inv = sum(1 for x, y in itertools.combinations(coords, 2) if x > y)
        return -1 if inv % 2 else 1

    degrees = {move(v): ds for v, ds in cube.degrees.items()}
    labels = {move(v): ls for v, ls in cube.labels.items()}
    maps = {}
    for (ini, ter), m in cube.maps.items():
        s = sign(ter & ~ini)
        maps[(move(ini), move(ter))] = m if s > 0 else -m
    return Cube(cube.ring, n, degrees, maps, cube.modulus, labels, cube.depth)


# ----------------------------------------------------------------------------
# cones and their inverse


def _insert_bit(v: int, pos: int, bit: int) -> int:
    low = v & ((1 << pos) - 1)
    high = v >> pos
    return low | (bit << pos) | (high << (pos + 1))


def cone(cube: Cube, i: int) -> Cube:
    """Cone in direction ``i`` (1-based): an (n-1)-cube.

    Vertex ``w`` carries ``C^{w,0}[1] (+) C^{w,1}``; on a face ``F`` the map is
    ``[[-(-1)^{|F0|} f_F0, 0], [-(-1)^{#(i,F)} f_F, f_F1]]`` where ``F0``,
    ``F1`` are the copies of ``F`` on the two ends, ``F`` also names the
    thickened face and ``#(i,F)`` is 1 plus the number of free coordinates
    of ``F`` below ``i``.
    """
    cube = _as_cube(cube)
    n = cube.n
    if not 1 <= i <= n:
        raise CubeError(f"cone direction {i} outside 1..{n}")
    pos = i - 1
    ring = cube.ring
    depth = cube.depth
    degrees, labels = {}, {}
    for w in range(1 << (n - 1)):
        v0, v1 = _insert_bit(w, pos, 0), _insert_bit(w, pos, 1)
        degrees[w] = tuple(d - 1 for d in cube.degrees[v0]) + cube.degrees[v1]
        labels[w] = cube.labels[v0] + tuple(l | 1 << depth for l in cube.labels[v1])
    maps = {}
    below = (1 << pos) - 1
    for ini, ter in faces(n - 1):
        i0, t0 = _insert_bit(ini, pos, 0), _insert_bit(ter, pos, 0)
        i1, t1 = _insert_bit(ini, pos, 1), _insert_bit(ter, pos, 1)
        f0 = cube.maps.get((i0, t0))
        f1 = cube.maps.get((i1, t1))
        fm = cube.maps.get((i0, t1))
        if f0 is None and f1 is None and fm is None:
            continue
        k = popcount(ter & ~ini)
        sharp = 1 + popcount((ter & ~ini) & below)
        ul = None if f0 is None else f0.signed(k + 1)
        ll = None if fm is None else fm.signed(sharp + 1)
        m = block(ring, [[ul, None], [ll, f1]],
                  [cube.size(t0), cube.size(t1)], [cube.size(i0), cube.size(i1)])
        if not m.is_zero():
            maps[(ini, ter)] = m
    return Cube(ring, n - 1, degrees, maps, cube.modulus, labels, depth + 1)


def cocone(cube: Cube, i: int) -> Cube:
    """``co_i C = cone_i C [-1]``."""
    return shift(cone(cube, i), -1)


def iterated_cone(cube: Cube, k: int | None = None) -> Cube:
    """``cone^{o k}``: cone in direction 1, ``k`` times (default: all)."""
    cube = _as_cube(cube)
    k = cube.n if k is None else k
    if not 0 <= k <= cube.n:
        raise CubeError("too many cones")
    for _ in range(k):
        cube = cone(cube, 1)
    return cube


def total_complex(cube: Cube) -> BasedComplex:
    return BasedComplex.from_cube(iterated_cone(cube))


def check_coniform(cube: Cube) -> None:
    """Every face map must send label ``a`` only to labels ``b`` with a <= b."""
    for (ini, ter), m in cube.maps.items():
        for i, j, _ in m.entries():
            a, b = cube.labels[ini][j], cube.labels[ter][i]
            if a & ~b:
                raise ConiformError(
                    f"face {face_id((ini, ter), cube.n)} maps label {a:b} to {b:b}")


def inverse_cone(cube: Cube) -> Cube:
    """Undo one ``cone_1``: split on the outermost label bit."""
    cube = _as_cube(cube)
    if cube.depth < 1:
        raise ConiformError("no coniform structure left to unwind")
    check_coniform(cube)
    bit = 1 << (cube.depth - 1)
    ring = cube.ring
    n = cube.n + 1
    degrees, labels, parts = {}, {}, {}
    for w in range(1 << cube.n):
        lab = cube.labels[w]
        a_idx = [j for j, l in enumerate(lab) if not l & bit]
        b_idx = [j for j, l in enumerate(lab) if l & bit]
        if a_idx and b_idx and max(a_idx) > min(b_idx):
            raise ConiformError("generators must list the near part before the far part")
        parts[w] = len(a_idx)
        v0, v1 = w << 1, (w << 1) | 1
        degrees[v0] = tuple(cube.degrees[w][j] + 1 for j in a_idx)
        degrees[v1] = tuple(cube.degrees[w][j] for j in b_idx)
        labels[v0] = tuple(lab[j] for j in a_idx)
        labels[v1] = tuple(lab[j] & ~bit for j in b_idx)
    maps = {}
    for (ini, ter), m in cube.maps.items():
        na_t, na_i = parts[ter], parts[ini]
        st, si = cube.size(ter), cube.size(ini)
        ur = sub_block(m, 0, na_t, na_i, si)
        if not ur.is_zero():
            raise ConiformError(f"face {face_id((ini, ter), cube.n)} has a nonzero "
                                "far-to-near block")
        k = popcount(ter & ~ini)
        ul = sub_block(m, 0, na_t, 0, na_i).signed(k + 1)
        ll = sub_block(m, na_t, st, 0, na_i)
        lr = sub_block(m, na_t, st, na_i, si)
        for key, blk in (((ini << 1, ter << 1), ul),
                         ((ini << 1 | 1, ter << 1 | 1), lr),
                         ((ini << 1, ter << 1 | 1), ll)):
            if not blk.is_zero():
                maps[key] = blk
    return Cube(ring, n, degrees, maps, cube.modulus, labels, cube.depth - 1)


def iterated_cone_inverse(cube: Cube, k: int | None = None) -> Cube:
    cube = _as_cube(cube)
    k = cube.depth if k is None else k
    if k > cube.depth:
        raise ConiformError(f"data is only {cube.depth}-coniform")
    for _ in range(k):
        cube = inverse_cone(cube)
    return cube


# ----------------------------------------------------------------------------
# maps of cubes


def source(fmap: Cube) -> Cube:
    """Source of a map of cubes (the face ``x_n = 0``)."""
    n = fmap.n
    return restrict(fmap, 0, (1 << (n - 1)) - 1)


def target(fmap: Cube) -> Cube:
    n = fmap.n
    top = 1 << (n - 1)
    return restrict(fmap, top, (1 << n) - 1)


def edge(fmap: Cube, v: int) -> Matrix:
    """The map component on the edge over vertex ``v`` of the source."""
    top = 1 << (fmap.n - 1)
    return fmap.face(v, v | top)


def straight_map(src: Cube, tgt: Cube, vertex_maps: dict) -> Cube:
    """A map of cubes whose only components beyond the two faces are the
    vertex edges; validated."""
    src, tgt = _as_cube(src), _as_cube(tgt)
    _check_compatible(src, tgt)
    n = src.n
    top = 1 << n
    degrees = {}
    labels = {}
    for v in range(1 << n):
        degrees[v] = src.degrees[v]
        degrees[v | top] = tgt.degrees[v]
        labels[v] = src.labels[v]
        labels[v | top] = tgt.labels[v]
    maps = dict(src.maps)
    for (ini, ter), m in tgt.maps.items():
        maps[(ini | top, ter | top)] = m
    for v, m in vertex_maps.items():
        maps[(v, v | top)] = m
    out = Cube(src.ring, n + 1, degrees, maps, src.modulus, labels, max(src.depth, tgt.depth))
    return out.validate()


def identity_map(cube: Cube) -> Cube:
    cube = _as_cube(cube)
    return straight_map(cube, cube, {v: Matrix.identity(cube.ring, cube.size(v))
                                     for v in range(1 << cube.n)})


def diagonal_map(cube: Cube) -> Cube:
    """``C -> C (+) C``."""
    cube = _as_cube(cube)
    ring = cube.ring
    vm = {}
    for v in range(1 << cube.n):
        s = cube.size(v)
        eye = Matrix.identity(ring, s)
        vm[v] = block(ring, [[eye], [eye]], [s, s], [s])
    return straight_map(cube, direct_sum(cube, cube), vm)


def sum_map(cube: Cube) -> Cube:
    """``C (+) C -> C``."""
    cube = _as_cube(cube)
    ring = cube.ring
    vm = {}
    for v in range(1 << cube.n):
        s = cube.size(v)
        eye = Matrix.identity(ring, s)
        vm[v] = block(ring, [[eye, eye]], [s], [s, s])
    return straight_map(direct_sum(cube, cube), cube, vm)


def negate_map(fmap: Cube) -> Cube:
    """``-F``: negate every component running from source to target."""
    top = 1 << (fmap.n - 1)
    maps = {}
    for (ini, ter), m in fmap.maps.items():
        maps[(ini, ter)] = -m if (ter & ~ini) & top else m
    return Cube(fmap.ring, fmap.n, fmap.degrees, maps, fmap.modulus, fmap.labels, fmap.depth)


def is_straight(fmap: Cube) -> bool:
    top = 1 << (fmap.n - 1)
    for ini, ter in fmap.maps:
        free = ter & ~ini
        if free & top and free != top:
            return False
    return True


def compose(first: Cube, second: Cube) -> Cube:
    """``second o first`` for maps of n-cubes ``A -> B -> C``.

    Both maps are coned down to maps of complexes, the edge matrices are
    multiplied and the result is unwound with the inverse cones.
    """
    f, g = _as_cube(first), _as_cube(second)
    if f.n != g.n or f.n < 1:
        raise CubeError("maps of cubes of different dimension")
    if target(f) != source(g):
        raise CubeError("the target of the first map differs from the source of the second")
    n = f.n - 1
    cf = iterated_cone(_strip_labels(f), n)
    cg = iterated_cone(_strip_labels(g), n)
    if cf.labels[1] != cg.labels[0]:
        raise CubeError("middle cubes have different layouts")
    h = cg.face(0, 1) @ cf.face(0, 1)
    maps = {}
    for key, m in (((0, 0), cf.face(0, 0)), ((1, 1), cg.face(1, 1)), ((0, 1), h)):
        if not m.is_zero():
            maps[key] = m
    composed = Cube(f.ring, 1, {0: cf.degrees[0], 1: cg.degrees[1]}, maps, f.modulus,
                    {0: cf.labels[0], 1: cg.labels[1]}, n)
    out = iterated_cone_inverse(composed, n)
    # iterated_cone_inverse rebuilds coordinates in front; the map direction
    # sits last already because cones only consumed the leading coordinates.
    return out.validate()


def _strip_labels(cube: Cube) -> Cube:
    return Cube(cube.ring, cube.n, cube.degrees, cube.maps, cube.modulus)


def map_sum(f: Cube, g: Cube) -> Cube:
    """``F (+) G`` for two maps of n-cubes."""
    return direct_sum(f, g)


# ----------------------------------------------------------------------------
# exact sequence of the cocone


@dataclass
class ExactnessReport:
    degrees: dict
    injective: bool
    surjective: bool
    middle_exact: bool

    @property
    def ok(self) -> bool:
        return self.injective and self.surjective and self.middle_exact


def _block_rank(m: Matrix) -> int:
    return m.rank() if not m.is_zero() else 0


def cocone_sequence(fmap: Cube) -> tuple[BasedComplex, Matrix, Matrix, BasedComplex, BasedComplex]:
    """Total complexes and maps of ``0 -> B[-1] -> co F -> A -> 0``.

    ``iota`` includes ``B[-1]``; ``pi`` is the projection to ``A`` twisted by
    (-1)^{|v|} on vertex ``v``, matching the cone signs.
    """
    fmap = _as_cube(fmap)
    n = fmap.n
    co = cocone(fmap, n)
    total = iterated_cone(_strip_labels(co))
    a_tot = iterated_cone(_strip_labels(source(fmap)))
    b_tot = iterated_cone(_strip_labels(shift(target(fmap), -1)))
    ring = fmap.ring
    # generator bookkeeping: walk the vertices of co in the order cone^{o n-1}
    # lays them out, which is the order of vertex masks after repeated
    # splitting on the lowest coordinate.
    order = _cone_order(n - 1)
    iota_entries, pi_entries = [], []
    a_off = b_off = t_off = 0
    for w in order:
        sa = fmap.size(w)
        sb = fmap.size(w | 1 << (n - 1))
        sign = -1 if popcount(w) % 2 else 1
        for j in range(sa):
            pi_entries.append((a_off + j, t_off + j, sign))
        for j in range(sb):
            iota_entries.append((t_off + sa + j, b_off + j, 1))
        a_off += sa
        b_off += sb
        t_off += sa + sb
    iota = Matrix.from_entries(ring, t_off, b_off, iota_entries)
    pi = Matrix.from_entries(ring, a_off, t_off, pi_entries)
    return (BasedComplex.from_cube(total), iota, pi,
            BasedComplex.from_cube(a_tot), BasedComplex.from_cube(b_tot))


def _cone_order(k: int) -> list[int]:
    """Vertex masks in the order ``cone^{o k}`` concatenates them: each cone
    in direction 1 puts the 0-side first, so the first coordinate varies
    fastest."""
    return list(range(1 << k))


def check_cocone_sequence(fmap: Cube) -> ExactnessReport:
    total, iota, pi, a, b = cocone_sequence(fmap)
    chain_ok = (total.d @ iota == iota @ b.d) and (a.d @ pi == pi @ total.d)
    if not chain_ok:
        raise CubeError("cocone inclusion or projection is not a chain map")
    if not (pi @ iota).is_zero():
        raise CubeError("projection does not kill the included target")
    degs = sorted(set(total.degrees))
    injective = surjective = middle = True
    detail = {}
    for d in degs:
        rows_t = [i for i, x in enumerate(total.degrees) if x == d]
        rows_a = [i for i, x in enumerate(a.degrees) if x == d]
        rows_b = [i for i, x in enumerate(b.degrees) if x == d]
        ib = _select(iota, rows_t, rows_b)
        pt = _select(pi, rows_a, rows_t)
        r_i = _block_rank(ib)
        r_p = _block_rank(pt)
        detail[d] = {"B[-1]": len(rows_b), "co": len(rows_t), "A": len(rows_a),
                     "rank_iota": r_i, "rank_pi": r_p}
        injective &= r_i == len(rows_b)
        surjective &= r_p == len(rows_a)
        middle &= r_i == len(rows_t) - r_p
    return ExactnessReport(detail, injective, surjective, middle)


def _select(m: Matrix, rows: Sequence[int], cols: Sequence[int]) -> Matrix:
    ri = {r: k for k, r in enumerate(rows)}
    ci = {c: k for k, c in enumerate(cols)}
    out = {}
    for i, r in m.rows.items():
        if i in ri:
            sel = {ci[j]: x for j, x in r.items() if j in ci}
            if sel:
                out[ri[i]] = sel
    return Matrix(m.ring, len(rows), len(cols), out)


# ----------------------------------------------------------------------------
# folding and pullbacks


def _zero_cube(ring, n, modulus) -> Cube:
    return Cube(ring, n, {v: () for v in range(1 << n)}, {}, modulus)


def square_parts(square: Cube) -> dict:
    """Split an (n+2)-cube into A, B, C, D and the maps F, G, I, K.

    Direction n+1 is horizontal (A -> B, C -> D) and n+2 vertical
    (A -> C, B -> D).
    """
    N = square.n
    if N < 2:
        raise CubeError("a square of cubes needs dimension at least 2")
    n = N - 2
    low = (1 << n) - 1
    h, v = 1 << n, 1 << (n + 1)
    return {
        "A": restrict(square, 0, low),
        "B": restrict(square, h, low | h),
        "C": restrict(square, v, low | v),
        "D": restrict(square, h | v, low | h | v),
        "F": restrict(square, 0, low | h),
        "G": restrict(square, 0, low | v),
        "I": restrict(square, h, low | h | v),
        "K": restrict(square, v, low | h | v),
    }


def fold(square: Cube) -> Cube:
    """The folded cube of a square of n-cubes.

    Its vertices are ``A``, ``B (+) C``, ``0`` and ``D``; the horizontal map
    is ``(F, -G)`` and the vertical one ``I + K``; the homotopies over
    two-dimensional faces are those of the square.
    """
    square = _as_cube(_strip_labels(square))
    p = square_parts(square)
    ring, mod = square.ring, square.modulus
    n = square.n - 2
    A = p["A"]
    fg = compose(diagonal_map(A), map_sum(p["F"], negate_map(p["G"])))
    D = p["D"]
    ik = compose(map_sum(p["I"], p["K"]), sum_map(D))
    h, v = 1 << n, 1 << (n + 1)
    zero = _zero_cube(ring, n, mod)
    degrees = {}
    for w in range(1 << n):
        degrees[w] = A.degrees[w]
        degrees[w | h] = fg.degrees[w | h]
        degrees[w | v] = zero.degrees[w]
        degrees[w | h | v] = D.degrees[w]
    maps = {}
    for (ini, ter), m in fg.maps.items():
        maps[(ini, ter)] = m
    for (ini, ter), m in ik.maps.items():
        # ik lives on coordinates 1..n, n+1 with n+1 the vertical direction
        a = (ini & (h - 1)) | h | (v if ini & h else 0)
        b = (ter & (h - 1)) | h | (v if ter & h else 0)
        if (a, b) in maps:
            if maps[(a, b)] != m:
                raise CubeError("folded cube faces disagree on B (+) C")
            continue
        maps[(a, b)] = m
    for (ini, ter), m in square.maps.items():
        if (ter & ~ini) & h and (ter & ~ini) & v:
            maps[(ini, ter)] = m
    return Cube(ring, n + 2, degrees, maps, mod).validate()


def pullback(i_map: Cube, k_map: Cube) -> Cube:
    """``Q = co_{n+1}(B (+) C -> D)`` for maps ``I: B -> D`` and ``K: C -> D``."""
    if target(i_map) != target(k_map):
        raise CubeError("the two maps need the same target")
    ik = compose(map_sum(i_map, k_map), sum_map(target(i_map)))
    return cocone(ik, ik.n).validate()


def fold_and_cocone(square: Cube) -> Cube:
    """The map ``L: co(A -> 0) -> Q`` obtained by coconing the folded cube
    in the vertical direction; validated."""
    folded = fold(square)
    return cocone(folded, folded.n).validate()


def cocone_to_zero(cube: Cube) -> Cube:
    """``co(A -> 0)`` by the sign rule f_F = (-1)^{|F|} f^A_F."""
    cube = _as_cube(cube)
    maps = {(i, t): m.signed(popcount(t & ~i)) for (i, t), m in cube.maps.items()}
    return Cube(cube.ring, cube.n, cube.degrees, maps, cube.modulus)


# ----------------------------------------------------------------------------
# rays and telescopes

TAILS = ("stabilized", "contracting", "unknown")


@dataclass
class CubeRay:
    """Finite prefix of a ray: n-cubes ``A_1..A_N`` with maps ``F_i: A_i -> A_{i+1}``.

    ``tail`` records what the omitted part does: "stabilized" (identity
    maps from here on), "contracting" (maps divisible by T^c, c > 0) or
    "unknown".
    """

    cubes: list
    maps: list
    tail: str = "unknown"
    contraction: Fraction | None = None

    def __post_init__(self):
        self.cubes = [_as_cube(c) for c in self.cubes]
        if not self.cubes:
            raise CubeError("a ray needs at least one cube")
        if len(self.maps) != len(self.cubes) - 1:
            raise CubeError("need one connecting map per consecutive pair")
        if self.tail not in TAILS:
            raise CubeError(f"tail must be one of {TAILS}")
        for k, f in enumerate(self.maps):
            if source(f) != self.cubes[k] or target(f) != self.cubes[k + 1]:
                raise CubeError(f"connecting map {k + 1} does not match its cubes")

    @property
    def n(self) -> int:
        return self.cubes[0].n

    @property
    def length(self) -> int:
        return len(self.cubes)

    def restrict(self, ini: int, ter: int) -> "CubeRay":
        top = 1 << self.n
        return CubeRay([restrict(c, ini, ter) for c in self.cubes],
                       [restrict(f, ini, ter | top) for f in self.maps],
                       self.tail, self.contraction)

    def to_json(self) -> dict:
        doc = {"kind": "ray", "tail": self.tail,
               "cubes": [c.to_json() for c in self.cubes],
               "maps": [f.to_json() for f in self.maps]}
        if self.contraction is not None:
            doc["contraction"] = str(self.contraction)
        return doc

    @classmethod
    def from_json(cls, doc) -> "CubeRay":
        c = doc.get("contraction")
        return cls([Cube.from_json(x) for x in doc["cubes"]],
                   [Cube.from_json(x) for x in doc["maps"]],
                   doc.get("tail", "unknown"), None if c is None else Fraction(c))


def telescope_map(ray: CubeRay) -> Cube:
    """The map ``(+)_{i<N} A_i -> (+)_{i<=N} A_i`` given by id + (+) F_i."""
    ring = ray.cubes[0].ring
    n = ray.n
    top = 1 << n
    N = ray.length
    srcs = ray.cubes[:-1]
    tgts = ray.cubes
    if not srcs:
        src = _zero_cube(ring, n, ray.cubes[0].modulus)
    else:
        src = direct_sum(*srcs)
    tgt = direct_sum(*tgts)
    degrees, labels = {}, {}
    for v in range(1 << n):
        degrees[v] = src.degrees[v]
        degrees[v | top] = tgt.degrees[v]
    maps = dict(src.maps) if srcs else {}
    for (ini, ter), m in tgt.maps.items():
        maps[(ini | top, ter | top)] = m
    for ini, ter in faces(n):
        blocks = [[None] * len(srcs) for _ in range(N)]
        nonzero = False
        for k, f in enumerate(ray.maps):
            if ini == ter:
                blocks[k][k] = Matrix.identity(ring, srcs[k].size(ini))
                nonzero = True
            m = f.maps.get((ini, ter | top))
            if m is not None:
                blocks[k + 1][k] = m
                nonzero = True
        if nonzero:
            maps[(ini, ter | top)] = block(ring, blocks, [c.size(ter) for c in tgts],
                                           [c.size(ini) for c in srcs])
    return Cube(ring, n + 1, degrees, maps, ray.cubes[0].modulus).validate()


def telescope(ray: CubeRay) -> Cube:
    """``tel R = cone_{n+1}`` of the telescope map on the stored prefix."""
    tmap = telescope_map(ray)
    return cone(tmap, tmap.n).validate()


def identity_ray(cube: Cube, length: int = 3) -> CubeRay:
    cube = _as_cube(cube)
    return CubeRay([cube] * length, [identity_map(cube)] * (length - 1), "stabilized")


def scalar_map(cube: Cube, scalar) -> Cube:
    """Multiplication by a ring element as a straight map ``C -> C``."""
    cube = _as_cube(cube)
    ring = cube.ring
    x = ring.coerce(scalar)
    return straight_map(cube, cube, {v: Matrix.identity(ring, cube.size(v)).scaled(x)
                                     for v in range(1 << cube.n)})


def scalar_ray(cube: Cube, scalars: Sequence, tail: str = "unknown") -> CubeRay:
    cube = _as_cube(cube)
    return CubeRay([cube] * (len(scalars) + 1), [scalar_map(cube, s) for s in scalars], tail)


def tensor_ray(left: CubeRay, right: CubeRay) -> CubeRay:
    """Levelwise tensor product ``R (x) R'`` of two rays of complexes.

    The connecting map is ``F_i (x) F'_i`` and is only assembled for straight
    maps, where it is the vertexwise Kronecker product.
    """
    if left.length != right.length or left.n != 0 or right.n != 0:
        raise CubeError("tensor of rays needs two rays of complexes of equal length")
    cubes = [tensor(a, b) for a, b in zip(left.cubes, right.cubes)]
    maps = []
    for f, g, a, b in zip(left.maps, right.maps, cubes[:-1], cubes[1:]):
        m = _kron(f.ring, edge(f, 0), edge(g, 0))
        maps.append(straight_map(a, b, {0: m}))
    tail = left.tail if left.tail == right.tail else "unknown"
    return CubeRay(cubes, maps, tail)


# ----------------------------------------------------------------------------
# homology


@dataclass
class HomologyReport:
    dims: dict
    ranks: dict
    ring: str
    torsion: list | None = None
    precision: object = None

    @property
    def total(self) -> int:
        return sum(self.dims.values())

    def to_json(self) -> dict:
        doc = {"ring": self.ring, "dims": {str(k): v for k, v in sorted(self.dims.items())}}
        if self.torsion is not None:
            doc["torsion"] = [str(t) for t in self.torsion]
            doc["precision"] = str(self.precision)
        return doc


def _degree_blocks(cx: BasedComplex):
    by_deg: dict[int, list[int]] = {}
    for i, d in enumerate(cx.degrees):
        by_deg.setdefault(d, []).append(i)
    return by_deg


def homology(obj, torsion_precision=None) -> HomologyReport:
    """Graded homology dimensions over the coefficient field.

    A cube is replaced by its total complex ``cone^{o n}``.  With
    ``torsion_precision`` the elementary-divisor exponents of the
    differential over the valuation ring, truncated there, are reported too.
    """
    cx = obj if isinstance(obj, BasedComplex) else total_complex(_strip_labels(_as_cube(obj)))
    by_deg = _degree_blocks(cx)
    mod = cx.modulus
    ranks = {}
    for d, rows in by_deg.items():
        nxt = _norm_degree(d + 1, mod)
        tgt = by_deg.get(nxt, [])
        ranks[d] = _block_rank(_select(cx.d, tgt, rows)) if tgt else 0
    dims = {}
    for d, rows in by_deg.items():
        prev = _norm_degree(d - 1, mod)
        dims[d] = len(rows) - ranks[d] - ranks.get(prev, 0)
    torsion = None
    if torsion_precision is not None:
        torsion = torsion_exponents(cx.d, torsion_precision)
    return HomologyReport(dims, ranks, cx.ring.name, torsion, torsion_precision)


def torsion_exponents(d: Matrix, precision) -> list[Fraction]:
    """Elementary-divisor exponents of ``d`` over the valuation ring modulo T^r.

    Pivots are chosen of minimal valuation, so every elimination factor lies
    in the valuation ring.  Exponents at or above ``r`` are invisible at this
    truncation and dropped.
    """
    ring = d.ring
    if not hasattr(ring, "ground"):
        raise CubeError("torsion exponents need Novikov coefficients")
    r = Fraction(precision)
    rows = {i: {j: x.truncate(r) for j, x in row.items()} for i, row in d.rows.items()}
    rows = {i: {j: x for j, x in row.items() if not x.is_zero()} for i, row in rows.items()}
    rows = {i: row for i, row in rows.items() if row}
    out = []
    while rows:
        best = None
        for i, row in rows.items():
            for j, x in row.items():
                v = x.valuation()
                if best is None or v < best[0]:
                    best = (v, i, j)
        v, pi, pj = best
        if v >= r:
            break
        p = rows[pi][pj]
        if p.precision != INF and p.precision <= v:
            raise PrecisionError("pivot leading term is unresolved at this precision")
        pinv = p.inverse(precision=r)
        prow = rows.pop(pi)
        # clear the pivot column with row operations
        for i in list(rows):
            row = rows[i]
            a = row.get(pj)
            if a is None:
                continue
            factor = (a * pinv).truncate(r)
            new = dict(row)
            for j, x in prow.items():
                y = new.get(j, ring.zero()) - factor * x
                y = y.truncate(r)
                if y.is_zero() or (y.precision != INF and y.valuation() >= r):
                    new.pop(j, None)
                else:
                    new[j] = y
            new.pop(pj, None)
            if new:
                rows[i] = new
            else:
                del rows[i]
        # column operations only touch the pivot row, which is gone; the
        # remaining columns of that row do not affect the other divisors
        for i in list(rows):
            rows[i].pop(pj, None)
            if not rows[i]:
                del rows[i]
        out.append(v)
    return sorted(out)


def induced_rank(src: BasedComplex, tgt: BasedComplex, fmat: Matrix, degree: int) -> int:
    """Rank of the map induced on homology in one degree (field coefficients)."""
    ring = src.ring
    if hasattr(ring, "ground"):
        raise CubeError("induced ranks are computed over a ground field")
    mod = src.modulus
    s_rows = [i for i, d in enumerate(src.degrees) if d == degree]
    s_next = [i for i, d in enumerate(src.degrees) if d == _norm_degree(degree + 1, mod)]
    t_rows = [i for i, d in enumerate(tgt.degrees) if d == degree]
    t_prev = [i for i, d in enumerate(tgt.degrees) if d == _norm_degree(degree - 1, mod)]
    if not s_rows or not t_rows:
        return 0
    dsrc = _select(src.d, s_next, s_rows)
    cols = dsrc.columns()
    cycles = la.kernel(ring, cols, offset=max(len(s_next), 1))
    fsel = _select(fmat, t_rows, s_rows)
    fcols = fsel.columns()
    images = []
    for z in cycles:
        acc: dict = {}
        for j, x in z.items():
            acc = la.axpy(ring, acc, x, fcols[j])
        images.append(acc)
    bounds = _select(tgt.d, t_rows, t_prev).columns() if t_prev else []
    r_b = la.rank(ring, [b for b in bounds if b])
    r_all = la.rank(ring, [b for b in bounds if b] + [x for x in images if x])
    return r_all - r_b


# ----------------------------------------------------------------------------
# relative complex of a map


@dataclass
class RelativeReport:
    complex: BasedComplex
    exact: ExactnessReport
    source_dims: dict
    target_dims: dict
    relative_dims: dict
    predicted_dims: dict | None

    @property
    def les_ok(self) -> bool:
        if self.predicted_dims is None:
            return self.exact.ok
        keys = set(self.relative_dims) | set(self.predicted_dims)
        return self.exact.ok and all(self.relative_dims.get(k, 0) == self.predicted_dims.get(k, 0)
                                     for k in keys)


def relative_pair_complex(phi: Cube) -> RelativeReport:
    """``co Phi`` for a chain map Phi, with the exact sequence and the
    long exact sequence in homology checked by ranks.

    With ground-field coefficients the relative dimensions are predicted as
    (h^{k-1}(B) - rk Phi_*^{k-1}) + (h^k(A) - rk Phi_*^k).
    """
    phi = _as_cube(phi).validate()
    if phi.n != 1:
        raise CubeError("the relative complex needs a map of complexes")
    co = BasedComplex.from_cube(cocone(phi, 1))
    exact = check_cocone_sequence(phi)
    a = BasedComplex.from_cube(source(phi))
    b = BasedComplex.from_cube(target(phi))
    ha, hb, hc = homology(a).dims, homology(b).dims, homology(co).dims
    predicted = None
    if not hasattr(phi.ring, "ground"):
        fm = edge(phi, 0)
        predicted = {}
        mod = phi.modulus
        degs = set(a.degrees) | {_norm_degree(d + 1, mod) for d in b.degrees}
        for k in degs:
            km1 = _norm_degree(k - 1, mod)
            r_prev = induced_rank(a, b, fm, km1)
            r_here = induced_rank(a, b, fm, k)
            predicted[k] = (hb.get(km1, 0) - r_prev) + (ha.get(k, 0) - r_here)
    return RelativeReport(co, exact, ha, hb, hc, predicted)


# ----------------------------------------------------------------------------
# classical and weighted complexes


class FiltrationError(CubeError):
    """The differential decreases the action."""


@dataclass
class WeightedIso:
    classical: BasedComplex
    weighted: BasedComplex
    iso: Matrix
    inverse: Matrix

    def intertwines(self) -> bool:
        return self.classical.d @ self.iso == self.iso @ self.weighted.d

    def roundtrip(self) -> bool:
        k = len(self.classical.degrees)
        eye = Matrix.identity(self.iso.ring, k)
        return self.iso @ self.inverse == eye and self.inverse @ self.iso == eye


def classical_weighted_iso(classical: BasedComplex) -> WeightedIso:
    """Weighted complex ``d_w(x) = sum T^{A(y) - A(x)} c_{xy} y`` and the
    chain isomorphism ``x -> T^{-A(x)} x`` from it to the classical one."""
    ring = classical.ring
    if not hasattr(ring, "ground"):
        raise CubeError("weights need Novikov coefficients")
    acts = classical.actions
    if acts is None:
        raise CubeError("actions are required")
    k = len(classical.degrees)
    entries = []
    for i, j, x in classical.d.entries():
        gap = acts[i] - acts[j]
        if gap < 0:
            raise FiltrationError(f"differential from generator {j} to {i} lowers the action by {-gap}")
        entries.append((i, j, x * ring.monomial(1, gap)))
    weighted = BasedComplex(ring, classical.degrees, Matrix.from_entries(ring, k, k, entries),
                            classical.actions, classical.names, classical.modulus)
    iso = Matrix.from_entries(ring, k, k, [(i, i, ring.monomial(1, -acts[i])) for i in range(k)])
    inv = Matrix.from_entries(ring, k, k, [(i, i, ring.monomial(1, acts[i])) for i in range(k)])
    return WeightedIso(classical, weighted, iso, inv)


def random_filtered_complex(rng: random.Random, ring, size: int = 6,
                            max_degree: int = 2) -> BasedComplex:
    """A random complex whose differential never lowers the action.

    Built as ``U d0 U^{-1}`` with ``d0`` a sum of elementary pieces and ``U``
    unitriangular, degree preserving and action increasing.
    """
    gens = []
    for _ in range(size):
        gens.append((rng.randint(0, max_degree), Fraction(rng.randint(0, 6), 2)))
    order = sorted(range(size), key=lambda i: gens[i][1])
    degrees = [gens[i][0] for i in order]
    actions = [gens[i][1] for i in order]
    one = ring.one()
    d0 = []
    used = set()
    for j in range(size):
        if j in used:
            continue
        cands = [i for i in range(size) if i not in used and i != j
                 and degrees[i] == degrees[j] + 1 and actions[i] >= actions[j]]
        if cands and rng.random() < 0.7:
            i = rng.choice(cands)
            used |= {i, j}
            d0.append((i, j, one))
    n_ent = []
    for i in range(size):
        for j in range(size):
            if degrees[i] == degrees[j] and actions[i] > actions[j] and rng.random() < 0.5:
                n_ent.append((i, j, ring.coerce(rng.choice([1, -1, 2]))))
    N = Matrix.from_entries(ring, size, size, n_ent)
    eye = Matrix.identity(ring, size)
    U = eye + N
    Uinv = eye
    power = eye
    for _ in range(size):
        power = power @ (-N)
        if power.is_zero():
            break
        Uinv = Uinv + power
    D = U @ Matrix.from_entries(ring, size, size, d0) @ Uinv
    return BasedComplex(ring, tuple(degrees), D, tuple(actions))


# ----------------------------------------------------------------------------
# random cubes


def _random_scalar(rng: random.Random, ring):
    if hasattr(ring, "ground"):
        g = ring.ground
        terms = []
        for _ in range(rng.randint(1, 2)):
            c = rng.choice([1] if g.kind == "F2" else [1, -1, 2])
            terms.append((c, Fraction(rng.randint(0, 3), 2)))
        return NovikovScalar(g, terms)
    if ring.kind == "F2":
        return ring.one()
    return ring.coerce(rng.choice([1, -1, 2, Fraction(1, 2)]))


def random_coniform_complex(rng: random.Random, ring, k: int, per_label: int = 2,
                            modulus: int = 0) -> Cube:
    """A random k-coniform complex (a 0-cube with labels in 0..2^k-1)."""
    # complex degrees in a narrow band keep many maps between labels
    # admissible; the unwound cube degree is this plus the unset label bits
    gens = []
    for lab in range(1 << k):
        for _ in range(rng.randint(1, per_label)):
            gens.append((lab, rng.choice((0, 0, 1, 1, 2)) - k))
    gens.sort()
    size = len(gens)
    labels = tuple(g[0] for g in gens)
    degrees = tuple(g[1] for g in gens)

    def below(a, b):
        return labels[a] & ~labels[b] == 0

    d0 = []
    used = set()
    idx = list(range(size))
    rng.shuffle(idx)
    for j in idx:
        if j in used:
            continue
        cands = [i for i in range(size) if i not in used and i != j and below(j, i)
                 and degrees[i] == degrees[j] + 1]
        strict = [i for i in cands if labels[i] != labels[j]]
        if strict and rng.random() < 0.7:
            cands = strict
        if cands and rng.random() < 0.9:
            i = rng.choice(cands)
            used |= {i, j}
            d0.append((i, j, _random_scalar(rng, ring)))
    D = Matrix.from_entries(ring, size, size, d0)
    eye = Matrix.identity(ring, size)
    for _ in range(2):
        n_ent = []
        for i in range(size):
            for j in range(size):
                if (i > j and degrees[i] == degrees[j] and below(j, i)
                        and rng.random() < 0.6):
                    n_ent.append((i, j, _random_scalar(rng, ring)))
        N = Matrix.from_entries(ring, size, size, n_ent)
        Uinv = eye
        power = eye
        # generators are sorted by label, so N is strictly lower triangular
        for _ in range(size):
            power = power @ (-N)
            if power.is_zero():
                break
            Uinv = Uinv + power
        D = (eye + N) @ D @ Uinv
    return Cube(ring, 0, {0: degrees}, {(0, 0): D}, modulus, {0: labels}, k)


def random_cube(rng: random.Random, ring, n: int, per_label: int = 3) -> Cube:
    """A random valid n-cube, unwound from a random n-coniform complex."""
    data = random_coniform_complex(rng, ring, n, per_label)
    cube = iterated_cone_inverse(data, n)
    return _strip_labels(cube)


# ----------------------------------------------------------------------------
# cubical cochains and the Mayer-Vietoris toy


def cochain_complex(sub) -> BasedComplex:
    """F2 cochains of a closed subcomplex of a cubical torus."""
    grid = sub.grid
    cells = []
    for k in range(grid.n + 1):
        for c in sub.cells(k):
            cells.append((k, c))
    pos = {c: i for i, (_, c) in enumerate(cells)}
    entries = []
    for k in range(grid.n):
        idx = grid.index[k]
        for c in sub.cells(k):
            mask = grid.cofaces[k][idx[c]]
            for t in _bits(mask):
                cc = grid.cells[k + 1][t]
                if cc in pos:
                    entries.append((pos[cc], pos[c], 1))
    size = len(cells)
    return BasedComplex(F2, tuple(k for k, _ in cells), Matrix.from_entries(F2, size, size, entries),
                        names=tuple(c for _, c in cells))


def restriction_matrix(big: BasedComplex, small: BasedComplex) -> Matrix:
    pos = {c: i for i, c in enumerate(big.names)}
    return Matrix.from_entries(F2, len(small.names), len(big.names),
                               [(i, pos[c], 1) for i, c in enumerate(small.names)])


@dataclass
class MayerVietorisReport:
    square_valid: bool
    folded_acyclic: bool
    pullback_dims: dict
    union_dims: dict
    predicted_dims: dict
    expected_dims: dict
    cocone_map_acyclic: bool

    @property
    def ok(self) -> bool:
        keys = set(self.expected_dims) | set(self.predicted_dims) | set(self.pullback_dims)
        return (self.square_valid and self.folded_acyclic and self.cocone_map_acyclic
                and all(self.predicted_dims.get(k, 0) == self.expected_dims.get(k, 0) for k in keys)
                and all(self.pullback_dims.get(k, 0) == self.expected_dims.get(k, 0) for k in keys)
                and all(self.union_dims.get(k, 0) == self.expected_dims.get(k, 0) for k in keys))

    def to_json(self) -> dict:
        def fmt(d):
            return {str(k): v for k, v in sorted(d.items())}
        return {"square_valid": self.square_valid, "folded_acyclic": self.folded_acyclic,
                "cocone_map_acyclic": self.cocone_map_acyclic,
                "pullback_dims": fmt(self.pullback_dims), "union_dims": fmt(self.union_dims),
                "predicted_dims": fmt(self.predicted_dims),
                "expected_dims": fmt(self.expected_dims), "ok": self.ok}


def cover_square(whole, first, second) -> Cube:
    """The strictly commuting square of cochain restrictions for a cover
    ``whole = first | second``: A = whole, B = first, C = second, D = overlap."""
    A = cochain_complex(whole)
    B = cochain_complex(first)
    C = cochain_complex(second)
    D = cochain_complex(first & second)
    ring = F2
    degrees = {0: A.degrees, 1: B.degrees, 2: C.degrees, 3: D.degrees}
    maps = {(0, 0): A.d, (1, 1): B.d, (2, 2): C.d, (3, 3): D.d,
            (0, 1): restriction_matrix(A, B), (0, 2): restriction_matrix(A, C),
            (1, 3): restriction_matrix(B, D), (2, 3): restriction_matrix(C, D)}
    return Cube(ring, 2, degrees, maps).validate()


def mayer_vietoris(whole, first, second, expected: dict) -> MayerVietorisReport:
    """Fold and cocone the cover square; compare the long exact sequence
    prediction with the expected cohomology dimensions."""
    if (first | second) != whole:
        raise CubeError("the two pieces do not cover")
    square = cover_square(whole, first, second)
    folded = fold(square)
    folded_h = homology(folded)
    lmap = fold_and_cocone(square)
    l_h = homology(lmap)
    parts = square_parts(square)
    q = pullback(parts["I"], parts["K"])
    q_h = homology(q).dims
    a_h = homology(parts["A"]).dims
    # long exact sequence from B, C, D and the difference map s: H(B)+H(C) -> H(D)
    B = BasedComplex.from_cube(parts["B"])
    C = BasedComplex.from_cube(parts["C"])
    D = BasedComplex.from_cube(parts["D"])
    BC = BasedComplex.from_cube(direct_sum(parts["B"], parts["C"]))
    s = block(F2, [[edge(parts["I"], 0), edge(parts["K"], 0)]], [len(D.degrees)],
              [len(B.degrees), len(C.degrees)])
    hb, hc, hd = homology(B).dims, homology(C).dims, homology(D).dims
    top = max(list(B.degrees) + list(C.degrees) + [0]) + 1
    predicted = {}
    for k in range(0, top + 1):
        rk_prev = induced_rank(BC, D, s, k - 1) if k > 0 else 0
        rk_here = induced_rank(BC, D, s, k)
        val = (hd.get(k - 1, 0) - rk_prev) + (hb.get(k, 0) + hc.get(k, 0) - rk_here)
        if val:
            predicted[k] = val
    return MayerVietorisReport(
        square_valid=True,
        folded_acyclic=folded_h.total == 0,
        pullback_dims={k: v for k, v in q_h.items() if v},
        union_dims={k: v for k, v in a_h.items() if v},
        predicted_dims=predicted,
        expected_dims={k: v for k, v in expected.items() if v},
        cocone_map_acyclic=l_h.total == 0,
    )


def torus_band_cover(n: int = 2, m: int = 4):
    """Two closed bands ``p in [0, m/2]`` and ``p in [m/2, m]`` covering T^n."""
    from math import comb
    from .cubical_space import AxisInterval, Polyinterval, TorusGrid
    grid = TorusGrid(n, m)
    half = m // 2
    rest = [AxisInterval("full")] * (n - 1)
    first = Polyinterval.of(AxisInterval("closed", 0, half), *rest).closed_subcomplex(grid)
    second = Polyinterval.of(AxisInterval("closed", half, m - half), *rest).closed_subcomplex(grid)
    return grid.full(), first, second, {k: comb(n, k) for k in range(n + 1)}


def torus_mayer_vietoris(n: int = 2, m: int = 4) -> MayerVietorisReport:
    whole, first, second, expected = torus_band_cover(n, m)
    return mayer_vietoris(whole, first, second, expected)


@dataclass
class RayTensorReport:
    tensor_of_telescopes: dict
    telescope_of_tensor: dict

    @property
    def ok(self) -> bool:
        a = {k: v for k, v in self.tensor_of_telescopes.items() if v}
        b = {k: v for k, v in self.telescope_of_tensor.items() if v}
        return a == b


def compare_ray_tensor(left: CubeRay, right: CubeRay) -> RayTensorReport:
    """Homology of ``tel(R (x) R')`` against ``tel R (x) tel R'``.

    Only dimensions are compared; equal dimensions are what a
    quasi-isomorphism between the two would force.
    """
    a = homology(tensor(telescope(left), telescope(right))).dims
    b = homology(telescope(tensor_ray(left, right))).dims
    return RayTensorReport(a, b)
