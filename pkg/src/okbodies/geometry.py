"""Exact rational convex geometry.

Polytopes are kept in synchronized vertex/halfspace form over ``fractions.Fraction``.
Everything here is exact: no floats enter any computation, and all operations are
pure functions on immutable values, so bodies can be shared freely between workers.

Scale assumptions: ambient dimension n <= 4 and at most a few hundred vertices.
Conversions between representations use brute-force supporting-hyperplane search
(n >= 3) or monotone chain (n = 2), which is simple, exact, and fast enough at
this scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Sequence

Rat = Fraction
Vec = tuple[Fraction, ...]


class GeometryError(ValueError):
    """Base class for geometric failures."""


class DimensionMismatch(GeometryError):
    pass


class DegenerateBody(GeometryError):
    """Raised when an operation requires a full-dimensional body."""


# ---------------------------------------------------------------------------
# rational scalars and vectors
# ---------------------------------------------------------------------------

def rat(x) -> Fraction:
    """Coerce ints, strings like ``"3/4"``, or Fractions to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            num, den = s.split("/", 1)
            d = int(den)
            if d == 0:
                raise ValueError(f"zero denominator in rational {x!r}")
            return Fraction(int(num), d)
        return Fraction(int(s))
    if isinstance(x, float):
        raise TypeError("floats are not allowed in the exact geometry kernel")
    return Fraction(x)


def rat_str(q: Fraction) -> str:
    """Serialize a rational as ``"p/q"`` (or ``"p"`` when integral)."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def point(*coords) -> Vec:
    return tuple(rat(c) for c in coords)


def _dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def _vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def _vscale(lam: Fraction, a: Vec) -> Vec:
    return tuple(lam * x for x in a)


def _primitive(vec: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a nonzero rational vector to a primitive integer vector (same direction)."""
    denl = 1
    for c in vec:
        denl = denl * c.denominator // gcd(denl, c.denominator)
    ints = [int(c * denl) for c in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g == 0:
        raise GeometryError("zero vector has no primitive form")
    return tuple(v // g for v in ints)


def sqrt_upper_bound(q: Fraction, bits: int = 64) -> Fraction:
    """Smallest representable rational upper bound on sqrt(q) at 2^-bits precision.

    Exact whenever q is the square of a rational; otherwise overshoots by
    less than 2^-bits / q.denominator.
    """
    if q < 0:
        raise ValueError("negative radicand")
    num, den = q.numerator, q.denominator
    m = num * den << (2 * bits)
    r = isqrt(m)
    if r * r < m:
        r += 1
    return Fraction(r, den << bits)


def _row_reduce(rows: list[list[Fraction]]) -> tuple[int, list[int], list[list[Fraction]]]:
    """Gauss-Jordan over Q. Returns (rank, pivot columns, reduced rows)."""
    mat = [list(r) for r in rows]
    n_cols = len(mat[0]) if mat else 0
    pivots: list[int] = []
    row = 0
    for col in range(n_cols):
        piv = next((r for r in range(row, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        inv = 1 / mat[row][col]
        mat[row] = [x * inv for x in mat[row]]
        for r in range(len(mat)):
            if r != row and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[row])]
        pivots.append(col)
        row += 1
        if row == len(mat):
            break
    return row, pivots, mat[:row]


def _affine_rank(points: Sequence[Vec]) -> tuple[int, list[int]]:
    """Affine rank of a point set and pivot coordinates of the direction space."""
    if not points:
        return -1, []
    base = points[0]
    rows = [list(_vsub(p, base)) for p in points[1:]]
    if not rows:
        return 0, []
    rank, pivots, _ = _row_reduce(rows)
    return rank, pivots


def _nullspace(rows: list[list[Fraction]], n: int) -> list[tuple[int, ...]]:
    """Primitive integer basis of {w : rows @ w = 0} in R^n."""
    if not rows:
        return [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    rank, pivots, red = _row_reduce(rows)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        w = [Fraction(0)] * n
        w[f] = Fraction(1)
        for i, p in enumerate(pivots):
            w[p] = -red[i][f]
        basis.append(_primitive(w))
    return basis


def _det(mat: list[Vec]) -> Fraction:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    total = Fraction(0)
    sign = 1
    for j in range(n):
        if mat[0][j] != 0:
            minor = [tuple(row[c] for c in range(n) if c != j) for row in mat[1:]]
            total += sign * mat[0][j] * _det(minor)
        sign = -sign
    return total


# ---------------------------------------------------------------------------
# halfspaces and affine data
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class HalfSpace:
    """The set {x : normal . x <= offset}, with a primitive integer normal."""

    normal: tuple[int, ...]
    offset: Fraction

    @staticmethod
    def make(normal: Sequence, offset) -> "HalfSpace":
        normal = [rat(c) for c in normal]
        if all(c == 0 for c in normal):
            raise GeometryError("halfspace normal must be nonzero")
        prim = _primitive(normal)
        # offset rescales by the same positive factor normal was divided by
        idx = next(i for i, c in enumerate(prim) if c != 0)
        scale = Fraction(prim[idx]) / normal[idx]
        return HalfSpace(prim, rat(offset) * scale)

    def value(self, p: Vec) -> Fraction:
        return _dot(self.normal, p)

    def contains(self, p: Vec) -> bool:
        return self.value(p) <= self.offset

    def is_tight(self, p: Vec) -> bool:
        return self.value(p) == self.offset

    def flipped(self) -> "HalfSpace":
        return HalfSpace(tuple(-c for c in self.normal), -self.offset)


@dataclass(frozen=True)
class AffineFunctional:
    """x |-> gradient . x + constant."""

    gradient: Vec
    constant: Fraction

    @staticmethod
    def make(gradient: Sequence, constant=0) -> "AffineFunctional":
        return AffineFunctional(tuple(rat(c) for c in gradient), rat(constant))

    def __call__(self, p: Vec) -> Fraction:
        return _dot(self.gradient, p) + self.constant


def coordinate_projection(n: int, axis: int = 0) -> AffineFunctional:
    """The projection onto coordinate ``axis`` of R^n (first coordinate by default)."""
    return AffineFunctional.make([1 if i == axis else 0 for i in range(n)], 0)


# ---------------------------------------------------------------------------
# convex bodies
# ---------------------------------------------------------------------------

class ConvexBody:
    """A bounded rational polytope with synchronized V- and H-representations.

    Lower-dimensional bodies are first-class values (their halfspace list then
    carries equality pairs for the affine hull); the empty body is represented
    by an empty vertex list.
    """

    __slots__ = ("dim", "vertices", "halfspaces", "_cache")

    def __init__(self, dim: int, vertices: Iterable[Vec], halfspaces: Iterable[HalfSpace]):
        self.dim = dim
        self.vertices: tuple[Vec, ...] = tuple(sorted(set(vertices)))
        self.halfspaces: tuple[HalfSpace, ...] = tuple(sorted(set(halfspaces)))
        self._cache: dict = {}
        for v in self.vertices:
            if len(v) != dim:
                raise DimensionMismatch(f"vertex {v} not in R^{dim}")

    # -- basic queries ------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def affine_rank(self) -> int:
        if "arank" not in self._cache:
            rank, pivots = _affine_rank(self.vertices)
            self._cache["arank"] = rank
            self._cache["apivots"] = pivots
        return self._cache["arank"]

    def is_full_dim(self) -> bool:
        return self.affine_rank() == self.dim

    def contains(self, p: Vec) -> bool:
        if len(p) != self.dim:
            raise DimensionMismatch(f"point {p} not in R^{self.dim}")
        if self.is_empty:
            return False
        return all(h.contains(p) for h in self.halfspaces)

    def bounding_box(self) -> list[tuple[Fraction, Fraction]]:
        if self.is_empty:
            raise GeometryError("empty body has no bounding box")
        return [
            (min(v[i] for v in self.vertices), max(v[i] for v in self.vertices))
            for i in range(self.dim)
        ]

    def tight_at(self, v: Vec) -> tuple[int, ...]:
        """Indices of halfspaces tight at a vertex."""
        return tuple(i for i, h in enumerate(self.halfspaces) if h.is_tight(v))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConvexBody)
            and self.dim == other.dim
            and self.vertices == other.vertices
        )

    def __hash__(self):
        return hash((self.dim, self.vertices))

    def __repr__(self):
        if self.is_empty:
            return f"ConvexBody(dim={self.dim}, empty)"
        return (
            f"ConvexBody(dim={self.dim}, vertices={len(self.vertices)}, "
            f"halfspaces={len(self.halfspaces)})"
        )


def empty_body(dim: int) -> ConvexBody:
    return ConvexBody(dim, (), ())


# ---------------------------------------------------------------------------
# hull construction
# ---------------------------------------------------------------------------

def hull(points: Sequence[Sequence]) -> ConvexBody:
    """Convex hull of rational points, with both representations synchronized.

    The returned vertex list is irredundant (a subset of the input points), and
    every halfspace is a facet of the hull inside its affine span; for
    lower-dimensional hulls the affine-span equalities are included as
    opposite halfspace pairs.
    """
    if not points:
        raise GeometryError("hull of an empty point set")
    pts = [tuple(rat(c) for c in p) for p in points]
    n = len(pts[0])
    for p in pts:
        if len(p) != n:
            raise DimensionMismatch("points of mixed dimension")
    pts = sorted(set(pts))
    rank, pivots = _affine_rank(pts)
    if rank == n:
        return _hull_full(pts, n)
    return _hull_degenerate(pts, n, rank, pivots)


def _hull_degenerate(pts: list[Vec], n: int, rank: int, pivots: list[int]) -> ConvexBody:
    base = pts[0]
    rows = [list(_vsub(p, base)) for p in pts[1:]]
    equalities = []
    for w in _nullspace(rows, n) if rows else _nullspace([], n):
        hs = HalfSpace.make(w, _dot(w, base))
        equalities.extend([hs, hs.flipped()])
    if rank == 0:
        return ConvexBody(n, [base], equalities)
    proj = [tuple(p[j] for j in pivots) for p in pts]
    back = {tuple(p[j] for j in pivots): p for p in pts}
    inner = _hull_full(sorted(set(proj)), rank)
    vertices = [back[q] for q in inner.vertices]
    lifted = []
    for h in inner.halfspaces:
        normal = [Fraction(0)] * n
        for coeff, j in zip(h.normal, pivots):
            normal[j] = Fraction(coeff)
        lifted.append(HalfSpace.make(normal, h.offset))
    return ConvexBody(n, vertices, equalities + lifted)


def _hull_full(pts: list[Vec], n: int) -> ConvexBody:
    if n == 1:
        lo, hi = min(pts)[0], max(pts)[0]
        hs = [HalfSpace.make((1,), hi), HalfSpace.make((-1,), -lo)]
        verts = [(lo,), (hi,)] if lo != hi else [(lo,)]
        return ConvexBody(1, verts, hs)
    if n == 2:
        return _hull_2d(pts)
    return _hull_brute(pts, n)


def _hull_2d(pts: list[Vec]) -> ConvexBody:
    """Monotone chain; pts are pre-sorted and deduplicated."""

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Vec] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Vec] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]  # counterclockwise
    halfspaces = []
    for u, v in zip(ring, ring[1:] + ring[:1]):
        d = _vsub(v, u)
        normal = (d[1], -d[0])  # outward for a CCW ring
        halfspaces.append(HalfSpace.make(normal, _dot(normal, u)))
    return ConvexBody(2, ring, halfspaces)


def _hull_brute(pts: list[Vec], n: int) -> ConvexBody:
    """Supporting-hyperplane search over all n-subsets (desk scale, n in {3, 4})."""
    seen: set[HalfSpace] = set()
    for combo in itertools.combinations(range(len(pts)), n):
        base = pts[combo[0]]
        rows = [list(_vsub(pts[i], base)) for i in combo[1:]]
        normals = _nullspace(rows, n)
        if len(normals) != 1:
            continue  # affinely dependent subset
        w = normals[0]
        b = _dot(w, base)
        lo = hi = False
        for p in pts:
            s = _dot(w, p) - b
            if s > 0:
                hi = True
            elif s < 0:
                lo = True
            if lo and hi:
                break
        if lo and hi:
            continue
        hs = HalfSpace.make(w, b) if not hi else HalfSpace.make([-c for c in w], -b)
        seen.add(hs)
    halfspaces = sorted(seen)
    vertices = []
    for p in pts:
        tight = [h.normal for h in halfspaces if h.is_tight(p)]
        if len(tight) >= n:
            rank, _, _ = _row_reduce([list(map(Fraction, t)) for t in tight])
            if rank == n:
                vertices.append(p)
    return ConvexBody(n, vertices, halfspaces)


def _sync_halfspaces(vertices: tuple[Vec, ...], candidates: Iterable[HalfSpace],
                     n: int) -> list[HalfSpace]:
    """Keep facet-inducing candidates; add affine-hull equalities when degenerate."""
    rank, _ = _affine_rank(vertices)
    kept = []
    if rank > 0:
        for h in set(candidates):
            tight = [v for v in vertices if h.is_tight(v)]
            if not tight:
                continue
            trank, _ = _affine_rank(tight)
            if trank == rank - 1:
                kept.append(h)
    if rank < n:
        base = vertices[0]
        rows = [list(_vsub(v, base)) for v in vertices[1:]]
        for w in _nullspace(rows, n) if rows else _nullspace([], n):
            hs = HalfSpace.make(w, _dot(w, base))
            kept.extend([hs, hs.flipped()])
    return kept


# ---------------------------------------------------------------------------
# clipping and derived bodies
# ---------------------------------------------------------------------------

def intersect_halfspace(body: ConvexBody, hs: HalfSpace) -> ConvexBody:
    """Exact intersection of a body with a halfspace; may return an empty body."""
    if len(hs.normal) != body.dim:
        raise DimensionMismatch("halfspace dimension differs from body dimension")
    if body.is_empty:
        return body
    vals = [hs.value(v) - hs.offset for v in body.vertices]
    if all(s <= 0 for s in vals):
        return body
    if all(s >= 0 for s in vals):
        on = [v for v, s in zip(body.vertices, vals) if s == 0]
        if not on:
            return empty_body(body.dim)
        return hull(on)
    inside = [i for i, s in enumerate(vals) if s < 0]
    on = [i for i, s in enumerate(vals) if s == 0]
    outside = [i for i, s in enumerate(vals) if s > 0]
    tights = [body.tight_at(v) for v in body.vertices]
    crossings: set[Vec] = set()
    n = body.dim
    for i in inside:
        for j in outside:
            common = set(tights[i]) & set(tights[j])
            if len(common) < n - 1:
                continue
            rows = [list(map(Fraction, body.halfspaces[c].normal)) for c in common]
            rank, _, _ = _row_reduce(rows)
            if rank < n - 1:
                continue
            vi, vo = body.vertices[i], body.vertices[j]
            lam = -vals[i] / (vals[j] - vals[i])
            crossings.add(_vadd(vi, _vscale(lam, _vsub(vo, vi))))
    new_vertices = tuple(sorted(
        {body.vertices[i] for i in inside}
        | {body.vertices[i] for i in on}
        | crossings
    ))
    candidates = list(body.halfspaces) + [hs]
    return ConvexBody(body.dim, new_vertices,
                      _sync_halfspaces(new_vertices, candidates, body.dim))


def from_halfspaces(halfspaces: Sequence[HalfSpace],
                    box: Sequence[tuple[Fraction, Fraction]]) -> ConvexBody:
    """Body cut out of an explicit bounding box by a halfspace list."""
    n = len(box)
    corners = [tuple(c) for c in itertools.product(*[(rat(lo), rat(hi)) for lo, hi in box])]
    sides = []
    for i, (lo, hi) in enumerate(box):
        e = [0] * n
        e[i] = 1
        sides.append(HalfSpace.make(e, hi))
        e[i] = -1
        sides.append(HalfSpace.make(e, -rat(lo)))
    body = ConvexBody(n, set(corners), sides)
    for hs in halfspaces:
        body = intersect_halfspace(body, hs)
        if body.is_empty:
            return body
    return body


def scale_translate(body: ConvexBody, lam, shift: Sequence = None) -> ConvexBody:
    """lam * body + shift, exact; lam must be positive."""
    lam = rat(lam)
    if lam <= 0:
        raise GeometryError("scale factor must be positive")
    shift = tuple(rat(c) for c in shift) if shift is not None else (Fraction(0),) * body.dim
    if len(shift) != body.dim:
        raise DimensionMismatch("shift dimension differs from body dimension")
    if body.is_empty:
        return body
    verts = [_vadd(_vscale(lam, v), shift) for v in body.vertices]
    halfspaces = [
        HalfSpace(h.normal, lam * h.offset + _dot(h.normal, shift))
        for h in body.halfspaces
    ]
    return ConvexBody(body.dim, verts, halfspaces)


def minkowski_cube(body: ConvexBody, eps) -> ConvexBody:
    """Minkowski sum body + [-eps, eps]^n via the hull of vertex + corner sums."""
    eps = rat(eps)
    if eps < 0:
        raise GeometryError("cube half-width must be nonnegative")
    if eps == 0 or body.is_empty:
        return body
    corners = itertools.product(*[(-eps, eps)] * body.dim)
    pts = [_vadd(v, c) for v, c in itertools.product(body.vertices, list(corners))]
    return hull(pts)


def superlevel(body: ConvexBody, g: "ConcavePL", t) -> ConvexBody:
    """body intersected with {g >= t}: one halfspace cut per affine piece."""
    t = rat(t)
    result = body
    for piece in g.pieces:
        if all(c == 0 for c in piece.gradient):
            if piece.constant < t:
                return empty_body(body.dim)
            continue  # constant piece >= t everywhere
        hs = HalfSpace.make([-c for c in piece.gradient], piece.constant - t)
        result = intersect_halfspace(result, hs)
        if result.is_empty:
            return result
    return result


# ---------------------------------------------------------------------------
# concave piecewise-affine transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcavePL:
    """Pointwise min of affine functionals: concave by construction.

    The nonnegativity invariant on the domain is checked at construction
    (min of a concave function over a polytope sits at a vertex).
    """

    pieces: tuple[AffineFunctional, ...]
    domain: ConvexBody

    @staticmethod
    def make(pieces: Sequence[AffineFunctional], domain: ConvexBody,
             require_nonnegative: bool = True) -> "ConcavePL":
        if not pieces:
            raise GeometryError("a concave transform needs at least one piece")
        g = ConcavePL(tuple(pieces), domain)
        if require_nonnegative and not domain.is_empty:
            m = min(g(v) for v in domain.vertices)
            if m < 0:
                raise GeometryError(f"transform is negative on the domain (min {m})")
        return g

    def __call__(self, p: Vec) -> Fraction:
        return min(piece(p) for piece in self.pieces)


def first_coordinate_transform(domain: ConvexBody) -> ConcavePL:
    """The divisorial-case transform: projection onto the first coordinate."""
    return ConcavePL.make([coordinate_projection(domain.dim)], domain)


# ---------------------------------------------------------------------------
# volume, barycenter, slices
# ---------------------------------------------------------------------------

def _facet_data(body: ConvexBody) -> list[tuple[HalfSpace, list[Vec]]]:
    rank = body.affine_rank()
    out = []
    for h in body.halfspaces:
        tight = [v for v in body.vertices if h.is_tight(v)]
        if not tight:
            continue
        trank, _ = _affine_rank(tight)
        if trank == rank - 1:
            out.append((h, tight))
    return out


def triangulate(body: ConvexBody) -> list[tuple[Vec, ...]]:
    """Fan triangulation of a full-dimensional body from its first vertex."""
    if not body.is_full_dim():
        raise DegenerateBody("triangulation requires a full-dimensional body")
    return _triangulate_full(body.vertices, body.halfspaces, body.dim)


def _triangulate_full(vertices: tuple[Vec, ...], halfspaces: tuple[HalfSpace, ...],
                      n: int) -> list[tuple[Vec, ...]]:
    if n == 1:
        return [tuple(sorted(vertices))]
    apex = vertices[0]
    simplices = []
    for h in halfspaces:
        if h.is_tight(apex):
            continue
        tight = [v for v in vertices if h.is_tight(v)]
        for facet_simplex in _triangulate_facet(tight, h, n):
            simplices.append((apex,) + facet_simplex)
    return simplices


def _triangulate_facet(tight: list[Vec], h: HalfSpace, n: int) -> list[tuple[Vec, ...]]:
    if n - 1 == 1:
        pts = sorted(tight)
        return [(pts[0], pts[-1])]
    drop = next(i for i, c in enumerate(h.normal) if c != 0)
    keep = [i for i in range(n) if i != drop]
    back = {tuple(v[i] for i in keep): v for v in tight}
    inner = _hull_full(sorted(back), n - 1)
    simplices = _triangulate_full(inner.vertices, inner.halfspaces, n - 1)
    return [tuple(back[q] for q in s) for s in simplices]


def volume(body: ConvexBody) -> Fraction:
    """Exact Lebesgue n-volume; 0 for empty or lower-dimensional bodies."""
    if body.is_empty or not body.is_full_dim():
        return Fraction(0)
    if "volume" in body._cache:
        return body._cache["volume"]
    total = Fraction(0)
    fact = 1
    for i in range(2, body.dim + 1):
        fact *= i
    for s in _triangulate_full(body.vertices, body.halfspaces, body.dim):
        mat = [_vsub(p, s[0]) for p in s[1:]]
        total += abs(_det(mat))
    total /= fact
    body._cache["volume"] = total
    return total


def barycenter(body: ConvexBody) -> Vec:
    """Exact centroid via simplex decomposition; requires positive volume."""
    if body.is_empty or not body.is_full_dim():
        raise DegenerateBody("barycenter requires a full-dimensional body")
    n = body.dim
    fact = 1
    for i in range(2, n + 1):
        fact *= i
    total = Fraction(0)
    acc = [Fraction(0)] * n
    for s in _triangulate_full(body.vertices, body.halfspaces, n):
        mat = [_vsub(p, s[0]) for p in s[1:]]
        vol = abs(_det(mat)) / fact
        if vol == 0:
            continue
        centroid = [sum(p[i] for p in s) / (n + 1) for i in range(n)]
        total += vol
        for i in range(n):
            acc[i] += vol * centroid[i]
    if total == 0:
        raise DegenerateBody("zero-volume body")
    return tuple(c / total for c in acc)


def slice_volume(body: ConvexBody, f: AffineFunctional, t) -> Fraction:
    """Exact (n-1)-volume of body ∩ {f = t} in the lattice-normalized form.

    The slice hyperplane {g . x = c} (g primitive integer) carries the volume
    form for which the induced rank-(n-1) lattice has covolume 1; projecting
    out a coordinate j with g_j != 0 turns this into (Lebesgue volume of the
    projection) / |g_j|, which is exact.  A point slice of a segment has
    0-dimensional volume 1.
    """
    t = rat(t)
    if body.is_empty:
        return Fraction(0)
    g = _primitive(f.gradient)
    idx = next(i for i, c in enumerate(g) if c != 0)
    scale = Fraction(g[idx]) / f.gradient[idx]
    c = (t - f.constant) * scale
    face = intersect_halfspace(body, HalfSpace(g, c))
    face = intersect_halfspace(face, HalfSpace(tuple(-x for x in g), -c))
    if face.is_empty:
        return Fraction(0)
    n = body.dim
    if n == 1:
        return Fraction(1)
    rank, _ = _affine_rank(face.vertices)
    if rank < n - 1:
        return Fraction(0)
    keep = [i for i in range(n) if i != idx]
    proj = [tuple(v[i] for i in keep) for v in face.vertices]
    return volume(hull(proj)) / abs(g[idx])


def max_transform(body: ConvexBody, g: ConcavePL) -> Fraction:
    """Exact maximum of a concave PL transform over a body.

    One affine piece peaks at a vertex; otherwise the min-envelope maximum can
    sit on a face interior, so solve the LP max t s.t. t <= f_i(x), x in body.
    """
    if body.is_empty:
        raise GeometryError("max over an empty body")
    if len(g.pieces) == 1:
        return max(g(v) for v in body.vertices)
    n = body.dim
    x0 = tuple(sum(v[i] for v in body.vertices) / len(body.vertices) for i in range(n))
    t0 = g(x0) - 1
    # variables y+/y- (shifted x) and s >= 0 (shifted t); maximize s
    A, b = [], []
    for f in g.pieces:
        row = []
        for i in range(n):
            row.extend([-f.gradient[i], f.gradient[i]])
        row.append(Fraction(1))
        A.append(row)
        b.append(f(x0) - t0)
    for h in body.halfspaces:
        row = []
        for i in range(n):
            row.extend([Fraction(h.normal[i]), -Fraction(h.normal[i])])
        row.append(Fraction(0))
        A.append(row)
        b.append(h.offset - h.value(x0))
    c = [Fraction(0)] * (2 * n) + [Fraction(1)]
    opt, _ = _simplex_max(A, b, c)
    return t0 + opt


def min_transform(body: ConvexBody, g: ConcavePL) -> Fraction:
    """Exact minimum of a concave PL transform over a body (at a vertex)."""
    if body.is_empty:
        raise GeometryError("min over an empty body")
    return min(g(v) for v in body.vertices)


def integrate_transform(body: ConvexBody, g: ConcavePL) -> Fraction:
    """Exact integral of a concave PL transform over a body.

    The body is subdivided into the regions where each affine piece realizes
    the min; on each region the integrand is affine, so its integral is
    volume * value-at-centroid. Region overlaps have measure zero.
    """
    if body.is_empty or not body.is_full_dim():
        return Fraction(0)
    total = Fraction(0)
    pieces = g.pieces
    for i, f_i in enumerate(pieces):
        region = body
        for j, f_j in enumerate(pieces):
            if i == j:
                continue
            normal = _vsub(f_i.gradient, f_j.gradient)
            if all(c == 0 for c in normal):
                if f_j.constant < f_i.constant:
                    region = empty_body(body.dim)  # piece j is everywhere smaller
                    break
                continue
            region = intersect_halfspace(
                region, HalfSpace.make(normal, f_j.constant - f_i.constant)
            )
            if region.is_empty:
                break
        if region.is_empty or not region.is_full_dim():
            continue
        vol = volume(region)
        total += vol * f_i(barycenter(region))
    return total


def mean_transform(body: ConvexBody, g: ConcavePL) -> Fraction:
    """Average value of a concave PL transform over a positive-volume body."""
    vol = volume(body)
    if vol == 0:
        raise DegenerateBody("mean requires a positive-volume body")
    return integrate_transform(body, g) / vol


# ---------------------------------------------------------------------------
# inscribed balls (exact rational LP)
# ---------------------------------------------------------------------------

def _simplex_max(A: list[list[Fraction]], b: list[Fraction],
                 c: list[Fraction]) -> tuple[Fraction, list[Fraction]]:
    """max c.z s.t. A z <= b, z >= 0, with b >= 0 (slack basis feasible).

    Dense tableau simplex with Bland's rule; everything exact.
    """
    m, n = len(A), len(c)
    # tableau rows: [A | I | b]; objective row: [-c | 0 | 0]
    tab = [list(A[i]) + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    obj = [-x for x in c] + [Fraction(0)] * (m + 1)
    basis = [n + i for i in range(m)]
    while True:
        col = next((j for j in range(n + m) if obj[j] < 0), None)
        if col is None:
            break
        ratios = [
            (tab[i][-1] / tab[i][col], basis[i], i)
            for i in range(m) if tab[i][col] > 0
        ]
        if not ratios:
            raise GeometryError("unbounded linear program")
        _, _, piv = min(ratios)  # Bland: smallest ratio, then smallest basis index
        pr = tab[piv]
        f = pr[col]
        tab[piv] = [x / f for x in pr]
        for i in range(m):
            if i != piv and tab[i][col] != 0:
                g = tab[i][col]
                tab[i] = [x - g * y for x, y in zip(tab[i], tab[piv])]
        if obj[col] != 0:
            g = obj[col]
            obj = [x - g * y for x, y in zip(obj, tab[piv])]
        basis[piv] = col
    z = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        if bi < n:
            z[bi] = tab[i][-1]
    return obj[-1], z


def chebyshev_ball(body: ConvexBody, bits: int = 64) -> tuple[Vec, Fraction]:
    """Certified inscribed Euclidean ball: center and a rational radius lower bound.

    Facet norms enter the LP as rational upper bounds (rounded up at 2^-bits),
    so the optimal r is a lower bound on the true Chebyshev radius and the
    returned ball is guaranteed to fit inside the body.
    """
    if body.is_empty or not body.is_full_dim():
        raise DegenerateBody("chebyshev_ball requires a full-dimensional body")
    n = body.dim
    x0 = tuple(sum(v[i] for v in body.vertices) / len(body.vertices) for i in range(n))
    facets = _facet_data(body)
    A, rhs = [], []
    for h, _ in facets:
        norm_ub = sqrt_upper_bound(_dot(h.normal, h.normal), bits)
        row = []
        for i in range(n):
            row.extend([Fraction(h.normal[i]), -Fraction(h.normal[i])])
        row.append(norm_ub)
        A.append(row)
        rhs.append(h.offset - h.value(x0))
    c = [Fraction(0)] * (2 * n) + [Fraction(1)]
    radius, z = _simplex_max(A, rhs, c)
    center = tuple(x0[i] + z[2 * i] - z[2 * i + 1] for i in range(n))
    return center, radius


# ---------------------------------------------------------------------------
# cones and rooftop bodies
# ---------------------------------------------------------------------------

def _coordinate_slice(body: ConvexBody, value: Fraction) -> ConvexBody:
    e1 = (1,) + (0,) * (body.dim - 1)
    face = intersect_halfspace(body, HalfSpace(e1, value))
    return intersect_halfspace(face, HalfSpace(tuple(-c for c in e1), -value))


def slice_cone(body: ConvexBody, a, b) -> ConvexBody:
    """Convex hull of the first-coordinate slices at heights a and b."""
    a, b = rat(a), rat(b)
    if body.is_empty:
        raise GeometryError("slice cone of an empty body")
    lo = min(v[0] for v in body.vertices)
    hi = max(v[0] for v in body.vertices)
    if not (lo <= a < b <= hi):
        raise GeometryError(f"need {lo} <= a < b <= {hi}, got a={a}, b={b}")
    fa = _coordinate_slice(body, a)
    fb = _coordinate_slice(body, b)
    return hull(list(fa.vertices) + list(fb.vertices))


def apex_cone(body: ConvexBody, a, b, apex: Sequence) -> ConvexBody:
    """Convex hull of the a-slice and an apex vertex on the b-slice."""
    a, b = rat(a), rat(b)
    apex = tuple(rat(c) for c in apex)
    if a >= b:
        raise GeometryError("need a < b")
    if not body.contains(apex):
        raise GeometryError(f"apex {apex} is not in the body")
    if apex[0] != b:
        raise GeometryError(f"apex must lie on the b-slice (p1 = {b})")
    fa = _coordinate_slice(body, a)
    if fa.is_empty:
        raise GeometryError(f"the a-slice at {a} is empty")
    return hull(list(fa.vertices) + [apex])


def rooftop(body: ConvexBody, f: AffineFunctional) -> ConvexBody:
    """{(x, t) : x in body, 0 <= t <= f(x)} in R^(n+1); f must be >= 0 on body."""
    if body.is_empty:
        raise GeometryError("rooftop of an empty body")
    if min(f(v) for v in body.vertices) < 0:
        raise GeometryError("rooftop height function is negative on the body")
    n = body.dim
    lifted = [HalfSpace.make(tuple(h.normal) + (0,), h.offset) for h in body.halfspaces]
    lifted.append(HalfSpace.make((0,) * n + (-1,), 0))
    lifted.append(HalfSpace.make(tuple(-c for c in f.gradient) + (Fraction(1),), f.constant))
    fmax = max(f(v) for v in body.vertices)
    box = body.bounding_box() + [(Fraction(0), fmax)]
    return from_halfspaces(lifted, box)


# ---------------------------------------------------------------------------
# validation and serialization
# ---------------------------------------------------------------------------

def validate_body(body: ConvexBody) -> None:
    """Check representation sync; raises GeometryError on violation."""
    if body.is_empty:
        return
    n = body.dim
    rank = body.affine_rank()
    for v in body.vertices:
        for h in body.halfspaces:
            if not h.contains(v):
                raise GeometryError(f"vertex {v} violates halfspace {h}")
        tight = [list(map(Fraction, h.normal)) for h in body.halfspaces if h.is_tight(v)]
        trank, _, _ = _row_reduce(tight) if tight else (0, [], [])
        if trank < n:
            raise GeometryError(f"vertex {v} is tight on a rank-{trank} set only")
    for h in body.halfspaces:
        if not any(h.is_tight(v) for v in body.vertices):
            raise GeometryError(f"halfspace {h} is tight at no vertex")
    if hull(body.vertices).vertices != body.vertices:
        raise GeometryError("vertex list is redundant")
    if rank == n:
        rebuilt = hull(body.vertices)
        if set(rebuilt.halfspaces) != set(body.halfspaces):
            raise GeometryError("halfspace list out of sync with the vertex hull")


def body_to_json(body: ConvexBody, include_halfspaces: bool = False) -> dict:
    out = {
        "dim": body.dim,
        "vertices": [[rat_str(c) for c in v] for v in body.vertices],
    }
    if include_halfspaces:
        out["halfspaces"] = [
            {"normal": [str(c) for c in h.normal], "offset": rat_str(h.offset)}
            for h in body.halfspaces
        ]
    return out


def body_from_json(data: dict) -> ConvexBody:
    if "dim" not in data or "vertices" not in data:
        raise ValueError("polytope JSON needs 'dim' and 'vertices'")
    n = int(data["dim"])
    verts = [tuple(rat(c) for c in v) for v in data["vertices"]]
    if not verts:
        raise ValueError("polytope JSON has no vertices")
    for v in verts:
        if len(v) != n:
            raise ValueError(f"vertex {v} does not have dimension {n}")
    body = hull(verts)
    if "halfspaces" in data:
        # given halfspaces are validated against the hull, then the canonical
        # recomputed representation is kept (the schema treats them as a hint)
        given = [
            HalfSpace.make([rat(c) for c in h["normal"]], rat(h["offset"]))
            for h in data["halfspaces"]
        ]
        for h in given:
            for v in body.vertices:
                if not h.contains(v):
                    raise ValueError("given halfspaces do not contain the hull")
    return body
