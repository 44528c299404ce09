"""Threshold invariants of graded-series models under valuation transforms.

Given a model (series module) and a valuation transform (a positive rational
log-discrepancy input A plus a concave PL transform G on the ambient body),
this module computes jumping numbers and their idealized analogues, the
S_{k,m} averages, empirical vanishing measures, the continuous ccdf/quantile
machinery with tail expectations S_tau, compatible families, and restricted
Grassmannian thresholds delta_{k,m} over finite valuation families.

All values are exact rationals except where a quantile has no rational root,
in which case results are interval-certified to a caller-supplied tolerance.
Restricted minima over a finite family are upper bounds on the corresponding
infima over all valuations, and are reported as such.

Everything here is a pure query over immutable models and valuations, so
sweeps may be parallelized over (k, valuation) pairs; ties are always broken
deterministically (lexicographically larger point, lexicographically smaller
label), making reductions order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .geometry import (
    ConcavePL,
    ConvexBody,
    first_coordinate_transform,
    max_transform,
    mean_transform,
    rat,
    superlevel,
    volume,
)
from .lattice import PointCloud
from .series import GradedSeriesModel

DEFAULT_TOL = Fraction(1, 10**9)

INFINITE = math.inf  # sentinel ratio when S_{k,m} = 0


@dataclass(frozen=True)
class ValuationModel:
    """A valuation presented by its log discrepancy A > 0 (supplied data, never
    computed here) and its concave transform G on the ambient body."""

    label: str
    A: Fraction
    G: ConcavePL

    @staticmethod
    def divisorial(label: str, ambient: ConvexBody, A=1) -> "ValuationModel":
        """The canonical divisorial convention: G is the first coordinate."""
        return ValuationModel(label, rat(A), first_coordinate_transform(ambient))

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("log discrepancy A must be positive")


@dataclass(frozen=True)
class JumpingVector:
    """Non-increasing vanishing orders at one level (values are k * G(x))."""

    k: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if any(a < b for a, b in zip(self.values, self.values[1:])):
            raise ValueError("jumping values must be non-increasing")

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Finitely many weighted atoms on the rational line; weights sum to 1."""

    atoms: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        total = sum((w for _, w in self.atoms), Fraction(0))
        if total != 1:
            raise ValueError(f"atom weights sum to {total}, not 1")
        if any(w <= 0 for _, w in self.atoms):
            raise ValueError("atom weights must be positive")

    def barycenter(self) -> Fraction:
        return sum((p * w for p, w in self.atoms), Fraction(0))

    def ccdf(self, t: Fraction) -> Fraction:
        return sum((w for p, w in self.atoms if p >= t), Fraction(0))


@dataclass(frozen=True)
class TailSpec:
    """A solved quantile: position, top-atom mass, and certification data."""

    tau: Fraction
    quantile: Fraction
    atom_at_top: Fraction
    exact: bool = True
    bracket: Optional[tuple[Fraction, Fraction]] = None


@dataclass(frozen=True)
class FamilyMeasure:
    """Uniform empirical measure on a compatible family (atoms in R^n)."""

    atoms: tuple[tuple[tuple[Fraction, ...], Fraction], ...]

    def mean(self) -> tuple[Fraction, ...]:
        n = len(self.atoms[0][0])
        return tuple(
            sum((p[i] * w for p, w in self.atoms), Fraction(0)) for i in range(n)
        )


# ---------------------------------------------------------------------------
# jumping numbers
# ---------------------------------------------------------------------------

def _scored_points(cloud: PointCloud, g: ConcavePL) -> list[tuple[Fraction, tuple[Fraction, ...]]]:
    """(G(x), x) pairs sorted by value descending, ties lexicographically
    larger point first — the deterministic tie-break used everywhere."""
    pairs = [(g(x), x) for x in cloud.coordinates()]
    pairs.sort(reverse=True)
    return pairs


def jumping_numbers(model: GradedSeriesModel, v: ValuationModel, k: int) -> JumpingVector:
    """Non-increasing sort of {k G(x) : x in Delta_k}."""
    scored = _scored_points(model.discrete_body(k), v.G)
    return JumpingVector(k, tuple(k * val for val, _ in scored))


def idealized_jumping(model: GradedSeriesModel, v: ValuationModel, k: int) -> JumpingVector:
    """Non-increasing sort of {k G(x) : x in ambient ∩ Z^n/k}; length D_k."""
    scored = _scored_points(model.idealized_body(k), v.G)
    return JumpingVector(k, tuple(k * val for val, _ in scored))


def S_km(model: GradedSeriesModel, v: ValuationModel, k: int, m: int) -> Fraction:
    """Average of the largest m jumping numbers divided by k."""
    jv = jumping_numbers(model, v, k)
    if not 1 <= m <= len(jv):
        raise ValueError(f"m={m} out of range [1, {len(jv)}]")
    return sum(jv.values[:m], Fraction(0)) / (k * m)


def Sbar_km(model: GradedSeriesModel, v: ValuationModel, k: int, m: int) -> Fraction:
    """Idealized analogue of S_km over all lattice points of the ambient body."""
    iv = idealized_jumping(model, v, k)
    if not 1 <= m <= len(iv):
        raise ValueError(f"m={m} out of range [1, {len(iv)}]")
    return sum(iv.values[:m], Fraction(0)) / (k * m)


# ---------------------------------------------------------------------------
# extremal vanishing orders
# ---------------------------------------------------------------------------

class VanishingOrders(tuple):
    """(S0, sigma, quantum_S0, quantum_sigma) with attribute access."""

    S0 = property(lambda s: s[0])
    sigma = property(lambda s: s[1])
    quantum_S0 = property(lambda s: s[2])
    quantum_sigma = property(lambda s: s[3])


def S0_and_sigma(model: GradedSeriesModel, v: ValuationModel,
                 k: Optional[int] = None) -> VanishingOrders:
    """Maximal and minimal vanishing orders: max/min of G over the ambient body,
    plus the level-k quantum variants j_{k,1}/k and j_{k,d_k}/k when k is given."""
    s0 = max_transform(model.ambient, v.G)
    sigma = min(v.G(x) for x in model.ambient.vertices)
    q_s0 = q_sigma = None
    if k is not None:
        jv = jumping_numbers(model, v, k)
        q_s0 = jv.values[0] / k
        q_sigma = jv.values[-1] / k
    return VanishingOrders((s0, sigma, q_s0, q_sigma))


def mu_k(model: GradedSeriesModel, v: ValuationModel, k: int) -> EmpiricalMeasure:
    """Empirical vanishing measure: mass 1/d_k at each j_{k,l}/k, merged atoms."""
    jv = jumping_numbers(model, v, k)
    d = len(jv)
    weights: dict[Fraction, int] = {}
    for val in jv.values:
        pos = val / k
        weights[pos] = weights.get(pos, 0) + 1
    atoms = tuple(sorted((pos, Fraction(c, d)) for pos, c in weights.items()))
    return EmpiricalMeasure(atoms)


# ---------------------------------------------------------------------------
# continuous ccdf / quantile machinery
# ---------------------------------------------------------------------------

def _solve_square(rows: list[list[Fraction]], rhs: list[Fraction]) -> Optional[list[Fraction]]:
    """Unique solution of a square rational system, or None."""
    n = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


@lru_cache(maxsize=128)
def _ccdf_data(ambient: ConvexBody, g: ConcavePL):
    """Breakpoints and per-piece polynomials of t -> |{G >= t}| / |ambient|.

    Candidate breakpoints are the t-values where n+1 of the constraint
    hyperplanes in (x, t)-space meet in a point: a superset of the true
    combinatorial-change values, so each open interval carries a single
    polynomial of degree <= n, recovered exactly by interpolation.
    """
    n = ambient.dim
    vol = volume(ambient)
    if vol == 0:
        raise ValueError("ambient body must be full-dimensional")
    s0 = max_transform(ambient, g)
    sigma = min(g(x) for x in ambient.vertices)
    rows: list[tuple[list[Fraction], Fraction]] = []
    for h in ambient.halfspaces:
        rows.append(([Fraction(c) for c in h.normal] + [Fraction(0)], h.offset))
    for f in g.pieces:
        rows.append(([-c for c in f.gradient] + [Fraction(1)], f.constant))
    import itertools as it

    cuts = {Fraction(0), s0, min(sigma, s0)}
    for combo in it.combinations(range(len(rows)), n + 1):
        mat = [rows[i][0] for i in combo]
        rhs = [rows[i][1] for i in combo]
        sol = _solve_square(mat, rhs)
        if sol is not None and 0 <= sol[-1] <= s0:
            cuts.add(sol[-1])
    breaks = sorted(c for c in cuts if 0 <= c <= s0)
    pieces = []
    for lo, hi in zip(breaks, breaks[1:]):
        ts = [lo + (hi - lo) * Fraction(j + 1, n + 2) for j in range(n + 1)]
        vals = [volume(superlevel(ambient, g, t)) / vol for t in ts]
        pieces.append((lo, hi, _lagrange(ts, vals)))
    return s0, sigma, vol, tuple(breaks), tuple(pieces)


def _lagrange(ts: list[Fraction], vals: list[Fraction]) -> tuple[Fraction, ...]:
    """Coefficients (ascending) of the interpolating polynomial."""
    m = len(ts)
    coeffs = [Fraction(0)] * m
    for i in range(m):
        num = [Fraction(1)]
        den = Fraction(1)
        for j in range(m):
            if j == i:
                continue
            num = _poly_mul(num, [-ts[j], Fraction(1)])
            den *= ts[i] - ts[j]
        w = vals[i] / den
        for d, c in enumerate(num):
            coeffs[d] += w * c
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_eval(coeffs: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def ccdf_continuous(model: GradedSeriesModel, v: ValuationModel, t) -> Fraction:
    """F(t) = |{G >= t}| / |ambient|, exact; t must lie in [0, S0]."""
    t = rat(t)
    s0, _, vol, _, pieces = _ccdf_data(model.ambient, v.G)
    if not 0 <= t <= s0:
        raise ValueError(f"t={t} outside [0, {s0}]")
    for lo, hi, coeffs in pieces:
        if lo <= t <= hi:
            return _poly_eval(coeffs, t)
    # s0 == 0 edge: single point range
    return volume(superlevel(model.ambient, v.G, t)) / vol


def _top_atom(ambient: ConvexBody, g: ConcavePL, s0: Fraction, vol: Fraction) -> Fraction:
    return volume(superlevel(ambient, g, s0)) / vol


def _exact_poly_root(coeffs, tau, lo, hi) -> Optional[Fraction]:
    """Largest rational root of P(t) = tau in [lo, hi], for deg <= 2, else None."""
    c = list(coeffs) + [Fraction(0)] * (3 - len(coeffs))
    a2, a1, a0 = c[2], c[1], c[0] - tau
    roots: list[Fraction] = []
    if a2 == 0:
        if a1 == 0:
            return hi if a0 == 0 else None
        roots = [-a0 / a1]
    else:
        disc = a1 * a1 - 4 * a2 * a0
        if disc < 0:
            return None
        pq = disc.numerator * disc.denominator
        r = math.isqrt(pq)
        if r * r != pq:
            return None  # irrational roots: caller bisects
        sq = Fraction(r, disc.denominator)
        roots = [(-a1 + sq) / (2 * a2), (-a1 - sq) / (2 * a2)]
    valid = [t for t in roots if lo <= t <= hi]
    return max(valid) if valid else None


def quantile(model: GradedSeriesModel, v: ValuationModel, tau,
             tol=DEFAULT_TOL) -> TailSpec:
    """The volume quantile Q(tau) = sup{t : F(t) >= tau}.

    Exact when the crossing piece has a rational root (always for linear
    pieces, for quadratics with square discriminant); otherwise bisected to a
    certified bracket of width <= tol. tau <= atom-at-top returns S0.
    """
    tau = rat(tau)
    tol = rat(tol)
    if not 0 <= tau <= 1:
        raise ValueError("tau must lie in [0, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    s0, _, vol, _, pieces = _ccdf_data(model.ambient, v.G)
    atom = _top_atom(model.ambient, v.G, s0, vol)
    if tau <= atom:
        return TailSpec(tau, s0, atom, exact=True)
    for lo, hi, coeffs in reversed(pieces):
        if _poly_eval(coeffs, lo) < tau:
            continue
        root = _exact_poly_root(coeffs, tau, lo, hi)
        if root is not None:
            return TailSpec(tau, root, atom, exact=True)
        a, b = lo, hi  # P(a) >= tau > P(b), P monotone non-increasing
        while b - a > tol:
            mid = (a + b) / 2
            if _poly_eval(coeffs, mid) >= tau:
                a = mid
            else:
                b = mid
        return TailSpec(tau, (a + b) / 2, atom, exact=False, bracket=(a, b))
    raise AssertionError("unreachable: F(0) = 1 >= tau")


def quantum_quantile(model: GradedSeriesModel, v: ValuationModel, k: int, tau) -> Fraction:
    """Largest t with #{x in Delta_k : G(x) >= t} >= floor(tau d_k), i.e.
    j_{k, floor(tau d_k)} / k; the empty constraint floor = 0 yields j_{k,1}/k."""
    tau = rat(tau)
    if not 0 <= tau <= 1:
        raise ValueError("tau must lie in [0, 1]")
    jv = jumping_numbers(model, v, k)
    m = math.floor(tau * len(jv))
    idx = 0 if m == 0 else m - 1
    return jv.values[idx] / k


def S_tau(model: GradedSeriesModel, v: ValuationModel, tau,
          tol=DEFAULT_TOL) -> Fraction:
    """Tail expectation: the average of G over the quantile superlevel body.

    Exact whenever the quantile is exact (integration subdivides the body into
    the linearity regions of G); otherwise certified to within tol.
    """
    tau = rat(tau)
    if not 0 <= tau <= 1:
        raise ValueError("tau must lie in [0, 1]")
    s0, _, vol, _, pieces = _ccdf_data(model.ambient, v.G)
    if tau == 0:
        return s0
    spec = quantile(model, v, tau, tol)
    if spec.quantile == s0:
        return s0
    if spec.exact:
        body = superlevel(model.ambient, v.G, spec.quantile)
        return mean_transform(body, v.G)

    def tail_mean(q: Fraction) -> Fraction:
        return mean_transform(superlevel(model.ambient, v.G, q), v.G)

    a, b = spec.bracket
    lo_val, hi_val = tail_mean(a), tail_mean(b)
    for _ in range(256):
        if hi_val - lo_val <= tol:
            break
        # shrink the quantile bracket; the tail mean is monotone in q
        piece = next((p for p in pieces if p[0] <= a <= p[1] and p[0] <= b <= p[1]), None)
        mid = (a + b) / 2
        f_mid = (_poly_eval(piece[2], mid) if piece
                 else ccdf_continuous(model, v, mid))
        if f_mid >= tau:
            a = mid
            lo_val = tail_mean(a)
        else:
            b = mid
            hi_val = tail_mean(b)
    return (lo_val + hi_val) / 2


# ---------------------------------------------------------------------------
# compatible families
# ---------------------------------------------------------------------------

def select_compatible_family(model: GradedSeriesModel, v: ValuationModel,
                             k: int, m: int) -> PointCloud:
    """The m points of Delta_k with the largest G-values (ties: lex-larger
    first); families are nested in m by construction."""
    cloud = model.discrete_body(k)
    if not 1 <= m <= len(cloud):
        raise ValueError(f"m={m} out of range [1, {len(cloud)}]")
    scored = _scored_points(cloud, v.G)
    chosen = [pt for _, pt in scored[:m]]
    return PointCloud(k, tuple(tuple(int(c * k) for c in pt) for pt in chosen))


def empirical_family_measure(model: GradedSeriesModel, v: ValuationModel,
                             k: int, m: int) -> FamilyMeasure:
    """Uniform atoms (weight 1/m) on the selected compatible family; used for
    numerical weak-convergence checks against the tail-body barycenter."""
    family = select_compatible_family(model, v, k, m)
    w = Fraction(1, m)
    return FamilyMeasure(tuple((pt, w) for pt in family.coordinates()))


# ---------------------------------------------------------------------------
# restricted Grassmannian thresholds
# ---------------------------------------------------------------------------

def _restricted_min(pairs: list[tuple[str, Fraction]]):
    """Min of A/S ratios; zero-S entries count as the +inf sentinel and are
    excluded unless every entry is infinite. Lexicographic label tie-break."""
    finite = [(val, label) for label, val in pairs if val is not None]
    if not finite:
        labels = sorted(label for label, _ in pairs)
        return INFINITE, labels[0] if labels else None
    best = min(val for val, _ in finite)
    label = min(label for val, label in finite if val == best)
    return best, label


def delta_km_restricted(model: GradedSeriesModel, family: Sequence[ValuationModel],
                        k: int, m: int):
    """min over the family of A(v)/S_{k,m}(v): an UPPER bound on the
    Grassmannian threshold delta_{k,m} (which is an infimum over all
    divisorial valuations, unreachable from any finite family)."""
    if not family:
        raise ValueError("valuation family must be nonempty")
    pairs = []
    for v in family:
        s = S_km(model, v, k, m)
        pairs.append((v.label, None if s == 0 else v.A / s))
    return _restricted_min(pairs)


def alpha_k_restricted(model: GradedSeriesModel, family: Sequence[ValuationModel], k: int):
    """The m = 1 endpoint: restricted global log canonical threshold at level k."""
    return delta_km_restricted(model, family, k, 1)


def delta_tau_restricted(model: GradedSeriesModel, family: Sequence[ValuationModel],
                         tau, tol=DEFAULT_TOL):
    """min over the family of A(v)/S_tau(v); tau = 0 uses S0. Upper bound on
    the limiting threshold, as for delta_km_restricted."""
    if not family:
        raise ValueError("valuation family must be nonempty")
    tau = rat(tau)
    pairs = []
    for v in family:
        s = S0_and_sigma(model, v).S0 if tau == 0 else S_tau(model, v, tau, tol)
        pairs.append((v.label, None if s == 0 else v.A / s))
    return _restricted_min(pairs)


# ---------------------------------------------------------------------------
# partial bodies (quantile-restricted models)
# ---------------------------------------------------------------------------

def partial_body_counts(model: GradedSeriesModel, v: ValuationModel, tau, k: int,
                        tol=DEFAULT_TOL) -> tuple[int, int]:
    """(M_k, m_k^actual): lattice points of the quantile body Delta^{Q(tau)}
    that are idealized vs. realized at level k."""
    spec = quantile(model, v, tau, tol)
    body = superlevel(model.ambient, v.G, spec.quantile)
    ideal = sum(1 for x in model.idealized_body(k).coordinates() if body.contains(x))
    actual = sum(1 for x in model.discrete_body(k).coordinates() if body.contains(x))
    return ideal, actual


def valuation_to_json(v: ValuationModel) -> dict:
    from .geometry import rat_str

    return {
        "label": v.label,
        "A": rat_str(v.A),
        "G": {
            "pieces": [
                {"grad": [rat_str(c) for c in f.gradient], "const": rat_str(f.constant)}
                for f in v.G.pieces
            ]
        },
    }


def valuation_from_json(data: dict, ambient: ConvexBody) -> ValuationModel:
    from .geometry import AffineFunctional

    pieces = [
        AffineFunctional.make([rat(c) for c in p["grad"]], rat(p["const"]))
        for p in data["G"]["pieces"]
    ]
    return ValuationModel(str(data["label"]), rat(data["A"]),
                          ConcavePL.make(pieces, ambient))
