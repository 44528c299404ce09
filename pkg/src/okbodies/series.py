"""Graded-series models: discrete Okounkov bodies inside a fixed ambient body.

Four backends generate the level-k point sets Delta_k subset ambient ∩ Z^n/k:

* Toric       — no gaps: Delta_k is the full idealized lattice set.
* CurveDivisor — sections of O_C(p) on a genus-g curve, reduced to the
  numerical semigroup complementary to the Weierstrass gap sequence.
* CanonicalCurve — sections of K_C; per-level vanishing patterns are inputs
  (they are not determined by the genus alone), defaulting to the generic
  pattern k*Delta_k = {0,...,d_k-1}.
* Synthetic   — explicit gap sets, for constructed examples.

Models are immutable after construction; per-level results are cached.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .geometry import ConvexBody, body_from_json, body_to_json, hull
from .lattice import PointCloud, count, enumerate_points


class ModelError(ValueError):
    """Invalid model data (non-semigroup gaps, wrong gap-set sizes, ...)."""


class LevelError(ModelError):
    """Requested level k is outside N(L) for this model."""


@dataclass(frozen=True)
class GapRow:
    k: int
    d_k: int
    D_k: int
    diff: int


class GradedSeriesModel:
    """Base class: ambient body plus a per-level generator of Delta_k."""

    def __init__(self, ambient: ConvexBody):
        self.ambient = ambient
        self._discrete: dict[int, PointCloud] = {}
        self._idealized: dict[int, PointCloud] = {}

    # -- levels ---------------------------------------------------------

    def has_level(self, k: int) -> bool:
        return k >= 1

    def _check_level(self, k: int) -> None:
        if not isinstance(k, int) or k < 1:
            raise LevelError(f"k must be a positive integer, got {k!r}")
        if not self.has_level(k):
            raise LevelError(f"k={k} is not a level of this model")

    # -- core sets ------------------------------------------------------

    def _numerators(self, k: int) -> set[tuple[int, ...]]:
        raise NotImplementedError

    def discrete_body(self, k: int) -> PointCloud:
        """Delta_k as a PointCloud over denominator k."""
        self._check_level(k)
        if k not in self._discrete:
            self._discrete[k] = PointCloud(k, tuple(self._numerators(k)))
        return self._discrete[k]

    def idealized_body(self, k: int) -> PointCloud:
        """The idealized set ambient ∩ Z^n/k."""
        if k not in self._idealized:
            self._idealized[k] = enumerate_points(self.ambient, k)
        return self._idealized[k]

    def d_k(self, k: int) -> int:
        return len(self.discrete_body(k))

    def D_k(self, k: int) -> int:
        return len(self.idealized_body(k))

    def gap_set(self, k: int) -> PointCloud:
        """(ambient ∩ Z^n/k) \\ Delta_k."""
        ideal = self.idealized_body(k)
        actual = set(self.discrete_body(k).points)
        missing = [z for z in ideal.points if z not in actual]
        if len(missing) + len(actual) != len(ideal):
            raise ModelError("Delta_k is not contained in the idealized lattice set")
        return PointCloud(k, tuple(missing))

    def gap_table(self, k_max: int) -> list[GapRow]:
        if k_max < 1:
            raise ValueError("k_max must be >= 1")
        rows = []
        for k in range(1, k_max + 1):
            if not self.has_level(k):
                continue
            dk, Dk = self.d_k(k), self.D_k(k)
            rows.append(GapRow(k, dk, Dk, Dk - dk))
        return rows

    def max_gap_stat(self, k: int) -> tuple[Fraction, Fraction, Fraction]:
        """(max over ambient of p1, max over Delta_k of p1, their difference)."""
        body = self.discrete_body(k)
        if not body.points:
            raise LevelError(f"Delta_{k} is empty")
        top_ambient = max(v[0] for v in self.ambient.vertices)
        top_discrete = Fraction(max(z[0] for z in body.points), k)
        return top_ambient, top_discrete, top_ambient - top_discrete

    def validate_superadditive(self, k_max: int) -> None:
        """Check k Delta_k + k' Delta_k' subset (k+k') Delta_{k+k'} exhaustively."""
        levels = [k for k in range(1, k_max + 1) if self.has_level(k)]
        for k in levels:
            for kp in levels:
                if k + kp > k_max or not self.has_level(k + kp):
                    continue
                target = set(self.discrete_body(k + kp).points)
                for a in self.discrete_body(k).points:
                    for b in self.discrete_body(kp).points:
                        s = tuple(x + y for x, y in zip(a, b))
                        if s not in target:
                            raise ModelError(
                                f"superadditivity fails: {a}/{k} + {b}/{kp} "
                                f"not in Delta_{k + kp}"
                            )


# ---------------------------------------------------------------------------
# toric
# ---------------------------------------------------------------------------

class ToricModel(GradedSeriesModel):
    """Every k-lattice point of the polytope is realized: no gaps."""

    backend = "toric"

    def __init__(self, polytope: ConvexBody):
        if polytope.is_empty:
            raise ModelError("toric model needs a nonempty polytope")
        super().__init__(polytope)

    def _numerators(self, k: int) -> set[tuple[int, ...]]:
        return set(self.idealized_body(k).points)

    def d_k(self, k: int) -> int:
        self._check_level(k)
        return count(self.ambient, k)


# ---------------------------------------------------------------------------
# curve divisor O_C(p)
# ---------------------------------------------------------------------------

def is_gap_sequence(gaps: Sequence[int]) -> bool:
    """Valid Weierstrass gap data: 1 = N_1 < ... < N_g <= 2g-1 with
    semigroup complement (closed under addition)."""
    g = len(gaps)
    if g == 0:
        return False
    gaps = list(gaps)
    if gaps[0] != 1 or sorted(set(gaps)) != gaps or gaps[-1] > 2 * g - 1:
        return False
    gap_set = set(gaps)
    members = [s for s in range(1, gaps[-1] + 1) if s not in gap_set]
    for s in members:
        for t in members:
            if s + t <= gaps[-1] and (s + t) in gap_set:
                return False
    return True


def gap_sequences_of_genus(g: int) -> list[tuple[int, ...]]:
    """All Weierstrass gap sequences of genus g (numerical semigroups), exhaustively."""
    import itertools

    if g == 0:
        return []
    out = []
    for rest in itertools.combinations(range(2, 2 * g), g - 1):
        cand = (1,) + rest
        if is_gap_sequence(cand):
            out.append(cand)
    return out


class CurveDivisorModel(GradedSeriesModel):
    """Model of O_C(p) on a genus-g curve with flag through p: ambient [0, 1].

    h^0(kp) is the count of semigroup elements <= k, and
    k*Delta_k = {k - s : s in S, s <= k}; no function-field algebra is needed.
    """

    backend = "curve"

    def __init__(self, genus: int, gaps: Sequence[int]):
        gaps = tuple(int(n) for n in gaps)
        if genus != len(gaps):
            raise ModelError(f"genus {genus} != number of gaps {len(gaps)}")
        if not is_gap_sequence(gaps):
            raise ModelError(f"{gaps} is not a Weierstrass gap sequence")
        super().__init__(hull([(0,), (1,)]))
        self.genus = genus
        self.gaps = gaps

    def _numerators(self, k: int) -> set[tuple[int, ...]]:
        gap_set = set(self.gaps)
        return {(k - s,) for s in range(0, k + 1) if s not in gap_set}

    def recover_gaps(self) -> list[tuple[int, int]]:
        """Read the gap sequence back off the discrete bodies.

        N_i is the smallest k at which the idealized-vs-actual count deficit
        reaches i; returns [(N_i, witnessing k)], which round-trips the input.
        """
        found = []
        deficit_seen = 0
        k = 0
        while deficit_seen < self.genus:
            k += 1
            deficit = self.D_k(k) - self.d_k(k)
            if deficit > deficit_seen:
                if deficit != deficit_seen + 1:
                    raise ModelError("gap deficit jumped by more than one")
                found.append((k, k))
                deficit_seen = deficit
            if k > 2 * self.genus:
                raise ModelError("ran past 2g without finding all gaps")
        return found


# ---------------------------------------------------------------------------
# canonical curve K_C
# ---------------------------------------------------------------------------

class CanonicalCurveModel(GradedSeriesModel):
    """Model of K_C on a genus-g curve (g >= 2): ambient [0, 2g-2].

    d_1 = g and d_k = k(2g-2)+1-g for k >= 2. The per-level gap sets (the
    lattice integers *not* realized in k*Delta_k) are inputs; levels without a
    declared pattern use the generic one, k*Delta_k = {0,...,d_k-1}.
    """

    backend = "canonical"

    def __init__(self, genus: int, per_k_gap_sets: Optional[Mapping[int, Iterable[int]]] = None):
        if genus < 2:
            raise ModelError("canonical-curve model needs genus >= 2")
        super().__init__(hull([(0,), (2 * genus - 2,)]))
        self.genus = genus
        patterns: dict[int, tuple[int, ...]] = {}
        for k, gaps in (per_k_gap_sets or {}).items():
            k = int(k)
            gaps = tuple(sorted(int(x) for x in gaps))
            top = k * (2 * genus - 2)
            expected = top + 1 - self.d_k(k)
            if len(set(gaps)) != len(gaps) or len(gaps) != expected:
                raise ModelError(
                    f"level {k} gap set must have exactly {expected} distinct entries"
                )
            if gaps and (gaps[0] < 0 or gaps[-1] > top):
                raise ModelError(f"level {k} gap entries must lie in [0, {top}]")
            patterns[k] = gaps
        self.per_k_gap_sets = patterns

    def d_k(self, k: int) -> int:
        self._check_level(k)
        g = self.genus
        return g if k == 1 else k * (2 * g - 2) + 1 - g

    def _numerators(self, k: int) -> set[tuple[int, ...]]:
        top = k * (2 * self.genus - 2)
        if k in self.per_k_gap_sets:
            gaps = set(self.per_k_gap_sets[k])
            return {(j,) for j in range(top + 1) if j not in gaps}
        return {(j,) for j in range(self.d_k(k))}

    def k_weierstrass_sequence(self, k: int) -> list[int]:
        """k*Delta_k + 1 as a sorted list of d_k integers in [1, k(2g-2)+1]."""
        return sorted(z[0] + 1 for z in self.discrete_body(k).points)

    def is_generic_at(self, k: int) -> bool:
        return set(self.discrete_body(k).points) == {(j,) for j in range(self.d_k(k))}


# ---------------------------------------------------------------------------
# synthetic
# ---------------------------------------------------------------------------

class SyntheticModel(GradedSeriesModel):
    """Explicit gap sets over an ambient body, for constructed examples.

    ``gap_sets`` maps k to an iterable of integer numerator vectors, or is a
    callable k -> iterable for models defined at every level. Levels default
    to the dict keys (or all k >= 1 for callables). Superadditivity is only
    checked on demand via validate_superadditive().
    """

    backend = "synthetic"

    def __init__(self, ambient: ConvexBody,
                 gap_sets: Mapping[int, Iterable[Sequence[int]]] | Callable[[int], Iterable],
                 levels: Optional[Iterable[int]] = None):
        if ambient.is_empty:
            raise ModelError("synthetic model needs a nonempty ambient body")
        super().__init__(ambient)
        self._gap_fn: Optional[Callable[[int], Iterable]] = None
        self._gap_map: dict[int, frozenset[tuple[int, ...]]] = {}
        if callable(gap_sets):
            self._gap_fn = gap_sets
        else:
            for k, pts in gap_sets.items():
                self._gap_map[int(k)] = frozenset(tuple(int(c) for c in z) for z in pts)
        if levels is not None:
            self._levels: Optional[frozenset[int]] = frozenset(int(k) for k in levels)
        elif self._gap_fn is None:
            self._levels = frozenset(self._gap_map)
        else:
            self._levels = None  # all k >= 1

    def has_level(self, k: int) -> bool:
        return k >= 1 and (self._levels is None or k in self._levels)

    def _gaps_at(self, k: int) -> frozenset[tuple[int, ...]]:
        if self._gap_fn is not None:
            return frozenset(tuple(int(c) for c in z) for z in self._gap_fn(k))
        return self._gap_map.get(k, frozenset())

    def _numerators(self, k: int) -> set[tuple[int, ...]]:
        ideal = set(self.idealized_body(k).points)
        gaps = self._gaps_at(k)
        if not gaps <= ideal:
            raise ModelError(
                f"level {k} gap set is not contained in the idealized lattice set"
            )
        return ideal - gaps


# ---------------------------------------------------------------------------
# bundled reference models
# ---------------------------------------------------------------------------

# Vanishing behavior of O_C(p) at a point of a smooth plane quartic (g = 3):
# the three possible gap sequences, by the classical flex classification.
PLANE_QUARTIC_GAP_SEQUENCES: dict[str, tuple[int, ...]] = {
    "ordinary": (1, 2, 3),
    "flex": (1, 2, 4),
    "hyperflex": (1, 2, 5),
}

# K_C on a genus-3 quartic: the six k <= 2 vanishing patterns (k*Delta_k) at
# special points.  Keys are the point type; values map k to the realized set.
GENUS3_CANONICAL_PATTERNS: dict[str, dict[int, tuple[int, ...]]] = {
    "generic": {1: (0, 1, 2), 2: (0, 1, 2, 3, 4, 5)},
    "flex": {1: (0, 1, 3), 2: (0, 1, 2, 3, 4, 6)},
    "hyperflex": {1: (0, 1, 4), 2: (0, 1, 2, 4, 5, 8)},
    "sextactic_1": {1: (0, 1, 2), 2: (0, 1, 2, 3, 4, 6)},
    "sextactic_2": {1: (0, 1, 2), 2: (0, 1, 2, 3, 4, 7)},
    "sextactic_3": {1: (0, 1, 2), 2: (0, 1, 2, 3, 4, 8)},
}


def plane_quartic_model(kind: str) -> CurveDivisorModel:
    """O_C(p) model for a point of the named type on a smooth plane quartic."""
    return CurveDivisorModel(3, PLANE_QUARTIC_GAP_SEQUENCES[kind])


def genus3_canonical_model(kind: str) -> CanonicalCurveModel:
    """K_C model (g=3) with the named k <= 2 vanishing pattern declared."""
    pattern = GENUS3_CANONICAL_PATTERNS[kind]
    per_k = {}
    for k, realized in pattern.items():
        top = k * 4
        per_k[k] = tuple(sorted(set(range(top + 1)) - set(realized)))
    return CanonicalCurveModel(3, per_k)


def p1xp1_model(ramified: bool) -> SyntheticModel:
    """O(1,1) on P^1 x P^1 with flag through a smooth (2,1)-curve.

    Ambient quadrilateral conv{(0,0),(1/2,0),(1/2,1),(0,3)}; at k=2 exactly one
    point over x=1/2 is a gap, depending on whether the flag point ramifies.
    """
    ambient = hull([(0, 0), (Fraction(1, 2), 0), (Fraction(1, 2), 1), (0, 3)])
    gap = (1, 1) if ramified else (1, 2)
    return SyntheticModel(ambient, {1: (), 2: (gap,)}, levels=(1, 2))


def top_column_gap_model(side: int = 1) -> SyntheticModel:
    """Unit-square synthetic model with the whole x1 = 1 lattice column removed
    at every level: the quantum maximum trails the true maximum by exactly 1/k."""
    square = hull([(0, 0), (side, 0), (0, side), (side, side)])

    def gaps(k: int):
        return [(k * side, j) for j in range(k * side + 1)]

    return SyntheticModel(square, gaps)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def model_to_json(model: GradedSeriesModel) -> dict:
    if isinstance(model, ToricModel):
        return {"backend": "toric", "polytope": body_to_json(model.ambient)}
    if isinstance(model, CurveDivisorModel):
        return {"backend": "curve", "genus": model.genus, "gaps": list(model.gaps)}
    if isinstance(model, CanonicalCurveModel):
        return {
            "backend": "canonical",
            "genus": model.genus,
            "per_k_gaps": {str(k): list(v) for k, v in model.per_k_gap_sets.items()},
        }
    if isinstance(model, SyntheticModel):
        if model._gap_fn is not None:
            raise ModelError("callable-backed synthetic models are not serializable")
        return {
            "backend": "synthetic",
            "polytope": body_to_json(model.ambient),
            "per_k_gaps": {str(k): [list(z) for z in sorted(v)]
                           for k, v in model._gap_map.items()},
            "levels": sorted(model._levels) if model._levels is not None else None,
        }
    raise ModelError(f"cannot serialize {type(model).__name__}")


def model_from_json(data: Mapping) -> GradedSeriesModel:
    backend = data.get("backend")
    if backend == "toric":
        return ToricModel(body_from_json(data["polytope"]))
    if backend == "curve":
        return CurveDivisorModel(int(data["genus"]), [int(n) for n in data["gaps"]])
    if backend == "canonical":
        per_k = {int(k): [int(x) for x in v]
                 for k, v in (data.get("per_k_gaps") or {}).items()}
        return CanonicalCurveModel(int(data["genus"]), per_k)
    if backend == "synthetic":
        gap_sets = {int(k): [tuple(int(c) for c in z) for z in v]
                    for k, v in (data.get("per_k_gaps") or {}).items()}
        levels = data.get("levels")
        return SyntheticModel(
            body_from_json(data["polytope"]), gap_sets,
            levels=None if levels is None else [int(k) for k in levels],
        )
    raise ModelError(f"unknown backend {backend!r}")
