"""Backend tests: toric, curve-divisor, canonical-curve, synthetic models."""

from fractions import Fraction as F

import pytest

from okbodies.geometry import hull
from okbodies.series import (
    CanonicalCurveModel,
    CurveDivisorModel,
    GENUS3_CANONICAL_PATTERNS,
    LevelError,
    ModelError,
    PLANE_QUARTIC_GAP_SEQUENCES,
    SyntheticModel,
    ToricModel,
    gap_sequences_of_genus,
    genus3_canonical_model,
    is_gap_sequence,
    model_from_json,
    model_to_json,
    p1xp1_model,
    plane_quartic_model,
    top_column_gap_model,
)

UNIT_SIMPLEX = hull([(0, 0), (1, 0), (0, 1)])

# k*Delta_k for O_C(p) on a plane quartic, k = 1..5, per point type.
# Derived independently from the numerical semigroup: the level-k set is
# {k - s : s in complement(gaps), s <= k}.
QUARTIC_BODIES = {
    "ordinary": {1: {1}, 2: {2}, 3: {3}, 4: {0, 4}, 5: {0, 1, 5}},
    "flex": {1: {1}, 2: {2}, 3: {0, 3}, 4: {1, 4}, 5: {0, 2, 5}},
    "hyperflex": {1: {1}, 2: {2}, 3: {0, 3}, 4: {0, 1, 4}, 5: {1, 2, 5}},
}


# ---------------------------------------------------------------------------
# gap sequences / semigroups
# ---------------------------------------------------------------------------

def test_gap_sequence_validation():
    assert is_gap_sequence([1, 2, 3])
    assert is_gap_sequence([1, 2, 4])
    assert is_gap_sequence([1, 2, 5])
    assert is_gap_sequence([1, 3])            # complement {0,2,4,5,...} is a semigroup
    assert not is_gap_sequence([2, 3])        # N_1 must be 1
    assert not is_gap_sequence([1, 3, 4])     # complement {2,5,...}: 2+2=4 is a gap
    assert not is_gap_sequence([1, 2, 6])     # N_g > 2g-1
    assert not is_gap_sequence([])


def test_semigroup_counts_by_genus():
    # number of numerical semigroups of genus 1..8
    expected = [1, 2, 4, 7, 12, 23, 39, 67]
    for g, n in enumerate(expected, start=1):
        assert len(gap_sequences_of_genus(g)) == n


def test_curve_model_rejects_bad_input():
    with pytest.raises(ModelError):
        CurveDivisorModel(2, [2, 3])
    with pytest.raises(ModelError):
        CurveDivisorModel(3, [1, 2])  # genus mismatch


# ---------------------------------------------------------------------------
# curve-divisor backend
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", list(PLANE_QUARTIC_GAP_SEQUENCES))
def test_quartic_discrete_bodies(kind):
    model = plane_quartic_model(kind)
    for k, expected in QUARTIC_BODIES[kind].items():
        got = {z[0] for z in model.discrete_body(k).points}
        assert got == expected, (kind, k)


def test_quartic_hyperflex_k5_values():
    model = plane_quartic_model("hyperflex")
    assert model.discrete_body(5).coordinates() == [(F(1, 5),), (F(2, 5),), (F(1),)]
    assert {z[0] for z in model.gap_set(5).points} == {0, 3, 4}
    assert model.d_k(3) == 2  # S ∩ [0,3] = {0,3}


def test_recover_gaps_roundtrip_examples():
    assert CurveDivisorModel(3, [1, 2, 4]).recover_gaps() == [(1, 1), (2, 2), (4, 4)]
    assert plane_quartic_model("ordinary").recover_gaps() == [(1, 1), (2, 2), (3, 3)]
    assert plane_quartic_model("hyperflex").recover_gaps() == [(1, 1), (2, 2), (5, 5)]


def test_recover_gaps_roundtrip_exhaustive_genus4():
    for gaps in gap_sequences_of_genus(4):
        model = CurveDivisorModel(4, gaps)
        assert tuple(n for n, _ in model.recover_gaps()) == gaps


def test_gap_table_hyperflex():
    model = plane_quartic_model("hyperflex")
    assert [r.diff for r in model.gap_table(5)] == [1, 2, 2, 2, 3]


def test_curve_min_delta_k_detects_gaps():
    # k is a gap iff min Delta_k > 0
    model = plane_quartic_model("flex")
    for k in range(1, 10):
        is_gap = min(z[0] for z in model.discrete_body(k).points) > 0
        assert is_gap == (k in (1, 2, 4))


def test_curve_superadditive():
    plane_quartic_model("hyperflex").validate_superadditive(10)


# ---------------------------------------------------------------------------
# canonical-curve backend
# ---------------------------------------------------------------------------

def test_canonical_generic_bodies():
    model = CanonicalCurveModel(3)
    assert model.discrete_body(2).coordinates() == [
        (F(0),), (F(1, 2),), (F(1),), (F(3, 2),), (F(2),), (F(5, 2),)
    ]
    assert model.d_k(2) == 6
    assert {z[0] for z in model.gap_set(2).points} == {6, 7, 8}


def test_canonical_dimension_formula():
    model = CanonicalCurveModel(5)
    assert model.d_k(1) == 5
    for k in range(2, 12):
        assert model.d_k(k) == k * 8 + 1 - 5
        assert len(model.discrete_body(k)) == model.d_k(k)


def test_canonical_gap_counts_stabilize():
    for g in (2, 3, 5):
        model = CanonicalCurveModel(g)
        rows = model.gap_table(12)
        assert rows[0].diff == g - 1
        assert all(r.diff == g for r in rows[1:])


def test_k_weierstrass_sequences():
    assert CanonicalCurveModel(3).k_weierstrass_sequence(2) == [1, 2, 3, 4, 5, 6]
    assert genus3_canonical_model("flex").k_weierstrass_sequence(1) == [1, 2, 4]
    assert CanonicalCurveModel(2).k_weierstrass_sequence(1) == [1, 2]


def test_canonical_max_gap_equality_iff_generic():
    generic = CanonicalCurveModel(3)
    assert generic.max_gap_stat(2) == (F(4), F(5, 2), F(3, 2))  # = g/k
    for kind, pattern in GENUS3_CANONICAL_PATTERNS.items():
        model = genus3_canonical_model(kind)
        for k in (1, 2):
            _, _, diff = model.max_gap_stat(k)
            bound = F(3 if k > 1 else 2, k)  # g/k for k >= 2, g-1 at k = 1
            assert diff <= bound
            generic_at_k = set(pattern[k]) == set(range(model.d_k(k)))
            assert (diff == bound) == generic_at_k, (kind, k)


def test_genus3_patterns_reproduce_declared_bodies():
    for kind, pattern in GENUS3_CANONICAL_PATTERNS.items():
        model = genus3_canonical_model(kind)
        for k, realized in pattern.items():
            assert {z[0] for z in model.discrete_body(k).points} == set(realized)


def test_genus3_patterns_superadditive_up_to_declared_levels():
    for kind in GENUS3_CANONICAL_PATTERNS:
        genus3_canonical_model(kind).validate_superadditive(2)


def test_hyperflex_canonical_not_superadditive_past_declared_levels():
    # the generic default at k=3 is wrong for a hyperflex point: 2*4 + 4 = 12
    # lies in Delta_1 + Delta_2 scaled but not in the generic {0..9}
    with pytest.raises(ModelError):
        genus3_canonical_model("hyperflex").validate_superadditive(3)


def test_canonical_rejects_bad_patterns():
    with pytest.raises(ModelError):
        CanonicalCurveModel(3, {2: [6, 7]})       # wrong size (needs 3)
    with pytest.raises(ModelError):
        CanonicalCurveModel(3, {2: [6, 7, 9]})    # out of range
    with pytest.raises(ModelError):
        CanonicalCurveModel(1)


# ---------------------------------------------------------------------------
# toric and synthetic backends
# ---------------------------------------------------------------------------

def test_toric_no_gaps():
    model = ToricModel(UNIT_SIMPLEX)
    assert model.discrete_body(1).coordinates() == [(F(0), F(0)), (F(0), F(1)), (F(1), F(0))]
    for k in (1, 2, 5):
        assert model.gap_set(k).points == ()
        assert model.d_k(k) == (k + 1) * (k + 2) // 2
    assert [r.diff for r in model.gap_table(6)] == [0] * 6
    assert model.max_gap_stat(4) == (F(1), F(1), F(0))


def test_toric_superadditive():
    ToricModel(UNIT_SIMPLEX).validate_superadditive(6)


def test_gap_set_is_complement():
    model = plane_quartic_model("flex")
    for k in range(1, 8):
        ideal = set(model.idealized_body(k).points)
        actual = set(model.discrete_body(k).points)
        gaps = set(model.gap_set(k).points)
        assert actual | gaps == ideal
        assert actual & gaps == set()


def test_p1xp1_models():
    for ramified in (False, True):
        model = p1xp1_model(ramified)
        assert {z for z in model.discrete_body(1).points} == {(0, j) for j in range(4)}
        assert model.d_k(2) == 9
        assert model.D_k(2) == 10
        gap = model.gap_set(2).points
        assert gap == (((1, 1),) if ramified else ((1, 2),))
    with pytest.raises(LevelError):
        p1xp1_model(False).discrete_body(3)


def test_top_column_gap_model():
    model = top_column_gap_model()
    for k in (1, 2, 5):
        assert model.d_k(k) == (k + 1) ** 2 - (k + 1)
        assert model.max_gap_stat(k)[2] == F(1, k)


def test_synthetic_rejects_gap_outside_ambient():
    model = SyntheticModel(UNIT_SIMPLEX, {2: [(3, 3)]})
    with pytest.raises(ModelError):
        model.discrete_body(2)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("model", [
    ToricModel(UNIT_SIMPLEX),
    plane_quartic_model("hyperflex"),
    genus3_canonical_model("flex"),
    p1xp1_model(True),
])
def test_model_json_roundtrip(model):
    data = model_to_json(model)
    again = model_from_json(data)
    assert type(again) is type(model)
    for k in (1, 2):
        assert again.discrete_body(k) == model.discrete_body(k)


def test_model_json_unknown_backend():
    with pytest.raises(ModelError):
        model_from_json({"backend": "mystery"})
