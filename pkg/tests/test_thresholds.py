"""Threshold invariants: jumping numbers, S_{k,m}, quantiles, restricted deltas."""

import math
from fractions import Fraction as F

import pytest

from okbodies.geometry import (
    AffineFunctional,
    ConcavePL,
    first_coordinate_transform,
    hull,
)
from okbodies.series import (
    CanonicalCurveModel,
    CurveDivisorModel,
    ToricModel,
    plane_quartic_model,
)
from okbodies.thresholds import (
    INFINITE,
    EmpiricalMeasure,
    S0_and_sigma,
    S_km,
    S_tau,
    Sbar_km,
    ValuationModel,
    alpha_k_restricted,
    ccdf_continuous,
    delta_km_restricted,
    delta_tau_restricted,
    empirical_family_measure,
    idealized_jumping,
    jumping_numbers,
    mu_k,
    partial_body_counts,
    quantile,
    quantum_quantile,
    select_compatible_family,
    valuation_from_json,
    valuation_to_json,
)

SIMPLEX = ToricModel(hull([(0, 0), (1, 0), (0, 1)]))
SEGMENT = ToricModel(hull([(0,), (1,)]))
HYPERFLEX = plane_quartic_model("hyperflex")
CANONICAL3 = CanonicalCurveModel(3)

V_SIMPLEX = ValuationModel.divisorial("e1", SIMPLEX.ambient)
V_SEGMENT = ValuationModel.divisorial("e1", SEGMENT.ambient)
V_HYPER = ValuationModel.divisorial("p", HYPERFLEX.ambient)
V_CAN = ValuationModel.divisorial("p", CANONICAL3.ambient)


def coordinate_family(model):
    """The three toric divisor transforms on a dilated 2-simplex conv{0, s e1, s e2}."""
    amb = model.ambient
    s = max(v[0] for v in amb.vertices)
    g1 = first_coordinate_transform(amb)
    g2 = ConcavePL.make([AffineFunctional.make((0, 1), 0)], amb)
    g3 = ConcavePL.make([AffineFunctional.make((-1, -1), s)], amb)
    return [
        ValuationModel("D1", F(1), g1),
        ValuationModel("D2", F(1), g2),
        ValuationModel("D3", F(1), g3),
    ]


# ---------------------------------------------------------------------------
# jumping numbers
# ---------------------------------------------------------------------------

def test_jumping_numbers_simplex():
    jv = jumping_numbers(SIMPLEX, V_SIMPLEX, 2)
    assert jv.values == (2, 1, 1, 0, 0, 0)


def test_jumping_numbers_hyperflex():
    jv = jumping_numbers(HYPERFLEX, V_HYPER, 5)
    assert jv.values == (5, 2, 1)


def test_jumping_numbers_zero_transform():
    g0 = ConcavePL.make([AffineFunctional.make((0, 0), 0)], SIMPLEX.ambient)
    v = ValuationModel("zero", F(1), g0)
    assert jumping_numbers(SIMPLEX, v, 3).values == (0,) * 10


def test_idealized_jumping_hyperflex():
    iv = idealized_jumping(HYPERFLEX, V_HYPER, 5)
    assert iv.values == (5, 4, 3, 2, 1, 0)


def test_idealized_equals_jumping_on_toric():
    for k in (1, 2, 4):
        assert (jumping_numbers(SIMPLEX, V_SIMPLEX, k).values
                == idealized_jumping(SIMPLEX, V_SIMPLEX, k).values)


def test_sandwich_inequalities():
    # j <= i entrywise and the tail comparison j_{k,d+1-l} >= i_{k,D+1-l}
    for model, v in [(HYPERFLEX, V_HYPER), (CANONICAL3, V_CAN), (SIMPLEX, V_SIMPLEX)]:
        for k in (1, 2, 3, 5, 8):
            j = jumping_numbers(model, v, k).values
            i = idealized_jumping(model, v, k).values
            d, D = len(j), len(i)
            assert all(j[l] <= i[l] for l in range(d))
            assert all(j[d - l] >= i[D - l] for l in range(1, d + 1))


def test_hyperflex_tail_alignment():
    j = jumping_numbers(HYPERFLEX, V_HYPER, 5).values
    i = idealized_jumping(HYPERFLEX, V_HYPER, 5).values
    assert j == (5, 2, 1) and i[-3:] == (2, 1, 0)


# ---------------------------------------------------------------------------
# S_{k,m} and the idealized variant
# ---------------------------------------------------------------------------

def test_S_km_values():
    assert S_km(SIMPLEX, V_SIMPLEX, 2, 3) == F(2, 3)
    assert S_km(SIMPLEX, V_SIMPLEX, 2, 6) == F(1, 3)
    assert S_km(HYPERFLEX, V_HYPER, 5, 2) == F(7, 10)
    with pytest.raises(ValueError):
        S_km(SIMPLEX, V_SIMPLEX, 2, 7)
    with pytest.raises(ValueError):
        S_km(SIMPLEX, V_SIMPLEX, 2, 0)


def test_Sbar_km_values():
    assert Sbar_km(HYPERFLEX, V_HYPER, 5, 2) == F(9, 10)
    for k, m in [(2, 3), (3, 4)]:
        assert Sbar_km(SIMPLEX, V_SIMPLEX, k, m) == S_km(SIMPLEX, V_SIMPLEX, k, m)
    for k in (1, 2, 5):
        assert Sbar_km(SEGMENT, V_SEGMENT, k, 1) == 1


def test_S_monotone_in_m():
    for model, v in [(SIMPLEX, V_SIMPLEX), (HYPERFLEX, V_HYPER)]:
        for k in (2, 5):
            d = model.d_k(k)
            vals = [S_km(model, v, k, m) for m in range(1, d + 1)]
            assert all(a >= b for a, b in zip(vals, vals[1:]))
            D = model.D_k(k)
            ivals = [Sbar_km(model, v, k, m) for m in range(1, D + 1)]
            assert all(a >= b for a, b in zip(ivals, ivals[1:]))


def test_fekete_superadditivity():
    for model, v in [(SIMPLEX, V_SIMPLEX), (HYPERFLEX, V_HYPER), (CANONICAL3, V_CAN)]:
        for k in (1, 2, 3):
            for kp in (1, 2, 4):
                lhs = k * S_km(model, v, k, 1) + kp * S_km(model, v, kp, 1)
                rhs = (k + kp) * S_km(model, v, k + kp, 1)
                assert lhs <= rhs


def test_joint_superadditivity():
    for model, v in [(SIMPLEX, V_SIMPLEX), (HYPERFLEX, V_HYPER)]:
        for k in (2, 3):
            for kp in (1, 2):
                for m in range(1, model.d_k(k) + 1):
                    lhs = k * S_km(model, v, k, m) + kp * S_km(model, v, kp, 1)
                    assert (k + kp) * S_km(model, v, k + kp, m) >= lhs


def test_multiple_monotonicity():
    for model, v in [(SIMPLEX, V_SIMPLEX), (HYPERFLEX, V_HYPER)]:
        for k in (1, 2):
            for ell in (2, 3):
                for m in range(1, model.d_k(k) + 1):
                    assert S_km(model, v, k, m) <= S_km(model, v, ell * k, m)


def test_weak_reverse_inequality():
    # S_{k,m} >= (1/km) sum_{l=1+D-d}^{m+D-d} i_{k,l} on divisorial models
    for model, v in [(HYPERFLEX, V_HYPER), (CANONICAL3, V_CAN)]:
        for k in (2, 3, 5):
            j = jumping_numbers(model, v, k)
            i = idealized_jumping(model, v, k)
            d, D = len(j), len(i)
            for m in range(1, d + 1):
                rhs = sum(i.values[D - d : m + D - d], F(0)) / (k * m)
                assert S_km(model, v, k, m) >= rhs


# ---------------------------------------------------------------------------
# extremal orders and empirical measures
# ---------------------------------------------------------------------------

def test_S0_sigma_basic():
    vo = S0_and_sigma(SIMPLEX, V_SIMPLEX)
    assert (vo.S0, vo.sigma) == (1, 0)
    seg = ToricModel(hull([(F(1, 3),), (F(7, 2),)]))
    vseg = ValuationModel.divisorial("p", seg.ambient)
    vo = S0_and_sigma(seg, vseg)
    assert (vo.S0, vo.sigma) == (F(7, 2), F(1, 3))


def test_S0_quantum_variants():
    vo = S0_and_sigma(CANONICAL3, V_CAN, k=2)
    assert vo.S0 == 4
    assert vo.quantum_S0 == F(5, 2)
    assert vo.quantum_S0 < vo.S0
    assert vo.quantum_sigma == 0


def test_S0_interior_peak_needs_lp():
    # tent function peaking at x = 1/2: vertex evaluation alone would say 0
    tent = ConcavePL.make(
        [AffineFunctional.make((1,), 0), AffineFunctional.make((-1,), 1)],
        SEGMENT.ambient,
    )
    v = ValuationModel("tent", F(1), tent)
    vo = S0_and_sigma(SEGMENT, v)
    assert (vo.S0, vo.sigma) == (F(1, 2), 0)


def test_mu_k_atoms():
    m = mu_k(SIMPLEX, V_SIMPLEX, 2)
    assert m.atoms == ((F(0), F(1, 2)), (F(1, 2), F(1, 3)), (F(1), F(1, 6)))
    assert m.barycenter() == F(1, 3)
    m5 = mu_k(HYPERFLEX, V_HYPER, 5)
    assert m5.atoms == ((F(1, 5), F(1, 3)), (F(2, 5), F(1, 3)), (F(1), F(1, 3)))


def test_mu_k_single_point():
    m = mu_k(HYPERFLEX, V_HYPER, 1)  # Delta_1 = {1}
    assert m.atoms == ((F(1), F(1)),)


def test_mu_k_barycenter_is_full_average():
    # b(mu_{v,k}) = S_{k,d_k} identically
    for model, v in [(SIMPLEX, V_SIMPLEX), (HYPERFLEX, V_HYPER), (CANONICAL3, V_CAN)]:
        for k in (1, 2, 5):
            d = model.d_k(k)
            assert mu_k(model, v, k).barycenter() == S_km(model, v, k, d)


def test_empirical_measure_ccdf():
    m = mu_k(SIMPLEX, V_SIMPLEX, 2)  # atoms at 0, 1/2, 1
    assert m.ccdf(F(0)) == 1
    assert m.ccdf(F(1, 2)) == F(1, 2)
    assert m.ccdf(F(3, 4)) == F(1, 6)
    assert m.ccdf(F(2)) == 0


def test_empirical_measure_validates():
    with pytest.raises(ValueError):
        EmpiricalMeasure(((F(0), F(1, 2)),))


# ---------------------------------------------------------------------------
# ccdf / quantiles
# ---------------------------------------------------------------------------

def test_ccdf_simplex_quadratic():
    assert ccdf_continuous(SIMPLEX, V_SIMPLEX, F(1, 2)) == F(1, 4)
    assert ccdf_continuous(SIMPLEX, V_SIMPLEX, 0) == 1
    for t in [F(1, 3), F(2, 3), F(9, 10)]:
        assert ccdf_continuous(SIMPLEX, V_SIMPLEX, t) == (1 - t) ** 2


def test_ccdf_segment_linear():
    for t in [F(0), F(1, 4), F(1)]:
        assert ccdf_continuous(SEGMENT, V_SEGMENT, t) == 1 - t


def test_ccdf_domain_check():
    with pytest.raises(ValueError):
        ccdf_continuous(SEGMENT, V_SEGMENT, 2)


def test_quantile_exact_cases():
    spec = quantile(SIMPLEX, V_SIMPLEX, F(1, 4))
    assert spec.exact and spec.quantile == F(1, 2)
    for tau in [F(1, 3), F(1, 2), F(1)]:
        spec = quantile(SEGMENT, V_SEGMENT, tau)
        assert spec.exact and spec.quantile == 1 - tau
    spec = quantile(SIMPLEX, V_SIMPLEX, 0)
    assert spec.quantile == 1 and spec.atom_at_top == 0


def test_quantile_irrational_root_bracketed():
    spec = quantile(SIMPLEX, V_SIMPLEX, F(1, 2), tol=F(1, 10**12))
    assert not spec.exact
    lo, hi = spec.bracket
    assert hi - lo <= F(1, 10**12)
    # true root is 1 - sqrt(1/2)
    assert (1 - lo) ** 2 >= F(1, 2) >= (1 - hi) ** 2


def test_quantile_consistency():
    for model, v in [(SIMPLEX, V_SIMPLEX), (SEGMENT, V_SEGMENT)]:
        for tau in [F(1, 4), F(1, 3), F(3, 4), F(1)]:
            spec = quantile(model, v, tau)
            if spec.exact:
                assert ccdf_continuous(model, v, spec.quantile) >= tau


def test_quantile_atom_at_flat_top():
    # G = min(x1 + 1/2, 1) on the square: the top level set {G = 1} has
    # volume 1/2, so tau below the atom must return the maximal order
    sq = ToricModel(hull([(0, 0), (1, 0), (0, 1), (1, 1)]))
    g = ConcavePL.make(
        [AffineFunctional.make((1, 0), F(1, 2)), AffineFunctional.make((0, 0), 1)],
        sq.ambient,
    )
    v = ValuationModel("flat", F(1), g)
    vo = S0_and_sigma(sq, v)
    assert (vo.S0, vo.sigma) == (1, F(1, 2))
    spec = quantile(sq, v, F(1, 4))
    assert spec.quantile == 1 and spec.atom_at_top == F(1, 2) and spec.exact
    assert S_tau(sq, v, F(1, 4)) == 1
    spec = quantile(sq, v, F(3, 4))
    assert spec.exact and spec.quantile == F(3, 4)
    assert ccdf_continuous(sq, v, F(3, 4)) == F(3, 4)


def test_quantum_quantile():
    assert quantum_quantile(SIMPLEX, V_SIMPLEX, 2, F(1, 2)) == F(1, 2)
    assert quantum_quantile(SIMPLEX, V_SIMPLEX, 2, 1) == 0  # j_{k,d_k}/k
    assert quantum_quantile(SIMPLEX, V_SIMPLEX, 2, F(1, 20)) == 1  # floor = 0 convention


def test_quantum_quantile_converges():
    tau = F(1, 4)
    target = quantile(SIMPLEX, V_SIMPLEX, tau).quantile
    errs = [abs(quantum_quantile(SIMPLEX, V_SIMPLEX, k, tau) - target) for k in (8, 16, 32)]
    assert errs[-1] <= errs[0]
    assert errs[-1] <= F(1, 10)


# ---------------------------------------------------------------------------
# tail expectations
# ---------------------------------------------------------------------------

def test_S_tau_segment_closed_form():
    for tau in [F(1, 4), F(1, 2), F(3, 4), F(1)]:
        assert S_tau(SEGMENT, V_SEGMENT, tau) == 1 - tau / 2
    assert S_tau(SEGMENT, V_SEGMENT, F(1, 2)) == F(3, 4)


def test_S_tau_simplex_values():
    assert S_tau(SIMPLEX, V_SIMPLEX, F(1, 4)) == F(2, 3)
    assert S_tau(SIMPLEX, V_SIMPLEX, 1) == F(1, 3)
    assert S_tau(SIMPLEX, V_SIMPLEX, 0) == 1


def test_S_tau_two_piece_transform_oracle():
    # G = min(2 x1, 1 - x1) on the unit simplex peaks at x1 = 1/3 (value 2/3).
    # F(t) = (1 - t/2)^2 - t^2, so Q(7/12) = 1/3 exactly, and the tail region
    # is {1/6 <= x1 <= 2/3}. Oracle by direct antiderivatives:
    #   vol  = int_{1/6}^{2/3} (1-t) dt                      = 7/24
    #   intG = int_{1/6}^{1/3} 2t(1-t) + int_{1/3}^{2/3} (1-t)^2 = 4/27
    g = ConcavePL.make(
        [AffineFunctional.make((2, 0), 0), AffineFunctional.make((-1, 0), 1)],
        SIMPLEX.ambient,
    )
    v = ValuationModel("ridge", F(1), g)
    vo = S0_and_sigma(SIMPLEX, v)
    assert (vo.S0, vo.sigma) == (F(2, 3), 0)
    for t in (F(0), F(1, 6), F(1, 3), F(1, 2)):
        assert ccdf_continuous(SIMPLEX, v, t) == (1 - t / 2) ** 2 - t ** 2
    spec = quantile(SIMPLEX, v, F(7, 12))
    assert spec.exact and spec.quantile == F(1, 3)
    assert S_tau(SIMPLEX, v, F(7, 12)) == F(4, 27) / F(7, 24)


def test_S_tau_monotone_in_tau():
    taus = [F(0), F(1, 4), F(1, 3), F(1, 2), F(3, 4), F(1)]
    vals = [S_tau(SIMPLEX, V_SIMPLEX, t, tol=F(1, 10**6)) for t in taus]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_S_tau_interval_certified():
    exact_like = S_tau(SIMPLEX, V_SIMPLEX, F(1, 2), tol=F(1, 10**8))
    # tail body [1 - 1/sqrt2, 1]: mean = 1 - (2 - sqrt2)/(3... check numerically
    import math as _m

    q = 1 - _m.sqrt(0.5)
    true = (2 * q + 1) / 3  # barycenter of triangle {(q,0),(1,0),(q,1-q)} x-coord
    assert abs(float(exact_like) - true) < 1e-6


def test_concavity_of_ccdf_root():
    # t -> F(t)^{1/n} |ambient|^{1/n} concave: n = 2 so squaring is exact
    grid = [F(j, 16) for j in range(17)]
    f = [ccdf_continuous(SIMPLEX, V_SIMPLEX, t) for t in grid]
    for i in range(1, 16):
        lhs = 4 * f[i]            # (2 sqrt(f_mid))^2
        rhs_lo = f[i - 1] + f[i + 1]
        # sqrt(a)+sqrt(b) <= 2 sqrt(m)  <=>  a + b + 2 sqrt(ab) <= 4m
        gap = lhs - rhs_lo
        assert gap >= 0 and gap * gap >= 4 * f[i - 1] * f[i + 1]


def test_volume_power_lower_bound():
    vo = S0_and_sigma(SIMPLEX, V_SIMPLEX)
    vol = F(1, 2)
    for t in [F(j, 10) for j in range(10)]:
        lhs = ccdf_continuous(SIMPLEX, V_SIMPLEX, t) * vol
        assert lhs >= (1 - t / vo.S0) ** 2 * vol


def test_max_mean_bound():
    # S0 <= (n+1) S_1 for the first-coordinate transform on a convex body
    for model, v, n in [(SIMPLEX, V_SIMPLEX, 2), (SEGMENT, V_SEGMENT, 1)]:
        assert S0_and_sigma(model, v).S0 <= (n + 1) * S_tau(model, v, 1)


# ---------------------------------------------------------------------------
# compatible families
# ---------------------------------------------------------------------------

def test_select_family_tie_break():
    fam = select_compatible_family(SIMPLEX, V_SIMPLEX, 2, 2)
    assert fam.points == ((1, 1), (2, 0))  # (1/2,1/2) beats (1/2,0) on lex


def test_select_family_endpoints():
    d = SIMPLEX.d_k(2)
    assert select_compatible_family(SIMPLEX, V_SIMPLEX, 2, d) == SIMPLEX.discrete_body(2)
    top = select_compatible_family(SIMPLEX, V_SIMPLEX, 2, 1)
    assert top.points == ((2, 0),)


def test_family_nesting():
    d = SIMPLEX.d_k(3)
    prev = set()
    for m in range(1, d + 1):
        cur = set(select_compatible_family(SIMPLEX, V_SIMPLEX, 3, m).points)
        assert prev <= cur
        prev = cur


def test_empirical_family_measure_mean():
    fm = empirical_family_measure(SEGMENT, V_SEGMENT, 1, 1)
    assert fm.atoms == (((F(1),), F(1)),)
    assert fm.mean() == (F(1),)


def test_family_mean_approaches_tail_barycenter():
    tau = F(1, 4)
    target = (F(2, 3), F(1, 6))
    devs = []
    for k in (20, 40):
        m = math.ceil(tau * SIMPLEX.d_k(k))
        mean = empirical_family_measure(SIMPLEX, V_SIMPLEX, k, m).mean()
        devs.append(sum((a - b) ** 2 for a, b in zip(mean, target)))
    assert devs[1] <= devs[0]
    assert devs[1] <= F(1, 400)  # within 0.05 euclidean


# ---------------------------------------------------------------------------
# restricted thresholds
# ---------------------------------------------------------------------------

def test_delta_km_anticanonical_p2():
    model = ToricModel(hull([(0, 0), (3, 0), (0, 3)]))
    fam = coordinate_family(model)
    for k in (1, 2, 5, 8):
        val, label = delta_km_restricted(model, fam, k, model.d_k(k))
        assert val == 1  # exact by the S_3 symmetry of the dilated simplex
        assert label == "D1"


def test_delta_km_simplex_full_m():
    fam = coordinate_family(SIMPLEX)
    val, _ = delta_km_restricted(SIMPLEX, fam, 2, 6)
    assert val == 3


def test_delta_km_single_valuation():
    val, label = delta_km_restricted(HYPERFLEX, [V_HYPER], 5, 2)
    assert val == F(1) / F(7, 10) and label == "p"


def test_delta_monotonicity():
    fam = coordinate_family(SIMPLEX)
    for k in (1, 2):
        d = SIMPLEX.d_k(k)
        vals = [delta_km_restricted(SIMPLEX, fam, k, m)[0] for m in range(1, d + 1)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
    for m in (1, 3):
        assert (delta_km_restricted(SIMPLEX, fam, 4, m)[0]
                <= delta_km_restricted(SIMPLEX, fam, 2, m)[0])


def test_alpha_k_values():
    fam = coordinate_family(SIMPLEX)
    for k in (1, 2, 6):
        assert alpha_k_restricted(SIMPLEX, fam, k)[0] == 1
    # S_{k,1} = j_{k,1}/k by definition: 5/2 on the generic genus-3 model
    val, _ = alpha_k_restricted(CANONICAL3, [V_CAN], 2)
    assert val == F(2, 5)


def test_alpha_k_infinite_sentinel():
    g0 = ConcavePL.make([AffineFunctional.make((0, 0), 0)], SIMPLEX.ambient)
    fam = [ValuationModel("zero", F(1), g0)]
    val, label = alpha_k_restricted(SIMPLEX, fam, 2)
    assert val == INFINITE and label == "zero"


def test_delta_tau_segment():
    fam = [ValuationModel.divisorial("p", SEGMENT.ambient)]
    assert delta_tau_restricted(SEGMENT, fam, 1)[0] == 2
    assert delta_tau_restricted(SEGMENT, fam, 0)[0] == 1
    assert delta_tau_restricted(SEGMENT, fam, F(1, 2))[0] == F(4, 3)


def test_restricted_requires_family():
    with pytest.raises(ValueError):
        delta_km_restricted(SIMPLEX, [], 2, 1)


# ---------------------------------------------------------------------------
# partial bodies / quantile gap stabilization
# ---------------------------------------------------------------------------

def test_quantile_gap_stabilization_curve():
    for kind in ("ordinary", "flex", "hyperflex"):
        model = plane_quartic_model(kind)
        v = ValuationModel.divisorial("p", model.ambient)
        n_top = max(CurveDivisorModel(3, model.gaps).gaps)
        for tau in [F(1, 2), F(1)]:
            threshold = math.ceil(n_top / tau)
            for k in range(threshold, threshold + 6):
                ideal, actual = partial_body_counts(model, v, tau, k)
                assert ideal - actual == 3  # = genus


def test_idealized_S_sandwich_against_partial_count():
    # min{1, M/m} Sbar_{k,M} <= Sbar_{k,m} <= max{1, M/m} Sbar_{k,M}
    tau = F(1, 2)
    for k in (4, 8, 16):
        M, _ = partial_body_counts(SEGMENT, V_SEGMENT, tau, k)
        for m in (1, k // 2, k):
            sm = Sbar_km(SEGMENT, V_SEGMENT, k, m)
            sM = Sbar_km(SEGMENT, V_SEGMENT, k, M)
            assert min(F(1), F(M, m)) * sM <= sm <= max(F(1), F(M, m)) * sM


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_valuation_json_roundtrip():
    data = valuation_to_json(V_SIMPLEX)
    assert data["label"] == "e1" and data["A"] == "1"
    again = valuation_from_json(data, SIMPLEX.ambient)
    assert again.A == 1
    assert jumping_numbers(SIMPLEX, again, 2).values == (2, 1, 1, 0, 0, 0)
