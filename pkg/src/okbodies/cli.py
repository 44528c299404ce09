"""Command-line front end.

Subcommands: ``body`` (polytope report), ``series`` (discrete bodies and gap
tables), ``thresholds`` (per-level invariant sweeps), ``verify`` (the bundled
verification suites). Rationals are p/q strings end to end; floats appear only
in rate-fit fields and are marked approximate.

Exit codes: 0 success, 1 domain error, 2 input error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from .geometry import (
    DegenerateBody,
    GeometryError,
    barycenter,
    body_from_json,
    chebyshev_ball,
    hull,
    rat,
    rat_str,
    volume,
)
from .lattice import count
from .series import (
    CanonicalCurveModel,
    ModelError,
    ToricModel,
    model_from_json,
    top_column_gap_model,
)
from .thresholds import (
    S_km,
    S_tau,
    Sbar_km,
    ValuationModel,
    delta_km_restricted,
    jumping_numbers,
    quantum_quantile,
    valuation_from_json,
)
from . import estimates

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2
EXIT_VERIFY = 3

SUITES = ("ehrhart", "lowerbound", "concave", "cones", "maxp1",
          "stwosided", "deltarate", "endpoints", "weierstrass", "all")


class InputError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _load_body(path: str):
    data = _load_json(path)
    try:
        return body_from_json(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def _load_model(path: str):
    data = _load_json(path)
    try:
        return model_from_json(data)
    except ModelError:
        raise  # domain-level rejection (e.g. non-semigroup gaps): exit 1
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def _load_family(path: str, ambient):
    data = _load_json(path)
    if isinstance(data, dict):
        data = [data]
    if not data:
        raise InputError("valuation family is empty")
    try:
        return [valuation_from_json(v, ambient) for v in data]
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def _dump_json(data, path: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _write_csv(path: str | None, header: list[str], rows: list[list[str]]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# body
# ---------------------------------------------------------------------------

def cmd_body(args) -> int:
    body = _load_body(args.infile)
    center, radius = chebyshev_ball(body)
    out = {
        "dim": body.dim,
        "vertices": len(body.vertices),
        "volume": rat_str(volume(body)),
        "barycenter": [rat_str(c) for c in barycenter(body)],
        "chebyshev_center": [rat_str(c) for c in center],
        "chebyshev_radius_lb": rat_str(radius),
    }
    if args.k is not None:
        out["k"] = args.k
        out["count"] = count(body, args.k)
    _dump_json(out, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

def cmd_series(args) -> int:
    model = _load_model(args.infile)
    k_max = args.k_max
    header = ["k", "d_k", "D_k", "diff", "delta_k_points", "gap_points"]
    rows = []
    for row in model.gap_table(k_max):
        body = model.discrete_body(row.k)
        gaps = model.gap_set(row.k)
        rows.append([
            str(row.k), str(row.d_k), str(row.D_k), str(row.diff),
            ";".join(",".join(str(c) for c in z) for z in body.points),
            ";".join(",".join(str(c) for c in z) for z in gaps.points),
        ])
    _write_csv(args.out, header, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def cmd_thresholds(args) -> int:
    model = _load_model(args.infile)
    family = _load_family(args.valuations, model.ambient)
    try:
        tol = rat(args.tol)
        if args.sweep:
            tau, m_rule, k_iter = estimates.sweep_from_json(_load_json(args.sweep))
        else:
            tau = rat(args.tau)
            m_rule = estimates.make_m_rule(args.m_rule, tau=tau)
            k_iter = range(args.k_min, args.k_max + 1)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc
    header = ["k", "m_k", "label", "j_head", "S_km", "Sbar_km",
              "quantum_quantile", "S_tau", "delta_km", "delta_argmin"]
    rows = []
    s_tau_by_label = {v.label: S_tau(model, v, tau, tol) for v in family}
    for k in k_iter:
        if not model.has_level(k):
            continue
        d = model.d_k(k)
        m = m_rule(d, k)
        delta, argmin = delta_km_restricted(model, family, k, m)
        delta_str = "inf" if delta == float("inf") else rat_str(delta)
        for v in sorted(family, key=lambda v: v.label):
            jv = jumping_numbers(model, v, k)
            head = "|".join(rat_str(x) for x in jv.values[:3])
            rows.append([
                str(k), str(m), v.label, head,
                rat_str(S_km(model, v, k, m)),
                rat_str(Sbar_km(model, v, k, min(m, model.D_k(k)))),
                rat_str(quantum_quantile(model, v, k, tau)),
                rat_str(s_tau_by_label[v.label]),
                delta_str, argmin or "",
            ])
    _write_csv(args.out, header, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _suite_reports(suite: str, k_max: int, seed: int, jobs: int):
    square = hull([(0, 0), (1, 0), (0, 1), (1, 1)])
    simplex = hull([(0, 0), (1, 0), (0, 1)])
    segment = ToricModel(hull([(0,), (1,)]))
    v_seg = ValuationModel.divisorial("p", segment.ambient)
    simplex_model = ToricModel(simplex)
    v_simp = ValuationModel.divisorial("e1", simplex)
    canonical = CanonicalCurveModel(3)
    v_can = ValuationModel.divisorial("p", canonical.ambient)

    if suite == "ehrhart":
        yield estimates.verify_uniform_ehrhart(
            square, Fraction(1, 10), range(1, min(k_max, 40) + 1),
            n_bodies=200, seed=seed, jobs=jobs)
    elif suite == "lowerbound":
        yield estimates.verify_lower_bound_constant(square, range(1, k_max + 1))
        yield estimates.verify_lower_bound_constant(simplex, range(1, k_max + 1))
        sampler = estimates.sub_body_sampler(square, Fraction(1, 10), seed)
        for i, body in enumerate(sampler(10)):
            rep = estimates.verify_lower_bound_constant(body, range(1, k_max + 1))
            rep.name = f"lower_bound_constant[seeded {i}]"
            yield rep
    elif suite == "concave":
        yield estimates.verify_concave_sum_bound(
            square, range(1, min(k_max, 30) + 1), n_pairs=50, seed=seed)
    elif suite == "cones":
        yield estimates.verify_cone_counts(
            simplex, 0, 1, (1, 0), range(2, min(k_max, 40) + 1),
            slice_b=Fraction(3, 4))
        yield estimates.verify_cone_counts(
            square, Fraction(1, 4), Fraction(3, 4), (Fraction(3, 4), 0),
            range(2, min(k_max, 40) + 1), slice_b=Fraction(3, 4))
    elif suite == "maxp1":
        yield estimates.verify_maxp1(canonical, v_can, range(1, k_max + 1), iota=0)
        top_gap = top_column_gap_model()
        v_top = ValuationModel.divisorial("e1", top_gap.ambient)
        yield estimates.verify_maxp1(top_gap, v_top, range(1, k_max + 1), iota=1)
    elif suite == "stwosided":
        for tau in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
            yield estimates.verify_S_two_sided(
                segment, v_seg, tau, estimates.make_m_rule("ceil_tau", tau),
                range(1, k_max + 1))
            yield estimates.verify_S_two_sided(
                simplex_model, v_simp, tau, estimates.make_m_rule("ceil_tau", tau),
                range(1, min(k_max, 40) + 1))
    elif suite == "deltarate":
        p2 = ToricModel(hull([(0, 0), (3, 0), (0, 3)]))
        fam = _coordinate_family(p2)
        yield estimates.verify_delta_rate(
            p2, fam, 1, estimates.make_m_rule("dk"), range(1, min(k_max, 40) + 1))
        yield estimates.verify_delta_rate(
            canonical, [v_can], 0, estimates.make_m_rule("one"), range(2, k_max + 1))
    elif suite == "endpoints":
        yield estimates.verify_endpoint_limits(segment, v_seg, range(2, k_max + 1))
        yield estimates.verify_endpoint_limits(
            simplex_model, v_simp, range(2, min(k_max, 40) + 1))
    elif suite == "weierstrass":
        yield estimates.verify_weierstrass(k_max=max(k_max, 10), genus_max=6)
    elif suite == "all":
        for name in SUITES[:-1]:
            yield from _suite_reports(name, k_max, seed, jobs)
    else:
        raise InputError(f"unknown suite {suite!r} (choose from {', '.join(SUITES)})")


def _coordinate_family(model):
    from .geometry import AffineFunctional, ConcavePL, first_coordinate_transform

    amb = model.ambient
    s = max(v[0] for v in amb.vertices)
    return [
        ValuationModel("D1", Fraction(1), first_coordinate_transform(amb)),
        ValuationModel("D2", Fraction(1),
                       ConcavePL.make([AffineFunctional.make((0, 1), 0)], amb)),
        ValuationModel("D3", Fraction(1),
                       ConcavePL.make([AffineFunctional.make((-1, -1), s)], amb)),
    ]


def cmd_verify(args) -> int:
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    failures = []
    index = []
    for i, report in enumerate(_suite_reports(args.suite, args.k_max, args.seed,
                                              args.jobs)):
        tag = f"{i:02d}_{report.name.replace(' ', '_').replace('[', '_').replace(']', '')}"
        index.append({"report": tag, "passed": report.passed})
        if out_dir:
            _dump_json(report.to_json(), str(out_dir / f"{tag}.json"))
            header, rows = report.csv_rows()
            if header:
                _write_csv(str(out_dir / f"{tag}.csv"), header, rows)
        if not report.passed:
            failures.append(report)
    summary = {
        "suite": args.suite,
        "k_max": args.k_max,
        "seed": args.seed,
        "reports": index,
        "passed": not failures,
    }
    if out_dir:
        _dump_json(summary, str(out_dir / "summary.json"))
    _dump_json(summary, None)
    if failures:
        for rep in failures:
            for a in rep.assertions:
                if not a.passed:
                    print(f"FAILED [{rep.name}] {a.name}: "
                          f"{json.dumps(estimates._jsonify(a.witness))}",
                          file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="okbodies",
        description="Exact computations on discrete Okounkov bodies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_body = sub.add_parser("body", help="volume/barycenter/inscribed-ball report")
    p_body.add_argument("--in", dest="infile", required=True, help="polytope JSON")
    p_body.add_argument("--k", type=int, default=None, help="also count Z^n/k points")
    p_body.add_argument("--out", default=None, help="write JSON here (default stdout)")
    p_body.set_defaults(func=cmd_body)

    p_series = sub.add_parser("series", help="discrete bodies, gap sets, gap table")
    p_series.add_argument("--in", dest="infile", required=True, help="model JSON")
    p_series.add_argument("--k-max", dest="k_max", type=int, default=10)
    p_series.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_series.set_defaults(func=cmd_series)

    p_thr = sub.add_parser("thresholds", help="per-level threshold sweep")
    p_thr.add_argument("--in", dest="infile", required=True, help="model JSON")
    p_thr.add_argument("--valuations", required=True, help="valuation family JSON")
    p_thr.add_argument("--tau", default="1", help="volume quantile p/q")
    p_thr.add_argument("--m-rule", dest="m_rule", default="ceil_tau",
                       choices=["one", "ceil_tau", "dk", "dk_minus_sqrt"])
    p_thr.add_argument("--k-min", dest="k_min", type=int, default=1)
    p_thr.add_argument("--k-max", dest="k_max", type=int, default=20)
    p_thr.add_argument("--tol", default="1/1000000000")
    p_thr.add_argument("--sweep", default=None,
                       help="sweep spec JSON (overrides --tau/--m-rule/--k-min/--k-max)")
    p_thr.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_thr.set_defaults(func=cmd_thresholds)

    p_ver = sub.add_parser("verify", help="run a bundled verification suite")
    p_ver.add_argument("suite", choices=SUITES)
    p_ver.add_argument("--k-max", dest="k_max", type=int, default=40)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--jobs", type=int, default=1)
    p_ver.add_argument("--out", default=None, help="report directory")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (GeometryError, DegenerateBody) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
