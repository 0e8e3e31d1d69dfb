"""Command-line interface: ``oligodyn <command> <model.json> [options]``.

Exit codes: 0 success, 2 invalid input, 3 internal-consistency failure.
JSON output has sorted keys and writes rationals as ``"p/q"`` strings.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import darboux as dx
from . import dynamics as dyn
from . import integrals as ig
from .equilibria import admissibility_case, enumerate_critical_points, find_point
from .errors import (ConsistencyError, DegenerateError, DomainError, IntegrationError,
                     NotApplicableError, OligodynError, ValidationError)
from .levelset import export_levelset
from .model import EXACT, fmt_scalar, load_model, model_to_dict, reduce
from .stability import CLUSTER_TOL, analyze_point, lyapunov_duopoly, poincare_at

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


# ------------------------------------------------------------ serialization


def plain(x):
    """Convert report values into JSON-ready data."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return fmt_scalar(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, complex):
        return [float(x.real), float(x.imag)]
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [plain(v) for v in x]
    return str(x)


def dumps(report) -> str:
    return json.dumps(plain(report), sort_keys=True, indent=2)


def _text_value(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_text_value(x) for x in v) + "]"
    if v is None:
        return "-"
    return str(v)


def render_text(report, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for k in sorted(report):
        v = report[k]
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(render_text(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}:")
            for item in v:
                lines.append(render_text(item, indent + 1))
                lines.append(f"{pad}  --")
        else:
            lines.append(f"{pad}{k}: {_text_value(v)}")
    return "\n".join(lines)


def emit(report, args, out=None):
    out = out or sys.stdout
    data = plain(report)
    out.write(dumps(data) + "\n" if args.json else render_text(data) + "\n")


# ------------------------------------------------------------ report pieces


def reduced_report(r):
    return {"n": r.n, "f": list(r.f), "eps": list(r.eps), "alpha": list(r.alpha),
            "beta": [list(row) for row in r.beta], "det_beta": r.det_beta()}


def point_report(pt, n):
    return {"support": [i + 1 for i in pt.support], "bitmask": pt.bitmask, "e_label": pt.e_label(n),
            "label": pt.label, "q": None if pt.q is None else list(pt.q), "admissible": pt.admissible,
            "coincides_with": list(pt.coincides_with)}


def equilibria_report(r):
    pts = enumerate_critical_points(r)
    warnings = []
    for p in pts:
        if p.degenerate:
            warnings.append(f"degenerate-support: bitmask {p.bitmask}")
        for other in p.coincides_with:
            if other > p.bitmask:
                warnings.append(f"coincident-points: bitmask {p.bitmask} and {other}")
    return pts, [point_report(p, r.n) for p in pts], warnings


def stability_report(r, pt, n_max, cluster_tol):
    rep = analyze_point(r, pt, cluster_tol)
    out = {"point": point_report(pt, r.n), "jacobian": rep.jacobian, "charpoly": rep.charpoly,
           "eigenvalues": rep.eigenvalues, "discriminant": rep.discriminant,
           "routh_hurwitz_pass": rep.routh_hurwitz_pass,
           "routh_hurwitz_conditions": [{"condition": c, "value": v, "ok": ok} for c, v, ok in rep.routh_hurwitz_conditions],
           "classification": rep.classification}
    try:
        verdict, witness = poincare_at(r, pt, n_max)
        out["poincare"] = {"verdict": verdict, "witness": witness}
    except NotApplicableError as exc:
        out["poincare"] = {"verdict": "not-applicable", "reason": str(exc)}
    if len(pt.support) == 2:
        try:
            cert = lyapunov_duopoly(r, pt)
            out["lyapunov"] = {"K": cert.K, "p_trace": cert.p_trace, "q_det": cert.q_det,
                               "radius": cert.sampled_negativity_radius, "max_vdot": cert.max_sampled_vdot}
        except NotApplicableError as exc:
            out["lyapunov"] = {"status": "not-applicable", "reason": str(exc)}
    return out


def conditions_report(r):
    c = dx.linear_darboux_conditions(r)
    warnings = []
    if c.printed_differs:
        warnings.append("printed-D1-differs: the closed-form D1 and the determinant of the linear system disagree")
    return {
        "D1_printed": c.D1_printed, "D1_matrix": c.D1_matrix, "all_f_equal": c.all_f_equal,
        "w0_zero_branch": c.w0_zero_branch, "w0_one_branch": c.w0_one_branch,
        "generic_null_vector": c.generic_null_vector,
        "exceptional": [{"zero_index": i + 1, "holds": h, "F": None if F is None else str(F),
                         "P": None if P is None else str(P)} for i, h, F, P in c.exceptional],
        "any_holds": c.any_holds,
    }, warnings


def darboux_report(r, max_degree):
    polys = dx.search_darboux(r, max_degree)
    entries = [{"name": f"F{k}", "F": str(d.F), "P": str(d.P), "degree": d.degree,
                "constraints": list(d.constraints)} for k, d in enumerate(polys, start=1)]
    warnings = []
    extra = [f"F{k}" for k, d in enumerate(polys, start=1) if d.degree > 1]
    if extra:
        warnings.append("conjecture-counterexample: irreducible Darboux polynomials of degree > 1: " + ", ".join(extra))
    return polys, entries, warnings


def integral_entry(I):
    return {"name": I.name, "kind": I.kind, "P0": I.P0, "exponents": list(I.exponents),
            "numerator": str(I.numerator), "denominator": str(I.denominator),
            "formula": I.description}


def integrals_report(r, polys, seed):
    if r.det_beta() == 0:
        return ig.singular_beta_integral(r), "singular-beta"
    return ig.synthesize_integrals(r, polys, seed), "darboux"


def verification_report(r, integrals, polys, trials, seed, tol, t_end=20.0):
    out = {"seed": seed, "trials": trials, "t_end": t_end}
    static = [I for I in integrals if I.P0 == 0]
    conservation = []
    if static:
        Q0 = dyn.random_initial_states(r, trials, seed)
        for I in static:
            worst, skipped = 0.0, 0
            for q0 in Q0:
                try:
                    traj = dyn.integrate(r, q0, t_end, tol)
                    worst = max(worst, dyn.verify_conservation(traj, I).max_relative_drift)
                except (DomainError, IntegrationError):
                    skipped += 1
            checked = len(Q0) - skipped
            conservation.append({"integral": I.name, "max_relative_drift": worst, "skipped": skipped,
                                 "checked": checked, "passed": checked > 0 and worst <= dyn.DRIFT_TOL})
    out["conservation"] = conservation
    if len(set(r.f)) == 1 and len(set(r.alpha)) == 1 and r.det_beta() != 0 and any(not d.is_coordinate for d in polys):
        try:
            a = dyn.verify_attraction(r, polys, trials, 50.0 / float(r.f[0]), seed)
            out["attraction"] = {"passed": a.passed, "all_passed": a.all_passed, "P0": a.P0,
                                 "worst_decay": a.worst_decay, "max_line_distance": a.max_line_distance,
                                 "max_e8_distance": a.max_e8_distance, "t_end": a.t_end}
        except NotApplicableError as exc:
            out["attraction"] = {"status": "not-applicable", "reason": str(exc)}
    return out


# ------------------------------------------------------------ commands


def _load(args):
    return load_model(args.model)


def cmd_reduce(args):
    m = _load(args)
    emit({"model": model_to_dict(m), "reduced": reduced_report(reduce(m))}, args)


def cmd_equilibria(args):
    r = reduce(_load(args))
    _, pts, warnings = equilibria_report(r)
    if args.csv:
        n = r.n
        lines = ["bitmask,label,admissible," + ",".join(f"q_{i + 1}" for i in range(n))]
        for p in pts:
            q = p["q"] if p["q"] is not None else [""] * n
            lines.append(",".join([str(p["bitmask"]), p["label"], str(p["admissible"]).lower()]
                                  + [str(plain(x)) if x != "" else "" for x in q]))
        sys.stdout.write("\n".join(lines) + "\n")
        return
    emit({"equilibria": pts, "warnings": warnings}, args)


def cmd_stability(args):
    r = reduce(_load(args))
    pts = enumerate_critical_points(r)
    chosen = [find_point(pts, args.point, r.n)] if args.point else [p for p in pts if p.admissible and not p.degenerate]
    reps = []
    for p in chosen:
        if p.degenerate:
            raise ValidationError(f"point with bitmask {p.bitmask} is degenerate")
        reps.append(stability_report(r, p, args.nmax, args.cluster_tol))
    emit({"stability": reps}, args)


def cmd_darboux(args):
    r = _exact(reduce(_load(args)))
    polys, entries, warnings = darboux_report(r, args.max_degree)
    report = {"darboux": entries, "warnings": warnings}
    if r.n == 3:
        report["linear_conditions"], w = conditions_report(r)
        warnings.extend(w)
    ints, source = integrals_report(r, polys, args.seed)
    report["integrals"] = {"source": source, "items": [integral_entry(I) for I in ints]}
    emit(report, args)


def cmd_integrals(args):
    r = _exact(reduce(_load(args)))
    polys = dx.search_darboux(r, args.max_degree) if r.det_beta() != 0 else []
    ints, source = integrals_report(r, polys, args.seed)
    report = {"source": source, "integrals": [integral_entry(I) for I in ints]}
    if r.det_beta() != 0 and len(set(r.f)) == 1 and len(set(r.alpha)) == 1:
        fam = ig.n_firm_family(r, args.seed)
        report["family"] = {
            "pairs": [{"i": i + 1, "j": j + 1, "F": str(d.F), "P": str(d.P), "P0": I.P0}
                      for (i, j), d, I in fam.pairs],
            "P0": fam.P0, "P0_shared": fam.P0_shared, "P0_closed_form": fam.P0_closed,
            "P0_printed": fam.P0_printed, "P0_printed_matches": fam.P0_printed_matches,
            "relation_residual": fam.relation_residual, "relation_holds": fam.relation_holds,
        }
    emit(report, args)


def cmd_simulate(args):
    r = reduce(_load(args)).to_float()
    try:
        q0 = [float(x) for x in args.init.split(",")]
    except ValueError:
        raise ValidationError("--init must be a comma-separated list of numbers") from None
    traj = dyn.integrate(r, q0, args.t_end, args.tol, samples=args.samples)
    text = traj.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        emit({"samples": len(traj.times), "final": traj.final.tolist(), "out": args.out}, args)
    else:
        sys.stdout.write(text)


def cmd_verify(args):
    r = _exact(reduce(_load(args)))
    polys = dx.search_darboux(r, min(args.max_degree, 2)) if r.det_beta() != 0 else []
    ints, _ = integrals_report(r, polys, args.seed)
    emit({"verification": verification_report(r, ints, polys, args.trials, args.seed, args.tol)}, args)


def cmd_levelset(args):
    r = _exact(reduce(_load(args)))
    I = dyn.leaf_integral(r)
    mesh = export_levelset(r, I, args.value, args.grid)
    text = mesh.to_json() + "\n" if args.format == "json" else mesh.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        emit({"vertices": len(mesh.vertices), "faces": len(mesh.faces), "integral": I.description,
              "out": args.out}, args)
    else:
        sys.stdout.write(text)


def cmd_analyze(args):
    m = _load(args)
    r = reduce(m)
    warnings = []
    if not m.economically_viable:
        warnings.append("non-viable: parameters violate c, d > 0, e >= 0 or a - d > 0")
    pts, pt_entries, w = equilibria_report(r)
    warnings.extend(w)
    report = {"model": model_to_dict(m), "reduced": reduced_report(r), "equilibria": pt_entries}
    report["stability"] = [stability_report(r, p, args.nmax, args.cluster_tol)
                           for p in pts if p.admissible and not p.degenerate]
    if r.n == 3:
        try:
            report["admissibility_case"] = admissibility_case(r)
        except DegenerateError:
            report["admissibility_case"] = "degenerate"
            warnings.append("degenerate-interior: zero denominator for the interior point")
    polys = []
    if r.mode == EXACT:
        if r.n == 3:
            report["linear_conditions"], w = conditions_report(r)
            warnings.extend(w)
        if r.det_beta() != 0:
            try:
                polys, entries, w = darboux_report(r, args.max_degree)
                report["darboux"] = entries
                warnings.extend(w)
            except NotApplicableError as exc:
                report["darboux"] = []
                warnings.append(f"darboux-search-skipped: {exc}")
        ints, source = integrals_report(r, polys, args.seed)
        report["integrals"] = {"source": source, "items": [integral_entry(I) for I in ints]}
        if args.verify:
            report["verification"] = verification_report(r, ints, polys, args.trials, args.seed, args.tol)
    else:
        warnings.append("float-model: symbolic Darboux analysis needs exact parameters")
    report["warnings"] = warnings
    emit(report, args)


def _exact(r):
    if r.mode != EXACT:
        raise ValidationError("this command needs exact (\"p/q\" string) parameters")
    return r


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit JSON")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--max-degree", type=int, default=argparse.SUPPRESS, help="Darboux degree cap (default 3)")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="integrator tolerance (default 1e-9)")

    p = argparse.ArgumentParser(prog="oligodyn", parents=[common],
                                description="Analyze Cournot oligopoly adjustment dynamics.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("model", help="model JSON file")
        sp.set_defaults(func=func)
        return sp

    sp = add("analyze", cmd_analyze, "full analysis report")
    sp.add_argument("--verify", action="store_true", help="include numerical verification")
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--nmax", type=int, default=25)
    sp.add_argument("--cluster-tol", type=float, default=CLUSTER_TOL)

    sp = add("equilibria", cmd_equilibria, "critical points over all supports")
    sp.add_argument("--csv", action="store_true")

    sp = add("stability", cmd_stability, "linear stability at admissible points")
    sp.add_argument("--point", help="support bitmask or E-label (n = 3)")
    sp.add_argument("--nmax", type=int, default=25)
    sp.add_argument("--cluster-tol", type=float, default=CLUSTER_TOL)

    add("darboux", cmd_darboux, "exact Darboux polynomial search")
    add("integrals", cmd_integrals, "first integrals")
    add("reduce", cmd_reduce, "reduced parameters f, eps, beta")

    sp = add("simulate", cmd_simulate, "integrate one trajectory to CSV")
    sp.add_argument("--init", required=True, help="q1,q2,...")
    sp.add_argument("--t-end", type=float, default=20.0)
    sp.add_argument("--samples", type=int, default=201)
    sp.add_argument("--out")

    sp = add("verify", cmd_verify, "conservation and attraction checks")
    sp.add_argument("--trials", type=int, default=20)

    sp = add("levelset", cmd_levelset, "mesh of a level set of I1 (three firms)")
    sp.add_argument("--value", type=float, required=True)
    sp.add_argument("--grid", type=int, default=64)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out")
    return p


DEFAULTS = {"json": False, "seed": 0, "max_degree": 3, "tol": 1e-9}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for k, v in DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        args.func(args)
    except (ValidationError, DomainError, NotApplicableError, DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConsistencyError, IntegrationError, OligodynError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
