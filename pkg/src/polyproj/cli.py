"""``polyproj`` command-line front end.

Every command writes one JSON report ``{tool_version, command, config,
results, verdicts}``.  Exit codes: 0 success, 2 input error, 3 infeasible,
4 numeric failure, 5 certification negative.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys

import numpy as np

from . import __version__
from . import report as rep
from .builtins import CLOSED_FORMS, NAMES, builtin, builtin_doc
from .cq import cq_report
from .errors import AnchorInsideSet, Infeasible, InputError, NumericError, PolyprojError
from .projection import active_set, project
from .representations import enumerate_kbar, stable_representation_check
from .sampling import DEFAULT_R0, DEFAULT_SEED, DEFAULT_SHELLS, geometric_radii
from .scenario import Scenario, instantiate, load_scenario, scenario_to_dict
from .stability import discontinuity_probe, fit_estimate, gph_liminf_check, gr_transplant_check, lipschitz_like_C

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NUMERIC, EXIT_NEGATIVE = 0, 2, 3, 4, 5
COMMANDS = ("project", "cq", "certify", "examples", "report")


def parse_vector(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse vector {text!r}") from None
    if not vals or not np.all(np.isfinite(vals)):
        raise InputError(f"vector {text!r} must hold finite numbers")
    return np.array(vals)


def resolve_scenario(ref: str) -> Scenario:
    if ref.lower() in NAMES:
        return builtin(ref)
    if os.path.exists(ref):
        return load_scenario(ref)
    raise InputError(f"{ref!r} is neither a builtin ({', '.join(NAMES)}) nor a file")


def _point(args, s: Scenario):
    p = parse_vector(args.p) if args.p is not None else (np.array(s.anchor_p) if s.has_anchors else None)
    v = parse_vector(args.v) if args.v is not None else (np.array(s.anchor_v) if s.has_anchors else None)
    if p is None or v is None:
        raise InputError("no anchors in the scenario: pass --p and --v")
    if p.shape[0] != s.d or v.shape[0] != s.n:
        raise InputError(f"need --p of length {s.d} and --v of length {s.n}")
    return p, v


def _radii(args) -> list[float]:
    return geometric_radii(args.radius, args.shells)


def run_project(args, s: Scenario) -> dict:
    p, v = _point(args, s)
    poly = instantiate(s, p)
    res = project(poly, v, tol_feas=args.tol if args.tol is not None else 1e-9)
    if not res.optimal:
        raise Infeasible({"status": res.status, "certificate": res.certificate})
    slack = poly.rhs - poly.rows @ res.x
    comp = float(np.max(np.abs(res.lam[poly.q:] * slack[poly.q:]), initial=0.0))
    results = {
        "p": p, "v": v, "x": res.x, "lambda": res.lam, "working_set": res.active,
        "active_set": active_set(poly, res.x), "status": res.status, "iterations": res.iterations,
        "kkt_residual": res.kkt_residual(poly, v), "complementarity_residual": comp,
    }
    return {"results": results, "verdicts": {"status": res.status}}


def run_cq(args, s: Scenario) -> dict:
    p, v = _point(args, s)
    cq = cq_report(s, p, v, radius=args.radius, samples=args.samples or 32, seed=args.seed)
    mf = cq.mfcq
    results = {
        "p": p, "x_bar": cq.x_bar,
        "licq": cq.licq,
        "mfcq": None if mf is None else {"holds": mf.holds, "certificate_h": mf.certificate_h, "margin": mf.margin},
        "rcrcq": {
            "label": cq.rcrcq.label, "radius": cq.rcrcq.radius, "samples": cq.rcrcq.samples,
            "subsets": [
                {"J": r.J, "rank_at_anchor": r.rank_at_anchor, "min_rank_sampled": r.min_rank_sampled,
                 "max_rank_sampled": r.max_rank_sampled, "holds": r.holds, "witness_p": r.witness_p}
                for r in cq.rcrcq.subsets
            ],
        },
        "notes": cq.notes,
    }
    verdicts = {"licq": cq.licq, "mfcq": None if mf is None else mf.holds, "rcrcq": cq.overall_rcrcq}
    return {"results": results, "verdicts": verdicts}


def _shells(report) -> list[dict]:
    return [{"radius": f.radius, "fitted_l0": f.fitted_l0, "fne_violation": f.fne_violation} for f in report.shells]


def run_certify(args, s: Scenario) -> dict:
    p, v = _point(args, s)
    samples = args.samples or 32
    radii = _radii(args)
    x_bar = project(instantiate(s, p), v)
    if not x_bar.optimal:
        raise Infeasible("C(p) is empty at the anchor")
    x_bar = x_bar.x
    cq = cq_report(s, p, x_bar=x_bar, radius=args.radius, samples=samples, seed=args.seed)
    results: dict = {"p": p, "v": v, "x_bar": x_bar}
    reps, stable_k = [], None
    try:
        for choice in enumerate_kbar(s, p, v):
            st = stable_representation_check(s, p, v, choice.kbar, radii, samples, args.seed)
            reps.append({
                "kbar": choice.kbar, "lambda_bar": choice.lambda_bar, "stable": st.stable,
                "per_L": [{"L": L, "holds": r.holds, "shell_max_dist": r.shell_max_dist} for L, r in st.per_L],
            })
            if st.stable and stable_k is None:
                stable_k = choice.kbar
        rep_note = None
    except AnchorInsideSet as err:
        rep_note = str(err)
    results["representations"] = reps
    fit1 = fit_estimate(s, p, v, 1.0, args.radius, 0.0, 2 * samples, args.seed, args.shells)
    fit_h = fit_estimate(s, p, v, 0.5, args.radius, 0.0, 2 * samples, args.seed, args.shells)
    results["fit_lipschitz"] = {"fitted_l0": fit1.fitted_l0, "kappa0": fit1.kappa0, "verdict": fit1.verdict,
                                "fne_violation": fit1.fne_violation, "shells": _shells(fit1)}
    results["fit_holder"] = {"fitted_l0": fit_h.fitted_l0, "kappa0": fit_h.kappa0, "verdict": fit_h.verdict,
                             "shells": _shells(fit_h)}
    ll = lipschitz_like_C(s, p, x_bar, args.radius, 0.1, 2 * samples, args.seed)
    results["lipschitz_like_C"] = {"l_est": ll.l_est}
    disc = discontinuity_probe(s, p, v, args.radius, 2 * samples, args.seed, args.shells)
    results["discontinuity"] = {"max_jump": disc.max_jump, "shell_jumps": disc.shell_jumps,
                                "discontinuous": disc.discontinuous}
    if rep_note is None:
        gl = gph_liminf_check(s, p, v, radii, samples, args.seed)
        results["gph_liminf"] = {"holds": gl.holds, "shell_max_dist": gl.shell_max_dist}
    results["rcrcq"] = cq.overall_rcrcq
    skip = None
    if rep_note is not None:
        skip = f"representation analysis not applicable: {rep_note}"
    elif not cq.overall_rcrcq:
        skip = "RCRCQ fails on a sampled subset"
    elif stable_k is None:
        skip = "no stable base representation"
    gr_verdict = "skipped"
    if skip is None:
        gr = gr_transplant_check(s, p, v, stable_k, args.radius, samples, args.seed,
                                 shells=min(args.shells, 4), stability_checked=True)
        gr_verdict = "pass" if gr.all_pass else "fail"
        results["gr_transplant"] = {"kbar": stable_k, "ell": gr.ell, "pass_rate": gr.pass_rate,
                                    "shell_ratios": gr.shell_ratios, "flags": gr.flags}
    else:
        results["gr_transplant"] = {"skipped": skip}
    hypotheses = skip is None
    empirical = fit1.verdict == "lipschitz-certified"
    certified = empirical and hypotheses and gr_verdict == "pass"
    verdicts = {
        "representation_stable": stable_k is not None, "stable_kbar": stable_k,
        "rcrcq": cq.overall_rcrcq, "lipschitz": fit1.verdict, "holder": fit_h.verdict,
        "gr_transplant": gr_verdict, "discontinuous": disc.discontinuous,
        "theorem_hypotheses": hypotheses,
        "paths_agree": (not hypotheses) or empirical == (gr_verdict == "pass"),
        "certified": certified,
    }
    if skip is not None:
        verdicts["skip_reason"] = skip
    return {"results": results, "verdicts": verdicts}


def run_examples(args, s=None) -> dict:
    items = []
    for name in NAMES:
        doc = builtin_doc(name)
        items.append({"name": name, "anchors": doc.get("anchors"), "closed_form": CLOSED_FORMS[name],
                      "scenario": scenario_to_dict(builtin(name))})
    return {"results": {"count": len(items), "examples": items}, "verdicts": {}}


def run_report(args, s: Scenario) -> dict:
    parts = {name: fn(args, s) for name, fn in (("project", run_project), ("cq", run_cq), ("certify", run_certify))}
    return {"results": {k: v["results"] for k, v in parts.items()},
            "verdicts": {k: v["verdicts"] for k, v in parts.items()}}


RUNNERS = {"project": run_project, "cq": run_cq, "certify": run_certify, "examples": run_examples,
           "report": run_report}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyproj", description="Projections onto parametric polyhedra.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--scenario", help="builtin name or scenario JSON file")
    ap.add_argument("--p", help="parameter, comma separated")
    ap.add_argument("--v", help="point to project, comma separated")
    ap.add_argument("--radius", type=float, default=DEFAULT_R0)
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--shells", type=int, default=DEFAULT_SHELLS)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--tol", type=float, default=None, help="feasibility tolerance for project")
    ap.add_argument("--out", help="write the report here instead of stdout")
    return ap


def _join_vectors(argv: list[str]) -> list[str]:
    """Glue ``--p -1,-1`` into ``--p=-1,-1`` so negative vectors are not read as options."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in ("--p", "--v") and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _config(args) -> dict:
    return {
        "scenario": args.scenario, "p": args.p, "v": args.v, "radius": args.radius,
        "samples": args.samples, "shells": args.shells, "seed": args.seed, "tol": args.tol,
        "threads": os.environ.get("POLYPROJ_THREADS", "1"),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def execute(argv: list[str] | None = None) -> tuple[int, str, str | None]:
    """Run one command; returns (exit code, report text, output path or None)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_vectors(argv))
    except SystemExit as exc:
        return (EXIT_INPUT if exc.code else EXIT_OK), "", None
    doc = {"tool_version": __version__, "command": args.command, "config": _config(args)}
    code = EXIT_OK
    try:
        if args.command != "examples" and not args.scenario:
            raise InputError("--scenario is required")
        s = resolve_scenario(args.scenario) if args.scenario else None
        if args.radius <= 0 or args.shells < 1 or (args.samples is not None and args.samples < 2):
            raise InputError("need radius > 0, shells >= 1, samples >= 2")
        body = RUNNERS[args.command](args, s)
        doc.update(body)
        verdicts = body["verdicts"]
        certified = verdicts.get("certified", verdicts.get("certify", {}).get("certified", True))
        if args.command in ("certify", "report") and not certified:
            code = EXIT_NEGATIVE
    except Infeasible as err:
        code = EXIT_INFEASIBLE
        detail = err.args[0] if err.args else str(err)
        doc.update({"results": {"status": "infeasible", "detail": detail}, "verdicts": {"status": "infeasible"}})
    except (InputError, ValueError, KeyError, OSError) as err:
        code = EXIT_INPUT
        doc.update({"results": {"error": type(err).__name__, "message": str(err)}, "verdicts": {}})
    except (NumericError, PolyprojError, ArithmeticError) as err:
        code = EXIT_NUMERIC
        doc.update({"results": {"error": type(err).__name__, "message": str(err)}, "verdicts": {}})
    text = rep.dumps(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code, text, args.out


def main(argv: list[str] | None = None) -> int:
    code, text, out = execute(argv)
    if text and not out:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
