"""Command-line interface: ``evsys {validate,analyze,equilibrium,simulate,report}``.

Exit codes
----------
0  success (natural system, or nothing to report)
2  parse, physicality or usage error
3  system is not natural (bit 1)
4  atomicity unknown (bit 2); combined with 3 gives 7
5  integration failure (step underflow, step limit, no convergence)

Settings resolve as flag, then environment (``EVSYS_BUDGET_DEGREE``,
``EVSYS_BUDGET_NODES``, ``EVSYS_REL_TOL``, ``EVSYS_ABS_TOL``,
``EVSYS_T_END``), then built-in default.  JSON output carries
``schema_version`` and records each setting with its source.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from ._backend import BACKEND
from .analysis import (
    AtomicityError,
    AtomicityStatus,
    SearchBudget,
    atom_conservation_laws,
    check_atomicity,
    default_budget,
    wegscheider_check,
)
from .core import EventSystem, EventSystemError, format_rate, stoichiometric_matrix
from .equilibrium import (
    ClassError,
    ConvergenceError,
    NotNaturalError,
    base_strong_equilibrium,
    class_equilibrium,
    detailed_balance_residual,
    EquilibriumOptions,
)
from .linalg import left_kernel, right_kernel
from .parser import load_system
from .simulate import (
    IntegrationError,
    NegativityPolicy,
    SimOptions,
    TrajectoryStatus,
    integrate,
    run_monitors,
    simulate_to_equilibrium,
    write_trajectory_csv,
)

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_NATURAL = 3
EXIT_ATOMICITY_UNKNOWN = 4
EXIT_INTEGRATION = 5


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Setting:
    value: object
    source: str  # "flag", "env" or "default"

    def as_json(self):
        return {"value": _jsonable(self.value), "source": self.source}


def _resolve(flag, env_name: str, default, cast) -> Setting:
    if flag is not None:
        return Setting(flag, "flag")
    raw = os.environ.get(env_name)
    if raw not in (None, ""):
        try:
            return Setting(cast(raw), "env")
        except ValueError:
            raise UsageError(f"{env_name}={raw!r} is not a valid {cast.__name__}") from None
    return Setting(default, "default")


def _jsonable(v):
    if isinstance(v, Fraction):
        return format_rate(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _dump(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False)


def _fmt(v: float) -> str:
    return repr(float(v))


def _vector(text: str, n: int, what: str) -> np.ndarray:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{what}: expected {n} values, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what}: values must be finite")
    return np.array(vals)


# -- report pieces ------------------------------------------------------------


def _system_doc(E: EventSystem) -> dict:
    return {
        "n": E.dimension,
        "m": E.n_events,
        "species": list(E.species),
        "events": E.format(),
        "labels": list(E.labels),
    }


def _budget(args, E: EventSystem) -> tuple[SearchBudget, dict]:
    base = default_budget(E)
    deg = _resolve(getattr(args, "budget_degree", None), "EVSYS_BUDGET_DEGREE", base.max_total_degree, int)
    nodes = _resolve(getattr(args, "budget_nodes", None), "EVSYS_BUDGET_NODES", base.max_nodes, int)
    try:
        budget = SearchBudget(int(deg.value), int(nodes.value))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return budget, {"budget_degree": deg, "budget_nodes": nodes}


def _naturality_doc(E: EventSystem):
    v = wegscheider_check(E)
    return v, {
        "natural": v.natural,
        "certificates": [
            {"vector": list(c.vector), "exact_product": c.exact_product, "weight": c.weight}
            for c in v.certificates
        ],
    }


def _atomicity_doc(E: EventSystem, budget: SearchBudget):
    verdict = check_atomicity(E, budget)
    names = E.species
    doc = {
        "status": verdict.status.value,
        "atoms": [names[i] for i in sorted(verdict.atoms)],
        "b_set": [names[i] for i in sorted(verdict.b_set)],
        "witness": None if verdict.witness is None else [w.format(names) for w in verdict.witness],
        "violation": None,
        "nodes_used": verdict.nodes_used,
        "max_degree_used": verdict.max_degree_used,
        "note": verdict.note,
    }
    if verdict.violation is not None:
        vi = verdict.violation
        if vi.event is not None:
            doc["violation"] = {
                "kind": "equation",
                "event": vi.event,
                "lhs": vi.lhs.format(names),
                "rhs": vi.rhs.format(names),
            }
        else:
            doc["violation"] = {"kind": "no_witness", "species": names[vi.species]}
    laws = []
    if verdict.status is AtomicityStatus.ATOMIC:
        try:
            vecs = atom_conservation_laws(E, budget)
            laws = [{"atom": names[a], "vector": list(v)} for a, v in zip(sorted(verdict.atoms), vecs)]
        except AtomicityError as exc:
            doc["note"] = (doc["note"] + "; " if doc["note"] else "") + str(exc)
    return verdict, doc, laws


def _class_doc(E, c_star, p):
    try:
        r = class_equilibrium(E, c_star, p)
    except (ClassError, ConvergenceError, np.linalg.LinAlgError) as exc:
        return {"at": p, "error": str(exc)}
    return {
        "at": p,
        "c": r.c,
        "detailed_balance_residual": r.detailed_balance_residual,
        "class_residual": r.class_residual,
        "iterations": r.iterations,
        "gradient_norm": r.gradient_norm,
    }


def _equilibrium_doc(E, points, jobs: int) -> dict:
    opts = EquilibriumOptions()
    c_star = base_strong_equilibrium(E, opts)
    if jobs > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            classes = list(pool.map(lambda p: _class_doc(E, c_star, p), points))
    else:
        classes = [_class_doc(E, c_star, p) for p in points]
    return {
        "base": c_star,
        "detailed_balance_residual": detailed_balance_residual(E, c_star),
        "classes": classes,
        "tolerances": {"grad_tol": opts.grad_tol, "max_iter": opts.max_iter, "polish_tol": opts.polish_tol},
    }


# -- human-readable printing ----------------------------------------------------


def _print_matrix(title: str, rows, out) -> None:
    print(f"{title}:", file=out)
    if not len(rows):
        print("  (none)", file=out)
    for r in rows:
        print("  [" + " ".join(f"{int(v):>3d}" for v in r) + " ]", file=out)


def _print_naturality(doc, out) -> None:
    print(f"natural: {'yes' if doc['natural'] else 'no'}", file=out)
    for c in doc["certificates"]:
        flag = "ok" if c["exact_product"] == 1 else "ENERGY CYCLE"
        print(
            f"  cycle {list(c['vector'])}: product={format_rate(c['exact_product'])} "
            f"weight={c['weight']:.12f} {flag}",
            file=out,
        )


def _print_atomicity(doc, laws, out) -> None:
    print(f"atomicity: {doc['status']}", file=out)
    print(f"  atoms: {{{', '.join(doc['atoms'])}}}", file=out)
    print(f"  B set: {{{', '.join(doc['b_set'])}}}", file=out)
    if doc["witness"] is not None:
        print(f"  witness: ({', '.join(doc['witness'])})", file=out)
    v = doc["violation"]
    if v is not None:
        if v["kind"] == "equation":
            print(f"  violation at event {v['event'] + 1}: {v['lhs']} != {v['rhs']}", file=out)
        else:
            print(f"  violation: no B-set monomial reachable from {v['species']}", file=out)
    if doc["note"]:
        print(f"  note: {doc['note']}", file=out)
    for law in laws:
        print(f"  atom law {law['atom']}: {law['vector']}", file=out)


def _print_equilibrium(E, doc, out) -> None:
    print("base equilibrium: " + " ".join(f"{s}={_fmt(v)}" for s, v in zip(E.species, doc["base"])), file=out)
    print(f"  detailed-balance residual: {doc['detailed_balance_residual']:.3e}", file=out)
    for cl in doc["classes"]:
        at = ",".join(_fmt(v) for v in cl["at"])
        if "error" in cl:
            print(f"class of ({at}): error: {cl['error']}", file=out)
            continue
        print(f"class of ({at}): " + " ".join(f"{s}={_fmt(v)}" for s, v in zip(E.species, cl["c"])), file=out)
        print(
            f"  residuals: detailed-balance {cl['detailed_balance_residual']:.3e}, "
            f"class {cl['class_residual']:.3e}; newton iterations {cl['iterations']}",
            file=out,
        )


# -- commands ---------------------------------------------------------------------


def cmd_validate(args, out) -> int:
    E = load_system(args.file)
    for line in E.format():
        print(line, file=out)
    return EXIT_OK


def _analysis(args, E):
    budget, settings = _budget(args, E)
    G = stoichiometric_matrix(E)
    nat, nat_doc = _naturality_doc(E)
    atom, atom_doc, laws = _atomicity_doc(E, budget)
    code = 0
    if not nat.natural:
        code |= EXIT_NOT_NATURAL
    if atom.status is AtomicityStatus.UNKNOWN:
        code |= EXIT_ATOMICITY_UNKNOWN
    doc = {
        "schema_version": SCHEMA_VERSION,
        "system": _system_doc(E),
        "stoichiometric_matrix": G,
        "right_kernel": [list(v) for v in right_kernel(G)],
        "left_kernel": [list(v) for v in left_kernel(G)],
        "naturality": nat_doc,
        "atomicity": atom_doc,
        "atom_conservation_laws": laws,
        "config": {k: s.as_json() for k, s in settings.items()},
    }
    return doc, code, nat


def _print_analysis(E, doc, out) -> None:
    s = doc["system"]
    print(f"species ({s['n']}): {' '.join(s['species'])}", file=out)
    print(f"events ({s['m']}):", file=out)
    for i, e in enumerate(s["events"], 1):
        print(f"  e{i}: {e}", file=out)
    _print_matrix("stoichiometric matrix", doc["stoichiometric_matrix"], out)
    _print_matrix("conservation laws (right kernel)", doc["right_kernel"], out)
    _print_matrix("cycle space (left kernel)", doc["left_kernel"], out)
    _print_naturality(doc["naturality"], out)
    _print_atomicity(doc["atomicity"], doc["atom_conservation_laws"], out)


def cmd_analyze(args, out) -> int:
    E = load_system(args.file)
    doc, code, _ = _analysis(args, E)
    if args.json:
        print(_dump(doc), file=out)
    else:
        _print_analysis(E, doc, out)
    return code


def _points(args, E):
    return [_vector(a, E.dimension, "--at") for a in (args.at or [])]


def cmd_equilibrium(args, out) -> int:
    E = load_system(args.file)
    points = _points(args, E)
    nat, nat_doc = _naturality_doc(E)
    if not nat.natural:
        if args.json:
            print(_dump({"schema_version": SCHEMA_VERSION, "naturality": nat_doc}), file=out)
        else:
            print("system is not natural; no positive strong equilibrium exists", file=out)
            _print_naturality(nat_doc, out)
        return EXIT_NOT_NATURAL
    doc = _equilibrium_doc(E, points, args.jobs)
    if args.json:
        print(_dump({"schema_version": SCHEMA_VERSION, "system": _system_doc(E), "equilibrium": doc}), file=out)
    else:
        _print_equilibrium(E, doc, out)
    return EXIT_OK


def cmd_report(args, out) -> int:
    E = load_system(args.file)
    points = _points(args, E)
    doc, code, nat = _analysis(args, E)
    doc["equilibrium"] = _equilibrium_doc(E, points, args.jobs) if nat.natural else None
    if args.json:
        print(_dump(doc), file=out)
    else:
        _print_analysis(E, doc, out)
        if doc["equilibrium"] is not None:
            _print_equilibrium(E, doc["equilibrium"], out)
    return code


def cmd_simulate(args, out) -> int:
    E = load_system(args.file)
    x0 = _vector(args.x0, E.dimension, "--x0")
    if np.any(x0 < 0):
        raise UsageError("--x0: concentrations must be non-negative")
    rel = _resolve(args.rel_tol, "EVSYS_REL_TOL", SimOptions.rel_tol, float)
    abs_ = _resolve(args.abs_tol, "EVSYS_ABS_TOL", SimOptions.abs_tol, float)
    t_end = _resolve(args.t_end, "EVSYS_T_END", 1e4 if args.to_equilibrium else SimOptions.t_end, float)
    try:
        opts = SimOptions(
            rel_tol=rel.value,
            abs_tol=abs_.value,
            t_end=t_end.value,
            max_steps=args.max_steps,
            negativity_policy=NegativityPolicy(args.negativity),
            method=args.method,
            n_samples=args.samples,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    code = EXIT_OK
    doc = {
        "schema_version": SCHEMA_VERSION,
        "system": _system_doc(E),
        "config": {"rel_tol": rel.as_json(), "abs_tol": abs_.as_json(), "t_end": t_end.as_json()},
    }
    try:
        if args.to_equilibrium:
            run = simulate_to_equilibrium(E, x0, opts)
            traj = run.trajectory
            doc["equilibrium_run"] = {
                "converged": run.converged,
                "state": run.state,
                "time": traj.final_time,
                "atomic": run.atomic,
                "crosscheck": None
                if run.crosscheck is None
                else {
                    "class_state": run.crosscheck.class_state,
                    "max_relative_difference": run.crosscheck.max_relative_difference,
                    "agrees": run.crosscheck.agrees,
                },
            }
            if not run.converged:
                code = EXIT_INTEGRATION
        else:
            traj = integrate(E, x0, opts)
            if traj.status is TrajectoryStatus.MAX_STEPS:
                code = EXIT_INTEGRATION
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        print("last state: " + ",".join(_fmt(v) for v in exc.state), file=sys.stderr)
        return EXIT_INTEGRATION

    if args.out:
        write_trajectory_csv(traj, args.out)
    report = run_monitors(E, None, traj)
    s = traj.step_stats
    doc["trajectory"] = {
        "status": traj.status.value,
        "final_time": traj.final_time,
        "final_state": traj.final_state,
        "samples": len(traj.times),
        "accepted_steps": s.accepted,
        "rejected_steps": s.rejected,
        "switched_to_implicit_at": traj.switched_at,
    }
    doc["monitors"] = {
        "min_component": report.min_component,
        "max_component": report.max_component,
        "max_conservation_drift": list(report.max_drift),
        "max_step_drift": report.max_step_drift,
        "max_lyapunov_increase": report.max_lyapunov_increase,
        "clamped": report.clamped,
        "natural": report.natural,
        "notes": list(report.notes),
    }
    if args.json:
        print(_dump(doc), file=out)
    else:
        t = doc["trajectory"]
        print(f"status: {t['status']} at t={_fmt(t['final_time'])} "
              f"({t['accepted_steps']} steps, {t['rejected_steps']} rejected)", file=out)
        if traj.switched_at is not None:
            print(f"  switched to implicit midpoint at t={_fmt(traj.switched_at)}", file=out)
        print("final: " + " ".join(f"{n}={_fmt(v)}" for n, v in zip(E.species, traj.final_state)), file=out)
        m = doc["monitors"]
        print(f"min component: {m['min_component']!r}", file=out)
        print(f"max conservation drift: {max(m['max_conservation_drift'], default=0.0)!r}", file=out)
        if m["max_lyapunov_increase"] is not None:
            print(f"max Lyapunov increase: {m['max_lyapunov_increase']!r}", file=out)
        for note in m["notes"]:
            print(f"note: {note}", file=out)
        if args.to_equilibrium:
            er = doc["equilibrium_run"]
            print(f"equilibrium reached: {'yes' if er['converged'] else 'no'}", file=out)
            cc = er["crosscheck"]
            if cc is not None:
                print(
                    "class equilibrium: " + " ".join(f"{n}={_fmt(v)}" for n, v in zip(E.species, cc["class_state"]))
                    + f" (max rel diff {cc['max_relative_difference']:.3e}, "
                    + ("agrees" if cc["agrees"] else "DISAGREES") + ")",
                    file=out,
                )
    return code


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="evsys", description="Analyse and simulate reversible mass-action systems.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and print the canonical event list")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    def budget_flags(p):
        p.add_argument("--budget-degree", type=int, default=None, help="max total degree explored by graph searches")
        p.add_argument("--budget-nodes", type=int, default=None, help="max monomials visited per search")

    p = sub.add_parser("analyze", help="conservation laws, naturality and atomicity")
    p.add_argument("file")
    budget_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    def eq_flags(p):
        p.add_argument("--at", action="append", metavar="P", help="comma-separated positive point; repeatable")
        p.add_argument("--jobs", type=int, default=1, help="threads for class solves")

    p = sub.add_parser("equilibrium", help="base and per-class strong equilibria")
    p.add_argument("file")
    eq_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("simulate", help="integrate the mass-action ODE")
    p.add_argument("file")
    p.add_argument("--x0", required=True, help="comma-separated initial concentrations")
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--rel-tol", type=float, default=None)
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument("--max-steps", type=int, default=SimOptions.max_steps)
    p.add_argument("--samples", type=int, default=SimOptions.n_samples, help="size of the geometric output grid")
    p.add_argument("--method", choices=["auto", "dopri5", "implicit-midpoint"], default="auto")
    p.add_argument("--negativity", choices=[m.value for m in NegativityPolicy], default="reject")
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--to-equilibrium", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="full analysis plus equilibria")
    p.add_argument("file")
    budget_flags(p)
    eq_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args, out)
    except NotNaturalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_NATURAL
    except (EventSystemError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
