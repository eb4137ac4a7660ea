"""Command-line front end: ``dadj adjoint|noether|selfadjoint|apply|verify``.

Every command prints a structured JSON report (``--format json``, the
default) or a short human-readable summary (``--format text``).  Exit codes:
0 when everything requested was produced and verified, 2 when something was
produced but a verification failed or was inconclusive, 1 on errors.
"""

import argparse
import hashlib
import json
import os
import sys

from . import expr as E
from . import lattice as LC
from . import noether as N
from . import symmetry as S
from . import verify as VF
from .errors import DadjError, ParseError
from .parser import parse_problem, render

SCHEMA_VERSION = 1


class Report:
    def __init__(self, command, path, raw, seed):
        self.data = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "input": {"path": os.path.basename(path),
                      "sha256": hashlib.sha256(raw).hexdigest()},
            "seed": seed,
            "warnings": [],
            "results": {},
        }
        self.inconclusive = False

    def warn(self, message):
        self.data["warnings"].append(message)

    def finish(self, code=None):
        if code is None:
            code = 2 if self.inconclusive else 0
        self.data["status"] = {0: "ok", 1: "error", 2: "inconclusive"}[code]
        self.data["exit_code"] = code
        return code


def _expr_list(es):
    return [render(e) for e in es]


def _frac(q):
    return str(q)


def _system(problem, report):
    sys_ = LC.DifferenceSystem.from_problem(problem)
    report.data["system"] = {
        "lattice": list(sys_.lattice),
        "components": list(sys_.components),
        "parameters": list(sys_.parameters),
        "equations": _expr_list(sys_.equations),
    }
    return sys_


def _normalized(sys_, report):
    shifts = LC.normalizing_shifts(sys_)
    if any(any(J) for J in shifts):
        report.warn("forward normalization applied: equations shifted by "
                    + ", ".join(str(list(J)) for J in shifts))
    return LC.forward_normalize(sys_), shifts


def _operator_json(ops):
    if ops is None:
        return None
    return [[{"shift": list(J), "coefficient": render(b)} for J, b in op.terms.items()]
            for row in ops for op in row]


def _law_json(law):
    out = {
        "fluxes": _expr_list(law.fluxes),
        "system": "combined" if law.combined else "original",
        "certified": law.certified,
        "provenance": {k: (list(v) if isinstance(v, tuple) else v)
                       for k, v in law.provenance.items()},
    }
    if law.remainder is not None:
        out["remainder"] = _expr_list(law.remainder)
    return out


def _verify_json(rep):
    return {"passed": rep.passed, "max_residual": _frac(rep.max_residual),
            "points": rep.points, "orbits": rep.orbits,
            "failures": [{"seed": f["seed"], "residual": _frac(f["residual"])}
                         for f in rep.failures],
            "warnings": rep.warnings}


def _verify(law, problem, args, report, label):
    settings = problem.verify
    rep = VF.verify_law(law, steps=args.steps or settings.steps,
                        orbits=args.orbits or settings.orbits,
                        seed=args.seed if args.seed is not None else settings.seed,
                        params=settings.parameters or None,
                        low=settings.low, high=settings.high,
                        origin=None)
    if not rep.passed:
        report.inconclusive = True
        report.warn(f"{label}: numeric verification failed")
    return rep


# -- commands ----------------------------------------------------------------

def cmd_adjoint(args, problem, report):
    sys_ = _system(problem, report)
    norm, shifts = _normalized(sys_, report)
    adj = LC.adjoint_system(norm)
    res = {
        "forward_normalized": not any(any(J) for J in shifts),
        "normalizing_shifts": [list(J) for J in shifts],
        "normalized_equations": _expr_list(norm.equations),
        "adjoint": _expr_list(adj.equations),
        "lagrangian": render(LC.lagrangian(norm)),
    }
    if not res["forward_normalized"]:
        written = LC.adjoint_system(sys_, as_written=True)
        res["adjoint_as_written"] = _expr_list(written.equations)
        res["lagrangian_as_written"] = render(LC.lagrangian(sys_, as_written=True))
    report.data["results"] = res
    return report.finish()


def _symmetry_pipeline(sys_, Q, problem, args, report, verify=True):
    out = {"name": Q.name}
    verdict = S.check_symmetry(sys_, Q, seed=args.seed or 0)
    out["verdict"] = verdict.status
    out["route"] = verdict.route
    out["images"] = _expr_list(verdict.images)
    if not verdict.symmetric:
        out["counterexample"] = {
            "point": {render(E.atom(k)): _frac(v) for k, v in sorted(verdict.counterexample.items())},
            "residual": _frac(verdict.residual)}
        report.inconclusive = True
        report.warn(f"{Q.name}: rejected, not a symmetry")
        return out, None
    out["operator"] = _operator_json(verdict.operator)
    if verdict.operator is None:
        report.inconclusive = True
        report.warn(f"{Q.name}: no multiplier operator found")
        return out, None
    Y = S.extend_characteristic(sys_, Q, verdict.operator)
    out["extended"] = {k: render(v) for k, v in Y.adjoint.items()}
    out["remainder"] = _expr_list(Y.remainder)
    if sys_.is_forward_normalized():
        law = N.noether_flux(sys_, Y)
    else:
        law = N.direct_flux(sys_, Y)
    out["law"] = _law_json(law)
    if not law.certified:
        report.inconclusive = True
        report.warn(f"{Q.name}: flux is not conserved on solutions of the combined system")
    if verify:
        out["law"]["verification"] = _verify_json(_verify(law, problem, args, report, Q.name))
    return out, law


def _substitution(problem, name):
    if name not in problem.substitutions:
        raise DadjError(f"unknown substitution {name!r}")
    return problem.substitutions[name]


def cmd_noether(args, problem, report):
    sys_ = _system(problem, report)
    names = args.sym or list(problem.symmetries)
    results = []
    for name in names:
        if name not in problem.symmetries:
            raise DadjError(f"unknown symmetry {name!r}")
        entry, law = _symmetry_pipeline(sys_, problem.symmetries[name], problem, args, report)
        if law is not None and args.subst:
            try:
                t = N.transfer(law, _substitution(problem, args.subst), args.subst)
            except DadjError as exc:
                entry["transfer"] = {"error": str(exc)}
                report.inconclusive = True
            else:
                tj = _law_json(t)
                tj["trivial"] = N.is_trivial(t)
                tj["verification"] = _verify_json(_verify(t, problem, args, report,
                                                          f"{name}/{args.subst}"))
                matches = {}
                for lname, fl in problem.laws.items():
                    if len(fl) == t.p:
                        sign = N.equivalent(t, fl)
                        if sign:
                            matches[lname] = sign
                tj["equivalent_to"] = matches
                entry["transfer"] = tj
        results.append(entry)
    report.data["results"] = {"symmetries": results}
    return report.finish()


def _o2de_coefficients(sys_):
    if sys_.p != 1 or sys_.q != 1:
        return None
    F = sys_.equations[0]
    u = [E.dep_key(sys_.components[0], (j,)) for j in (2, 1, 0)]
    if F.dep_atoms() - set(u):
        return None
    coeffs = [E.diff(F, k) for k in u]
    if any(c.dep_atoms() for c in coeffs):
        return None
    return coeffs


def cmd_selfadjoint(args, problem, report):
    sys_ = _system(problem, report)
    norm, _ = _normalized(sys_, report)
    cands = [(name, b) for name, b in problem.substitutions.items()
             if all(E.key_of(k)[0] == E.DEP for k in b)]
    sa = N.classify_self_adjointness(norm, cands)
    res = {
        "classification": sa.classification,
        "witness": ({render(E.atom(k)): render(v) for k, v in sa.witness.items()}
                    if sa.witness else None),
        "witness_depends_on_u": sa.depends_on_u,
        "tried": [{"candidate": label, "holds": ok} for label, ok in sa.checked],
    }
    coeffs = _o2de_coefficients(norm)
    if coeffs is not None:
        res["o2de_condition"] = N.check_o2de_condition(*coeffs)
    report.data["results"] = res
    return report.finish()


def _resolve_law(problem, sys_, ref, args, report):
    """A law from the [laws] section, or SYM[/SUBST] produced inline."""
    if ref in problem.laws:
        fluxes = problem.laws[ref]
        combined = any(f.dep_atoms(E.V) for f in fluxes)
        law = N.ConservationLaw(fluxes, sys_, combined, None, {"name": ref, "source": "file"})
        law.certify()
        return law
    sym, _, subst = ref.partition("/")
    if sym not in problem.symmetries:
        raise DadjError(f"unknown law {ref!r}")
    entry, law = _symmetry_pipeline(sys_, problem.symmetries[sym], problem, args, report,
                                    verify=False)
    if law is None:
        raise DadjError(f"symmetry {sym!r} produced no law")
    if subst:
        law = N.transfer(law, _substitution(problem, subst), subst)
    return law


def cmd_apply(args, problem, report):
    sys_ = _system(problem, report)
    base = _resolve_law(problem, sys_, args.law, args, report)
    syms = []
    for name in args.sym:
        if name not in problem.symmetries:
            raise DadjError(f"unknown symmetry {name!r}")
        Q = problem.symmetries[name]
        verdict = S.check_symmetry(base.system, Q, seed=args.seed or 0)
        if not verdict.symmetric:
            report.inconclusive = True
            report.data["results"] = {"rejected": name, "verdict": verdict.status}
            return report.finish()
        syms.append(Q)
    emitted = [(args.law, base)]
    derived = []
    frontier = [(args.law, base)]
    for _ in range(args.repeat):
        fresh = []
        for parent, law in frontier:
            for Q in syms:
                new = N.apply_symmetry_to_law(Q, law)
                tag = f"{Q.name}({parent})"
                entry = _law_json(new)
                entry["label"] = tag
                entry["trivial"] = N.is_trivial(new)
                entry["equivalent_to"] = None
                for label, prev in emitted:
                    if N.equivalent(prev, new.fluxes):
                        entry["equivalent_to"] = label
                        break
                entry["verification"] = _verify_json(_verify(new, problem, args, report, tag))
                derived.append(entry)
                if entry["equivalent_to"] is None and not entry["trivial"]:
                    emitted.append((tag, new))
                    fresh.append((tag, new))
        frontier = fresh
    report.data["results"] = {"base": _law_json(base), "derived": derived}
    return report.finish()


def cmd_verify(args, problem, report):
    sys_ = _system(problem, report)
    law = _resolve_law(problem, sys_, args.law, args, report)
    rep = _verify(law, problem, args, report, args.law)
    res = _law_json(law)
    res["verification"] = _verify_json(rep)
    if law.p == 1 and rep.values:
        res["verification"]["first_values"] = [_frac(v) for v in rep.values[:3]]
    report.data["results"] = res
    return report.finish()


# -- entry point ---------------------------------------------------------------

def _verified(law):
    v = law.get("verification")
    if v is None:
        return ""
    return " [verified]" if v["passed"] else f" [FAILED, residual {v['max_residual']}]"


_STYLE = {"ok": "\033[32m", "inconclusive": "\033[33m", "error": "\033[31m"}


def _use_color(stream):
    """DADJ_COLOR=always|never|auto (default auto: color only on a terminal)."""
    mode = os.environ.get("DADJ_COLOR", "auto").lower()
    if mode in ("always", "1", "yes"):
        return True
    if mode in ("never", "0", "no"):
        return False
    return stream.isatty()


def _text(data, color=False):
    status = data["status"]
    if color:
        status = f"{_STYLE[status]}{status}\033[0m"
    lines = [f"dadj {data['command']}: {status} (exit {data['exit_code']})"]
    for eq in data.get("system", {}).get("equations", []):
        lines.append(f"  equation: {eq} = 0")
    for w in data["warnings"]:
        lines.append(f"  warning: {w}")
    if "error" in data:
        lines.append(f"  error: {data['error']}")
    res = data.get("results", {})
    for key in ("adjoint", "adjoint_as_written", "lagrangian", "classification", "witness"):
        if key in res and res[key] is not None:
            val = res[key]
            lines.append(f"  {key}: " + ("; ".join(val) if isinstance(val, list) else str(val)))
    for entry in res.get("symmetries", []):
        lines.append(f"  {entry['name']}: {entry['verdict']}")
        if "extended" in entry:
            lines.append("    Q* = " + ", ".join(entry["extended"].values()))
        if "law" in entry:
            lines.append("    P = (" + ", ".join(entry["law"]["fluxes"]) + ")"
                         + _verified(entry["law"]))
        if "transfer" in entry and "fluxes" in entry["transfer"]:
            t = entry["transfer"]
            lines.append("    transferred P = (" + ", ".join(t["fluxes"]) + ")"
                         + (" [trivial]" if t.get("trivial") else "") + _verified(t))
    for entry in res.get("derived", []):
        lines.append(f"  {entry['label']}: (" + ", ".join(entry["fluxes"]) + ")"
                     + (f" ~ {entry['equivalent_to']}" if entry["equivalent_to"] else "")
                     + _verified(entry))
    if "verification" in res:
        v = res["verification"]
        lines.append(f"  residual {v['max_residual']} over {v['points']} points, {v['orbits']} orbits")
    return "\n".join(lines)


def build_parser():
    ap = argparse.ArgumentParser(prog="dadj", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--steps", type=int, default=None)
    common.add_argument("--orbits", type=int, default=None)
    common.add_argument("--out", default=None, help="write the JSON report to this path")
    common.add_argument("--format", choices=("json", "text"), default="json")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("adjoint", parents=[common], help="adjoint system and Lagrangian")
    p = sub.add_parser("noether", parents=[common], help="conservation laws from symmetries")
    p.add_argument("--sym", action="extend", nargs="+", default=[])
    p.add_argument("--subst", default=None)
    sub.add_parser("selfadjoint", parents=[common], help="self-adjointness classification")
    p = sub.add_parser("apply", parents=[common], help="apply symmetries to a law")
    p.add_argument("--law", required=True)
    p.add_argument("--sym", action="extend", nargs="+", required=True)
    p.add_argument("--repeat", type=int, default=1)
    p = sub.add_parser("verify", parents=[common], help="numeric verification of a law")
    p.add_argument("--law", required=True)
    return ap


COMMANDS = {"adjoint": cmd_adjoint, "noether": cmd_noether, "selfadjoint": cmd_selfadjoint,
            "apply": cmd_apply, "verify": cmd_verify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.file, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        print(f"dadj: {exc}", file=sys.stderr)
        return 1
    report = Report(args.command, args.file, raw, args.seed if args.seed is not None else 0)
    try:
        problem = parse_problem(raw)
        code = COMMANDS[args.command](args, problem, report)
    except ParseError as exc:
        report.data["error"] = f"{os.path.basename(args.file)}: {exc}"
        code = report.finish(1)
    except DadjError as exc:
        report.data["error"] = str(exc)
        code = report.finish(1)
    doc = json.dumps(report.data, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(doc + "\n")
    if args.format == "json":
        print(doc)
    else:
        print(_text(report.data, _use_color(sys.stdout)))
    if code == 1:
        print(f"dadj: {report.data['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
