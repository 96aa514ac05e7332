"""``tl``: command-line access to the team-logic workbench.

Exit codes: 0 holds/success, 1 refuted (a witness is printed), 2 usage or
parse error, 3 resource guard exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import syntax as S
from .bisim import (amalgamate, bounded_bisim, format_bisim, max_bisim, parse_bisim,
                    team_amalgamate, team_bisimilar)
from .charform import char_formula, format_type, team_char_formula, type_of
from .errors import ParseError, ResourceGuardError, SemanticError, TeamLogicError
from .interp import (_entailment_check, check_interpolant, eliminate_quantifiers,
                     simplest_equivalent_modal, uniform_interpolant_modal)
from .kripke import TeamModel, eval_team_modal, format_model, parse_model
from .prop import (closure_report, eval_prop, format_property, format_team, models_of,
                   parse_property, parse_team, simplest_equivalent, uniform_interpolant_prop)

_GUARD_FLAGS = {
    "TL_MAX_PROPS": "--max-props",
    "TL_TYPE_CAP": "--type-cap",
    "TL_EXACT_TYPE_CAP": "--exact-type-cap",
    "TL_MAX_WORLDS": "--max-worlds-cap",
    "TL_MAX_SUCCESSORS": "--max-successors",
    "TL_MAX_GRID": "--max-grid",
}


class _Refuted(Exception):
    pass


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _formula(args, which="formula"):
    text = getattr(args, which, None)
    path = getattr(args, which + "_file", None)
    if text is None and path is None:
        raise SemanticError(f"give --{which.replace('_', '-')} or --{which.replace('_', '-')}-file")
    if text is not None and path is not None:
        raise SemanticError(f"--{which.replace('_', '-')} and its file form are exclusive")
    return S.parse(text if text is not None else _read(path))


def _props(values):
    out = []
    for v in values or ():
        out += [p for p in v.replace(",", " ").split() if p]
    return out


def _emit(args, human: str, data):
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=False))
    else:
        print(human)


def _model(path, team_arg=None):
    M, team = parse_model(_read(path))
    if team_arg is not None:
        team = frozenset(w for w in team_arg.replace(",", " ").split() if w)
    return M, team


def _equiv_note(theta, kept, k):
    """D-L2: only report a simplified form the checker has proved equivalent."""
    if S.is_modal_free(theta) and len(kept) <= 3:
        simple = simplest_equivalent(models_of(theta, kept))
    else:
        simple = simplest_equivalent_modal(theta, kept, k)
    return None if simple is None else S.render(simple)


# --------------------------------------------------------------------------
# subcommands

def cmd_eval(args):
    f = _formula(args)
    if args.team_file:
        prop = parse_property(_read(args.team_file))
        results = [(X, eval_prop(f, X)) for X in prop.teams]
        lines = [f"{'true' if ok else 'false'}\t{format_team(X)}" for X, ok in results]
        _emit(args, "\n".join(lines),
              [{"team": format_team(X), "holds": ok} for X, ok in results])
        if not all(ok for _, ok in results):
            raise _Refuted
        return
    if args.team is None:
        raise SemanticError("give --team or --team-file")
    X = parse_team(args.team, _props(args.props) or None)
    ok = eval_prop(f, X)
    _emit(args, "true" if ok else "false",
          {"formula": S.render(f), "team": format_team(X), "holds": ok})
    if not ok:
        raise _Refuted


def cmd_eval_modal(args):
    f = eliminate_quantifiers(_formula(args))
    M, team = _model(args.model, args.team)
    if team is None:
        raise SemanticError("the model file has no team; give --team")
    ok = eval_team_modal(f, TeamModel(M, team))
    _emit(args, "true" if ok else "false",
          {"formula": S.render(f), "team": sorted(team, key=M.index), "holds": ok})
    if not ok:
        raise _Refuted


def cmd_models(args):
    f = _formula(args)
    prop = models_of(f, _props(args.props) or None)
    _emit(args, format_property(prop).rstrip("\n"),
          {"props": list(prop.domain), "teams": [format_team(X) for X in prop.teams]})


def cmd_closure(args):
    f = _formula(args)
    rep = closure_report(f, _props(args.props) or None)
    d = rep.as_dict()
    lines = []
    for name, entry in d.items():
        line = f"{name}: {'yes' if entry['holds'] else 'no'}"
        if "witness" in entry:
            line += "  witness " + " ".join(entry["witness"])
        lines.append(line)
    _emit(args, "\n".join(lines), d)


def cmd_classify(args):
    f = _formula(args)
    frag = S.classify(f)
    note = S.uses_nesplit(f)
    human = frag.name + ("  (\\/+ attributed to the full logic)" if note else "")
    _emit(args, human, {"fragment": frag.name, "nesplit": note})


def cmd_subst(args):
    f = _formula(args)
    g = S.substitute_const(f, args.prop, S.TOP if args.value == "top" else S.BOT)
    _emit(args, S.render(g), {"result": S.render(g)})


def cmd_interp(args):
    f = _formula(args)
    keep = _props(args.keep)
    consequences = [S.parse(c) for c in args.consequence or ()]
    if S.is_modal_free(f) and not any(isinstance(n, S.Exists) for n in S.walk(f)):
        theta = uniform_interpolant_prop(f, keep)
        rep = check_interpolant(f, theta, keep, consequences, args.check_worlds)
    else:
        theta, rep = uniform_interpolant_modal(
            f, keep, args.mode, args.max_worlds,
            consequences=consequences or None, check_worlds=args.check_worlds)
    k = S.modal_depth(theta)
    note = _equiv_note(theta, tuple(sorted(keep)), k) if rep.mode == "exact" else None
    data = rep.to_dict()
    if note is not None:
        data["equivalent_to"] = note
    human = [S.render(theta)]
    if note is not None:
        human.append(f"equivalent to {note}")
    for c in rep.checks:
        if c["verdict"] == "fail" or args.verbose:
            extra = f"  witness {c['witness']}" if "witness" in c else ""
            human.append(f"{c['verdict']}: {c['clause']} [{c['bound']}]{extra}")
    tally = {v: sum(c["verdict"] == v for c in rep.checks) for v in ("pass", "fail", "skipped")}
    human.append("checks: " + ", ".join(f"{n} {v}" for v, n in tally.items()))
    _emit(args, "\n".join(human), data)
    if not rep.passed:
        raise _Refuted


def cmd_bisim(args):
    M, X = _model(args.model_a)
    N, Y = _model(args.model_b)
    P = _props(args.props)
    if args.k is None:
        pairs = max_bisim(M, N, P).pairs
    else:
        pairs = bounded_bisim(M, N, P, args.k).layers[-1]
    dump = format_bisim(pairs, P, M, N)
    data = {"props": sorted(P), "k": args.k,
            "pairs": [list(e) for e in sorted(pairs, key=lambda e: (M.index(e[0]), N.index(e[1])))]}
    holds = bool(pairs)
    human = dump.rstrip("\n")
    if X is not None and Y is not None:
        holds, wit = team_bisimilar(TeamModel(M, X), TeamModel(N, Y), P, args.k)
        data["teams_bisimilar"] = holds
        data["witness"] = wit
        human += f"\n# teams bisimilar: {'yes' if holds else 'no'}"
        if not holds:
            human += f" (no partner for {wit['blocking'][0]} world {wit['blocking'][1]})"
    _emit(args, human, data)
    if not holds:
        raise _Refuted


def cmd_charform(args):
    M, team = _model(args.model, args.team)
    P = _props(args.props) or sorted(M.props())
    if args.world is not None:
        t = type_of(M, args.world, P, args.k)
        f = char_formula(t)
        _emit(args, f"type: {format_type(t)}\nformula: {S.render(f)}",
              {"type": format_type(t), "formula": S.render(f)})
        return
    if team is None:
        raise SemanticError("give --world or a team")
    f = team_char_formula(TeamModel(M, team), P, args.k)
    types = sorted({type_of(M, w, P, args.k) for w in team})
    _emit(args, "\n".join([f"type: {format_type(t)}" for t in types] + [f"formula: {S.render(f)}"]),
          {"types": [format_type(t) for t in types], "formula": S.render(f)})


def cmd_amalgamate(args):
    M, X = _model(args.model_a)
    N, Y = _model(args.model_b)
    P, Q = _props(args.props_a), _props(args.props_b)
    if args.relation:
        pairs, _ = parse_bisim(_read(args.relation))
        K = amalgamate(M, N, pairs, P, Q)
        out = format_model(K)
    elif X is not None and Y is not None:
        TK = team_amalgamate(TeamModel(M, X), TeamModel(N, Y), P, Q)
        out = format_model(TK.model, TK.team)
    else:
        K = amalgamate(M, N, max_bisim(M, N, set(P) & set(Q)), P, Q)
        out = format_model(K)
    print(out)


def cmd_entails(args):
    f = _formula(args)
    g = _formula(args, "conclusion")
    f, g = eliminate_quantifiers(f), eliminate_quantifiers(g)
    entry = _entailment_check(f, g, args.max_worlds, "entailment")
    ok = entry["verdict"] == "pass"
    human = ("true" if ok else "false") + f"  [{entry['bound']}]"
    if "witness" in entry:
        human += f"\ncounterexample: {entry['witness']}"
    _emit(args, human, entry)
    if not ok:
        raise _Refuted


# --------------------------------------------------------------------------
# argument parsing

def _formula_args(p, required=True):
    p.add_argument("--formula", "-f", help="formula text")
    p.add_argument("--formula-file", help="file holding the formula")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON")
    for env, flag in _GUARD_FLAGS.items():
        common.add_argument(flag, type=int, metavar="N", help=f"override {env}")

    ap = argparse.ArgumentParser(prog="tl", description="Team-logic workbench.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="propositional team evaluation")
    _formula_args(p)
    p.add_argument("--team", help="team such as '{p=1 q=1; p=0 q=1}'")
    p.add_argument("--team-file", help="team property file: evaluate every team")
    p.add_argument("--props", nargs="*", help="team domain (default: the team's)")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("eval-modal", parents=[common], help="modal team evaluation")
    _formula_args(p)
    p.add_argument("--model", required=True, help="JSON model file")
    p.add_argument("--team", help="worlds of the team (overrides the file's)")
    p.set_defaults(run=cmd_eval_modal)

    p = sub.add_parser("models", parents=[common], help="all teams satisfying a formula")
    _formula_args(p)
    p.add_argument("--props", nargs="*")
    p.set_defaults(run=cmd_models)

    p = sub.add_parser("closure", parents=[common], help="closure properties with witnesses")
    _formula_args(p)
    p.add_argument("--props", nargs="*")
    p.set_defaults(run=cmd_closure)

    p = sub.add_parser("classify", parents=[common], help="least fragment")
    _formula_args(p)
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("subst", parents=[common], help="substitute top/bot for a proposition")
    _formula_args(p)
    p.add_argument("--prop", required=True)
    p.add_argument("--value", choices=("top", "bot"), required=True)
    p.set_defaults(run=cmd_subst)

    p = sub.add_parser("interp", parents=[common], help="uniform interpolant")
    _formula_args(p)
    p.add_argument("--keep", nargs="*", default=[], help="propositions to keep")
    p.add_argument("--mode", choices=("exact", "bounded"), default="exact")
    p.add_argument("--max-worlds", type=int, default=2, help="grid bound for bounded mode")
    p.add_argument("--check-worlds", type=int, default=3, help="bound for bounded checks")
    p.add_argument("--consequence", action="append", help="formula for the third clause")
    p.add_argument("--verbose", "-v", action="store_true", help="list passing checks too")
    p.set_defaults(run=cmd_interp)

    p = sub.add_parser("bisim", parents=[common], help="bounded or maximal bisimulation")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--props", nargs="*", default=[])
    p.add_argument("--k", type=int)
    p.set_defaults(run=cmd_bisim)

    p = sub.add_parser("charform", parents=[common], help="k-type and characteristic formula")
    p.add_argument("--model", required=True)
    p.add_argument("--world")
    p.add_argument("--team")
    p.add_argument("--props", nargs="*")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(run=cmd_charform)

    p = sub.add_parser("amalgamate", parents=[common], help="amalgamate two models")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--props-a", nargs="*", required=True)
    p.add_argument("--props-b", nargs="*", required=True)
    p.add_argument("--relation", help="bisimulation dump over the shared propositions")
    p.set_defaults(run=cmd_amalgamate)

    p = sub.add_parser("entails", parents=[common], help="entailment check")
    _formula_args(p)
    p.add_argument("--conclusion", "-g", help="conclusion formula")
    p.add_argument("--conclusion-file")
    p.add_argument("--max-worlds", type=int, default=3, help="bound for modal checks")
    p.set_defaults(run=cmd_entails)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    saved = {}
    for env, flag in _GUARD_FLAGS.items():
        value = getattr(args, flag.lstrip("-").replace("-", "_"), None)
        if value is not None:
            saved[env] = os.environ.get(env)
            os.environ[env] = str(value)
    try:
        return _run(args)
    finally:
        # overrides apply to this invocation only
        for env, old in saved.items():
            if old is None:
                os.environ.pop(env, None)
            else:
                os.environ[env] = old


def _run(args) -> int:
    try:
        args.run(args)
    except _Refuted:
        return 1
    except ResourceGuardError as exc:
        msg = f"{exc.what} = {exc.value} exceeds cap {exc.cap}"
        if exc.env_var:
            msg += f"; raise it with {_GUARD_FLAGS.get(exc.env_var, exc.env_var)} or {exc.env_var}"
        if exc.hint:
            msg += f" ({exc.hint}: --mode bounded)" if "bounded" in exc.hint else f" ({exc.hint})"
        print(f"tl: resource guard: {msg}", file=sys.stderr)
        return 3
    except (ParseError, SemanticError, TeamLogicError) as exc:
        print(f"tl: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tl: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
