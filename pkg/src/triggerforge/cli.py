"""``triggerforge`` command line.

Rewritten DSL text goes to stdout, prose as ``//`` comment lines; the JSON
report goes to stderr (or ``--report PATH``).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .core import expr as E
from .core.evaluate import Binding, EvalError, evaluate
from .dsl.lexer import DSLError
from .dsl.parser import parse
from .dsl.printer import print_declaration, print_formula
from .dsl.syntax import QuantifiedFormula
from .oracle import DEFAULT_CAP, run_oracle
from .qualifiers.checker import check_program
from .rewriter import MUTATIONS, rewrite_quantifier
from .smt import SMTError, emit_smt

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_REFUSED, EXIT_ORACLE = 0, 1, 2, 3
SCHEMA = 1
DEFAULTS = {"max_passes": 4, "seeds": 10, "cap": DEFAULT_CAP}


class UsageError(Exception):
    pass


def load_config(path: str | None) -> dict:
    """Defaults from ``triggerforge.toml``; a missing default file is fine."""
    explicit = path is not None
    path = path or "triggerforge.toml"
    if not os.path.exists(path):
        if explicit:
            raise UsageError(f"config file {path} not found")
        return {}
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"{path}: {exc}") from None
    out = {}
    sections = [data, data.get("rewrite", {}), data.get("oracle", {})]
    for key in DEFAULTS:
        for sec in sections:
            if key in sec:
                out[key] = int(sec[key])
    for sec in sections:
        if "bind" in sec:
            out["bind"] = {str(k): int(v) for k, v in sec["bind"].items()}
    return out


def _parse_binds(items) -> dict[str, int]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--bind expects NAME=INT, got {item!r}")
        try:
            out[name.strip()] = int(value)
        except ValueError:
            raise UsageError(f"--bind {name}: {value!r} is not an integer") from None
    return out


def _span(d):
    return d.span.to_json() if getattr(d, "span", None) is not None else None


def _pass_json(rec) -> dict:
    out = {"access": E.to_text(rec.site.access), "marked": rec.site.marked}
    if rec.site.pattern is not None:
        out["pattern"] = rec.site.pattern.to_json()
    if rec.report is not None:
        out["conditions"] = rec.report.to_json()
    if rec.result is not None:
        out["result"] = rec.result.to_json()
    if rec.code:
        out["code"], out["message"] = rec.code, rec.error
    return out


def _quantifier_json(i, q, outcome) -> dict:
    out = {
        "index": i,
        "span": _span(q),
        "source": print_formula(q),
        "status": outcome.status,
        "passes": [_pass_json(r) for r in outcome.passes],
    }
    if outcome.status == "rewritten":
        out["rewritten"] = print_formula(outcome.formula)
        out["simplifications"] = [s for r in outcome.results for s in r.simplifications]
    if outcome.code:
        out["code"], out["message"] = outcome.code, outcome.message
    return out


class Session:
    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        self.text: list[str] = []
        self.report: dict = {"schema": SCHEMA, "tool": "triggerforge", "version": __version__,
                             "command": command, "file": args.file}

    def say(self, line: str) -> None:
        if not self.args.json_only:
            self.text.append(f"// {line}")

    def finish(self, code: int) -> int:
        self.report["exit"] = code
        doc = json.dumps(self.report, indent=2)
        if self.args.report:
            with open(self.args.report, "w") as fh:
                fh.write(doc + "\n")
        else:
            sys.stderr.write(doc + "\n")
        if self.text:
            sys.stdout.write("\n".join(self.text) + "\n")
        return code


def _load(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    return parse(text)


def _rewrite_all(sf, args, cfg):
    max_passes = args.max_passes if args.max_passes is not None else cfg.get("max_passes", DEFAULTS["max_passes"])
    mutations = tuple(args.mutate or ())
    for m in mutations:
        if m not in MUTATIONS:
            raise UsageError(f"unknown mutation {m!r}; choose from {', '.join(MUTATIONS)}")
    return [rewrite_quantifier(q, sf.symbols, max_passes=max_passes, wrap=getattr(args, "wrap", None),
                               mutations=mutations)
            for q in sf.quantifiers]


def _summarise(session: Session, outcomes) -> int:
    refused = 0
    for i, o in enumerate(outcomes):
        if o.status == "refused":
            refused += 1
            session.say(f"quantifier {i}: refused [{o.code}] {o.message}")
        elif o.status == "pure":
            session.say(f"quantifier {i}: already trigger-friendly")
        else:
            session.say(f"quantifier {i}: rewritten in {len(o.passes)} pass(es)")
    session.report["summary"] = {"quantifiers": len(outcomes), "refused": refused,
                                 "rewritten": sum(o.status == "rewritten" for o in outcomes)}
    return EXIT_REFUSED if refused else EXIT_OK


def _output_text(sf, outcomes) -> list[str]:
    lines = []
    defined = set(sf.symbols.functions)
    it = iter(outcomes)
    for d in sf.declarations:
        if isinstance(d, QuantifiedFormula):
            o = next(it)
            for fd in o.definitions:
                if fd.name not in defined:
                    lines.append(print_declaration(fd))
                    defined.add(fd.name)
            lines.append(print_declaration(o.formula))
        else:
            lines.append(print_declaration(d))
    return lines


def cmd_rewrite(args, cfg) -> int:
    s = Session(args, "rewrite")
    sf = _load(args.file)
    outcomes = _rewrite_all(sf, args, cfg)
    s.report["quantifiers"] = [_quantifier_json(i, q, o) for i, (q, o) in enumerate(zip(sf.quantifiers, outcomes))]
    code = _summarise(s, outcomes)
    body = _output_text(sf, outcomes)
    s.text = s.text + body if not args.json_only else body
    return s.finish(code)


def cmd_check(args, cfg) -> int:
    s = Session(args, "check")
    sf = _load(args.file)
    args.wrap = None
    outcomes = _rewrite_all(sf, args, cfg)
    items = []
    for i, (q, o) in enumerate(zip(sf.quantifiers, outcomes)):
        j = _quantifier_json(i, q, o)
        j.pop("rewritten", None)
        j.pop("simplifications", None)
        for p in j["passes"]:
            p.pop("result", None)
        items.append(j)
        for p in o.passes:
            if p.report is not None:
                m = p.report.methods
                s.say(f"quantifier {i}: non-overlap methods {', '.join(m) if m else '-'}")
    s.report["quantifiers"] = items
    return s.finish(_summarise(s, outcomes))


def _binding_for(sf, binds: dict[str, int], used: set[str]) -> Binding:
    missing = sorted(used - set(binds))
    if missing:
        raise UsageError(f"parameters not bound: {', '.join(missing)} (use --bind NAME=INT)")
    b = Binding(dict(binds), functions={})
    for name, facts in sf.symbols.params.items():
        if name not in binds:
            continue
        for f in facts:
            if E.params_of(f) - set(binds):
                continue
            try:
                ok = evaluate(f, b)
            except EvalError as exc:
                raise UsageError(f"cannot check assumption on {name}: {exc}") from None
            if not ok:
                raise UsageError(f"binding violates assumption {E.to_text(f)}")
    return b


def cmd_oracle(args, cfg) -> int:
    s = Session(args, "oracle")
    sf = _load(args.file)
    outcomes = _rewrite_all(sf, args, cfg)
    binds = dict(cfg.get("bind", {}))
    binds.update(_parse_binds(args.bind))
    seeds = args.seeds if args.seeds is not None else cfg.get("seeds", DEFAULTS["seeds"])
    cap = args.cap if args.cap is not None else cfg.get("cap", DEFAULTS["cap"])
    used = set()
    for o in outcomes:
        if o.status == "rewritten":
            used |= E.params_of(o.original.domain) | E.params_of(o.original.body)
    b = _binding_for(sf, binds, used)
    functions = dict(sf.symbols.functions)
    items, failed = [], 0
    for i, (q, o) in enumerate(zip(sf.quantifiers, outcomes)):
        j = _quantifier_json(i, q, o)
        if o.status == "rewritten":
            reports = run_oracle(o, b, range(seeds), cap, functions or None)
            j["oracle"] = [r.to_json() for r in reports]
            ok = all(r.passed for r in reports)
            failed += not ok
            for r in reports:
                verdict = "pass" if r.passed else "FAIL"
                extra = f" {r.counterexample}" if r.counterexample else (f" {r.error}" if r.error else "")
                s.say(f"quantifier {i}: oracle {verdict} on {r.instance} |X|={r.size_x} |Y|={r.size_y}{extra}")
        items.append(j)
    s.report["quantifiers"] = items
    s.report["bindings"] = dict(sorted(binds.items()))
    s.report["seeds"], s.report["cap"] = seeds, cap
    code = _summarise(s, outcomes)
    s.report["summary"]["oracle_failures"] = failed
    return s.finish(EXIT_ORACLE if failed else code)


def cmd_typecheck(args, cfg) -> int:
    s = Session(args, "typecheck")
    sf = _load(args.file)
    sections, total = [], 0
    for sec in sf.typecheck_sections:
        diags = check_program(sec.program)
        total += len(diags)
        sections.append({"span": _span(sec), "diagnostics": [d.to_json() for d in diags]})
        for d in diags:
            s.say(str(d))
    s.report["typecheck"] = sections
    s.report["summary"] = {"sections": len(sections), "diagnostics": total}
    s.say(f"{total} diagnostic(s) in {len(sections)} section(s)")
    return s.finish(EXIT_REFUSED if total else EXIT_OK)


def cmd_emit_smt(args, cfg) -> int:
    s = Session(args, "emit-smt")
    sf = _load(args.file)
    if args.no_pattern:
        formulas, defs, code = sf.quantifiers, [], EXIT_OK
        s.report["quantifiers"] = [{"index": i, "span": _span(q), "status": "source"}
                                   for i, q in enumerate(formulas)]
    else:
        outcomes = _rewrite_all(sf, args, cfg)
        s.report["quantifiers"] = [_quantifier_json(i, q, o)
                                   for i, (q, o) in enumerate(zip(sf.quantifiers, outcomes))]
        code = _summarise(s, outcomes)
        formulas = [o.formula for o in outcomes if o.status != "refused"]
        defs = [d for o in outcomes for d in o.definitions]
    try:
        script = emit_smt(formulas, sf.symbols, defs, no_pattern=args.no_pattern)
    except SMTError as exc:
        s.report["error"] = {"code": exc.code, "message": exc.message}
        s.say(f"[{exc.code}] {exc.message}; pass --no-pattern to emit without triggers")
        return s.finish(EXIT_REFUSED)
    s.text = s.text + script.rstrip("\n").splitlines()
    return s.finish(code)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="triggerforge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"triggerforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, rewriting=True):
        p.add_argument("file")
        p.add_argument("--report", metavar="PATH", help="write the JSON report here instead of stderr")
        p.add_argument("--json-only", action="store_true", help="suppress // prose on stdout")
        p.add_argument("--config", metavar="PATH", help="defaults file (triggerforge.toml)")
        if rewriting:
            p.add_argument("--max-passes", type=int, default=None)
            p.add_argument("--mutate", action="append", choices=MUTATIONS, help=argparse.SUPPRESS)
        return p

    p = common(sub.add_parser("rewrite", help="rewrite quantifiers and print the new file"))
    p.add_argument("--wrap", choices=["acc1d"])
    p.set_defaults(fn=cmd_rewrite)
    p = common(sub.add_parser("check", help="report side conditions only"))
    p.set_defaults(fn=cmd_check)
    p = common(sub.add_parser("oracle", help="validate rewrites by enumeration"))
    p.add_argument("--wrap", choices=["acc1d"])
    p.add_argument("--bind", action="append", metavar="NAME=INT")
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(fn=cmd_oracle)
    p = common(sub.add_parser("typecheck", help="check unique/immutable qualifiers"), rewriting=False)
    p.set_defaults(fn=cmd_typecheck)
    p = common(sub.add_parser("emit-smt", help="print an SMT-LIB 2 script"))
    p.add_argument("--wrap", choices=["acc1d"])
    p.add_argument("--no-pattern", action="store_true", help="emit source quantifiers without triggers")
    p.set_defaults(fn=cmd_emit_smt)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        return args.fn(args, cfg)
    except UsageError as exc:
        sys.stderr.write(json.dumps({"schema": SCHEMA, "command": args.command, "error":
                                     {"code": "E_USAGE", "message": str(exc)}, "exit": EXIT_USAGE}) + "\n")
        return EXIT_USAGE
    except DSLError as exc:
        diags = exc.diagnostics
        sys.stderr.write(json.dumps({"schema": SCHEMA, "command": args.command,
                                     "diagnostics": [d.to_json() for d in diags], "exit": EXIT_USAGE}) + "\n")
        if not getattr(args, "json_only", False):
            sys.stdout.write("".join(f"// {d}\n" for d in diags))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
