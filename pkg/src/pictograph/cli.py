"""Command-line front end.

Subcommands
    analyze-tau        marked levels, moduli, twist periods and Top for a
                       tau-sequence
    enumerate          census of truncated spines of a given length
    tree-code          tree code of a spine file
    spine-top          conjugacy count of a spine, by formula and by the
                       lattice induction
    descriptor-analyze run the general-degree induction on a descriptor file
    validate           check any supported JSON document
    render             SVG diagram of a lamination, spine or pictograph

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import builder, cubic, render, twistlat
from .cubic import SpineError, TauError, TauSequence
from .laminations import (LaminationError, lamination_from_json, validate,
                          violations)
from .twistlat import DescriptorError


class DomainError(Exception):
    pass


def _parse_tau(text: str, fund_edges: int) -> TauSequence:
    vals = [int(x) for x in text.split(",") if x.strip() != ""]
    tau = TauSequence.make(vals, fund_edges)
    bad = cubic.admissibility_violations(tau)
    if bad:
        raise DomainError("inadmissible tau-sequence: " + "; ".join(bad))
    return tau


def _write(out, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_analyze_tau(args) -> int:
    tau = _parse_tau(args.tau, args.fund_edges)
    data = cubic.marked_data(tau)
    periods = cubic.cubic_twist_periods(tau)
    top = cubic.top_count(tau)
    report = {
        "version": "v1",
        "kind": "tau_report",
        "tau": list(tau.values),
        "fund_edges": tau.fund_edges,
        "marked_levels": [l for l, _, _ in data],
        "moduli_sums": [str(m) for _, m, _ in data],
        "t": [t for _, _, t in data],
        "twist_periods": periods,
        "top": top,
    }
    if args.format == "json":
        _write(args.out, json.dumps(report, indent=2) + "\n")
    else:
        lines = [f"tau = ({', '.join(map(str, tau.values))}) with "
                 f"{tau.fund_edges} fundamental edge(s)"]
        lines.append("marked levels: " + ", ".join(str(l) for l, _, _ in data))
        lines.append("cumulative moduli m_j: " + ", ".join(str(m) for _, m, _ in data))
        lines.append("t_j: " + ", ".join(str(t) for _, _, t in data))
        lines.append("twist periods T_n: " + ", ".join(map(str, periods)))
        lines.append(f"Top = {top}")
        _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_enumerate(args) -> int:
    per_tau = _parse_tau(args.tau, args.fund_edges or 2) if args.tau else None
    spines = builder.enumerate_cubic_spines(
        args.length, fund_edges=args.fund_edges, per_tau=per_tau,
        cap=args.cap)
    lines = []
    for s in spines:
        doc = cubic.spine_to_json(s)
        tau = cubic.tau_from_spine(s)
        doc["tau"] = list(tau.values)
        doc["tree_code"] = [list(p) for p in cubic.tree_code(s)]
        doc["top"] = cubic.top_count(tau)
        lines.append(json.dumps(doc))
    _write(args.out, "\n".join(lines) + ("\n" if lines else ""))
    return 0


def _load_spine(path: str) -> cubic.TruncatedSpine:
    with open(path) as fh:
        doc = json.load(fh)
    return cubic.spine_from_json(doc)


def cmd_tree_code(args) -> int:
    s = _load_spine(args.input)
    code = cubic.tree_code(s)
    _write(args.out, json.dumps({"version": "v1", "kind": "tree_code",
                                 "code": [list(p) for p in code]}) + "\n")
    return 0


def cmd_spine_top(args) -> int:
    s = _load_spine(args.input)
    tau = cubic.tau_from_spine(s)
    top_formula = cubic.top_count(tau)
    rep = twistlat.analyze(cubic.spine_descriptor(s))
    doc = {
        "version": "v1",
        "kind": "spine_top",
        "tau": list(tau.values),
        "fund_edges": tau.fund_edges,
        "top": top_formula,
        "top_by_lattice_induction": rep.final_top,
    }
    if top_formula != rep.final_top:
        raise DomainError("closed formula and lattice induction disagree: "
                          + json.dumps(doc))
    _write(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_descriptor_analyze(args) -> int:
    with open(args.input) as fh:
        desc = twistlat.descriptor_from_json(json.load(fh))
    rep = twistlat.analyze(desc, max_levels=args.depth)
    _write(args.out, json.dumps(twistlat.report_to_json(rep), indent=2) + "\n")
    return 0


def cmd_validate(args) -> int:
    with open(args.input) as fh:
        doc = json.load(fh)
    kind = doc.get("kind")
    if kind == "truncated_spine":
        s = cubic.spine_from_json(doc)
        bad = cubic.spine_violations(s)
    elif kind == "spine_descriptor":
        bad = []
        try:
            twistlat.descriptor_from_json(doc)
        except DescriptorError as e:
            bad = [str(e)]
    elif "classes" in doc:
        lam = lamination_from_json(doc)
        bad = violations(lam)
    else:
        raise DomainError(f"unrecognized document kind {kind!r}")
    if bad:
        _write(args.out, json.dumps({"valid": False, "errors": bad}) + "\n")
        return 1
    _write(args.out, json.dumps({"valid": True}) + "\n")
    return 0


def cmd_render(args) -> int:
    with open(args.input) as fh:
        doc = json.load(fh)
    if doc.get("kind") == "truncated_spine":
        s = cubic.spine_from_json(doc)
        if args.pictograph:
            svg = render.render_pictograph(cubic.pictograph_from_truncated(s),
                                           depth=args.depth)
        else:
            svg = render.render_spine(s)
    elif "classes" in doc:
        svg = render.render_lamination(lamination_from_json(doc))
    else:
        raise DomainError("unrecognized document for rendering")
    _write(args.out, svg)
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pictograph",
                                description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze-tau", help="twist data and Top for a tau-sequence")
    a.add_argument("--tau", required=True, help="comma-separated values, e.g. 0,0,1,2,0")
    a.add_argument("--fund-edges", type=int, choices=(1, 2), default=2)
    a.add_argument("--format", choices=("json", "text"), default="text")
    a.add_argument("--out", default="-")
    a.set_defaults(func=cmd_analyze_tau)

    e = sub.add_parser("enumerate", help="census of truncated spines (JSON lines)")
    e.add_argument("--length", type=int, required=True)
    e.add_argument("--fund-edges", type=int, choices=(1, 2), default=None)
    e.add_argument("--tau", default=None)
    e.add_argument("--cap", type=int, default=builder.MAX_CENSUS_LENGTH)
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_enumerate)

    tc = sub.add_parser("tree-code", help="tree code of a spine file")
    tc.add_argument("input")
    tc.add_argument("--out", default="-")
    tc.set_defaults(func=cmd_tree_code)

    st = sub.add_parser("spine-top", help="conjugacy count of a spine, both routes")
    st.add_argument("input")
    st.add_argument("--out", default="-")
    st.set_defaults(func=cmd_spine_top)

    da = sub.add_parser("descriptor-analyze", help="run the lattice induction")
    da.add_argument("input")
    da.add_argument("--depth", type=int, default=None)
    da.add_argument("--out", default="-")
    da.set_defaults(func=cmd_descriptor_analyze)

    v = sub.add_parser("validate", help="validate a JSON document")
    v.add_argument("input")
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("render", help="render to SVG")
    r.add_argument("input")
    r.add_argument("--pictograph", action="store_true",
                   help="complete a spine to its pictograph first")
    r.add_argument("--depth", type=int, default=None,
                   help="rows to draw for pictographs")
    r.add_argument("--out", default="-")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (DomainError, TauError, SpineError, LaminationError,
            DescriptorError, FileNotFoundError, json.JSONDecodeError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
