"""Command line front end: ``check``, ``explain`` and ``simulate``.

Exit codes: 0 when the command's verdict is clean, 1 when rule violations or
unsafe routing were found, 2 when the input could not be parsed, failed
integrity validation, or the command could not run at all.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .diagnostics import Severity
from .ingest import ParseFailure, parse_auto
from .model import (
    Class,
    Connector,
    Interface,
    Model,
    ModelError,
    Part,
    Port,
    UnknownPathError,
    resolve,
    synthesize_deleg_associations,
    validate_integrity,
)
from .rules import CheckReport, check_model, outgoing_connectors, pairwise_disjoint_by_cardinality
from .simulator import (
    SimError,
    check_type_safety,
    default_injection_suite,
    inject,
    instantiate,
    run_to_quiescence,
)
from .type_system import (
    class_interfaces,
    classify_link,
    interface_closure,
    link_origin,
    port_interfaces,
    transported_interfaces,
)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2


class _Palette:
    def __init__(self, enabled: bool):
        self.enabled = enabled

    def paint(self, text: str, code: str) -> str:
        if not self.enabled:
            return text
        return f"\x1b[{code}m{text}\x1b[0m"

    def red(self, text: str) -> str:
        return self.paint(text, "31")

    def yellow(self, text: str) -> str:
        return self.paint(text, "33")

    def green(self, text: str) -> str:
        return self.paint(text, "32")


def _palette(stream) -> _Palette:
    mode = os.environ.get("COMPOCHECK_COLOR", "auto")
    if mode == "always":
        return _Palette(True)
    if mode == "never":
        return _Palette(False)
    return _Palette(hasattr(stream, "isatty") and stream.isatty())


def _fmt_set(names) -> str:
    return "{" + ", ".join(sorted(names)) + "}"


def _print_parse_failure(path: str, failure: ParseFailure, out) -> None:
    for err in failure.errors:
        print(err.render(), file=out)
    print(f"{path}: {len(failure.errors)} parse error(s)", file=out)


def _load(path: str, fmt: str) -> Model:
    text = Path(path).read_text(encoding="utf-8")
    return parse_auto(text, path, fmt)


def _prepare(args, out) -> tuple[Model, None] | tuple[None, int]:
    """Parse, integrity-check and synthesize; returns (model, None) or (None, exit code)."""
    try:
        model = _load(args.input, args.format)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc.strerror or exc}", file=out)
        return None, EXIT_INPUT
    except ParseFailure as failure:
        _print_parse_failure(args.input, failure, out)
        return None, EXIT_INPUT
    integrity = validate_integrity(model)
    if integrity:
        for diag in integrity:
            print(diag.render(), file=out)
        print(f"{args.input}: {len(integrity)} integrity error(s)", file=out)
        return None, EXIT_INPUT
    try:
        model = synthesize_deleg_associations(model)
    except ModelError as exc:
        for diag in exc.diagnostics:
            print(diag.render(), file=out)
        return None, EXIT_INPUT
    return model, None


def _downgrade_codes(args) -> set[str]:
    codes: set[str] = set()
    for chunk in args.downgrade or []:
        codes.update(c.strip() for c in chunk.split(",") if c.strip())
    return codes


def _render_check_text(report: CheckReport, out, palette: _Palette) -> None:
    for note in report.notes:
        print(f"note: {note}", file=out)
    for diag in report.diagnostics:
        line = diag.render()
        if diag.severity is Severity.ERROR:
            line = palette.red(line)
        else:
            line = palette.yellow(line)
        print(line, file=out)
    errors = sum(1 for d in report.diagnostics if d.severity is Severity.ERROR)
    warnings = len(report.diagnostics) - errors
    verdict = palette.green("PASSED") if report.passed else palette.red("FAILED")
    print(f"check: {verdict} ({errors} error(s), {warnings} warning(s))", file=out)


def cmd_check(args, out) -> int:
    model, code = _prepare(args, out)
    if model is None:
        return code
    report = check_model(model, downgrade=_downgrade_codes(args))
    if args.output == "json":
        doc = {"formatVersion": 1, "command": "check", "input": args.input}
        doc.update(report.to_dict())
        print(json.dumps(doc, indent=2), file=out)
    else:
        _render_check_text(report, out, _palette(out))
    return EXIT_OK if report.passed else EXIT_FINDINGS


def _describe_connector(model: Model, cls: Class, index: int, conn: Connector) -> dict:
    kind = classify_link(model, cls, conn)
    origin = link_origin(model, cls, conn)
    ts = transported_interfaces(model, cls, conn)
    return {
        "element": model.connector_path(cls, index),
        "ends": [conn.end1.describe(), conn.end2.describe()],
        "kind": kind.value,
        "origin": origin.describe(),
        "transported": sorted(ts.interfaces) if ts.computable else None,
        "association": conn.association,
    }


def _describe_port(model: Model, cls: Class, port: Port) -> dict:
    outgoing = []
    sets = []
    untyped_sets = []
    for owner, idx, conn in outgoing_connectors(model, cls, port):
        ts = transported_interfaces(model, owner, conn)
        entry = _describe_connector(model, owner, idx, conn)
        outgoing.append(entry)
        if ts.computable:
            sets.append(ts.interfaces)
            if conn.association is None:
                untyped_sets.append(ts.interfaces)
    closure = port_interfaces(model, port)
    union = set().union(*sets) if sets else set()
    disjoint, overlap = pairwise_disjoint_by_cardinality(untyped_sets)
    return {
        "element": f"{cls.name}.{port.name}",
        "contract": port.contract,
        "reversed": port.reversed,
        "closure": sorted(closure),
        "outgoing": outgoing,
        "disjoint": disjoint,
        "overlap": sorted(overlap),
        "complete": union == closure if outgoing else None,
        "missing": sorted(closure - union) if outgoing else [],
    }


def _describe_element(model: Model, path: str, element) -> dict:
    if isinstance(element, Connector):
        cls_name = path.partition("#")[0]
        cls = model.find_class(cls_name)
        index = next(i for i, conn in enumerate(cls.connectors) if conn is element)
        return _describe_connector(model, cls, index, element)
    if isinstance(element, Port):
        cls = model.find_class(path.partition(".")[0])
        return _describe_port(model, cls, element)
    if isinstance(element, Part):
        return {
            "element": path,
            "type": element.type,
            "multiplicity": element.multiplicity,
            "provided": sorted(class_interfaces(model, element.type)),
        }
    if isinstance(element, Class):
        return {
            "element": path,
            "kind": element.kind.value,
            "provided": sorted(class_interfaces(model, element.name)),
            "parts": [p.name for p in element.parts],
            "ports": [p.name for p in element.ports],
        }
    if isinstance(element, Interface):
        return {
            "element": path,
            "group": element.is_group,
            "closure": sorted(interface_closure(model, element.name)),
            "operations": list(element.operations),
        }
    return {"element": path, "kind": "association"}


def cmd_explain(args, out) -> int:
    model, code = _prepare(args, out)
    if model is None:
        return code
    try:
        element = resolve(model, args.element)
    except UnknownPathError as exc:
        for diag in exc.diagnostics:
            print(diag.render(), file=out)
        return EXIT_FINDINGS
    info = _describe_element(model, args.element, element)
    if args.output == "json":
        print(json.dumps(info, indent=2), file=out)
    else:
        for key, value in info.items():
            if isinstance(value, list) and value and isinstance(value[0], dict):
                print(f"{key}:", file=out)
                for entry in value:
                    ends = " -- ".join(entry.get("ends", []))
                    ts = entry.get("transported")
                    ts_text = _fmt_set(ts) if ts is not None else "(not computable)"
                    print(f"  {entry['element']}: {ends} [{entry['kind']}] "
                          f"transports {ts_text}", file=out)
            else:
                print(f"{key}: {value}", file=out)
    return EXIT_OK


def _parse_injections(specs: list[str]) -> list[tuple[str, str]]:
    pairs = []
    for spec in specs:
        location, sep, interface = spec.rpartition(":")
        if not sep or not location or not interface:
            raise SimError(f"--inject expects LOCATION:INTERFACE, got {spec!r}")
        pairs.append((location, interface))
    return pairs


def cmd_simulate(args, out) -> int:
    model, code = _prepare(args, out)
    if model is None:
        return code
    root = args.root or model.root
    if root is None:
        print("error: simulate needs a root class (--root NAME or a 'root' in the model)",
              file=out)
        return EXIT_INPUT
    # Completeness findings (W008) surface at run time as stuck requests, so
    # they are downgraded here and the simulation is allowed to demonstrate them.
    downgrade = _downgrade_codes(args) | {"W008"}
    try:
        graph = instantiate(model, root, downgrade=downgrade)
        injections = (_parse_injections(args.inject) if args.inject
                      else default_injection_suite(graph))
        for location, interface in injections:
            inject(graph, location, interface)
        trace = run_to_quiescence(graph)
    except SimError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_INPUT
    safety = check_type_safety(trace, graph)
    if args.output == "json":
        for event in trace.events:
            print(json.dumps(event.to_dict()), file=out)
        print(json.dumps({"summary": trace.status_counts()}), file=out)
    else:
        palette = _palette(out)
        counts = trace.status_counts()
        print(f"simulate: {len(graph.requests)} request(s): "
              f"{counts['delivered']} delivered, {counts['stuck']} stuck, "
              f"{counts['inTransit']} in transit over {len(trace.events)} event(s)", file=out)
        for violation in safety.violations:
            print(palette.red(f"request {violation.request}: {violation.reason} "
                              f"(path: {' -> '.join(violation.path)})"), file=out)
        verdict = palette.green("PASSED") if safety.passed else palette.red("FAILED")
        print(f"routing safety: {verdict}", file=out)
    return EXIT_OK if safety.passed else EXIT_FINDINGS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compocheck",
        description="Validate hierarchical component models and simulate their "
                    "port-forwarding behaviour.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="model file (.csm DSL or .csm.json)")
        p.add_argument("--format", choices=["auto", "dsl", "json"], default="auto")
        p.add_argument("--output", choices=["text", "json"], default="text")
        p.add_argument("--downgrade", action="append", metavar="CODE[,CODE...]",
                       help="treat the listed rule codes as warnings")

    p_check = sub.add_parser("check", help="run the well-formedness rules")
    common(p_check)

    p_explain = sub.add_parser("explain", help="show derived typing for one element")
    common(p_explain)
    p_explain.add_argument("element", help="element path: Name, Class.member or Class#index")

    p_sim = sub.add_parser("simulate", help="instantiate a composite and route requests")
    common(p_sim)
    p_sim.add_argument("--root", help="composite class to instantiate")
    p_sim.add_argument("--inject", action="append", metavar="LOCATION:INTERFACE",
                       help="inject one request (repeatable); default: one request per "
                            "provided boundary port and interface")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    if args.command == "check":
        return cmd_check(args, out)
    if args.command == "explain":
        return cmd_explain(args, out)
    return cmd_simulate(args, out)


if __name__ == "__main__":
    sys.exit(main())
