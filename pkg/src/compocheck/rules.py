"""Well-formedness checks over component models.

Codes:

* W000 - ports must be unidirectional (split bidirectional ports).
* W001 - delegation links need ports of the same direction.
* W002 - assembly links need one required and one provided port.
* W003 - a typing association's navigability, kind and ends must match the link.
* W004 - a typed link from a port must point inside its transported set.
* W005 - links starting from a part must be typed with an association.
* W006 - a link must transport at least one interface.
* W007 - untyped links out of one port must transport pairwise disjoint sets.
* W008 - links out of a port must together cover its full contract closure.
* W009 - passive composites may contain only passive parts.
* W010 - active composites need all-passive or all active/protected parts.
* W011 - observer composites may contain only observer parts.

All rule functions are pure; :func:`check_model` runs them in order and
returns a deterministic report (diagnostics sorted by element path then code).
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, Severity, error
from .model import Class, ClassKind, Connector, Model, Port, validate_integrity
from .type_system import (
    LinkKind,
    OriginKind,
    classify_link,
    classifier_compatible,
    class_interfaces,
    interface_closure,
    link_origin,
    parents_of,
    port_compatible,
    port_interfaces,
    resolve_ends,
    transported_interfaces,
)


@dataclass
class CheckReport:
    diagnostics: list[Diagnostic]
    stats: dict[str, int]
    passed: bool
    notes: list[str] = field(default_factory=list)

    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "stats": dict(sorted(self.stats.items())),
            "notes": list(self.notes),
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


def _fmt_set(names: Iterable[str]) -> str:
    inner = ", ".join(sorted(names))
    return "{" + inner + "}"


def _port_path(cls: Class, port: Port) -> str:
    return f"{cls.name}.{port.name}"


def _usage_closure(model: Model, cls: Class) -> set[str]:
    used: set[str] = set()
    for name in {cls.name} | parents_of(model, cls.name):
        c = model.find_class(name)
        if c is None:
            continue
        for usage in c.usages:
            used |= interface_closure(model, usage)
    return used


def rule_unidirectional(model: Model) -> list[Diagnostic]:
    """W000: a port may carry one direction only.

    Flags a port when some interface in its closure is both provided and used
    by the owner, when a non-reversed port carries an interface the owner
    uses, or when the owner has used interfaces with no reversed port to carry
    them (which presses the provided ports into bidirectional service).
    """
    diags: list[Diagnostic] = []
    for cls in model.classes:
        used = _usage_closure(model, cls)
        realized = class_interfaces(model, cls.name)
        covered: set[str] = set()
        for port in cls.ports:
            if port.reversed:
                covered |= port_interfaces(model, port)
        uncovered = used - covered
        for port in cls.ports:
            closure = port_interfaces(model, port)
            both = closure & used & realized
            out_through_provided = set() if port.reversed else closure & used
            reasons: list[str] = []
            if both:
                reasons.append(f"the owner both realizes and uses {_fmt_set(both)}")
            if out_through_provided - both:
                reasons.append(
                    f"the port provides {_fmt_set(out_through_provided - both)}, "
                    f"which the owner also uses")
            if not port.reversed and uncovered and not reasons:
                reasons.append(
                    f"the owner uses {_fmt_set(uncovered)} but has no reversed port to "
                    f"carry outgoing requests")
            if reasons:
                diags.append(error(
                    "W000", _port_path(cls, port),
                    "port is effectively bidirectional: " + "; ".join(reasons)
                    + ". Split it into a provided port and a reversed (required) port.",
                ))
    return diags


def rule_link_type(model: Model) -> list[Diagnostic]:
    """W001/W002: forbidden direction combinations of port ends."""
    diags: list[Diagnostic] = []
    for cls, idx, conn in model.iter_connectors():
        if classify_link(model, cls, conn) is not LinkKind.FORBIDDEN:
            continue
        s1, s2 = resolve_ends(model, cls, conn)
        subject = model.connector_path(cls, idx)
        dir1 = "required" if s1.port is not None and s1.port.reversed else "provided"
        dir2 = "required" if s2.port is not None and s2.port.reversed else "provided"
        if s1.on_composite != s2.on_composite:
            diags.append(error(
                "W001", subject,
                f"delegation link between a {dir1} port ({s1.describe()}) and a {dir2} port "
                f"({s2.describe()}): both ports of a delegation link must have the same direction",
            ))
        else:
            diags.append(error(
                "W002", subject,
                f"assembly link between two {dir1} ports ({s1.describe()}, {s2.describe()}): "
                f"one end must be a reversed (required) port and the other a provided port",
            ))
    return diags


def _admissible_association(model: Model, kind: LinkKind, origin_kind: OriginKind,
                            assoc) -> tuple[bool, str]:
    """Which association classifier kinds may type a link of the given shape."""
    start = assoc.start_end() or assoc.end1
    pointed = assoc.pointed_end() or assoc.end2
    start_iface = model.find_interface(start.type) is not None
    pointed_iface = model.find_interface(pointed.type) is not None
    if kind is LinkKind.ASSEMBLY_PART_PART:
        return True, ""
    port_port = kind in (LinkKind.INBOUND_DELEGATION_PORT_PORT,
                         LinkKind.OUTBOUND_DELEGATION_PORT_PORT,
                         LinkKind.ASSEMBLY_PORT_PORT)
    if port_port:
        if start_iface and pointed_iface:
            return True, ""
        return False, "a link between two ports accepts only an association between two interfaces"
    # part-port shapes
    if origin_kind is OriginKind.FROM_PART:
        if start_iface and pointed_iface:
            return True, ""
        if not start_iface and pointed_iface:
            return True, ""
        return False, ("a link from a part to a port accepts only an association between two "
                       "interfaces or a class-to-interface association pointing at the interface")
    if start_iface and pointed_iface:
        return True, ""
    return False, ("a link from a port to a part accepts only an association between two "
                   "interfaces (class ends cannot govern the port side)")


def rule_association_direction(model: Model) -> list[Diagnostic]:
    """W003: the typing association's direction and ends must fit the link.

    Checks navigability (at least one navigable end; bidirectional only on
    class-class associations typing part-part links), the admissible
    association kind for the link shape, and, for links starting from a part,
    the compatibility of the link ends with the association ends.
    """
    diags: list[Diagnostic] = []
    for cls, idx, conn in model.iter_connectors():
        if conn.association is None:
            continue
        kind = classify_link(model, cls, conn)
        if kind is LinkKind.FORBIDDEN:
            continue
        assoc = model.find_association(conn.association)
        if assoc is None:
            continue
        subject = model.connector_path(cls, idx)

        def emit(message: str) -> None:
            diags.append(error("W003", subject, message, [assoc.name]))

        if assoc.is_non_navigable:
            emit(f"association '{assoc.name}' is not navigable at either end, so the "
                 f"connector has no direction and is not well-formed")
            continue
        origin = link_origin(model, cls, conn)
        if assoc.is_bidirectional:
            if kind is not LinkKind.ASSEMBLY_PART_PART:
                emit(f"bidirectional association '{assoc.name}' may only type a link "
                     f"between two parts")
                continue
            cc = (model.find_class(assoc.end1.type) is not None
                  and model.find_class(assoc.end2.type) is not None)
            if not cc:
                emit(f"bidirectional association '{assoc.name}' must connect two classes")
                continue
            s1, s2 = resolve_ends(model, cls, conn)
            t1 = s1.part.type if s1.part else ""
            t2 = s2.part.type if s2.part else ""
            forward = (classifier_compatible(model, t1, assoc.end1.type)
                       and classifier_compatible(model, t2, assoc.end2.type))
            backward = (classifier_compatible(model, t1, assoc.end2.type)
                        and classifier_compatible(model, t2, assoc.end1.type))
            if not (forward or backward):
                emit(f"neither orientation of bidirectional association '{assoc.name}' "
                     f"({assoc.end1.type} -- {assoc.end2.type}) matches the part types "
                     f"({t1}, {t2})")
            continue
        ok, why = _admissible_association(model, kind, origin.kind, assoc)
        if not ok:
            if origin.kind in (OriginKind.FROM_PROVIDED_PORT, OriginKind.FROM_REQUIRED_PORT) \
                    and kind not in (LinkKind.INBOUND_DELEGATION_PORT_PORT,
                                     LinkKind.OUTBOUND_DELEGATION_PORT_PORT,
                                     LinkKind.ASSEMBLY_PORT_PORT):
                why += (" (accepted here in no other form; a port-to-part link admits only "
                        "interface ends)")
            emit(f"association '{assoc.name}' cannot type this {kind.value}: {why}")
            continue
        if origin.kind is OriginKind.FROM_PART:
            start = assoc.start_end()
            pointed = assoc.pointed_end()
            assert start is not None and pointed is not None
            start_site = origin.site
            assert start_site is not None and start_site.part is not None
            problems: list[str] = []
            if not classifier_compatible(model, start_site.part.type, start.type):
                problems.append(
                    f"start end '{start.type}' does not match part '{start_site.part.name}' "
                    f"of type '{start_site.part.type}'")
            s1, s2 = resolve_ends(model, cls, conn)
            far = s2 if start_site.index == 1 else s1
            if far.port is not None:
                if not port_compatible(model, far.port, pointed.type):
                    problems.append(
                        f"pointed end '{pointed.type}' is not covered by port "
                        f"'{far.describe()}' (contract closure "
                        f"{_fmt_set(port_interfaces(model, far.port))})")
            elif far.part is not None:
                if not classifier_compatible(model, far.part.type, pointed.type):
                    problems.append(
                        f"pointed end '{pointed.type}' does not match part "
                        f"'{far.part.name}' of type '{far.part.type}'")
            if problems:
                emit(f"association '{assoc.name}' does not fit the link: " + "; ".join(problems))
    return diags


def rule_typed_from_port(model: Model) -> list[Diagnostic]:
    """W004: a typed link out of a port must point inside its transported set,
    and both link ends must cover the association ends."""
    diags: list[Diagnostic] = []
    for cls, idx, conn in model.iter_connectors():
        if conn.association is None:
            continue
        kind = classify_link(model, cls, conn)
        if kind is LinkKind.FORBIDDEN:
            continue
        origin = link_origin(model, cls, conn)
        if origin.kind not in (OriginKind.FROM_PROVIDED_PORT, OriginKind.FROM_REQUIRED_PORT):
            continue
        assoc = model.find_association(conn.association)
        if assoc is None or assoc.is_non_navigable or assoc.is_bidirectional:
            continue  # navigability problems are W003's
        ok, _ = _admissible_association(model, kind, origin.kind, assoc)
        if not ok:
            continue  # inadmissible kind is W003's
        start = assoc.start_end()
        pointed = assoc.pointed_end()
        assert start is not None and pointed is not None
        origin_port = origin.site.port if origin.site else None
        assert origin_port is not None
        problems: list[str] = []
        ts = transported_interfaces(model, cls, conn)
        if pointed.type not in ts.interfaces:
            problems.append(
                f"pointed type '{pointed.type}' is not in the transported set "
                f"{_fmt_set(ts.interfaces)}")
        if not port_compatible(model, origin_port, start.type):
            problems.append(
                f"start end '{start.type}' is not covered by the originating port "
                f"(closure {_fmt_set(port_interfaces(model, origin_port))})")
        s1, s2 = resolve_ends(model, cls, conn)
        far = s2 if origin.site is not None and origin.site.index == 1 else s1
        if far.port is not None:
            if not port_compatible(model, far.port, pointed.type):
                problems.append(
                    f"pointed type '{pointed.type}' is not covered by the far port "
                    f"'{far.describe()}'")
        elif far.part is not None:
            if not classifier_compatible(model, far.part.type, pointed.type):
                problems.append(
                    f"pointed type '{pointed.type}' does not match the far part "
                    f"'{far.part.name}' of type '{far.part.type}'")
        if problems:
            diags.append(error(
                "W004", model.connector_path(cls, idx),
                f"association '{assoc.name}' mis-types this link: " + "; ".join(problems),
                [assoc.name],
            ))
    return diags


def rule_typed_from_part(model: Model) -> list[Diagnostic]:
    """W005: every link starting from a part must carry an association,
    because the component needs a name under which to address the channel."""
    diags: list[Diagnostic] = []
    for cls, idx, conn in model.iter_connectors():
        kind = classify_link(model, cls, conn)
        if kind is LinkKind.FORBIDDEN:
            continue
        origin = link_origin(model, cls, conn)
        if origin.kind is OriginKind.FROM_PART and conn.association is None:
            part_name = origin.site.part.name if origin.site and origin.site.part else "?"
            diags.append(error(
                "W005", model.connector_path(cls, idx),
                f"link starting from part '{part_name}' must be statically typed with an "
                f"association; without one the component cannot refer to the channel",
            ))
    return diags


def rule_nonvoid(model: Model) -> list[Diagnostic]:
    """W006: a link whose transported set is computable must carry something."""
    diags: list[Diagnostic] = []
    for cls, idx, conn in model.iter_connectors():
        ts = transported_interfaces(model, cls, conn)
        if ts.computable and not ts.interfaces:
            s1, s2 = resolve_ends(model, cls, conn)
            diags.append(error(
                "W006", model.connector_path(cls, idx),
                f"link {s1.describe()} -- {s2.describe()} transports no interfaces: "
                f"the interface sets at its two ends are disjoint",
            ))
    return diags


def outgoing_connectors(model: Model, cls: Class, port: Port,
                        typed: bool | None = None) -> list[tuple[Class, int, Connector]]:
    """Connectors anywhere in the model that originate at this port declaration.

    ``typed`` filters: True for typed only, False for untyped only, None for all.
    """
    out: list[tuple[Class, int, Connector]] = []
    for owner, idx, conn in model.iter_connectors():
        origin = link_origin(model, owner, conn)
        if origin.site is None or origin.site.port is not port:
            continue
        if origin.kind not in (OriginKind.FROM_PROVIDED_PORT, OriginKind.FROM_REQUIRED_PORT):
            continue
        if typed is True and conn.association is None:
            continue
        if typed is False and conn.association is not None:
            continue
        out.append((owner, idx, conn))
    return out


def pairwise_disjoint_by_cardinality(sets: list[frozenset[str]] | list[set[str]]) -> tuple[bool, set[str]]:
    """Disjointness via the counting identity |A1 u ... u An| = sum |Ai|.

    Returns (disjoint, overlapping elements).
    """
    union: set[str] = set()
    total = 0
    seen_twice: set[str] = set()
    for s in sets:
        seen_twice |= union & s
        union |= s
        total += len(s)
    return len(union) == total, seen_twice


def rule_pairwise_disjoint(model: Model) -> list[Diagnostic]:
    """W007: untyped links out of one port must not overlap, or the default
    per-interface forwarding destination would be ambiguous."""
    diags: list[Diagnostic] = []
    for cls in model.classes:
        for port in cls.ports:
            untyped = outgoing_connectors(model, cls, port, typed=False)
            if len(untyped) < 2:
                continue
            sets = []
            related = []
            for owner, idx, conn in untyped:
                ts = transported_interfaces(model, owner, conn)
                if ts.computable:
                    sets.append(ts.interfaces)
                    related.append(model.connector_path(owner, idx))
            disjoint, overlap = pairwise_disjoint_by_cardinality(sets)
            if not disjoint:
                diags.append(error(
                    "W007", _port_path(cls, port),
                    f"untyped links out of this port transport overlapping interfaces "
                    f"{_fmt_set(overlap)}; type all but one of the overlapping links with "
                    f"an explicit association",
                    related,
                ))
    return diags


def rule_completeness(model: Model) -> list[Diagnostic]:
    """W008: the links out of a port must together transport its whole closure.

    Ports that originate no link are skipped (see the stub notes in the report
    header for ports that are not wired at all).
    """
    diags: list[Diagnostic] = []
    for cls in model.classes:
        for port in cls.ports:
            outgoing = outgoing_connectors(model, cls, port, typed=None)
            if not outgoing:
                continue
            union: set[str] = set()
            related = []
            for owner, idx, conn in outgoing:
                ts = transported_interfaces(model, owner, conn)
                if ts.computable:
                    union |= ts.interfaces
                related.append(model.connector_path(owner, idx))
            want = port_interfaces(model, port)
            missing = want - union
            excess = union - want
            if missing or excess:
                details = []
                if missing:
                    details.append(f"missing {_fmt_set(missing)}")
                if excess:
                    details.append(f"excess {_fmt_set(excess)}")
                diags.append(error(
                    "W008", _port_path(cls, port),
                    f"links out of this port transport {_fmt_set(union)} but its contract "
                    f"closure is {_fmt_set(want)}: " + ", ".join(details),
                    related,
                ))
    return diags


def rule_concurrency(model: Model) -> list[Diagnostic]:
    """W009/W010: composites must not mix their parts' activity groups.

    Passive composites may hold only passive parts; active composites may hold
    either only passive parts or only active/protected parts. Protected and
    observer composites are exempt here.
    """
    diags: list[Diagnostic] = []
    for cls in model.classes:
        if not cls.is_composite:
            continue
        part_kinds: list[tuple[str, ClassKind]] = []
        for part in cls.parts:
            part_cls = model.find_class(part.type)
            if part_cls is not None:
                part_kinds.append((f"{cls.name}.{part.name}", part_cls.kind))
        if not part_kinds:
            continue
        if cls.kind is ClassKind.PASSIVE:
            offenders = [p for p, k in part_kinds if k is not ClassKind.PASSIVE]
            if offenders:
                diags.append(error(
                    "W009", cls.name,
                    f"passive composite '{cls.name}' must contain only passive parts",
                    offenders,
                ))
        elif cls.kind is ClassKind.ACTIVE:
            all_passive = all(k is ClassKind.PASSIVE for _, k in part_kinds)
            all_active_protected = all(k in (ClassKind.ACTIVE, ClassKind.PROTECTED)
                                       for _, k in part_kinds)
            if not (all_passive or all_active_protected):
                offenders = [p for p, k in part_kinds
                             if k not in (ClassKind.ACTIVE, ClassKind.PROTECTED)]
                diags.append(error(
                    "W010", cls.name,
                    f"active composite '{cls.name}' must contain either only passive parts "
                    f"or only active and protected parts; mark shared passive parts as "
                    f"protected to make the structure valid",
                    offenders,
                ))
    return diags


def rule_observer(model: Model) -> list[Diagnostic]:
    """W011: composite observers may contain only observer parts."""
    diags: list[Diagnostic] = []
    for cls in model.classes:
        if cls.kind is not ClassKind.OBSERVER or not cls.is_composite:
            continue
        offenders = []
        for part in cls.parts:
            part_cls = model.find_class(part.type)
            if part_cls is not None and part_cls.kind is not ClassKind.OBSERVER:
                offenders.append(f"{cls.name}.{part.name}")
        if offenders:
            diags.append(error(
                "W011", cls.name,
                f"observer composite '{cls.name}' must contain only observer parts",
                offenders,
            ))
    return diags


RULES = [
    rule_unidirectional,
    rule_link_type,
    rule_association_direction,
    rule_typed_from_port,
    rule_typed_from_part,
    rule_nonvoid,
    rule_pairwise_disjoint,
    rule_completeness,
    rule_concurrency,
    rule_observer,
]


def _report_notes(model: Model) -> list[str]:
    notes: list[str] = []
    touched: set[tuple[str, str]] = set()
    for cls, _, conn in model.iter_connectors():
        for ref in (conn.end1, conn.end2):
            if ref.part is not None and ref.port is not None:
                part = cls.find_part(ref.part)
                if part is not None:
                    touched.add((part.type, ref.port))
            elif ref.port is not None:
                touched.add((cls.name, ref.port))
    for cls in model.classes:
        for port in cls.ports:
            if (cls.name, port.name) not in touched:
                notes.append(f"port {cls.name}.{port.name} is not connected to any link")
    for cls in model.classes:
        if cls.kind is ClassKind.PROTECTED and cls.is_composite:
            notes.append(f"composite {cls.name} is protected; no concurrency rule constrains "
                         f"its parts")
    return sorted(notes)


def check_model(model: Model, downgrade: Iterable[str] = ()) -> CheckReport:
    """Run every rule and build a deterministic report.

    ``downgrade`` lists codes whose findings become warnings instead of
    errors; warnings never fail the report. The model must already satisfy
    :func:`validate_integrity` and have its deleg associations synthesized.
    """
    integrity = validate_integrity(model)
    if integrity:
        raise ValueError(
            "check_model requires a model that passes integrity validation; found: "
            + "; ".join(d.render() for d in integrity))
    downgraded = set(downgrade)
    diagnostics: list[Diagnostic] = []
    for rule in RULES:
        diagnostics.extend(rule(model))
    for diag in diagnostics:
        if diag.code in downgraded:
            diag.severity = Severity.WARNING
    diagnostics.sort(key=Diagnostic.sort_key)
    stats: dict[str, int] = {}
    for diag in diagnostics:
        stats[diag.code] = stats.get(diag.code, 0) + 1
    passed = not any(d.severity is Severity.ERROR for d in diagnostics)
    return CheckReport(diagnostics=diagnostics, stats=dict(sorted(stats.items())),
                       passed=passed, notes=_report_notes(model))
