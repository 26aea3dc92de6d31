"""Derived typing over component models.

Everything here is a pure function of an immutable :class:`~compocheck.model.Model`:

* generalization closures (``parents_of``) and the provided-interface sets of
  ports, classes and interfaces (interface groups never appear in a result);
* the classification of a connector into delegation/assembly kinds, including
  the forbidden direction combinations;
* the origin of a link (the end requests flow away from);
* the set of interfaces a connector transports: the intersection of the
  interface sets at its two ends, narrowed to the pointed type's closure when
  the connector is statically typed with an association;
* compatibility predicates between link ends and association ends.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import Class, Connector, EndRef, Model, Part, Port


class LinkKind(Enum):
    """Connector classification by end shapes and port directions."""

    ASSEMBLY_PART_PART = "assembly link between parts"
    INBOUND_DELEGATION_PORT_PORT = "inbound delegation link between provided ports"
    OUTBOUND_DELEGATION_PORT_PORT = "outbound delegation link between required ports"
    ASSEMBLY_PORT_PORT = "assembly link between provided-required ports"
    ASSEMBLY_PART_PROVIDED_PORT = "assembly link between part and provided port"
    ASSEMBLY_PART_REQUIRED_PORT = "assembly link between part and required port"
    INBOUND_DELEGATION_PART_PORT = "inbound delegation link between part and provided port"
    OUTBOUND_DELEGATION_PART_PORT = "outbound delegation link between part and required port"
    FORBIDDEN = "forbidden"


DELEGATION_KINDS = frozenset({
    LinkKind.INBOUND_DELEGATION_PORT_PORT,
    LinkKind.OUTBOUND_DELEGATION_PORT_PORT,
    LinkKind.INBOUND_DELEGATION_PART_PORT,
    LinkKind.OUTBOUND_DELEGATION_PART_PORT,
})


class OriginKind(Enum):
    FROM_PROVIDED_PORT = "provided port"
    FROM_REQUIRED_PORT = "required port"
    FROM_PART = "part"
    UNDIRECTED = "undirected"


@dataclass(frozen=True)
class EndSite:
    """A connector end resolved against its owning class.

    ``part`` is None for ends naming a port of the composite itself; ``port``
    is None for bare part ends. ``on_composite`` is true when the port belongs
    to the class owning the connector.
    """

    index: int
    ref: EndRef
    part: Part | None
    part_class: Class | None
    port: Port | None
    on_composite: bool

    def describe(self) -> str:
        return self.ref.describe()


@dataclass(frozen=True)
class LinkOrigin:
    kind: OriginKind
    site: EndSite | None

    def describe(self) -> str:
        if self.site is None:
            return self.kind.value
        return self.site.describe()


@dataclass(frozen=True)
class TransportedSet:
    """The dynamic type of a connector.

    ``computable`` is false for part-part links (no port closure bounds the
    channel) and for links typed with an association that has no navigable end.
    """

    interfaces: frozenset[str]
    computable: bool


def parents_of(model: Model, name: str) -> set[str]:
    """Transitive closure of a classifier's generals, excluding itself."""
    seen: set[str] = set()
    work = [name]
    while work:
        current = work.pop()
        element = model.find_interface(current) or model.find_class(current)
        if element is None:
            continue
        for general in element.generals:
            if general not in seen:
                seen.add(general)
                work.append(general)
    seen.discard(name)
    return seen


def interface_closure(model: Model, name: str) -> set[str]:
    """The interface itself plus its ancestors, with interface groups rejected."""
    out: set[str] = set()
    for candidate in {name} | parents_of(model, name):
        iface = model.find_interface(candidate)
        if iface is not None and not iface.is_group:
            out.add(candidate)
    return out


def class_interfaces(model: Model, name: str) -> set[str]:
    """Interfaces a class provides: realized directly or via any ancestor class,
    expanded to the realized interfaces' ancestors, groups rejected."""
    realized: set[str] = set()
    for cls_name in {name} | parents_of(model, name):
        cls = model.find_class(cls_name)
        if cls is None:
            continue
        realized.update(cls.realizes)
    out: set[str] = set()
    for r in realized:
        out |= interface_closure(model, r)
    return out


def port_interfaces(model: Model, port: Port) -> set[str]:
    """The interfaces a port provides (or requires, when reversed)."""
    return interface_closure(model, port.contract)


def provided_interfaces(model: Model, name: str) -> set[str]:
    """Polymorphic interface set of a classifier name (class or interface)."""
    if model.find_interface(name) is not None:
        return interface_closure(model, name)
    if model.find_class(name) is not None:
        return class_interfaces(model, name)
    return set()


def resolve_end(model: Model, owner: Class, ref: EndRef, index: int) -> EndSite:
    part = owner.find_part(ref.part) if ref.part else None
    part_class = model.find_class(part.type) if part else None
    if ref.port is None:
        port = None
        on_composite = False
    elif part_class is not None:
        port = part_class.find_port(ref.port)
        on_composite = False
    else:
        port = owner.find_port(ref.port) if ref.part is None else None
        on_composite = ref.part is None
    return EndSite(index=index, ref=ref, part=part, part_class=part_class,
                   port=port, on_composite=on_composite)


def resolve_ends(model: Model, owner: Class, conn: Connector) -> tuple[EndSite, EndSite]:
    return (resolve_end(model, owner, conn.end1, 1),
            resolve_end(model, owner, conn.end2, 2))


def classify_link(model: Model, owner: Class, conn: Connector) -> LinkKind:
    """Classify a connector by its end shapes and port directions.

    Port-port links with one port on the composite are delegations and need
    matching directions. Port-port links between parts are assemblies and need
    opposite directions. Part-port links are assemblies when the port sits on
    a part and delegations when it sits on the composite. Two ports of the
    composite itself fall under the assembly case.
    """
    s1, s2 = resolve_ends(model, owner, conn)
    p1, p2 = s1.port, s2.port
    if p1 is None and p2 is None:
        return LinkKind.ASSEMBLY_PART_PART
    if p1 is not None and p2 is not None:
        if s1.on_composite != s2.on_composite:
            if not p1.reversed and not p2.reversed:
                return LinkKind.INBOUND_DELEGATION_PORT_PORT
            if p1.reversed and p2.reversed:
                return LinkKind.OUTBOUND_DELEGATION_PORT_PORT
            return LinkKind.FORBIDDEN
        if p1.reversed != p2.reversed:
            return LinkKind.ASSEMBLY_PORT_PORT
        return LinkKind.FORBIDDEN
    port_site = s1 if p1 is not None else s2
    port = port_site.port
    assert port is not None
    if not port_site.on_composite:
        return (LinkKind.ASSEMBLY_PART_REQUIRED_PORT if port.reversed
                else LinkKind.ASSEMBLY_PART_PROVIDED_PORT)
    return (LinkKind.OUTBOUND_DELEGATION_PART_PORT if port.reversed
            else LinkKind.INBOUND_DELEGATION_PART_PORT)


def link_origin(model: Model, owner: Class, conn: Connector) -> LinkOrigin:
    """The end a connector's requests flow away from.

    Inbound delegations start at the composite's provided port; outbound
    delegations between ports start at the inner component's required port;
    assemblies start at the required port when one exists, otherwise at the
    part. Part-part links start at their first end.
    """
    kind = classify_link(model, owner, conn)
    s1, s2 = resolve_ends(model, owner, conn)
    if kind is LinkKind.FORBIDDEN:
        return LinkOrigin(OriginKind.UNDIRECTED, None)
    if kind is LinkKind.ASSEMBLY_PART_PART:
        return LinkOrigin(OriginKind.FROM_PART, s1)
    if kind is LinkKind.INBOUND_DELEGATION_PORT_PORT:
        site = s1 if s1.on_composite else s2
        return LinkOrigin(OriginKind.FROM_PROVIDED_PORT, site)
    if kind is LinkKind.OUTBOUND_DELEGATION_PORT_PORT:
        site = s1 if not s1.on_composite else s2
        return LinkOrigin(OriginKind.FROM_REQUIRED_PORT, site)
    if kind is LinkKind.ASSEMBLY_PORT_PORT:
        site = s1 if (s1.port is not None and s1.port.reversed) else s2
        return LinkOrigin(OriginKind.FROM_REQUIRED_PORT, site)
    port_site = s1 if s1.port is not None else s2
    part_site = s2 if s1.port is not None else s1
    if kind is LinkKind.ASSEMBLY_PART_REQUIRED_PORT:
        return LinkOrigin(OriginKind.FROM_REQUIRED_PORT, port_site)
    if kind is LinkKind.ASSEMBLY_PART_PROVIDED_PORT:
        return LinkOrigin(OriginKind.FROM_PART, part_site)
    if kind is LinkKind.INBOUND_DELEGATION_PART_PORT:
        return LinkOrigin(OriginKind.FROM_PROVIDED_PORT, port_site)
    return LinkOrigin(OriginKind.FROM_PART, part_site)  # outbound delegation part-port


def _end_interface_set(model: Model, site: EndSite) -> set[str]:
    if site.port is not None:
        return port_interfaces(model, site.port)
    if site.part is not None:
        return class_interfaces(model, site.part.type)
    return set()


def transported_interfaces(model: Model, owner: Class, conn: Connector) -> TransportedSet:
    """The set of interfaces a connector can carry.

    Untyped: intersection of the two end interface sets (a port contributes
    its contract closure, a part the interfaces its class provides). Typed:
    the origin-side port closure intersected with the pointed type's closure,
    so the association narrows the channel. Not computable for part-part
    links, forbidden links, or associations with no navigable end.
    """
    kind = classify_link(model, owner, conn)
    if kind in (LinkKind.ASSEMBLY_PART_PART, LinkKind.FORBIDDEN):
        return TransportedSet(frozenset(), False)
    s1, s2 = resolve_ends(model, owner, conn)
    assoc = model.find_association(conn.association) if conn.association else None
    if assoc is not None:
        pointed = assoc.pointed_end()
        if pointed is None:
            return TransportedSet(frozenset(), False)
        origin = link_origin(model, owner, conn)
        if origin.kind in (OriginKind.FROM_PROVIDED_PORT, OriginKind.FROM_REQUIRED_PORT):
            base_site = origin.site
        else:
            base_site = s1 if s1.port is not None else s2
        assert base_site is not None and base_site.port is not None
        base = port_interfaces(model, base_site.port)
        return TransportedSet(frozenset(base & provided_interfaces(model, pointed.type)), True)
    return TransportedSet(frozenset(_end_interface_set(model, s1) & _end_interface_set(model, s2)), True)


def classifier_compatible(model: Model, end_type: str, assoc_type: str) -> bool:
    """True when an association end may govern a link end of the given type.

    The association end must name the link end's classifier or something it
    specializes: for interfaces, an ancestor (or itself); for a class against
    an interface, something the class realizes directly or indirectly; for two
    classes, the class itself or one of its superclasses.
    """
    end_is_iface = model.find_interface(end_type) is not None
    assoc_is_iface = model.find_interface(assoc_type) is not None
    if end_is_iface and assoc_is_iface:
        return assoc_type in interface_closure(model, end_type)
    if not end_is_iface and assoc_is_iface:
        return assoc_type in class_interfaces(model, end_type)
    if not end_is_iface and not assoc_is_iface:
        return assoc_type == end_type or assoc_type in parents_of(model, end_type)
    return False


def port_compatible(model: Model, port: Port, assoc_type: str) -> bool:
    """True when the port provides/requires everything the given interface covers."""
    if model.find_interface(assoc_type) is None:
        return False
    return interface_closure(model, assoc_type) <= port_interfaces(model, port)
