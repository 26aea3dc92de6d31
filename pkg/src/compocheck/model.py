"""Core representation of hierarchical component models.

A :class:`Model` is a flat, name-keyed universe of interfaces, classes and
associations. Composite structure lives inside classes: role-named parts,
contract-typed ports and binary connectors between two end references. All
cross references are plain names; :func:`validate_integrity` guarantees they
resolve before any derived computation runs.

Ports are unidirectional: a port provides its contract unless it is marked
``reversed``, in which case it requires it. Every non-group interface ``I``
owns a default forwarding association ``deleg_I`` (an ``I`` to ``I``
association whose second end is navigable); :func:`synthesize_deleg_associations`
adds the ones a model omits.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .diagnostics import Diagnostic, SourceSpan, error

DELEG_PREFIX = "deleg_"


def deleg_name(interface_name: str) -> str:
    return DELEG_PREFIX + interface_name


class ClassKind(str, Enum):
    ACTIVE = "active"
    PASSIVE = "passive"
    PROTECTED = "protected"
    OBSERVER = "observer"


@dataclass
class Interface:
    name: str
    generals: list[str] = field(default_factory=list)
    is_group: bool = False
    operations: list[str] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Attribute:
    name: str
    type: str


@dataclass
class Part:
    """A role-named instance slot inside a composite class."""

    name: str
    type: str
    multiplicity: int = 1
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class Port:
    name: str
    contract: str
    reversed: bool = False
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class EndRef:
    """One connector end: a part, a port of a part, or a port of the owner.

    Exactly one of the three shapes is legal: ``part`` alone, ``part`` plus
    ``port`` (the port belongs to the part's class), or ``port`` alone (the
    port belongs to the class owning the connector).
    """

    part: str | None = None
    port: str | None = None

    def describe(self) -> str:
        if self.part and self.port:
            return f"{self.part}.{self.port}"
        if self.part:
            return self.part
        if self.port:
            return f"self.{self.port}"
        return "<empty>"


@dataclass
class Connector:
    end1: EndRef
    end2: EndRef
    association: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def describe(self) -> str:
        via = f" via {self.association}" if self.association else ""
        return f"{self.end1.describe()} -- {self.end2.describe()}{via}"


@dataclass
class AssociationEnd:
    type: str
    navigable: bool = False


@dataclass
class Association:
    name: str
    end1: AssociationEnd
    end2: AssociationEnd
    is_deleg_default: bool = False
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def is_bidirectional(self) -> bool:
        return self.end1.navigable and self.end2.navigable

    @property
    def is_non_navigable(self) -> bool:
        return not (self.end1.navigable or self.end2.navigable)

    def pointed_end(self) -> AssociationEnd | None:
        """The end requests are sent toward; end2 wins for bidirectional ones."""
        if self.end2.navigable:
            return self.end2
        if self.end1.navigable:
            return self.end1
        return None

    def start_end(self) -> AssociationEnd | None:
        if self.end2.navigable:
            return self.end1
        if self.end1.navigable:
            return self.end2
        return None


@dataclass
class Class:
    name: str
    kind: ClassKind = ClassKind.PASSIVE
    generals: list[str] = field(default_factory=list)
    realizes: list[str] = field(default_factory=list)
    usages: list[str] = field(default_factory=list)
    attributes: list[Attribute] = field(default_factory=list)
    parts: list[Part] = field(default_factory=list)
    ports: list[Port] = field(default_factory=list)
    connectors: list[Connector] = field(default_factory=list)
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def is_composite(self) -> bool:
        return bool(self.parts)

    def find_part(self, name: str) -> Part | None:
        for part in self.parts:
            if part.name == name:
                return part
        return None

    def find_port(self, name: str) -> Port | None:
        for port in self.ports:
            if port.name == name:
                return port
        return None


@dataclass
class Model:
    interfaces: list[Interface] = field(default_factory=list)
    classes: list[Class] = field(default_factory=list)
    associations: list[Association] = field(default_factory=list)
    root: str | None = None

    def find_interface(self, name: str) -> Interface | None:
        for iface in self.interfaces:
            if iface.name == name:
                return iface
        return None

    def find_class(self, name: str) -> Class | None:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    def find_association(self, name: str) -> Association | None:
        for assoc in self.associations:
            if assoc.name == name:
                return assoc
        return None

    def find_classifier(self, name: str) -> Interface | Class | Association | None:
        return self.find_interface(name) or self.find_class(name) or self.find_association(name)

    def connector_path(self, cls: Class, index: int) -> str:
        return f"{cls.name}#{index}"

    def iter_connectors(self):
        """Yield (owning class, index, connector) in declaration order."""
        for cls in self.classes:
            for idx, conn in enumerate(cls.connectors):
                yield cls, idx, conn


class ModelError(Exception):
    """Base for errors carrying structured diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.render() for d in diagnostics))


class DelegConflictError(ModelError):
    """A user element occupies a ``deleg_`` name a synthesized association needs."""


class UnknownPathError(ModelError):
    """An element path did not resolve (code E005)."""


def _duplicates(names: list[str]) -> list[str]:
    seen: set[str] = set()
    dups: list[str] = []
    for name in names:
        if name in seen and name not in dups:
            dups.append(name)
        seen.add(name)
    return dups


def _generalization_cycles(pairs: list[tuple[str, list[str]]]) -> list[list[str]]:
    """Cycles in a name -> generals graph, each reported once, in declaration order."""
    graph = {name: [g for g in generals if any(g == n for n, _ in pairs)] for name, generals in pairs}
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: WHITE for name in graph}
    cycles: list[list[str]] = []
    in_cycle: set[str] = set()

    def visit(node: str, stack: list[str]) -> None:
        color[node] = GRAY
        stack.append(node)
        for succ in graph[node]:
            if color[succ] == GRAY:
                cycle = stack[stack.index(succ):]
                if not in_cycle.intersection(cycle):
                    cycles.append(list(cycle))
                    in_cycle.update(cycle)
            elif color[succ] == WHITE:
                visit(succ, stack)
        stack.pop()
        color[node] = BLACK

    for name, _ in pairs:
        if color[name] == WHITE:
            visit(name, [])
    return cycles


def validate_integrity(model: Model) -> list[Diagnostic]:
    """Referential and structural sanity of a model (codes E001-E009).

    Returns an empty list exactly when every cross reference resolves to an
    element of the right kind, names are unique within their namespace, the
    generalization graphs are acyclic, and parts/ports/connectors are shaped
    legally. Connector associations named ``deleg_I`` for a declared non-group
    interface ``I`` are accepted even before synthesis runs.
    """
    diags: list[Diagnostic] = []

    def emit(code: str, subject: str, message: str, related: list[str] | None = None) -> None:
        diags.append(error(code, subject, message, related))

    classifier_names = (
        [i.name for i in model.interfaces]
        + [c.name for c in model.classes]
        + [a.name for a in model.associations]
    )
    for name in _duplicates(classifier_names):
        emit("E002", name, f"the classifier name '{name}' is declared more than once")

    interface_names = {i.name for i in model.interfaces}
    class_names = {c.name for c in model.classes}

    def synthesizable(name: str) -> bool:
        if not name.startswith(DELEG_PREFIX):
            return False
        iface = model.find_interface(name[len(DELEG_PREFIX):])
        return iface is not None and not iface.is_group

    for iface in model.interfaces:
        for gen in iface.generals:
            if gen not in interface_names:
                if model.find_classifier(gen) is not None:
                    emit("E009", iface.name, f"general '{gen}' of interface '{iface.name}' is not an interface")
                else:
                    emit("E001", iface.name, f"interface '{iface.name}' inherits undeclared interface '{gen}'")
        if iface.is_group and len(iface.generals) < 2:
            emit("E008", iface.name, f"interface group '{iface.name}' must bundle at least two interfaces")

    for cls in model.classes:
        member_names = [p.name for p in cls.parts] + [p.name for p in cls.ports]
        for name in _duplicates(member_names):
            emit("E002", f"{cls.name}.{name}", f"class '{cls.name}' declares '{name}' more than once")
        for gen in cls.generals:
            if gen not in class_names:
                if model.find_classifier(gen) is not None:
                    emit("E009", cls.name, f"general '{gen}' of class '{cls.name}' is not a class")
                else:
                    emit("E001", cls.name, f"class '{cls.name}' inherits undeclared class '{gen}'")
        for group_name, refs in (("realizes", cls.realizes), ("uses", cls.usages)):
            for ref in refs:
                if ref not in interface_names:
                    if model.find_classifier(ref) is not None:
                        emit("E009", cls.name, f"'{cls.name}' {group_name} '{ref}', which is not an interface")
                    else:
                        emit("E001", cls.name, f"'{cls.name}' {group_name} undeclared interface '{ref}'")
        for attr in cls.attributes:
            if model.find_classifier(attr.type) is None:
                emit("E001", f"{cls.name}.{attr.name}", f"attribute type '{attr.type}' is not declared")
        for part in cls.parts:
            subject = f"{cls.name}.{part.name}"
            if part.type not in class_names:
                if model.find_classifier(part.type) is not None:
                    emit("E009", subject, f"part '{part.name}' is typed by '{part.type}', which is not a class")
                else:
                    emit("E001", subject, f"part '{part.name}' is typed by undeclared class '{part.type}'")
            if part.multiplicity < 1:
                emit("E007", subject, f"part '{part.name}' has multiplicity {part.multiplicity}; it must be at least 1")
        for port in cls.ports:
            subject = f"{cls.name}.{port.name}"
            if port.contract not in interface_names:
                if model.find_classifier(port.contract) is not None:
                    emit("E009", subject, f"port contract '{port.contract}' is not an interface")
                else:
                    emit("E001", subject, f"port '{port.name}' has undeclared contract '{port.contract}'")
        for idx, conn in enumerate(cls.connectors):
            subject = model.connector_path(cls, idx)
            for ref in (conn.end1, conn.end2):
                if ref.part is None and ref.port is None:
                    emit("E006", subject, "connector end names neither a part nor a port")
                elif ref.part is not None:
                    part = cls.find_part(ref.part)
                    if part is None:
                        emit("E001", subject, f"connector end names unknown part '{ref.part}'")
                    elif ref.port is not None:
                        part_cls = model.find_class(part.type)
                        if part_cls is not None and part_cls.find_port(ref.port) is None:
                            emit("E001", subject,
                                 f"part '{ref.part}' of type '{part.type}' has no port '{ref.port}'")
                else:
                    if cls.find_port(ref.port) is None:
                        emit("E001", subject, f"class '{cls.name}' has no port '{ref.port}'")
            if conn.association is not None and model.find_association(conn.association) is None:
                if not synthesizable(conn.association):
                    emit("E001", subject, f"connector is typed with undeclared association '{conn.association}'")

    for assoc in model.associations:
        for end in (assoc.end1, assoc.end2):
            target = model.find_classifier(end.type)
            if target is None:
                emit("E001", assoc.name, f"association end type '{end.type}' is not declared")
            elif isinstance(target, Association):
                emit("E009", assoc.name, f"association end type '{end.type}' is an association")

    for cycle in _generalization_cycles([(i.name, i.generals) for i in model.interfaces]):
        emit("E003", cycle[0], "generalization cycle: " + " -> ".join(cycle + [cycle[0]]), cycle[1:])
    for cycle in _generalization_cycles([(c.name, c.generals) for c in model.classes]):
        emit("E003", cycle[0], "generalization cycle: " + " -> ".join(cycle + [cycle[0]]), cycle[1:])

    if model.root is not None and model.find_class(model.root) is None:
        emit("E001", model.root, f"root class '{model.root}' is not declared")

    diags.sort(key=Diagnostic.sort_key)
    return diags


def synthesize_deleg_associations(model: Model) -> Model:
    """Add the default ``deleg_I`` association for every non-group interface.

    Idempotent: interfaces that already own a compatible ``deleg_I`` (both ends
    typed by ``I``, at least one navigable) are left alone. A user element that
    occupies a needed ``deleg_`` name with an incompatible shape raises
    :class:`DelegConflictError` (code E004).
    """
    conflicts: list[Diagnostic] = []
    additions: list[Association] = []
    for iface in model.interfaces:
        if iface.is_group:
            continue
        name = deleg_name(iface.name)
        existing = model.find_classifier(name)
        if existing is None:
            additions.append(Association(
                name=name,
                end1=AssociationEnd(iface.name, navigable=False),
                end2=AssociationEnd(iface.name, navigable=True),
                is_deleg_default=True,
            ))
            continue
        if isinstance(existing, Association):
            if existing.end1.type == iface.name and existing.end2.type == iface.name \
                    and not existing.is_non_navigable:
                continue
            conflicts.append(error(
                "E004", name,
                f"association '{name}' must connect '{iface.name}' to itself with a navigable end "
                f"to serve as the default forwarding association",
            ))
        else:
            conflicts.append(error(
                "E004", name,
                f"the name '{name}' is reserved for the default forwarding association of '{iface.name}'",
            ))
    if conflicts:
        raise DelegConflictError(conflicts)
    if not additions:
        return model
    return replace(model, associations=model.associations + additions)


def without_synthesized(model: Model) -> Model:
    """A copy of the model with synthesized deleg associations removed."""
    kept = [a for a in model.associations if not a.is_deleg_default]
    if len(kept) == len(model.associations):
        return model
    return replace(model, associations=kept)


def resolve(model: Model, path: str):
    """Look up an element by path: ``Name``, ``Class.member`` or ``Class#index``.

    Returns the Interface/Class/Association/Part/Port/Connector, or raises
    :class:`UnknownPathError` (code E005).
    """
    def fail(message: str):
        raise UnknownPathError([error("E005", path, message)])

    if "#" in path:
        cls_name, _, index_text = path.partition("#")
        cls = model.find_class(cls_name)
        if cls is None:
            fail(f"no class named '{cls_name}'")
        try:
            index = int(index_text)
        except ValueError:
            fail(f"'{index_text}' is not a connector index")
        if not 0 <= index < len(cls.connectors):
            fail(f"class '{cls_name}' has {len(cls.connectors)} connectors; index {index} is out of range")
        return cls.connectors[index]
    if "." in path:
        cls_name, _, member = path.partition(".")
        cls = model.find_class(cls_name)
        if cls is None:
            fail(f"no class named '{cls_name}'")
        element = cls.find_part(member) or cls.find_port(member)
        if element is None:
            fail(f"class '{cls_name}' has no part or port named '{member}'")
        return element
    element = model.find_classifier(path)
    if element is None:
        fail(f"no element named '{path}'")
    return element
