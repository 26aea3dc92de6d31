"""Seeded random model builders for property and acceptance tests."""

from __future__ import annotations

import random

from compocheck.model import (
    Association,
    AssociationEnd,
    Class,
    ClassKind,
    Connector,
    EndRef,
    Interface,
    Model,
    Part,
    Port,
)


def random_classifier_dag(rng: random.Random, max_classifiers: int = 20) -> Model:
    """A random generalization/realization DAG (acyclic by construction:
    generals only point at earlier declarations), with some interface groups
    and one port per class so every closure function has something to chew on."""
    n_interfaces = rng.randint(1, max(1, max_classifiers - 2))
    n_classes = rng.randint(1, max(1, max_classifiers - n_interfaces))
    model = Model()
    for i in range(n_interfaces):
        earlier = [f"I{j}" for j in range(i)]
        generals = rng.sample(earlier, k=min(len(earlier), rng.randint(0, 3)))
        is_group = len(generals) >= 2 and rng.random() < 0.25
        model.interfaces.append(Interface(name=f"I{i}", generals=generals, is_group=is_group))
    interface_names = [i.name for i in model.interfaces]
    for c in range(n_classes):
        earlier = [f"K{j}" for j in range(c)]
        generals = rng.sample(earlier, k=min(len(earlier), rng.randint(0, 2)))
        realizes = rng.sample(interface_names, k=min(len(interface_names), rng.randint(0, 3)))
        cls = Class(name=f"K{c}", kind=ClassKind.ACTIVE, generals=generals, realizes=realizes)
        cls.ports.append(Port(name="p", contract=rng.choice(interface_names),
                              reversed=rng.random() < 0.5))
        model.classes.append(cls)
    return model


def random_wellformed_model(rng: random.Random, max_depth: int = 3) -> Model:
    """A random composite hierarchy that satisfies every rule by construction.

    Leaves realize fresh interfaces; each composite exposes one or two provided
    boundary ports whose contract (a group when needed) covers exactly the
    union of the interfaces its children provide, wired with untyped inbound
    delegations. The root may additionally grow an outbound required chain and
    a part-to-port link typed with an association.
    """
    model = Model()
    counters = {"iface": 0, "cls": 0}
    groups: dict[tuple[str, ...], str] = {}

    def new_interface() -> str:
        name = f"S{counters['iface']}"
        counters["iface"] += 1
        model.interfaces.append(Interface(name=name, operations=[f"do{name}"]))
        return name

    def group_for(members: list[str]) -> str:
        key = tuple(sorted(members))
        if len(key) == 1:
            return key[0]
        if key not in groups:
            name = f"G{len(groups)}"
            groups[key] = name
            model.interfaces.append(Interface(name=name, generals=list(key), is_group=True))
        return groups[key]

    def new_class_name() -> str:
        name = f"C{counters['cls']}"
        counters["cls"] += 1
        return name

    def gen_component(depth: int, force_composite: bool = False) -> tuple[Class, list[str]]:
        name = new_class_name()
        if depth == 0 or (not force_composite and rng.random() < 0.4):
            provided = [new_interface() for _ in range(rng.randint(1, 3))]
            cls = Class(name=name, kind=ClassKind.ACTIVE, realizes=list(provided))
            model.classes.append(cls)
            return cls, sorted(provided)
        children = [gen_component(depth - 1) for _ in range(rng.randint(1, 3))]
        cls = Class(name=name, kind=ClassKind.ACTIVE)
        for i, (child_cls, _) in enumerate(children):
            multiplicity = 2 if rng.random() < 0.12 else 1
            cls.parts.append(Part(name=f"p{i}", type=child_cls.name, multiplicity=multiplicity))
        indices = list(range(len(children)))
        if len(children) >= 2 and rng.random() < 0.4:
            cut = rng.randint(1, len(children) - 1)
            batches = [indices[:cut], indices[cut:]]
        else:
            batches = [indices]
        provided_all: list[str] = []
        for b, batch in enumerate(batches):
            union = sorted(set().union(*(set(children[i][1]) for i in batch)))
            port_name = f"b{b}"
            cls.ports.append(Port(name=port_name, contract=group_for(union)))
            for i in batch:
                child_cls, _ = children[i]
                if child_cls.is_composite:
                    for child_port in child_cls.ports:
                        if not child_port.reversed:
                            cls.connectors.append(Connector(
                                end1=EndRef(port=port_name),
                                end2=EndRef(part=f"p{i}", port=child_port.name)))
                else:
                    cls.connectors.append(Connector(
                        end1=EndRef(port=port_name), end2=EndRef(part=f"p{i}")))
            provided_all.extend(union)
        model.classes.append(cls)
        return cls, sorted(provided_all)

    root_cls, _ = gen_component(rng.randint(1, max_depth), force_composite=True)

    if rng.random() < 0.5:  # outbound relay: part's required port delegated to the boundary
        out_iface = new_interface()
        relay = Class(name=new_class_name(), kind=ClassKind.ACTIVE,
                      ports=[Port(name="rq", contract=out_iface, reversed=True)])
        model.classes.append(relay)
        root_cls.parts.append(Part(name="rly", type=relay.name))
        root_cls.ports.append(Port(name="rbound", contract=out_iface, reversed=True))
        root_cls.connectors.append(Connector(end1=EndRef(part="rly", port="rq"),
                                             end2=EndRef(port="rbound")))
    if rng.random() < 0.5:  # outbound sender: part wired straight to a boundary port, typed
        out_iface = new_interface()
        sender = Class(name=new_class_name(), kind=ClassKind.ACTIVE)
        model.classes.append(sender)
        root_cls.parts.append(Part(name="snd", type=sender.name))
        root_cls.ports.append(Port(name="sbound", contract=out_iface, reversed=True))
        assoc = Association(name="itsOut",
                            end1=AssociationEnd(sender.name, navigable=False),
                            end2=AssociationEnd(out_iface, navigable=True))
        model.associations.append(assoc)
        root_cls.connectors.append(Connector(end1=EndRef(part="snd"),
                                             end2=EndRef(port="sbound"),
                                             association="itsOut"))
    model.root = root_cls.name
    return model


def provided_origin_connectors(model: Model) -> list[tuple[Class, int]]:
    """(class, index) of every connector starting at a provided port; dropping
    one of these breaks a delivery path without touching any other rule."""
    from compocheck.type_system import OriginKind, link_origin

    out = []
    for cls, idx, conn in model.iter_connectors():
        if link_origin(model, cls, conn).kind is OriginKind.FROM_PROVIDED_PORT:
            out.append((cls, idx))
    return out


def drop_connector(model: Model, cls_name: str, index: int) -> Model:
    """A deep copy of the model with one connector removed."""
    from compocheck.ingest import parse_json, serialize_json

    clone = parse_json(serialize_json(model))
    clone_cls = clone.find_class(cls_name)
    del clone_cls.connectors[index]
    return clone


def relay_chain_model(length: int) -> Model:
    """``length`` nested composites, each relaying one provided port inward,
    ending at a leaf that realizes the transported interface."""
    model = Model()
    model.interfaces.append(Interface(name="X", operations=["ping"]))
    model.classes.append(Class(name="Z", kind=ClassKind.ACTIVE, realizes=["X"]))
    for level in range(length, 0, -1):
        inner_is_leaf = level == length
        inner_type = "Z" if inner_is_leaf else f"R{level + 1}"
        cls = Class(name=f"R{level}", kind=ClassKind.ACTIVE,
                    parts=[Part(name="inner", type=inner_type)],
                    ports=[Port(name="p", contract="X")])
        if inner_is_leaf:
            cls.connectors.append(Connector(end1=EndRef(port="p"), end2=EndRef(part="inner")))
        else:
            cls.connectors.append(Connector(end1=EndRef(port="p"),
                                            end2=EndRef(part="inner", port="p")))
        model.classes.append(cls)
    model.root = "R1"
    return model


def random_fanout_port_model(rng: random.Random, universe: int = 10,
                             ) -> tuple[Model, Class, Port, list[set[str]]]:
    """A hub whose required port fans out over 2-5 untyped links, each link
    transporting a prescribed random subset of a fixed interface universe.

    Returns (model, hub class, hub port, the subsets in link order).
    """
    model = Model()
    names = [f"U{i}" for i in range(universe)]
    for name in names:
        model.interfaces.append(Interface(name=name, operations=[f"do{name}"]))
    model.interfaces.append(Interface(name="All", generals=list(names), is_group=True))
    hub = Class(name="Hub", kind=ClassKind.ACTIVE,
                ports=[Port(name="r", contract="All", reversed=True)])
    model.classes.append(hub)
    composite = Class(name="Net", kind=ClassKind.ACTIVE,
                      parts=[Part(name="hub", type="Hub")])
    subsets: list[set[str]] = []
    for i in range(rng.randint(2, 5)):
        subset = set(rng.sample(names, k=rng.randint(1, 4)))
        subsets.append(subset)
        provider = Class(name=f"Prov{i}", kind=ClassKind.ACTIVE, realizes=sorted(subset))
        model.classes.append(provider)
        composite.parts.append(Part(name=f"t{i}", type=f"Prov{i}"))
        composite.connectors.append(Connector(end1=EndRef(part="hub", port="r"),
                                              end2=EndRef(part=f"t{i}")))
    model.classes.append(composite)
    return model, hub, hub.ports[0], subsets
