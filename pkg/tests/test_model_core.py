from __future__ import annotations

import random

import pytest

from compocheck import (
    Association,
    AssociationEnd,
    Class,
    Connector,
    DelegConflictError,
    EndRef,
    Interface,
    Model,
    Part,
    Port,
    UnknownPathError,
    deleg_name,
    parse_dsl,
    resolve,
    serialize_json,
    synthesize_deleg_associations,
    validate_integrity,
)

from oracles import has_cycle_dfs


def codes(diagnostics) -> set[str]:
    return {d.code for d in diagnostics}


def test_empty_model_is_valid():
    assert validate_integrity(Model()) == []


def test_part_typed_by_undeclared_class_is_dangling():
    model = Model(classes=[Class(name="A", parts=[Part(name="d", type="X")])])
    diags = validate_integrity(model)
    assert codes(diags) == {"E001"}
    assert diags[0].subject == "A.d"


def test_mutual_generalization_is_a_cycle():
    model = Model(classes=[Class(name="A", generals=["B"]), Class(name="B", generals=["A"])])
    assert codes(validate_integrity(model)) == {"E003"}


@pytest.mark.parametrize("seed", range(40))
def test_cycle_detection_agrees_with_dfs_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 8)
    names = [f"C{i}" for i in range(n)]
    pairs = []
    for name in names:
        succs = rng.sample(names, k=rng.randint(0, min(3, n)))
        pairs.append((name, [s for s in succs if s != name]))
    model = Model(classes=[Class(name=name, generals=generals) for name, generals in pairs])
    found = "E003" in codes(validate_integrity(model))
    assert found == has_cycle_dfs(pairs)


def test_duplicate_classifier_names_clash():
    model = Model(interfaces=[Interface(name="X")], classes=[Class(name="X")])
    assert codes(validate_integrity(model)) == {"E002"}


def test_duplicate_member_names_clash():
    model = Model(
        interfaces=[Interface(name="I")],
        classes=[
            Class(name="B"),
            Class(name="A", parts=[Part(name="m", type="B")],
                  ports=[Port(name="m", contract="I")]),
        ],
    )
    assert codes(validate_integrity(model)) == {"E002"}


def test_connector_end_shapes_are_validated():
    model = Model(classes=[Class(name="A", connectors=[
        Connector(end1=EndRef(), end2=EndRef(part="nope")),
    ])])
    diags = validate_integrity(model)
    assert codes(diags) == {"E001", "E006"}


def test_port_must_exist_on_the_part_type():
    model = Model(
        interfaces=[Interface(name="I")],
        classes=[
            Class(name="B", ports=[Port(name="q", contract="I")]),
            Class(name="A", parts=[Part(name="b", type="B")], connectors=[
                Connector(end1=EndRef(part="b", port="zz"), end2=EndRef(part="b", port="q")),
            ]),
        ],
    )
    assert codes(validate_integrity(model)) == {"E001"}


def test_multiplicity_must_be_positive():
    model = Model(classes=[Class(name="B"), Class(name="A", parts=[Part(name="b", type="B", multiplicity=0)])])
    assert codes(validate_integrity(model)) == {"E007"}


def test_interface_group_needs_two_generals():
    model = Model(interfaces=[Interface(name="I"), Interface(name="G", generals=["I"], is_group=True)])
    assert codes(validate_integrity(model)) == {"E008"}


def test_wrong_kind_references_are_flagged():
    model = Model(
        interfaces=[Interface(name="I")],
        classes=[Class(name="A", parts=[Part(name="x", type="I")], realizes=["A"])],
    )
    found = codes(validate_integrity(model))
    assert found == {"E009"}


def test_untyped_deleg_reference_is_accepted_before_synthesis():
    # connectors may name deleg_I before it is synthesized
    text = """
    interface I { op f; }
    class P active { realizes I; port q: I; }
    class A active {
      part p: P;
      port c: I;
      connector self.c , p.q via deleg_I;
    }
    """
    model = parse_dsl(text)
    assert validate_integrity(model) == []
    model = synthesize_deleg_associations(model)
    assert model.find_association("deleg_I") is not None


def test_synthesis_creates_one_deleg_per_plain_interface():
    model = Model(interfaces=[Interface(name="I"), Interface(name="J"),
                              Interface(name="IJ", generals=["I", "J"], is_group=True)])
    out = synthesize_deleg_associations(model)
    names = [a.name for a in out.associations]
    assert names == ["deleg_I", "deleg_J"]
    assert all(a.is_deleg_default for a in out.associations)
    deleg = out.find_association("deleg_I")
    assert deleg.end1.type == "I" and deleg.end2.type == "I" and deleg.end2.navigable
    # the original model is untouched
    assert model.associations == []


def test_synthesis_is_idempotent():
    model = Model(interfaces=[Interface(name="I"), Interface(name="J")])
    once = synthesize_deleg_associations(model)
    twice = synthesize_deleg_associations(once)
    assert once == twice
    assert serialize_json(once) == serialize_json(twice)


def test_synthesis_keeps_user_written_deleg():
    user = Association(name="deleg_I", end1=AssociationEnd("I"),
                       end2=AssociationEnd("I", navigable=True))
    model = Model(interfaces=[Interface(name="I")], associations=[user])
    out = synthesize_deleg_associations(model)
    assert out == model


def test_synthesis_conflict_on_incompatible_user_association():
    user = Association(name="deleg_I", end1=AssociationEnd("J"),
                       end2=AssociationEnd("K", navigable=True))
    model = Model(interfaces=[Interface(name="I"), Interface(name="J"), Interface(name="K")],
                  associations=[user])
    with pytest.raises(DelegConflictError) as err:
        synthesize_deleg_associations(model)
    assert codes(err.value.diagnostics) == {"E004"}


def test_synthesis_conflict_on_non_association_element():
    model = Model(interfaces=[Interface(name="I")], classes=[Class(name="deleg_I")])
    with pytest.raises(DelegConflictError):
        synthesize_deleg_associations(model)


def test_deleg_name_helper():
    assert deleg_name("I") == "deleg_I"


class TestResolve:
    def test_part_and_port_paths(self, delegation_model):
        part = resolve(delegation_model, "A.d")
        assert isinstance(part, Part) and part.type == "D"
        port = resolve(delegation_model, "A.pIJL")
        assert isinstance(port, Port) and port.contract == "IJL"

    def test_connector_index(self, delegation_model):
        conn = resolve(delegation_model, "A#0")
        assert isinstance(conn, Connector)
        assert conn.end1.port == "pIJL" and conn.end2.part == "d"

    def test_classifier_name(self, delegation_model):
        iface = resolve(delegation_model, "IJL")
        assert isinstance(iface, Interface) and iface.is_group

    @pytest.mark.parametrize("path", ["Nope.x", "A.zz", "A#99", "A#x", "Zzz"])
    def test_unknown_paths_raise_e005(self, delegation_model, path):
        with pytest.raises(UnknownPathError) as err:
            resolve(delegation_model, path)
        assert codes(err.value.diagnostics) == {"E005"}
