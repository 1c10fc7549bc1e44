"""Graph queries on the core program model."""

import random

import pytest

from seqc import model
from seqc.errors import (
    CyclicGraphError,
    NonPositiveDurationError,
    SameActionError,
    UnknownActionError,
    UnresolvedReferenceError,
)
from seqc.model import (
    ActionInstance,
    ArgBinding,
    ConstraintEdge,
    ConstraintOperator,
    Program,
    ResourceInstance,
)
from support import (
    ancestors_oracle,
    critical_path_oracle,
    five_stage,
    make_dsl,
    make_program,
    random_setup,
    with_edge,
)


def test_five_stage_successors():
    _, program = five_stage()
    assert model.successors(program, "A") == {"D", "E"}
    assert model.successors(program, "B") == {"D"}
    assert model.successors(program, "E") == frozenset()


def test_five_stage_ancestors():
    _, program = five_stage()
    assert model.ancestors(program, "E") == {"A", "B", "C", "D"}
    assert model.ancestors(program, "D") == {"A", "B"}
    assert model.ancestors(program, "A") == frozenset()


def test_five_stage_topological_order():
    _, program = five_stage()
    assert model.topological_order(program) == ["A", "B", "C", "D", "E"]


def test_five_stage_critical_path():
    _, program = five_stage()
    assert model.critical_path_length(program) == 3
    assert model.critical_path_length(program, {"C": 5}) == 6


def test_unknown_action_rejected():
    _, program = five_stage()
    with pytest.raises(UnknownActionError):
        model.successors(program, "Z")
    with pytest.raises(UnknownActionError):
        model.ancestors(program, "Z")


def test_potentially_parallel():
    _, program = five_stage()
    assert model.potentially_parallel(program, "A", "B")
    assert model.potentially_parallel(program, "B", "C")
    assert not model.potentially_parallel(program, "A", "D")
    assert not model.potentially_parallel(program, "D", "A")
    assert not model.potentially_parallel(program, "B", "E")


def test_potentially_parallel_same_resource_is_serial():
    _, program = five_stage(shared=True)
    assert not model.potentially_parallel(program, "A", "B")


def test_potentially_parallel_same_action():
    _, program = five_stage()
    with pytest.raises(SameActionError):
        model.potentially_parallel(program, "A", "A")


def test_topological_order_breaks_ties_lexicographically():
    dsl = make_dsl({"Station": ["Step"]})
    program = make_program(
        dsl,
        [(n, "Step", "r1") for n in ("z", "m", "a")],
        edges=[("z", "a")],
    )
    # m and z are both ready at the start; m wins the tie, then z, and a
    # only becomes ready once z is placed.
    assert model.topological_order(program) == ["m", "z", "a"]


def test_topological_order_is_a_greedy_smallest_extension():
    rng = random.Random(7)
    for _ in range(100):
        _, program = random_setup(rng)
        order = model.topological_order(program)
        assert sorted(order) == program.action_names()
        preds = {a.name: set(a.predecessors) for a in program.actions}
        placed: set[str] = set()
        for chosen in order:
            ready = {
                name
                for name in program.action_names()
                if name not in placed and preds[name] <= placed
            }
            assert chosen == min(ready)
            placed.add(chosen)


def test_ancestors_match_path_enumeration():
    rng = random.Random(11)
    for _ in range(120):
        _, program = random_setup(rng)
        for name in program.action_names():
            assert model.ancestors(program, name) == ancestors_oracle(program, name)


def test_critical_path_matches_path_enumeration():
    rng = random.Random(13)
    for _ in range(120):
        _, program = random_setup(rng)
        durations = {
            name: rng.randint(1, 9) for name in program.action_names()
        }
        assert model.critical_path_length(program, durations) == critical_path_oracle(
            program, durations
        )
        assert model.critical_path_length(program) == critical_path_oracle(program)


def test_cycle_is_detected():
    _, program = five_stage()
    looped = with_edge(program, "E", "A")
    with pytest.raises(CyclicGraphError) as exc_info:
        model.topological_order(looped)
    cycle = set(exc_info.value.cycle)
    assert cycle <= {"A", "B", "C", "D", "E"}
    assert len(cycle) >= 2
    with pytest.raises(CyclicGraphError):
        model.ancestors(looped, "B")


def test_self_loop_rejected_at_construction():
    with pytest.raises(CyclicGraphError):
        ActionInstance("A", "Step", "r1", constraints=(ConstraintEdge("A"),))


def test_two_cycle_reported_with_members():
    dsl = make_dsl({"Station": ["Step"]})
    program = make_program(
        dsl,
        [("x", "Step", "r1"), ("y", "Step", "r1")],
        edges=[("x", "y"), ("y", "x")],
    )
    with pytest.raises(CyclicGraphError) as exc_info:
        model.topological_order(program)
    assert set(exc_info.value.cycle) == {"x", "y"}


def test_duplicate_constraint_edges_collapse():
    action = ActionInstance(
        "b", "Step", "r1",
        constraints=(ConstraintEdge("a"), ConstraintEdge("a"), ConstraintEdge("c")),
    )
    assert action.predecessors == {"a", "c"}
    assert [e.predecessor for e in action.constraints] == ["a", "c"]


def test_constraint_operator_is_checked():
    assert ConstraintEdge("a").operator is ConstraintOperator.PRECEDES
    with pytest.raises(ValueError):
        ConstraintEdge("a", operator="Precedes")


def test_arg_binding_requires_exactly_one_side():
    with pytest.raises(ValueError):
        ArgBinding("p")
    with pytest.raises(ValueError):
        ArgBinding("p", variable="v", value=3)
    assert ArgBinding("p", variable="v").value is None
    assert ArgBinding("p", value=3).variable is None


def test_arg_binding_normalizes_composite_literals():
    binding = ArgBinding("p", value={"z": 1, "a": {"y": 2, "x": 3}})
    assert list(binding.value) == ["a", "z"]
    assert list(binding.value["a"]) == ["x", "y"]


def test_program_sorts_collections():
    dsl = make_dsl({"Station": ["Step"]})
    program = make_program(
        dsl, [("b", "Step", "r2"), ("a", "Step", "r1"), ("c", "Step", "r1")]
    )
    assert program.action_names() == ["a", "b", "c"]
    assert [r.name for r in program.resources] == ["r1", "r2"]


def test_program_rejects_undeclared_resource():
    with pytest.raises(UnresolvedReferenceError):
        Program(
            "P",
            "TestBot",
            resources=(ResourceInstance("r1", "Station"),),
            actions=(ActionInstance("a", "Step", "r9"),),
        )


def test_dangling_predecessor_is_left_to_the_validator():
    dsl = make_dsl({"Station": ["Step"]})
    program = make_program(
        dsl, [("a", "Step", "r1"), ("b", "Step", "r1")], edges=[("ghost", "b")]
    )
    assert model.topological_order(program) == ["a", "b"]
    assert model.ancestors(program, "b") == frozenset()


@pytest.mark.parametrize("bad", [0, -1, True, 1.5, "2"])
def test_durations_must_be_positive_integers(bad):
    _, program = five_stage()
    with pytest.raises(NonPositiveDurationError):
        model.critical_path_length(program, {"A": bad})


def test_critical_path_of_empty_program_is_zero():
    program = Program("Empty", "TestBot")
    assert model.critical_path_length(program) == 0
    assert model.topological_order(program) == []
