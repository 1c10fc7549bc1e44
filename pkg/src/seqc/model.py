"""Meta-model for concurrent robot action sequences.

A Program is a set of uniquely named action instances wired into a
dependency graph: each action carries constraint edges naming the
actions that must finish before it may start.  Actions are placed on
resource instances, which execute one action at a time, so parallelism
only ever arises between actions on distinct resources.  Global
variables form the data space that actions read through argument
bindings and write through return bindings.

All types are immutable after construction.  Collections are normalized
to a canonical order (sorted by name) so that equal programs compare
equal and serialize identically regardless of how they were assembled.

The graph queries at the bottom (successors, ancestors,
potentially_parallel, topological_order, critical_path_length) are the
shared vocabulary of the validator and the simulator.
"""

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from .errors import (
    CyclicGraphError,
    NonPositiveDurationError,
    SameActionError,
    UnknownActionError,
    UnresolvedReferenceError,
)


class ConstraintOperator(Enum):
    """Temporal operator of an execution constraint.

    Ordering is the only supported relation: the predecessor must finish
    before the constrained action starts.
    """

    PRECEDES = "Precedes"


@dataclass(frozen=True)
class ConstraintEdge:
    """One incoming precedence edge, stored on the successor action."""

    predecessor: str
    operator: ConstraintOperator = ConstraintOperator.PRECEDES

    def __post_init__(self):
        if not isinstance(self.operator, ConstraintOperator):
            raise ValueError(f"unsupported constraint operator: {self.operator!r}")


def _normalize_literal(value):
    # Composite literals are dicts of field name to value; sort the keys so
    # that equal values always serialize to identical bytes.
    if isinstance(value, dict):
        return {name: _normalize_literal(value[name]) for name in sorted(value)}
    return value


@dataclass(frozen=True)
class ArgBinding:
    """Binds one declared parameter to a global variable or a literal value."""

    param: str
    variable: str | None = None
    value: Any = None

    def __post_init__(self):
        if (self.variable is None) == (self.value is None):
            raise ValueError(
                f"argument {self.param!r} must bind exactly one of a variable or a literal"
            )
        if self.value is not None:
            object.__setattr__(self, "value", _normalize_literal(self.value))


@dataclass(frozen=True)
class ActionInstance:
    """A named occurrence of a DSL action type, placed on a resource instance."""

    name: str
    action_type: str
    resource: str
    args: tuple[ArgBinding, ...] = ()
    return_to: str | None = None
    constraints: tuple[ConstraintEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        edges = sorted(set(self.constraints), key=lambda e: e.predecessor)
        for edge in edges:
            if edge.predecessor == self.name:
                raise CyclicGraphError((self.name,), f"action {self.name!r} precedes itself")
        object.__setattr__(self, "constraints", tuple(edges))

    @property
    def predecessors(self) -> frozenset[str]:
        return frozenset(edge.predecessor for edge in self.constraints)


@dataclass(frozen=True)
class ResourceInstance:
    """A concrete device or computation unit; executes one action at a time."""

    name: str
    component_type: str


@dataclass(frozen=True)
class VariableDecl:
    """A global variable of the program's data space."""

    name: str
    type_name: str
    init: Any = None

    def __post_init__(self):
        if self.init is not None:
            object.__setattr__(self, "init", _normalize_literal(self.init))


@dataclass(frozen=True)
class Program:
    """A complete task: resources, global variables, and the action graph.

    Construction sorts resources, variables, and actions by name and
    requires every action's resource reference to resolve.  Duplicate
    names, dangling variable references, and cycles are representable;
    they are reported by the validator (or rejected by the XML loader),
    not here, so that diagnostics can cover the whole program at once.
    """

    name: str
    robot_class: str
    resources: tuple[ResourceInstance, ...] = ()
    variables: tuple[VariableDecl, ...] = ()
    actions: tuple[ActionInstance, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "resources", tuple(sorted(self.resources, key=lambda r: r.name))
        )
        object.__setattr__(
            self, "variables", tuple(sorted(self.variables, key=lambda v: v.name))
        )
        object.__setattr__(
            self, "actions", tuple(sorted(self.actions, key=lambda a: a.name))
        )
        declared = {r.name for r in self.resources}
        for action in self.actions:
            if action.resource not in declared:
                raise UnresolvedReferenceError(
                    f"action {action.name!r} runs on undeclared resource {action.resource!r}"
                )

    def action(self, name: str) -> ActionInstance:
        for candidate in self.actions:
            if candidate.name == name:
                return candidate
        raise UnknownActionError(f"program {self.name!r} has no action named {name!r}")

    def action_names(self) -> list[str]:
        return [a.name for a in self.actions]

    def variable(self, name: str) -> VariableDecl | None:
        for candidate in self.variables:
            if candidate.name == name:
                return candidate
        return None


def _predecessor_map(program: Program) -> dict[str, set[str]]:
    return {a.name: set(a.predecessors) for a in program.actions}


def _successor_map(program: Program) -> dict[str, set[str]]:
    forward: dict[str, set[str]] = {a.name: set() for a in program.actions}
    for action in program.actions:
        for pred in action.predecessors:
            forward.setdefault(pred, set()).add(action.name)
    return forward


def _find_cycle(program: Program) -> tuple[str, ...] | None:
    """Return one concrete cycle as an ordered node tuple, or None."""
    preds = _predecessor_map(program)
    color: dict[str, int] = {}  # 0 unseen, 1 on stack, 2 done
    stack: list[str] = []

    def visit(node: str) -> tuple[str, ...] | None:
        color[node] = 1
        stack.append(node)
        for pred in sorted(preds.get(node, ())):
            if pred not in preds:
                continue  # dangling predecessor; reported elsewhere
            state = color.get(pred, 0)
            if state == 1:
                cycle = stack[stack.index(pred):]
                pivot = cycle.index(min(cycle))
                return tuple(cycle[pivot:] + cycle[:pivot])
            if state == 0:
                found = visit(pred)
                if found:
                    return found
        stack.pop()
        color[node] = 2
        return None

    for name in sorted(preds):
        if color.get(name, 0) == 0:
            found = visit(name)
            if found:
                return found
    return None


def successors(program: Program, action: str) -> frozenset[str]:
    """All actions that list `action` as a direct predecessor."""
    program.action(action)
    return frozenset(_successor_map(program).get(action, ()))


def ancestors(program: Program, action: str) -> frozenset[str]:
    """All actions from which a directed path reaches `action`.

    The graph must be acyclic; a cycle anywhere in the program raises
    CyclicGraphError because reachability is not meaningful on it.
    """
    program.action(action)
    cycle = _find_cycle(program)
    if cycle:
        raise CyclicGraphError(cycle)
    preds = _predecessor_map(program)
    seen: set[str] = set()
    frontier = [action]
    while frontier:
        node = frontier.pop()
        for pred in preds.get(node, ()):
            if pred not in seen and pred in preds:
                seen.add(pred)
                frontier.append(pred)
    return frozenset(seen)


def potentially_parallel(program: Program, a: str, b: str) -> bool:
    """True iff `a` and `b` can overlap in time under some legal schedule.

    Two actions can be simultaneous exactly when neither must wait for
    the other and they occupy different resource instances; a shared
    resource serializes them regardless of ordering.
    """
    if a == b:
        raise SameActionError(f"potential parallelism is defined for distinct actions, got {a!r} twice")
    action_a = program.action(a)
    action_b = program.action(b)
    if action_a.resource == action_b.resource:
        return False
    return a not in ancestors(program, b) and b not in ancestors(program, a)


def topological_order(program: Program) -> list[str]:
    """A precedence-compatible total order, ties broken by action name."""
    preds = _predecessor_map(program)
    indegree = {name: 0 for name in preds}
    succs = _successor_map(program)
    for name, incoming in preds.items():
        indegree[name] = sum(1 for p in incoming if p in preds)
    ready = [name for name, deg in sorted(indegree.items()) if deg == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for succ in succs.get(node, ()):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(ready, succ)
    if len(order) != len(preds):
        cycle = _find_cycle(program)
        raise CyclicGraphError(cycle or tuple(sorted(set(preds) - set(order))))
    return order


def _checked_duration(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise NonPositiveDurationError(
            f"duration of {name!r} must be a positive integer tick count, got {value!r}"
        )
    return value


def critical_path_length(program: Program, durations: Mapping[str, int] | None = None) -> int:
    """Length in ticks of the longest weighted path through the graph.

    Actions missing from `durations` default to one tick.  This is the
    lower bound on any schedule's makespan.
    """
    durations = durations or {}
    finish: dict[str, int] = {}
    longest = 0
    for name in topological_order(program):
        duration = _checked_duration(name, durations.get(name, 1))
        action = program.action(name)
        start = max((finish[p] for p in action.predecessors if p in finish), default=0)
        finish[name] = start + duration
        longest = max(longest, finish[name])
    return longest
