"""Static checks on programs: completeness, types, and parallelism limits.

Checks accumulate findings instead of raising, so one pass reports
everything: duplicate names, unbound parameters, dangling or mistyped
variable references, cycles, mutual-exclusion violations, and data-flow
lints (reads with no possible writer, races between parallel actions).

A program is acceptable ("ok") when no Error-severity finding exists;
warnings flag suspicious but permitted constructions.
"""

from dataclasses import dataclass
from enum import Enum

from . import model
from .dsl import RobotClassDsl
from .errors import CyclicGraphError
from .model import Program


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


class Code(str, Enum):
    """Closed set of finding identifiers."""

    DUPLICATE_NAME = "DuplicateName"
    UNBOUND_PARAMETER = "UnboundParameter"
    UNKNOWN_VARIABLE = "UnknownVariable"
    TYPE_MISMATCH = "TypeMismatch"
    UNINSTANTIATED_VARIABLE = "UninstantiatedVariable"
    CYCLIC_GRAPH = "CyclicGraph"
    MUTEX_VIOLATION = "MutexViolation"
    UNUSED_VARIABLE = "UnusedVariable"
    VARIABLE_RACE = "VariableRace"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    code: Code
    subjects: tuple[str, ...]
    message: str

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code.value,
            "subjects": list(self.subjects),
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    def __post_init__(self):
        ordered = sorted(set(self.findings), key=lambda f: (f.code.value, f.subjects))
        object.__setattr__(self, "findings", tuple(ordered))

    @property
    def ok(self) -> bool:
        return not any(f.severity is Severity.ERROR for f in self.findings)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "findings": [f.to_dict() for f in self.findings]}

    def render_text(self) -> str:
        lines = [
            f"{f.severity.value} {f.code.value} ({', '.join(f.subjects)}): {f.message}"
            for f in self.findings
        ]
        status = "OK" if self.ok else "FAILED"
        lines.append(f"{status}, {len(self.findings)} finding{'s' if len(self.findings) != 1 else ''}")
        return "\n".join(lines)


def validate(program: Program, dsl: RobotClassDsl) -> ValidationReport:
    """Run every check and aggregate the findings; never aborts early."""
    findings = _check_unique_names(program)
    findings += check_bindings(program, dsl)
    findings += _lint_unused_variables(program)
    findings += check_mutex_schedulability(program, dsl)
    findings += lint_variable_races(program, dsl)
    return ValidationReport(tuple(findings))


def _has_duplicate_action_names(program: Program) -> bool:
    names = program.action_names()
    return len(names) != len(set(names))


def _cycle_finding(program: Program) -> Finding | None:
    try:
        model.topological_order(program)
        return None
    except CyclicGraphError as exc:
        members = tuple(sorted(set(exc.cycle)))
        return Finding(
            Severity.ERROR,
            Code.CYCLIC_GRAPH,
            members,
            "actions form a precedence cycle: " + " -> ".join(exc.cycle + exc.cycle[:1]),
        )


def _check_unique_names(program: Program) -> list[Finding]:
    findings = []
    for kind, names in (
        ("action", [a.name for a in program.actions]),
        ("resource", [r.name for r in program.resources]),
        ("variable", [v.name for v in program.variables]),
    ):
        seen: set[str] = set()
        for name in names:
            if name in seen:
                findings.append(
                    Finding(
                        Severity.ERROR,
                        Code.DUPLICATE_NAME,
                        (name,),
                        f"{kind} name {name!r} is declared more than once",
                    )
                )
            seen.add(name)
    return findings


def check_mutex_schedulability(program: Program, dsl: RobotClassDsl) -> list[Finding]:
    """Flag pairs of mutually exclusive actions that could overlap.

    Two instances violate a declared exclusion exactly when their types
    are mutex partners and nothing prevents simultaneity: no precedence
    path between them and distinct resource instances.  With duplicate
    action names the graph is ambiguous, so analysis is skipped; validate
    reports the duplicates themselves.
    """
    if _has_duplicate_action_names(program):
        return []
    cyclic = _cycle_finding(program)
    if cyclic:
        return [cyclic]
    findings = []
    names = program.action_names()
    types = {a: program.action(a).action_type for a in names}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if not dsl.is_mutex(types[a], types[b]):
                continue
            if model.potentially_parallel(program, a, b):
                findings.append(
                    Finding(
                        Severity.ERROR,
                        Code.MUTEX_VIOLATION,
                        (a, b),
                        f"{a!r} ({types[a]}) and {b!r} ({types[b]}) may run"
                        " simultaneously but their action types are mutually exclusive",
                    )
                )
    return findings


def _literal_matches(value, type_name: str, dsl: RobotClassDsl) -> bool:
    vtype = dsl.variable_type(type_name)
    if vtype is None:
        return False
    if vtype.is_primitive:
        if type_name == "Int":
            return isinstance(value, int) and not isinstance(value, bool)
        if type_name == "Float":
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        if type_name == "Bool":
            return isinstance(value, bool)
        return isinstance(value, str)
    if not isinstance(value, dict):
        return False
    declared = dict(vtype.fields or ())
    if set(value) != set(declared):
        return False
    return all(_literal_matches(value[f], declared[f], dsl) for f in declared)


def check_bindings(program: Program, dsl: RobotClassDsl) -> list[Finding]:
    """Completeness and typing of argument and return bindings.

    Also warns (UninstantiatedVariable) when an action reads a variable
    that has no initializer and no writer that could run before it: every
    writer is a strict descendant of the reader, or none exists at all.
    An action's own return binding does not count as instantiating its
    own reads, since arguments are read at start and returns written at
    finish.
    """
    findings = []
    declared_vars = {v.name: v for v in program.variables}
    action_types = dsl.action_types()
    for action in program.actions:
        atype = action_types.get(action.action_type)
        if atype is None:
            continue  # unloadable type; only reachable on hand-built programs
        bound = {arg.param: arg for arg in action.args}
        for param in atype.parameters:
            arg = bound.get(param.name)
            if arg is None:
                findings.append(
                    Finding(
                        Severity.ERROR,
                        Code.UNBOUND_PARAMETER,
                        (action.name, param.name),
                        f"action {action.name!r} leaves parameter {param.name!r} unset",
                    )
                )
            elif arg.variable is not None:
                decl = declared_vars.get(arg.variable)
                if decl is None:
                    findings.append(_unknown_variable(action.name, arg.variable))
                elif decl.type_name != param.type_name:
                    findings.append(
                        Finding(
                            Severity.ERROR,
                            Code.TYPE_MISMATCH,
                            (action.name, param.name),
                            f"parameter {param.name!r} expects {param.type_name},"
                            f" variable {arg.variable!r} is {decl.type_name}",
                        )
                    )
            elif not _literal_matches(arg.value, param.type_name, dsl):
                findings.append(
                    Finding(
                        Severity.ERROR,
                        Code.TYPE_MISMATCH,
                        (action.name, param.name),
                        f"literal value for parameter {param.name!r} does not"
                        f" type-check as {param.type_name}",
                    )
                )
        if action.return_to is not None:
            decl = declared_vars.get(action.return_to)
            if atype.return_type is None:
                findings.append(
                    Finding(
                        Severity.ERROR,
                        Code.TYPE_MISMATCH,
                        (action.name, "return"),
                        f"action type {atype.identifier!r} returns no value but"
                        f" {action.name!r} binds a return variable",
                    )
                )
            elif decl is None:
                findings.append(_unknown_variable(action.name, action.return_to))
            elif decl.type_name != atype.return_type:
                findings.append(
                    Finding(
                        Severity.ERROR,
                        Code.TYPE_MISMATCH,
                        (action.name, "return"),
                        f"return value is {atype.return_type}, variable"
                        f" {action.return_to!r} is {decl.type_name}",
                    )
                )
    findings += _lint_uninstantiated(program, declared_vars)
    return findings


def _unknown_variable(action_name: str, variable: str) -> Finding:
    return Finding(
        Severity.ERROR,
        Code.UNKNOWN_VARIABLE,
        (action_name, variable),
        f"action {action_name!r} references undeclared variable {variable!r}",
    )


def _lint_uninstantiated(program: Program, declared_vars) -> list[Finding]:
    if _has_duplicate_action_names(program) or _cycle_finding(program) is not None:
        return []  # flow analysis needs an unambiguous acyclic graph
    writers: dict[str, set[str]] = {}
    for action in program.actions:
        if action.return_to is not None:
            writers.setdefault(action.return_to, set()).add(action.name)
    findings = []
    for action in program.actions:
        for arg in action.args:
            variable = arg.variable
            if variable is None or variable not in declared_vars:
                continue
            if declared_vars[variable].init is not None:
                continue
            candidates = writers.get(variable, set()) - {action.name}
            if not any(
                action.name not in model.ancestors(program, writer) for writer in candidates
            ):
                findings.append(
                    Finding(
                        Severity.WARNING,
                        Code.UNINSTANTIATED_VARIABLE,
                        (action.name, variable),
                        f"action {action.name!r} reads {variable!r}, which has no"
                        " initializer and no writer that can run first",
                    )
                )
    return findings


def _lint_unused_variables(program: Program) -> list[Finding]:
    used: set[str] = set()
    for action in program.actions:
        used.update(arg.variable for arg in action.args if arg.variable is not None)
        if action.return_to is not None:
            used.add(action.return_to)
    return [
        Finding(
            Severity.WARNING,
            Code.UNUSED_VARIABLE,
            (variable.name,),
            f"variable {variable.name!r} is never read or written by any action",
        )
        for variable in program.variables
        if variable.name not in used
    ]


def lint_variable_races(program: Program, dsl: RobotClassDsl) -> list[Finding]:
    """Warn when parallel actions touch the same variable conflictingly.

    A conflict is write/write or read/write on one variable by two
    actions that may overlap in time.  Ordered or same-resource pairs
    cannot race.
    """
    if _has_duplicate_action_names(program) or _cycle_finding(program) is not None:
        return []
    reads: dict[str, set[str]] = {}
    writes: dict[str, set[str]] = {}
    for action in program.actions:
        reads[action.name] = {a.variable for a in action.args if a.variable is not None}
        writes[action.name] = {action.return_to} if action.return_to is not None else set()
    findings = []
    names = program.action_names()
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if not model.potentially_parallel(program, a, b):
                continue
            conflicts = (
                (writes[a] & writes[b])
                | (writes[a] & reads[b])
                | (reads[a] & writes[b])
            )
            for variable in sorted(conflicts):
                first, second = sorted((a, b))
                findings.append(
                    Finding(
                        Severity.WARNING,
                        Code.VARIABLE_RACE,
                        (first, second, variable),
                        f"{first!r} and {second!r} may run simultaneously and both"
                        f" touch variable {variable!r}",
                    )
                )
    return findings
