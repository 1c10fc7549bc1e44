"""Program documents: XML persistence and DOT export of the action graph.

The XML surface form mirrors the in-memory model: resource instances,
global variables, action instances with argument/return bindings, and a
constraint section of <After action="X" predecessor="Y"/> edges.
Documents are saved in canonical form (fixed section order, entries
sorted by name) so equal programs always produce identical bytes.

Literal argument values and variable initializers are attribute text
parsed under the direction of the declared type; composite values use
nested <Field> elements.
"""

import re

from . import model
from .dsl import RobotClassDsl, lookup_action
from .errors import (
    DuplicateIdentifierError,
    UnknownResourceTypeError,
    UnknownVariableTypeError,
    UnresolvedReferenceError,
    XmlSyntaxError,
)
from .model import ActionInstance, ArgBinding, ConstraintEdge, Program, ResourceInstance, VariableDecl
from .xmlio import attr_escape, parse_root, require_attr


def load_program(text: str, dsl: RobotClassDsl) -> Program:
    """Parse a program document and resolve every reference against the DSL.

    Structural references (action types, resource instances, parameter
    names, constraint endpoints) must resolve and the precedence graph
    must be acyclic.  Variable references in bindings are deliberately
    not resolved here; the validator reports them with context.
    """
    root = parse_root(text, "Program")
    name = require_attr(root, "name")
    robot_class = require_attr(root, "robotClass")

    resources: list[ResourceInstance] = []
    variables: list[VariableDecl] = []
    action_elems = []
    constraint_elems = []
    for section in root:
        if section.tag == "Resources":
            resources.extend(_parse_resource(elem, dsl) for elem in _expect(section, "Resource"))
        elif section.tag == "Variables":
            variables.extend(_parse_variable(elem, dsl) for elem in _expect(section, "Variable"))
        elif section.tag == "Actions":
            action_elems.extend(_expect(section, "ActionInstance"))
        elif section.tag == "Constraints":
            constraint_elems.extend(_expect(section, "After"))
        else:
            raise XmlSyntaxError(f"unexpected element <{section.tag}>")

    _reject_duplicates((r.name for r in resources), "resource")
    _reject_duplicates((v.name for v in variables), "variable")
    resource_types = {r.name: r.component_type for r in resources}

    parsed_actions = [_parse_action(elem, dsl, resource_types) for elem in action_elems]
    _reject_duplicates((name for name, *_ in parsed_actions), "action")

    incoming: dict[str, set[str]] = {name: set() for name, *_ in parsed_actions}
    for elem in constraint_elems:
        action = require_attr(elem, "action")
        predecessor = require_attr(elem, "predecessor")
        for endpoint in (action, predecessor):
            if endpoint not in incoming:
                raise UnresolvedReferenceError(
                    f"constraint references unknown action {endpoint!r}"
                )
        incoming[action].add(predecessor)

    actions = [
        ActionInstance(
            name=action_name,
            action_type=type_name,
            resource=resource,
            args=args,
            return_to=return_to,
            constraints=tuple(ConstraintEdge(p) for p in sorted(incoming[action_name])),
        )
        for action_name, type_name, resource, args, return_to in parsed_actions
    ]
    program = Program(
        name=name,
        robot_class=robot_class,
        resources=tuple(resources),
        variables=tuple(variables),
        actions=tuple(actions),
    )
    model.topological_order(program)  # raises CyclicGraphError on cycles
    return program


def parse_program(text: str) -> Program:
    """Structural parse without a DSL, for graph export.

    Types are not resolved, literals are kept as raw strings, and
    acyclicity is not enforced.  Use load_program for real loading.
    """
    root = parse_root(text, "Program")
    name = require_attr(root, "name")
    robot_class = require_attr(root, "robotClass")
    resources: list[ResourceInstance] = []
    variables: list[VariableDecl] = []
    raw_actions: list[tuple[str, str, str]] = []
    incoming: dict[str, set[str]] = {}
    for section in root:
        if section.tag == "Resources":
            for elem in _expect(section, "Resource"):
                resources.append(
                    ResourceInstance(require_attr(elem, "name"), require_attr(elem, "type"))
                )
        elif section.tag == "Variables":
            for elem in _expect(section, "Variable"):
                variables.append(
                    VariableDecl(require_attr(elem, "name"), require_attr(elem, "type"))
                )
        elif section.tag == "Actions":
            for elem in _expect(section, "ActionInstance"):
                raw_actions.append(
                    (
                        require_attr(elem, "name"),
                        require_attr(elem, "type"),
                        require_attr(elem, "resource"),
                    )
                )
                incoming.setdefault(raw_actions[-1][0], set())
        elif section.tag == "Constraints":
            for elem in _expect(section, "After"):
                incoming.setdefault(require_attr(elem, "action"), set()).add(
                    require_attr(elem, "predecessor")
                )
        else:
            raise XmlSyntaxError(f"unexpected element <{section.tag}>")
    actions = tuple(
        ActionInstance(
            name=action_name,
            action_type=type_name,
            resource=resource,
            constraints=tuple(ConstraintEdge(p) for p in sorted(incoming.get(action_name, ()))),
        )
        for action_name, type_name, resource in raw_actions
    )
    return Program(name, robot_class, tuple(resources), tuple(variables), actions)


def _expect(section, tag):
    for child in section:
        if child.tag != tag:
            raise XmlSyntaxError(f"unexpected element <{child.tag}> inside <{section.tag}>")
        yield child


def _reject_duplicates(names, kind):
    seen: set[str] = set()
    for name in names:
        if name in seen:
            raise DuplicateIdentifierError(f"{kind} {name!r} declared twice")
        seen.add(name)


def _parse_resource(elem, dsl: RobotClassDsl) -> ResourceInstance:
    name = require_attr(elem, "name")
    component_type = require_attr(elem, "type")
    if dsl.component(component_type) is None:
        raise UnknownResourceTypeError(
            f"resource {name!r} has unknown component type {component_type!r}"
        )
    return ResourceInstance(name, component_type)


def _parse_variable(elem, dsl: RobotClassDsl) -> VariableDecl:
    name = require_attr(elem, "name")
    type_name = require_attr(elem, "type")
    vtype = dsl.variable_type(type_name)
    if vtype is None:
        raise UnknownVariableTypeError(f"variable {name!r} has unknown type {type_name!r}")
    init = None
    init_attr = elem.get("init")
    fields = list(elem)
    if init_attr is not None and fields:
        raise XmlSyntaxError(f"variable {name!r} mixes init attribute and <Field> children")
    if init_attr is not None:
        init = _parse_scalar(init_attr, type_name, dsl, f"variable {name!r}")
    elif fields:
        init = _parse_composite(elem, type_name, dsl, f"variable {name!r}")
    return VariableDecl(name, type_name, init)


def _parse_action(elem, dsl: RobotClassDsl, resource_types: dict[str, str]):
    name = require_attr(elem, "name")
    type_name = require_attr(elem, "type")
    resource = require_attr(elem, "resource")
    action_type = lookup_action(dsl, type_name)
    if resource not in resource_types:
        raise UnresolvedReferenceError(
            f"action {name!r} runs on undeclared resource {resource!r}"
        )
    if resource_types[resource] != action_type.owner:
        raise UnresolvedReferenceError(
            f"action {name!r}: type {type_name!r} belongs to component"
            f" {action_type.owner!r}, but resource {resource!r} is a"
            f" {resource_types[resource]!r}"
        )
    declared = {p.name: p for p in action_type.parameters}
    bindings: dict[str, ArgBinding] = {}
    return_to = None
    for child in elem:
        if child.tag == "Arg":
            param = require_attr(child, "param")
            if param not in declared:
                raise UnresolvedReferenceError(
                    f"action {name!r} binds unknown parameter {param!r}"
                )
            if param in bindings:
                raise DuplicateIdentifierError(
                    f"action {name!r} binds parameter {param!r} twice"
                )
            bindings[param] = _parse_arg(child, declared[param], dsl, name)
        elif child.tag == "ReturnTo":
            if return_to is not None:
                raise XmlSyntaxError(f"action {name!r} has more than one <ReturnTo>")
            return_to = require_attr(child, "variable")
        else:
            raise XmlSyntaxError(f"unexpected element <{child.tag}> inside <ActionInstance>")
    ordered = tuple(bindings[p.name] for p in action_type.parameters if p.name in bindings)
    return name, type_name, resource, ordered, return_to


def _parse_arg(elem, param, dsl: RobotClassDsl, action_name: str) -> ArgBinding:
    variable = elem.get("variable")
    value_attr = elem.get("value")
    has_fields = len(elem) > 0
    given = sum((variable is not None, value_attr is not None, has_fields))
    if given != 1:
        raise XmlSyntaxError(
            f"action {action_name!r}, parameter {param.name!r}: exactly one of"
            " variable=, value=, or nested <Field> elements is required"
        )
    if variable is not None:
        return ArgBinding(param.name, variable=variable)
    where = f"action {action_name!r}, parameter {param.name!r}"
    if value_attr is not None:
        return ArgBinding(param.name, value=_parse_scalar(value_attr, param.type_name, dsl, where))
    return ArgBinding(param.name, value=_parse_composite(elem, param.type_name, dsl, where))


def _parse_scalar(text: str, type_name: str, dsl: RobotClassDsl, where: str):
    vtype = dsl.variable_type(type_name)
    if vtype is None or not vtype.is_primitive:
        raise XmlSyntaxError(
            f"{where}: type {type_name!r} takes nested <Field> values, not attribute text"
        )
    try:
        if type_name == "Int":
            return int(text, 10)
        if type_name == "Float":
            return float(text)
        if type_name == "Bool":
            if text in ("true", "false"):
                return text == "true"
            raise ValueError(text)
        return text  # String
    except ValueError as exc:
        raise XmlSyntaxError(f"{where}: {text!r} is not a valid {type_name}") from exc


def _parse_composite(elem, type_name: str, dsl: RobotClassDsl, where: str) -> dict:
    vtype = dsl.variable_type(type_name)
    if vtype is None or vtype.is_primitive:
        raise XmlSyntaxError(f"{where}: type {type_name!r} does not take <Field> values")
    declared = dict(vtype.fields or ())
    value: dict[str, object] = {}
    for field in _expect(elem, "Field"):
        field_name = require_attr(field, "name")
        if field_name not in declared:
            raise XmlSyntaxError(f"{where}: type {type_name!r} has no field {field_name!r}")
        if field_name in value:
            raise XmlSyntaxError(f"{where}: field {field_name!r} given twice")
        field_type = declared[field_name]
        field_value_attr = field.get("value")
        if field_value_attr is not None:
            value[field_name] = _parse_scalar(
                field_value_attr, field_type, dsl, f"{where}.{field_name}"
            )
        else:
            value[field_name] = _parse_composite(
                field, field_type, dsl, f"{where}.{field_name}"
            )
    missing = sorted(set(declared) - set(value))
    if missing:
        raise XmlSyntaxError(f"{where}: missing field(s) {', '.join(missing)}")
    return value


def _scalar_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_composite(lines, value: dict, indent: str) -> None:
    for field_name, field_value in value.items():
        if isinstance(field_value, dict):
            lines.append(f"{indent}<Field name={attr_escape(field_name)}>")
            _write_composite(lines, field_value, indent + "  ")
            lines.append(f"{indent}</Field>")
        else:
            lines.append(
                f"{indent}<Field name={attr_escape(field_name)}"
                f" value={attr_escape(_scalar_text(field_value))}/>"
            )


def save_program(program: Program) -> str:
    """Serialize a program to its canonical XML document."""
    lines = [
        f"<Program name={attr_escape(program.name)}"
        f" robotClass={attr_escape(program.robot_class)}>"
    ]
    if program.resources:
        lines.append("  <Resources>")
        for resource in program.resources:
            lines.append(
                f"    <Resource name={attr_escape(resource.name)}"
                f" type={attr_escape(resource.component_type)}/>"
            )
        lines.append("  </Resources>")
    else:
        lines.append("  <Resources/>")
    if program.variables:
        lines.append("  <Variables>")
        for variable in program.variables:
            head = (
                f"    <Variable name={attr_escape(variable.name)}"
                f" type={attr_escape(variable.type_name)}"
            )
            if variable.init is None:
                lines.append(head + "/>")
            elif isinstance(variable.init, dict):
                lines.append(head + ">")
                _write_composite(lines, variable.init, "      ")
                lines.append("    </Variable>")
            else:
                lines.append(head + f" init={attr_escape(_scalar_text(variable.init))}/>")
        lines.append("  </Variables>")
    else:
        lines.append("  <Variables/>")
    if program.actions:
        lines.append("  <Actions>")
        for action in program.actions:
            head = (
                f"    <ActionInstance name={attr_escape(action.name)}"
                f" type={attr_escape(action.action_type)}"
                f" resource={attr_escape(action.resource)}"
            )
            if not action.args and action.return_to is None:
                lines.append(head + "/>")
                continue
            lines.append(head + ">")
            for arg in action.args:
                if arg.variable is not None:
                    lines.append(
                        f"      <Arg param={attr_escape(arg.param)}"
                        f" variable={attr_escape(arg.variable)}/>"
                    )
                elif isinstance(arg.value, dict):
                    lines.append(f"      <Arg param={attr_escape(arg.param)}>")
                    _write_composite(lines, arg.value, "        ")
                    lines.append("      </Arg>")
                else:
                    lines.append(
                        f"      <Arg param={attr_escape(arg.param)}"
                        f" value={attr_escape(_scalar_text(arg.value))}/>"
                    )
            if action.return_to is not None:
                lines.append(f"      <ReturnTo variable={attr_escape(action.return_to)}/>")
            lines.append("    </ActionInstance>")
        lines.append("  </Actions>")
    else:
        lines.append("  <Actions/>")
    edges = sorted(
        (action.name, edge.predecessor)
        for action in program.actions
        for edge in action.constraints
    )
    if edges:
        lines.append("  <Constraints>")
        for action_name, predecessor in edges:
            lines.append(
                f"    <After action={attr_escape(action_name)}"
                f" predecessor={attr_escape(predecessor)}/>"
            )
        lines.append("  </Constraints>")
    else:
        lines.append("  <Constraints/>")
    lines.append("</Program>")
    return "\n".join(lines) + "\n"


_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _dot_id(name: str) -> str:
    if _DOT_ID.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_quoted(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(program: Program) -> str:
    """Render the dependency graph as a DOT digraph.

    One node per action labeled "name: actionType @resource", one edge
    per precedence constraint, both in sorted order.
    """
    lines = [f"digraph {_dot_id(program.name)} {{"]
    for action in program.actions:
        label = f"{action.name}: {action.action_type} @{action.resource}"
        lines.append(f"  {_dot_quoted(action.name)} [label={_dot_quoted(label)}];")
    edges = sorted(
        (edge.predecessor, action.name)
        for action in program.actions
        for edge in action.constraints
    )
    for predecessor, successor in edges:
        lines.append(f"  {_dot_quoted(predecessor)} -> {_dot_quoted(successor)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
