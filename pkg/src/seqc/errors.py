"""Exception types raised across the toolchain.

Validation findings (missing parameters, mutex violations, ...) are NOT
exceptions; they are collected into a ValidationReport by seqc.validator.
The classes here cover structural problems that make an input unusable.
"""


class SeqcError(Exception):
    """Base class for every error raised by this package."""


class XmlSyntaxError(SeqcError):
    """Input is not well-formed XML or does not match the expected document shape."""


class DuplicateIdentifierError(SeqcError):
    """A name that must be unique within its namespace appears twice."""


class UnknownTypeReferenceError(SeqcError):
    """A variable-type name used in a DSL does not resolve."""


class RecursiveCompositeTypeError(SeqcError):
    """A composite variable type contains itself, directly or transitively."""


class UnresolvedMutexReferenceError(SeqcError):
    """A mutual-exclusion entry names an action type that does not exist."""


class UnknownActionTypeError(SeqcError):
    """An action-type identifier does not resolve against the DSL."""


class UnknownResourceTypeError(SeqcError):
    """A resource declaration names a component type the DSL does not define."""


class UnknownVariableTypeError(SeqcError):
    """A variable declaration names a type the DSL does not define."""


class UnresolvedReferenceError(SeqcError):
    """A cross-reference does not resolve.

    Raised for dangling names in program documents (unknown resources,
    parameters, constraint endpoints) and for template data paths that
    cannot be resolved in strict mode.  Template failures carry the
    template id and source line when known.
    """

    def __init__(self, message, *, template_id=None, line=None):
        self.template_id = template_id
        self.line = line
        super().__init__(_with_template_context(message, template_id, line))


class UnknownActionError(SeqcError):
    """A graph query names an action instance the program does not contain."""


class SameActionError(SeqcError):
    """A pairwise query was called with the same action on both sides."""


class CyclicGraphError(SeqcError):
    """The precedence graph contains a cycle; carries the cycle members."""

    def __init__(self, cycle, message=None):
        self.cycle = tuple(cycle)
        if message is None:
            shown = " -> ".join(self.cycle + self.cycle[:1]) if self.cycle else "?"
            message = f"precedence graph contains a cycle: {shown}"
        super().__init__(message)


class NonPositiveDurationError(SeqcError):
    """A duration is not a positive integer number of ticks."""


class InvalidProgramError(SeqcError):
    """An operation that requires a valid program was given one with errors."""

    def __init__(self, report, message=None):
        self.report = report
        if message is None:
            errors = [f for f in report.findings if f.severity.value == "error"]
            message = f"program has {len(errors)} validation error(s)"
        super().__init__(message)


class MissingTemplateFileError(SeqcError):
    """A generator configuration references a template file that does not exist."""


class OutputExistsError(SeqcError):
    """A generated output file already exists and overwriting was not requested."""


class TemplateError(SeqcError):
    """Base for template parse and render failures; knows its template id and line."""

    def __init__(self, message, *, template_id=None, line=None):
        self.template_id = template_id
        self.line = line
        super().__init__(_with_template_context(message, template_id, line))


class UnclosedBlockError(TemplateError):
    """A #foreach or #if block is not terminated by #end (or #end/#else is stray)."""


class UnknownDirectiveError(TemplateError):
    """A '#' directive name is not part of the template language."""


class MalformedReferenceError(TemplateError):
    """A '$' reference or directive argument list cannot be parsed."""


class UnknownTemplateIdError(TemplateError):
    """#insert names a template id that the library does not contain."""


class NonIterableInForeachError(TemplateError):
    """#foreach was given a value that is not a sequence."""


def _with_template_context(message, template_id, line):
    where = ""
    if template_id is not None and line is not None:
        where = f" [{template_id}:{line}]"
    elif template_id is not None:
        where = f" [{template_id}]"
    elif line is not None:
        where = f" [line {line}]"
    return message + where
