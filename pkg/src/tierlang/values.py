"""Runtime values shared by the evaluators.

Integers are arbitrary-precision naturals (operators saturate at zero),
booleans and chars are Python bool/str, and references are NodeRef handles
into a pointer graph.  Completion supplies a default per declared type so
reads never fail.
"""

from dataclasses import dataclass

from .syntax import TypeName


@dataclass(frozen=True)
class NodeRef:
    id: int

    def __repr__(self):
        return f"&{self.id}" if self.id else "&null"


NULL_REF = NodeRef(0)


def default_value(t: TypeName):
    if t.is_reference:
        return NULL_REF
    if t.name == "int":
        return 0
    if t.name == "boolean":
        return False
    if t.name == "char":
        return "\0"
    return None  # void


def value_size(v) -> int:
    """Size of one stored value: ints count their magnitude, the rest count 1."""
    if isinstance(v, bool) or isinstance(v, NodeRef) or isinstance(v, str):
        return 1
    if isinstance(v, int):
        return v
    return 1


def value_token(v):
    """A hashable, JSON-friendly token for comparisons and fingerprints."""
    if isinstance(v, NodeRef):
        return ("ref", v.id)
    if isinstance(v, bool):
        return ("bool", v)
    if isinstance(v, str):
        return ("char", v)
    return ("int", v)


def render_value(v) -> str:
    if isinstance(v, NodeRef):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f"'{v}'"
    return str(v)
