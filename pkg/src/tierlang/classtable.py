"""Inheritance order, field sets, and method/constructor resolution."""

from .errors import Diagnostic, WellFormednessError
from .syntax import (
    ConstructorDecl,
    MethodDecl,
    Program,
    TypeName,
    ctor_signature,
    method_signature,
)


class ClassTable:
    """Precomputed inheritance facts for one program.

    `subclass_of(c, d)` is the partial order written c <= d in the source
    (reflexive, transitive).  `fields(c)` lists inherited fields first, in
    declaration order.  `resolve(c, m, n)` walks up to the least superclass
    defining an n-ary method m.
    """

    def __init__(self, program: Program):
        self.program = program
        self.classes = program.classes
        self._ancestors: dict[str, list[str]] = {}
        self._fields: dict[str, list] = {}
        self._check_hierarchy()

    # -- construction -------------------------------------------------------

    def _check_hierarchy(self):
        for name, cls in self.classes.items():
            chain = [name]
            seen = {name}
            cur = cls
            while cur.superclass is not None:
                sup = cur.superclass
                if sup not in self.classes:
                    raise WellFormednessError(
                        [
                            Diagnostic(
                                self.program.source_file,
                                cur.line,
                                cur.col,
                                "E_EXTENDS",
                                f"class {cur.name!r} extends unknown class {sup!r}",
                            )
                        ]
                    )
                if sup in seen:
                    raise WellFormednessError(
                        [
                            Diagnostic(
                                self.program.source_file,
                                cur.line,
                                cur.col,
                                "E_CYCLE",
                                f"cyclic extends chain through {sup!r}",
                            )
                        ]
                    )
                seen.add(sup)
                chain.append(sup)
                cur = self.classes[sup]
            self._ancestors[name] = chain

        for name in self.classes:
            fields = []
            for cls_name in reversed(self._ancestors[name]):
                fields.extend(self.classes[cls_name].fields)
            self._fields[name] = fields

    # -- queries ------------------------------------------------------------

    def has_class(self, name: str) -> bool:
        return name in self.classes

    def ancestors(self, name: str) -> list:
        """The chain [name, super, super-super, ...]."""
        return self._ancestors[name]

    def subclass_of(self, c: str, d: str) -> bool:
        return d in self._ancestors.get(c, ())

    def subclasses(self, name: str) -> list:
        return [c for c in self.classes if self.subclass_of(c, name)]

    def fields(self, name: str) -> list:
        """Ordered (name, type) pairs including inherited fields."""
        return self._fields.get(name, [])

    def field_names(self, name: str) -> set:
        return {f for f, _ in self.fields(name)}

    def field_type(self, cls: str, field: str) -> TypeName | None:
        for f, t in self.fields(cls):
            if f == field:
                return t
        return None

    def resolve(self, cls: str, method: str, nargs: int) -> MethodDecl | None:
        """Least-superclass lookup of an n-ary method, the C* of dispatch."""
        for ancestor in self._ancestors.get(cls, ()):
            for m in self.classes[ancestor].methods:
                if m.name == method and len(m.params) == nargs:
                    return m
        return None

    def resolve_ctor(self, cls: str, nargs: int) -> ConstructorDecl | None:
        if cls not in self.classes:
            return None
        for c in self.classes[cls].constructors:
            if len(c.params) == nargs:
                return c
        if nargs == 0 and not self.classes[cls].constructors:
            # implicit no-op default constructor
            from .syntax import Skip

            ctor = ConstructorDecl(cls=cls, params=[], body=Skip())
            self.classes[cls].constructors.append(ctor)
            return ctor
        return None

    def overrides(self, m: MethodDecl) -> list:
        """Methods redeclaring m's name/arity in strict subclasses of its owner."""
        out = []
        for cls in self.classes:
            if cls == m.owner or not self.subclass_of(cls, m.owner):
                continue
            for cand in self.classes[cls].methods:
                if cand.name == m.name and len(cand.params) == len(m.params):
                    out.append(cand)
        return out

    def dispatch_candidates(self, m: MethodDecl) -> list:
        """The statically resolved target plus every override below it."""
        return [m] + self.overrides(m)

    def signatures(self) -> list:
        sigs = []
        for cls in self.classes.values():
            sigs.extend(method_signature(m) for m in cls.methods)
            sigs.extend(ctor_signature(c) for c in cls.constructors)
        return sigs


def build_class_table(program: Program) -> ClassTable:
    """Builds the class table; raises WellFormednessError on a broken hierarchy."""
    return ClassTable(program)
