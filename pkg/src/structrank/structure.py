"""Structure patterns, system graphs, and derived-variable declarations.

A structure pattern records which Jacobian entries of an equation system are
allowed to be nonzero; it is the identity of a structured function space.
System graphs are the directed-graph view of square patterns (an edge i -> j
means variable i may appear in equation j). Generalized structures extend
patterns with linear derived variables such as z = a*x1 + b*x2 that several
equations may depend on only through z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import StructureError, UnsupportedOperationError

__all__ = [
    "StructurePattern",
    "SystemGraph",
    "DerivedVariableSpec",
    "GeneralizedStructure",
    "pattern_from_graph",
    "graph_from_pattern",
    "effective_pattern",
    "knockout",
]


@dataclass(frozen=True)
class StructurePattern:
    """An M x N sparsity pattern of allowed Jacobian entries.

    ``allowed`` holds 0-based (equation, variable) pairs. An equation with no
    allowed variables is legal; its Jacobian row is identically zero.
    """

    num_equations: int
    num_variables: int
    allowed: frozenset[tuple[int, int]]

    def __post_init__(self):
        m, n = self.num_equations, self.num_variables
        if m < 1 or n < 1:
            raise StructureError(f"pattern must have M >= 1 and N >= 1, got {m}x{n}")
        object.__setattr__(self, "allowed", frozenset(self.allowed))
        for e, v in self.allowed:
            if not (0 <= e < m and 0 <= v < n):
                raise StructureError(
                    f"allowed entry ({e},{v}) outside {m}x{n} pattern"
                )

    @classmethod
    def from_rows(cls, rows, num_variables=None):
        """Build from per-equation variable sets, e.g. ``[{2}, {2}, {0,1,2}]``."""
        rows = [frozenset(r) for r in rows]
        if num_variables is None:
            num_variables = max((v for r in rows for v in r), default=-1) + 1
            num_variables = max(num_variables, 1)
        allowed = frozenset((e, v) for e, r in enumerate(rows) for v in r)
        return cls(len(rows), num_variables, allowed)

    def row(self, e):
        """Sorted variable indices allowed in equation ``e``."""
        return sorted(v for (i, v) in self.allowed if i == e)

    def rows(self):
        """Per-equation sorted variable lists."""
        out = [[] for _ in range(self.num_equations)]
        for e, v in sorted(self.allowed):
            out[e].append(v)
        return out

    @property
    def shape(self):
        return (self.num_equations, self.num_variables)

    def is_square(self):
        return self.num_equations == self.num_variables

    def with_entry(self, e, v):
        """A copy with one more allowed entry."""
        return StructurePattern(
            self.num_equations, self.num_variables, self.allowed | {(e, v)}
        )


@dataclass(frozen=True)
class SystemGraph:
    """Directed dependency graph of a square system.

    An edge (i, j) means variable i is allowed to appear in equation j.
    ``include_diagonal`` is the self-loop policy: when true, every equation is
    additionally allowed to depend on its own variable, whether or not an
    explicit self-loop edge is present. Explicit self-loop edges are always
    honored.
    """

    num_nodes: int
    edges: frozenset[tuple[int, int]]
    include_diagonal: bool = False

    def __post_init__(self):
        if self.num_nodes < 1:
            raise StructureError("graph needs at least one node")
        object.__setattr__(self, "edges", frozenset(self.edges))
        for i, j in self.edges:
            if not (0 <= i < self.num_nodes and 0 <= j < self.num_nodes):
                raise StructureError(
                    f"edge ({i},{j}) outside node range [0,{self.num_nodes})"
                )


@dataclass(frozen=True)
class DerivedVariableSpec:
    """A named linear combination of original variables, e.g. z = a*x1 + b*x2."""

    name: str
    coefficients: tuple[tuple[int, float], ...]  # (variable index, weight)

    def __post_init__(self):
        coeffs = tuple(sorted((int(i), float(c)) for i, c in dict(self.coefficients).items()))
        object.__setattr__(self, "coefficients", coeffs)
        if not coeffs:
            raise StructureError(f"derived variable {self.name!r} has no coefficients")
        for i, c in coeffs:
            if i < 0:
                raise StructureError(f"derived variable {self.name!r}: bad index {i}")
            if c == 0.0 or c != c:
                raise StructureError(
                    f"derived variable {self.name!r}: coefficient on x{i + 1} must be nonzero"
                )

    @property
    def support(self):
        return tuple(i for i, _ in self.coefficients)


@dataclass(frozen=True)
class GeneralizedStructure:
    """A structure whose equations may depend on derived variables.

    ``dependencies`` lists, per equation, the original variable indices (int)
    and derived-variable names (str) the equation may use. The plain pattern
    over original variables only is available as ``base``.
    """

    num_variables: int
    dependencies: tuple[frozenset, ...]
    derived: tuple[DerivedVariableSpec, ...]
    base: StructurePattern = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        deps = tuple(frozenset(d) for d in self.dependencies)
        object.__setattr__(self, "dependencies", deps)
        object.__setattr__(self, "derived", tuple(self.derived))
        names = [d.name for d in self.derived]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise StructureError(f"derived variables declared more than once: {sorted(dup)}")
        by_name = {d.name: d for d in self.derived}
        for d in self.derived:
            for i in d.support:
                if i >= self.num_variables:
                    raise StructureError(
                        f"derived variable {d.name!r} references x{i + 1} "
                        f"but the system has {self.num_variables} variables"
                    )
        for e, dep in enumerate(deps):
            for item in dep:
                if isinstance(item, str):
                    if item not in by_name:
                        raise StructureError(
                            f"equation {e + 1} references undeclared derived variable {item!r}"
                        )
                elif not 0 <= item < self.num_variables:
                    raise StructureError(
                        f"equation {e + 1} references variable index {item} "
                        f"outside [0,{self.num_variables})"
                    )
        base = StructurePattern(
            len(deps),
            self.num_variables,
            frozenset(
                (e, v) for e, dep in enumerate(deps) for v in dep if isinstance(v, int)
            ),
        )
        object.__setattr__(self, "base", base)

    @property
    def num_equations(self):
        return len(self.dependencies)

    @property
    def derived_by_name(self):
        return {d.name: d for d in self.derived}

    def equation_symbols(self, e):
        """Symbols equation ``e`` may use: variable indices, then derived names."""
        dep = self.dependencies[e]
        ints = sorted(i for i in dep if isinstance(i, int))
        names = sorted(s for s in dep if isinstance(s, str))
        return tuple(ints) + tuple(names)


def pattern_from_graph(g: SystemGraph) -> StructurePattern:
    """Convert a system graph into the equivalent square structure pattern.

    Edge (i, j) yields allowed entry (j, i). Under the include-diagonal
    policy the full diagonal is added as well.
    """
    allowed = {(j, i) for (i, j) in g.edges}
    if g.include_diagonal:
        allowed |= {(k, k) for k in range(g.num_nodes)}
    return StructurePattern(g.num_nodes, g.num_nodes, frozenset(allowed))


def graph_from_pattern(p: StructurePattern, include_diagonal: bool = False) -> SystemGraph:
    """Recover the dependency graph of a square pattern.

    With ``include_diagonal`` recorded, diagonal entries are treated as
    policy-implied and stripped from the edge set; the pattern must then
    contain the full diagonal.
    """
    if not p.is_square():
        raise UnsupportedOperationError(
            f"only square patterns have a system graph, got {p.num_equations}x{p.num_variables}"
        )
    if include_diagonal:
        missing = [k for k in range(p.num_equations) if (k, k) not in p.allowed]
        if missing:
            raise StructureError(
                f"include-diagonal policy recorded but diagonal entries missing at {missing}"
            )
        edges = frozenset((v, e) for (e, v) in p.allowed if e != v)
    else:
        edges = frozenset((v, e) for (e, v) in p.allowed)
    return SystemGraph(p.num_equations, edges, include_diagonal)


def effective_pattern(gs: GeneralizedStructure) -> StructurePattern:
    """Expand derived variables into an original-variable pattern.

    Each equation's allowed variables become its original dependencies plus
    the supports of all derived variables it references. Note this expansion
    only bounds the generic rank from above: equations sharing a derived
    variable have proportional Jacobian rows on its support, which the
    expanded pattern cannot express. Use the randomized estimator for the
    actual generic rank of a generalized structure.
    """
    by_name = gs.derived_by_name
    allowed = set()
    for e, dep in enumerate(gs.dependencies):
        for item in dep:
            if isinstance(item, str):
                allowed.update((e, v) for v in by_name[item].support)
            else:
                allowed.add((e, item))
    return StructurePattern(gs.num_equations, gs.num_variables, frozenset(allowed))


def knockout(p: StructurePattern, node: int) -> StructurePattern:
    """Delete one node's equation and variable from a square pattern.

    Models removal of a species / gene: row ``node`` and column ``node`` are
    dropped and the remaining indices compacted.
    """
    if not p.is_square():
        raise UnsupportedOperationError(
            f"knockout requires a square pattern, got {p.num_equations}x{p.num_variables}"
        )
    if not 0 <= node < p.num_equations:
        raise StructureError(f"knockout node {node} outside [0,{p.num_equations})")
    if p.num_equations == 1:
        raise StructureError("knockout of a 1x1 system would leave an empty system")
    allowed = frozenset(
        (e - (e > node), v - (v > node))
        for (e, v) in p.allowed
        if e != node and v != node
    )
    return StructurePattern(p.num_equations - 1, p.num_variables - 1, allowed)
