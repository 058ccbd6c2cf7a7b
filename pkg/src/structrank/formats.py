"""Reading and writing structures: JSON files, edge lists, pattern matrices, DOT.

All file formats use 1-based equation/variable indices; the in-memory types
are 0-based. JSON schemas reject unknown fields so typos surface instead of
being silently ignored.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .errors import ParseError
from .structure import (
    DerivedVariableSpec,
    GeneralizedStructure,
    StructurePattern,
    SystemGraph,
    graph_from_pattern,
)

__all__ = [
    "parse_structure",
    "parse_basis",
    "parse_system",
    "structure_to_json_dict",
    "structure_from_json_dict",
    "to_dot",
]

_EDGE_RE = re.compile(r"^\s*(\d+)\s*(<->|->)\s*(\d+)\s*$")
_HEADER_RE = re.compile(r"^\s*(selfloops|nodes)\s*:\s*(\S+)\s*$", re.IGNORECASE)


def _expect(condition, message, path=None, where=None):
    if not condition:
        raise ParseError(message, path=path, where=where)


def _check_keys(obj, allowed, path, where):
    unknown = sorted(set(obj) - set(allowed))
    _expect(not unknown, f"unknown field(s) {unknown}", path, where)


def structure_from_json_dict(data, path=None):
    """Build a structure from the JSON file schema.

    Schema: {"variables": N, "equations": [{"name", "vars", "derived"}],
    "derived_vars": [{"name", "coeffs"}], "self_loops": bool}. ``vars`` uses
    1-based variable indices; ``coeffs`` keys are 1-based index strings.
    """
    _expect(isinstance(data, dict), "top level must be an object", path, "$")
    _check_keys(data, {"variables", "equations", "derived_vars", "self_loops"}, path, "$")
    _expect("variables" in data, "missing field 'variables'", path, "$")
    _expect("equations" in data, "missing field 'equations'", path, "$")
    n = data["variables"]
    _expect(isinstance(n, int) and n >= 1, "'variables' must be a positive integer", path, "variables")
    equations = data["equations"]
    _expect(isinstance(equations, list) and equations, "'equations' must be a nonempty list", path, "equations")
    self_loops = data.get("self_loops", False)
    _expect(isinstance(self_loops, bool), "'self_loops' must be a boolean", path, "self_loops")

    derived_specs = []
    for i, dv in enumerate(data.get("derived_vars", [])):
        where = f"derived_vars[{i}]"
        _expect(isinstance(dv, dict), "derived variable must be an object", path, where)
        _check_keys(dv, {"name", "coeffs"}, path, where)
        _expect(isinstance(dv.get("name"), str) and dv["name"], "missing derived name", path, where)
        coeffs = dv.get("coeffs")
        _expect(isinstance(coeffs, dict) and coeffs, "'coeffs' must be a nonempty object", path, where)
        pairs = []
        for key, value in coeffs.items():
            _expect(key.isdigit() and int(key) >= 1,
                    f"coefficient key {key!r} must be a 1-based variable index", path, where)
            _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
                    f"coefficient on x{key} must be a number", path, where)
            pairs.append((int(key) - 1, float(value)))
        derived_specs.append(DerivedVariableSpec(dv["name"], tuple(pairs)))
    declared = {d.name for d in derived_specs}

    dependencies = []
    any_derived = False
    for e, eq in enumerate(equations):
        where = f"equations[{e}]"
        _expect(isinstance(eq, dict), "equation must be an object", path, where)
        _check_keys(eq, {"name", "vars", "derived"}, path, where)
        vars_1 = eq.get("vars", [])
        _expect(isinstance(vars_1, list), "'vars' must be a list", path, where)
        dep = set()
        for j, v in enumerate(vars_1):
            _expect(isinstance(v, int) and 1 <= v <= n,
                    f"variable index {v!r} outside 1..{n}", path, f"{where}.vars[{j}]")
            dep.add(v - 1)
        for j, name in enumerate(eq.get("derived", [])):
            _expect(isinstance(name, str), "derived reference must be a name", path, f"{where}.derived[{j}]")
            _expect(name in declared, f"undeclared derived variable {name!r}", path, f"{where}.derived[{j}]")
            dep.add(name)
            any_derived = True
        if self_loops and e < n:
            dep.add(e)
        dependencies.append(frozenset(dep))

    if derived_specs or any_derived:
        return GeneralizedStructure(
            num_variables=n,
            dependencies=tuple(dependencies),
            derived=tuple(derived_specs),
        )
    return StructurePattern(
        len(dependencies),
        n,
        frozenset((e, v) for e, dep in enumerate(dependencies) for v in dep),
    )


def structure_to_json_dict(structure):
    """Inverse of ``structure_from_json_dict`` (1-based, schema-stable)."""
    if isinstance(structure, GeneralizedStructure):
        return {
            "variables": structure.num_variables,
            "equations": [
                {
                    "name": f"f{e + 1}",
                    "vars": [i + 1 for i in sorted(d for d in dep if isinstance(d, int))],
                    "derived": sorted(d for d in dep if isinstance(d, str)),
                }
                for e, dep in enumerate(structure.dependencies)
            ],
            "derived_vars": [
                {"name": spec.name, "coeffs": {str(i + 1): c for i, c in spec.coefficients}}
                for spec in structure.derived
            ],
            "self_loops": False,
        }
    rows = structure.rows()
    return {
        "variables": structure.num_variables,
        "equations": [
            {"name": f"f{e + 1}", "vars": [v + 1 for v in row], "derived": []}
            for e, row in enumerate(rows)
        ],
        "derived_vars": [],
        "self_loops": False,
    }


def _parse_json_file(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from exc


def _parse_edge_list(path):
    num_nodes = 0
    include_diagonal = False
    edges = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            header = _HEADER_RE.match(line)
            if header:
                key, value = header.group(1).lower(), header.group(2).lower()
                if key == "selfloops":
                    if value not in ("on", "off"):
                        raise ParseError("selfloops must be 'on' or 'off'", path=path, line=lineno)
                    include_diagonal = value == "on"
                else:
                    if not value.isdigit() or int(value) < 1:
                        raise ParseError("nodes must be a positive integer", path=path, line=lineno)
                    num_nodes = max(num_nodes, int(value))
                continue
            match = _EDGE_RE.match(line)
            if not match:
                raise ParseError(
                    f"expected 'i -> j' or 'i <-> j', got {line!r}", path=path, line=lineno
                )
            a, arrow, b = int(match.group(1)), match.group(2), int(match.group(3))
            if a < 1 or b < 1:
                raise ParseError("node indices are 1-based", path=path, line=lineno)
            num_nodes = max(num_nodes, a, b)
            edges.add((a - 1, b - 1))
            if arrow == "<->":
                edges.add((b - 1, a - 1))
    if num_nodes == 0:
        raise ParseError("no edges or 'nodes:' header found", path=path)
    return SystemGraph(num_nodes, frozenset(edges), include_diagonal)


def _parse_pattern_matrix(path):
    text = Path(path).read_text(encoding="utf-8")
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for chunk in line.split("/"):
            chunk = chunk.strip()
            if not chunk:
                continue
            bad = set(chunk) - {"0", "*", "."}
            if bad:
                raise ParseError(
                    f"pattern rows may contain only 0, ., and *, got {sorted(bad)}",
                    path=path, line=lineno,
                )
            rows.append((lineno, chunk))
    if not rows:
        raise ParseError("empty pattern", path=path)
    width = len(rows[0][1])
    for lineno, chunk in rows:
        if len(chunk) != width:
            raise ParseError(
                f"row width {len(chunk)} differs from first row width {width}",
                path=path, line=lineno,
            )
    allowed = frozenset(
        (e, v)
        for e, (_, chunk) in enumerate(rows)
        for v, ch in enumerate(chunk)
        if ch == "*"
    )
    return StructurePattern(len(rows), width, allowed)


_EXTENSIONS = {
    ".json": "json",
    ".edges": "edges",
    ".edgelist": "edges",
    ".graph": "edges",
    ".pattern": "pattern",
    ".pat": "pattern",
}


def _detect_format(path):
    suffix = Path(path).suffix.lower()
    if suffix in _EXTENSIONS:
        return _EXTENSIONS[suffix]
    head = Path(path).read_text(encoding="utf-8", errors="replace")[:4096].lstrip()
    if head.startswith("{"):
        return "json"
    if "->" in head or _HEADER_RE.match(head.splitlines()[0] if head else ""):
        return "edges"
    if head and set(head) <= set("0*./ \t\r\n"):
        return "pattern"
    raise ParseError(
        "cannot determine file format; pass an explicit format "
        "(json, edges, or pattern)", path=path,
    )


def parse_structure(path, fmt: str | None = None):
    """Load a structure file.

    Returns a StructurePattern, GeneralizedStructure, or SystemGraph
    depending on the content. Format is chosen by extension (.json, .edges,
    .pattern), by sniffing, or by ``fmt``.
    """
    fmt = fmt or _detect_format(path)
    if fmt == "json":
        return structure_from_json_dict(_parse_json_file(path), path=path)
    if fmt == "edges":
        return _parse_edge_list(path)
    if fmt == "pattern":
        return _parse_pattern_matrix(path)
    raise ParseError(f"unknown format {fmt!r} (expected json, edges, or pattern)", path=path)


def parse_basis(path):
    """Load a matrix basis: JSON {"basis": [matrix, matrix, ...]}."""
    data = _parse_json_file(path)
    _expect(isinstance(data, dict), "top level must be an object", path, "$")
    _check_keys(data, {"basis"}, path, "$")
    basis = data.get("basis")
    _expect(isinstance(basis, list) and basis, "'basis' must be a nonempty list", path, "basis")
    for i, mat in enumerate(basis):
        _expect(isinstance(mat, list) and mat, "matrix must be a nonempty list of rows", path, f"basis[{i}]")
        for j, row in enumerate(mat):
            _expect(isinstance(row, list) and row, "matrix row must be a nonempty list", path, f"basis[{i}][{j}]")
            for k, value in enumerate(row):
                _expect(
                    isinstance(value, (int, float)) and not isinstance(value, bool),
                    "matrix entries must be numbers", path, f"basis[{i}][{j}][{k}]",
                )
    return basis


def parse_system(path):
    """Load a serialized polynomial system (JSON)."""
    from .polysys import StructuredPolySystem

    data = _parse_json_file(path)
    _expect(isinstance(data, dict), "top level must be an object", path, "$")
    _check_keys(data, {"structure", "degree", "seed", "distribution", "equations"}, path, "$")
    for key in ("structure", "degree", "equations"):
        _expect(key in data, f"missing field {key!r}", path, "$")
    return StructuredPolySystem.from_json_dict(data)


def to_dot(structure) -> str:
    """Render a structure or graph in DOT for external visualization."""
    lines = ["digraph system {"]
    if isinstance(structure, SystemGraph):
        for k in range(structure.num_nodes):
            lines.append(f'  n{k + 1} [label="{k + 1}"];')
        for i, j in sorted(structure.edges):
            lines.append(f"  n{i + 1} -> n{j + 1};")
        if structure.include_diagonal:
            lines.insert(1, "  // self-loop policy: every node depends on itself")
    elif isinstance(structure, GeneralizedStructure):
        for v in range(structure.num_variables):
            lines.append(f'  x{v + 1} [shape=circle, label="x{v + 1}"];')
        for spec in structure.derived:
            lines.append(f'  d_{spec.name} [shape=diamond, label="{spec.name}"];')
            for i, c in spec.coefficients:
                lines.append(f'  x{i + 1} -> d_{spec.name} [label="{c:g}"];')
        for e, dep in enumerate(structure.dependencies):
            lines.append(f'  f{e + 1} [shape=box, label="f{e + 1}"];')
            for item in sorted(dep, key=str):
                src = f"d_{item}" if isinstance(item, str) else f"x{item + 1}"
                lines.append(f"  {src} -> f{e + 1};")
    elif structure.is_square():
        return to_dot(graph_from_pattern(structure, include_diagonal=False))
    else:
        for v in range(structure.num_variables):
            lines.append(f'  x{v + 1} [shape=circle, label="x{v + 1}"];')
        for e in range(structure.num_equations):
            lines.append(f'  f{e + 1} [shape=box, label="f{e + 1}"];')
        for e, v in sorted(structure.allowed):
            lines.append(f"  x{v + 1} -> f{e + 1};")
    lines.append("}")
    return "\n".join(lines) + "\n"
