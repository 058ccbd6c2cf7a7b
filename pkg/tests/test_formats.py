import json

import pytest

from structrank import (
    GeneralizedStructure,
    ParseError,
    StructurePattern,
    SystemGraph,
    parse_structure,
    pattern_from_graph,
    structure_from_json_dict,
    structure_to_json_dict,
    to_dot,
)
from structrank.datasets import get_dataset
from structrank.formats import parse_basis, parse_system


CEP_JSON = {
    "variables": 3,
    "equations": [
        {"name": "f1", "vars": [3]},
        {"name": "f2", "vars": [3]},
        {"name": "f3", "vars": [1, 2, 3]},
    ],
}


class TestJsonStructureFiles:
    def test_plain_pattern(self, tmp_path):
        path = tmp_path / "cep.json"
        path.write_text(json.dumps(CEP_JSON))
        assert parse_structure(path) == get_dataset("cep3").structure

    def test_derived_variables_yield_generalized_structure(self, tmp_path):
        data = {
            "variables": 4,
            "equations": [
                {"name": "f1", "vars": [1, 2, 3, 4]},
                {"name": "f2", "vars": [1, 2, 3, 4]},
                {"name": "f3", "derived": ["z"]},
                {"name": "f4", "derived": ["z"]},
            ],
            "derived_vars": [{"name": "z", "coeffs": {"1": 1.0, "2": 2.0}}],
        }
        path = tmp_path / "agg.json"
        path.write_text(json.dumps(data))
        parsed = parse_structure(path)
        assert isinstance(parsed, GeneralizedStructure)
        assert parsed == get_dataset("example5").structure

    def test_self_loops_add_diagonal(self, tmp_path):
        data = {
            "variables": 2,
            "equations": [{"name": "f1", "vars": [2]}, {"name": "f2", "vars": [1]}],
            "self_loops": True,
        }
        path = tmp_path / "loops.json"
        path.write_text(json.dumps(data))
        parsed = parse_structure(path)
        assert parsed.allowed == frozenset({(0, 0), (0, 1), (1, 0), (1, 1)})

    def test_unknown_top_level_field_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({**CEP_JSON, "extra": 1}))
        with pytest.raises(ParseError, match="unknown field"):
            parse_structure(path)

    def test_unknown_equation_field_reported_with_position(self, tmp_path):
        data = {"variables": 1, "equations": [{"name": "f1", "vars": [1], "oops": 2}]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ParseError, match=r"equations\[0\]"):
            parse_structure(path)

    def test_variable_index_out_of_range(self, tmp_path):
        data = {"variables": 2, "equations": [{"name": "f1", "vars": [5]}]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ParseError, match=r"equations\[0\].vars\[0\]"):
            parse_structure(path)

    def test_undeclared_derived_name(self, tmp_path):
        data = {"variables": 1, "equations": [{"name": "f1", "derived": ["w"]}]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ParseError, match="undeclared"):
            parse_structure(path)

    def test_syntax_error_carries_line_number(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n "variables": 3,\n]')
        with pytest.raises(ParseError, match="line 3"):
            parse_structure(path)

    def test_round_trip_pattern(self):
        pattern = get_dataset("robust4").structure
        assert structure_from_json_dict(structure_to_json_dict(pattern)) == pattern

    def test_round_trip_generalized(self):
        gs = get_dataset("example5").structure
        assert structure_from_json_dict(structure_to_json_dict(gs)) == gs


class TestEdgeListFiles:
    def test_published_three_node_graph(self, tmp_path):
        path = tmp_path / "cep.edges"
        path.write_text("selfloops: off\n1 <-> 3\n2 <-> 3\n3 -> 3\n")
        graph = parse_structure(path)
        assert isinstance(graph, SystemGraph)
        assert pattern_from_graph(graph) == get_dataset("cep3").structure

    def test_selfloops_on_adds_diagonal(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("selfloops: on\n1 -> 2\n")
        pattern = pattern_from_graph(parse_structure(path))
        assert pattern.allowed == frozenset({(1, 0), (0, 0), (1, 1)})

    def test_nodes_header_allows_isolated_nodes(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("nodes: 4\n1 -> 2\n")
        assert parse_structure(path).num_nodes == 4

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("# web\n\n1 -> 2  # feeding link\n")
        assert parse_structure(path).edges == frozenset({(0, 1)})

    def test_bad_edge_line_reports_line_number(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("1 -> 2\n2 => 3\n")
        with pytest.raises(ParseError, match="line 2"):
            parse_structure(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("# nothing\n")
        with pytest.raises(ParseError):
            parse_structure(path)


class TestPatternMatrixFiles:
    def test_slash_separated_rows(self, tmp_path):
        path = tmp_path / "p.pattern"
        path.write_text("00*/00*/***\n")
        assert parse_structure(path) == get_dataset("cep3").structure

    def test_newline_separated_rows_with_dots(self, tmp_path):
        path = tmp_path / "p.pattern"
        path.write_text("..*\n..*\n***\n")
        assert parse_structure(path) == get_dataset("cep3").structure

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "p.pattern"
        path.write_text("0*\n***\n")
        with pytest.raises(ParseError, match="width"):
            parse_structure(path)

    def test_bad_characters_rejected(self, tmp_path):
        path = tmp_path / "p.pattern"
        path.write_text("0x*\n")
        with pytest.raises(ParseError):
            parse_structure(path)


class TestFormatDetection:
    def test_sniffs_json_without_extension(self, tmp_path):
        path = tmp_path / "noext"
        path.write_text(json.dumps(CEP_JSON))
        assert parse_structure(path) == get_dataset("cep3").structure

    def test_sniffs_edges_without_extension(self, tmp_path):
        path = tmp_path / "noext"
        path.write_text("1 -> 2\n")
        assert isinstance(parse_structure(path), SystemGraph)

    def test_explicit_format_overrides_extension(self, tmp_path):
        path = tmp_path / "matrix.json"
        path.write_text("0*\n*0\n")
        assert parse_structure(path, fmt="pattern").shape == (2, 2)

    def test_undetectable_content_rejected(self, tmp_path):
        path = tmp_path / "mystery"
        path.write_text("hello world\n")
        with pytest.raises(ParseError, match="format"):
            parse_structure(path)


class TestDotExport:
    def test_square_pattern_renders_directed_edges(self):
        dot = to_dot(get_dataset("cep3").structure)
        assert dot.startswith("digraph")
        assert "n1 -> n3;" in dot
        assert "n3 -> n3;" in dot

    def test_rectangular_pattern_renders_bipartite(self):
        dot = to_dot(get_dataset("robotarm").structure)
        assert "x1 -> f1;" in dot
        assert "f3" in dot

    def test_generalized_structure_shows_derived_node(self):
        dot = to_dot(get_dataset("example5").structure)
        assert "d_z" in dot
        assert 'x2 -> d_z [label="2"];' in dot


class TestOtherPayloads:
    def test_basis_file(self, tmp_path):
        path = tmp_path / "basis.json"
        path.write_text(json.dumps({"basis": [[[1.0, 0.0], [0.0, 0.0]]]}))
        assert len(parse_basis(path)) == 1

    def test_basis_rejects_non_numbers(self, tmp_path):
        path = tmp_path / "basis.json"
        path.write_text(json.dumps({"basis": [[["x"]]]}))
        with pytest.raises(ParseError, match=r"basis\[0\]\[0\]\[0\]"):
            parse_basis(path)

    def test_system_file_round_trip(self, tmp_path):
        sys = get_dataset("eqcep1").system
        path = tmp_path / "system.json"
        path.write_text(json.dumps(sys.to_json_dict()))
        back = parse_system(path)
        assert back.structure == sys.structure
        assert back.degree == sys.degree

    def test_system_file_requires_degree(self, tmp_path):
        path = tmp_path / "system.json"
        path.write_text(json.dumps({"structure": CEP_JSON, "equations": []}))
        with pytest.raises(ParseError, match="degree"):
            parse_system(path)
