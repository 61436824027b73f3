from __future__ import annotations

import pytest

from src.common import InputError, ParseError
from src.complex_core import Graph, clique_complex
from src.formats import (
    read_edge_list,
    read_faces,
    read_point_cloud,
    read_set_system,
    read_structured,
    write_edge_list,
    write_faces,
)


def test_point_cloud_with_header(examples_dir):
    cloud = read_point_cloud(examples_dir / "square.csv")
    assert cloud.n == 4
    assert cloud.dim_d == 2


def test_point_cloud_without_header(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0,0,0\n1,2,3\n")
    assert read_point_cloud(path).points.tolist() == [[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]


def test_point_cloud_missing_coordinate_reports_line(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("x,y\n0,0\n1,\n")
    with pytest.raises(ParseError) as info:
        read_point_cloud(path)
    assert info.value.line == 3


def test_point_cloud_rejects_infinite(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0,0\ninf,1\n")
    with pytest.raises(InputError, match="non-finite"):
        read_point_cloud(path)


def test_edge_list_round_trip(tmp_path, examples_dir):
    graph = read_edge_list(examples_dir / "c4.txt")
    assert graph.n_vertices == 4
    assert graph.edges == Graph.cycle(4).edges
    out = tmp_path / "c4.txt"
    write_edge_list(graph, out)
    assert read_edge_list(out).edges == graph.edges


def test_edge_list_keeps_isolated_vertices(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# two edges, one isolated vertex\nn 4\n0 1\n1 2\n")
    graph = read_edge_list(path)
    assert graph.n_vertices == 4
    assert clique_complex(graph).counts == [4, 2]


@pytest.mark.parametrize(
    "text,line",
    [
        ("0 1\n", 1),
        ("n 3\n0 0\n", 2),
        ("n 3\n0 5\n", 2),
        ("n 3\n0 1 2\n", 2),
        ("n 3\n0 a\n", 2),
        ("n -1\n", 1),
    ],
)
def test_edge_list_errors(tmp_path, text, line):
    path = tmp_path / "g.txt"
    path.write_text(text)
    with pytest.raises(ParseError) as info:
        read_edge_list(path)
    assert info.value.line == line


def test_empty_edge_list(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# nothing\n")
    with pytest.raises(ParseError, match="empty"):
        read_edge_list(path)


def test_faces_round_trip(tmp_path, octahedron):
    cx = clique_complex(octahedron)
    out = tmp_path / "oct.faces"
    write_faces(cx, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "n 6"
    assert len(lines) == 9
    assert read_faces(out).simplices_by_dim == cx.simplices_by_dim


def test_faces_header_is_optional(tmp_path):
    path = tmp_path / "f.txt"
    path.write_text("0 1 2\n2 3\n")
    cx = read_faces(path)
    assert cx.n_vertices == 4
    assert cx.counts == [4, 4, 1]


def test_faces_vertex_outside_header(tmp_path):
    path = tmp_path / "f.txt"
    path.write_text("n 3\n0 1\n1 3\n")
    with pytest.raises(ParseError) as info:
        read_faces(path)
    assert info.value.line == 3


def test_set_system_infers_vertex_count(tmp_path):
    path = tmp_path / "sets.txt"
    path.write_text("0 1 2\n2 4\n0 1 2\n")
    system = read_set_system(path)
    assert system.n_vertices == 5
    assert len(system.sets) == 2


@pytest.mark.parametrize(
    "name,text",
    [
        ("s.yaml", "model: erdos-renyi\nn: [10]\n"),
        ("s.json", '{"model": "erdos-renyi", "n": [10]}'),
        ("s.toml", 'model = "erdos-renyi"\nn = [10]\n'),
    ],
)
def test_read_structured(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    assert read_structured(path) == {"model": "erdos-renyi", "n": [10]}


def test_read_structured_rejects_unknown_suffix_and_lists(tmp_path):
    ini = tmp_path / "s.ini"
    ini.write_text("[a]\n")
    with pytest.raises(ParseError, match="unsupported"):
        read_structured(ini)
    seq = tmp_path / "s.yaml"
    seq.write_text("- 1\n- 2\n")
    with pytest.raises(ParseError, match="mapping"):
        read_structured(seq)
