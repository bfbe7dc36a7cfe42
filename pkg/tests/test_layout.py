import json

import numpy as np
import pytest

from surfperc.layout import build, logical_y_support
from surfperc.pauli import from_support, single_qubit

DISTANCES = list(range(2, 11))


def test_distance_below_two_rejected():
    for bad in (1, 0, -3):
        with pytest.raises(ValueError):
            build(bad)


def test_five_qubit_code_check_structure():
    lay = build(2)
    assert lay.n_qubits == 5
    assert set(lay.plaquettes) == {(0, 1, 2), (2, 3, 4)}
    assert set(lay.stars) == {(0, 2, 3), (1, 2, 4)}
    assert lay.logical_z_support == (1, 4)
    assert lay.logical_x_support == (3, 4)


def test_qubit_counts():
    for d in DISTANCES:
        lay = build(d)
        assert lay.n_qubits == d * d + (d - 1) * (d - 1)
        assert len(lay.plaquettes) + len(lay.stars) == lay.n_qubits - 1
        assert len(lay.plaquettes) == d * (d - 1)


def test_generator_weights():
    for d in (3, 5, 8):
        lay = build(d)
        for sup in lay.plaquettes + lay.stars:
            assert len(sup) in (3, 4)
        bulk_p = sum(1 for sup in lay.plaquettes if len(sup) == 4)
        assert bulk_p == (d - 2) * (d - 1)


def test_plaquettes_commute_with_stars():
    for d in DISTANCES:
        lay = build(d)
        for p in lay.plaquettes:
            for s in lay.stars:
                assert len(set(p) & set(s)) % 2 == 0


def test_logical_strings():
    for d in DISTANCES:
        lay = build(d)
        assert len(lay.logical_z_support) == d
        assert len(lay.logical_x_support) == d
        # one vertical edge in every vertical-edge row / every column
        rows = {q // (2 * d - 1) for q in lay.logical_z_support}
        assert rows == set(range(d))
        cols = {q % (2 * d - 1) for q in lay.logical_x_support}
        assert cols == set(range(d))
        inter = set(lay.logical_z_support) & set(lay.logical_x_support)
        assert len(inter) % 2 == 1


def test_diagonals():
    for d in DISTANCES:
        lay = build(d)
        assert len(lay.diagonal_a) == 2 * d - 1
        assert len(lay.diagonal_b) == 2 * d - 1
        shared = set(lay.diagonal_a) & set(lay.diagonal_b)
        assert len(shared) == 1
        assert len(set(lay.diagonal_a) | set(lay.diagonal_b)) == 4 * d - 3


def test_logical_y_commutation_exhaustive_d2():
    lay = build(2)
    ybar = from_support(5, logical_y_support(lay), "Y")
    for sup in lay.plaquettes:
        assert ybar.commutes_with(from_support(5, sup, "Z"))
    for sup in lay.stars:
        assert ybar.commutes_with(from_support(5, sup, "X"))


def test_logical_y_any_distance():
    for d in DISTANCES:
        lay = build(d)
        n = lay.n_qubits
        sup = logical_y_support(lay)
        assert len(sup) == 2 * d - 1
        ybar = from_support(n, sup, "Y")
        for s in lay.plaquettes:
            assert ybar.commutes_with(from_support(n, s, "Z"))
        for s in lay.stars:
            assert ybar.commutes_with(from_support(n, s, "X"))
        assert not ybar.commutes_with(lay.logical_x())
        assert not ybar.commutes_with(lay.logical_z())


def test_graphs_edge_counts_and_degrees():
    for d in DISTANCES:
        lay = build(d)
        for graph in (lay.z_graph, lay.x_graph):
            assert graph.n_edges == lay.n_qubits
        deg = lay.z_graph.degrees()
        assert deg[lay.z_graph.terminal_a] == d
        assert deg[lay.z_graph.terminal_b] == d
        interior = np.delete(deg, [lay.z_graph.terminal_a, lay.z_graph.terminal_b])
        assert interior.max() <= 4
        if d >= 3:
            assert np.sum(interior == 4) == (d - 1) * (d - 2)
        assert deg[lay.x_graph.terminal_a] == d
        assert deg[lay.x_graph.terminal_b] == d


def test_index_helpers_round_trip():
    lay = build(4)
    seen = set()
    for i in range(4):
        for j in range(4):
            seen.add(lay.vertical_edge(i, j))
    for i in range(3):
        for j in range(3):
            seen.add(lay.horizontal_edge(i, j))
    assert seen == set(range(lay.n_qubits))
    with pytest.raises(ValueError):
        lay.vertical_edge(0, 4)
    with pytest.raises(ValueError):
        lay.horizontal_edge(3, 0)


def test_positions_cover_all_qubits():
    lay = build(3)
    kinds = [lay.qubit_position(q)["kind"] for q in range(lay.n_qubits)]
    assert kinds.count("vertical") == 9
    assert kinds.count("horizontal") == 4


def test_json_dump_schema_and_checksum_stability():
    lay = build(3)
    blob = lay.to_json_dict()
    decoded = json.loads(json.dumps(blob))
    for key in ("distance", "n_qubits", "qubits", "plaquettes", "stars",
                "logical_z_support", "logical_x_support",
                "diagonal_a", "diagonal_b"):
        assert key in decoded
    assert lay.checksum() == build(3).checksum()
    assert lay.checksum() != build(4).checksum()


def test_operator_builders():
    lay = build(2)
    assert lay.plaquette_operator(0).to_string() == "+Z1 Z2 Z3"
    assert lay.star_operator(0).to_string() == "+X1 X3 X4"
    assert lay.logical_z().to_string() == "+Z2 Z5"
    assert lay.logical_x().to_string() == "+X4 X5"
    assert not lay.logical_x().commutes_with(lay.logical_z())
    assert single_qubit(5, 0, "X").commutes_with(lay.logical_x())
