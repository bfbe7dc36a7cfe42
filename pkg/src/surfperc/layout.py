"""Geometry of the distance-d planar surface code.

Physical qubits sit on the edges of a square patch with rough top/bottom and
smooth left/right boundaries.  Qubits are numbered row-major over 2d-1
interleaved rows: even rows hold d vertical edges, odd rows hold d-1
horizontal edges.  For d=2 this gives the familiar five-qubit patch::

    1   2      row 0 (vertical edges)
      3        row 1 (horizontal edge)
    4   5      row 2 (vertical edges)

Plaquettes (Z-type) are the faces of the patch, stars (X-type) its interior
vertices; boundary generators have weight 3.  The canonical logical Z string
runs down the rightmost column of vertical edges and the canonical logical X
string along the bottom row, matching the worked five-qubit example that the
golden tests replay.

Each qubit is simultaneously an edge of two connectivity graphs used by the
percolation oracle: the Z graph (interior vertices plus TOP/BOTTOM terminals,
paths of Z strings) and the X graph (faces plus LEFT/RIGHT terminals, paths
of dual X strings).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliOperator, from_support

__all__ = ["CodeLayout", "ConnectivityGraph", "build", "logical_y_support"]


@dataclass(frozen=True)
class ConnectivityGraph:
    """Edge list with two distinguished terminal vertices.

    One edge per physical qubit; edge q connects endpoints[q, 0] and
    endpoints[q, 1].  Boundary qubits attach to a terminal.
    """

    n_vertices: int
    terminal_a: int
    terminal_b: int
    endpoints: np.ndarray  # (n_qubits, 2) int32

    @property
    def n_edges(self) -> int:
        return self.endpoints.shape[0]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        np.add.at(deg, self.endpoints[:, 0], 1)
        np.add.at(deg, self.endpoints[:, 1], 1)
        return deg


@dataclass(frozen=True)
class CodeLayout:
    """Distance-d planar code: supports of all generators and logicals."""

    distance: int
    n_qubits: int
    plaquettes: tuple[tuple[int, ...], ...]
    stars: tuple[tuple[int, ...], ...]
    logical_z_support: tuple[int, ...]
    logical_x_support: tuple[int, ...]
    diagonal_a: tuple[int, ...]
    diagonal_b: tuple[int, ...]
    z_graph: ConnectivityGraph
    x_graph: ConnectivityGraph
    _packed: dict = field(default_factory=dict, repr=False, compare=False)

    # -- index helpers ----------------------------------------------------

    def vertical_edge(self, i: int, j: int) -> int:
        """Qubit index of the vertical edge in even row 2i, column j."""
        d = self.distance
        if not (0 <= i < d and 0 <= j < d):
            raise ValueError(f"vertical edge ({i},{j}) out of range for d={d}")
        return i * (2 * d - 1) + j

    def horizontal_edge(self, i: int, j: int) -> int:
        """Qubit index of the horizontal edge in odd row 2i+1, column j."""
        d = self.distance
        if not (0 <= i < d - 1 and 0 <= j < d - 1):
            raise ValueError(f"horizontal edge ({i},{j}) out of range for d={d}")
        return i * (2 * d - 1) + d + j

    def qubit_position(self, q: int) -> dict:
        """Kind and lattice coordinates of qubit q (for dumps and plots)."""
        d = self.distance
        if not 0 <= q < self.n_qubits:
            raise ValueError(f"qubit {q} out of range")
        i, r = divmod(q, 2 * d - 1)
        if r < d:
            return {"kind": "vertical", "row": i, "col": r, "x": float(r), "y": i + 0.5}
        j = r - d
        return {"kind": "horizontal", "row": i, "col": j, "x": j + 0.5, "y": float(i + 1)}

    # -- operators ---------------------------------------------------------

    def plaquette_operator(self, index: int) -> PauliOperator:
        return from_support(self.n_qubits, self.plaquettes[index], "Z")

    def star_operator(self, index: int) -> PauliOperator:
        return from_support(self.n_qubits, self.stars[index], "X")

    def logical_z(self) -> PauliOperator:
        return from_support(self.n_qubits, self.logical_z_support, "Z")

    def logical_x(self) -> PauliOperator:
        return from_support(self.n_qubits, self.logical_x_support, "X")

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "distance": self.distance,
            "n_qubits": self.n_qubits,
            "qubits": [self.qubit_position(q) for q in range(self.n_qubits)],
            "plaquettes": [list(p) for p in self.plaquettes],
            "stars": [list(s) for s in self.stars],
            "logical_z_support": list(self.logical_z_support),
            "logical_x_support": list(self.logical_x_support),
            "diagonal_a": list(self.diagonal_a),
            "diagonal_b": list(self.diagonal_b),
        }

    def checksum(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    # -- packed form for the simulation kernels ----------------------------

    def packed(self) -> dict:
        """Bit-packed supports, destabilizer strings and graphs (cached)."""
        if self._packed:
            return self._packed
        d, n = self.distance, self.n_qubits
        w = (n + 63) >> 6

        def pack_rows(supports):
            rows = np.zeros((len(supports), w), dtype=np.uint64)
            for r, sup in enumerate(supports):
                for q in sup:
                    rows[r, q >> 6] |= np.uint64(1) << np.uint64(q & 63)
            return rows

        # Destabilizer strings: one per generator, chosen so string i
        # anticommutes with generator i and commutes with all others.
        # Plaquette (a, j): X string along row a out to the left boundary.
        # Star (a, j): Z string up column j to the top boundary.
        dplaq = [
            tuple(self.vertical_edge(a, jj) for jj in range(j + 1))
            for a in range(d)
            for j in range(d - 1)
        ]
        dstar = [
            tuple(self.vertical_edge(ii, j) for ii in range(a))
            for a in range(1, d)
            for j in range(d)
        ]
        packed = {
            "n_qubits": n,
            "n_words": w,
            "plaq_z": pack_rows(self.plaquettes),
            "star_x": pack_rows(self.stars),
            "dplaq_x": pack_rows(dplaq),
            "dstar_z": pack_rows(dstar),
            "logical_x_x": pack_rows([self.logical_x_support])[0],
            "logical_z_z": pack_rows([self.logical_z_support])[0],
            "z_edges": self.z_graph.endpoints,
            "z_n_vertices": self.z_graph.n_vertices,
            "z_terminals": (self.z_graph.terminal_a, self.z_graph.terminal_b),
            "x_edges": self.x_graph.endpoints,
            "x_n_vertices": self.x_graph.n_vertices,
            "x_terminals": (self.x_graph.terminal_a, self.x_graph.terminal_b),
        }
        self._packed.update(packed)
        return self._packed


def build(d: int) -> CodeLayout:
    """Construct the distance-d planar layout (d >= 2)."""
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"distance must be an integer >= 2, got {d!r}")
    n = d * d + (d - 1) * (d - 1)
    period = 2 * d - 1

    def vedge(i, j):
        return i * period + j

    def hedge(i, j):
        return i * period + d + j

    # Faces (a, j): bounded by vertical edges (a, j), (a, j+1) plus the
    # horizontal edge above (absent at a=0) and below (absent at a=d-1).
    plaquettes = []
    for a in range(d):
        for j in range(d - 1):
            sup = [vedge(a, j), vedge(a, j + 1)]
            if a > 0:
                sup.append(hedge(a - 1, j))
            if a < d - 1:
                sup.append(hedge(a, j))
            plaquettes.append(tuple(sorted(sup)))

    # Interior vertices (a, j), a = 1..d-1: the two vertical edges above and
    # below plus the horizontal edges left/right (absent at the smooth sides).
    stars = []
    for a in range(1, d):
        for j in range(d):
            sup = [vedge(a - 1, j), vedge(a, j)]
            if j > 0:
                sup.append(hedge(a - 1, j - 1))
            if j < d - 1:
                sup.append(hedge(a - 1, j))
            stars.append(tuple(sorted(sup)))

    logical_z = tuple(vedge(i, d - 1) for i in range(d))
    logical_x = tuple(vedge(d - 1, j) for j in range(d))

    diag_a = tuple(
        sorted([vedge(i, i) for i in range(d)] + [hedge(i, i) for i in range(d - 1)])
    )
    diag_b = tuple(
        sorted(
            [vedge(i, d - 1 - i) for i in range(d)]
            + [hedge(i, d - 2 - i) for i in range(d - 1)]
        )
    )

    # Z graph: interior vertices plus TOP/BOTTOM terminals.
    n_int = (d - 1) * d
    top, bottom = n_int, n_int + 1

    def zvert(a, j):
        return (a - 1) * d + j

    z_ends = np.zeros((n, 2), dtype=np.int32)
    for i in range(d):
        for j in range(d):
            a_id = top if i == 0 else zvert(i, j)
            b_id = bottom if i + 1 == d else zvert(i + 1, j)
            z_ends[vedge(i, j)] = (a_id, b_id)
    for i in range(d - 1):
        for j in range(d - 1):
            z_ends[hedge(i, j)] = (zvert(i + 1, j), zvert(i + 1, j + 1))
    z_graph = ConnectivityGraph(n_int + 2, top, bottom, z_ends)

    # X graph: faces plus LEFT/RIGHT terminals.
    n_face = d * (d - 1)
    left, right = n_face, n_face + 1

    def face(a, j):
        return a * (d - 1) + j

    x_ends = np.zeros((n, 2), dtype=np.int32)
    for i in range(d):
        for j in range(d):
            a_id = left if j == 0 else face(i, j - 1)
            b_id = right if j == d - 1 else face(i, j)
            x_ends[vedge(i, j)] = (a_id, b_id)
    for i in range(d - 1):
        for j in range(d - 1):
            x_ends[hedge(i, j)] = (face(i, j), face(i + 1, j))
    x_graph = ConnectivityGraph(n_face + 2, left, right, x_ends)

    return CodeLayout(
        distance=d,
        n_qubits=n,
        plaquettes=tuple(plaquettes),
        stars=tuple(stars),
        logical_z_support=logical_z,
        logical_x_support=logical_x,
        diagonal_a=diag_a,
        diagonal_b=diag_b,
        z_graph=z_graph,
        x_graph=x_graph,
    )


def logical_y_support(layout: CodeLayout) -> tuple[int, ...]:
    """Canonical all-Y logical support: the main lattice diagonal.

    The product of Y over these 2d-1 qubits commutes with every plaquette and
    star and anticommutes with both canonical logicals.  For even d there is
    no central lattice site; the two diagonals then share the central
    horizontal edge h((d-2)/2, (d-2)/2), which is a documented convention.
    """
    return layout.diagonal_a
