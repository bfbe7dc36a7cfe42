"""Mixed-state stabilizer tableau for the encoded surface-code state.

A CodeState tracks the instantaneous generator group of the (generally
mixed) state, the two logical representatives, and a sticky loss status.
The fresh code state carries n-1 generators: the logical qubit starts
maximally mixed, which is what makes a measurement that commutes with every
generator but anticommutes with a logical (the loss event) possible.

Measurements follow the four standard cases; see
:func:`surfperc._kernels.measure_packed`, which this module wraps.  The loss
event appends the measured operator to the generators (the post-measurement
state is stabilized by it), so the generator count reaches n exactly at the
measurement that sets a loss status and stays there.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .layout import CodeLayout
from .pauli import PauliOperator

__all__ = [
    "Status",
    "MeasurementRecord",
    "CodeState",
    "init_code_state",
    "logical_status",
]


class Status(enum.IntEnum):
    ALIVE = _kernels.STATUS_ALIVE
    XLOST = _kernels.STATUS_XLOST
    ZLOST = _kernels.STATUS_ZLOST
    COLLAPSED = _kernels.STATUS_COLLAPSED


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome of one projective measurement."""

    operator: PauliOperator
    outcome: int          # +1 or -1
    deterministic: bool   # operator lay in +-<generators> beforehand
    case: int             # 1..4, the update rule that applied


def _pack_bits(value: int, w: int) -> np.ndarray:
    arr = np.zeros(w, dtype=np.uint64)
    for k in range(w):
        arr[k] = np.uint64((value >> (64 * k)) & 0xFFFFFFFFFFFFFFFF)
    return arr


def _unpack_bits(arr: np.ndarray) -> int:
    v = 0
    for k in range(arr.shape[0] - 1, -1, -1):
        v = (v << 64) | int(arr[k])
    return v


# -- GF(2) helpers (cold paths: validation, canonical forms, extension) ------


def _gf2_rank(vals: list[int]) -> int:
    pivots: dict[int, int] = {}
    for v in vals:
        while v:
            msb = v.bit_length() - 1
            if msb in pivots:
                v ^= pivots[msb]
            else:
                pivots[msb] = v
                break
    return len(pivots)


def _gf2_rref(vals: list[int]) -> list[int]:
    """Reduced row-echelon basis, rows ordered by descending pivot bit."""
    pivots: dict[int, int] = {}
    for v in vals:
        while v:
            msb = v.bit_length() - 1
            if msb in pivots:
                v ^= pivots[msb]
            else:
                pivots[msb] = v
                break
    keys = sorted(pivots, reverse=True)
    for i, m in enumerate(keys):
        for m2 in keys[:i]:
            if (pivots[m2] >> m) & 1:
                pivots[m2] ^= pivots[m]
    return [pivots[m] for m in keys]


def _gf2_solve(rows: list[int], rhs: list[int], n_unknowns: int) -> int:
    """One solution x (as an int of n_unknowns bits) of rows . x = rhs.

    Bit j of a row is the coefficient of unknown j.  Raises ValueError when
    inconsistent.  Free unknowns are set to zero.
    """
    system = [(rows[i], rhs[i] & 1) for i in range(len(rows))]
    pivots: dict[int, tuple[int, int]] = {}
    for coeff, b in system:
        while coeff:
            msb = coeff.bit_length() - 1
            if msb in pivots:
                pc, pb = pivots[msb]
                coeff ^= pc
                b ^= pb
            else:
                pivots[msb] = (coeff, b)
                break
        else:
            if b:
                raise ValueError("inconsistent linear system over GF(2)")
    x = 0
    for msb in sorted(pivots):
        coeff, b = pivots[msb]
        acc = b
        rest = coeff & ~(1 << msb)
        while rest:
            j = rest.bit_length() - 1
            acc ^= (x >> j) & 1
            rest &= ~(1 << j)
        if acc:
            x |= 1 << msb
    return x


class CodeState:
    """Generator group, logical representatives and sticky loss status."""

    def __init__(self, n_qubits: int, generators, logical_x: PauliOperator,
                 logical_z: PauliOperator, validate: bool = True):
        self.n_qubits = int(n_qubits)
        self._w = (self.n_qubits + 63) >> 6
        gens = list(generators)
        if validate:
            self._validate(gens, logical_x, logical_z)
        n, w = self.n_qubits, self._w
        self._sx = np.zeros((n, w), dtype=np.uint64)
        self._sz = np.zeros((n, w), dtype=np.uint64)
        self._sph = np.zeros(n, dtype=np.int64)
        self._dx = np.zeros((n, w), dtype=np.uint64)
        self._dz = np.zeros((n, w), dtype=np.uint64)
        self._lx = np.zeros((2, w), dtype=np.uint64)
        self._lz = np.zeros((2, w), dtype=np.uint64)
        self._lph = np.zeros(2, dtype=np.int64)
        self._meta = np.zeros(2, dtype=np.int64)
        for r, g in enumerate(gens):
            self._sx[r] = _pack_bits(g.x_bits, w)
            self._sz[r] = _pack_bits(g.z_bits, w)
            self._sph[r] = g.phase
        self._lx[0] = _pack_bits(logical_x.x_bits, w)
        self._lx[1] = _pack_bits(logical_x.z_bits, w)
        self._lph[0] = logical_x.phase
        self._lz[0] = _pack_bits(logical_z.x_bits, w)
        self._lz[1] = _pack_bits(logical_z.z_bits, w)
        self._lph[1] = logical_z.phase
        self._meta[0] = len(gens)
        self._meta[1] = int(Status.ALIVE)
        self._build_destabilizers(gens)
        self._anti = np.zeros(n, dtype=np.uint8)
        self._accx = np.zeros(w, dtype=np.uint64)
        self._accz = np.zeros(w, dtype=np.uint64)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_layout(cls, layout: CodeLayout) -> "CodeState":
        state = cls.__new__(cls)
        packed = layout.packed()
        n, w = packed["n_qubits"], packed["n_words"]
        state.n_qubits, state._w = n, w
        (state._sx, state._sz, state._sph, state._dx, state._dz,
         state._lx, state._lz, state._lph, state._meta) = _kernels.new_state(
            n, w, packed["plaq_z"], packed["star_x"],
            packed["dplaq_x"], packed["dstar_z"],
            packed["logical_x_x"], packed["logical_z_z"])
        state._anti = np.zeros(n, dtype=np.uint8)
        state._accx = np.zeros(w, dtype=np.uint64)
        state._accz = np.zeros(w, dtype=np.uint64)
        return state

    def _validate(self, gens, logical_x, logical_z):
        n = self.n_qubits
        for g in gens + [logical_x, logical_z]:
            if g.n_qubits != n:
                raise ValueError("operator length does not match the state")
            if not g.is_hermitian:
                raise ValueError("generators and logicals must be Hermitian")
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if not a.commutes_with(b):
                    raise ValueError("generators must mutually commute")
            if not a.commutes_with(logical_x) or not a.commutes_with(logical_z):
                raise ValueError("logicals must commute with every generator")
        if logical_x.commutes_with(logical_z):
            raise ValueError("logical X and Z must anticommute")
        vecs = [(g.x_bits << n) | g.z_bits for g in gens]
        if _gf2_rank(vecs) != len(gens):
            raise ValueError("generators must be independent over GF(2)")
        if len(gens) > n:
            raise ValueError("more generators than qubits")

    def _build_destabilizers(self, gens):
        """Solve for companion rows with sym(row_i, gen_j) = delta_ij."""
        n = self.n_qubits
        # unknown e = (z_E << n) | x_E; sym(E, g) = x_E . z_g + z_E . x_g,
        # so the coefficient row is (x_g << n) | z_g
        rows = [(g.x_bits << n) | g.z_bits for g in gens]
        for i in range(len(gens)):
            rhs = [1 if j == i else 0 for j in range(len(gens))]
            e = _gf2_solve(rows, rhs, 2 * n)
            ex = e & ((1 << n) - 1)
            ez = e >> n
            self._dx[i] = _pack_bits(ex, self._w)
            self._dz[i] = _pack_bits(ez, self._w)

    def copy(self) -> "CodeState":
        other = CodeState.__new__(CodeState)
        other.n_qubits, other._w = self.n_qubits, self._w
        for name in ("_sx", "_sz", "_sph", "_dx", "_dz", "_lx", "_lz",
                     "_lph", "_meta", "_anti", "_accx", "_accz"):
            setattr(other, name, getattr(self, name).copy())
        return other

    # -- views ---------------------------------------------------------------

    @property
    def rank(self) -> int:
        return int(self._meta[0])

    @property
    def status(self) -> Status:
        return Status(int(self._meta[1]))

    def _row_operator(self, r: int) -> PauliOperator:
        return PauliOperator(self.n_qubits, _unpack_bits(self._sx[r]),
                             _unpack_bits(self._sz[r]), int(self._sph[r]))

    @property
    def generators(self) -> list[PauliOperator]:
        return [self._row_operator(r) for r in range(self.rank)]

    @property
    def logical_x(self) -> PauliOperator:
        return PauliOperator(self.n_qubits, _unpack_bits(self._lx[0]),
                             _unpack_bits(self._lx[1]), int(self._lph[0]))

    @property
    def logical_z(self) -> PauliOperator:
        return PauliOperator(self.n_qubits, _unpack_bits(self._lz[0]),
                             _unpack_bits(self._lz[1]), int(self._lph[1]))

    # -- measurement ----------------------------------------------------------

    def measure(self, op: PauliOperator, rng=None, coin: float | None = None) -> MeasurementRecord:
        """Measure a Hermitian Pauli string; updates the state in place.

        Random outcomes are fixed by ``coin`` in [0, 1) (outcome +1 iff
        coin < 0.5); when coin is None one uniform is drawn from ``rng``
        (default: a fresh numpy generator).  Measuring after loss is legal
        and keeps updating the group; the status never leaves a loss value.
        """
        if op.n_qubits != self.n_qubits:
            raise ValueError("operator length does not match the state")
        if not op.is_hermitian:
            raise ValueError("measured operators must be Hermitian")
        if coin is None:
            coin = float((rng or np.random.default_rng()).random())
        w = self._w
        ox = _pack_bits(op.x_bits, w)
        oz = _pack_bits(op.z_bits, w)
        case, outcome, det = _kernels.measure_packed(
            self._sx, self._sz, self._sph, self._dx, self._dz,
            self._lx, self._lz, self._lph, self._meta,
            ox, oz, op.phase, coin, self._anti, self._accx, self._accz)
        case = int(case)
        if case == -2:
            raise RuntimeError("generator capacity exceeded; invalid state")
        if case == -1:
            outcome = self._extend_with(op, coin)
            return MeasurementRecord(op, outcome, False, 1)
        return MeasurementRecord(op, int(outcome), bool(det), case)

    def _extend_with(self, op: PauliOperator, coin: float) -> int:
        """Case (1) with the operator outside the group: append it with a
        random sign and a freshly solved companion row."""
        n, w, rank = self.n_qubits, self._w, self.rank
        rows = []
        for r in range(rank):
            gx = _unpack_bits(self._sx[r])
            gz = _unpack_bits(self._sz[r])
            rows.append((gx << n) | gz)
        rows.append((op.x_bits << n) | op.z_bits)
        rhs = [0] * rank + [1]
        e = _gf2_solve(rows, rhs, 2 * n)
        ex = e & ((1 << n) - 1)
        ez = e >> n
        epx = _pack_bits(ex, w)
        epz = _pack_bits(ez, w)
        opx = _pack_bits(op.x_bits, w)
        opz = _pack_bits(op.z_bits, w)
        for j in range(rank):
            if _kernels._sym(self._dx[j], self._dz[j], opx, opz, w) == 1:
                self._dx[j] ^= epx
                self._dz[j] ^= epz
        outcome = 1 if coin < 0.5 else -1
        self._sx[rank] = opx
        self._sz[rank] = opz
        self._sph[rank] = (op.phase + (0 if outcome == 1 else 2)) % 4
        self._dx[rank] = epx
        self._dz[rank] = epz
        self._meta[0] = rank + 1
        return outcome

    # -- group queries ---------------------------------------------------------

    def group_contains(self, op: PauliOperator) -> bool:
        """True iff op, ignoring sign, lies in the GF(2) span of the
        generators."""
        if op.n_qubits != self.n_qubits:
            raise ValueError("operator length does not match the state")
        w = self._w
        ox = _pack_bits(op.x_bits, w)
        oz = _pack_bits(op.z_bits, w)
        return bool(_kernels.group_contains_packed(
            self._sx, self._sz, self._dx, self._dz, self._meta,
            ox, oz, self._accx, self._accz))

    def logical_class_contains(self, op: PauliOperator, which: str) -> bool:
        """True iff op is equivalent to the tracked logical modulo the group
        (signs ignored)."""
        rep = self.logical_x if which.lower() == "x" else self.logical_z
        diff = PauliOperator(self.n_qubits, rep.x_bits ^ op.x_bits,
                             rep.z_bits ^ op.z_bits, 0)
        return self.group_contains(diff)

    def canonical_bits(self) -> list[int]:
        """Sign-free canonical form of the generated group: reduced
        row-echelon basis over columns x_0..x_{n-1}, z_0..z_{n-1}."""
        n = self.n_qubits
        vecs = []
        for r in range(self.rank):
            gx = _unpack_bits(self._sx[r])
            gz = _unpack_bits(self._sz[r])
            vecs.append((gx << n) | gz)
        return _gf2_rref(vecs)

    def canonical_lines(self) -> list[str]:
        """Canonical group dump: one sign-free Pauli string per line, sorted.

        Signs depend on measurement outcomes and are not part of the group
        identity, so they are omitted.  The format is the 1-based rendering
        of :meth:`PauliOperator.to_string` without the sign prefix.
        """
        n = self.n_qubits
        mask = (1 << n) - 1
        lines = []
        for v in self.canonical_bits():
            op = PauliOperator(n, (v >> n) & mask, v & mask, 0)
            lines.append(op.to_string()[1:])
        return sorted(lines)

    def canonical_dump(self) -> str:
        return "\n".join(self.canonical_lines()) + "\n"

    def check_invariants(self):
        """Raise AssertionError unless the representation invariants hold."""
        gens = self.generators
        n = self.n_qubits
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                assert a.commutes_with(b), "generators stopped commuting"
        vecs = [(g.x_bits << n) | g.z_bits for g in gens]
        assert _gf2_rank(vecs) == len(gens), "generators became dependent"
        assert len(gens) <= n
        if self.status == Status.ALIVE:
            lx, lz = self.logical_x, self.logical_z
            for g in gens:
                assert g.commutes_with(lx) and g.commutes_with(lz)
            assert not lx.commutes_with(lz), "logicals must anticommute"


def init_code_state(layout: CodeLayout) -> CodeState:
    """Fresh encoded state: all plaquettes and stars with +1 signs, the
    canonical boundary-to-boundary logicals, status alive."""
    return CodeState.from_layout(layout)


def logical_status(state: CodeState) -> Status:
    return state.status
