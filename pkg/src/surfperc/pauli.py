"""Binary-symplectic Pauli strings and their group operations.

A Pauli string on n qubits is stored as two n-bit integers (x_bits, z_bits)
plus a phase exponent of i modulo 4.  Bit i of x_bits/z_bits marks an X/Z
component on qubit i; a qubit with both bits set carries Y.  The phase is
measured relative to the product of Hermitian single-qubit factors, so every
Hermitian string has phase 0 (sign +1) or 2 (sign -1).

Python integers act as packed bit vectors: all group operations are word-wise
AND/XOR plus popcounts, so strings with hundreds of qubits stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "PauliOperator",
    "commutes",
    "multiply",
    "single_qubit",
    "identity",
    "from_support",
]

_BASIS_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_BASIS = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_SIGN_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}


@dataclass(frozen=True)
class PauliOperator:
    """Immutable Pauli string: (x_bits, z_bits) bit vectors and an i-exponent."""

    n_qubits: int
    x_bits: int
    z_bits: int
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits <= 0:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        mask = (1 << self.n_qubits) - 1
        if not (0 <= self.x_bits <= mask and 0 <= self.z_bits <= mask):
            raise ValueError("bit vectors exceed the declared qubit count")
        if not 0 <= self.phase < 4:
            raise ValueError(f"phase must be in 0..3, got {self.phase}")

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian operators."""
        if not self.is_hermitian:
            raise ValueError("sign undefined for non-Hermitian phase")
        return 1 if self.phase == 0 else -1

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0 and self.phase == 0

    def support(self) -> tuple[int, ...]:
        """Qubit indices (0-based) carrying a non-identity factor."""
        bits = self.x_bits | self.z_bits
        out = []
        q = 0
        while bits:
            if bits & 1:
                out.append(q)
            bits >>= 1
            q += 1
        return tuple(out)

    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def basis_at(self, qubit: int) -> str:
        """'I', 'X', 'Y' or 'Z' at the given qubit."""
        x = (self.x_bits >> qubit) & 1
        z = (self.z_bits >> qubit) & 1
        return _BITS_BASIS.get((x, z), "I")

    def commutes_with(self, other: "PauliOperator") -> bool:
        return commutes(self, other)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def equal_up_to_sign(self, other: "PauliOperator") -> bool:
        return (
            self.n_qubits == other.n_qubits
            and self.x_bits == other.x_bits
            and self.z_bits == other.z_bits
        )

    def to_string(self, one_based: bool = True) -> str:
        """Render as e.g. '+X1 Y3 Z4' (qubit labels 1-based by default)."""
        off = 1 if one_based else 0
        parts = [
            f"{self.basis_at(q)}{q + off}"
            for q in self.support()
        ]
        body = " ".join(parts) if parts else "I"
        return _SIGN_PREFIX[self.phase] + body

    def __str__(self) -> str:
        return self.to_string()

    @classmethod
    def from_string(cls, n_qubits: int, text: str, one_based: bool = True) -> "PauliOperator":
        """Parse the to_string format; bare strings default to sign '+'."""
        text = text.strip()
        phase = 0
        for prefix, ph in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2)):
            if text.startswith(prefix):
                phase = ph
                text = text[len(prefix):].strip()
                break
        x = z = 0
        if text and text != "I":
            for token in text.split():
                basis, label = token[0].upper(), int(token[1:])
                q = label - (1 if one_based else 0)
                if not 0 <= q < n_qubits:
                    raise ValueError(f"qubit label {label} out of range for n={n_qubits}")
                if (x | z) >> q & 1:
                    raise ValueError(f"duplicate qubit {label} in {text!r}")
                bx, bz = _BASIS_BITS[basis]
                x |= bx << q
                z |= bz << q
        return cls(n_qubits, x, z, phase)


def _check_lengths(a: PauliOperator, b: PauliOperator):
    if a.n_qubits != b.n_qubits:
        raise ValueError(
            f"operator lengths differ: {a.n_qubits} vs {b.n_qubits}"
        )


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True iff the symplectic inner product x_a.z_b + z_a.x_b vanishes mod 2."""
    _check_lengths(a, b)
    return (((a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()) & 1) == 0


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Group product ab with exact phase tracking.

    The i-exponent of the product relative to its own Hermitian factorization
    is p_a + p_b + |x_a&z_a| + |x_b&z_b| + 2|z_a&x_b| - |x_ab&z_ab| mod 4;
    commuting Hermitian inputs always yield a Hermitian result.
    """
    _check_lengths(a, b)
    x = a.x_bits ^ b.x_bits
    z = a.z_bits ^ b.z_bits
    phase = (
        a.phase
        + b.phase
        + (a.x_bits & a.z_bits).bit_count()
        + (b.x_bits & b.z_bits).bit_count()
        + 2 * (a.z_bits & b.x_bits).bit_count()
        - (x & z).bit_count()
    ) % 4
    return PauliOperator(a.n_qubits, x, z, phase)


def single_qubit(n: int, site: int, basis: str) -> PauliOperator:
    """Weight-1 Hermitian operator X/Y/Z on the given 0-based site."""
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for n={n}")
    try:
        bx, bz = _BASIS_BITS[basis.upper()]
    except KeyError:
        raise ValueError(f"basis must be X, Y or Z, got {basis!r}") from None
    return PauliOperator(n, bx << site, bz << site, 0)


def identity(n: int) -> PauliOperator:
    return PauliOperator(n, 0, 0, 0)


def from_support(n: int, sites, basis: str, sign: int = 1) -> PauliOperator:
    """Product of one fixed basis over a set of sites, e.g. a plaquette."""
    bx, bz = _BASIS_BITS[basis.upper()]
    x = z = 0
    for q in sites:
        if not 0 <= q < n:
            raise ValueError(f"site {q} out of range for n={n}")
        x |= bx << q
        z |= bz << q
    return PauliOperator(n, x, z, 0 if sign > 0 else 2)
