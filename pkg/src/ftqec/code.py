"""Classical tables for the seven-qubit [[7,1,3]] CSS code.

Words are 7-bit integers read left to right, so qubit 1 (index 0) is the most
significant bit and ``format(word, "07b")`` prints the word the usual way.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

N = 7
ALL_ONES = 0b1111111

# Rows of the parity-check matrix of the Hamming code, equal to the generator
# matrix of its dual [7,3,4].  Column j, read top to bottom, is j in binary.
H_ROWS = (0b0001111, 0b0110011, 0b1010101)
# Parity checks of the dual code: the three rows above plus the all-ones word.
G_ROWS = H_ROWS + (ALL_ONES,)

H_MATRIX = np.array([[int(b) for b in format(r, "07b")] for r in H_ROWS], dtype=np.uint8)
G_MATRIX = np.array([[int(b) for b in format(r, "07b")] for r in G_ROWS], dtype=np.uint8)


def weight(word: int) -> int:
    return bin(word).count("1")


def bit(word: int, qubit: int) -> int:
    """Bit of ``word`` belonging to 0-based ``qubit``."""
    return (word >> (N - 1 - qubit)) & 1


def word_from_bits(bits) -> int:
    w = 0
    for b in bits:
        w = (w << 1) | (int(b) & 1)
    return w


def support(word: int) -> tuple[int, ...]:
    """0-based qubit indices where ``word`` has a one."""
    return tuple(q for q in range(N) if bit(word, q))


def _span(rows) -> tuple[int, ...]:
    words = {0}
    for r in rows:
        words |= {w ^ r for w in words}
    return tuple(sorted(words))


# C-perp: the eight words of |0_L>.  C: C-perp plus its all-ones coset.
DUAL_CODE = _span(H_ROWS)
CODE = _span(G_ROWS)
ZERO_L_WORDS = DUAL_CODE
ONE_L_WORDS = tuple(sorted(w ^ ALL_ONES for w in DUAL_CODE))


def syndrome3(e: int) -> int:
    """H_C . e over GF(2), row 1 as the most significant syndrome bit."""
    s = 0
    for r in H_ROWS:
        s = (s << 1) | (weight(r & e) & 1)
    return s


def syndrome4(e: int) -> int:
    """G_C . e over GF(2); zero exactly on the words of C-perp."""
    s = 0
    for r in G_ROWS:
        s = (s << 1) | (weight(r & e) & 1)
    return s


def decode_position(s: int) -> int | None:
    """1-based position flagged by a 3-bit syndrome, or None for 000."""
    if not 0 <= s < 8:
        raise ValueError(f"syndrome out of range: {s}")
    return s or None


def effective_weight(e: int) -> int:
    return min(weight(e ^ v) for v in DUAL_CODE)


def _build_leaders() -> tuple[int, ...]:
    leaders: dict[int, int] = {}
    # ascending word value breaks ties deterministically
    for e in sorted(range(128), key=lambda w: (weight(w), w)):
        leaders.setdefault(syndrome4(e), e)
    return tuple(leaders[s] for s in range(16))


COSET_LEADERS = _build_leaders()
EFFECTIVE_WEIGHT = np.array([effective_weight(e) for e in range(128)], dtype=np.uint8)
SYNDROME3 = np.array([syndrome3(e) for e in range(128)], dtype=np.uint8)


def coset_leader(s: int) -> int:
    if not 0 <= s < 16:
        raise ValueError(f"4-bit syndrome out of range: {s}")
    return COSET_LEADERS[s]


class LogicalAction(str, Enum):
    STABILIZER = "stabilizer"
    LOGICAL_X = "logical-X"
    LOGICAL_Z = "logical-Z"
    LOGICAL_Y = "logical-Y"
    DETECTABLE = "detectable"


@dataclass(frozen=True)
class PauliString:
    """Pauli operator on the seven code qubits, phase dropped."""

    x: int = 0
    z: int = 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return PauliString(self.x ^ other.x, self.z ^ other.z)

    @classmethod
    def single(cls, label: str, qubit: int) -> "PauliString":
        m = 1 << (N - 1 - qubit)
        return cls(m if label in "XY" else 0, m if label in "YZ" else 0)

    def label(self) -> str:
        out = []
        for q in range(N):
            out.append("IXZY"[bit(self.x, q) | (bit(self.z, q) << 1)])
        return "".join(out)


def logical_action(p: PauliString) -> LogicalAction:
    if syndrome3(p.x) or syndrome3(p.z):
        return LogicalAction.DETECTABLE
    # normalizer elements have x, z in C; odd weight means a logical component
    lx, lz = weight(p.x) & 1, weight(p.z) & 1
    return (
        LogicalAction.STABILIZER,
        LogicalAction.LOGICAL_X,
        LogicalAction.LOGICAL_Z,
        LogicalAction.LOGICAL_Y,
    )[lx | (lz << 1)]


# Residual actions that leave the reference state unchanged, per encoded state.
HARMLESS = {
    "plus": (LogicalAction.STABILIZER, LogicalAction.LOGICAL_X),
    "zero": (LogicalAction.STABILIZER, LogicalAction.LOGICAL_Z),
}


def trajectory_fidelity(residual: PauliString, amplitude: str = "plus") -> int:
    """0/1 fidelity of a Pauli residual on an encoded stabilizer state."""
    return int(logical_action(residual) in HARMLESS[amplitude])


def trajectory_fidelity_array(x: np.ndarray, z: np.ndarray, amplitude: str = "plus") -> np.ndarray:
    """Vectorized :func:`trajectory_fidelity` over arrays of 7-bit words."""
    x = np.asarray(x, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    ok = (SYNDROME3[x] == 0) & (SYNDROME3[z] == 0)
    parity = _PARITY7
    if amplitude == "plus":
        ok &= parity[z] == 0
    elif amplitude == "zero":
        ok &= parity[x] == 0
    else:
        raise ValueError(f"unknown amplitude tag {amplitude!r}")
    return ok.astype(np.uint8)


_PARITY7 = np.array([weight(e) & 1 for e in range(128)], dtype=np.uint8)
