"""Canonical gadget layouts: encoders, verified ancillas, syndrome extraction
and the recovery protocol description."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuit import CX, H, MZ, PZ, Circuit, CircuitBuilder, Gate, QubitId, TimeStep
from .code import G_ROWS, H_ROWS, N, SYNDROME3, support

VERIFY_MODES = ("on", "off", "perfect")
VARIANTS = ("net1", "net3")
METHODS = ("steane-net1", "steane-net3", "shor")
TARGETS = ("zero", "plus")

# (pivot, row) pairs of the dual-code generator: H on the pivot, then fan out.
PIVOTS = ((3, H_ROWS[0]), (1, H_ROWS[1]), (0, H_ROWS[2]))

# Network-3 verification schedule: per layer, (data qubit, check index) pairs.
# Check 3 (all ones) touches every data qubit, so seven layers are optimal.
NET3_VERIFY_LAYERS = (
    ((0, 3), (3, 0), (1, 1), (2, 2)),
    ((1, 3), (4, 0), (2, 1), (0, 2)),
    ((2, 3), (5, 0), (6, 1), (4, 2)),
    ((3, 3), (6, 0), (5, 1)),
    ((4, 3), (6, 2)),
    ((5, 3),),
    ((6, 3),),
)


class UnsupportedVariantError(ValueError):
    pass


def accept_all(bits: np.ndarray) -> np.ndarray:
    return np.ones(bits.shape[0], dtype=bool)


def accept_all_zero(bits: np.ndarray) -> np.ndarray:
    return ~bits.any(axis=1)


@dataclass(frozen=True)
class GadgetSpec:
    circuit: Circuit
    accept: Callable[[np.ndarray], np.ndarray] = accept_all
    decode: Callable[[np.ndarray], np.ndarray] | None = None
    kind: str = ""
    noiseless_sections: frozenset[str] = frozenset()
    noiseless_roles: frozenset[str] = frozenset()


def _check_verification(verification: str) -> None:
    if verification not in VERIFY_MODES:
        raise ValueError(f"verification must be one of {VERIFY_MODES}, got {verification!r}")


def _perfect(verification: str) -> dict:
    if verification == "perfect":
        return dict(noiseless_sections=frozenset({"verify"}), noiseless_roles=frozenset({"verification"}))
    return {}


def _encoder_steps(b: CircuitBuilder, d: list[int], last_extra: tuple[Gate, ...] = ()) -> None:
    """Serial dual-code encoder: one gate per time step."""
    b.step(*(PZ(q) for q in d), section="G")
    for pivot, _ in sorted(PIVOTS):
        b.step(H(d[pivot]), section="G")
    # round-robin over the pivots; the fan-outs commute, so any order is valid
    fans = [[CX(d[p], d[t]) for t in support(row) if t != p] for p, row in PIVOTS]
    cnots = [g for layer in zip(*fans) for g in layer]
    for i, g in enumerate(cnots):
        extra = last_extra if i == len(cnots) - 1 else ()
        b.step(g, *extra, section="G")


def build_encoder() -> GadgetSpec:
    """|0>^7 -> |0_L>: H on the three pivots, then nine fan-out CNOTs."""
    b = CircuitBuilder("encoder")
    d = b.qubits(N, "data")
    _encoder_steps(b, d)
    return GadgetSpec(b.build(), kind="encoder")


def build_iq_encoder(amplitude: str = "plus") -> GadgetSpec:
    """Encode the information qubit: (|0_L>+|1_L>)/sqrt2 for ``plus``, |0_L>
    for ``zero``.  Qubit 2 carries the logical input and spreads onto the
    0010110 representative of |1_L> before it becomes a fan-out target."""
    if amplitude not in TARGETS:
        raise ValueError(f"unknown amplitude tag {amplitude!r}")
    b = CircuitBuilder(f"iq-encoder-{amplitude}")
    d = b.qubits(N, "data")
    b.step(*(PZ(q) for q in d))
    hs = [0, 1, 3] + ([2] if amplitude == "plus" else [])
    b.step(*(H(d[q]) for q in sorted(hs)))
    b.step(CX(d[2], d[4]), CX(d[3], d[5]), CX(d[1], d[6]))
    b.step(CX(d[2], d[5]), CX(d[3], d[6]), CX(d[0], d[4]))
    b.step(CX(d[1], d[2]), CX(d[3], d[4]), CX(d[0], d[6]))
    b.step(CX(d[0], d[2]), CX(d[1], d[5]))
    return GadgetSpec(b.build(), kind="iq-encoder")


def build_steane_ancilla(variant: str = "net1", verification: str = "on", target: str = "zero") -> GadgetSpec:
    if variant == "net2":
        raise UnsupportedVariantError("net2 layout not published")
    if variant not in VARIANTS:
        raise UnsupportedVariantError(f"unknown Steane ancilla variant {variant!r}")
    _check_verification(verification)
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}")
    verify = verification != "off"
    b = CircuitBuilder(f"steane-{variant}-{verification}-{target}")
    d = b.qubits(N, "ancilla")
    if variant == "net1":
        v = b.qubits(1, "verification")[0] if verify else None
        _encoder_steps(b, d, (PZ(v),) if verify else ())
        if verify:
            for k, row in enumerate(G_ROWS):
                for q in support(row):
                    b.step(CX(d[q], v), section="verify")
                b.step(MZ(v, k), section="verify")
                if k < len(G_ROWS) - 1:
                    b.step(PZ(v), section="verify")
    else:
        v = b.qubits(4, "verification") if verify else []
        b.step(*(PZ(q) for q in d), section="G")
        b.step(*(H(d[p]) for p, _ in sorted(PIVOTS)), section="G")
        b.step(CX(d[3], d[4]), CX(d[1], d[5]), CX(d[0], d[6]), section="G")
        b.step(CX(d[3], d[5]), CX(d[1], d[6]), CX(d[0], d[2]), section="G")
        b.step(CX(d[3], d[6]), CX(d[1], d[2]), CX(d[0], d[4]), *(PZ(q) for q in v), section="G")
        if verify:
            for layer in NET3_VERIFY_LAYERS:
                b.step(*(CX(d[q], v[k]) for q, k in layer), section="verify")
            b.step(*(MZ(q, k) for k, q in enumerate(v)), section="verify")
    if target == "plus":
        b.step(*(H(q) for q in d), section="rotate")
    return GadgetSpec(
        b.build(),
        accept=accept_all_zero if verify else accept_all,
        kind=f"steane-{target}",
        **_perfect(verification),
    )


def build_shor_cat(verification: str = "on") -> GadgetSpec:
    """(|0000>+|1111>)/sqrt2 with the qubit-1/qubit-4 agreement check."""
    _check_verification(verification)
    verify = verification != "off"
    b = CircuitBuilder(f"shor-cat-{verification}")
    c = b.qubits(4, "ancilla")
    v = b.qubits(1, "verification")[0] if verify else None
    b.step(*(PZ(q) for q in c), section="G")
    b.step(H(c[0]), section="G")
    b.step(CX(c[0], c[1]), section="G")
    b.step(CX(c[0], c[2]), section="G")
    b.step(CX(c[0], c[3]), *((PZ(v),) if verify else ()), section="G")
    if verify:
        b.step(CX(c[0], v), section="verify")
        b.step(CX(c[3], v), section="verify")
        b.step(MZ(v, 0), section="verify")
    return GadgetSpec(
        b.build(),
        accept=accept_all_zero if verify else accept_all,
        kind="cat",
        **_perfect(verification),
    )


# syndrome extraction --------------------------------------------------------


def _word_syndrome(bits: np.ndarray) -> np.ndarray:
    w = bits[:, :N].astype(np.int64) @ (1 << np.arange(N - 1, -1, -1))
    return SYNDROME3[w].astype(np.int64)


def _parity(bits: np.ndarray) -> np.ndarray:
    return (bits.sum(axis=1) & 1).astype(np.int64)


@dataclass(frozen=True)
class Stage:
    """One circuit of a half-round.  ``ancilla`` names the factory product it
    consumes (appended after the data qubits); ``decode`` yields ``width``
    syndrome bits from its measurements."""

    circuit: Circuit
    ancilla: str | None = None
    decode: Callable[[np.ndarray], np.ndarray] | None = None
    width: int = 0


def _steane_half(kind: str) -> Stage:
    b = CircuitBuilder(f"steane-{kind}-half")
    d = b.qubits(N, "data")
    a = b.qubits(N, "ancilla")
    if kind == "z":
        # phase errors back-propagate from data targets onto ancilla controls
        b.step(*(CX(a[k], d[k]) for k in range(N)))
        b.step(*(H(q) for q in a))
        b.step(*(MZ(a[k], k) for k in range(N)))
        return Stage(b.build(), "zero", _word_syndrome, 3)
    # the ancilla arrives already rotated (plus target)
    b.step(*(CX(d[k], a[k]) for k in range(N)))
    b.step(*(MZ(a[k], k) for k in range(N)))
    return Stage(b.build(), "plus", _word_syndrome, 3)


def _shor_check(row: int) -> Stage:
    b = CircuitBuilder(f"shor-check-{format(row, '07b')}")
    d = b.qubits(N, "data")
    a = b.qubits(4, "ancilla")
    b.step(*(H(q) for q in a))
    b.step(*(CX(d[q], a[k]) for k, q in enumerate(support(row))))
    b.step(*(MZ(q, k) for k, q in enumerate(a)))
    return Stage(b.build(), "cat", _parity, 1)


def _data_rotation() -> Stage:
    b = CircuitBuilder("data-rotation")
    d = b.qubits(N, "data")
    b.step(*(H(q) for q in d))
    return Stage(b.build())


@dataclass(frozen=True)
class SyndromeRound:
    method: str
    halves: dict[str, tuple[Stage, ...]]

    @property
    def circuit(self) -> Circuit:
        return chain(f"{self.method}-round", [s for h in ("z", "x") for s in self.halves[h]])


def build_syndrome_round(method: str) -> SyndromeRound:
    if method == "steane":
        return SyndromeRound("steane", {"z": (_steane_half("z"),), "x": (_steane_half("x"),)})
    if method == "shor":
        checks = tuple(_shor_check(r) for r in H_ROWS)
        rot = _data_rotation()
        return SyndromeRound("shor", {"z": (rot, *checks, rot), "x": checks})
    raise ValueError(f"unknown syndrome method {method!r}")


def chain(name: str, stages) -> Circuit:
    """Concatenate stages over shared data qubits, giving every consumed
    ancilla its own block.  Used for layout dumps and gate censuses."""
    qubits = [QubitId(q, "data") for q in range(N)]
    steps = []
    slot0 = 0
    for st in stages:
        c = st.circuit
        remap = {q: q for q in range(N)}
        for q in c.qubits[N:]:
            remap[q.index] = len(qubits)
            qubits.append(QubitId(len(qubits), q.role))
        for s in c.steps:
            gates = tuple(
                Gate(g.kind, tuple(remap[q] for q in g.qubits), None if g.slot is None else g.slot + slot0)
                for g in s.gates
            )
            steps.append(TimeStep(gates, s.section))
        slot0 += c.n_slots
    return Circuit(tuple(qubits), tuple(steps), name)


def majority_syndrome(s1: int, s2: int, s3: int | None = None) -> int | None:
    if s1 == s2:
        return s1
    if s3 is None:
        raise ValueError("a third syndrome is required when the first two disagree")
    if s3 in (s1, s2):
        return s3
    return None


def majority_array(s1: np.ndarray, s2: np.ndarray, s3: np.ndarray) -> np.ndarray:
    """Vectorized :func:`majority_syndrome`; -1 stands for 'no correction'.
    Entries of ``s3`` are ignored where ``s1 == s2``."""
    out = np.where(s1 == s2, s1, -1)
    out = np.where((s1 != s2) & ((s3 == s1) | (s3 == s2)), s3, out)
    return out


@dataclass(frozen=True)
class RecoveryProtocol:
    method: str = "steane-net3"
    rounds: int = 3
    verification: str = "on"
    amplitude: str = "plus"
    majority: str = "per-type"
    retry_cap: int = 100
    first_half: str = "z"

    @property
    def half_order(self) -> tuple[str, str]:
        return ("z", "x") if self.first_half == "z" else ("x", "z")

    def __post_init__(self):
        if self.method not in METHODS:
            if self.method == "steane-net2":
                raise UnsupportedVariantError("net2 layout not published")
            raise ValueError(f"unknown recovery method {self.method!r}")
        if self.rounds not in (1, 3):
            raise ValueError("rounds must be 1 or 3")
        _check_verification(self.verification)
        if self.amplitude not in TARGETS:
            raise ValueError(f"unknown amplitude tag {self.amplitude!r}")
        if self.majority not in ("per-type", "combined"):
            raise ValueError(f"unknown majority rule {self.majority!r}")
        if self.first_half not in ("z", "x"):
            raise ValueError("first_half must be 'z' or 'x'")


@dataclass(frozen=True)
class Recovery:
    protocol: RecoveryProtocol
    encoder: GadgetSpec
    round: SyndromeRound
    ancillas: dict[str, GadgetSpec] = field(default_factory=dict)

    @property
    def extraction_circuit(self) -> Circuit:
        """All syndrome rounds laid end to end (ancilla synthesis excluded)."""
        stages = [s for _ in range(self.protocol.rounds) for h in self.protocol.half_order for s in self.round.halves[h]]
        return chain(f"{self.protocol.method}-r{self.protocol.rounds}", stages)


def build_recovery(protocol: RecoveryProtocol) -> Recovery:
    if protocol.method == "shor":
        rnd = build_syndrome_round("shor")
        ancillas = {"cat": build_shor_cat(protocol.verification)}
    else:
        variant = protocol.method.split("-")[1]
        rnd = build_syndrome_round("steane")
        ancillas = {
            t: build_steane_ancilla(variant, protocol.verification, t) for t in TARGETS
        }
    return Recovery(protocol, build_iq_encoder(protocol.amplitude), rnd, ancillas)
