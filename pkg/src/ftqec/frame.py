"""Pauli-frame simulation: propagate X/Z error masks through Clifford circuits.

Measured bits are reported as flips relative to the ideal (noiseless) outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import GATE2, Circuit, Gate, GateKind
from .code import N, PauliString, trajectory_fidelity  # noqa: F401  (re-exported)
from .noise import NoNoise, TrialContext


@dataclass
class PauliFrame:
    """Single-trial frame; bit q of ``x``/``z`` belongs to qubit q."""

    n: int
    x: int = 0
    z: int = 0

    def _check(self, q: int) -> None:
        if not 0 <= q < self.n:
            raise IndexError(f"qubit {q} outside frame of {self.n} qubits")

    def get(self, q: int) -> tuple[int, int]:
        self._check(q)
        return (self.x >> q) & 1, (self.z >> q) & 1

    def restrict(self, qubits) -> PauliString:
        """Code-word PauliString over the given 7 qubits (first = MSB)."""
        x = z = 0
        for q in qubits:
            bx, bz = self.get(q)
            x, z = (x << 1) | bx, (z << 1) | bz
        return PauliString(x, z)


def frame_apply_gate(frame: PauliFrame, gate: Gate) -> PauliFrame:
    for q in gate.qubits:
        frame._check(q)
    x, z = frame.x, frame.z
    if gate.kind is GateKind.H:
        q = gate.qubits[0]
        bx, bz = (x >> q) & 1, (z >> q) & 1
        x = (x & ~(1 << q)) | (bz << q)
        z = (z & ~(1 << q)) | (bx << q)
    elif gate.kind is GateKind.CX:
        c, t = gate.qubits
        x ^= ((x >> c) & 1) << t
        z ^= ((z >> t) & 1) << c
    elif gate.kind is GateKind.PREP:
        q = gate.qubits[0]
        x &= ~(1 << q)
        z &= ~(1 << q)
    return PauliFrame(frame.n, x, z)


def frame_measurement_flip(frame: PauliFrame, qubit: int) -> int:
    return frame.get(qubit)[0]


class FrameBatch:
    """Frames of a batch of trials: ``x[q, i]`` is the X bit of qubit q in trial i."""

    def __init__(self, x: np.ndarray, z: np.ndarray):
        self.x = x
        self.z = z

    @classmethod
    def zeros(cls, n_qubits: int, n_trials: int) -> "FrameBatch":
        return cls(np.zeros((n_qubits, n_trials), np.uint8), np.zeros((n_qubits, n_trials), np.uint8))

    @property
    def n_qubits(self) -> int:
        return self.x.shape[0]

    def __len__(self) -> int:
        return self.x.shape[1]

    def subset(self, idx) -> "FrameBatch":
        return FrameBatch(self.x[:, idx], self.z[:, idx])

    def update(self, idx, other: "FrameBatch") -> None:
        self.x[:, idx] = other.x
        self.z[:, idx] = other.z

    def rows(self, qubits) -> "FrameBatch":
        qubits = list(qubits)
        return FrameBatch(self.x[qubits], self.z[qubits])

    @staticmethod
    def concat(*regs: "FrameBatch") -> "FrameBatch":
        return FrameBatch(np.vstack([r.x for r in regs]), np.vstack([r.z for r in regs]))

    def words(self) -> tuple[np.ndarray, np.ndarray]:
        """Pack the first seven rows into code words (qubit 0 most significant)."""
        w = np.array([1 << (N - 1 - q) for q in range(N)], dtype=np.int64)
        return w @ self.x[:N].astype(np.int64), w @ self.z[:N].astype(np.int64)

    def apply_pauli(self, q: int, codes: np.ndarray) -> None:
        """Apply single-qubit codes 0=I, 1=X, 2=Y, 3=Z."""
        self.x[q] ^= (codes == 1) | (codes == 2)
        self.z[q] ^= (codes == 2) | (codes == 3)

    def apply_codes(self, kind: str, qubits: tuple[int, ...], codes: np.ndarray) -> None:
        if kind == GATE2:
            self.apply_pauli(qubits[0], codes >> 2)
            self.apply_pauli(qubits[1], codes & 3)
        else:
            self.apply_pauli(qubits[0], codes)


def _apply_ideal(frames: FrameBatch, g: Gate) -> None:
    x, z = frames.x, frames.z
    if g.kind is GateKind.H:
        q = g.qubits[0]
        x[q], z[q] = z[q].copy(), x[q].copy()
    elif g.kind is GateKind.CX:
        c, t = g.qubits
        x[t] ^= x[c]
        z[c] ^= z[t]
    elif g.kind is GateKind.PREP:
        q = g.qubits[0]
        x[q] = 0
        z[q] = 0


def execute(
    circuit: Circuit,
    register: FrameBatch | None,
    ctx: TrialContext,
    noise=None,
    noiseless_sections: frozenset[str] = frozenset(),
    noiseless_roles: frozenset[str] = frozenset(),
    memory: str = "idle",
) -> tuple[FrameBatch, np.ndarray]:
    """Run ``circuit`` on a batch.  ``register`` holds the input qubits in
    roster order.  Returns the output qubits' frames and the measurement flips
    (trials x slots)."""
    noise = noise or NoNoise()
    n = len(ctx)
    frames = FrameBatch.zeros(circuit.n_qubits, n)
    if circuit.inputs:
        frames.x[list(circuit.inputs)] = register.x
        frames.z[list(circuit.inputs)] = register.z
    quiet_q = {q.index for q in circuit.qubits if q.role in noiseless_roles}
    bits = np.zeros((n, circuit.n_slots), dtype=np.uint8)
    for t, ps in enumerate(circuit.plan_for(memory)):
        quiet = ps.section in noiseless_sections
        for g, kind in ps.gates:
            noisy = kind is not None and not quiet and not quiet_q.intersection(g.qubits)
            if g.kind is GateKind.MEAS:
                q = g.qubits[0]
                if noisy:
                    frames.apply_pauli(q, noise.sample(ctx, kind, t, g.qubits))
                bits[:, g.slot] = frames.x[q]
                continue
            _apply_ideal(frames, g)
            if noisy:
                frames.apply_codes(kind, g.qubits, noise.sample(ctx, kind, t, g.qubits))
        if not quiet:
            for q in ps.idle:
                if q not in quiet_q:
                    frames.apply_pauli(q, noise.sample(ctx, "memory", t, (q,)))
    ctx.base += len(circuit.steps)
    return frames.rows(circuit.outputs), bits
