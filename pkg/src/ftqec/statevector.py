"""Exact state-vector simulation, qubit 0 as the most significant index bit.

Used as ground truth for fidelities and to cross-check the frame backend.
"""

from __future__ import annotations

import numpy as np

from .circuit import GATE2, Circuit, Gate, GateKind
from .code import N, ONE_L_WORDS, ZERO_L_WORDS
from .noise import LehmerRng, NoNoise, TrialContext

SOFT_CAP = 15
MAX_QUBITS = 20
_S = 1 / np.sqrt(2)


class MeasurementInconsistencyError(RuntimeError):
    pass


class ContractViolation(RuntimeError):
    pass


class StateVector:
    def __init__(self, psi: np.ndarray):
        psi = np.asarray(psi, dtype=np.complex128)
        n = int(round(np.log2(psi.size)))
        if 2**n != psi.size:
            raise ValueError("amplitude count must be a power of two")
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
        self.psi = psi.reshape((2,) * n)

    @classmethod
    def zeros(cls, n: int) -> "StateVector":
        psi = np.zeros(2**n, dtype=np.complex128)
        psi[0] = 1
        return cls(psi)

    @classmethod
    def from_words(cls, words, n: int = N) -> "StateVector":
        psi = np.zeros(2**n, dtype=np.complex128)
        psi[list(words)] = 1
        return cls(psi / np.linalg.norm(psi))

    @property
    def n(self) -> int:
        return self.psi.ndim

    def vector(self) -> np.ndarray:
        return self.psi.reshape(-1)

    def copy(self) -> "StateVector":
        return StateVector(self.psi.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def _idx(self, q: int, v) -> tuple:
        if not 0 <= q < self.n:
            raise IndexError(f"qubit {q} out of range for {self.n} qubits")
        return (slice(None),) * q + (v,)

    # in-place primitives -------------------------------------------------
    def h(self, q: int) -> None:
        i0, i1 = self._idx(q, 0), self._idx(q, 1)
        a0 = self.psi[i0].copy()
        a1 = self.psi[i1].copy()
        self.psi[i0] = (a0 + a1) * _S
        self.psi[i1] = (a0 - a1) * _S

    def cx(self, c: int, t: int) -> None:
        if c == t:
            raise ValueError("CNOT control equals target")
        self._idx(t, 0)
        sub = self.psi[self._idx(c, 1)]
        axis = t if t < c else t - 1
        sub[...] = np.flip(sub, axis).copy()

    def x(self, q: int) -> None:
        self.psi = np.flip(self.psi, q).copy()

    def z(self, q: int) -> None:
        self.psi[self._idx(q, 1)] *= -1

    def y(self, q: int) -> None:
        # Y = iXZ
        self.z(q)
        self.x(q)
        self.psi *= 1j

    def pauli(self, label: str, q: int) -> None:
        {"I": lambda q: None, "X": self.x, "Y": self.y, "Z": self.z}[label](q)

    def prob_one(self, q: int) -> float:
        return float(np.sum(np.abs(self.psi[self._idx(q, 1)]) ** 2))

    def measure(self, q: int, u: float) -> int:
        """Born-rule outcome (0 iff ``u`` < P(0)); collapses in place."""
        p1 = self.prob_one(q)
        p0 = 1.0 - p1
        bit = 0 if u < p0 else 1
        p = p0 if bit == 0 else p1
        if p < 1e-12:
            raise MeasurementInconsistencyError(f"zero-norm projection on qubit {q}")
        self.psi[self._idx(q, 1 - bit)] = 0
        self.psi /= np.sqrt(p)
        return bit

    def reset(self, q: int) -> None:
        p1 = self.prob_one(q)
        if p1 > 1 - 1e-10:
            self.x(q)
        elif p1 > 1e-10:
            raise ContractViolation(f"reset of qubit {q} that is not in a computational state")

    def apply(self, gate: Gate) -> None:
        k = gate.kind
        if k is GateKind.H:
            self.h(gate.qubits[0])
        elif k is GateKind.CX:
            self.cx(*gate.qubits)
        elif k is GateKind.PREP:
            self.reset(gate.qubits[0])
        else:
            raise ValueError("measurements need a random draw; use measure()")

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.multiply.outer(self.psi, other.psi))

    def take(self, fixed: dict[int, int]) -> "StateVector":
        """Drop qubits known to be in computational states ``{qubit: bit}``."""
        idx = tuple(fixed.get(q, slice(None)) for q in range(self.n))
        out = self.psi[idx]
        if abs(np.linalg.norm(out) - 1) > 1e-9:
            raise ContractViolation("dropped qubits were not in the stated basis states")
        return StateVector(out.copy())


# functional API ----------------------------------------------------------


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    out = state.copy()
    out.apply(gate)
    return out


def apply_pauli(state: StateVector, pauli: str, qubits) -> StateVector:
    """Apply ``pauli`` (one letter per qubit) to ``qubits``."""
    if isinstance(qubits, int):
        qubits = (qubits,)
    if len(pauli) != len(qubits):
        raise ValueError("one Pauli letter per qubit")
    out = state.copy()
    for p, q in zip(pauli, qubits):
        out.pauli(p, q)
    return out


def measure_z(state: StateVector, qubit: int, rng: LehmerRng) -> tuple[int, StateVector]:
    out = state.copy()
    bit = out.measure(qubit, rng.uniform())
    return bit, out


def fidelity(state: StateVector, reference: StateVector, data_qubits) -> float:
    """|<reference|data factor>|^2; every other qubit must be in a basis state."""
    data_qubits = list(data_qubits)
    others = [q for q in range(state.n) if q not in data_qubits]
    fixed = {}
    for q in others:
        p1 = state.prob_one(q)
        if min(p1, 1 - p1) > 1e-10:
            raise ContractViolation(f"qubit {q} is entangled with the data (P1={p1:.3g})")
        fixed[q] = int(p1 > 0.5)
    psi = state.take(fixed).psi if fixed else state.psi
    remaining = [q for q in range(state.n) if q not in fixed]
    psi = np.transpose(psi, [remaining.index(q) for q in data_qubits])
    return float(abs(np.vdot(reference.vector(), psi.reshape(-1))) ** 2)


def zero_l() -> StateVector:
    return StateVector.from_words(ZERO_L_WORDS)


def one_l() -> StateVector:
    return StateVector.from_words(ONE_L_WORDS)


def plus_l() -> StateVector:
    return StateVector.from_words(ZERO_L_WORDS + ONE_L_WORDS)


def reference_state(amplitude: str) -> StateVector:
    return {"plus": plus_l, "zero": zero_l}[amplitude]()


# batched executor ----------------------------------------------------------

_CODE1 = (None, "X", "Y", "Z")


def _apply_codes(state: StateVector, kind: str, qubits, code: int) -> None:
    if not code:
        return
    if kind == GATE2:
        a, b = code >> 2, code & 3
        if a:
            state.pauli(_CODE1[a], qubits[0])
        if b:
            state.pauli(_CODE1[b], qubits[1])
    else:
        state.pauli(_CODE1[code], qubits[0])


def execute(
    circuit: Circuit,
    register: list[StateVector] | None,
    ctx: TrialContext,
    noise=None,
    noiseless_sections: frozenset[str] = frozenset(),
    noiseless_roles: frozenset[str] = frozenset(),
    memory: str = "idle",
) -> tuple[list[StateVector], np.ndarray]:
    """State-vector counterpart of :func:`ftqec.frame.execute`; returns raw
    measurement outcomes.  ``ctx.rng`` supplies the Born-rule draws."""
    noise = noise or NoNoise()
    n = len(ctx)
    fresh = sorted(circuit.fresh)
    if fresh and fresh[0] < len(circuit.inputs):
        raise ValueError("input qubits must precede fresh qubits in the roster")
    if circuit.n_qubits > SOFT_CAP:
        raise ValueError(f"{circuit.n_qubits} qubits exceeds the soft cap of {SOFT_CAP}")
    blank = StateVector.zeros(len(fresh)) if fresh else None
    states = []
    for i in range(n):
        if register is None or not circuit.inputs:
            states.append(blank.copy() if blank else StateVector.zeros(0))
        else:
            states.append(register[i].tensor(blank) if blank else register[i].copy())
    quiet_q = {q.index for q in circuit.qubits if q.role in noiseless_roles}
    bits = np.zeros((n, circuit.n_slots), dtype=np.uint8)
    dead: dict[int, int] = {}
    for t, ps in enumerate(circuit.plan_for(memory)):
        quiet = ps.section in noiseless_sections
        for g, kind in ps.gates:
            noisy = kind is not None and not quiet and not quiet_q.intersection(g.qubits)
            if g.kind is GateKind.MEAS:
                q = g.qubits[0]
                if noisy:
                    codes = noise.sample(ctx, kind, t, g.qubits)
                    for s, c in zip(states, codes):
                        _apply_codes(s, kind, g.qubits, c)
                u = ctx.rng.uniform()
                for i, s in enumerate(states):
                    bits[i, g.slot] = s.measure(q, u[i])
                dead[q] = g.slot
                continue
            if kind is not None:  # initial preparations are already |0>
                for s in states:
                    s.apply(g)
            if g.kind is GateKind.PREP:
                dead.pop(g.qubits[0], None)
            if noisy:
                codes = noise.sample(ctx, kind, t, g.qubits)
                for s, c in zip(states, codes):
                    _apply_codes(s, kind, g.qubits, c)
        if not quiet:
            for q in ps.idle:
                if q not in quiet_q:
                    codes = noise.sample(ctx, "memory", t, (q,))
                    for s, c in zip(states, codes):
                        _apply_codes(s, "memory", (q,), c)
    ctx.base += len(circuit.steps)
    out = []
    for i, s in enumerate(states):
        fixed = {q: int(bits[i, slot]) for q, slot in dead.items()}
        out.append(s.take(fixed) if fixed else s)
    return out, bits
