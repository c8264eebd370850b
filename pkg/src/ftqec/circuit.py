"""Time-stepped circuits whose error locations can be enumerated.

A qubit whose first gate is ``PZ`` is fresh: that preparation is noiseless and
is not a gate location, but the qubit is exposed to a memory location in the
step it is allocated.  All other qubits are inputs, live from step 0.  A
measured qubit is dead until an explicit ``PZ`` reset, which is a noisy
one-qubit gate location.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

ROLES = ("data", "ancilla", "verification")

MEMORY = "memory"
GATE1 = "1q-gate"
GATE2 = "2q-gate"
MEASURE = "measurement"
LOCATION_KINDS = (GATE1, GATE2, MEASURE, MEMORY)


class GateKind(str, Enum):
    PREP = "PZ"
    H = "H"
    CX = "CX"
    MEAS = "MZ"


@dataclass(frozen=True)
class QubitId:
    index: int
    role: str = "data"

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("qubit index must be non-negative")
        if self.role not in ROLES:
            raise ValueError(f"unknown qubit role {self.role!r}")


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    slot: int | None = None

    def __str__(self) -> str:
        ops = " ".join(f"q{q}" for q in self.qubits)
        if self.kind is GateKind.MEAS:
            return f"MZ {ops} -> c{self.slot}"
        return f"{self.kind.value} {ops}"


def H(q: int) -> Gate:
    return Gate(GateKind.H, (q,))


def CX(c: int, t: int) -> Gate:
    return Gate(GateKind.CX, (c, t))


def MZ(q: int, slot: int) -> Gate:
    return Gate(GateKind.MEAS, (q,), slot)


def PZ(q: int) -> Gate:
    return Gate(GateKind.PREP, (q,))


@dataclass(frozen=True)
class TimeStep:
    gates: tuple[Gate, ...]
    section: str = ""


@dataclass(frozen=True)
class LocationRef:
    step: int
    kind: str
    qubits: tuple[int, ...]
    gate: int | None = None  # index within the step; None for memory


@dataclass(frozen=True)
class PlannedStep:
    """Execution order of one step: gates (with their location kind, or None
    for a noiseless initial preparation) followed by idle qubits."""

    section: str
    gates: tuple[tuple[Gate, str | None], ...]
    idle: tuple[int, ...]


@dataclass(frozen=True)
class Circuit:
    qubits: tuple[QubitId, ...]
    steps: tuple[TimeStep, ...]
    name: str = ""
    annotations: Mapping[str, object] = field(default_factory=dict, compare=False)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @cached_property
    def n_slots(self) -> int:
        slots = [g.slot for s in self.steps for g in s.gates if g.kind is GateKind.MEAS]
        return max(slots) + 1 if slots else 0

    def gates(self) -> Iterable[Gate]:
        for s in self.steps:
            yield from s.gates

    @cached_property
    def fresh(self) -> frozenset[int]:
        """Qubits whose first operation is a preparation."""
        first: dict[int, Gate] = {}
        for g in self.gates():
            for q in g.qubits:
                first.setdefault(q, g)
        return frozenset(q for q, g in first.items() if g.kind is GateKind.PREP)

    @cached_property
    def inputs(self) -> tuple[int, ...]:
        return tuple(q.index for q in self.qubits if q.index not in self.fresh)

    @cached_property
    def outputs(self) -> tuple[int, ...]:
        last: dict[int, Gate] = {}
        for g in self.gates():
            for q in g.qubits:
                last[q] = g
        return tuple(
            q.index
            for q in self.qubits
            if q.index not in last or last[q.index].kind is not GateKind.MEAS
        )

    @cached_property
    def plan(self) -> tuple[PlannedStep, ...]:
        return self._make_plan(all_memory=False)

    @cached_property
    def plan_all_memory(self) -> tuple[PlannedStep, ...]:
        """Variant in which every allocated qubit also takes a memory location,
        whether or not a gate acts on it."""
        return self._make_plan(all_memory=True)

    def plan_for(self, memory: str = "idle") -> tuple[PlannedStep, ...]:
        if memory == "idle":
            return self.plan
        if memory == "all":
            return self.plan_all_memory
        raise ValueError(f"unknown memory counting mode {memory!r}")

    def _make_plan(self, all_memory: bool) -> tuple[PlannedStep, ...]:
        if validate_circuit(self):
            raise ValueError(f"malformed circuit {self.name!r}: {validate_circuit(self)}")
        roster = [q.index for q in self.qubits]
        live = {q: q not in self.fresh for q in roster}
        started: set[int] = set()
        planned = []
        for step in self.steps:
            gates = []
            busy = set()
            for g in step.gates:
                q0 = g.qubits[0]
                initial = q0 in self.fresh and q0 not in started
                started.update(g.qubits)
                if initial:
                    live[q0] = True
                    gates.append((g, None))
                    continue
                busy.update(g.qubits)
                if g.kind is GateKind.PREP:
                    live[q0] = True
                    gates.append((g, GATE1))
                elif g.kind is GateKind.MEAS:
                    gates.append((g, MEASURE))
                elif g.kind is GateKind.CX:
                    gates.append((g, GATE2))
                else:
                    gates.append((g, GATE1))
            idle = tuple(q for q in sorted(roster) if live[q] and (all_memory or q not in busy))
            for g in step.gates:
                if g.kind is GateKind.MEAS:
                    live[g.qubits[0]] = False
            planned.append(PlannedStep(step.section, tuple(gates), idle))
        return tuple(planned)

    def locations(self, memory: str = "idle") -> list[LocationRef]:
        """Every error location in sampling order."""
        out = []
        for t, ps in enumerate(self.plan_for(memory)):
            for i, (g, kind) in enumerate(ps.gates):
                if kind is not None:
                    out.append(LocationRef(t, kind, g.qubits, i))
            out.extend(LocationRef(t, MEMORY, (q,)) for q in ps.idle)
        return out

    def dump(self) -> str:
        lines = [f"# {self.name} qubits={self.n_qubits} steps={len(self.steps)}"]
        for s in self.steps:
            lines.append(", ".join(str(g) for g in s.gates) + " ;")
        return "\n".join(lines) + "\n"


def parse_dump(text: str, name: str = "") -> Circuit:
    """Inverse of :meth:`Circuit.dump` (roles are not preserved)."""
    steps = []
    seen: set[int] = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        body = line.rstrip(";").strip()
        gates = []
        for tok in filter(None, (t.strip() for t in body.split(","))):
            parts = tok.split()
            kind = GateKind(parts[0])
            if kind is GateKind.MEAS:
                q, slot = int(parts[1][1:]), int(parts[3][1:])
                gates.append(Gate(kind, (q,), slot))
            else:
                gates.append(Gate(kind, tuple(int(p[1:]) for p in parts[1:])))
            seen.update(gates[-1].qubits)
        steps.append(TimeStep(tuple(gates)))
    roster = tuple(QubitId(i) for i in range(max(seen) + 1 if seen else 0))
    return Circuit(roster, tuple(steps), name)


def validate_circuit(circuit: Circuit) -> list[str]:
    """List invariant violations; empty iff the circuit is well-formed."""
    report = []
    roster = [q.index for q in circuit.qubits]
    dupes = [i for i, n in Counter(roster).items() if n > 1]
    if dupes:
        report.append(f"duplicate qubit indices {sorted(dupes)}")
    known = set(roster)
    slots: Counter[int] = Counter()
    dead: set[int] = set()
    for t, step in enumerate(circuit.steps):
        if not step.gates:
            report.append(f"step {t} is empty")
        used: Counter[int] = Counter()
        for g in step.gates:
            arity = 2 if g.kind is GateKind.CX else 1
            if len(g.qubits) != arity:
                report.append(f"step {t}: {g.kind.value} takes {arity} operand(s)")
                continue
            if g.kind is GateKind.CX and g.qubits[0] == g.qubits[1]:
                report.append(f"step {t}: CNOT control equals target (q{g.qubits[0]})")
            for q in g.qubits:
                if q not in known:
                    report.append(f"step {t}: q{q} not in roster")
                used[q] += 1
                if q in dead and g.kind is not GateKind.PREP:
                    report.append(f"step {t}: q{q} used after measurement without reset")
            if g.kind is GateKind.MEAS:
                if g.slot is None:
                    report.append(f"step {t}: measurement of q{g.qubits[0]} has no output slot")
                else:
                    slots[g.slot] += 1
        for q, n in used.items():
            if n > 1:
                report.append(f"step {t}: q{q} appears in {n} gates")
        for g in step.gates:
            if g.kind is GateKind.MEAS:
                dead.add(g.qubits[0])
            elif g.kind is GateKind.PREP:
                dead.discard(g.qubits[0])
    for s, n in slots.items():
        if n > 1:
            report.append(f"output slot c{s} written {n} times")
    return report


def count_locations(circuit: Circuit, memory: str = "idle") -> dict[str, int]:
    counts = dict.fromkeys(LOCATION_KINDS, 0)
    for loc in circuit.locations(memory):
        counts[loc.kind] += 1
    return counts


def gate_count(circuit: Circuit) -> int:
    """Gates excluding noiseless initial preparations."""
    return sum(1 for ps in circuit.plan for _, kind in ps.gates if kind is not None)


def parallelism(circuit: Circuit) -> float:
    if not circuit.steps:
        raise ValueError("parallelism undefined for a circuit with no time steps")
    return gate_count(circuit) / len(circuit.steps)


def census(circuit: Circuit) -> Counter[str]:
    return Counter(g.kind.value for g in circuit.gates())


class CircuitBuilder:
    def __init__(self, name: str = ""):
        self.name = name
        self._qubits: list[QubitId] = []
        self._steps: list[TimeStep] = []
        self.annotations: dict[str, object] = {}

    def qubits(self, n: int, role: str = "data") -> list[int]:
        start = len(self._qubits)
        self._qubits.extend(QubitId(start + i, role) for i in range(n))
        return list(range(start, start + n))

    def step(self, *gates: Gate, section: str = "") -> "CircuitBuilder":
        self._steps.append(TimeStep(tuple(gates), section))
        return self

    def build(self) -> Circuit:
        return Circuit(tuple(self._qubits), tuple(self._steps), self.name, dict(self.annotations))
