"""Stochastic Pauli error model driven by a prime-modulus Lehmer generator."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .circuit import GATE1, GATE2, LOCATION_KINDS, MEASURE, MEMORY

MODULUS = 2**31 - 1
DEFAULT_MULTIPLIER = 16807
ALT_MULTIPLIERS = (397204094, 950706376)
# Seeds the per-trial generators.  Distinct from every trial multiplier so that
# trial streams are not lagged copies of one another.
MASTER_MULTIPLIER = 48271

NTAB = 32
NDIV = 1 + (MODULUS - 1) // NTAB

PAULI1 = ("X", "Y", "Z")
_P = "IXYZ"
PAULI2 = tuple(_P[c >> 2] + _P[c & 3] for c in range(1, 16))


class InvalidStateError(ValueError):
    pass


class ReplayMismatchError(RuntimeError):
    pass


def _check_state(x: int) -> int:
    x = int(x)
    if not 0 < x < MODULUS:
        raise InvalidStateError(f"Lehmer state must lie in [1, 2^31-2], got {x}")
    return x


class LehmerRng:
    """Scalar multiplicative congruential generator X <- C X mod (2^31 - 1)."""

    def __init__(self, seed: int, multiplier: int = DEFAULT_MULTIPLIER, shuffle: bool = False):
        self.state = _check_state(seed)
        self.multiplier = multiplier
        self.table: list[int] | None = None
        if shuffle:
            self.table = [0] * NTAB
            for j in range(NTAB + 7, -1, -1):
                self._step()
                if j < NTAB:
                    self.table[j] = self.state
            self._y = self.table[0]

    def _step(self) -> int:
        self.state = (self.multiplier * _check_state(self.state)) % MODULUS
        return self.state

    def next(self) -> int:
        x = self._step()
        if self.table is None:
            return x
        j = self._y // NDIV
        self._y = self.table[j]
        self.table[j] = x
        return self._y

    def uniform(self) -> float:
        return self.next() / MODULUS


def lcg_next(rng: LehmerRng) -> int:
    return rng.next()


def uniform01(rng: LehmerRng) -> float:
    return rng.uniform()


def trial_seeds(master_seed: int, start: int, count: int) -> np.ndarray:
    """Seeds of trials ``start .. start+count-1``: trial t takes the (t+1)-th
    output of the master generator."""
    x = (_check_state(master_seed) * pow(MASTER_MULTIPLIER, start, MODULUS)) % MODULUS
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        x = (x * MASTER_MULTIPLIER) % MODULUS
        out[i] = x
    return out


class LehmerBatch:
    """One independent Lehmer generator per trial, advanced in lockstep."""

    def __init__(self, seeds, multiplier: int = DEFAULT_MULTIPLIER, shuffle: bool = False):
        self.state = np.array(seeds, dtype=np.int64)
        if np.any((self.state <= 0) | (self.state >= MODULUS)):
            raise InvalidStateError("every seed must lie in [1, 2^31-2]")
        self.multiplier = np.int64(multiplier)
        self.shuffle = shuffle
        self.table = None
        self.y = None
        if shuffle:
            self.table = np.empty((len(self.state), NTAB), dtype=np.int64)
            for j in range(NTAB + 7, -1, -1):
                self._step()
                if j < NTAB:
                    self.table[:, j] = self.state
            self.y = self.table[:, 0].copy()

    def __len__(self) -> int:
        return len(self.state)

    def _step(self) -> np.ndarray:
        # C < 2^30 and X < 2^31, so the product fits in int64
        self.state = (self.state * self.multiplier) % MODULUS
        return self.state

    def next(self) -> np.ndarray:
        x = self._step()
        if not self.shuffle:
            return x
        rows = np.arange(len(x))
        j = self.y // NDIV
        self.y = self.table[rows, j]
        self.table[rows, j] = x
        return self.y

    def uniform(self) -> np.ndarray:
        return self.next() / MODULUS

    def subset(self, idx: np.ndarray) -> "LehmerBatch":
        sub = object.__new__(LehmerBatch)
        sub.state = self.state[idx]
        sub.multiplier = self.multiplier
        sub.shuffle = self.shuffle
        sub.table = self.table[idx] if self.shuffle else None
        sub.y = self.y[idx] if self.shuffle else None
        return sub

    def update(self, idx: np.ndarray, sub: "LehmerBatch") -> None:
        self.state[idx] = sub.state
        if self.shuffle:
            self.table[idx] = sub.table
            self.y[idx] = sub.y


@dataclass(frozen=True)
class ErrorParams:
    """``eps`` per memory location, ``gamma`` per gate location.  ``one_qubit``
    selects the Pauli content of one-qubit gate and measurement errors."""

    eps: float = 0.0
    gamma: float = 0.0
    one_qubit: str = "xyz"

    def __post_init__(self):
        for name in ("eps", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.one_qubit not in ("xyz", "x", "z"):
            raise ValueError(f"unknown one-qubit error mode {self.one_qubit!r}")

    def probability(self, kind: str) -> float:
        return self.eps if kind == MEMORY else self.gamma


def _select(kind: str, params: ErrorParams, u2: float | np.ndarray):
    """Pauli code(s) from the selection draw: 1..3 for X/Y/Z, 1..15 for pairs."""
    if kind == GATE2:
        return np.floor(np.asarray(u2) * 15).astype(np.uint8) + 1
    return np.floor(np.asarray(u2) * 3).astype(np.uint8) + 1


def _needs_selection(kind: str, params: ErrorParams) -> bool:
    return kind == MEMORY or kind == GATE2 or params.one_qubit == "xyz"


def _fixed_code(params: ErrorParams) -> int:
    return 1 if params.one_qubit == "x" else 3


def code_label(kind: str, code: int) -> str:
    return PAULI2[code - 1] if kind == GATE2 else PAULI1[code - 1]


def label_code(kind: str, label: str) -> int:
    table = PAULI2 if kind == GATE2 else PAULI1
    if label not in table:
        raise ValueError(f"bad Pauli label {label!r} for a {kind} location")
    return table.index(label) + 1


def sample_location_error(kind: str, params: ErrorParams, rng: LehmerRng) -> str | None:
    """Draw the error at one location; None when no error occurs."""
    if kind not in LOCATION_KINDS:
        raise ValueError(f"unknown location kind {kind!r}")
    if rng.uniform() >= params.probability(kind):
        return None
    if not _needs_selection(kind, params):
        return code_label(kind, _fixed_code(params))
    return code_label(kind, int(_select(kind, params, rng.uniform())))


@dataclass(frozen=True)
class ErrorEvent:
    trial: int
    step: int
    kind: str
    qubits: tuple[int, ...]
    pauli: str

    def __post_init__(self):
        if self.kind not in LOCATION_KINDS:
            raise ValueError(f"unknown location kind {self.kind!r}")
        label_code(self.kind, self.pauli)

    def line(self) -> str:
        qs = ",".join(str(q) for q in self.qubits)
        return f"{self.trial} {self.step} {self.kind} {qs} {self.pauli}"

    @classmethod
    def parse(cls, line: str) -> "ErrorEvent":
        trial, step, kind, qs, pauli = line.split()
        return cls(int(trial), int(step), kind, tuple(int(q) for q in qs.split(",")), pauli)


def _order(e: ErrorEvent):
    return (e.trial, e.step)


def write_tape(events: Iterable[ErrorEvent], dest: str | Path | TextIO) -> None:
    text = "# trial step kind qubit[,qubit2] pauli\n" + "".join(e.line() + "\n" for e in events)
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)


def read_tape(src: str | Path | TextIO) -> list[ErrorEvent]:
    if isinstance(src, (str, Path)):
        src = io.StringIO(Path(src).read_text())
    events = []
    for line in src:
        line = line.split("#", 1)[0].strip()
        if line:
            events.append(ErrorEvent.parse(line))
    return events


class TrialContext:
    """Per-trial bookkeeping for a batch: trial ids, generators and the global
    step offset of each trial (circuits executed so far)."""

    def __init__(self, trials: np.ndarray, rng: LehmerBatch | None):
        self.trials = np.asarray(trials, dtype=np.int64)
        self.rng = rng
        self.base = np.zeros(len(self.trials), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.trials)

    def subset(self, idx: np.ndarray) -> "TrialContext":
        sub = object.__new__(TrialContext)
        sub.trials = self.trials[idx]
        sub.rng = self.rng.subset(idx) if self.rng is not None else None
        sub.base = self.base[idx]
        return sub

    def update(self, idx: np.ndarray, sub: "TrialContext") -> None:
        if self.rng is not None:
            self.rng.update(idx, sub.rng)
        self.base[idx] = sub.base


class StochasticNoise:
    """Samples errors from each trial's own generator.  At most two draws per
    location: occurrence, then (only when occurring) the Pauli."""

    def __init__(self, params: ErrorParams, record: list[ErrorEvent] | None = None):
        self.params = params
        self.record = record

    def sample(self, ctx: TrialContext, kind: str, step: int, qubits: tuple[int, ...]) -> np.ndarray:
        p = self.params.probability(kind)
        u = ctx.rng.uniform()
        occ = np.flatnonzero(u < p)
        codes = np.zeros(len(ctx), dtype=np.uint8)
        if occ.size == 0:
            return codes
        if _needs_selection(kind, self.params):
            sub = ctx.rng.subset(occ)
            codes[occ] = _select(kind, self.params, sub.uniform())
            ctx.rng.update(occ, sub)
        else:
            codes[occ] = _fixed_code(self.params)
        if self.record is not None:
            for i in occ:
                self.record.append(
                    ErrorEvent(int(ctx.trials[i]), int(ctx.base[i] + step), kind, qubits, code_label(kind, codes[i]))
                )
        return codes


class NoNoise:
    def sample(self, ctx: TrialContext, kind: str, step: int, qubits: tuple[int, ...]) -> np.ndarray:
        return np.zeros(len(ctx), dtype=np.uint8)


class ReplayNoise:
    """Injects exactly the taped events; consumes no random numbers."""

    def __init__(self, tape: Iterable[ErrorEvent]):
        self.pending: dict[tuple[int, int], dict[tuple[str, tuple[int, ...]], ErrorEvent]] = {}
        for e in tape:
            slot = self.pending.setdefault((e.trial, e.step), {})
            key = (e.kind, tuple(e.qubits))
            if key in slot:
                raise ReplayMismatchError(f"duplicate tape event {e.line()!r}")
            slot[key] = e

    def sample(self, ctx: TrialContext, kind: str, step: int, qubits: tuple[int, ...]) -> np.ndarray:
        codes = np.zeros(len(ctx), dtype=np.uint8)
        if not self.pending:
            return codes
        for i, (t, b) in enumerate(zip(ctx.trials.tolist(), ctx.base.tolist())):
            slot = self.pending.get((t, b + step))
            if slot:
                e = slot.pop((kind, qubits), None)
                if e is not None:
                    codes[i] = label_code(kind, e.pauli)
                    if not slot:
                        del self.pending[(t, b + step)]
        return codes

    def check_consumed(self, trials: Iterable[int] | None = None) -> None:
        left = [
            e
            for (t, _), slot in self.pending.items()
            if trials is None or t in trials
            for e in slot.values()
        ]
        if left:
            raise ReplayMismatchError(
                f"{len(left)} tape event(s) match no location, e.g. {sorted(left, key=_order)[0].line()!r}"
            )
