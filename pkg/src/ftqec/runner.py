"""Batched execution of gadgets and full recovery on either backend.

Trials are processed together as index subsets of one batch; every trial
keeps its own generator so results do not depend on how trials are grouped.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from functools import partial
from typing import Callable

import numpy as np

from . import frame, statevector
from .code import EFFECTIVE_WEIGHT, N, decode_position, trajectory_fidelity_array
from .frame import FrameBatch
from .networks import GadgetSpec, Recovery, majority_array
from .noise import TrialContext
from .statevector import StateVector

_CAT_WEIGHT = np.array([min(bin(w).count("1"), 4 - bin(w).count("1")) for w in range(16)])


@dataclass(frozen=True)
class Backend:
    name: str
    execute: Callable
    empty: Callable
    select: Callable
    store: Callable
    concat: Callable


def _sv_store(dst: list, idx, src: list) -> None:
    for i, s in zip(np.asarray(idx).tolist(), src):
        dst[i] = s


PF = Backend(
    "pauliframe",
    frame.execute,
    FrameBatch.zeros,
    lambda reg, idx: reg.subset(idx),
    lambda dst, idx, src: dst.update(idx, src),
    FrameBatch.concat,
)
SV = Backend(
    "statevector",
    statevector.execute,
    lambda n_qubits, n: [None] * n,
    lambda reg, idx: [reg[i] for i in np.asarray(idx).tolist()],
    _sv_store,
    lambda a, b: [x.tensor(y) for x, y in zip(a, b)],
)
BACKENDS = {"pauliframe": PF, "pf": PF, "statevector": SV, "sv": SV}


def get_backend(name: str, memory: str = "idle") -> Backend:
    """Backend by name; ``memory="all"`` also charges busy qubits a memory location."""
    try:
        be = BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}") from None
    if memory == "idle":
        return be
    if memory != "all":
        raise ValueError(f"unknown memory counting mode {memory!r}")
    return replace(be, execute=partial(be.execute, memory=memory))


# ancilla quality ------------------------------------------------------------


def _pack(rows: np.ndarray) -> np.ndarray:
    w = 1 << np.arange(rows.shape[0] - 1, -1, -1, dtype=np.int64)
    return w @ rows.astype(np.int64)


def _support_word(state: StateVector) -> int:
    return int(np.flatnonzero(np.abs(state.vector()) > 1e-9)[0])


def _rotated(state: StateVector) -> StateVector:
    s = state.copy()
    for q in range(s.n):
        s.h(q)
    return s


def ancilla_bad(be: Backend, kind: str, reg) -> np.ndarray:
    """Residual bit-flip of effective weight >= 2 that can reach the data:
    the X part for ``steane-zero``, the Z part for ``steane-plus`` (the
    rotation swaps the two), X for the cat."""
    if be.name == PF.name:
        if kind == "cat":
            return _CAT_WEIGHT[_pack(reg.x)] >= 2
        rows = reg.z if kind == "steane-plus" else reg.x
        return EFFECTIVE_WEIGHT[_pack(rows)] >= 2
    out = np.zeros(len(reg), dtype=bool)
    for i, s in enumerate(reg):
        if kind == "cat":
            out[i] = _CAT_WEIGHT[_support_word(s)] >= 2
        else:
            s = _rotated(s) if kind == "steane-plus" else s
            out[i] = EFFECTIVE_WEIGHT[_support_word(s)] >= 2
    return out


def cat_state() -> StateVector:
    return StateVector.from_words((0, 15), 4)


def ancilla_fidelity(be: Backend, kind: str, reg) -> np.ndarray:
    if be.name == PF.name:
        x, z = _pack(reg.x), _pack(reg.z)
        if kind == "cat":
            even_z = np.array([bin(w).count("1") % 2 == 0 for w in range(16)])
            return (((x == 0) | (x == 15)) & even_z[z]).astype(float)
        return trajectory_fidelity_array(x, z, "plus" if kind == "steane-plus" else "zero").astype(float)
    ref = cat_state() if kind == "cat" else statevector.reference_state("plus" if kind == "steane-plus" else "zero")
    return np.array([statevector.fidelity(s, ref, range(s.n)) for s in reg])


@dataclass
class FactoryStats:
    """Counts over every synthesis attempt."""

    attempts: int = 0
    accepted: int = 0
    bad: int = 0  # accepted and carrying a weight >= 2 bit-flip
    requests: int = 0
    failures: int = 0

    def merge(self, other: "FactoryStats") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


def synthesize(
    be: Backend,
    gadget: GadgetSpec,
    ctx: TrialContext,
    idx: np.ndarray,
    noise,
    cap: int = 100,
    stats: FactoryStats | None = None,
):
    """Build one accepted ancilla for each trial in ``idx`` (global indices),
    retrying rejected attempts.  Returns the ancilla register (aligned with
    ``idx``) and a mask of trials that hit the retry cap."""
    idx = np.asarray(idx, dtype=np.int64)
    out = be.empty(len(gadget.circuit.outputs), len(idx))
    pending = np.arange(len(idx))
    for _ in range(cap):
        if not pending.size:
            break
        g = idx[pending]
        sub = ctx.subset(g)
        reg, bits = be.execute(
            gadget.circuit, None, sub, noise, gadget.noiseless_sections, gadget.noiseless_roles
        )
        ctx.update(g, sub)
        ok = gadget.accept(bits)
        keep = np.flatnonzero(ok)
        if stats is not None:
            stats.attempts += len(g)
            stats.accepted += len(keep)
            if keep.size:
                stats.bad += int(ancilla_bad(be, gadget.kind, be.select(reg, keep)).sum())
        be.store(out, pending[keep], be.select(reg, keep))
        pending = pending[~ok]
    failed = np.zeros(len(idx), dtype=bool)
    failed[pending] = True
    if stats is not None:
        stats.requests += len(idx)
        stats.failures += len(pending)
    return out, failed


def run_ancilla_batch(be: Backend, gadget: GadgetSpec, ctx: TrialContext, noise, cap: int = 100):
    """One accepted ancilla per trial.  Returns (fidelity, failed, stats)."""
    stats = FactoryStats()
    reg, failed = synthesize(be, gadget, ctx, np.arange(len(ctx)), noise, cap, stats)
    fid = np.zeros(len(ctx))
    ok = np.flatnonzero(~failed)
    if ok.size:
        fid[ok] = ancilla_fidelity(be, gadget.kind, be.select(reg, ok))
    return fid, failed, stats


# full recovery ----------------------------------------------------------------


def inject_pauli(label: str, qubit: int) -> Callable:
    """Hook applying one Pauli to a data qubit of every trial."""
    code = "IXYZ".index(label)

    def hook(be: Backend, data) -> None:
        if be.name == PF.name:
            data.apply_pauli(qubit, np.full(len(data), code, dtype=np.uint8))
        else:
            for s in data:
                s.pauli(label, qubit)

    return hook


def _correct(be: Backend, data, idx: np.ndarray, syndromes: np.ndarray, label: str) -> None:
    for s in range(1, 8):
        hit = idx[syndromes[idx] == s]
        if not hit.size:
            continue
        q = decode_position(s) - 1
        if be.name == PF.name:
            rows = data.x if label == "X" else data.z
            rows[q, hit] ^= 1
        else:
            for i in hit.tolist():
                data[i].pauli(label, q)


def run_recovery_batch(
    be: Backend,
    rec: Recovery,
    ctx: TrialContext,
    noise,
    stats: FactoryStats | None = None,
    inject: Callable | None = None,
    trace: dict | None = None,
):
    """Encode, extract syndromes per protocol, correct.  Returns per-trial
    fidelity, the failed-to-supply-ancilla mask and factory counts.  When
    ``trace`` is given it receives the syndrome history (-1 = not measured)
    and the syndromes acted on."""
    proto = rec.protocol
    n = len(ctx)
    stats = stats if stats is not None else FactoryStats()
    failed = np.zeros(n, dtype=bool)
    data, _ = be.execute(rec.encoder.circuit, None, ctx, noise)
    if inject is not None:
        inject(be, data)

    def half(h: str, idx: np.ndarray) -> np.ndarray:
        val = np.full(n, -1, dtype=np.int64)
        acc = np.zeros(n, dtype=np.int64)
        g = idx
        for st in rec.round.halves[h]:
            if not g.size:
                break
            if st.ancilla is not None:
                anc, fail = synthesize(be, rec.ancillas[st.ancilla], ctx, g, noise, proto.retry_cap, stats)
                if fail.any():
                    failed[g[fail]] = True
                    keep = np.flatnonzero(~fail)
                    g, anc = g[keep], be.select(anc, keep)
                reg = be.concat(be.select(data, g), anc)
            else:
                reg = be.select(data, g)
            sub = ctx.subset(g)
            out, bits = be.execute(st.circuit, reg, sub, noise)
            ctx.update(g, sub)
            be.store(data, g, out)
            if st.decode is not None:
                acc[g] = (acc[g] << st.width) | st.decode(bits)
        val[g] = acc[g]
        return val

    everyone = np.arange(n)
    first = {"z": [], "x": []}
    for _ in range(2 if proto.rounds == 3 else 1):
        for h in proto.half_order:
            first[h].append(half(h, everyone[~failed]))
    final = {}
    if proto.rounds == 1:
        final = {h: first[h][0] for h in first}
    else:
        differ = {h: first[h][0] != first[h][1] for h in first}
        if proto.majority == "combined":
            both = differ["z"] | differ["x"]
            differ = {"z": both, "x": both}
        for h in proto.half_order:
            first[h].append(half(h, np.flatnonzero(differ[h] & ~failed)))
        if proto.majority == "combined":
            s = [first["z"][k] * 8 + first["x"][k] for k in range(3)]
            m = majority_array(*s)
            final = {"z": np.where(m >= 0, m >> 3, -1), "x": np.where(m >= 0, m & 7, -1)}
        else:
            final = {h: majority_array(*first[h]) for h in first}
    if trace is not None:
        trace.update(history=first, final=final)
    ok = np.flatnonzero(~failed)
    _correct(be, data, ok, final["x"], "X")
    _correct(be, data, ok, final["z"], "Z")
    fid = np.zeros(n)
    if ok.size:
        sel = be.select(data, ok)
        if be.name == PF.name:
            x, z = sel.words()
            fid[ok] = trajectory_fidelity_array(x, z, proto.amplitude)
        else:
            ref = statevector.reference_state(proto.amplitude)
            fid[ok] = [statevector.fidelity(s, ref, range(N)) for s in sel]
    return fid, failed, stats
