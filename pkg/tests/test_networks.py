import numpy as np
import pytest

from ftqec import frame
from ftqec.circuit import GATE2, MEMORY, GateKind, census, parallelism
from ftqec.code import DUAL_CODE, EFFECTIVE_WEIGHT
from ftqec.networks import (
    METHODS,
    NET3_VERIFY_LAYERS,
    RecoveryProtocol,
    UnsupportedVariantError,
    build_encoder,
    build_recovery,
    build_shor_cat,
    build_steane_ancilla,
    build_syndrome_round,
    majority_array,
    majority_syndrome,
)
from ftqec.code import G_ROWS, support
from ftqec.noise import PAULI1, PAULI2, ErrorEvent, ErrorParams, ReplayNoise, StochasticNoise
from ftqec.runner import PF, SV, FactoryStats, ancilla_bad, inject_pauli, run_recovery_batch, synthesize
from ftqec.statevector import StateVector, execute as sv_execute, fidelity, zero_l

from conftest import make_ctx


def cx_count(circuit):
    return census(circuit)["CX"]


def test_encoder_census():
    c = census(build_encoder().circuit)
    assert c["H"] == 3 and c["CX"] == 9


def test_round_cnot_census():
    assert cx_count(build_syndrome_round("steane").circuit) == 14
    assert cx_count(build_syndrome_round("shor").circuit) == 24
    assert cx_count(build_recovery(RecoveryProtocol("shor", 3)).extraction_circuit) == 72


def test_network3_measures_checks_in_one_step():
    c = build_steane_ancilla("net3", "on", "zero").circuit
    meas_steps = [t for t, s in enumerate(c.steps) if any(g.kind is GateKind.MEAS for g in s.gates)]
    assert len(meas_steps) == 1 and len(c.steps[meas_steps[0]].gates) == 4


def test_network3_schedule_covers_each_check_once():
    seen = {(q, k) for layer in NET3_VERIFY_LAYERS for q, k in layer}
    assert seen == {(q, k) for k, row in enumerate(G_ROWS) for q in support(row)}
    for layer in NET3_VERIFY_LAYERS:
        qs = [q for q, _ in layer]
        ks = [k for _, k in layer]
        assert len(set(qs)) == len(qs) and len(set(ks)) == len(ks)


def test_network3_is_at_least_twice_as_parallel():
    n1 = build_steane_ancilla("net1", "on", "plus").circuit
    n3 = build_steane_ancilla("net3", "on", "plus").circuit
    assert parallelism(n3) >= 2 * parallelism(n1)


def test_net2_is_unsupported():
    with pytest.raises(UnsupportedVariantError, match="net2 layout not published"):
        build_steane_ancilla("net2")
    with pytest.raises(UnsupportedVariantError):
        RecoveryProtocol("steane-net2")


def test_protocol_validation():
    with pytest.raises(ValueError):
        RecoveryProtocol("shor", rounds=2)
    with pytest.raises(ValueError):
        RecoveryProtocol("shor", verification="maybe")


@pytest.mark.parametrize("variant", ["net1", "net3"])
def test_noiseless_ancilla_accepted_and_exact(variant):
    g = build_steane_ancilla(variant, "on", "zero")
    out, bits = sv_execute(g.circuit, None, make_ctx(3))
    assert g.accept(bits).all()
    assert all(fidelity(s, zero_l(), range(7)) == pytest.approx(1) for s in out)


def last_g_step(circuit):
    return max(t for t, s in enumerate(circuit.steps) if s.section == "G")


def x_event_on(circuit, q, trial=0):
    """An X on data qubit ``q`` at the last encoding step (gate or memory)."""
    t = last_g_step(circuit)
    for loc in circuit.locations():
        if loc.step == t and q in loc.qubits:
            if loc.kind == GATE2:
                label = "XI" if loc.qubits[0] == q else "IX"
            else:
                label = "X"
            return ErrorEvent(trial, t, loc.kind, loc.qubits, label)
    raise AssertionError(f"no location for q{q}")


@pytest.mark.parametrize("variant", ["net1", "net3"])
def test_every_single_flip_after_encoding_is_rejected(variant):
    g = build_steane_ancilla(variant, "on", "zero")
    tape = [x_event_on(g.circuit, q, trial=q) for q in range(7)]
    _, bits = frame.execute(g.circuit, None, make_ctx(7), ReplayNoise(tape))
    assert not g.accept(bits).any()


def test_cat_examples():
    g = build_shor_cat("on")
    out, bits = sv_execute(g.circuit, None, make_ctx(2))
    cat = StateVector.from_words((0, 15), 4)
    assert g.accept(bits).all()
    assert all(fidelity(s, cat, range(4)) == pytest.approx(1) for s in out)
    c = g.circuit
    t = last_g_step(c)
    # X on cat qubits 1 and 3 (0-based): first and last disagree
    two = [ErrorEvent(0, t, MEMORY, (1,), "X"), ErrorEvent(0, t, GATE2, (0, 3), "IX")]
    one = [ErrorEvent(1, t, MEMORY, (1,), "X")]
    _, bits = frame.execute(c, None, make_ctx(2), ReplayNoise(two + one))
    assert g.accept(bits).tolist() == [False, True]


def test_majority_examples():
    assert majority_syndrome(0b101, 0b101) == 0b101
    assert majority_syndrome(0b101, 0b000, 0b000) == 0b000
    assert majority_syndrome(0b101, 0b000, 0b101) == 0b101
    assert majority_syndrome(0b101, 0b000, 0b111) is None
    with pytest.raises(ValueError):
        majority_syndrome(1, 2)


def test_majority_array_matches_scalar():
    rng = np.random.default_rng(0)
    s = rng.integers(0, 8, size=(3, 500))
    got = majority_array(*s)
    for a, b, c, m in zip(*s, got):
        ref = majority_syndrome(a, b, c)
        assert m == (-1 if ref is None else ref)


@pytest.mark.parametrize("be", [PF, SV], ids=["pf", "sv"])
@pytest.mark.parametrize("method", ["steane-net3", "shor"])
def test_round_syndromes_for_flip_on_qubit_four(be, method):
    rec = build_recovery(RecoveryProtocol(method, 1))
    trace = {}
    f, _, _ = run_recovery_batch(be, rec, make_ctx(1), None, inject=inject_pauli("X", 3), trace=trace)
    assert trace["final"]["x"][0] == 0b100
    assert trace["final"]["z"][0] == 0
    assert f[0] == pytest.approx(1)


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("rounds", [1, 3])
def test_single_errors_are_corrected(method, rounds):
    rec = build_recovery(RecoveryProtocol(method, rounds))
    for be in (PF, SV):
        for p in "XYZ":
            for q in range(7):
                f, _, _ = run_recovery_batch(be, rec, make_ctx(1), None, inject=inject_pauli(p, q))
                assert f[0] == pytest.approx(1, abs=1e-9), (be.name, p, q)


def test_two_phase_flips_give_a_logical_error():
    rec = build_recovery(RecoveryProtocol("steane-net3", 1))

    def two(be, data):
        inject_pauli("Z", 0)(be, data)
        inject_pauli("Z", 4)(be, data)

    for be in (PF, SV):
        f, _, _ = run_recovery_batch(be, rec, make_ctx(1), None, inject=two)
        assert f[0] == pytest.approx(0, abs=1e-9)


def test_third_round_only_when_first_two_disagree():
    rec = build_recovery(RecoveryProtocol("steane-net3", 3))
    trace = {}
    run_recovery_batch(PF, rec, make_ctx(4), None, trace=trace)
    for h in ("x", "z"):
        assert len(trace["history"][h]) == 3
        assert (trace["history"][h][2] == -1).all()


def _enumerate_single_faults(circuit):
    out = []
    for loc in circuit.locations():
        for p in PAULI2 if loc.kind == GATE2 else PAULI1:
            out.append(ErrorEvent(len(out), loc.step, loc.kind, loc.qubits, p))
    return out


@pytest.mark.parametrize("variant", ["net1", "net3"])
def test_no_single_fault_leaves_an_accepted_double_flip(variant):
    g = build_steane_ancilla(variant, "on", "zero")
    tape = _enumerate_single_faults(g.circuit)
    n = len(tape)
    reg, failed = synthesize(PF, g, make_ctx(n), np.arange(n), ReplayNoise(tape), cap=1)
    bad = ancilla_bad(PF, "steane-zero", reg) & ~failed
    assert not bad.any()


def test_unverified_network1_has_first_order_double_flips():
    g = build_steane_ancilla("net1", "off", "zero")
    tape = [e for e in _enumerate_single_faults(g.circuit) if e.kind == MEMORY]
    tape = [ErrorEvent(i, e.step, e.kind, e.qubits, e.pauli) for i, e in enumerate(tape)]
    reg, failed = synthesize(PF, g, make_ctx(len(tape)), np.arange(len(tape)), ReplayNoise(tape), cap=1)
    assert ancilla_bad(PF, "steane-zero", reg).any()


def test_perfect_verification_accepts_only_stabilizer_flips():
    # noise confined to the encoding part; the checks themselves are ideal
    g = build_steane_ancilla("net1", "perfect", "zero")
    assert "verify" in g.noiseless_sections and "verification" in g.noiseless_roles
    n = 10_000
    stats = FactoryStats()
    reg, failed = synthesize(PF, g, make_ctx(n, seed=17), np.arange(n), StochasticNoise(ErrorParams(0.02, 0.05)), 100, stats)
    x, _ = reg.subset(np.flatnonzero(~failed)).words()
    assert stats.accepted > 0 and stats.accepted < stats.attempts
    assert np.isin(x, DUAL_CODE).all()
    assert (EFFECTIVE_WEIGHT[x] == 0).all()
