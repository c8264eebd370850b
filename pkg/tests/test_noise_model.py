import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftqec.circuit import GATE1, GATE2, MEASURE, MEMORY
from ftqec.noise import (
    ALT_MULTIPLIERS,
    MODULUS,
    PAULI2,
    ErrorEvent,
    ErrorParams,
    InvalidStateError,
    LehmerBatch,
    LehmerRng,
    ReplayMismatchError,
    ReplayNoise,
    StochasticNoise,
    lcg_next,
    read_tape,
    sample_location_error,
    trial_seeds,
    uniform01,
    write_tape,
)

from conftest import make_ctx


def schrage(seed, mult, n):
    """Schrage's overflow-free recurrence, a different route to the same sequence."""
    q, r = divmod(MODULUS, mult)
    x = seed
    for _ in range(n):
        hi, lo = divmod(x, q)
        x = mult * lo - r * hi
        if x <= 0:
            x += MODULUS
    return x


def test_first_outputs():
    rng = LehmerRng(1)
    assert lcg_next(rng) == 16807
    assert LehmerRng(16807).next() == 282475249


@pytest.mark.parametrize("mult", (16807,) + ALT_MULTIPLIERS)
def test_ten_thousandth_output_matches_oracles(mult):
    rng = LehmerRng(1, mult)
    for _ in range(10_000):
        x = rng.next()
    assert x == pow(mult, 10_000, MODULUS)
    if mult == 16807:
        assert x == schrage(1, mult, 10_000)


def test_batch_matches_scalar_generator():
    seeds = [1, 2, 123456789, MODULUS - 2]
    batch = LehmerBatch(seeds, 950706376)
    scalars = [LehmerRng(s, 950706376) for s in seeds]
    for _ in range(50):
        assert batch.next().tolist() == [r.next() for r in scalars]


def test_shuffled_batch_matches_scalar_generator():
    batch = LehmerBatch([7, 99], shuffle=True)
    scalars = [LehmerRng(7, shuffle=True), LehmerRng(99, shuffle=True)]
    for _ in range(100):
        assert batch.next().tolist() == [r.next() for r in scalars]


def test_uniform_examples():
    assert uniform01(LehmerRng(1)) == pytest.approx(16807 / 2147483647)
    u = LehmerBatch(trial_seeds(3, 0, 1000)).uniform()
    draws = np.concatenate([u] + [LehmerBatch(trial_seeds(3 + k, 0, 1000)).uniform() for k in range(999)])
    assert abs(draws.mean() - 0.5) < 0.002
    assert draws.min() > 0.0 and draws.max() < 1.0


def test_invalid_seed_rejected():
    with pytest.raises(InvalidStateError):
        LehmerRng(0)
    with pytest.raises(InvalidStateError):
        LehmerBatch([MODULUS])


def test_trial_seeds_are_master_stream_outputs():
    master = LehmerRng(42, 48271)
    expected = [master.next() for _ in range(10)]
    assert trial_seeds(42, 0, 10).tolist() == expected
    assert trial_seeds(42, 4, 6).tolist() == expected[4:]


def test_zero_rate_consumes_one_draw():
    rng, ref = LehmerRng(5), LehmerRng(5)
    assert sample_location_error(MEMORY, ErrorParams(0.0, 0.0), rng) is None
    ref.next()
    assert rng.state == ref.state


def test_memory_error_frequencies():
    rng = LehmerRng(2024)
    params = ErrorParams(0.3, 0.0)
    counts = {}
    for _ in range(100_000):
        e = sample_location_error(MEMORY, params, rng)
        counts[e] = counts.get(e, 0) + 1
    for p in "XYZ":
        assert abs(counts[p] - 10_000) <= 300


def test_two_qubit_error_frequencies():
    ctx = make_ctx(100_000, seed=77)
    codes = StochasticNoise(ErrorParams(0.0, 0.15)).sample(ctx, GATE2, 0, (0, 1))
    hist = np.bincount(codes, minlength=16)
    assert np.all(np.abs(hist[1:] - 1000) <= 95)


def test_single_axis_gate_errors():
    ctx = make_ctx(10_000, seed=3)
    codes = StochasticNoise(ErrorParams(0.0, 0.5, one_qubit="z")).sample(ctx, MEASURE, 0, (0,))
    assert set(np.unique(codes)) == {0, 3}


def test_batched_sampling_matches_scalar_sampler():
    params = ErrorParams(0.2, 0.4)
    ctx = make_ctx(300, seed=9)
    scalars = [LehmerRng(int(s)) for s in trial_seeds(9, 0, 300)]
    noise = StochasticNoise(params)
    for kind, qs in ((MEMORY, (0,)), (GATE2, (0, 1)), (GATE1, (1,)), (MEASURE, (2,))):
        codes = noise.sample(ctx, kind, 0, qs)
        labels = [sample_location_error(kind, params, r) for r in scalars]
        for c, lab in zip(codes, labels):
            if lab is None:
                assert c == 0
            elif kind == GATE2:
                assert PAULI2[c - 1] == lab
            else:
                assert "XYZ"[c - 1] == lab


@given(
    st.integers(0, 10**6),
    st.integers(0, 500),
    st.sampled_from([MEMORY, GATE1, MEASURE]),
    st.integers(0, 20),
    st.sampled_from("XYZ"),
)
def test_tape_line_round_trip(trial, step, kind, q, p):
    e = ErrorEvent(trial, step, kind, (q,), p)
    assert ErrorEvent.parse(e.line()) == e


def test_tape_file_round_trip(tmp_path):
    events = [ErrorEvent(0, 3, MEMORY, (2,), "X"), ErrorEvent(1, 0, GATE2, (0, 4), "ZY")]
    write_tape(events, tmp_path / "t.tape")
    assert read_tape(tmp_path / "t.tape") == events
    buf = io.StringIO()
    write_tape(events, buf)
    assert read_tape(io.StringIO(buf.getvalue() + "# trailing comment\n")) == events


def test_bad_label_rejected():
    with pytest.raises(ValueError):
        ErrorEvent(0, 0, GATE2, (0, 1), "X")


def test_replay_consumes_no_draws_and_detects_leftovers():
    ctx = make_ctx(2)
    before = ctx.rng.state.copy()
    replay = ReplayNoise([ErrorEvent(1, 0, MEMORY, (0,), "Y"), ErrorEvent(0, 9, MEMORY, (0,), "X")])
    assert replay.sample(ctx, MEMORY, 0, (0,)).tolist() == [0, 2]
    assert np.array_equal(ctx.rng.state, before)
    with pytest.raises(ReplayMismatchError):
        replay.check_consumed()


def test_recorded_events_replay_identically():
    tape = []
    ctx = make_ctx(500, seed=11)
    params = ErrorParams(0.2, 0.2)
    rec = StochasticNoise(params, tape)
    first = [rec.sample(ctx, k, s, (0, 1) if k == GATE2 else (0,)) for s, k in enumerate((MEMORY, GATE2, GATE1))]
    replay = ReplayNoise(tape)
    ctx2 = make_ctx(500, seed=11)
    again = [replay.sample(ctx2, k, s, (0, 1) if k == GATE2 else (0,)) for s, k in enumerate((MEMORY, GATE2, GATE1))]
    replay.check_consumed()
    for a, b in zip(first, again):
        assert np.array_equal(a, b)


def test_rates_validated():
    with pytest.raises(ValueError):
        ErrorParams(1.5, 0.0)
    with pytest.raises(ValueError):
        ErrorParams(0.1, 0.1, one_qubit="y")
