"""Monte Carlo experiments: ancilla quality and full recovery sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .networks import RecoveryProtocol, build_recovery, build_shor_cat, build_steane_ancilla
from .noise import (
    DEFAULT_MULTIPLIER,
    ErrorParams,
    LehmerBatch,
    ReplayNoise,
    StochasticNoise,
    TrialContext,
    trial_seeds,
)
from .runner import FactoryStats, get_backend, run_ancilla_batch, run_recovery_batch

BACKEND_CHOICES = ("pauliframe", "statevector", "both")
CSV_COLUMNS = (
    "method", "variant", "rounds", "verify", "epsilon", "gamma", "trials", "failed",
    "F_mean", "F_se", "P_bf", "accept_rate", "retries_mean", "seed", "multiplier",
)
MIN_TRIALS = 100_000


class BackendMismatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "ancilla"  # ancilla | recovery
    method: str = "steane-net3"  # recovery protocol
    variant: str = "net1"  # ancilla network: net1 | net3 | cat
    target: str = "plus"  # ancilla target state
    rounds: int = 3
    verification: str = "on"
    eps: tuple[float, ...] = (1e-3,)
    gamma: tuple[float, ...] = (0.0,)
    gamma_ratio: float | None = None  # pair each eps with gamma = ratio * eps
    trials: int | None = None
    seed: int = 12345
    multiplier: int = DEFAULT_MULTIPLIER
    shuffle: bool = False
    backend: str = "pauliframe"
    memory: str = "idle"
    amplitude: str = "plus"
    one_qubit: str = "xyz"
    majority: str = "per-type"
    first_half: str = "z"
    retry_cap: int = 100
    paper_comparable: bool = False
    jobs: int = 1
    chunk: int = 1 << 16

    def __post_init__(self):
        if self.kind not in ("ancilla", "recovery"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.backend not in BACKEND_CHOICES:
            raise ValueError(f"backend must be one of {BACKEND_CHOICES}")
        if self.memory not in ("idle", "all"):
            raise ValueError(f"memory counting mode must be 'idle' or 'all', got {self.memory!r}")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be positive")
        if self.jobs < 1 or self.chunk < 1:
            raise ValueError("jobs and chunk must be positive")
        if not self.eps or (self.gamma_ratio is None and not self.gamma):
            raise ValueError("empty error grid")
        for p in self.grid():
            ErrorParams(*p, self.one_qubit)
        if self.paper_comparable:
            for p in self.grid():
                need = _min_trials(*p)
                if self.trials is not None and self.trials < need:
                    raise ValueError(f"{self.trials} trials is below 10 x max(1/eps, 1/gamma) = {need}")
        self.gadget()  # validates variant / protocol fields

    def grid(self) -> list[tuple[float, float]]:
        if self.gamma_ratio is not None:
            return [(e, self.gamma_ratio * e) for e in self.eps]
        return [(e, g) for e in self.eps for g in self.gamma]

    def trials_for(self, eps: float, gamma: float) -> int:
        if self.trials is not None:
            return self.trials
        return max(MIN_TRIALS, _min_trials(eps, gamma))

    def protocol(self) -> RecoveryProtocol:
        return RecoveryProtocol(
            self.method, self.rounds, self.verification, self.amplitude,
            self.majority, self.retry_cap, self.first_half,
        )

    def gadget(self):
        if self.kind == "recovery":
            return build_recovery(self.protocol())
        if self.variant == "cat":
            return build_shor_cat(self.verification)
        return build_steane_ancilla(self.variant, self.verification, self.target)

    @property
    def method_label(self) -> str:
        return "ancilla" if self.kind == "ancilla" else self.method

    @property
    def variant_label(self) -> str:
        if self.kind == "ancilla":
            return self.variant
        return "cat" if self.method == "shor" else self.method.split("-")[1]


def _min_trials(eps: float, gamma: float) -> int:
    inv = [1 / p for p in (eps, gamma) if p > 0]
    return math.ceil(10 * max(inv)) if inv else 0


@dataclass
class ExperimentRow:
    method: str
    variant: str
    rounds: int
    verify: str
    epsilon: float
    gamma: float
    trials: int
    failed: int
    F_mean: float
    F_se: float
    P_bf: float
    accept_rate: float
    retries_mean: float
    seed: int
    multiplier: int
    P_bf_accepted: float = 0.0  # bad / accepted attempts (not exported)

    def csv_fields(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            out.append(format(v, ".6g") if isinstance(v, float) else str(v))
        return out


@dataclass
class _Tally:
    trials: int = 0
    failed: int = 0
    f_sum: float = 0.0
    f_sq: float = 0.0
    stats: FactoryStats = field(default_factory=FactoryStats)

    def merge(self, other: "_Tally") -> None:
        self.trials += other.trials
        self.failed += other.failed
        self.f_sum += other.f_sum
        self.f_sq += other.f_sq
        self.stats.merge(other.stats)


def _context(cfg: ExperimentConfig, start: int, count: int) -> TrialContext:
    rng = LehmerBatch(trial_seeds(cfg.seed, start, count), cfg.multiplier, cfg.shuffle)
    return TrialContext(np.arange(start, start + count), rng)


def _execute(cfg, gadget, be, ctx, noise):
    if cfg.kind == "recovery":
        return run_recovery_batch(be, gadget, ctx, noise)
    return run_ancilla_batch(be, gadget, ctx, noise, cfg.retry_cap)


def _run_chunk(task) -> _Tally:
    cfg, (eps, gamma), start, count = task
    gadget = cfg.gadget()
    params = ErrorParams(eps, gamma, cfg.one_qubit)
    pf, sv = get_backend("pauliframe", cfg.memory), get_backend("statevector", cfg.memory)
    if cfg.backend == "both":
        tape = []
        fid, failed, stats = _execute(cfg, gadget, pf, _context(cfg, start, count), StochasticNoise(params, tape))
        replay = ReplayNoise(tape)
        fid_sv, failed_sv, _ = _execute(cfg, gadget, sv, _context(cfg, start, count), replay)
        replay.check_consumed()
        if np.any(failed != failed_sv) or np.max(np.abs(fid - fid_sv), initial=0.0) > 1e-9:
            raise BackendMismatchError(f"pf and sv disagree at eps={eps}, gamma={gamma}")
    else:
        be = sv if cfg.backend == "statevector" else pf
        fid, failed, stats = _execute(cfg, gadget, be, _context(cfg, start, count), StochasticNoise(params))
    ok = fid[~failed]
    return _Tally(count, int(failed.sum()), float(ok.sum()), float((ok * ok).sum()), stats)


def _row(cfg: ExperimentConfig, eps: float, gamma: float, t: _Tally) -> ExperimentRow:
    n = t.trials - t.failed
    mean = t.f_sum / n if n else 0.0
    if cfg.backend == "statevector":
        var = max(t.f_sq / n - mean * mean, 0.0) * n / (n - 1) if n > 1 else 0.0
        se = math.sqrt(var / n) if n else 0.0
    else:
        se = math.sqrt(mean * (1 - mean) / n) if n else 0.0
    s = t.stats
    return ExperimentRow(
        cfg.method_label, cfg.variant_label, cfg.rounds if cfg.kind == "recovery" else 0,
        cfg.verification, float(eps), float(gamma), t.trials, t.failed,
        float(min(max(mean, 0.0), 1.0)), float(se),
        s.bad / s.attempts if s.attempts else 0.0,
        s.accepted / s.attempts if s.attempts else 1.0,
        (s.attempts - s.accepted) / s.requests if s.requests else 0.0,
        cfg.seed, cfg.multiplier,
        s.bad / s.accepted if s.accepted else 0.0,
    )


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRow]:
    """Rows in grid order.  Trials are split into chunks that may run in
    parallel; per-trial generators make the result independent of the split."""
    tasks = []
    for point in cfg.grid():
        total = cfg.trials_for(*point)
        tasks.extend((cfg, point, s, min(cfg.chunk, total - s)) for s in range(0, total, cfg.chunk))
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            tallies = list(pool.map(_run_chunk, tasks))
    else:
        tallies = [_run_chunk(t) for t in tasks]
    merged: dict[tuple[float, float], _Tally] = {}
    for (_, point, _, _), t in zip(tasks, tallies):
        merged.setdefault(point, _Tally()).merge(t)
    return [_row(cfg, *point, merged[point]) for point in cfg.grid()]


def run_ancilla_experiment(cfg: ExperimentConfig) -> list[ExperimentRow]:
    return run_experiment(replace(cfg, kind="ancilla"))


def run_recovery_experiment(cfg: ExperimentConfig) -> list[ExperimentRow]:
    return run_experiment(replace(cfg, kind="recovery"))


def theoretical_Fa(eps: float, gamma: float) -> float:
    """First-order estimate for the unverified 19-gate, 72-idle |+_L> network."""
    for name, v in (("eps", eps), ("gamma", gamma)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return (1 - gamma) ** 19 * (1 - eps) ** 72


@dataclass(frozen=True)
class SpreadReport:
    epsilon: float
    gamma: float
    mean: float
    spread: float
    within_tolerance: bool


def convergence_check(row_sets, tolerance: float = 0.01) -> list[SpreadReport]:
    """Relative spread (max - min) / mean of F at each grid point across runs."""
    row_sets = [list(rs) for rs in row_sets]
    if len(row_sets) < 2:
        raise ValueError("convergence check needs at least two runs")
    if len({len(rs) for rs in row_sets}) != 1:
        raise ValueError("runs cover different grids")
    out = []
    for rows in zip(*row_sets):
        points = {(r.epsilon, r.gamma) for r in rows}
        if len(points) != 1:
            raise ValueError("runs cover different grids")
        fs = np.array([r.F_mean for r in rows])
        mean = float(fs.mean())
        width = float(fs.max() - fs.min())
        spread = width / mean if mean > 0 else (0.0 if width == 0 else math.inf)
        out.append(SpreadReport(rows[0].epsilon, rows[0].gamma, mean, spread, spread <= tolerance))
    return out


def config_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)


__all__ = [
    "CSV_COLUMNS", "ExperimentConfig", "ExperimentRow", "SpreadReport", "BackendMismatchError",
    "run_experiment", "run_ancilla_experiment", "run_recovery_experiment", "theoretical_Fa",
    "convergence_check", "config_dict",
]
