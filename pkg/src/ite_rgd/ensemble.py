"""Many SRGD trajectories against one shared ITE / RGD reference."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import bounds
from .bounds import BoundReport, Convention
from .evolution import (
    ScheduleConfig,
    TrajectoryPath,
    h_norm,
    ite_path,
    ite_step,
    rgd_trajectory,
    srgd_trajectory,
)
from .exceptions import ContractViolation, SizeLimitExceeded
from .hamiltonian import DEFAULT_MAX_QUBITS, HamiltonianSpec, PauliBasis, full_basis, variance
from .linalg import StateVector
from .metrics import (
    EnsembleStatistics,
    TrajectoryRecord,
    clopper_pearson_upper,
    ensemble_statistics,
    euclidean_error,
)

EXACT_SLACK = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    hamiltonian: HamiltonianSpec
    initial_state: StateVector
    schedule: ScheduleConfig
    num_trajectories: int = 0
    base_seed: int = 0
    basis_restriction: tuple[int, ...] | None = None
    delta: float = 0.1
    delta_tilde: float | None = None
    convention: Convention = Convention.EXACT
    initial_label: str = "custom"
    max_qubits: int = DEFAULT_MAX_QUBITS

    def __post_init__(self):
        if self.num_trajectories < 0:
            raise ContractViolation("num_trajectories must be >= 0")
        if not 0 <= self.base_seed <= (1 << 64) - 1:
            raise ContractViolation("base_seed must fit in 64 bits")
        if not self.delta > 0:
            raise ContractViolation("delta must be positive")
        if self.delta_tilde is not None and not self.delta_tilde > 0:
            raise ContractViolation("delta_tilde must be positive")
        if self.hamiltonian.num_qubits != self.initial_state.num_qubits:
            raise ContractViolation("Hamiltonian and initial state act on different qubit counts")
        object.__setattr__(self, "convention", Convention(self.convention))
        if self.basis_restriction is not None:
            idx = tuple(int(i) for i in self.basis_restriction)
            full = 4**self.num_qubits - 1
            if not idx or any(not 0 <= i < full for i in idx) or len(set(idx)) != len(idx):
                raise ContractViolation(f"basis restriction must be distinct indices in [0, {full})")
            object.__setattr__(self, "basis_restriction", idx)

    @property
    def num_qubits(self) -> int:
        return self.hamiltonian.num_qubits

    @property
    def effective_delta_tilde(self) -> float:
        return self.delta / 2.0 if self.delta_tilde is None else self.delta_tilde

    def trajectory_seed(self, t: int) -> int:
        return self.base_seed ^ t


@dataclass(frozen=True)
class SrgdRun:
    index: int
    final_state: StateVector
    path: TrajectoryPath
    records: tuple[TrajectoryRecord, ...]


@dataclass(frozen=True)
class BoundVerdict:
    name: str
    kind: str  # "exact" or "statistical"
    lhs: float
    rhs: float
    passed: bool
    step: int | None = None


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    config: ExperimentConfig
    basis: PauliBasis
    ite_states: tuple[StateVector, ...]
    rgd_states: tuple[StateVector, ...]
    rgd_records: tuple[TrajectoryRecord, ...]
    trajectories: tuple[SrgdRun, ...]
    summary: tuple[EnsembleStatistics, ...]
    eta_summary: EnsembleStatistics | None
    bound_report: BoundReport
    verdicts: tuple[BoundVerdict, ...] = field(default=())

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def exact_passed(self) -> bool:
        return all(v.passed for v in self.verdicts if v.kind == "exact")


def _run_one(args) -> SrgdRun:
    H, psi0, schedule, basis, seed, index, ite_states, rgd_states = args
    final, path, records = srgd_trajectory(
        H, psi0, schedule, basis, seed, ite_states=ite_states, rgd_states=rgd_states
    )
    return SrgdRun(index, final, path, tuple(records))


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> EnsembleResult:
    """ITE reference, deterministic RGD curve, ``M`` SRGD trajectories, bounds and verdicts.

    Trajectory ``t`` uses the stream seed ``base_seed XOR t``. With ``jobs > 1``
    trajectories run in worker processes; results are gathered in index order
    so the output does not depend on ``jobs``.
    """
    n_qubits = config.num_qubits
    if n_qubits > config.max_qubits:
        raise SizeLimitExceeded(f"{n_qubits} qubits exceeds the cap of {config.max_qubits}")
    H = config.hamiltonian
    psi0 = config.initial_state
    schedule = config.schedule
    basis = full_basis(n_qubits)
    if config.basis_restriction is not None:
        basis = basis.restrict(config.basis_restriction)

    ite_states = tuple(ite_path(H, psi0, schedule))
    rgd_states, rgd_records = rgd_trajectory(H, psi0, schedule, ite_states)
    rgd_states = tuple(rgd_states)

    tasks = [
        (H, psi0, schedule, basis, config.trajectory_seed(t), t, ite_states, rgd_states)
        for t in range(config.num_trajectories)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            runs = tuple(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        runs = tuple(_run_one(task) for task in tasks)

    report = bounds.bound_report(
        schedule.beta,
        schedule.num_steps,
        h_norm(H),
        basis.effective_size,
        H.dim,
        delta=config.delta,
        delta_tilde=config.effective_delta_tilde,
        convention=config.convention,
        grad_hs_sq=2.0 * variance(H, psi0),
    )

    summary: tuple[EnsembleStatistics, ...] = ()
    eta_summary = None
    if len(runs) >= 2:
        b_n = report.theorem2_mean_b_n
        summary = tuple(
            ensemble_statistics([run.records[k].fidelity_error for run in runs], b_n, config.delta)
            for k in range(schedule.num_steps + 1)
        )
        eta_summary = ensemble_statistics(
            [run.records[-1].eta for run in runs],
            report.lemma2_mean_bt_n,
            config.effective_delta_tilde,
            cap=bounds.SQRT2,
        )

    result = EnsembleResult(
        config=config,
        basis=basis,
        ite_states=ite_states,
        rgd_states=rgd_states,
        rgd_records=tuple(rgd_records),
        trajectories=runs,
        summary=summary,
        eta_summary=eta_summary,
        bound_report=report,
    )
    return replace(result, verdicts=tuple(verify_bounds(result)))


def _worst(name: str, pairs: Sequence[tuple[int, float, float]]) -> BoundVerdict:
    step, lhs, rhs = max(pairs, key=lambda p: p[1] - p[2])
    return BoundVerdict(name, "exact", lhs, rhs, lhs <= rhs + EXACT_SLACK, step)


def verify_bounds(result: EnsembleResult) -> list[BoundVerdict]:
    """Re-derive every inequality from the stored states and records.

    Exact bounds (Lemma 1 per step, the one-step recursion, Theorem 1) pass when
    ``lhs <= rhs + 1e-10``; each reports its worst step. Statistical bounds
    (Theorem 2, Lemma 2) compare ensemble estimates against clamped values and
    need at least two trajectories.
    """
    cfg = result.config
    H = cfg.hamiltonian
    schedule = cfg.schedule
    n = schedule.num_steps
    dbeta = schedule.step_size
    rep = result.bound_report
    ite_states = result.ite_states
    rgd_states = result.rgd_states

    lemma1 = rep.lemma1
    lemma1_pairs = []
    eps = [euclidean_error(ite_states[k], rgd_states[k]) for k in range(n + 1)]
    recursion_pairs = []
    for k in range(1, n + 1):
        one_step = ite_step(H, rgd_states[k - 1], dbeta)
        lemma1_pairs.append((k, euclidean_error(one_step, rgd_states[k]), lemma1))
        recursion_pairs.append((k, eps[k], eps[k - 1] * rep.recursion_A + rep.recursion_B))

    verdicts = [
        _worst("lemma1", lemma1_pairs),
        _worst("recursion", recursion_pairs),
        _worst("theorem1", [(n, eps[n], rep.theorem1)]),
    ]

    if result.summary:
        terminal = result.summary[-1]
        verdicts.append(
            BoundVerdict("theorem2_mean", "statistical", terminal.mean, rep.theorem2_mean_b_n_clamped,
                         terminal.mean <= rep.theorem2_mean_b_n_clamped, n)
        )
        verdicts.append(
            BoundVerdict("theorem2_tail", "statistical", terminal.tail_frequency, rep.theorem2_tail_clamped,
                         terminal.tail_frequency <= rep.theorem2_tail_clamped, n)
        )
        eta = result.eta_summary
        verdicts.append(
            BoundVerdict("lemma2_mean", "statistical", eta.mean, rep.lemma2_mean_bt_n_clamped,
                         eta.mean <= rep.lemma2_mean_bt_n_clamped, n)
        )
        verdicts.append(
            BoundVerdict("lemma2_tail", "statistical", eta.tail_frequency, rep.lemma2_tail_clamped,
                         eta.tail_frequency <= rep.lemma2_tail_clamped, n)
        )
    return verdicts


def tail_note(stats: EnsembleStatistics) -> str:
    if stats.exceedances == 0:
        upper = clopper_pearson_upper(0, stats.count)
        return (
            f"0/{stats.count} exceedances; one-sided 95% Clopper-Pearson upper limit "
            f"{upper:.4g} (verdict uses the raw frequency)"
        )
    return f"{stats.exceedances}/{stats.count} exceedances"


def summary_document(result: EnsembleResult) -> dict:
    """Flat key/value summary: config echo, bound report, statistics, verdicts."""
    cfg = result.config
    doc: dict = {
        "num_qubits": cfg.num_qubits,
        "hamiltonian": "; ".join(f"{c!r} {s}" for c, s in cfg.hamiltonian.terms),
        "initial_state": cfg.initial_label,
        "beta": cfg.schedule.beta,
        "num_steps": cfg.schedule.num_steps,
        "step_size": cfg.schedule.step_size,
        "num_trajectories": cfg.num_trajectories,
        "base_seed": cfg.base_seed,
        "basis_restriction": (
            "" if cfg.basis_restriction is None else ",".join(str(i) for i in cfg.basis_restriction)
        ),
        "D_eff": result.basis.effective_size,
        "delta": cfg.delta,
        "delta_tilde": cfg.effective_delta_tilde,
        "convention": cfg.convention.value,
    }
    for key, value in result.bound_report.as_dict().items():
        doc[f"bounds.{key}"] = value
    rgd_final = result.rgd_records[-1]
    doc["rgd.final_energy"] = rgd_final.energy
    doc["rgd.final_eps"] = rgd_final.eps_rgd
    doc["rgd.final_fidelity_error"] = rgd_final.fidelity_error
    if result.summary:
        terminal = result.summary[-1]
        doc["srgd.final_fidelity_error.mean"] = terminal.mean
        doc["srgd.final_fidelity_error.variance"] = terminal.variance
        doc["srgd.final_fidelity_error.tail_frequency"] = terminal.tail_frequency
        doc["srgd.final_fidelity_error.tail_note"] = tail_note(terminal)
        doc["srgd.final_eta.mean"] = result.eta_summary.mean
        doc["srgd.final_eta.variance"] = result.eta_summary.variance
        doc["srgd.final_eta.tail_frequency"] = result.eta_summary.tail_frequency
        doc["srgd.final_eta.tail_note"] = tail_note(result.eta_summary)
        converged = [r.index for r in result.trajectories if r.path.converged_at is not None]
        doc["srgd.converged_trajectories"] = len(converged)
    for v in result.verdicts:
        prefix = f"verdict.{v.name}"
        doc[f"{prefix}.kind"] = v.kind
        doc[f"{prefix}.lhs"] = v.lhs
        doc[f"{prefix}.rhs"] = v.rhs
        doc[f"{prefix}.step"] = v.step
        doc[f"{prefix}.pass"] = v.passed
    doc["all_passed"] = result.all_passed
    return doc
