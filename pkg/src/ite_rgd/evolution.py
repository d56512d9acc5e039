"""Exact ITE, Riemannian gradient descent (RGD) and its Pauli-sampled variant (SRGD).

Conventions used throughout:

* ``grad J = [H, |phi><phi|]`` is traceless anti-Hermitian.
* One RGD step applies ``exp(-dbeta * grad J)``.
* One SRGD step samples a normalized Pauli ``P_j`` uniformly from the active
  basis and applies ``exp(-i C_j D dbeta P_j)`` with ``C_j = <grad J, i P_j>``.
  Equivalently it evolves by the stochastic gradient ``g = D C_j i P_j`` for a
  step ``-dbeta``; averaging ``g`` over ``j`` gives back ``grad J``.

Note on the coefficient: ``d/dtheta <phi| e^{i theta P} H e^{-i theta P} |phi>``
at ``theta = 0`` equals ``-C_j``, not ``+C_j``. The sign of ``C_j`` used here is
the one that makes the sampled gate lower the energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import ContractViolation, ConventionError, DegenerateStateError
from .hamiltonian import HamiltonianSpec, PauliBasis, PauliString, _as_operator, expectation
from .linalg import (
    ALGEBRAIC_TOL,
    HermitianOperator,
    StateVector,
    TangentGenerator,
    evolve_by_generator,
    hilbert_schmidt_inner,
)
from .metrics import TrajectoryRecord, euclidean_error, fidelity_error

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ScheduleConfig:
    """Total imaginary time ``beta`` split into ``num_steps`` equal steps."""

    beta: float
    num_steps: int

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ContractViolation("beta must be a finite non-negative number")
        if int(self.num_steps) != self.num_steps or self.num_steps < 1:
            raise ContractViolation("num_steps must be a positive integer")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "num_steps", int(self.num_steps))

    @property
    def step_size(self) -> float:
        return self.beta / self.num_steps

    def partial_beta(self, k: int) -> float:
        return k * self.beta / self.num_steps


@dataclass(frozen=True)
class SrgdStepRecord:
    step_index: int
    sampled_index: int
    coefficient: float
    rotation_angle: float


@dataclass(frozen=True)
class TrajectoryPath:
    """Sampled directions of one SRGD trajectory.

    ``converged_at`` is the step at which the gradient vanished; sampling
    stops there and every later step is the identity.
    """

    seed: int
    steps: tuple[SrgdStepRecord, ...]
    converged_at: int | None = None

    @property
    def sampled_indices(self) -> tuple[int, ...]:
        return tuple(s.sampled_index for s in self.steps)


def h_norm(H) -> float:
    if isinstance(H, HamiltonianSpec):
        return H.spectral_norm
    op = _as_operator(H)
    return float(np.max(np.abs(op.eigenvalues)))


# -- sampling -----------------------------------------------------------------


def trajectory_bit_generator(seed: int) -> np.random.Philox:
    """Counter-based Philox-4x64 stream keyed by the 64-bit ``seed``."""
    return np.random.Philox(key=int(seed) & MASK64)


def uniform_index(bitgen: np.random.BitGenerator, n: int) -> int:
    """Uniform integer in ``[0, n)`` from raw 64-bit words.

    Rejection sampling: words at or above the largest multiple of ``n`` below
    ``2**64`` are discarded, then the word is reduced modulo ``n``. Only the raw
    bit stream is used, so the draw is identical on every platform.
    """
    if n < 1:
        raise ValueError("n must be positive")
    limit = (1 << 64) - ((1 << 64) % n)
    while True:
        word = int(bitgen.random_raw())
        if word < limit:
            return word % n


def replay_indices(seed: int, basis: PauliBasis, count: int) -> list[int]:
    """The first ``count`` basis indices an SRGD trajectory with ``seed`` samples."""
    bitgen = trajectory_bit_generator(seed)
    active = basis.active_indices
    return [active[uniform_index(bitgen, len(active))] for _ in range(count)]


# -- imaginary time evolution -------------------------------------------------


def _ite_from_overlaps(op: HermitianOperator, overlaps: np.ndarray, beta: float) -> StateVector:
    w = op.eigenvalues
    # Shifting by the ground energy avoids overflow; normalization cancels it.
    weights = np.exp(-beta * (w - w[0])) * overlaps
    norm = np.linalg.norm(weights)
    if not norm > 1e-300:
        raise DegenerateStateError(
            f"e^(-beta H)|psi0> vanished at beta={beta}: no spectral weight survives"
        )
    out = op.eigenvectors @ (weights / norm)
    return StateVector(out / np.linalg.norm(out))


def ite_state(H, psi0: StateVector, beta: float) -> StateVector:
    """Normalized ``exp(-beta H)|psi0>`` from the spectral decomposition of ``H``."""
    if not np.isfinite(beta) or beta < 0:
        raise ContractViolation("beta must be finite and non-negative")
    if beta == 0:
        return psi0
    op = _as_operator(H)
    overlaps = op.eigenvectors.conj().T @ psi0.amplitudes
    return _ite_from_overlaps(op, overlaps, beta)


def ite_step(H, psi: StateVector, dbeta: float) -> StateVector:
    return ite_state(H, psi, dbeta)


def ite_path(H, psi0: StateVector, schedule: ScheduleConfig) -> list[StateVector]:
    """Exact ITE states at ``k * dbeta`` for ``k = 0..n``."""
    op = _as_operator(H)
    overlaps = op.eigenvectors.conj().T @ psi0.amplitudes
    states = [psi0]
    for k in range(1, schedule.num_steps + 1):
        states.append(_ite_from_overlaps(op, overlaps, schedule.partial_beta(k)))
    return states


# -- Riemannian gradient descent ---------------------------------------------


def riemannian_gradient(H, phi: StateVector) -> TangentGenerator:
    """``[H, |phi><phi|] = |H phi><phi| - |phi><H phi|``."""
    op = _as_operator(H)
    if op.dim != phi.dim:
        raise ContractViolation(f"operator dim {op.dim} vs state dim {phi.dim}")
    psi = phi.amplitudes
    h_psi = op.matrix @ psi
    a = np.outer(h_psi, psi.conj())
    return TangentGenerator(a - a.conj().T)


def rgd_step(H, phi: StateVector, dbeta: float) -> StateVector:
    return evolve_by_generator(phi, riemannian_gradient(H, phi), -dbeta)


def _record(k, schedule, H, state, grad, ite_states, target, eps=True, eta_ref=None, sampled=None):
    return TrajectoryRecord(
        step=k,
        partial_beta=schedule.partial_beta(k),
        energy=expectation(H, state),
        eps_rgd=euclidean_error(ite_states[k], state) if eps else None,
        fidelity_error=fidelity_error(target, state),
        eta=None if eta_ref is None else euclidean_error(state, eta_ref),
        grad_hs_norm=grad.hs_norm(),
        sampled_index=sampled,
    )


def rgd_trajectory(
    H, psi0: StateVector, schedule: ScheduleConfig, ite_states: Sequence[StateVector] | None = None
) -> tuple[list[StateVector], list[TrajectoryRecord]]:
    """Run ``n`` RGD steps; returns the ``n + 1`` states and per-step records."""
    if ite_states is None:
        ite_states = ite_path(H, psi0, schedule)
    target = ite_states[-1]
    dbeta = schedule.step_size
    states = [psi0]
    records = []
    phi = psi0
    for k in range(schedule.num_steps + 1):
        grad = riemannian_gradient(H, phi)
        records.append(_record(k, schedule, H, phi, grad, ite_states, target))
        if k == schedule.num_steps:
            break
        phi = evolve_by_generator(phi, grad, -dbeta)
        states.append(phi)
    return states, records


# -- stochastic RGD -----------------------------------------------------------


def srgd_coefficient(grad: TangentGenerator, p: PauliString) -> float:
    """``C = <grad, i P>`` for a normalized Pauli string ``P``."""
    if not p.normalized:
        raise ConventionError("srgd_coefficient needs a normalized Pauli string")
    return float(hilbert_schmidt_inner(grad.matrix, 1j * p.matrix()).real)


def stochastic_gradient(grad: TangentGenerator, p: PauliString, dim: int) -> TangentGenerator:
    """``g = D C i P``; evolving by ``g`` for ``-dbeta`` is the SRGD gate."""
    return TangentGenerator(dim * srgd_coefficient(grad, p) * 1j * p.matrix())


def _srgd_apply(chi, grad, p_index, basis, dbeta, step_index):
    if p_index not in basis.active_indices:
        raise ContractViolation(f"basis index {p_index} is outside the active sample space")
    p = basis.elements[p_index]
    dim = basis.effective_size
    coeff = srgd_coefficient(grad, p)
    record = SrgdStepRecord(step_index, p_index, coeff, coeff * dim * dbeta)
    if coeff == 0.0:
        return chi, record
    gen = TangentGenerator(dim * coeff * 1j * p.matrix())
    return evolve_by_generator(chi, gen, -dbeta), record


def srgd_step(
    H, chi: StateVector, dbeta: float, p_index: int, basis: PauliBasis, step_index: int = 0
) -> tuple[StateVector, SrgdStepRecord]:
    """Apply ``exp(-i C D dbeta P)`` for the basis element ``p_index``.

    ``D`` is the effective size of the (possibly restricted) basis.
    """
    return _srgd_apply(chi, riemannian_gradient(H, chi), p_index, basis, dbeta, step_index)


def _converged(grad: TangentGenerator, H) -> bool:
    return grad.hs_norm() <= ALGEBRAIC_TOL * max(1.0, h_norm(H))


def srgd_trajectory(
    H,
    psi0: StateVector,
    schedule: ScheduleConfig,
    basis: PauliBasis,
    seed: int,
    *,
    ite_states: Sequence[StateVector] | None = None,
    rgd_states: Sequence[StateVector] | None = None,
) -> tuple[StateVector, TrajectoryPath, list[TrajectoryRecord]]:
    """One SRGD trajectory driven by the Philox stream keyed by ``seed``.

    ``ite_states`` / ``rgd_states`` are the shared references at every
    ``k * dbeta``; they are computed here when not supplied.
    """
    if basis.num_qubits != psi0.num_qubits:
        raise ContractViolation("basis and state act on different qubit counts")
    if ite_states is None:
        ite_states = ite_path(H, psi0, schedule)
    if rgd_states is None:
        rgd_states, _ = rgd_trajectory(H, psi0, schedule, ite_states)
    target = ite_states[-1]
    dbeta = schedule.step_size
    bitgen = trajectory_bit_generator(seed)
    active = basis.active_indices

    chi = psi0
    steps: list[SrgdStepRecord] = []
    converged_at = None
    grad = riemannian_gradient(H, chi)
    records = [_record(0, schedule, H, chi, grad, ite_states, target, eta_ref=rgd_states[0])]
    for k in range(1, schedule.num_steps + 1):
        sampled = None
        if converged_at is None and _converged(grad, H):
            converged_at = k - 1
        if converged_at is None:
            sampled = active[uniform_index(bitgen, len(active))]
            chi, rec = _srgd_apply(chi, grad, sampled, basis, dbeta, k)
            steps.append(rec)
            grad = riemannian_gradient(H, chi)
        records.append(
            _record(k, schedule, H, chi, grad, ite_states, target, eta_ref=rgd_states[k], sampled=sampled)
        )
    return chi, TrajectoryPath(int(seed), tuple(steps), converged_at), records


# -- energy change and averaged channel --------------------------------------


def energy_change(H, phi: StateVector, step_applier: Callable) -> float:
    """``<phi|H|phi> - <phi'|H|phi'>`` where ``phi'`` is ``step_applier(phi)``."""
    out = step_applier(phi)
    if isinstance(out, tuple):
        out = out[0]
    return expectation(H, phi) - expectation(H, out)


def srgd_average_channel(H, phi: StateVector, dbeta: float, basis: PauliBasis) -> np.ndarray:
    """``E_j[V_j rho V_j^dagger]`` over the active basis, as a density matrix."""
    grad = riemannian_gradient(H, phi)
    out = np.zeros((phi.dim, phi.dim), dtype=np.complex128)
    for j in basis.active_indices:
        chi, _ = _srgd_apply(phi, grad, j, basis, dbeta, 0)
        out += chi.density_matrix()
    return out / basis.effective_size


def rgd_channel(H, phi: StateVector, dbeta: float) -> np.ndarray:
    return rgd_step(H, phi, dbeta).density_matrix()
