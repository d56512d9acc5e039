"""Distances between states and ensemble reductions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DimensionMismatch
from .linalg import StateVector

TRAJECTORY_COLUMNS = (
    "step",
    "partial_beta",
    "energy",
    "eps_rgd",
    "fidelity_error",
    "eta",
    "grad_hs_norm",
    "sampled_index",
)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Per-step metrics of one evolver run.

    ``fidelity_error`` is always taken against the terminal target ``psi(beta)``;
    ``eps_rgd`` is the raw norm error against exact ITE at ``partial_beta``.
    Fields that do not apply to an evolver are ``None``.
    """

    step: int
    partial_beta: float
    energy: float
    eps_rgd: float | None
    fidelity_error: float
    eta: float | None
    grad_hs_norm: float
    sampled_index: int | None = None

    def __post_init__(self):
        if not -1e-12 <= self.fidelity_error <= 1 + 1e-12:
            raise ValueError(f"fidelity error {self.fidelity_error} outside [0, 1]")
        for name in ("eps_rgd", "eta"):
            value = getattr(self, name)
            if value is not None and not -1e-12 <= value <= 2 + 1e-12:
                raise ValueError(f"{name}={value} outside [0, 2]")

    def values(self) -> tuple:
        return tuple(getattr(self, col) for col in TRAJECTORY_COLUMNS)


def _pair(a: StateVector, b: StateVector) -> tuple[np.ndarray, np.ndarray]:
    if a.dim != b.dim:
        raise DimensionMismatch(f"state dims {a.dim} and {b.dim} differ")
    return a.amplitudes, b.amplitudes


def euclidean_error(a: StateVector, b: StateVector) -> float:
    """Raw ``||a - b||``; global phase is NOT quotiented out."""
    x, y = _pair(a, b)
    return float(np.linalg.norm(x - y))


def fidelity_error(target: StateVector, state: StateVector) -> float:
    """``1 - |<target|state>|^2``, clipped to [0, 1]."""
    x, y = _pair(target, state)
    value = 1.0 - abs(np.vdot(x, y)) ** 2
    return float(min(max(value, 0.0), 1.0))


@dataclass(frozen=True)
class EnsembleStatistics:
    mean: float
    variance: float
    tail_frequency: float
    exceedances: int
    count: int
    threshold: float


def ensemble_statistics(
    values: Sequence[float], bound: float, delta: float, cap: float = 1.0
) -> EnsembleStatistics:
    """Mean, unbiased variance and tail frequency of per-trajectory errors.

    The tail counts values strictly above ``min(cap, bound) + delta``. Sums use
    ``math.fsum`` over the trajectory-index order, so the result does not depend
    on how the trajectories were scheduled.
    """
    vals = [float(v) for v in values]
    m = len(vals)
    if m < 2:
        raise ValueError("ensemble statistics need at least two trajectories")
    mean = math.fsum(vals) / m
    var = math.fsum((v - mean) ** 2 for v in vals) / (m - 1)
    threshold = min(cap, bound) + delta
    hits = sum(1 for v in vals if v > threshold)
    return EnsembleStatistics(mean, var, hits / m, hits, m, threshold)


def clopper_pearson_upper(exceedances: int, count: int, alpha: float = 0.05) -> float:
    """One-sided upper confidence limit; closed form only for zero exceedances."""
    if exceedances != 0:
        raise ValueError("closed form only covers the zero-exceedance case")
    return 1.0 - alpha ** (1.0 / count)
