"""Closed-form error bounds for RGD and SRGD as pure scalar functions.

Notation: ``dbeta = beta / n``, ``h = ||H||_inf``, ``D`` the (effective) size
of the sampled Pauli basis and ``d = 2**N`` the Hilbert-space dimension.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

SQRT2 = math.sqrt(2.0)


class Convention(str, enum.Enum):
    """How to read the average-energy-change bound.

    ``EXACT``: ``||grad J||_HS^2 = 2 Var(H)`` and the uniform-average
    denominator ``8 D h``. ``PRINTED``: ``||grad J||_HS^2 = Var(H)`` and the
    denominator ``8 d h``.
    """

    EXACT = "exact"
    PRINTED = "printed"


def _nonneg(**kwargs):
    for name, value in kwargs.items():
        if not value >= 0:
            raise ValueError(f"{name} must be non-negative, got {value!r}")


def _step(beta: float, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return beta / n


def lemma1_bound(dbeta: float, h_norm: float) -> float:
    """Single-step ITE vs RGD norm error bound ``6 dbeta^2 h^2``."""
    _nonneg(dbeta=dbeta, h_norm=h_norm)
    return 6.0 * dbeta**2 * h_norm**2


def recursion_constants(dbeta: float, h_norm: float) -> tuple[float, float]:
    """``(A, B)`` of ``eps_k <= A eps_{k-1} + B``."""
    _nonneg(dbeta=dbeta, h_norm=h_norm)
    return 1.0 + 4.0 * dbeta * h_norm, 10.0 * dbeta**2 * h_norm**2


def recursion_envelope(n: int, A: float, B: float) -> float:
    """Partial geometric sum ``B (A^n - 1) / (A - 1)``; ``n B`` when ``A == 1``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if A == 1.0:
        return n * B
    if A < 1.0:
        raise ValueError("A must be >= 1")
    return B * math.expm1(n * math.log(A)) / (A - 1.0)


def theorem1_bound(beta: float, n: int, h_norm: float) -> float:
    """``(5/2) dbeta h (e^{4 beta h} - 1)``."""
    _nonneg(beta=beta, h_norm=h_norm)
    return 2.5 * _step(beta, n) * h_norm * math.expm1(4.0 * beta * h_norm)


def grad_hs_sq_from_variance(var: float, convention: Convention = Convention.EXACT) -> float:
    return 2.0 * var if Convention(convention) is Convention.EXACT else var


def avg_energy_change_lower_bound(
    grad_hs_sq: float, dims: tuple[int, int], h_norm: float, convention: Convention = Convention.EXACT
) -> float:
    """Lower bound on the basis-averaged energy drop of one SRGD gate.

    ``dims`` is ``(d, D_eff)``. The exact convention divides by ``8 D_eff h``,
    the printed one by ``8 d h``. Returns 0 for a zero gradient (or ``h == 0``).
    """
    _nonneg(grad_hs_sq=grad_hs_sq, h_norm=h_norm)
    if grad_hs_sq == 0:
        return 0.0
    d, d_eff = dims
    denom = d_eff if Convention(convention) is Convention.EXACT else d
    return grad_hs_sq / (8.0 * denom * h_norm)


def theorem2_applies(beta: float, n: int, h_norm: float) -> bool:
    """Large-n condition ``dbeta h <= 1``, i.e. ``n >= beta h``."""
    return n >= beta * h_norm


def _growth(beta: float, h_norm: float) -> float:
    return math.expm1(8.0 * beta * h_norm)


def theorem2_mean_bound(beta: float, n: int, h_norm: float, D: int) -> float:
    """``b_n = (9/2) sqrt(2 dbeta h) D (e^{8 beta h} - 1)^{1/2}``."""
    _nonneg(beta=beta, h_norm=h_norm)
    return 4.5 * math.sqrt(2.0 * _step(beta, n) * h_norm) * D * math.sqrt(_growth(beta, h_norm))


def theorem2_tail_bound(beta: float, n: int, h_norm: float, D: int, delta: float) -> float:
    """Chebyshev tail ``8 dbeta h D^2 (e^{8 beta h} - 1) / delta^2`` (unclamped)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    _nonneg(beta=beta, h_norm=h_norm)
    return 8.0 * _step(beta, n) * h_norm * D**2 * _growth(beta, h_norm) / delta**2


def lemma2_bounds(beta: float, n: int, h_norm: float, D: int, delta_tilde: float) -> tuple[float, float]:
    """``(b~_n, tail)`` for the SRGD-vs-RGD norm error ``eta_n``."""
    if not delta_tilde > 0:
        raise ValueError("delta_tilde must be positive")
    _nonneg(beta=beta, h_norm=h_norm)
    second_moment = 2.0 * _step(beta, n) * h_norm * D**2 * _growth(beta, h_norm)
    return math.sqrt(second_moment), second_moment / delta_tilde**2


@dataclass(frozen=True)
class BoundReport:
    beta: float
    n: int
    dbeta: float
    h_norm: float
    D: int
    d: int
    delta: float
    delta_tilde: float
    convention: str
    lemma1: float
    theorem1: float
    recursion_A: float
    recursion_B: float
    recursion_envelope: float
    grad_hs_sq: float | None
    avg_energy_lb: float | None
    avg_energy_lb_exact: float | None
    avg_energy_lb_printed: float | None
    theorem2_mean_b_n: float
    theorem2_mean_b_n_clamped: float
    theorem2_valid: bool
    theorem2_vacuous: bool
    theorem2_tail: float
    theorem2_tail_clamped: float
    lemma2_mean_bt_n: float
    lemma2_mean_bt_n_clamped: float
    lemma2_tail: float
    lemma2_tail_clamped: float

    def as_dict(self) -> dict:
        return asdict(self)


def bound_report(
    beta: float,
    n: int,
    h_norm: float,
    D: int,
    d: int,
    delta: float = 0.1,
    delta_tilde: float | None = None,
    convention: Convention = Convention.EXACT,
    grad_hs_sq: float | None = None,
) -> BoundReport:
    """Evaluate every bound at one parameter point.

    ``delta_tilde`` defaults to ``delta / 2``, the value that maps the Lemma 2
    tail onto the Theorem 2 tail.
    """
    convention = Convention(convention)
    if delta_tilde is None:
        delta_tilde = delta / 2.0
    dbeta = _step(beta, n)
    A, B = recursion_constants(dbeta, h_norm)
    b_n = theorem2_mean_bound(beta, n, h_norm, D)
    t2 = theorem2_tail_bound(beta, n, h_norm, D, delta)
    bt_n, l2 = lemma2_bounds(beta, n, h_norm, D, delta_tilde)
    lbs = {}
    if grad_hs_sq is not None:
        for conv in Convention:
            lbs[conv] = avg_energy_change_lower_bound(grad_hs_sq, (d, D), h_norm, conv) if h_norm > 0 else 0.0
    return BoundReport(
        beta=beta,
        n=n,
        dbeta=dbeta,
        h_norm=h_norm,
        D=D,
        d=d,
        delta=delta,
        delta_tilde=delta_tilde,
        convention=convention.value,
        lemma1=lemma1_bound(dbeta, h_norm),
        theorem1=theorem1_bound(beta, n, h_norm),
        recursion_A=A,
        recursion_B=B,
        recursion_envelope=recursion_envelope(n, A, B),
        grad_hs_sq=grad_hs_sq,
        avg_energy_lb=lbs.get(convention),
        avg_energy_lb_exact=lbs.get(Convention.EXACT),
        avg_energy_lb_printed=lbs.get(Convention.PRINTED),
        theorem2_mean_b_n=b_n,
        theorem2_mean_b_n_clamped=min(b_n, 1.0),
        theorem2_valid=theorem2_applies(beta, n, h_norm),
        theorem2_vacuous=b_n > 1.0,
        theorem2_tail=t2,
        theorem2_tail_clamped=min(t2, 1.0),
        lemma2_mean_bt_n=bt_n,
        lemma2_mean_bt_n_clamped=min(bt_n, SQRT2),
        lemma2_tail=l2,
        lemma2_tail_clamped=min(l2, 1.0),
    )
