"""scikit-learn style transformers around the evolvers.

Each transformer maps a batch of normalized state vectors, one per row of
``X`` (shape ``(n_states, 2**N)``), to the evolved states. The Hamiltonian is
a constructor parameter, so ``get_params`` / ``set_params`` / ``clone`` work as
for any estimator.

Example
-------
>>> import numpy as np
>>> from ite_rgd.estimators import RiemannianGradientDescent
>>> X = np.full((1, 2), 2 ** -0.5)
>>> rgd = RiemannianGradientDescent(hamiltonian="1.0 Z", beta=1.0, n_steps=300)
>>> out = rgd.fit_transform(X)
>>> bool(abs(out[0, 1]) > 0.99)
True
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .evolution import ScheduleConfig, ite_state, rgd_trajectory, srgd_trajectory
from .hamiltonian import HamiltonianSpec, expectation, full_basis, parse_hamiltonian
from .linalg import HermitianOperator, StateVector

NORM_TOL = 1e-10


def check_states(X, n_features: int | None = None) -> np.ndarray:
    """Validate a batch of state vectors.

    Parameters
    ----------
    X : array-like of shape (n_states, d) or (d,)
        Complex amplitudes, one state per row. ``d`` must be a power of two.
    n_features : int, optional
        Required row length, typically ``n_features_in_`` of a fitted estimator.

    Returns
    -------
    X : ndarray of shape (n_states, d), complex128
    """
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"expected a non-empty 2-d array of states, got shape {X.shape}")
    d = X.shape[1]
    if d < 2 or d & (d - 1):
        raise ValueError(f"row length {d} is not a power of two >= 2")
    if n_features is not None and d != n_features:
        raise ValueError(f"X has {d} features, but the estimator expects {n_features}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains NaN or infinity")
    norms = np.linalg.norm(X, axis=1)
    if np.any(np.abs(norms - 1.0) > NORM_TOL):
        raise ValueError("every row of X must be a unit-norm state vector")
    return X


def check_hamiltonian(hamiltonian) -> HamiltonianSpec | HermitianOperator:
    if hamiltonian is None:
        raise ValueError("a Hamiltonian is required")
    if isinstance(hamiltonian, (HamiltonianSpec, HermitianOperator)):
        return hamiltonian
    if isinstance(hamiltonian, str):
        return parse_hamiltonian(hamiltonian)
    return HermitianOperator(np.asarray(hamiltonian, dtype=np.complex128))


class _EvolverBase(TransformerMixin, BaseEstimator):
    def fit(self, X=None, y=None):
        """Validate parameters and cache the Hamiltonian's spectral data.

        ``X`` is optional; when given, it fixes ``n_features_in_``.
        """
        self.hamiltonian_ = check_hamiltonian(self.hamiltonian)
        self._validate_params_extra()
        d = self.hamiltonian_.dim
        if X is not None:
            check_states(X, d)
        self.n_features_in_ = d
        return self

    def _validate_params_extra(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be finite and non-negative")

    def energy(self, X) -> np.ndarray:
        """``<psi|H|psi>`` for every row of ``X``."""
        check_is_fitted(self, "hamiltonian_")
        X = check_states(X, self.n_features_in_)
        return np.array([expectation(self.hamiltonian_, StateVector(row)) for row in X])

    def score(self, X, y=None) -> float:
        """Negative mean energy of the transformed states (higher is better)."""
        return -float(np.mean(self.energy(self.transform(X))))


class ImaginaryTimeEvolution(_EvolverBase):
    """Exact normalized imaginary time evolution ``e^{-beta H}|psi>``.

    Parameters
    ----------
    hamiltonian : HamiltonianSpec, str or Hermitian array
        Pauli-sum text such as ``"1.0 ZZ; 0.5 XI"`` is parsed.
    beta : float, default=1.0
    """

    def __init__(self, hamiltonian=None, beta=1.0):
        self.hamiltonian = hamiltonian
        self.beta = beta

    def transform(self, X):
        check_is_fitted(self, "hamiltonian_")
        X = check_states(X, self.n_features_in_)
        return np.stack([ite_state(self.hamiltonian_, StateVector(r), self.beta).amplitudes for r in X])


class RiemannianGradientDescent(_EvolverBase):
    """``n_steps`` steps of Riemannian gradient descent with step ``beta / n_steps``.

    Attributes
    ----------
    records_ : list of list of TrajectoryRecord
        Per-row trajectory metrics from the last ``transform``.
    """

    def __init__(self, hamiltonian=None, beta=1.0, n_steps=100):
        self.hamiltonian = hamiltonian
        self.beta = beta
        self.n_steps = n_steps

    def _validate_params_extra(self):
        super()._validate_params_extra()
        ScheduleConfig(self.beta, self.n_steps)

    def transform(self, X):
        check_is_fitted(self, "hamiltonian_")
        X = check_states(X, self.n_features_in_)
        schedule = ScheduleConfig(self.beta, self.n_steps)
        out, self.records_ = [], []
        for row in X:
            states, records = rgd_trajectory(self.hamiltonian_, StateVector(row), schedule)
            out.append(states[-1].amplitudes)
            self.records_.append(records)
        return np.stack(out)


class StochasticRiemannianGradientDescent(_EvolverBase):
    """Pauli-sampled RGD; row ``i`` of ``X`` uses the stream seed ``random_state ^ i``.

    Parameters
    ----------
    hamiltonian : HamiltonianSpec, str or Hermitian array
    beta : float, default=1.0
    n_steps : int, default=100
    basis_restriction : sequence of int, optional
        Indices into the lexicographic normalized Pauli basis to sample from.
    random_state : int, default=0
        64-bit base seed.
    """

    def __init__(self, hamiltonian=None, beta=1.0, n_steps=100, basis_restriction=None, random_state=0):
        self.hamiltonian = hamiltonian
        self.beta = beta
        self.n_steps = n_steps
        self.basis_restriction = basis_restriction
        self.random_state = random_state

    def _validate_params_extra(self):
        super()._validate_params_extra()
        ScheduleConfig(self.beta, self.n_steps)
        n_qubits = self.hamiltonian_.dim.bit_length() - 1
        basis = full_basis(n_qubits)
        if self.basis_restriction is not None:
            basis = basis.restrict(self.basis_restriction)
        self.basis_ = basis

    def transform(self, X):
        check_is_fitted(self, "basis_")
        X = check_states(X, self.n_features_in_)
        schedule = ScheduleConfig(self.beta, self.n_steps)
        out, self.paths_, self.records_ = [], [], []
        for i, row in enumerate(X):
            final, path, records = srgd_trajectory(
                self.hamiltonian_, StateVector(row), schedule, self.basis_, int(self.random_state) ^ i
            )
            out.append(final.amplitudes)
            self.paths_.append(path)
            self.records_.append(records)
        return np.stack(out)
