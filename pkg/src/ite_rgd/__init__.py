"""Imaginary time evolution as Riemannian gradient descent, plus its Pauli-sampled variant."""

from .bounds import (
    BoundReport,
    Convention,
    avg_energy_change_lower_bound,
    bound_report,
    lemma1_bound,
    lemma2_bounds,
    recursion_constants,
    recursion_envelope,
    theorem1_bound,
    theorem2_mean_bound,
    theorem2_tail_bound,
)
from .ensemble import EnsembleResult, ExperimentConfig, run_experiment, verify_bounds
from .evolution import (
    ScheduleConfig,
    SrgdStepRecord,
    TrajectoryPath,
    energy_change,
    ite_path,
    ite_state,
    ite_step,
    rgd_step,
    rgd_trajectory,
    riemannian_gradient,
    srgd_coefficient,
    srgd_step,
    srgd_trajectory,
)
from .exceptions import (
    ContractViolation,
    ConventionError,
    DegenerateStateError,
    DimensionMismatch,
    SizeLimitExceeded,
)
from .hamiltonian import (
    HamiltonianSpec,
    PauliBasis,
    PauliString,
    expectation,
    full_basis,
    materialize,
    parse_hamiltonian,
    variance,
)
from .linalg import (
    HermitianOperator,
    StateVector,
    TangentGenerator,
    eigendecompose,
    evolve_by_generator,
    hilbert_schmidt_inner,
    spectral_norm,
)
from .metrics import TrajectoryRecord, ensemble_statistics, euclidean_error, fidelity_error

__version__ = "0.1.0"

_ESTIMATORS = {
    "ImaginaryTimeEvolution",
    "RiemannianGradientDescent",
    "StochasticRiemannianGradientDescent",
}


def __getattr__(name):
    # scikit-learn is slow to import; only pay for it when an estimator is used.
    if name in _ESTIMATORS:
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
