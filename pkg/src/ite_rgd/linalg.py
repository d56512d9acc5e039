"""Dense complex linear algebra on qubit registers.

Every matrix exponential in the package goes through :func:`evolve_by_generator`,
which diagonalizes the Hermitian matrix ``i * gen`` and exponentiates the
eigenvalues. No truncated series are used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractViolation, DimensionMismatch

ALGEBRAIC_TOL = 1e-12
ROUNDTRIP_TOL = 1e-10


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


def _num_qubits(dim: int) -> int:
    if dim < 2 or dim & (dim - 1):
        raise ContractViolation(f"dimension {dim} is not a power of two >= 2")
    return dim.bit_length() - 1


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector of an ``N``-qubit register (``d = 2**N``)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _freeze(self.amplitudes)
        if amps.ndim != 1:
            raise ContractViolation("amplitudes must be a 1-d vector")
        _num_qubits(amps.shape[0])
        if not np.all(np.isfinite(amps)):
            raise ContractViolation("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ALGEBRAIC_TOL:
            raise ContractViolation(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if normalize:
            norm = np.linalg.norm(amps)
            if not np.isfinite(norm) or norm == 0.0:
                raise ContractViolation("cannot normalize a zero or non-finite vector")
            amps = amps / norm
        return cls(amps)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        """Computational basis state, ``bits[0]`` being the most significant qubit."""
        if not bits or set(bits) - {"0", "1"}:
            raise ContractViolation(f"invalid bit string {bits!r}")
        amps = np.zeros(2 ** len(bits), dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @classmethod
    def plus(cls, num_qubits: int) -> "StateVector":
        """The product state ``|+...+>``."""
        if num_qubits < 1:
            raise ContractViolation("num_qubits must be positive")
        d = 2**num_qubits
        return cls(np.full(d, 1.0 / np.sqrt(d), dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.dim)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self) -> str:
        return f"StateVector({np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A Hermitian ``d x d`` matrix together with its (eagerly computed) spectrum."""

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = _freeze(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractViolation("operator must be a square matrix")
        if m.size and np.max(np.abs(m - m.conj().T)) > ALGEBRAIC_TOL:
            raise ContractViolation("operator is not Hermitian")
        object.__setattr__(self, "matrix", m)
        evals, evecs = np.linalg.eigh(m)
        evals.setflags(write=False)
        evecs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", evals)
        object.__setattr__(self, "eigenvectors", evecs)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class TangentGenerator:
    """Traceless anti-Hermitian matrix, i.e. an element of su(d)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _freeze(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractViolation("generator must be a square matrix")
        if np.max(np.abs(m + m.conj().T)) > ALGEBRAIC_TOL:
            raise ContractViolation("generator is not anti-Hermitian")
        if abs(np.trace(m)) > ALGEBRAIC_TOL:
            raise ContractViolation("generator is not traceless")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zeros(cls, dim: int) -> "TangentGenerator":
        return cls(np.zeros((dim, dim), dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def is_zero(self) -> bool:
        return not np.any(self.matrix)


def eigendecompose(op: HermitianOperator | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(eigenvalues, eigenvectors)`` with eigenvalues ascending.

    Columns of the eigenvector matrix are the orthonormal eigenvectors, so
    ``V @ diag(w) @ V^dagger`` reconstructs the operator.
    """
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(op)
    return op.eigenvalues.copy(), op.eigenvectors.copy()


def evolve_by_generator(state: StateVector, gen: TangentGenerator, s: float) -> StateVector:
    """Apply ``exp(s * gen)`` to ``state``.

    ``i * gen`` is Hermitian, so with ``i * gen = V diag(w) V^dagger`` the
    propagator is ``V diag(exp(-i s w)) V^dagger``. The result is renormalized
    to strip the ~1e-16 drift of a floating-point unitary.
    """
    if not np.isfinite(s):
        raise ContractViolation("step must be finite")
    if state.dim != gen.dim:
        raise DimensionMismatch(f"state dim {state.dim} vs generator dim {gen.dim}")
    if s == 0 or gen.is_zero():
        return state
    w, v = np.linalg.eigh(1j * gen.matrix)
    out = v @ (np.exp(-1j * s * w) * (v.conj().T @ state.amplitudes))
    return StateVector(out / np.linalg.norm(out))


def hilbert_schmidt_inner(a, b) -> complex:
    """``<a, b> = Tr(a^dagger b)``."""
    a = np.asarray(getattr(a, "matrix", a))
    b = np.asarray(getattr(b, "matrix", b))
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    # Tr(a^dagger b) = sum_ij conj(a_ij) b_ij
    return complex(np.vdot(a, b))


def spectral_norm(op: HermitianOperator | np.ndarray) -> float:
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(op)
    if op.dim == 0:
        return 0.0
    return float(np.max(np.abs(op.eigenvalues)))
