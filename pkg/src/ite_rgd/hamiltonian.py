"""Pauli-string Hamiltonians and the normalized Pauli basis of su(d).

Two conventions coexist and are never mixed silently:

* Hamiltonian terms use bare Pauli strings (``sigma``, eigenvalues +-1) so that
  coefficients carry physical energy units.
* Sampling bases use normalized strings ``P = sigma / sqrt(d)`` which satisfy
  ``Tr(P_j P_k) = delta_jk`` and ``P**2 = 1/d``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ContractViolation, ConventionError, DimensionMismatch, SizeLimitExceeded
from .linalg import HermitianOperator, StateVector

DEFAULT_MAX_QUBITS = 6

PAULI_LETTERS = "IXYZ"
_SINGLE = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@lru_cache(maxsize=1024)
def _bare_matrix(letters: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for ch in letters:
        out = np.kron(out, _SINGLE[ch])
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis; ``letters[0]`` acts on the most significant qubit."""

    letters: str
    normalized: bool = False

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or set(letters) - set(PAULI_LETTERS):
            raise ContractViolation(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    def matrix(self) -> np.ndarray:
        m = _bare_matrix(self.letters)
        if self.normalized:
            return m / np.sqrt(m.shape[0])
        return m

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Real-weighted sum of bare Pauli strings.

    The dense matrix, its spectrum and the spectral norm are computed at
    construction, so instances can be shared freely between workers.
    """

    terms: tuple[tuple[float, PauliString], ...]
    num_qubits: int
    max_qubits: int = DEFAULT_MAX_QUBITS
    operator: HermitianOperator = field(init=False, repr=False)
    spectral_norm: float = field(init=False, repr=False)

    def __init__(
        self,
        terms: Iterable[tuple[float, PauliString | str]],
        num_qubits: int | None = None,
        max_qubits: int = DEFAULT_MAX_QUBITS,
    ):
        parsed = []
        for coeff, string in terms:
            if isinstance(string, str):
                string = PauliString(string)
            if string.normalized:
                raise ConventionError("Hamiltonian terms use bare (unnormalized) Pauli strings")
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ContractViolation("coefficients must be finite reals")
            parsed.append((coeff, string))
        lengths = {s.num_qubits for _, s in parsed}
        if num_qubits is None:
            if len(lengths) != 1:
                raise ContractViolation("cannot infer the qubit count from the terms")
            num_qubits = lengths.pop()
        elif lengths - {num_qubits}:
            raise DimensionMismatch(f"term lengths {sorted(lengths)} differ from {num_qubits} qubits")
        if num_qubits < 1:
            raise ContractViolation("num_qubits must be positive")
        object.__setattr__(self, "terms", tuple(parsed))
        object.__setattr__(self, "num_qubits", int(num_qubits))
        object.__setattr__(self, "max_qubits", int(max_qubits))
        op = materialize(self)
        object.__setattr__(self, "operator", op)
        object.__setattr__(self, "spectral_norm", float(np.max(np.abs(op.eigenvalues))))

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    def to_text(self) -> str:
        return "\n".join(f"{c!r} {s}" for c, s in self.terms)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*{s}" for c, s in self.terms) or "0"
        return f"HamiltonianSpec({body})"


def materialize(spec: HamiltonianSpec) -> HermitianOperator:
    """Dense matrix ``sum_k c_k sigma_k`` of a Pauli-sum Hamiltonian."""
    n = spec.num_qubits
    if n > spec.max_qubits:
        raise SizeLimitExceeded(f"{n} qubits exceeds the dense cap of {spec.max_qubits}")
    d = 2**n
    out = np.zeros((d, d), dtype=np.complex128)
    for coeff, string in spec.terms:
        out += coeff * _bare_matrix(string.letters)
    return HermitianOperator(out)


def parse_hamiltonian(text: str, max_qubits: int = DEFAULT_MAX_QUBITS) -> HamiltonianSpec:
    """Parse ``<coefficient> <letters>`` lines, e.g. ``0.5 ZZ``.

    Blank lines and ``#`` comments are ignored; ``;`` also separates terms.
    """
    terms = []
    for lineno, raw in enumerate(re.split(r"[\n;]", text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ContractViolation(f"term {lineno}: expected '<coefficient> <pauli letters>', got {raw!r}")
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ContractViolation(f"term {lineno}: bad coefficient {parts[0]!r}") from None
        terms.append((coeff, PauliString(parts[1])))
    if not terms:
        raise ContractViolation("no Hamiltonian terms found")
    return HamiltonianSpec(terms, max_qubits=max_qubits)


def _as_operator(H) -> HermitianOperator:
    if isinstance(H, HamiltonianSpec):
        return H.operator
    if isinstance(H, HermitianOperator):
        return H
    return HermitianOperator(H)


def _check_dims(op: HermitianOperator, state: StateVector):
    if op.dim != state.dim:
        raise DimensionMismatch(f"operator dim {op.dim} vs state dim {state.dim}")


def expectation(H, state: StateVector) -> float:
    op = _as_operator(H)
    _check_dims(op, state)
    psi = state.amplitudes
    return float(np.vdot(psi, op.matrix @ psi).real)


def variance(H, state: StateVector) -> float:
    """``<H^2> - <H>^2``, clipped at zero against round-off."""
    op = _as_operator(H)
    _check_dims(op, state)
    h_psi = op.matrix @ state.amplitudes
    mean = np.vdot(state.amplitudes, h_psi).real
    second = np.vdot(h_psi, h_psi).real
    return float(max(second - mean * mean, 0.0))


@dataclass(frozen=True, eq=False)
class PauliBasis:
    """Ordered normalized Pauli strings, optionally restricted to a subset.

    ``restriction`` lists the active positions into ``elements``; sampling and
    the effective dimension ``D_eff`` only see those positions.
    """

    num_qubits: int
    elements: tuple[PauliString, ...]
    restriction: tuple[int, ...] | None = None

    def __post_init__(self):
        if any(not p.normalized for p in self.elements):
            raise ConventionError("basis elements must be normalized Pauli strings")
        if self.restriction is not None:
            idx = tuple(int(i) for i in self.restriction)
            if not idx:
                raise ContractViolation("restriction must not be empty")
            if len(set(idx)) != len(idx):
                raise ContractViolation("restriction contains duplicate indices")
            bad = [i for i in idx if not 0 <= i < len(self.elements)]
            if bad:
                raise ContractViolation(f"restriction indices out of range: {bad}")
            object.__setattr__(self, "restriction", idx)

    @property
    def size(self) -> int:
        """Size ``D`` of the unrestricted basis."""
        return len(self.elements)

    @property
    def active_indices(self) -> tuple[int, ...]:
        if self.restriction is None:
            return tuple(range(self.size))
        return self.restriction

    @property
    def effective_size(self) -> int:
        return len(self.active_indices)

    def restrict(self, indices: Sequence[int]) -> "PauliBasis":
        return PauliBasis(self.num_qubits, self.elements, tuple(indices))

    def index_of(self, letters: str) -> int:
        target = letters.upper()
        for i, p in enumerate(self.elements):
            if p.letters == target:
                return i
        raise KeyError(letters)

    def matrix(self, index: int) -> np.ndarray:
        return self.elements[index].matrix()

    def __len__(self) -> int:
        return self.effective_size


def full_basis(num_qubits: int) -> PauliBasis:
    """All ``4**N - 1`` non-identity normalized Pauli strings in lexicographic (I<X<Y<Z) order."""
    if num_qubits < 1:
        raise ContractViolation("num_qubits must be >= 1")
    elements = tuple(
        PauliString("".join(letters), normalized=True)
        for letters in itertools.product(PAULI_LETTERS, repeat=num_qubits)
        if set(letters) != {"I"}
    )
    return PauliBasis(num_qubits, elements)
