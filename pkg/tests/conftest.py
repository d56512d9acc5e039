import itertools

import numpy as np
import pytest

from ite_rgd import HamiltonianSpec, PauliString, StateVector

ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

_ACCEPTANCE_LINES: list[str] = []


def report(line: str) -> None:
    """Queue a line for the terminal summary (shown even without ``-s``)."""
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_hamiltonian(rng: np.random.Generator, n_qubits: int, max_terms: int = 4) -> HamiltonianSpec:
    """Pauli sum with coefficients uniform in [-1, 1] over distinct non-identity strings."""
    strings = ["".join(p) for p in itertools.product("IXYZ", repeat=n_qubits)][1:]
    k = int(rng.integers(1, min(max_terms, len(strings)) + 1))
    chosen = rng.choice(len(strings), size=k, replace=False)
    terms = [(float(rng.uniform(-1.0, 1.0)), PauliString(strings[i])) for i in sorted(chosen)]
    return HamiltonianSpec(terms, num_qubits=n_qubits)


def random_state(rng: np.random.Generator, n_qubits: int) -> StateVector:
    d = 2**n_qubits
    amps = rng.normal(size=d) + 1j * rng.normal(size=d)
    return StateVector.from_amplitudes(amps)


def pauli_oracle(letters: str) -> np.ndarray:
    """Dense Pauli string built from its action on computational basis states.

    Qubit 0 is the leftmost letter and the most significant bit. No Kronecker
    products are involved, so this checks ``materialize`` independently.
    """
    n = len(letters)
    d = 2**n
    out = np.zeros((d, d), dtype=complex)
    for col in range(d):
        row, phase = col, 1.0 + 0j
        for q, letter in enumerate(letters):
            shift = n - 1 - q
            bit = (col >> shift) & 1
            if letter in "XY":
                row ^= 1 << shift
            if letter == "Y":
                phase *= 1j if bit == 0 else -1j
            elif letter == "Z" and bit:
                phase *= -1
        out[row, col] = phase
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
