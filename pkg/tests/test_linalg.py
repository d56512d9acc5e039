import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ite_rgd import (
    ContractViolation,
    DimensionMismatch,
    HermitianOperator,
    StateVector,
    TangentGenerator,
    eigendecompose,
    evolve_by_generator,
    hilbert_schmidt_inner,
    spectral_norm,
)
from ite_rgd.linalg import ROUNDTRIP_TOL

from conftest import pauli_oracle

X = pauli_oracle("X")
Y = pauli_oracle("Y")
Z = pauli_oracle("Z")


def taylor_expm(a: np.ndarray, terms: int = 60) -> np.ndarray:
    # scaling and squaring around a plain power series
    norm = np.linalg.norm(a, 2)
    k = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0 else 0
    a = a / 2**k
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for j in range(1, terms):
        term = term @ a / j
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_generator(rng, d):
    h = random_hermitian(rng, d)
    h -= np.trace(h) / d * np.eye(d)
    return TangentGenerator(1j * h)


# -- StateVector ---------------------------------------------------------------


def test_basis_state_uses_msb_first():
    s = StateVector.basis("10")
    assert s.amplitudes[2] == 1
    assert s.num_qubits == 2


def test_plus_state_amplitudes():
    np.testing.assert_allclose(StateVector.plus(1).amplitudes, [2**-0.5, 2**-0.5], atol=1e-15)


@pytest.mark.parametrize(
    "amps",
    [[1.0, 0.0, 0.0], [0.6, 0.6], [np.nan, 1.0], [[1.0, 0.0]], [1.0]],
)
def test_invalid_states_rejected(amps):
    with pytest.raises(ContractViolation):
        StateVector(np.asarray(amps, dtype=complex))


def test_from_amplitudes_rejects_zero_vector():
    with pytest.raises(ContractViolation):
        StateVector.from_amplitudes([0, 0])


def test_state_is_read_only():
    s = StateVector.plus(1)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


# -- operators -----------------------------------------------------------------


def test_non_hermitian_rejected():
    with pytest.raises(ContractViolation):
        HermitianOperator(np.array([[0, 1], [0, 0]], dtype=complex))


def test_generator_checks():
    with pytest.raises(ContractViolation):
        TangentGenerator(1j * np.eye(2))  # not traceless
    with pytest.raises(ContractViolation):
        TangentGenerator(np.array([[0, 1], [1, 0]], dtype=complex))  # Hermitian


def test_eigendecompose_closed_form():
    # (X + Z)/sqrt2 has characteristic polynomial lambda^2 - 1
    w, v = eigendecompose((X + Z) / np.sqrt(2))
    np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-14)
    # eigenvector of +1: (cos(pi/8), sin(pi/8)) up to phase
    top = v[:, 1] * np.exp(-1j * np.angle(v[0, 1]))
    np.testing.assert_allclose(top, [np.cos(np.pi / 8), np.sin(np.pi / 8)], atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_eigendecompose_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 2**n)
    w, v = eigendecompose(h)
    assert np.all(np.diff(w) >= 0)
    np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=ROUNDTRIP_TOL)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(2**n), atol=ROUNDTRIP_TOL)


def test_spectral_norm_is_largest_absolute_eigenvalue():
    assert spectral_norm(np.diag([-3.0, 1.0]).astype(complex)) == pytest.approx(3.0)
    assert spectral_norm(HermitianOperator(X + Z)) == pytest.approx(np.sqrt(2))


def test_hilbert_schmidt_inner_conjugates_first_argument():
    a = np.array([[1j, 0], [0, 0]])
    b = np.array([[1, 0], [0, 0]], dtype=complex)
    # Tr(a^dagger b) = conj(i) * 1
    assert hilbert_schmidt_inner(a, b) == pytest.approx(-1j)
    assert hilbert_schmidt_inner(X, X) == pytest.approx(2)
    with pytest.raises(DimensionMismatch):
        hilbert_schmidt_inner(X, np.eye(4))


# -- evolve_by_generator -------------------------------------------------------


def test_single_qubit_rotation_closed_form():
    # exp(s * i theta Y)|0> = cos(s theta)|0> - sin(s theta)|1>  (iY is real: [[0,1],[-1,0]])
    theta, s = 0.3, -0.7
    out = evolve_by_generator(StateVector.basis("0"), TangentGenerator(1j * theta * Y), s)
    np.testing.assert_allclose(out.amplitudes, [np.cos(s * theta), -np.sin(s * theta)], atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1), st.floats(-2.0, 2.0))
def test_evolution_matches_power_series(n, seed, s):
    rng = np.random.default_rng(seed)
    gen = random_generator(rng, 2**n)
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    state = StateVector.from_amplitudes(amps)
    expected = taylor_expm(s * gen.matrix) @ state.amplitudes
    out = evolve_by_generator(state, gen, s)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-10)
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-12


def test_evolution_group_law(rng):
    gen = random_generator(rng, 4)
    state = StateVector.from_amplitudes(rng.normal(size=4))
    twice = evolve_by_generator(evolve_by_generator(state, gen, 0.2), gen, 0.3)
    once = evolve_by_generator(state, gen, 0.5)
    np.testing.assert_allclose(twice.amplitudes, once.amplitudes, atol=1e-12)


def test_zero_step_and_zero_generator_are_identity():
    s = StateVector.plus(2)
    assert evolve_by_generator(s, TangentGenerator(1j * np.diag([1.0, -1, 0, 0])), 0.0) is s
    assert evolve_by_generator(s, TangentGenerator.zeros(4), 1.0) is s


def test_evolution_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        evolve_by_generator(StateVector.plus(1), TangentGenerator.zeros(4), 0.1)
