import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ite_rgd import (
    ContractViolation,
    ConventionError,
    DimensionMismatch,
    HamiltonianSpec,
    PauliBasis,
    PauliString,
    SizeLimitExceeded,
    StateVector,
    expectation,
    full_basis,
    materialize,
    parse_hamiltonian,
    variance,
)

from conftest import pauli_oracle, random_hamiltonian, random_state

letters = st.text(alphabet="IXYZ", min_size=1, max_size=3)


@settings(max_examples=80, deadline=None)
@given(letters)
def test_pauli_matrix_matches_basis_action_oracle(s):
    np.testing.assert_array_equal(PauliString(s).matrix(), pauli_oracle(s))


@settings(max_examples=80, deadline=None)
@given(letters)
def test_pauli_strings_are_hermitian_unitary(s):
    m = PauliString(s).matrix()
    np.testing.assert_array_equal(m, m.conj().T)
    np.testing.assert_allclose(m @ m, np.eye(m.shape[0]), atol=1e-15)


def test_normalized_string_has_unit_hs_norm():
    m = PauliString("XZ", normalized=True).matrix()
    assert np.vdot(m, m).real == pytest.approx(1.0)


def test_materialize_against_oracle():
    spec = HamiltonianSpec([(0.5, "ZI"), (-1.25, "XY"), (2.0, "IZ")])
    expected = 0.5 * pauli_oracle("ZI") - 1.25 * pauli_oracle("XY") + 2.0 * pauli_oracle("IZ")
    np.testing.assert_allclose(materialize(spec).matrix, expected, atol=1e-15)


def test_transverse_ising_spectrum():
    # ZZ + g(XI + IX): eigenvalues are -sqrt(1 + 4g^2), -1, 1, sqrt(1 + 4g^2)
    g = 0.5
    spec = parse_hamiltonian("1.0 ZZ\n0.5 XI\n0.5 IX")
    r = np.sqrt(1 + 4 * g * g)
    np.testing.assert_allclose(spec.operator.eigenvalues, [-r, -1, 1, r], atol=1e-12)
    assert spec.spectral_norm == pytest.approx(r)


def test_parse_accepts_semicolons_and_comments():
    a = parse_hamiltonian("1.0 ZZ; 0.5 XI  # field\n\n0.5 IX")
    b = HamiltonianSpec([(1.0, "ZZ"), (0.5, "XI"), (0.5, "IX")])
    np.testing.assert_array_equal(a.matrix, b.matrix)
    assert parse_hamiltonian(a.to_text()).terms == a.terms


@pytest.mark.parametrize("text", ["", "# only a comment", "1.0", "abc ZZ", "1.0 ZQ", "1.0 Z 2"])
def test_parse_rejects_malformed(text):
    with pytest.raises(ContractViolation):
        parse_hamiltonian(text)


def test_mixed_lengths_rejected():
    with pytest.raises(ContractViolation):
        HamiltonianSpec([(1.0, "Z"), (1.0, "ZZ")])
    with pytest.raises(DimensionMismatch):
        HamiltonianSpec([(1.0, "Z")], num_qubits=2)


def test_normalized_terms_are_a_convention_error():
    with pytest.raises(ConventionError):
        HamiltonianSpec([(1.0, PauliString("Z", normalized=True))])


def test_size_cap():
    with pytest.raises(SizeLimitExceeded):
        HamiltonianSpec([(1.0, "Z" * 7)])
    assert HamiltonianSpec([(1.0, "Z" * 3)], max_qubits=3).dim == 8


def test_expectation_and_variance_closed_forms():
    H = parse_hamiltonian("1.0 Z")
    plus = StateVector.plus(1)
    assert expectation(H, plus) == pytest.approx(0.0, abs=1e-15)
    assert variance(H, plus) == pytest.approx(1.0)
    assert expectation(H, StateVector.basis("1")) == pytest.approx(-1.0)
    assert variance(H, StateVector.basis("1")) == 0.0
    with pytest.raises(DimensionMismatch):
        expectation(H, StateVector.plus(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_variance_nonnegative_and_matches_definition(n, seed):
    rng = np.random.default_rng(seed)
    H, phi = random_hamiltonian(rng, n), random_state(rng, n)
    m, psi = H.matrix, phi.amplitudes
    direct = np.vdot(psi, m @ m @ psi).real - np.vdot(psi, m @ psi).real ** 2
    assert variance(H, phi) >= 0
    assert variance(H, phi) == pytest.approx(max(direct, 0), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_full_basis_is_orthonormal_and_traceless(n):
    basis = full_basis(n)
    assert basis.size == 4**n - 1 == basis.effective_size
    mats = np.array([basis.matrix(i) for i in range(basis.size)])
    gram = np.einsum("aij,bij->ab", mats.conj(), mats)
    np.testing.assert_allclose(gram, np.eye(basis.size), atol=1e-14)
    np.testing.assert_allclose(np.einsum("aii->a", mats), 0, atol=1e-15)


def test_full_basis_order_is_lexicographic():
    names = [p.letters for p in full_basis(2).elements]
    expected = ["".join(p) for p in itertools.product("IXYZ", repeat=2)][1:]
    assert names == expected
    assert full_basis(2).index_of("yz") == 10


def test_restriction():
    basis = full_basis(1).restrict([1])
    assert basis.active_indices == (1,)
    assert basis.effective_size == 1
    assert basis.size == 3
    for bad in ([], [0, 0], [3]):
        with pytest.raises(ContractViolation):
            full_basis(1).restrict(bad)


def test_basis_rejects_bare_strings():
    with pytest.raises(ConventionError):
        PauliBasis(1, (PauliString("X"),))
