import math

import numpy as np
import pytest
import scipy.linalg
from scipy.special import factorial

from cvbell.core import SqueezedParams
from cvbell.fock import (
    CutoffError,
    TruncationError,
    bogoliubov_residual,
    build_generators,
    build_workspace,
    commutator_residuals,
    displaced_parity_expectation,
    displaced_parity_matrix,
    displacement_matrix,
    displacement_matrix_expm,
    generator_coefficients,
    squeezed_state_vector,
    squeezing_unitary,
)
from cvbell.kernel import squeezed_correlation


def test_single_mode_ladder():
    ws = build_workspace(SqueezedParams(1, 0.0), 3)
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 2] = 1.0, math.sqrt(2)
    np.testing.assert_array_equal(ws.annihilation, expected)
    np.testing.assert_array_equal(ws.creation, ws.annihilation.conj().T)


def test_two_mode_parity_order():
    ws = build_workspace(SqueezedParams(2, 0.0), 2)
    np.testing.assert_array_equal(ws.full_parity(), [1, -1, -1, 1])
    assert set(np.diag(ws.parity)) == {1.0, -1.0}


def test_dimension_cap():
    build_workspace(SqueezedParams(3, 0.0), 40)
    with pytest.raises(CutoffError, match="exceeds cap"):
        build_workspace(SqueezedParams(3, 0.0), 40, max_dim=10_000)
    with pytest.raises(CutoffError):
        build_workspace(SqueezedParams(1, 0.0), 1)


def test_generator_coefficients():
    assert generator_coefficients(2) == (0.0, 1.0)
    assert generator_coefficients(3) == pytest.approx((-1 / 6, 2 / 3))
    assert generator_coefficients(1) == (0.5, 2.0)


def test_two_mode_generator_is_nopa():
    ws = build_workspace(SqueezedParams(2, 0.0), 5)
    gen = build_generators(ws)
    expected = ws.mode_operator(ws.creation, 0) @ ws.mode_operator(ws.creation, 1)
    assert abs(gen.w_plus - expected).max() == 0.0


def test_single_mode_generator():
    ws = build_workspace(SqueezedParams(1, 0.0), 6)
    gen = build_generators(ws)
    np.testing.assert_allclose(gen.w_plus.toarray(), 0.5 * ws.creation @ ws.creation)


def test_generator_structure():
    ws = build_workspace(SqueezedParams(3, 0.0), 5)
    gen = build_generators(ws)
    assert abs(gen.w_minus - gen.w_plus.T.conj()).max() == 0.0
    b = gen.b.toarray()
    np.testing.assert_array_equal(b, np.diag(np.diag(b)))
    np.testing.assert_allclose(np.diag(b), ws.total_photons() / 2 + 3 / 4)


@pytest.mark.parametrize("n,d", [(2, 12), (3, 8)])
def test_commutator_residuals(n, d):
    ws = build_workspace(SqueezedParams(n, 0.0), d)
    assert max(commutator_residuals(build_generators(ws), ws)) <= 1e-12


def test_commutator_cutoff_too_small():
    ws = build_workspace(SqueezedParams(2, 0.0), 3)
    with pytest.raises(CutoffError):
        commutator_residuals(build_generators(ws), ws)


def test_vacuum_state_at_zero_squeezing():
    p = SqueezedParams(3, 0.0)
    state = squeezed_state_vector(p, build_workspace(p, 5))
    expected = np.zeros(125)
    expected[0] = 1.0
    np.testing.assert_array_equal(state.vector, expected)
    assert state.leakage == 0.0


def test_two_mode_squeezed_amplitudes():
    r, d = 0.3, 20
    p = SqueezedParams(2, r)
    psi = squeezed_state_vector(p, build_workspace(p, d)).vector.reshape(d, d)
    expected = np.diag(np.tanh(r) ** np.arange(d) / np.cosh(r))
    np.testing.assert_allclose(psi, expected, atol=1e-12)


def test_three_mode_leakage_and_cutoff_doubling():
    p = SqueezedParams(3, 0.2)
    s12 = squeezed_state_vector(p, build_workspace(p, 12))
    assert s12.leakage <= 1e-10
    s24 = squeezed_state_vector(p, build_workspace(p, 24)).vector.reshape((24,) * 3)
    np.testing.assert_allclose(s24[:12, :12, :12].ravel(), s12.vector, atol=1e-7)


def test_state_matches_dense_exponential():
    p = SqueezedParams(2, 0.4)
    ws = build_workspace(p, 10)
    dense = squeezing_unitary(p, ws)[:, 0]
    state = squeezed_state_vector(p, ws, pad=0, leakage_tol=1.0)
    np.testing.assert_allclose(state.vector, dense / np.linalg.norm(dense), atol=1e-12)


def test_high_squeezing_leaks():
    p = SqueezedParams(2, 2.5)
    with pytest.raises(TruncationError):
        squeezed_state_vector(p, build_workspace(p, 8))


def test_dense_exponential_contract():
    p = SqueezedParams(2, 0.8)
    ws = build_workspace(p, 10)
    gen = build_generators(ws)
    a = (p.r * (gen.w_plus - gen.w_minus)).toarray()
    prod = scipy.linalg.expm(a) @ scipy.linalg.expm(-a)
    assert np.abs(prod - np.eye(ws.dim)).max() <= 1e-10


def test_unitary_on_low_block():
    p = SqueezedParams(2, 0.3)
    ws = build_workspace(p, 16)
    v = squeezing_unitary(p, ws)
    low = np.flatnonzero(ws.total_photons() <= 4)
    gram = (v.conj().T @ v)[np.ix_(low, low)]
    assert np.abs(gram - np.eye(low.size)).max() <= 1e-12


def test_displacement_identity_and_vacuum_overlap():
    np.testing.assert_array_equal(displacement_matrix(0, 5), np.eye(5))
    alpha = 0.7 - 0.2j
    assert displacement_matrix(alpha, 6)[0, 0] == pytest.approx(math.exp(-abs(alpha) ** 2 / 2), rel=1e-14)


def test_displacement_column_is_coherent_state():
    alpha, d = 0.5, 16
    n = np.arange(d)
    coherent = math.exp(-alpha**2 / 2) * alpha**n / np.sqrt(factorial(n))
    np.testing.assert_allclose(displacement_matrix(alpha, d)[:, 0], coherent, atol=1e-15)
    np.testing.assert_allclose(displacement_matrix_expm(alpha, d)[:, 0], coherent, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 0.3 - 0.8j, -1.2 + 0.1j])
def test_displacement_closed_form_vs_exponential(alpha):
    np.testing.assert_allclose(displacement_matrix(alpha, 16), displacement_matrix_expm(alpha, 16), atol=1e-12)


def test_displaced_parity_equals_conjugated_parity():
    alpha, d, pad = 0.4 + 0.3j, 12, 40
    big = displacement_matrix(alpha, d + pad)
    parity = np.diag((-1.0) ** np.arange(d + pad))
    direct = (big @ parity @ big.conj().T)[:d, :d]
    np.testing.assert_allclose(displaced_parity_matrix(alpha, d), direct, atol=1e-12)


def test_vacuum_expectations():
    p = SqueezedParams(2, 0.0)
    ws = build_workspace(p, 12)
    vac = squeezed_state_vector(p, ws)
    assert displaced_parity_expectation(vac, [0, 0], ws) == pytest.approx(1.0, abs=1e-15)
    alphas = [0.3 - 0.2j, 0.5j]
    expected = math.exp(-2 * sum(abs(a) ** 2 for a in alphas))
    assert displaced_parity_expectation(vac, alphas, ws) == pytest.approx(expected, abs=1e-14)


def test_two_mode_against_kernel():
    p = SqueezedParams(2, 0.3)
    ws = build_workspace(p, 24)
    state = squeezed_state_vector(p, ws)
    alphas = [0.2, -0.1 + 0.1j]
    assert displaced_parity_expectation(state, alphas, ws) == pytest.approx(squeezed_correlation(p, alphas), abs=1e-6)


def test_conjugated_vacuum_route():
    """<r|Pi|r> equals the vacuum expectation of V^dag Pi V."""
    p = SqueezedParams(2, 0.25)
    ws = build_workspace(p, 14)
    v = squeezing_unitary(p, ws)
    alphas = [0.3, -0.2 + 0.1j]
    op = np.kron(displaced_parity_matrix(alphas[0], 14), displaced_parity_matrix(alphas[1], 14))
    via_vacuum = (v.conj().T @ op @ v)[0, 0].real
    state = squeezed_state_vector(p, ws)
    assert displaced_parity_expectation(state, alphas, ws) == pytest.approx(via_vacuum, abs=1e-9)


def test_bogoliubov_zero_squeezing():
    p = SqueezedParams(2, 0.0)
    assert bogoliubov_residual(p, build_workspace(p, 8)) == 0.0


@pytest.mark.parametrize("n,r,d,tol", [(2, 0.3, 24, 1e-6), (3, 0.2, 12, 1e-5)])
def test_bogoliubov_residual(n, r, d, tol):
    p = SqueezedParams(n, r)
    assert bogoliubov_residual(p, build_workspace(p, d)) <= tol


def test_bogoliubov_cutoff_too_small():
    p = SqueezedParams(2, 0.1)
    with pytest.raises(CutoffError):
        bogoliubov_residual(p, build_workspace(p, 3))

