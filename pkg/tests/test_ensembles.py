"""Packing isomorphisms, ensemble assembly, self-similar rescaling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigencollide.ensembles import (
    build_ensemble_path,
    coefficient_scale,
    diagonal_positions,
    matrix_to_vec,
    n_beta,
    rescale_self_similar,
    validate_shift,
    vec_to_matrix,
)
from eigencollide.fields import fbm_model, interval, sample_field_exact

dims = st.integers(2, 6)
betas = st.sampled_from([1, 2])


def random_vec(beta, d, seed):
    return np.random.default_rng(seed).standard_normal(n_beta(beta, d))


# -- dimension counts and index bookkeeping ----------------------------------


def test_n_beta_values():
    assert n_beta(1, 2) == 3
    assert n_beta(2, 2) == 4
    assert n_beta(1, 3) == 6
    assert n_beta(2, 3) == 9
    assert n_beta(1, 4) == 10
    assert n_beta(2, 4) == 16


def test_n_beta_rejects():
    with pytest.raises(ValueError):
        n_beta(3, 2)
    with pytest.raises(ValueError):
        n_beta(1, 1)


@given(dims)
@settings(max_examples=20)
def test_packing_matches_closed_form_index(d):
    # Row-major upper-triangle packing has the closed-form position
    # (1-based entry (i,j), i <= j):   k = i(1+2d-i)/2 - d + j
    # and the strict-upper imaginary block sits at
    #                                  k = n1 + i(2d-i-1)/2 - d + j
    # with n1 = d(d+1)/2. Check both against where a unit coefficient lands.
    n1 = d * (d + 1) // 2
    for i in range(1, d + 1):
        for j in range(i, d + 1):
            k = i * (1 + 2 * d - i) // 2 - d + j  # 1-based
            x = np.zeros(n1)
            x[k - 1] = 1.0
            M = vec_to_matrix(x, 1, d)
            assert M[i - 1, j - 1] == 1.0
            expected_nonzeros = 1 if i == j else 2
            assert np.count_nonzero(M) == expected_nonzeros
    for i in range(1, d + 1):
        for j in range(i + 1, d + 1):
            k = n1 + i * (2 * d - i - 1) // 2 - d + j  # 1-based
            x = np.zeros(d * d)
            x[k - 1] = 1.0
            M = vec_to_matrix(x, 2, d)
            assert M[i - 1, j - 1] == 1j
            assert M[j - 1, i - 1] == -1j


def test_vec_to_matrix_d2_layouts():
    M = vec_to_matrix(np.array([1.0, 2.0, 3.0]), 1, 2)
    np.testing.assert_array_equal(M, [[1.0, 2.0], [2.0, 3.0]])
    M = vec_to_matrix(np.array([1.0, 2.0, 3.0, 4.0]), 2, 2)
    np.testing.assert_array_equal(M, [[1.0, 2.0 + 4.0j], [2.0 - 4.0j, 3.0]])


@given(betas, dims, st.integers(0, 2**31))
@settings(max_examples=60)
def test_pack_unpack_round_trip(beta, d, seed):
    x = random_vec(beta, d, seed)
    M = vec_to_matrix(x, beta, d)
    herm_defect = np.max(np.abs(M - M.conj().T))
    assert herm_defect == 0.0  # Hermitian by construction, not approximately
    np.testing.assert_array_equal(matrix_to_vec(M, beta), x)


def test_vec_to_matrix_batched():
    x = np.random.default_rng(3).standard_normal((5, 7, n_beta(2, 3)))
    M = vec_to_matrix(x, 2, 3)
    assert M.shape == (5, 7, 3, 3)
    np.testing.assert_array_equal(M[2, 4], vec_to_matrix(x[2, 4], 2, 3))


def test_matrix_to_vec_rejects_non_hermitian():
    M = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        matrix_to_vec(M, 1)


def test_matrix_to_vec_rejects_complex_for_beta1():
    M = np.array([[1.0, 2.0 + 1.0j], [2.0 - 1.0j, 3.0]])
    with pytest.raises(ValueError):
        matrix_to_vec(M, 1)


def test_wrong_length_rejected():
    with pytest.raises(ValueError):
        vec_to_matrix(np.zeros(5), 1, 3)


def test_coefficient_scale():
    s = coefficient_scale(1, 3)
    assert s.shape == (6,)
    np.testing.assert_allclose(s[diagonal_positions(3)], np.sqrt(2.0))
    off = np.setdiff1d(np.arange(6), diagonal_positions(3))
    np.testing.assert_allclose(s[off], 1.0)
    np.testing.assert_allclose(coefficient_scale(2, 3), np.ones(9))


# -- shift validation ---------------------------------------------------------


def test_validate_shift_none_is_zero():
    A = validate_shift(None, 1, 3)
    np.testing.assert_array_equal(A, np.zeros((3, 3)))


def test_validate_shift_rejects():
    with pytest.raises(ValueError):
        validate_shift(np.zeros((2, 3)), 1, 2)
    with pytest.raises(ValueError):
        validate_shift(np.array([[0.0, 1.0], [0.0, 0.0]]), 1, 2)  # not symmetric
    with pytest.raises(ValueError):
        validate_shift(np.array([[0.0, 1j], [-1j, 0.0]]), 1, 2)  # complex for beta=1


def test_validate_shift_hermitian_complex():
    A = np.array([[1.0, 2.0 + 1j], [2.0 - 1j, 0.0]])
    out = validate_shift(A, 2, 2)
    assert out.dtype == complex
    np.testing.assert_array_equal(out, A)


# -- path assembly ------------------------------------------------------------


def test_build_ensemble_path_layout():
    # replica r, field copy f, time k must land at coeffs[r, k, f] * scale[f]
    g = interval(1.0, 2.0, 4)
    nf = n_beta(1, 2)
    fields = sample_field_exact(g, fbm_model(0.3), 21, 2 * nf)
    path = build_ensemble_path(fields, 1, 2, None)
    assert path.coeffs.shape == (2, 4, nf)
    scale = coefficient_scale(1, 2)
    for r in range(2):
        for f in range(nf):
            np.testing.assert_allclose(
                path.coeffs[r, :, f], fields.values[r * nf + f] * scale[f], rtol=1e-15
            )


def test_build_ensemble_path_matrices_hermitian():
    g = interval(1.0, 2.0, 3)
    for beta in (1, 2):
        nf = n_beta(beta, 3)
        fields = sample_field_exact(g, fbm_model(0.4), 5, 2 * nf)
        A = np.diag([1.0, 0.0, -1.0])
        path = build_ensemble_path(fields, beta, 3, A)
        mats = path.matrices()
        assert mats.shape == (2, 3, 3, 3)
        np.testing.assert_array_equal(mats, np.swapaxes(mats, -1, -2).conj())
        # shift enters additively
        np.testing.assert_allclose(
            path.matrix(0, 0), vec_to_matrix(path.coeffs[0, 0], beta, 3) + A
        )


def test_build_ensemble_path_rejects_partial_blocks():
    g = interval(1.0, 2.0, 3)
    fields = sample_field_exact(g, fbm_model(0.4), 5, 4)  # not a multiple of 3
    with pytest.raises(ValueError):
        build_ensemble_path(fields, 1, 2, None)


def test_build_ensemble_path_diagonal_variance():
    # diagonal entries carry variance 2 t^(2H) for beta = 1, off-diagonal t^(2H)
    g = interval(1.0, 1.0, 1)
    nf = n_beta(1, 2)
    fields = sample_field_exact(g, fbm_model(0.5), 99, 3000 * nf)
    path = build_ensemble_path(fields, 1, 2, None)
    mats = path.matrices()[:, 0]
    assert mats[:, 0, 0].var(ddof=1) == pytest.approx(2.0, rel=0.15)
    assert mats[:, 0, 1].var(ddof=1) == pytest.approx(1.0, rel=0.15)


def test_rescale_self_similar():
    g = interval(1.0, 2.0, 4)
    nf = n_beta(1, 2)
    fields = sample_field_exact(g, fbm_model(0.3), 11, nf)
    path = build_ensemble_path(fields, 1, 2, None)
    scaled = rescale_self_similar(path, 2.0, 0.3)
    np.testing.assert_allclose(scaled.times, path.times / 2.0)
    np.testing.assert_allclose(scaled.coeffs, path.coeffs * 2.0 ** (-0.3))
    with pytest.raises(ValueError):
        rescale_self_similar(path, -1.0, 0.3)
    shifted = build_ensemble_path(fields, 1, 2, np.eye(2))
    with pytest.raises(ValueError):
        rescale_self_similar(shifted, 2.0, 0.3)
