import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wegnerflow.operators import (
    NotHermitianError,
    WegnerFlowError,
    validate_hermitian,
    commutator,
    band_split,
    band_assemble,
    band_part,
    off_diag_norm_sq,
    band_norm_sq,
    expm_antihermitian,
    matrix_to_json,
    matrix_from_json,
)


def random_hermitian(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return m + m.conj().T


hermitians = st.integers(0, 2**31 - 1).map(
    lambda seed: random_hermitian(np.random.default_rng(seed), 6)
)


def test_validate_hermitian_accepts_and_rejects():
    rng = np.random.default_rng(0)
    h = random_hermitian(rng, 4)
    validate_hermitian(h)
    with pytest.raises(NotHermitianError):
        validate_hermitian(h + np.diag([1e-6j, 0, 0, 0]))
    with pytest.raises(WegnerFlowError):
        validate_hermitian(np.zeros((2, 3)))


@given(hermitians, hermitians)
@settings(max_examples=25, deadline=None)
def test_commutator_of_hermitians_is_antihermitian(a, b):
    c = commutator(a, b)
    assert np.allclose(c, -c.conj().T, atol=1e-10)


@given(hermitians)
@settings(max_examples=25, deadline=None)
def test_band_split_roundtrip(h):
    bd = band_split(h)
    assert np.allclose(band_assemble(bd), h, atol=1e-12)


def test_band_split_structure():
    h = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
    h[0, 2] = h[2, 0] = 0.5
    bd = band_split(h)
    assert bd.band_indices() == [2]
    assert bd.coeff(2, 2) == pytest.approx(0.5)
    # boundary convention: coefficients off the matrix are zero
    assert bd.coeff(2, 1) == 0.0
    assert bd.coeff(2, 5) == 0.0
    assert bd.coeff(3, 3) == 0.0


def test_band_part_selects_single_band():
    rng = np.random.default_rng(1)
    h = random_hermitian(rng, 5)
    p = band_part(h, 2)
    for i in range(5):
        for j in range(5):
            expect = h[i, j] if abs(i - j) == 2 else 0.0
            assert p[i, j] == expect


@given(hermitians)
@settings(max_examples=25, deadline=None)
def test_norms_decompose(h):
    bd = band_split(h)
    total = sum(band_norm_sq(h, a) for a in bd.band_indices())
    assert off_diag_norm_sq(h) == pytest.approx(total, rel=1e-12)


def test_expm_antihermitian_is_unitary():
    rng = np.random.default_rng(2)
    h = random_hermitian(rng, 6)
    u = expm_antihermitian(1j * h)
    assert np.allclose(u.conj().T @ u, np.eye(6), atol=1e-12)


def test_matrix_json_roundtrip():
    rng = np.random.default_rng(3)
    h = random_hermitian(rng, 4)
    obj = matrix_to_json(h)
    assert obj["dim"] == 4
    back = matrix_from_json(obj)
    assert np.array_equal(back, h)
