import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xxladder.spectra import (
    CapacityError,
    eig_general,
    eig_hermitian,
    eigvals_general,
)


def random_matrix(seed: int, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=seed))
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def match_error(ours: np.ndarray, lapack: np.ndarray) -> float:
    rest = list(lapack)
    worst = 0.0
    for lam in ours:
        arr = np.asarray(rest)
        k = int(np.argmin(np.abs(arr - lam)))
        worst = max(worst, abs(arr[k] - lam))
        rest.pop(k)
    return worst


@pytest.mark.parametrize("seed", range(6))
def test_eigenvalues_match_lapack(seed):
    a = random_matrix(seed, 20)
    ours = eigvals_general(a)
    ref = np.linalg.eigvals(a)
    assert match_error(ours, ref) < 1e-10 * np.linalg.norm(a)


def test_eig_general_residuals_and_biorthogonality():
    a = random_matrix(7, 12)
    dec = eig_general(a)
    norm = np.linalg.norm(a)
    for k in range(dec.dim):
        v = dec.right_vectors[:, k]
        r = np.linalg.norm(a @ v - dec.eigenvalues[k] * v)
        assert r < 1e-9 * norm
    assert np.allclose(dec.left_vectors @ dec.right_vectors, np.eye(dec.dim),
                       atol=1e-8)
    assert dec.residual_bound < 1e-9


def test_eigvals_agree_with_full_decomposition():
    a = random_matrix(8, 10)
    assert np.allclose(eigvals_general(a), eig_general(a).eigenvalues,
                       atol=1e-10 * np.linalg.norm(a))


def test_sort_order():
    lams = eigvals_general(np.diag([1.0, 3.0, 2.0 + 1j, 2.0 - 1j]))
    order = np.lexsort((lams.imag, -lams.real))
    assert np.array_equal(order, np.arange(4))


def test_deterministic_output():
    a = random_matrix(9, 16)
    assert np.array_equal(eigvals_general(a), eigvals_general(a.copy()))


def test_jordan_block():
    a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    lams = eigvals_general(a)
    assert np.max(np.abs(lams)) < 1e-7


def test_repeated_eigenvalues_cluster():
    a = np.diag([2.0, 2.0, 5.0]).astype(complex)
    dec = eig_general(a)
    assert sorted(np.round(dec.eigenvalues.real).astype(int)) == [2, 2, 5]
    assert any(len(c) == 2 for c in dec.clusters)


def test_eig_hermitian_matches_and_validates():
    rng = np.random.Generator(np.random.Philox(key=10))
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    a = a + a.conj().T
    dec = eig_hermitian(a)
    assert np.allclose(dec.eigenvalues.imag, 0.0)
    assert np.allclose(np.sort(dec.eigenvalues.real),
                       np.sort(np.linalg.eigvalsh(a)))
    with pytest.raises(ValueError):
        eig_hermitian(random_matrix(11, 4))


def test_capacity_guard():
    with pytest.raises(CapacityError):
        eigvals_general(np.zeros((1025, 1025)))


def test_one_by_one():
    assert eigvals_general(np.array([[3.0 + 1j]])) == pytest.approx([3.0 + 1j])


def test_defective_liouvillian_style_matrix():
    # degenerate pairs stress the deflation and fallback paths
    blocks = []
    for lam in (-1.0, -1.0, -2.0 + 0.5j, -2.0 + 0.5j):
        blocks.append(np.array([[lam, 1.0], [0.0, lam]]))
    a = np.zeros((8, 8), dtype=complex)
    for i, b in enumerate(blocks):
        a[2 * i: 2 * i + 2, 2 * i: 2 * i + 2] = b
    rng = np.random.Generator(np.random.Philox(key=13))
    q, _ = np.linalg.qr(rng.normal(size=(8, 8))
                        + 1j * rng.normal(size=(8, 8)))
    lams = eigvals_general(q @ a @ q.conj().T)
    ref = np.array([-1.0, -1.0, -1.0, -1.0,
                    -2.0 + 0.5j, -2.0 + 0.5j, -2.0 + 0.5j, -2.0 + 0.5j])
    assert match_error(lams, ref) < 1e-5


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000),
       st.integers(min_value=2, max_value=8))
def test_property_matches_lapack(seed, n):
    a = random_matrix(seed, n)
    assert match_error(eigvals_general(a), np.linalg.eigvals(a)) \
        < 1e-8 * max(np.linalg.norm(a), 1.0)
