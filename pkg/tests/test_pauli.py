import numpy as np
import pytest

from xxladder.pauli import (
    CapacityError,
    PauliString,
    SIGMA,
    all_strings,
    decompose,
    operator_norm,
    reconstruct,
    string_matrix,
)


def kron_all(mats):
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def test_string_matrix_matches_explicit_kron():
    s = PauliString(3, ((0, "X"), (2, "Z")))
    expected = kron_all([SIGMA["X"], np.eye(2), SIGMA["Z"]])
    assert np.allclose(string_matrix(s), expected)


def test_identity_string():
    s = PauliString(2, ())
    assert np.allclose(string_matrix(s), np.eye(4))


def test_all_strings_are_trace_orthogonal():
    strings = list(all_strings(2))
    assert len(strings) == 16
    mats = [string_matrix(s) for s in strings]
    gram = np.array([[np.trace(a.conj().T @ b) for b in mats] for a in mats])
    assert np.allclose(gram, 4.0 * np.eye(16))


def test_decompose_reconstruct_round_trip():
    rng = np.random.Generator(np.random.Philox(key=11))
    op = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    coeffs = decompose(op)
    back = reconstruct(coeffs, 3)
    assert np.allclose(back, op, atol=1e-12)


def test_decompose_picks_out_single_string():
    s = PauliString(2, ((0, "Y"), (1, "Y")))
    coeffs = decompose(2.5 * string_matrix(s))
    assert coeffs == pytest.approx({s: 2.5})


def test_decompose_cutoff_drops_noise():
    s = PauliString(2, ((0, "X"),))
    op = string_matrix(s) + 1e-14 * np.eye(4)
    coeffs = decompose(op)
    assert set(coeffs) == {s}


def test_operator_norm_is_frobenius():
    rng = np.random.Generator(np.random.Philox(key=12))
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert operator_norm(op) == pytest.approx(np.linalg.norm(op))


def test_capacity_guard():
    with pytest.raises(CapacityError):
        string_matrix(PauliString(20, ()))
