import numpy as np
import pytest

from xxladder.liouville import (
    LadderSpec,
    build_hamiltonian,
    build_ladder_liouvillian,
    build_lindbladian,
    known_modes,
)


def random_spec(seed: int, n: int = 2, decades: float = 2.0) -> LadderSpec:
    rng = np.random.Generator(np.random.Philox(key=seed))
    J = tuple(10.0 ** (-rng.uniform(0.0, decades, n)))
    p = tuple(10.0 ** (-rng.uniform(0.0, decades, n)))
    return LadderSpec(n_rungs=n, J=J, p=p)


def test_spec_validation():
    with pytest.raises(ValueError):
        LadderSpec(n_rungs=3, J=(1.0,) * 3, p=(0.0,) * 3)
    with pytest.raises(ValueError):
        LadderSpec(n_rungs=2, J=(1.0,), p=(0.0, 0.0))


def test_rates_scale_with_beta():
    spec = LadderSpec(n_rungs=2, J=(1.0, 1.0), p=(0.3, 0.7), beta=2.0)
    assert np.allclose(spec.rates, (0.6, 1.4))


def test_hamiltonian_is_hermitian_and_conserves_magnetization():
    spec = random_spec(0)
    h = build_hamiltonian(spec)
    assert np.allclose(h, h.conj().T)
    n = spec.n_rungs
    ztot = np.zeros_like(h)
    for i in range(n):
        z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
        op = np.eye(1, dtype=complex)
        for k in range(n):
            op = np.kron(op, z if k == i else np.eye(2))
        ztot += op
    assert np.allclose(h @ ztot, ztot @ h)


def test_lindbladian_preserves_trace():
    spec = random_spec(1)
    lind = build_lindbladian(spec)
    dim = int(round(np.sqrt(lind.shape[0])))
    vec_id = np.eye(dim, dtype=complex).reshape(-1)
    assert np.max(np.abs(vec_id @ lind)) < 1e-12 * np.linalg.norm(lind)


@pytest.mark.parametrize("seed", range(4))
def test_known_modes_verify(seed):
    known_modes(random_spec(seed))


def test_builders_have_identical_spectra():
    spec = random_spec(5)
    a = np.sort_complex(np.linalg.eigvals(build_lindbladian(spec)))
    b = np.sort_complex(np.linalg.eigvals(build_ladder_liouvillian(spec)))
    scale = max(np.max(np.abs(a)), 1.0)
    bb = list(b)
    for lam in a:
        arr = np.asarray(bb)
        k = int(np.argmin(np.abs(arr - lam)))
        assert abs(arr[k] - lam) < 1e-10 * scale
        bb.pop(k)


def test_spectrum_symmetric_about_total_rate():
    spec = random_spec(6)
    lams = np.linalg.eigvals(build_lindbladian(spec))
    total = float(np.sum(spec.rates))
    scale = max(float(np.max(np.abs(lams))), 1.0)
    mirrored = -2.0 * total - lams.real + 1j * lams.imag
    for lam in mirrored:
        assert np.min(np.abs(lams - lam)) < 1e-9 * scale


def test_no_positive_real_parts():
    for seed in range(4):
        lams = np.linalg.eigvals(build_lindbladian(random_spec(seed)))
        scale = max(float(np.max(np.abs(lams))), 1.0)
        assert np.max(lams.real) < 1e-10 * scale
