"""Dense eigendecompositions with right and left eigenvectors.

Two entry points:

* :func:`eig_hermitian` for Hermitian input (delegates to LAPACK's
  tridiagonal path via numpy, left vectors are conjugate transposes);
* :func:`eig_general` for arbitrary complex matrices, implemented
  in-house as balancing -> Householder Hessenberg reduction ->
  Wilkinson-shifted QR -> inverse-iteration eigenvectors, so eigenvalue
  ordering and vector phases are deterministic across runs.

Eigenvalues closer than ``CLUSTER_TOL * ||A||`` are flagged as a
degenerate cluster; downstream consumers that project onto a single
eigenstate must refuse flagged targets.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .pauli import CapacityError

__all__ = [
    "SpectralDecomposition",
    "NonConvergenceError",
    "eig_hermitian",
    "eig_general",
    "eigvals_general",
    "write_spectrum_csv",
]

MAX_DIM = 1024
CLUSTER_TOL = 1e-8
MAX_SWEEP_FACTOR = 30


class NonConvergenceError(RuntimeError):
    """QR iteration failed to deflate; carries the unconverged indices."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"QR did not converge for indices {self.indices}")


@dataclass
class SpectralDecomposition:
    eigenvalues: np.ndarray  # shape (n,), complex
    right_vectors: np.ndarray  # columns are right eigenvectors
    left_vectors: np.ndarray  # rows are left eigenvectors
    residual_bound: float
    clusters: list[tuple[int, ...]] = field(default_factory=list)

    def in_degenerate_cluster(self, k: int) -> bool:
        return any(k in c for c in self.clusters)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def _find_clusters(eigenvalues: np.ndarray, scale: float) -> list[tuple[int, ...]]:
    n = len(eigenvalues)
    tol = CLUSTER_TOL * max(scale, 1.0)
    parent = list(range(n))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigenvalues[i] - eigenvalues[j]) <= tol:
                parent[root(j)] = root(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(root(i), []).append(i)
    return [tuple(g) for g in groups.values() if len(g) > 1]


def eig_hermitian(a: np.ndarray) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n > MAX_DIM:
        raise CapacityError(f"dim {n} exceeds supported {MAX_DIM}")
    norm = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > 1e-10 * max(norm, 1.0):
        raise ValueError("input is not Hermitian to the required tolerance")
    w, v = np.linalg.eigh(a)
    resid = float(np.linalg.norm(a @ v - v * w) / max(norm, 1.0))
    return SpectralDecomposition(
        eigenvalues=w.astype(complex),
        right_vectors=v,
        left_vectors=v.conj().T,
        residual_bound=resid,
        clusters=_find_clusters(w.astype(complex), norm),
    )


def _balance(a: np.ndarray, radix: float = 2.0) -> np.ndarray:
    """Parlett-Reinsch diagonal balancing (similarity transform)."""
    a = a.copy()
    n = a.shape[0]
    done = False
    while not done:
        done = True
        for i in range(n):
            r = np.sum(np.abs(a[i, :])) - abs(a[i, i])
            c = np.sum(np.abs(a[:, i])) - abs(a[i, i])
            if r == 0.0 or c == 0.0:
                continue
            s = c + r
            f = 1.0
            while c < r / radix:
                c *= radix
                r /= radix
                f *= radix
            while c >= r * radix:
                c /= radix
                r *= radix
                f /= radix
            if (c + r) < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def _hessenberg(a: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity)."""
    h = a.copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1 :, k]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        alpha = -np.exp(1j * np.angle(x[0])) * nx if x[0] != 0 else -nx
        v = x.copy()
        v[0] -= alpha
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        v /= nv
        # H <- P H P with P = I - 2 v v^dag on the trailing block
        h[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, k:])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
    return h


def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    a = h[hi - 1, hi - 1]
    b = h[hi - 1, hi]
    c = h[hi, hi - 1]
    d = h[hi, hi]
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4.0 - det + 0j)
    mu1 = tr / 2.0 + disc
    mu2 = tr / 2.0 - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def _charpoly(a: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial by Faddeev-LeVerrier."""
    n = a.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    c = 1.0 + 0j
    for k in range(1, n + 1):
        m = a @ m + c * np.eye(n)
        am = a @ m
        c = -np.trace(am) / k
        coeffs[k] = c
    return coeffs


def _durand_kerner(coeffs: np.ndarray, iters: int = 500) -> np.ndarray:
    """All roots of a monic polynomial, deterministic start points."""
    n = len(coeffs) - 1
    bound = 1.0 + float(np.max(np.abs(coeffs[1:])))
    z = bound * np.exp(2j * np.pi * (np.arange(n) + 0.25) / n)
    for _ in range(iters):
        p = np.polyval(coeffs, z)
        moved = 0.0
        for i in range(n):
            denom = np.prod(z[i] - np.delete(z, i))
            if denom == 0:
                denom = 1e-30
            dz = p[i] / denom
            z[i] -= dz
            moved = max(moved, abs(dz))
        if moved <= 1e-15 * max(bound, 1.0):
            break
    return z


def _window_eigs_direct(w: np.ndarray) -> np.ndarray:
    """Eigenvalues of a small block via its characteristic polynomial.

    Fallback for defective clusters on which shifted QR stalls; scaled
    to unit norm so the root finder works at O(1) magnitudes.
    """
    scale = float(np.linalg.norm(w))
    if scale == 0.0:
        return np.zeros(w.shape[0], dtype=complex)
    return _durand_kerner(_charpoly(w / scale)) * scale


def _qr_sweeps(h: np.ndarray) -> np.ndarray:
    """Shifted QR driver; returns the converged (triangular) diagonal."""
    h = h.copy()
    n = h.shape[0]
    eps = np.finfo(float).eps
    hnorm = float(np.linalg.norm(h))
    hi = n - 1
    its = 0  # iterations on the current trailing window
    while hi > 0:
        # defective clusters can stall a hair above the eps threshold;
        # relax the deflation test gradually on stuck windows
        relax = 10.0 ** (its // 10)
        lo = hi
        while lo > 0:
            small = relax * eps * (abs(h[lo - 1, lo - 1]) + abs(h[lo, lo]))
            if its >= 20:
                # graded-entry stall: absolute accuracy is bounded by
                # eps * ||H|| regardless, so deflate at that floor
                small = max(small, eps * hnorm)
            if abs(h[lo, lo - 1]) <= max(small, 1e-300):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        if hi - lo == 1:
            # 2x2 window: closed-form eigenvalues (shifted QR can stall
            # on near-degenerate pairs)
            a, b = h[lo, lo], h[lo, hi]
            c, d = h[hi, lo], h[hi, hi]
            disc = np.sqrt((a - d) * (a - d) / 4.0 + b * c + 0j)
            h[lo, lo] = (a + d) / 2.0 + disc
            h[hi, hi] = (a + d) / 2.0 - disc
            h[hi, lo] = 0.0
            hi -= 2
            its = 0
            continue
        if its >= MAX_SWEEP_FACTOR:
            if hi - lo + 1 <= 8:
                lams = _window_eigs_direct(h[lo : hi + 1, lo : hi + 1])
                for j, lam in enumerate(lams):
                    h[lo + j, lo + j] = lam
                    if j:
                        h[lo + j, lo + j - 1] = 0.0
                hi = lo - 1
                its = 0
                continue
            raise NonConvergenceError(range(lo, hi + 1))
        its += 1
        if its % 10 == 0:
            # exceptional shift: breaks shift cycles on non-normal blocks
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson_shift(h, hi)
        for i in range(lo, hi + 1):
            h[i, i] -= mu
        # QR factorization of the window by Givens, then RQ
        rots: list[tuple[complex, complex]] = []
        for i in range(lo, hi):
            a, b = h[i, i], h[i + 1, i]
            r = np.hypot(abs(a), abs(b))
            if r == 0.0:
                rots.append((1.0 + 0j, 0.0 + 0j))
                continue
            c, s = a / r, b / r
            rots.append((c, s))
            top = h[i, i : hi + 1].copy()
            bot = h[i + 1, i : hi + 1].copy()
            h[i, i : hi + 1] = np.conj(c) * top + np.conj(s) * bot
            h[i + 1, i : hi + 1] = -s * top + c * bot
        for idx, (c, s) in enumerate(rots):
            i = lo + idx
            left = h[lo : i + 2, i].copy()
            right = h[lo : i + 2, i + 1].copy()
            h[lo : i + 2, i] = left * c + right * s
            h[lo : i + 2, i + 1] = -left * np.conj(s) + right * np.conj(c)
        for i in range(lo, hi + 1):
            h[i, i] += mu
    return np.diag(h).copy()


def _inverse_iteration(
    a: np.ndarray, lam: complex, prior: list[np.ndarray]
) -> np.ndarray:
    """One eigenvector of ``a`` near ``lam``, deflated against ``prior``."""
    n = a.shape[0]
    scale = max(np.linalg.norm(a), 1.0)
    shift = lam + 1e-12 * scale * (1.0 + 1.0j)
    b = np.ones(n, dtype=complex) / np.sqrt(n)
    m = a - shift * np.eye(n)
    try:
        lu = np.linalg.inv(m)
    except np.linalg.LinAlgError:
        shift += 1e-9 * scale
        lu = np.linalg.pinv(a - shift * np.eye(n))
    x = b
    for _ in range(3):
        for p in prior:
            x = x - (p.conj() @ x) * p
        y = lu @ x
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            break
        x = y / ny
    for p in prior:
        x = x - (p.conj() @ x) * p
    nx = np.linalg.norm(x)
    if nx > 0:
        x = x / nx
    # fix the phase for reproducibility: largest entry made real positive
    k = int(np.argmax(np.abs(x)))
    if x[k] != 0:
        x = x * (abs(x[k]) / x[k])
    return x


def eigvals_general(a: np.ndarray) -> np.ndarray:
    """Eigenvalues only (same QR pipeline, no eigenvectors).

    Sorted by (real part descending, imaginary part ascending).
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n > MAX_DIM:
        raise CapacityError(f"dim {n} exceeds supported {MAX_DIM}")
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return np.array([a[0, 0]], dtype=complex)
    lams = _qr_sweeps(_hessenberg(_balance(a)))
    return lams[np.lexsort((lams.imag, -lams.real))]


def eig_general(a: np.ndarray) -> SpectralDecomposition:
    """Full complex spectrum with right and left eigenvectors.

    Eigenvalues are sorted by (real part descending, imaginary part
    ascending) so downstream artifacts are reproducible.  Left vectors
    are globally rescaled so that left @ right = identity; for defective
    input this is best-effort and shows up in ``residual_bound``.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n > MAX_DIM:
        raise CapacityError(f"dim {n} exceeds supported {MAX_DIM}")
    if n == 0:
        raise ValueError("empty matrix")
    norm = np.linalg.norm(a)
    if n == 1:
        lam = np.array([a[0, 0]], dtype=complex)
        one = np.ones((1, 1), dtype=complex)
        return SpectralDecomposition(lam, one, one, 0.0, [])
    h = _hessenberg(_balance(a))
    lams = _qr_sweeps(h)
    order = np.lexsort((lams.imag, -lams.real))
    lams = lams[order]
    clusters = _find_clusters(lams, norm)

    right = np.zeros((n, n), dtype=complex)
    left = np.zeros((n, n), dtype=complex)
    cluster_of = {}
    for c in clusters:
        for k in c:
            cluster_of[k] = c
    done_r: dict[tuple, list[np.ndarray]] = {}
    done_l: dict[tuple, list[np.ndarray]] = {}
    ah = a.conj().T
    for k in range(n):
        key = cluster_of.get(k, (k,))
        prior_r = done_r.setdefault(key, [])
        prior_l = done_l.setdefault(key, [])
        vr = _inverse_iteration(a, lams[k], prior_r)
        vl = _inverse_iteration(ah, np.conj(lams[k]), prior_l)
        prior_r.append(vr)
        prior_l.append(vl)
        right[:, k] = vr
        left[k, :] = vl.conj()
    # enforce biorthonormality globally: left <- (left @ right)^-1 @ left
    overlap = left @ right
    try:
        left = np.linalg.solve(overlap, left)
    except np.linalg.LinAlgError:
        left = np.linalg.pinv(overlap) @ left
    resid = float(
        np.linalg.norm(a @ right - right * lams[None, :]) / max(norm, 1.0)
    )
    return SpectralDecomposition(lams, right, left, resid, clusters)


def write_spectrum_csv(path, dec: SpectralDecomposition) -> None:
    """Spectrum export with columns index, re, im, residual."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im", "residual"])
        for k, lam in enumerate(dec.eigenvalues):
            w.writerow([k, repr(float(lam.real)), repr(float(lam.imag)),
                        repr(dec.residual_bound)])
