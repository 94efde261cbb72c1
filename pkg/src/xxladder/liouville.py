"""Small-N builders for the monitored XX chain and its ladder form.

The chain Hamiltonian is H = sum_i -J_i (X_i X_{i+1} + Y_i Y_{i+1}) with
periodic boundaries.  Site i is measured (dephased) in the X and Y bases
at rate beta * p_i.  Vectorizing the master equation gives a generator on
two chain copies; flipping the qubits of the second copy turns it into a
non-Hermitian XX ladder with imaginary horizontal couplings +-iJ_i and
real vertical couplings beta * p_i / 2.

Layout convention for the doubled register: sites 0..N-1 are the upper
rail (ket copy), sites N..2N-1 the lower rail (flipped bra copy).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import SIGMA, CapacityError

__all__ = [
    "LadderSpec",
    "build_hamiltonian",
    "build_lindbladian",
    "build_ladder_liouvillian",
    "known_modes",
    "ModeVerificationError",
]

MAX_RUNGS_HAMILTONIAN = 10
MAX_RUNGS_LIOUVILLIAN = 5


class ModeVerificationError(RuntimeError):
    """An analytic eigenmode failed its residual check (builder bug)."""


@dataclass(frozen=True)
class LadderSpec:
    """Microscopic model: couplings J_i, measurement rates p_i, global scale beta."""

    n_rungs: int
    J: tuple[float, ...] = field(default=())
    p: tuple[float, ...] = field(default=())
    beta: float = 1.0

    def __post_init__(self):
        if self.n_rungs <= 0 or self.n_rungs % 2:
            raise ValueError("n_rungs must be a positive even integer")
        object.__setattr__(self, "J", tuple(float(j) for j in self.J))
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if len(self.J) != self.n_rungs or len(self.p) != self.n_rungs:
            raise ValueError("J and p must each have n_rungs entries")
        if self.beta < 0 or any(v < 0 for v in self.p):
            raise ValueError("measurement rates and beta must be non-negative")

    @property
    def rates(self) -> np.ndarray:
        """Effective per-site rates beta * p_i."""
        return self.beta * np.asarray(self.p)


def _site_op(axis: str, site: int, n_sites: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for i in range(n_sites):
        out = np.kron(out, SIGMA[axis] if i == site else SIGMA["I"])
    return out


def _two_site(axis_a: str, a: int, axis_b: str, b: int, n_sites: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for i in range(n_sites):
        if i == a:
            out = np.kron(out, SIGMA[axis_a])
        elif i == b:
            out = np.kron(out, SIGMA[axis_b])
        else:
            out = np.kron(out, SIGMA["I"])
    return out


def build_hamiltonian(spec: LadderSpec) -> np.ndarray:
    """Dense XX-chain Hamiltonian with periodic boundary conditions.

    Note that for N=2 both bonds J_0 and J_1 connect the same pair of
    sites, so the bond is effectively counted twice; this is intended
    and only matters for algebra tests.
    """
    n = spec.n_rungs
    if n > MAX_RUNGS_HAMILTONIAN:
        raise CapacityError(f"N={n} exceeds supported {MAX_RUNGS_HAMILTONIAN}")
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        j = (i + 1) % n
        h -= spec.J[i] * (_two_site("X", i, "X", j, n) + _two_site("Y", i, "Y", j, n))
    return h


def build_lindbladian(spec: LadderSpec) -> np.ndarray:
    """Vectorized generator acting on row-major-flattened density matrices."""
    n = spec.n_rungs
    if n > MAX_RUNGS_LIOUVILLIAN:
        raise CapacityError(f"N={n} exceeds supported {MAX_RUNGS_LIOUVILLIAN}")
    h = build_hamiltonian(spec)
    dim = 2**n
    eye = np.eye(dim)
    lind = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    n2 = 2 * n
    for i in range(n):
        ri = spec.rates[i] / 2.0
        if ri == 0.0:
            continue
        lind += ri * (
            _two_site("X", i, "X", n + i, n2)
            - _two_site("Y", i, "Y", n + i, n2)
            - 2.0 * np.eye(dim * dim)
        )
    return lind


def build_ladder_liouvillian(spec: LadderSpec) -> np.ndarray:
    """Flipped-basis form: a non-Hermitian XX ladder on 2N sites."""
    n = spec.n_rungs
    if n > MAX_RUNGS_LIOUVILLIAN:
        raise CapacityError(f"N={n} exceeds supported {MAX_RUNGS_LIOUVILLIAN}")
    n2 = 2 * n
    dim = 2**n2
    lad = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        j = (i + 1) % n
        if spec.J[i] != 0.0:
            upper = _two_site("X", i, "X", j, n2) + _two_site("Y", i, "Y", j, n2)
            lower = _two_site("X", n + i, "X", n + j, n2) + _two_site(
                "Y", n + i, "Y", n + j, n2
            )
            lad += 1j * spec.J[i] * (upper - lower)
        ri = spec.rates[i] / 2.0
        if ri != 0.0:
            lad += ri * (
                _two_site("X", i, "X", n + i, n2)
                + _two_site("Y", i, "Y", n + i, n2)
                - 2.0 * np.eye(dim)
            )
    return lad


def known_modes(
    spec: LadderSpec, tol: float = 1e-9
) -> list[tuple[np.ndarray, complex]]:
    """The four analytic eigenpairs of the vectorized generator.

    Returns (vector, eigenvalue) for the steady state |I>>, the parity
    mode |prod Z>> at -2 sum(rates), and |prod X>>, |prod Y>> at
    -sum(rates).  Each pair is verified against :func:`build_lindbladian`
    to relative residual ``tol``; failure signals a builder bug.
    """
    n = spec.n_rungs
    lind = build_lindbladian(spec)
    total = float(np.sum(spec.rates))

    def prod_op(axis: str) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for _ in range(n):
            out = np.kron(out, SIGMA[axis])
        return out

    candidates = [
        (np.eye(2**n, dtype=complex), 0.0 + 0.0j),
        (prod_op("Z"), complex(-2.0 * total)),
        (prod_op("X"), complex(-total)),
        (prod_op("Y"), complex(-total)),
    ]
    norm = np.linalg.norm(lind)
    modes = []
    for mat, lam in candidates:
        vec = mat.flatten()
        vec = vec / np.linalg.norm(vec)
        residual = np.linalg.norm(lind @ vec - lam * vec)
        if residual > tol * max(norm, 1.0):
            raise ModeVerificationError(
                f"analytic mode at {lam} has residual {residual:.3e}"
            )
        modes.append((vec, lam))
    return modes
