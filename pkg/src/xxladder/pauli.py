"""Dense Pauli-string algebra on small registers of spin-1/2 sites.

Everything here works with explicit 2^n x 2^n complex matrices; the
intended regime is n <= 10 sites (matrix construction) and n <= 8 sites
(full basis decomposition), which covers all local perturbative blocks
used elsewhere in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PauliString",
    "CapacityError",
    "SIGMA",
    "string_matrix",
    "decompose",
    "operator_norm",
]

MAX_SITES_MATRIX = 10
MAX_DIM_DECOMPOSE = 256

SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


class CapacityError(ValueError):
    """Raised when a request exceeds the supported dense-matrix size."""


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-site Pauli operators.

    ``factors`` maps site index -> axis ("X", "Y" or "Z"); absent sites
    carry the identity.  An empty map is the identity string.
    """

    site_count: int
    factors: tuple[tuple[int, str], ...] = field(default=())

    def __post_init__(self):
        if self.site_count <= 0:
            raise ValueError("site_count must be positive")
        norm = tuple(sorted(dict(self.factors).items()))
        object.__setattr__(self, "factors", norm)
        for site, axis in norm:
            if not 0 <= site < self.site_count:
                raise ValueError(f"site {site} outside register of {self.site_count}")
            if axis not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli axis {axis!r}")

    @classmethod
    def from_dict(cls, site_count: int, factors: dict[int, str]) -> "PauliString":
        return cls(site_count, tuple(factors.items()))

    def axis_at(self, site: int) -> str:
        return dict(self.factors).get(site, "I")

    @property
    def weight(self) -> int:
        return len(self.factors)

    def label(self) -> str:
        return "".join(self.axis_at(i) for i in range(self.site_count))


def string_matrix(s: PauliString) -> np.ndarray:
    """Dense matrix of a Pauli string (unitary and Hermitian)."""
    if s.site_count > MAX_SITES_MATRIX:
        raise CapacityError(f"{s.site_count} sites exceeds supported {MAX_SITES_MATRIX}")
    out = np.ones((1, 1), dtype=complex)
    for i in range(s.site_count):
        out = np.kron(out, SIGMA[s.axis_at(i)])
    return out


def operator_norm(op: np.ndarray) -> float:
    """Spectral norm upper bound used for relative cutoffs (Frobenius)."""
    return float(np.linalg.norm(op))


def all_strings(site_count: int):
    """Iterate every Pauli string on ``site_count`` sites (4^n of them)."""
    for axes in itertools.product("IXYZ", repeat=site_count):
        factors = tuple((i, a) for i, a in enumerate(axes) if a != "I")
        yield PauliString(site_count, factors)


_BASIS_CACHE: dict[int, tuple[list[PauliString], np.ndarray]] = {}


def _basis(site_count: int) -> tuple[list[PauliString], np.ndarray]:
    if site_count not in _BASIS_CACHE:
        strings = list(all_strings(site_count))
        stack = np.stack([string_matrix(s) for s in strings])
        _BASIS_CACHE[site_count] = (strings, stack)
    return _BASIS_CACHE[site_count]


def decompose(op: np.ndarray, cutoff_scale: float = 1e-10) -> dict[PauliString, complex]:
    """Expand ``op`` in the Pauli basis: c_s = Tr(P_s^dag op) / dim.

    Coefficients with |c_s| below ``cutoff_scale * ||op||`` are dropped,
    suppressing floating-point dust before cell-type classification.
    """
    dim = op.shape[0]
    if op.shape != (dim, dim) or dim & (dim - 1):
        raise ValueError("operator must be square with power-of-two dimension")
    if dim > MAX_DIM_DECOMPOSE:
        raise CapacityError(f"dim {dim} exceeds supported {MAX_DIM_DECOMPOSE}")
    n = dim.bit_length() - 1
    strings, stack = _basis(n)
    # Pauli strings are Hermitian, so Tr(P^dag op) = Tr(P op).
    cs = np.einsum("sij,ji->s", stack, op) / dim
    cutoff = cutoff_scale * operator_norm(op)
    return {s: complex(c) for s, c in zip(strings, cs) if abs(c) > cutoff}


def reconstruct(coeffs: dict[PauliString, complex], site_count: int) -> np.ndarray:
    """Inverse of :func:`decompose`."""
    dim = 2**site_count
    out = np.zeros((dim, dim), dtype=complex)
    for s, c in coeffs.items():
        out += c * string_matrix(s)
    return out
