from dataclasses import dataclass
from functools import cached_property, lru_cache
import logging
from typing import Sequence

import numpy as np

from qcskit.utils.logger import configure_logger


logger = logging.getLogger(__name__)
configure_logger(logger)


MAX_DIM = 64
PARSE_TOL = 1e-12


class DimensionMismatch(ValueError):
    """Raised when two Hermitian matrices (or a matrix and a factorization) disagree on size."""


def _check_same_dim(f: "HermMat", g: "HermMat") -> None:
    if f.n != g.n:
        logger.error(f"Dimension mismatch: {f.n} vs {g.n}")
        raise DimensionMismatch(f"Dimension mismatch: {f.n} vs {g.n}")


@dataclass(frozen=True, eq=False)
class HermMat:
    """An n x n complex Hermitian matrix, immutable after construction.

    Construction validates Hermiticity to PARSE_TOL (scaled by the largest entry) and then
    stores the exact symmetrization (f + f^H) / 2. Use `hermitize` for arithmetic results,
    which skips the check.

    Attributes:
        entries (np.ndarray): The n x n complex entries (read-only).

    """
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            logger.error(f"Invalid Hermitian matrix shape: {a.shape}")
            raise ValueError(f"Invalid Hermitian matrix shape: {a.shape}. Must be square and non-empty.")
        if a.shape[0] > MAX_DIM:
            logger.error(f"Carrier dimension {a.shape[0]} exceeds {MAX_DIM}")
            raise ValueError(f"Carrier dimension {a.shape[0]} exceeds the supported maximum of {MAX_DIM}")
        if not np.all(np.isfinite(a)):
            logger.error("Hermitian matrix has non-finite entries")
            raise ValueError("Hermitian matrix has non-finite entries")
        drift = np.max(np.abs(a - a.conj().T))
        if drift > PARSE_TOL * max(1.0, float(np.max(np.abs(a)))):
            logger.error(f"Matrix is not Hermitian (max |f - f^H| = {drift:.3e})")
            raise ValueError(f"Matrix is not Hermitian (max |f - f^H| = {drift:.3e})")
        a = (a + a.conj().T) / 2
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def spectrum(self) -> "Spectrum":
        return spectral(self)

    def __add__(self, other: "HermMat") -> "HermMat":
        _check_same_dim(self, other)
        return hermitize(self.entries + other.entries)

    def __sub__(self, other: "HermMat") -> "HermMat":
        _check_same_dim(self, other)
        return hermitize(self.entries - other.entries)

    def __neg__(self) -> "HermMat":
        return hermitize(-self.entries)

    def __mul__(self, scalar: float) -> "HermMat":
        return hermitize(float(scalar) * self.entries)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"HermMat(n={self.n}, entries={np.round(self.entries, 6).tolist()})"


def hermitize(a: np.ndarray) -> HermMat:
    """Wraps an arithmetic result as a HermMat, re-symmetrizing via (a + a^H) / 2."""
    a = np.asarray(a, dtype=complex)
    return HermMat((a + a.conj().T) / 2)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigen-decomposition of a Hermitian matrix.

    Attributes:
        eigenvalues (np.ndarray): Real eigenvalues, sorted descending.
        eigenvectors (np.ndarray): Orthonormal eigenvectors as columns, in matching order.
        residual (float): Reconstruction error max|f - V diag(λ) V†| of the decomposition.

    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float = 0.0

    @property
    def op_norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def is_psd(self, tol: float = 1e-9) -> bool:
        return self.min_eigenvalue >= -tol

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, index: int) -> HermMat:
        """Rank-one projector onto the eigenvector at the given (descending) position."""
        return projector(self.eigenvectors[:, index])


##########################################################
# Basis and coordinates
##########################################################


@lru_cache(maxsize=None)
def _basis_array(n: int) -> np.ndarray:
    basis = np.zeros((n * n, n, n), dtype=complex)
    k = 0
    for i in range(n):
        basis[k, i, i] = 1.0
        k += 1
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pairs:
        basis[k, i, j] = basis[k, j, i] = 1 / np.sqrt(2)
        k += 1
    for i, j in pairs:
        basis[k, i, j] = 1j / np.sqrt(2)
        basis[k, j, i] = -1j / np.sqrt(2)
        k += 1
    basis.setflags(write=False)
    return basis


def hermitian_basis(n: int) -> list[HermMat]:
    """Returns the fixed orthonormal basis of H(C^n) under the trace pairing.

    Ordering: diagonal units E_ii, then (E_ij + E_ji)/sqrt(2) for i < j row-major, then
    i(E_ij - E_ji)/sqrt(2) for i < j row-major.

    Args:
        n (int): The carrier dimension.

    Returns:
        list[HermMat]: n^2 Hermitian matrices, pairwise trace-orthogonal with unit norm.

    Raises:
        ValueError: If n is not a positive integer.

    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        logger.error(f"Invalid carrier dimension: {n}")
        raise ValueError(f"Invalid carrier dimension: {n}. Must be a positive integer.")
    return [HermMat(b) for b in _basis_array(int(n))]


def coordinates(f: HermMat) -> np.ndarray:
    """Real coordinate vector of f (length n^2) in the fixed Hermitian basis."""
    basis = _basis_array(f.n)
    # tr(b f) = sum_ij b_ij f_ji
    return np.real(np.einsum("kij,ji->k", basis, f.entries))


def from_coordinates(x: Sequence[float], n: int) -> HermMat:
    x = np.asarray(x, dtype=float)
    if x.shape != (n * n,):
        logger.error(f"Coordinate vector of length {x.shape} does not match n={n}")
        raise DimensionMismatch(f"Coordinate vector of length {x.size} does not match n^2 = {n * n}")
    return hermitize(np.einsum("k,kij->ij", x, _basis_array(n)))


##########################################################
# Pairing and spectra
##########################################################


def inner(f: HermMat, g: HermMat) -> float:
    """The trace pairing tr(fg).

    Raises:
        DimensionMismatch: If the carriers differ.
        ArithmeticError: If the computed trace has a non-negligible imaginary part.

    """
    _check_same_dim(f, g)
    # tr(fg) = sum_ij f_ij g_ji = sum_ij f_ij conj(g_ij)
    value = np.vdot(g.entries, f.entries)
    scale = max(1.0, abs(value.real), float(np.max(np.abs(f.entries)) * np.max(np.abs(g.entries))))
    if abs(value.imag) > 1e-12 * scale:
        logger.error(f"Trace pairing has imaginary part {value.imag:.3e}")
        raise ArithmeticError(f"Trace pairing has imaginary part {value.imag:.3e}")
    return float(value.real)


def spectral(f: HermMat) -> Spectrum:
    """Spectral decomposition with eigenvalues sorted descending."""
    values, vectors = np.linalg.eigh(f.entries)
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    residual = float(np.max(np.abs(f.entries - (vectors * values) @ vectors.conj().T)))
    if residual > 1e-9 * max(1.0, float(np.max(np.abs(values)))):
        logger.warning(f"Eigensolver reconstruction residual {residual:.3e} for n={f.n}")
    values.setflags(write=False)
    vectors.setflags(write=False)
    return Spectrum(values, vectors, residual)


def op_norm(f: HermMat) -> float:
    return f.spectrum.op_norm


def trace(f: HermMat) -> float:
    return float(np.real(np.trace(f.entries)))


def is_psd(f: HermMat, tol: float = 1e-9) -> bool:
    return f.spectrum.is_psd(tol)


##########################################################
# Tensor structure
##########################################################


def kron(f: HermMat, g: HermMat) -> HermMat:
    """Kronecker product f ⊗ g, first factor outermost."""
    if f.n * g.n > MAX_DIM:
        logger.error(f"Product carrier {f.n}x{g.n} exceeds {MAX_DIM}")
        raise ValueError(f"Product carrier dimension {f.n * g.n} exceeds {MAX_DIM}")
    return hermitize(np.kron(f.entries, g.entries))


def _check_factorization(f: HermMat, dims: Sequence[int]) -> None:
    if any(d < 1 for d in dims) or int(np.prod(dims)) != f.n:
        logger.error(f"Dimensions {tuple(dims)} do not factor carrier {f.n}")
        raise DimensionMismatch(f"Dimensions {tuple(dims)} do not factor carrier dimension {f.n}")


def partial_trace(f: HermMat, dims: tuple[int, int], which: int) -> HermMat:
    """Traces out one factor of f on C^{d1} ⊗ C^{d2}.

    Args:
        f (HermMat): A matrix on the product carrier.
        dims (tuple[int, int]): The factor dimensions (d1, d2).
        which (int): 1 to trace out the first factor, 2 for the second.

    Returns:
        HermMat: The reduced matrix on the remaining factor.

    Raises:
        DimensionMismatch: If d1 * d2 != n.
        ValueError: If `which` is not 1 or 2.

    """
    _check_factorization(f, dims)
    d1, d2 = dims
    t = f.entries.reshape(d1, d2, d1, d2)
    if which == 1:
        return hermitize(np.einsum("ijil->jl", t))
    if which == 2:
        return hermitize(np.einsum("ijkj->ik", t))
    logger.error(f"Invalid factor index: {which}")
    raise ValueError(f"Invalid factor index: {which}. Expected 1 or 2.")


def interleave_permute(f: HermMat, dims: tuple[int, int, int, int]) -> HermMat:
    """Reorders (A1 ⊗ B1) ⊗ (A2 ⊗ B2) into (A1 ⊗ A2) ⊗ (B1 ⊗ B2).

    With dims = (a1, b1, a2, b2). The inverse is the same call with dims (a1, a2, b1, b2).

    """
    _check_factorization(f, dims)
    a1, b1, a2, b2 = dims
    t = f.entries.reshape(a1, b1, a2, b2, a1, b1, a2, b2)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return hermitize(t.reshape(f.n, f.n))


##########################################################
# Named matrices
##########################################################


def identity(n: int) -> HermMat:
    return HermMat(np.eye(n))


def zeros(n: int) -> HermMat:
    return HermMat(np.zeros((n, n)))


def diag(*values: float) -> HermMat:
    return HermMat(np.diag(np.asarray(values, dtype=float)))


def projector(v: Sequence[complex]) -> HermMat:
    """Projector onto the span of v (v is normalized first)."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("Cannot build a projector onto the zero vector")
    v = v / norm
    return hermitize(np.outer(v, v.conj()))


def swap_operator(n: int) -> HermMat:
    """The SWAP unitary on C^n ⊗ C^n."""
    s = np.zeros((n * n, n * n))
    for a in range(n):
        for b in range(n):
            s[b * n + a, a * n + b] = 1.0
    return HermMat(s)


def singlet_projector() -> HermMat:
    """Projector onto (|01> - |10>)/sqrt(2)."""
    return projector([0, 1, -1, 0])
