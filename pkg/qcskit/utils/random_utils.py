"""Seeded sampling of Hermitian matrices, states and unitaries.

All audits draw from `numpy.random.Generator` instances created by `get_rng`, so identical
seeds reproduce identical samples. The base distribution is Gaussian coordinates in the fixed
Hermitian basis; canonical-set samples are obtained from it by eigenvalue clamping.
"""
import logging
import os

import numpy as np

from qcskit.models.herm_model import HermMat, from_coordinates, hermitize
from qcskit.utils.logger import configure_logger


logger = logging.getLogger(__name__)
configure_logger(logger)


def get_rng(seed: int | None = None) -> np.random.Generator:
    """Returns a seeded generator. A missing seed falls back to QCSKIT_SEED, then 0.

    Raises:
        ValueError: If the seed (or QCSKIT_SEED) is not an integer.

    """
    if seed is None:
        raw = os.getenv("QCSKIT_SEED", "0")
        try:
            seed = int(raw)
        except ValueError:
            logger.error(f"Invalid QCSKIT_SEED: {raw}")
            raise ValueError(f"Invalid QCSKIT_SEED: {raw}")
    logger.debug(f"Creating generator with seed {seed}")
    return np.random.default_rng(seed)


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> HermMat:
    """Gaussian coordinates in the Hermitian basis, times `scale`."""
    return from_coordinates(scale * rng.standard_normal(n * n), n)


def _clamped(f: HermMat, low: float, high: float) -> HermMat:
    spec = f.spectrum
    values = np.clip(spec.eigenvalues, low, high)
    v = spec.eigenvectors
    return hermitize((v * values) @ v.conj().T)


def random_in_d(rng: np.random.Generator, n: int) -> HermMat:
    """A point of D(n): eigenvalues of a Gaussian sample clamped to [0, 1]."""
    return _clamped(random_hermitian(rng, n), 0.0, 1.0)


def random_in_p(rng: np.random.Generator, n: int) -> HermMat:
    """A point of P(n): eigenvalues clamped to [0, inf), then trace scaled into [0, 1]."""
    f = _clamped(random_hermitian(rng, n), 0.0, np.inf)
    tr = float(np.real(np.trace(f.entries)))
    if tr == 0:
        return f
    return f * (rng.uniform(0.0, 1.0) / tr)


def random_state_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_pure_state(rng: np.random.Generator, n: int) -> HermMat:
    v = random_state_vector(rng, n)
    return hermitize(np.outer(v, v.conj()))


def random_projector(rng: np.random.Generator, n: int, rank: int | None = None) -> HermMat:
    """Orthogonal projector of the given rank (uniformly random rank in 1..n when omitted)."""
    if rank is None:
        rank = int(rng.integers(1, n + 1))
    q = random_unitary(rng, n)[:, :rank]
    return hermitize(q @ q.conj().T)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-random unitary via QR with the phase correction on R's diagonal."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_complex_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
