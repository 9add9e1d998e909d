import numpy as np
import pytest

from qcskit.models.herm_model import (
    DimensionMismatch,
    HermMat,
    coordinates,
    diag,
    from_coordinates,
    hermitian_basis,
    hermitize,
    identity,
    inner,
    interleave_permute,
    is_psd,
    kron,
    op_norm,
    partial_trace,
    projector,
    singlet_projector,
    spectral,
    swap_operator,
    trace,
)
from qcskit.utils.random_utils import get_rng, random_hermitian, random_in_d


##########################################################
# Construction
##########################################################


def test_construction_symmetrizes_within_tolerance():
    """Tests that tiny anti-Hermitian noise is accepted and removed."""
    a = np.array([[1.0, 2.0 + 1e-14], [2.0, 3.0]])
    f = HermMat(a)
    assert np.allclose(f.entries, f.entries.conj().T, atol=0)


def test_construction_rejects_non_hermitian(caplog):
    """Tests that a visibly non-Hermitian matrix is rejected and logged."""
    with pytest.raises(ValueError, match="not Hermitian"):
        HermMat(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert "not Hermitian" in caplog.text


@pytest.mark.parametrize("entries", [np.zeros((0, 0)), np.zeros((2, 3)), np.zeros(4)])
def test_construction_rejects_bad_shapes(entries):
    with pytest.raises(ValueError, match="Invalid Hermitian matrix shape"):
        HermMat(entries)


def test_construction_rejects_non_finite():
    with pytest.raises(ValueError, match="non-finite"):
        HermMat(np.array([[np.nan]]))


def test_construction_rejects_oversized_carrier():
    with pytest.raises(ValueError, match="exceeds"):
        HermMat(np.eye(65))


def test_entries_are_read_only():
    f = identity(2)
    with pytest.raises(ValueError):
        f.entries[0, 0] = 5


##########################################################
# Basis and coordinates
##########################################################


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_hermitian_basis_is_orthonormal(n):
    """Tests that the fixed basis is trace-orthonormal with n^2 elements."""
    basis = hermitian_basis(n)
    assert len(basis) == n * n
    gram = np.array([[inner(a, b) for b in basis] for a in basis])
    assert np.allclose(gram, np.eye(n * n), atol=1e-12)


def test_hermitian_basis_rejects_bad_dimension():
    with pytest.raises(ValueError, match="Invalid carrier dimension"):
        hermitian_basis(0)


def test_coordinates_reconstruct_the_matrix(rng):
    f = random_hermitian(rng, 3)
    g = from_coordinates(coordinates(f), 3)
    assert np.allclose(f.entries, g.entries, atol=1e-12)


def test_coordinates_are_an_isometry(rng):
    """Tests that tr(fg) equals the dot product of coordinate vectors."""
    f, g = random_hermitian(rng, 3), random_hermitian(rng, 3)
    assert abs(inner(f, g) - float(coordinates(f) @ coordinates(g))) < 1e-12


def test_from_coordinates_rejects_wrong_length():
    with pytest.raises(DimensionMismatch):
        from_coordinates([1.0, 2.0, 3.0], 2)


##########################################################
# Pairing and spectra
##########################################################


def test_inner_matches_trace_of_product(rng):
    f, g = random_hermitian(rng, 4), random_hermitian(rng, 4)
    expected = float(np.real(np.trace(f.entries @ g.entries)))
    assert abs(inner(f, g) - expected) < 1e-12


def test_inner_rejects_dimension_mismatch(caplog):
    with pytest.raises(DimensionMismatch, match="2 vs 3"):
        inner(identity(2), identity(3))
    assert "Dimension mismatch" in caplog.text


def trials_for(n: int, total: int = 1000, dims: int = 6) -> int:
    """Share of `total` seeded trials given to carrier n when split over dims 1..`dims`."""
    return total // dims + (n <= total % dims)


def test_trial_split_covers_a_thousand():
    assert sum(trials_for(n) for n in range(1, 7)) == 1000


@pytest.mark.parametrize("n", range(1, 7))
def test_spectral_decomposition_residual(n):
    """Tests that the eigensolver reconstructs f and returns orthonormal eigenvectors."""
    rng = get_rng(100 + n)
    for _ in range(trials_for(n)):
        f = random_hermitian(rng, n, scale=rng.uniform(0.01, 10.0))
        spec = spectral(f)
        bound = 1e-9 * max(1.0, op_norm(f))
        assert np.max(np.abs(spec.reconstruct() - f.entries)) <= bound
        assert spec.residual <= bound
        v = spec.eigenvectors
        assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-10)
        assert np.all(np.diff(spec.eigenvalues) <= 1e-12), "Eigenvalues should be sorted descending."


def test_spectrum_records_residual():
    spec = spectral(diag(2.0, -1.0))
    assert spec.residual == pytest.approx(0.0, abs=1e-15)
    assert np.max(np.abs(spec.reconstruct() - diag(2.0, -1.0).entries)) == pytest.approx(spec.residual, abs=1e-15)


def test_spectral_logs_large_residual(mocker, caplog):
    """Tests that a decomposition failing to reconstruct f is reported."""
    mocker.patch("qcskit.models.herm_model.np.linalg.eigh",
                 return_value=(np.array([1.0, 0.0]), np.eye(2, dtype=complex)))
    spec = spectral(diag(0.0, 1.0))
    assert spec.residual == pytest.approx(1.0)
    assert "reconstruction residual" in caplog.text


def test_spectral_quantities():
    f = diag(2.0, -3.0, 0.5)
    assert op_norm(f) == pytest.approx(3.0)
    assert trace(f) == pytest.approx(-0.5)
    assert not is_psd(f)
    assert is_psd(diag(0.0, 1.0))
    assert f.spectrum.min_eigenvalue == pytest.approx(-3.0)
    assert f.spectrum.max_eigenvalue == pytest.approx(2.0)


def test_spectrum_projector_is_top_eigenprojector():
    f = diag(0.1, 0.9)
    p = f.spectrum.projector(0)
    assert np.allclose(p.entries, diag(0.0, 1.0).entries, atol=1e-12)


def test_arithmetic_stays_hermitian(rng):
    f, g = random_hermitian(rng, 3), random_hermitian(rng, 3)
    for h in (f + g, f - g, -f, 2.5 * f, f * 0.5):
        assert isinstance(h, HermMat)
    with pytest.raises(DimensionMismatch):
        f + identity(2)


def test_hermitize_symmetrizes():
    f = hermitize(np.array([[1.0, 2.0], [0.0, 1.0]]))
    assert np.allclose(f.entries, [[1.0, 1.0], [1.0, 1.0]])


##########################################################
# Tensor structure
##########################################################


def test_partial_trace_of_product(rng):
    """Tests that the partial trace of c ⊗ d returns tr(d) c and tr(c) d."""
    c, d = random_in_d(rng, 2), random_in_d(rng, 3)
    cd = kron(c, d)
    assert np.allclose(partial_trace(cd, (2, 3), 2).entries, trace(d) * c.entries, atol=1e-12)
    assert np.allclose(partial_trace(cd, (2, 3), 1).entries, trace(c) * d.entries, atol=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_partial_trace_of_random_products(n):
    """Tests tr_2(f ⊗ g) = tr(g) f for random Hermitian f on carrier n and g on carriers 1 to 6."""
    rng = get_rng(200 + n)
    for i in range(trials_for(n)):
        m = 1 + i % 6
        f, g = random_hermitian(rng, n), random_hermitian(rng, m)
        reduced = partial_trace(kron(f, g), (n, m), 2)
        assert reduced.n == n
        assert np.max(np.abs(reduced.entries - trace(g) * f.entries)) <= 1e-10 * max(1.0, op_norm(f) * m * op_norm(g))


def test_partial_trace_rejects_bad_arguments():
    with pytest.raises(DimensionMismatch):
        partial_trace(identity(4), (3, 2), 1)
    with pytest.raises(ValueError, match="Invalid factor index"):
        partial_trace(identity(4), (2, 2), 3)


def test_kron_rejects_oversized_product():
    with pytest.raises(ValueError, match="exceeds"):
        kron(identity(8), identity(9))


def test_interleave_permute_reorders_factors(rng):
    a1, b1, a2, b2 = (random_hermitian(rng, 2) for _ in range(4))
    joined = kron(kron(a1, b1), kron(a2, b2))
    expected = kron(kron(a1, a2), kron(b1, b2))
    assert np.allclose(interleave_permute(joined, (2, 2, 2, 2)).entries, expected.entries, atol=1e-12)


##########################################################
# Named matrices
##########################################################


def test_swap_operator_exchanges_factors(rng):
    c, d = random_hermitian(rng, 3), random_hermitian(rng, 3)
    s = swap_operator(3).entries
    assert np.allclose(s @ kron(c, d).entries @ s, kron(d, c).entries, atol=1e-12)


def test_swap_pairs_products_to_trace_of_product(rng):
    c, d = random_in_d(rng, 2), random_in_d(rng, 2)
    assert abs(inner(swap_operator(2), kron(c, d)) - float(np.real(np.trace(c.entries @ d.entries)))) < 1e-12


def test_singlet_is_antisymmetric_eigenvector_of_swap():
    assert inner(swap_operator(2), singlet_projector()) == pytest.approx(-1.0, abs=1e-12)
    assert np.allclose(singlet_projector().spectrum.eigenvalues, [1, 0, 0, 0], atol=1e-12)


def test_projector_normalizes_and_rejects_zero():
    p = projector([3.0, 4.0])
    assert trace(p) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="zero vector"):
        projector([0.0, 0.0])
