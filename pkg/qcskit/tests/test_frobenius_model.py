import numpy as np
import pytest

from qcskit.models.frobenius_model import (
    EULER,
    GENERATOR_NAMES,
    FrobeniusAlgebra,
    change_basis,
    closed_surface_invariant,
    generator_matrix,
    group_algebra_z2,
    is_unitary,
    semisimple,
    semisimple_invariant,
    validate_frobenius,
)


@pytest.fixture
def broken_algebra():
    """C^2 with one non-commuting structure constant; the pairing stays nondegenerate.
    """
    mu = np.zeros((2, 2, 2))
    mu[0, 0, 0] = mu[1, 1, 1] = 1.0
    mu[0, 1, 0] = 0.3
    return FrobeniusAlgebra(mu, [1.0, 1.0], unit=[1.0, 1.0], name="broken")


##########################################################
# Validation
##########################################################


def test_corpus_algebras_validate(algebra_corpus):
    """Tests every Frobenius law on the named and seeded algebras."""
    for algebra in algebra_corpus:
        report = validate_frobenius(algebra)
        assert report.passed, report.to_dict()
        assert [c.check for c in report.checks] == [
            "commutativity", "associativity", "unit", "counit", "coassociativity", "frobenius",
            "pairing-nondegenerate",
        ]


def test_broken_algebra_fails_commutativity(broken_algebra):
    report = validate_frobenius(broken_algebra)
    assert not report.passed
    assert not report.check_named("commutativity").passed
    assert report.check_named("commutativity").residual == pytest.approx(0.3)


def test_degenerate_pairing_is_rejected(caplog):
    mu = np.zeros((2, 2, 2))
    mu[0, 0, 0] = mu[1, 1, 1] = 1.0
    algebra = FrobeniusAlgebra(mu, [1.0, 0.0], unit=[1.0, 1.0], name="degenerate")
    with pytest.raises(ValueError, match="Degenerate pairing"):
        validate_frobenius(algebra)
    assert "degenerate pairing" in caplog.text


def test_unitarity_is_reported_not_enforced():
    """Tests that an indefinite pairing is flagged while the algebra stays valid."""
    indefinite = semisimple([1, -1])
    assert validate_frobenius(indefinite).passed
    assert not is_unitary(indefinite)
    assert "unitary: False" in validate_frobenius(indefinite).notes
    assert is_unitary(group_algebra_z2())


def test_unit_is_derived_when_missing():
    z2 = group_algebra_z2()
    derived = FrobeniusAlgebra(z2.mu, z2.counit, name="derived")
    assert np.allclose(derived.unit, [1.0, 0.0])


@pytest.mark.parametrize("kwargs,message", [
    ({"mu": np.zeros((2, 2)), "counit": [1.0]}, "structure constant shape"),
    ({"mu": np.zeros((1, 1, 1)), "counit": [1.0, 2.0]}, "Counit has length"),
    ({"mu": np.full((1, 1, 1), np.nan), "counit": [1.0]}, "NaN"),
    ({"mu": np.zeros((9, 9, 9)), "counit": np.ones(9)}, "exceeds"),
])
def test_construction_errors(kwargs, message):
    with pytest.raises(ValueError, match=message):
        FrobeniusAlgebra(**kwargs)


def test_semisimple_rejects_zero_weight():
    with pytest.raises(ValueError, match="idempotent weights"):
        semisimple([1.0, 0.0])


def test_change_basis_rejects_singular_matrix(algebra_theta23):
    with pytest.raises(ValueError, match="singular"):
        change_basis(algebra_theta23, np.ones((2, 2)))


##########################################################
# Generators
##########################################################


def test_generator_shapes_and_euler(algebra_z2):
    for name in GENERATOR_NAMES:
        generator = generator_matrix(algebra_z2, name)
        circles_in, circles_out = generator.arity
        assert generator.matrix.shape == (2 ** circles_out, 2 ** circles_in)
        assert generator.euler == EULER[name]


def test_mul_is_commutative_up_to_swap(algebra_corpus):
    for algebra in algebra_corpus:
        mul = generator_matrix(algebra, "mul").matrix
        swap = generator_matrix(algebra, "swap").matrix
        assert np.max(np.abs(mul @ swap - mul)) <= 1e-12


def test_generator_matrix_errors(algebra_c, broken_algebra):
    with pytest.raises(ValueError, match="Unknown generator"):
        generator_matrix(algebra_c, "pants")
    with pytest.raises(ValueError, match="not a validated"):
        generator_matrix(broken_algebra, "mul")


##########################################################
# Invariants
##########################################################


def test_closed_surfaces_match_semisimple_formula(algebra_c, algebra_z2, algebra_theta23):
    """Tests genus 0 to 3 against Σ θ_i^(1-g) on the named and 20 seeded algebras."""
    rng = np.random.default_rng(41)
    algebras = [algebra_c, algebra_z2, algebra_theta23]
    for i in range(20):
        k = int(rng.integers(1, 5))
        basis = rng.standard_normal((k, k)) + 3 * np.eye(k)
        algebras.append(semisimple(rng.uniform(0.5, 3.0, size=k), basis=basis, name=f"seeded-{i}"))
    for algebra in algebras:
        for genus in (0, 1, 2, 3):
            value = closed_surface_invariant(algebra, genus)
            expected = semisimple_invariant(algebra.theta, genus)
            assert abs(value - expected) <= 1e-9 * max(1.0, abs(expected)), f"{algebra} genus {genus}"
            assert abs(value.imag) <= 1e-9
        assert closed_surface_invariant(algebra, 1) == pytest.approx(algebra.dim)


def test_group_algebra_values(algebra_z2):
    assert closed_surface_invariant(algebra_z2, 0) == pytest.approx(1.0)
    assert closed_surface_invariant(algebra_z2, 1) == pytest.approx(2.0)
    assert closed_surface_invariant(algebra_z2, 2) == pytest.approx(4.0)


def test_semisimple_invariant_rejects_negative_genus():
    with pytest.raises(ValueError, match="genus"):
        semisimple_invariant([1.0], -1)
