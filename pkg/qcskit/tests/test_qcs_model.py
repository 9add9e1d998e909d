import numpy as np
import pytest

from qcskit.models.herm_model import (
    DimensionMismatch,
    HermMat,
    diag,
    identity,
    inner,
    kron,
    projector,
    singlet_projector,
    swap_operator,
    zeros,
)
from qcskit.models.qcs_model import (
    HEURISTIC_SEPARATION_NOTE,
    MembershipVerdict,
    QcsDesc,
    QcsVariant,
    Verdict,
    bipolar_membership,
    canonical_membership,
    hull_membership,
    is_polar_pair,
    partial_transpose,
    polar_membership,
    polar_witness,
    qcs_axiom_suite,
    qcs_membership,
    sample_members,
    tensor_membership,
    unit_object_audit,
    _Separation,
)
from qcskit.utils.random_utils import get_rng, random_hermitian, random_in_d, random_in_p


@pytest.fixture
def d2():
    """Fixture for the canonical space D(C^2).
    """
    return QcsDesc.canonical_d(2)


@pytest.fixture
def basis_generated():
    """Fixture for the space generated by the two diagonal projectors on C^2.
    """
    return QcsDesc.generated([diag(1, 0), diag(0, 1)])


##########################################################
# Descriptions
##########################################################


def test_description_equality_and_rendering(d2):
    assert d2 == QcsDesc.canonical_d(2)
    assert d2 != QcsDesc.canonical_p(2)
    assert QcsDesc.generated([diag(1, 0)]) == QcsDesc.generated([diag(1, 0)])
    assert QcsDesc.generated([diag(1, 0)]) != QcsDesc.generated([diag(0, 1)])
    assert str(QcsDesc.tensor_of(d2, QcsDesc.canonical_p(3))) == "(D(2) ⊗ P(3))"
    assert QcsDesc.tensor_of(d2, d2).carrier == 4


def test_description_rejects_bad_inputs(caplog):
    with pytest.raises(ValueError, match="Invalid carrier dimension"):
        QcsDesc.canonical_d(0)
    with pytest.raises(ValueError, match="nonempty"):
        QcsDesc.generated([])
    with pytest.raises(DimensionMismatch, match="mixed carrier"):
        QcsDesc.generated([identity(1), identity(2)])
    assert "mixed carrier" in caplog.text


##########################################################
# Canonical polarity
##########################################################


def test_canonical_sets_are_polar_on_samples(rng):
    """Tests 1000 seeded pairs f ∈ D(n), g ∈ P(n) for n in 1..4 for 0 <= tr(fg) <= 1."""
    violations = 0
    for n in (1, 2, 3, 4):
        for _ in range(250):
            f, g = random_in_d(rng, n), random_in_p(rng, n)
            violations += not is_polar_pair(f, g, 1e-9)
    assert violations == 0


@pytest.mark.parametrize("which,opposite", [("D", "P"), ("P", "D")])
def test_canonical_non_members_have_polar_witnesses(rng, which, opposite):
    """Tests 200 seeded non-members: each Out verdict carries a witness in the opposite set."""
    found = 0
    while found < 200:
        n = int(rng.integers(1, 5))
        f = random_hermitian(rng, n, scale=2.0)
        verdict = canonical_membership(f, which)
        if verdict.is_in:
            continue
        found += 1
        assert verdict.answer == Verdict.OUT
        assert abs(verdict.pairing - inner(f, verdict.witness)) <= 1e-9
        assert verdict.pairing < -1e-9 or verdict.pairing > 1 + 1e-9
        assert canonical_membership(verdict.witness, opposite).is_in, "The witness should lie in the polar set."


def test_polar_witness_cases():
    """Tests the three witness kinds: negative eigenvector, top eigenprojector and identity."""
    negative = diag(0.5, -0.25)
    assert inner(negative, polar_witness(negative, "D")) == pytest.approx(-0.25)
    large = diag(2.0, 0.5)
    assert inner(large, polar_witness(large, "D")) == pytest.approx(2.0)
    heavy = diag(0.75, 0.75)
    assert np.allclose(polar_witness(heavy, "P").entries, np.eye(2))
    assert inner(heavy, polar_witness(heavy, "P")) == pytest.approx(1.5)


def test_polar_witness_rejects_members():
    with pytest.raises(ValueError, match="member"):
        polar_witness(diag(0.5, 0.5), "D")


def test_canonical_membership_rejects_unknown_space():
    with pytest.raises(ValueError):
        canonical_membership(identity(2), "generated")


def test_is_polar_pair_rejects_negative_tolerance():
    with pytest.raises(ValueError, match="tolerance"):
        is_polar_pair(identity(1), identity(1), -1.0)


##########################################################
# Finite generator sets
##########################################################


def test_polar_membership_reports_first_violating_generator():
    generators = [diag(1, 0), diag(0, 1)]
    assert polar_membership(diag(0.5, 0.5), generators).is_in
    verdict = polar_membership(diag(0.5, 2.0), generators)
    assert verdict.is_out
    assert np.allclose(verdict.witness.entries, diag(0, 1).entries)
    assert verdict.pairing == pytest.approx(2.0)
    assert verdict.side == "above"


def test_polar_is_antitone():
    """Tests S ⊆ T implies ∼T ⊆ ∼S on 500 seeded nested pairs with carriers of dimension 1 and 2."""
    rng = get_rng(17)
    inside_larger = 0
    for trial in range(500):
        n = 1 + trial % 2
        small = [random_hermitian(rng, n, scale=rng.uniform(0.1, 2.0)) for _ in range(int(rng.integers(1, 4)))]
        large = small + [random_hermitian(rng, n, scale=rng.uniform(0.1, 2.0)) for _ in range(int(rng.integers(1, 3)))]
        candidates = sample_members(QcsDesc.polar_of(large), rng, 2) + [random_hermitian(rng, n, scale=0.3)]
        for g in candidates:
            if polar_membership(g, large).is_in:
                inside_larger += 1
                assert polar_membership(g, small).is_in, f"trial {trial}: g in ∼T but not in ∼S"
    assert inside_larger >= 1000, "Each trial should contribute its two polar samples."


def test_generators_lie_in_their_bipolar():
    """Tests extensivity on 100 seeded generator sets with carriers of dimension <= 2."""
    rng = np.random.default_rng(99)
    for _ in range(100):
        n = int(rng.integers(1, 3))
        generators = [random_hermitian(rng, n) for _ in range(int(rng.integers(1, 5)))]
        for s in generators:
            verdict = bipolar_membership(s, generators)
            assert verdict.is_in, f"generator not in its bipolar: {verdict}"
            assert verdict.certificate == "lp-exact"


def test_bipolar_out_witness_is_polar_and_violates(generators_square):
    f = diag(1.5, 0.0)
    verdict = bipolar_membership(f, generators_square)
    assert verdict.is_out
    assert polar_membership(verdict.witness, generators_square).is_in, "The witness should lie in the polar of S."
    assert abs(inner(f, verdict.witness) - verdict.pairing) <= 1e-9
    assert verdict.pairing > 1


def test_bipolar_out_from_unbounded_polar():
    """Tests a witness taken from a recession ray when the polar is unbounded."""
    generators = [diag(1, 0)]
    f = diag(0.5, 0.5)
    verdict = bipolar_membership(f, generators)
    assert verdict.is_out
    assert polar_membership(verdict.witness, generators).is_in
    assert verdict.pairing < 0 or verdict.pairing > 1


def test_lineality_puts_bipolar_beyond_the_hull():
    """Tests S = {f, -f}: 3f is in the bipolar (a full line) but not in the hull of S ∪ {0}."""
    f = HermMat(np.array([[1.0, 0.5], [0.5, -1.0]]))
    generators = [f, -f]
    assert bipolar_membership(f * 3.0, generators).is_in
    assert not hull_membership(f * 3.0, generators)
    assert hull_membership(f * 0.5, generators)


def test_lp_oracle_rejects_large_carriers():
    with pytest.raises(ValueError, match="LP oracle limit"):
        bipolar_membership(identity(9), [identity(9)])


def test_bipolar_rejects_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        bipolar_membership(identity(3), [identity(2)])


##########################################################
# Tensor products
##########################################################


def test_partial_transpose_of_product(rng):
    c, d = random_hermitian(rng, 2), random_hermitian(rng, 3)
    expected = kron(c, HermMat(d.entries.T))
    assert np.allclose(partial_transpose(kron(c, d), (2, 3)).entries, expected.entries, atol=1e-12)


def test_singlet_is_outside_the_tensor_of_canonical_spaces(rng, d2):
    """Tests the partial-transpose certificate: witness SWAP/2, pairing -1/2, polar to all products."""
    verdict = tensor_membership(singlet_projector(), d2, d2)
    assert verdict.is_out
    assert verdict.certificate == "partial-transpose witness"
    assert verdict.pairing == pytest.approx(-0.5, abs=1e-12)
    assert np.allclose(verdict.witness.entries, 0.5 * swap_operator(2).entries, atol=1e-12)
    for _ in range(50):
        assert is_polar_pair(kron(random_in_d(rng, 2), random_in_d(rng, 2)), verdict.witness)


def test_product_of_members_is_in_the_tensor(rng, d2):
    f = kron(random_in_d(rng, 2), random_in_d(rng, 2))
    verdict = tensor_membership(f, d2, d2, budget=10)
    assert verdict.is_in
    assert verdict.relative_to_outer_approximation


def test_oversized_product_is_out_by_product_witness(d2):
    f = kron(projector([1, 0]), projector([0, 1])) * 2.0
    verdict = tensor_membership(f, d2, d2)
    assert verdict.is_out
    assert verdict.pairing == pytest.approx(2.0)


def test_tensor_of_generated_factors_is_exact(basis_generated):
    inside = kron(diag(1, 0), diag(0, 1))
    verdict = tensor_membership(inside, basis_generated, basis_generated)
    assert verdict.is_in
    assert verdict.certificate == "lp-exact (generator products)"
    assert tensor_membership(inside * 2.0, basis_generated, basis_generated).is_out


def test_tensor_out_from_separation_search_is_flagged_heuristic(mocker, d2, basis_generated):
    """Tests that an Out resting on the product search over two canonical factors carries a note."""
    mocker.patch("qcskit.models.qcs_model._lp_candidate", return_value=identity(4) * 2.0)
    mocker.patch("qcskit.models.qcs_model._separate", return_value=_Separation(0.0, 1.0, []))
    f = identity(4) * 0.25

    verdict = tensor_membership(f, d2, d2, budget=3)
    assert verdict.is_out
    assert verdict.certificate.startswith("cutting-plane")
    assert verdict.notes == (HEURISTIC_SEPARATION_NOTE,)
    assert verdict.pairing == pytest.approx(2.0)

    verdict = tensor_membership(f, basis_generated, d2, budget=3)
    assert verdict.is_out
    assert verdict.notes == ()


def test_tensor_membership_input_errors(d2):
    with pytest.raises(ValueError, match="Invalid budget"):
        tensor_membership(identity(4), d2, d2, budget=0)
    with pytest.raises(DimensionMismatch):
        tensor_membership(identity(3), d2, d2)
    with pytest.raises(ValueError, match="Unsupported tensor factor"):
        tensor_membership(identity(4), QcsDesc.polar_of([identity(2)]), d2)


##########################################################
# Dispatch and sampling
##########################################################


def test_qcs_membership_dispatch(d2, basis_generated):
    assert qcs_membership(diag(0.5, 0.5), d2).is_in
    assert qcs_membership(diag(0.5, 0.5), basis_generated).is_in
    assert qcs_membership(diag(0.5, 0.5), QcsDesc.polar_of([diag(1, 0)])).is_in
    assert qcs_membership(HermMat([[0.5]]), QcsDesc.unit()).is_in
    out = qcs_membership(HermMat([[2.0]]), QcsDesc.unit())
    assert out.is_out and out.certificate == "interval"
    assert qcs_membership(singlet_projector(), QcsDesc.tensor_of(d2, d2)).is_out
    with pytest.raises(DimensionMismatch):
        qcs_membership(identity(3), d2)


@pytest.mark.parametrize("desc", [
    QcsDesc.canonical_d(2),
    QcsDesc.canonical_p(3),
    QcsDesc.unit(),
    QcsDesc.generated([diag(1, 0), HermMat(np.array([[0.5, 0.5], [0.5, 0.5]]))]),
    QcsDesc.polar_of([diag(1, 0), diag(0, 1)]),
])
def test_sampled_members_are_members(rng, desc):
    for f in sample_members(desc, rng, 12):
        assert qcs_membership(f, desc).is_in


##########################################################
# Audits
##########################################################


def test_axiom_suite_passes(generators_square):
    report = qcs_axiom_suite(generators_square, samples=20, seed=3)
    assert report.passed, report.to_dict()
    assert [c.check for c in report.checks] == ["extensivity", "polar-idempotence", "scaling-closure", "convexity"]


def test_axiom_suite_on_zero_generator():
    """Tests S = {0}: every point is polar to 0 and the bipolar is {0}, so each check passes."""
    report = qcs_axiom_suite([zeros(2)], samples=40, seed=5)
    outcomes = {c.check: c.passed for c in report.checks}
    assert outcomes == {"extensivity": True, "polar-idempotence": True, "scaling-closure": True, "convexity": True}
    assert "40 of 40 sampled points were in the polar" in report.check_named("polar-idempotence").notes
    assert not bipolar_membership(diag(0.1, 0), [zeros(2)]).is_in


def test_axiom_suite_on_identity_and_projector():
    report = qcs_axiom_suite([identity(2), diag(1, 0)], samples=40, seed=6)
    outcomes = {c.check: c.passed for c in report.checks}
    assert outcomes == {"extensivity": True, "polar-idempotence": True, "scaling-closure": True, "convexity": True}
    assert report.passed
    assert all(c.witness is None for c in report.checks)


def test_axiom_suite_reports_failing_checks(mocker):
    """Tests that a bipolar oracle rejecting everything fails every check built on it."""
    rejected = MembershipVerdict(Verdict.OUT, witness=identity(2), pairing=2.0, side="above", certificate="lp-exact")
    mocker.patch("qcskit.models.qcs_model.bipolar_membership", return_value=rejected)
    report = qcs_axiom_suite([identity(2), diag(1, 0)], samples=8, seed=6)
    outcomes = {c.check: c.passed for c in report.checks}
    assert outcomes == {"extensivity": False, "polar-idempotence": True, "scaling-closure": False, "convexity": False}
    assert not report.passed
    assert np.allclose(report.check_named("extensivity").witness.entries, np.eye(2))


def test_unit_object_audit():
    """Tests that R+ fails the double-polar law while [0, 1] is self-polar."""
    report = unit_object_audit()
    assert report.passed
    witness = report.check_named("bipolar-of-nonnegative-reals-differs").witness
    assert np.allclose(witness.entries, [[-1.0]])
    assert report.check_named("unit-interval-bipolar-lp").passed
