import math

import numpy as np
import pytest

from qcskit.models.bord_model import genus_term, parse
from qcskit.models.choi_model import choi_distance
from qcskit.models.frobenius_model import GENERATOR_NAMES, semisimple
from qcskit.models.ms_model import (
    ObjectPolicy,
    build_ms,
    direct_choi,
    functor_axiom_check,
    object_for,
    qcs_morphism_audit,
    scale_audit,
    tensor_gap_demo,
    term_choi,
    trace_out_build,
)
from qcskit.models.qcs_model import QcsDesc, QcsVariant


##########################################################
# Objects and construction
##########################################################


def test_object_for_policies():
    assert object_for(0, 2).variant == QcsVariant.UNIT
    assert object_for(1, 2) == QcsDesc.canonical_d(2)
    tensor = object_for(3, 2)
    assert tensor.variant == QcsVariant.TENSOR
    assert tensor.carrier == 8
    assert tensor.factors[1] == QcsDesc.canonical_d(2)
    assert object_for(3, 2, ObjectPolicy.CANONICAL_D_OF_PRODUCT) == QcsDesc.canonical_d(8)


def test_build_ms_tags_generators_with_policy_objects(algebra_z2):
    ms = build_ms(algebra_z2)
    assert set(ms.generator_chois) == set(GENERATOR_NAMES)
    mul = ms.generator_chois["mul"]
    assert (mul.in_dim, mul.out_dim) == (4, 2)
    assert mul.domain.variant == QcsVariant.TENSOR
    assert ms.generator_chois["cap"].domain.variant == QcsVariant.UNIT

    flat = build_ms(algebra_z2, object_policy=ObjectPolicy.CANONICAL_D_OF_PRODUCT)
    assert flat.generator_chois["mul"].domain == QcsDesc.canonical_d(4)


@pytest.mark.parametrize("lam", [0, -1.0, math.inf, math.nan])
def test_build_ms_invalid_lambda(lam, algebra_c):
    with pytest.raises(ValueError, match="Invalid lambda"):
        build_ms(algebra_c, lam)


def test_euler_rescaling_of_generators(algebra_z2):
    """Tests that lambda multiplies each Choi matrix by lambda^(2χ)."""
    plain, scaled = build_ms(algebra_z2), build_ms(algebra_z2, 0.5)
    for name, chi in (("cap", 1), ("mul", -1), ("swap", 0)):
        expected = plain.generator_chois[name].F.entries * 0.5 ** (2 * chi)
        assert np.allclose(scaled.generator_chois[name].F.entries, expected), name


##########################################################
# Term images and functor axioms
##########################################################


def test_term_choi_matches_direct_choi(algebra_corpus):
    for algebra in algebra_corpus[:3]:
        ms = build_ms(algebra, 0.8)
        for text in ("cap ; comul ; mul ; cup", "comul ; swap ; mul", "(cap * id) ; mul", "mul ; comul"):
            term = parse(text)
            assert choi_distance(term_choi(ms, term), direct_choi(ms, term)) <= 1e-9, (str(algebra), text)


def test_torus_image_scales_by_dimension_squared(algebra_z2):
    image = term_choi(build_ms(algebra_z2), genus_term(1))
    assert image.F.entries[0, 0].real == pytest.approx(4.0)


def test_term_choi_rejects_oversized_terms(algebra_z2):
    with pytest.raises(ValueError, match="needs carrier"):
        term_choi(build_ms(algebra_z2), parse("id * id * id * id"))


def test_functor_axioms_hold(algebra_c, algebra_z2):
    for algebra in (algebra_c, algebra_z2):
        report = functor_axiom_check(build_ms(algebra))
        assert report.passed, report.to_dict()
        assert [c.check for c in report.checks] == ["composition", "monoidality", "identity", "relations", "symmetry"]


def test_functor_axioms_hold_under_both_policies(algebra_theta23):
    for policy in ObjectPolicy:
        report = functor_axiom_check(build_ms(algebra_theta23, 0.5, policy))
        assert report.passed, policy


##########################################################
# Scaling and morphism audits
##########################################################


def test_scale_audit_trivial_algebra(algebra_c):
    audit = scale_audit(algebra_c)
    assert audit.feasible
    assert audit.lo == audit.hi == 0.0
    assert audit.lambda_interval == (1.0, 1.0)
    assert audit.to_dict()["clash"] is None


def test_scale_audit_one_dimensional_weight():
    """Tests C with counit 4: the counit has norm 4 but mul has norm 1, so no lambda works."""
    audit = scale_audit(semisimple([4]))
    assert not audit.feasible
    assert audit.clash == ("mul", "cup")
    assert audit.norms["comul"] == pytest.approx(0.25)
    assert audit.lambda_interval is None


def test_scale_audit_infeasible_for_two_idempotents(algebra_theta11, algebra_theta23):
    audit = scale_audit(algebra_theta11)
    assert not audit.feasible
    assert audit.clash == ("mul", "cap")
    assert audit.norms["cap"] == pytest.approx(math.sqrt(2))
    assert audit.norms["mul"] == pytest.approx(1.0)
    data = audit.to_dict()
    assert data["lambda"] is None and data["log_lambda"] is None
    assert not scale_audit(algebra_theta23).feasible


def test_trivial_theory_is_a_qcs_functor(algebra_c):
    report = qcs_morphism_audit(build_ms(algebra_c), samples=5, budget=10)
    assert report.passed, report.to_dict()
    assert [r.name for r in report.children] == list(GENERATOR_NAMES)


def test_cup_is_not_a_morphism_for_two_idempotents(algebra_theta11):
    """Tests that the counit on C^2 sends a pure state of D(2) to 2, outside Unit."""
    report = qcs_morphism_audit(build_ms(algebra_theta11), samples=5, atoms=["cup", "mul"])
    assert not report.passed
    assert not report.child_named("cup").passed
    assert report.child_named("mul").passed
    assert [r.name for r in report.children] == ["cup", "mul"]


def test_qcs_morphism_audit_unknown_atom(algebra_c):
    with pytest.raises(ValueError, match="Unknown generators: pants"):
        qcs_morphism_audit(build_ms(algebra_c), samples=1, atoms=["cap", "pants"])


##########################################################
# Trace-out and tensor gap
##########################################################


def test_trace_out_equals_euler_rescaling(algebra_z2, algebra_theta23):
    rng = np.random.default_rng(11)
    for i in range(20):
        mu = complex(rng.uniform(0.2, 3.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        algebra = algebra_z2 if i % 2 else algebra_theta23
        ms, report = trace_out_build(algebra, mu, audit=False)
        assert ms.lam == pytest.approx(abs(mu))
        assert report.passed, mu
        assert report.check_named("matches-euler-rescaling").residual <= 1e-12


def test_trace_out_with_audit(algebra_c):
    ms, report = trace_out_build(algebra_c, 1j, samples=3, budget=10)
    assert ms.lam == pytest.approx(1.0)
    assert [r.name for r in report.children] == ["functor-axioms", "qcs-morphisms"]
    assert report.passed, report.to_dict()


def test_trace_out_rejects_zero(algebra_c):
    with pytest.raises(ValueError, match="nonzero"):
        trace_out_build(algebra_c, 0)


def test_tensor_gap_demo():
    report = tensor_gap_demo(pairs=50)
    assert report.passed, report.to_dict()
    assert report.check_named("singlet-pairing").residual <= 1e-12
    assert report.check_named("singlet-in-D4").passed
    assert report.check_named("singlet-not-in-tensor").witness is not None


def test_tensor_gap_demo_fixed_dimension():
    with pytest.raises(ValueError, match="fixed at n = 2"):
        tensor_gap_demo(n=3)
