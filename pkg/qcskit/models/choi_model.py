from dataclasses import dataclass, replace
import logging
from typing import Callable, Optional, Sequence

import numpy as np

from qcskit.models.herm_model import (
    DimensionMismatch,
    HermMat,
    _basis_array,
    hermitize,
    identity,
    interleave_permute,
    kron,
    projector,
)
from qcskit.models.qcs_model import (
    DEFAULT_TOL,
    QcsDesc,
    QcsVariant,
    Verdict,
    hull_membership,
    qcs_membership,
    sample_members,
)
from qcskit.models.report_model import AuditReport, CheckResult
from qcskit.utils.logger import configure_logger
from qcskit.utils.random_utils import get_rng


logger = logging.getLogger(__name__)
configure_logger(logger)


@dataclass(frozen=True, eq=False)
class ChoiMorphism:
    """A linear map H(C^n) -> H(C^m) stored as its Choi matrix on C^n ⊗ C^m.

    Convention: apply(F, c) = tr_1((c^T ⊗ I_m) F), transpose in the computational basis. Under it
    the Choi matrix of c -> Z c Z^† is rank one and positive.

    Attributes:
        F (HermMat): The Choi matrix, carrier n * m.
        in_dim (int): n.
        out_dim (int): m.
        domain (QcsDesc): QCS on C^n the map is claimed to start from (D(n) when omitted).
        codomain (QcsDesc): QCS on C^m (D(m) when omitted).

    """
    F: HermMat
    in_dim: int
    out_dim: int
    domain: Optional[QcsDesc] = None
    codomain: Optional[QcsDesc] = None

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            logger.error(f"Invalid Choi dimensions {self.in_dim} -> {self.out_dim}")
            raise ValueError(f"Invalid Choi dimensions {self.in_dim} -> {self.out_dim}. Must be positive.")
        if self.F.n != self.in_dim * self.out_dim:
            logger.error(f"Choi carrier {self.F.n} is not {self.in_dim}x{self.out_dim}")
            raise DimensionMismatch(f"Choi carrier {self.F.n} does not equal {self.in_dim} x {self.out_dim}")
        if self.domain is None:
            object.__setattr__(self, "domain", QcsDesc.canonical_d(self.in_dim))
        if self.codomain is None:
            object.__setattr__(self, "codomain", QcsDesc.canonical_d(self.out_dim))
        if self.domain.carrier != self.in_dim or self.codomain.carrier != self.out_dim:
            logger.error(f"Domain/codomain carriers {self.domain.carrier}/{self.codomain.carrier} "
                         f"do not match {self.in_dim}/{self.out_dim}")
            raise DimensionMismatch(
                f"Domain/codomain carriers {self.domain.carrier}/{self.codomain.carrier} "
                f"do not match {self.in_dim}/{self.out_dim}"
            )

    def with_objects(self, domain: QcsDesc, codomain: QcsDesc) -> "ChoiMorphism":
        """The same map re-tagged with other domain and codomain descriptions."""
        return replace(self, domain=domain, codomain=codomain)

    @property
    def tensor4(self) -> np.ndarray:
        """F as an array indexed [i, k, j, l] for row (i, k) and column (j, l)."""
        return self.F.entries.reshape(self.in_dim, self.out_dim, self.in_dim, self.out_dim)


@dataclass(frozen=True, eq=False)
class SuperopMatrix:
    """Real m^2 x n^2 matrix of a Hermiticity-preserving map in Hermitian-basis coordinates."""
    matrix: np.ndarray
    in_dim: int
    out_dim: int

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.shape != (self.out_dim ** 2, self.in_dim ** 2):
            logger.error(f"Superoperator shape {matrix.shape} does not match {self.in_dim} -> {self.out_dim}")
            raise DimensionMismatch(
                f"Superoperator shape {matrix.shape} does not match ({self.out_dim ** 2}, {self.in_dim ** 2})"
            )
        object.__setattr__(self, "matrix", matrix)


##########################################################
# Application and conversions
##########################################################


def choi_apply(F: ChoiMorphism, c: HermMat) -> HermMat:
    """Applies the morphism: tr_1((c^T ⊗ I) F).

    Raises:
        DimensionMismatch: If c is not on the input carrier.
        ArithmeticError: If the result drifts from Hermitian by more than 1e-12 (relative).

    """
    if c.n != F.in_dim:
        logger.error(f"Input carrier {c.n} does not match Choi input {F.in_dim}")
        raise DimensionMismatch(f"Input carrier {c.n} does not match Choi input dimension {F.in_dim}")
    out = np.einsum("pi,pkil->kl", c.entries, F.tensor4)
    drift = float(np.max(np.abs(out - out.conj().T)))
    if drift > 1e-12 * max(1.0, float(np.max(np.abs(out)))):
        logger.error(f"Choi image is not Hermitian (drift {drift:.3e})")
        raise ArithmeticError(f"Choi image is not Hermitian (drift {drift:.3e})")
    return hermitize(out)


def choi_of_conjugation(Z, domain: Optional[QcsDesc] = None, codomain: Optional[QcsDesc] = None) -> ChoiMorphism:
    """Choi matrix of c -> Z c Z^† for a complex m x n matrix Z (positive, rank one)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if not np.all(np.isfinite(Z)):
        logger.error("Conjugation matrix has non-finite entries")
        raise ValueError("Conjugation matrix has non-finite entries")
    m, n = Z.shape
    v = Z.T.reshape(-1)
    return ChoiMorphism(hermitize(np.outer(v, v.conj())), n, m, domain, codomain)


def identity_choi(n: int, domain: Optional[QcsDesc] = None) -> ChoiMorphism:
    """The identity morphism Σ E_ij ⊗ E_ij on the given object (D(n) by default)."""
    return choi_of_conjugation(np.eye(n), domain, domain)


def _choi_from_images(images: np.ndarray, n: int, m: int) -> HermMat:
    """Choi matrix from the images (stacked [i, k, l]) of the input basis elements."""
    basis_in = _basis_array(n)
    f4 = np.einsum("iqp,ikl->pkql", basis_in, images)
    return hermitize(f4.reshape(n * m, n * m))


def choi_of_map(fn: Callable[[HermMat], HermMat], n: int, m: int,
                domain: Optional[QcsDesc] = None, codomain: Optional[QcsDesc] = None) -> ChoiMorphism:
    """Choi matrix of any linear, Hermiticity-preserving map given as a callable.

    The map is sampled on the Hermitian basis of H(C^n); linearity is assumed, not checked.
    """
    images = []
    for b in _basis_array(n):
        image = fn(HermMat(b))
        if image.n != m:
            logger.error(f"Map returned carrier {image.n}, expected {m}")
            raise DimensionMismatch(f"Map returned a matrix on carrier {image.n}, expected {m}")
        images.append(image.entries)
    return ChoiMorphism(_choi_from_images(np.array(images), n, m), n, m, domain, codomain)


def superop_of_choi(F: ChoiMorphism) -> SuperopMatrix:
    """M[j, i] = tr(b_out_j · apply(F, b_in_i))."""
    images = np.einsum("ipq,pkql->ikl", _basis_array(F.in_dim), F.tensor4)
    matrix = np.real(np.einsum("jlk,ikl->ji", _basis_array(F.out_dim), images))
    return SuperopMatrix(matrix, F.in_dim, F.out_dim)


def choi_of_superop(M: SuperopMatrix, domain: Optional[QcsDesc] = None,
                    codomain: Optional[QcsDesc] = None) -> ChoiMorphism:
    """Inverse of superop_of_choi."""
    n, m = M.in_dim, M.out_dim
    images = np.einsum("ji,jkl->ikl", M.matrix, _basis_array(m))
    return ChoiMorphism(_choi_from_images(images, n, m), n, m, domain, codomain)


def is_completely_positive(F: ChoiMorphism, tol: float = DEFAULT_TOL) -> bool:
    """F ⪰ 0 (reported by audits, never enforced)."""
    return F.F.spectrum.is_psd(tol)


##########################################################
# Composition and tensor
##########################################################


def compose_choi(F2: ChoiMorphism, F1: ChoiMorphism) -> ChoiMorphism:
    """F2 ∘ F1, computed through superoperator multiplication.

    Raises:
        DimensionMismatch: If F1's output carrier is not F2's input carrier.
        ValueError: If codomain(F1) and domain(F2) are different descriptions.

    """
    if F1.out_dim != F2.in_dim:
        logger.error(f"Cannot compose: {F1.out_dim} -> but {F2.in_dim} <-")
        raise DimensionMismatch(f"Cannot compose: F1 outputs carrier {F1.out_dim}, F2 expects {F2.in_dim}")
    if F1.codomain != F2.domain:
        logger.error(f"Cannot compose: codomain {F1.codomain} differs from domain {F2.domain}")
        raise ValueError(f"QCS description mismatch: codomain {F1.codomain} vs domain {F2.domain}")
    product = superop_of_choi(F2).matrix @ superop_of_choi(F1).matrix
    return choi_of_superop(SuperopMatrix(product, F1.in_dim, F2.out_dim), F1.domain, F2.codomain)


def tensor_choi(F1: ChoiMorphism, F2: ChoiMorphism) -> ChoiMorphism:
    """Choi matrix of c1 ⊗ c2 -> apply(F1, c1) ⊗ apply(F2, c2); objects become tensor descriptions."""
    n1, m1, n2, m2 = F1.in_dim, F1.out_dim, F2.in_dim, F2.out_dim
    F = interleave_permute(kron(F1.F, F2.F), (n1, m1, n2, m2))
    return ChoiMorphism(F, n1 * n2, m1 * m2,
                        QcsDesc.tensor_of(F1.domain, F2.domain),
                        QcsDesc.tensor_of(F1.codomain, F2.codomain))


def choi_distance(F1: ChoiMorphism, F2: ChoiMorphism) -> float:
    """Largest entrywise difference of two Choi matrices on the same carriers."""
    if (F1.in_dim, F1.out_dim) != (F2.in_dim, F2.out_dim):
        raise DimensionMismatch(f"Choi shapes differ: {F1.in_dim}->{F1.out_dim} vs {F2.in_dim}->{F2.out_dim}")
    return float(np.max(np.abs(F1.F.entries - F2.F.entries)))


##########################################################
# Hom-membership audit
##########################################################


def default_anchors(desc: QcsDesc) -> list[HermMat]:
    """Deterministic members of a QCS tried before random samples.

    Canonical sets use the basis projectors (and I for D), tensors the products of factor
    anchors, generated sets their generators, the unit its top point 1.
    """
    n = desc.carrier
    if desc.variant == QcsVariant.D:
        return [projector(np.eye(n)[i]) for i in range(n)] + [identity(n)]
    if desc.variant == QcsVariant.P:
        return [projector(np.eye(n)[i]) for i in range(n)]
    if desc.variant == QcsVariant.UNIT:
        return [identity(1)]
    if desc.variant == QcsVariant.GENERATED:
        return list(desc.generators)
    if desc.variant == QcsVariant.TENSOR:
        left, right = desc.factors
        return [kron(a, b) for a in default_anchors(left) for b in default_anchors(right)]
    return []


def _image_check(F: ChoiMorphism, points: Sequence[HermMat], check: CheckResult, label: str,
                 tol: float, budget: int, seed: int) -> None:
    """Tests every image against the codomain, stopping at the first Out."""
    for i, c in enumerate(points):
        image = choi_apply(F, c)
        verdict = qcs_membership(image, F.codomain, tol=tol, budget=budget, seed=seed)
        if verdict.answer == Verdict.OUT:
            check.passed = False
            check.unresolved = False
            check.witness = verdict.witness
            check.point = c
            check.residual = max(-verdict.pairing, verdict.pairing - 1.0)
            check.notes.append(f"{label} {i}: image pairs to {verdict.pairing:.6g} with the witness "
                               f"({verdict.side}, {verdict.certificate})")
            return
        if verdict.answer == Verdict.UNRESOLVED and check.passed:
            check.passed = False
            check.unresolved = True
            check.notes.append(f"{label} {i}: codomain membership unresolved within budget")


def hom_membership_audit(F: ChoiMorphism, samples: int = 500, seed: int = 0,
                         anchors: Optional[Sequence[HermMat]] = None, budget: int = 40,
                         tol: float = DEFAULT_TOL) -> AuditReport:
    """Checks that F maps its domain into its codomain.

    Generator images are checked first for generated domains (necessary, and sufficient for the
    hull of S ∪ {0} but not for all of the bipolar), then the anchors, then seeded samples of the
    domain. For generated domains the report records the confidence tier reached:
    generator-verified, hull-verified (hull samples pass) or sampled-bipolar-verified (samples
    of the bipolar outside the hull pass too).

    Args:
        F (ChoiMorphism): The morphism, with domain and codomain set.
        samples (int): Number of random domain points.
        seed (int): Sampling seed.
        anchors (Sequence[HermMat] | None): Points tried first; `default_anchors(domain)` when None.
        budget (int): Cutting-plane budget for tensor codomains.
        tol (float): Membership tolerance.

    Returns:
        AuditReport: Checks "generator-images" (generated domains only) and "sampled-images".

    """
    if samples < 0:
        logger.error(f"Invalid sample count: {samples}")
        raise ValueError(f"Invalid sample count: {samples}. Must be non-negative.")
    rng = get_rng(seed)
    report = AuditReport("hom-membership")
    report.notes.append(f"{F.domain} -> {F.codomain}")
    logger.info(f"Hom-membership audit {F.domain} -> {F.codomain} ({samples} samples)")

    generated = F.domain.variant == QcsVariant.GENERATED
    if generated:
        check = report.add(CheckResult("generator-images", True))
        check.notes.append("necessary; sufficient for the hull of S ∪ {0} but not for all of ∼∼S")
        _image_check(F, F.domain.generators, check, "generator", tol, budget, seed)

    anchor_points = list(default_anchors(F.domain) if anchors is None else anchors)
    sampled = sample_members(F.domain, rng, samples)
    check = report.add(CheckResult("sampled-images", True))
    _image_check(F, anchor_points, check, "anchor", tol, budget, seed)
    if check.passed:
        _image_check(F, sampled, check, "sample", tol, budget, seed)
    check.notes.append(f"{len(anchor_points)} anchors, {len(sampled)} samples")

    if generated and report.passed:
        outside = [c for c in sampled if not hull_membership(c, F.domain.generators, tol)]
        tier = "sampled-bipolar-verified" if outside else "hull-verified"
        report.notes.append(f"tier: {tier} ({len(outside)} samples outside the hull)")
    elif generated and report.check_named("generator-images").passed:
        report.notes.append("tier: generator-verified")

    logger.info(f"Hom-membership audit finished: {report.status}")
    return report
