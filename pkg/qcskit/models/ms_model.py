from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import Optional, Sequence

import numpy as np

from qcskit.models.bord_model import (
    RELATIONS,
    Atom,
    BordTerm,
    Seq,
    _postorder,
    euler_char,
    evaluate,
    parse,
    to_text,
)
from qcskit.models.choi_model import (
    ChoiMorphism,
    choi_apply,
    choi_distance,
    choi_of_conjugation,
    choi_of_map,
    compose_choi,
    default_anchors,
    hom_membership_audit,
    identity_choi,
    tensor_choi,
)
from qcskit.models.frobenius_model import EULER, GENERATOR_NAMES, FrobeniusAlgebra, generator_matrix
from qcskit.models.herm_model import (
    MAX_DIM,
    HermMat,
    identity,
    inner,
    kron,
    partial_trace,
    projector,
    singlet_projector,
    swap_operator,
)
from qcskit.models.qcs_model import (
    DEFAULT_TOL,
    QcsDesc,
    QcsVariant,
    canonical_membership,
    tensor_membership,
)
from qcskit.models.report_model import AuditReport, CheckResult
from qcskit.utils.logger import configure_logger
from qcskit.utils.random_utils import get_rng, random_in_d


logger = logging.getLogger(__name__)
configure_logger(logger)


class ObjectPolicy(str, Enum):
    """How j circles are sent to a QCS: the tensor of j copies of D(k), or D(k^j)."""
    TENSOR_OF_COMPONENTS = "TensorOfComponents"
    CANONICAL_D_OF_PRODUCT = "CanonicalDOfProduct"


def object_for(circles: int, k: int, policy: ObjectPolicy = ObjectPolicy.TENSOR_OF_COMPONENTS) -> QcsDesc:
    """The QCS assigned to a disjoint union of circles (Unit for the empty union)."""
    if circles == 0:
        return QcsDesc.unit()
    if circles == 1 or policy == ObjectPolicy.CANONICAL_D_OF_PRODUCT:
        return QcsDesc.canonical_d(k ** circles)
    desc = QcsDesc.canonical_d(k)
    for _ in range(circles - 1):
        desc = QcsDesc.tensor_of(desc, QcsDesc.canonical_d(k))
    return desc


@dataclass(frozen=True, eq=False)
class MsTqft:
    """A mixed-state TQFT: the pure theory of `algebra` post-composed with D(·).

    Attributes:
        algebra (FrobeniusAlgebra): The validated Frobenius algebra.
        lam (float): Euler rescaling; generator g is sent to conjugation by lam^χ(g) Z(g).
        object_policy (ObjectPolicy): Assignment of QCSs to circle unions.
        generator_chois (dict[str, ChoiMorphism]): Image of each generating bordism.

    """
    algebra: FrobeniusAlgebra
    lam: float
    object_policy: ObjectPolicy
    generator_chois: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.algebra.dim

    def object_for(self, circles: int) -> QcsDesc:
        return object_for(circles, self.k, self.object_policy)


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0:
        logger.error(f"Invalid lambda: {lam}")
        raise ValueError(f"Invalid lambda: {lam}. Must be a positive finite real.")
    return lam


def _assemble(algebra: FrobeniusAlgebra, lam: float, policy: ObjectPolicy, matrices: dict) -> MsTqft:
    k = algebra.dim
    chois = {}
    for name, Z in matrices.items():
        circles_in, circles_out = _arity(name)
        chois[name] = choi_of_conjugation(Z, object_for(circles_in, k, policy), object_for(circles_out, k, policy))
    return MsTqft(algebra, lam, ObjectPolicy(policy), chois)


def _arity(name: str) -> tuple[int, int]:
    return Atom(name).boundary


def build_ms(algebra: FrobeniusAlgebra, lam: float = 1.0,
             object_policy: ObjectPolicy = ObjectPolicy.TENSOR_OF_COMPONENTS) -> MsTqft:
    """Builds every generator image conj(lam^χ(g) Z(g)); runs no audits.

    Raises:
        ValueError: If lam is not positive and finite, or the algebra fails validation.

    """
    lam = _check_lambda(lam)
    matrices = {name: lam ** EULER[name] * generator_matrix(algebra, name).matrix for name in GENERATOR_NAMES}
    logger.info(f"Built MS-TQFT for {algebra} (lambda={lam:g}, policy={ObjectPolicy(object_policy).value})")
    return _assemble(algebra, lam, object_policy, matrices)


##########################################################
# Term images
##########################################################


def _check_choi_size(ms: MsTqft, term: BordTerm) -> None:
    for node, _ in _postorder(term):
        circles_in, circles_out = node.boundary
        if ms.k ** (circles_in + circles_out) > MAX_DIM:
            logger.error(f"Choi matrix of {to_text(node)} exceeds carrier {MAX_DIM}")
            raise ValueError(f"Choi matrix of a subterm needs carrier {ms.k ** (circles_in + circles_out)} > {MAX_DIM}")


def term_choi(ms: MsTqft, term: BordTerm) -> ChoiMorphism:
    """Image of a term built from generator images: ";" composes, "*" tensors.

    Every intermediate result is re-tagged with the policy objects of its boundary.
    """
    _check_choi_size(ms, term)
    values: dict[int, ChoiMorphism] = {}
    for node, _ in _postorder(term):
        if isinstance(node, Atom):
            values[id(node)] = ms.generator_chois[node.name]
            continue
        first = values.pop(id(node.left))
        second = values.pop(id(node.right))
        image = compose_choi(second, first) if isinstance(node, Seq) else tensor_choi(first, second)
        circles_in, circles_out = node.boundary
        values[id(node)] = image.with_objects(ms.object_for(circles_in), ms.object_for(circles_out))
    return values[id(term)]


def direct_choi(ms: MsTqft, term: BordTerm) -> ChoiMorphism:
    """conj(lam^χ(t) · Z(t)) with Z(t) the pure theory's matrix of the whole term."""
    _check_choi_size(ms, term)
    circles_in, circles_out = term.boundary
    Z = ms.lam ** euler_char(term) * evaluate(term, ms.algebra)
    return choi_of_conjugation(Z, ms.object_for(circles_in), ms.object_for(circles_out))


##########################################################
# Functor axioms
##########################################################


COMPOSABLE_PAIRS = (
    ("cap", "cup"),
    ("cap", "comul"),
    ("comul", "mul"),
    ("mul", "comul"),
    ("mul", "cup"),
    ("swap", "mul"),
    ("comul", "swap"),
    ("id", "id"),
    ("cap * cap", "mul"),
    ("id * cap", "mul"),
    ("comul", "cup * id"),
    ("swap", "swap"),
)

TENSOR_PAIRS = (
    ("id", "id"),
    ("cap", "id"),
    ("id", "cup"),
    ("cup", "cap"),
    ("mul", "id"),
    ("cap", "swap"),
    ("comul", "cap"),
)


def functor_axiom_check(ms: MsTqft, tol: float = DEFAULT_TOL, seed: int = 0) -> AuditReport:
    """Composition, monoidality, identity, relations and symmetry on Choi matrices.

    Entries whose Choi matrix would exceed the carrier limit are skipped with a note.
    """
    report = AuditReport("functor-axioms")
    logger.info(f"Checking functor axioms for {ms.algebra} (lambda={ms.lam:g})")

    def skipped(check: CheckResult, label: str, error: ValueError) -> None:
        check.notes.append(f"skipped {label}: {error}")
        logger.warning(f"Functor axiom entry {label} skipped: {error}")

    check = report.add(CheckResult("composition", True))
    for first, second in COMPOSABLE_PAIRS:
        label = f"({first}) ; ({second})"
        try:
            whole = parse(label)
            built = compose_choi(term_choi(ms, parse(second)), term_choi(ms, parse(first)))
            residual = max(choi_distance(direct_choi(ms, whole), built),
                           choi_distance(term_choi(ms, whole), built))
        except ValueError as e:
            skipped(check, label, e)
            continue
        check.residual = max(check.residual, residual)
    check.passed = check.residual <= tol

    check = report.add(CheckResult("monoidality", True))
    for first, second in TENSOR_PAIRS:
        label = f"({first}) * ({second})"
        try:
            built = tensor_choi(term_choi(ms, parse(first)), term_choi(ms, parse(second)))
            residual = choi_distance(direct_choi(ms, parse(label)), built)
        except ValueError as e:
            skipped(check, label, e)
            continue
        check.residual = max(check.residual, residual)
    check.passed = check.residual <= tol

    check = report.add(CheckResult("identity", True))
    for text, circles in (("id", 1), ("id * id", 2)):
        try:
            image = term_choi(ms, parse(text))
            residual = choi_distance(image, identity_choi(ms.k ** circles))
        except ValueError as e:
            skipped(check, text, e)
            continue
        check.residual = max(check.residual, residual)
    check.passed = check.residual <= tol

    check = report.add(CheckResult("relations", True))
    for name, sides in RELATIONS.items():
        terms = [parse(text) for text in sides]
        if len({euler_char(t) for t in terms}) != 1:
            check.passed = False
            check.notes.append(f"{name}: Euler characteristics differ")
        try:
            images = [term_choi(ms, t) for t in terms]
        except ValueError as e:
            skipped(check, name, e)
            continue
        residual = max(choi_distance(images[0], other) for other in images[1:])
        check.residual = max(check.residual, residual)
        if residual > tol:
            check.notes.append(f"{name}: residual {residual:.3e}")
    check.passed = check.passed and check.residual <= tol

    check = report.add(CheckResult("symmetry", True))
    try:
        swap = term_choi(ms, parse("swap"))
        rng = get_rng(seed)
        for _ in range(10):
            c, d = random_in_d(rng, ms.k), random_in_d(rng, ms.k)
            image = choi_apply(swap, kron(c, d))
            check.residual = max(check.residual, float(np.max(np.abs(image.entries - kron(d, c).entries))))
        check.passed = check.residual <= tol
    except ValueError as e:
        skipped(check, "swap", e)

    logger.info(f"Functor axioms for {ms.algebra}: {report.status}")
    return report


##########################################################
# Scaling
##########################################################


@dataclass
class ScaleAudit:
    """Feasible interval of t = log(lambda) for which every ‖lambda^χ Z(g)‖_op <= 1.

    Attributes:
        norms (dict[str, float]): Operator norm of each unscaled generator.
        lo (float), hi (float): Bounds on t (lo <= t <= hi when feasible).
        feasible (bool): Whether the interval is nonempty.
        clash (tuple[str, str] | None): The generators whose constraints cross when infeasible.

    """
    norms: dict
    lo: float
    hi: float
    feasible: bool
    clash: Optional[tuple] = None

    @property
    def lambda_interval(self) -> Optional[tuple[float, float]]:
        if not self.feasible:
            return None
        return math.exp(self.lo), math.exp(self.hi)

    def to_dict(self) -> dict:
        return {
            "norms": {name: float(v) for name, v in self.norms.items()},
            "feasible": self.feasible,
            "log_lambda": [_finite_or_none(self.lo), _finite_or_none(self.hi)] if self.feasible else None,
            "lambda": [_finite_or_none(v) for v in self.lambda_interval] if self.feasible else None,
            "clash": list(self.clash) if self.clash else None,
        }


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def scale_audit(algebra: FrobeniusAlgebra) -> ScaleAudit:
    """One-variable feasibility: χ=+1 gives t <= -log‖Z‖, χ=-1 gives t >= log‖Z‖, χ=0 needs ‖Z‖ <= 1."""
    norms = {name: float(np.linalg.norm(generator_matrix(algebra, name).matrix, 2)) for name in GENERATOR_NAMES}
    lo, hi = -math.inf, math.inf
    lo_name = hi_name = None
    for name in GENERATOR_NAMES:
        norm, chi = norms[name], EULER[name]
        if chi == 0:
            if norm > 1 + 1e-12:
                logger.info(f"Scale audit for {algebra}: {name} has norm {norm:.6g} > 1 at χ=0")
                return ScaleAudit(norms, lo, hi, False, (name, name))
            continue
        if norm == 0:
            continue
        bound = math.log(norm)
        if chi > 0 and -bound < hi:
            hi, hi_name = -bound, name
        elif chi < 0 and bound > lo:
            lo, lo_name = bound, name
    feasible = lo <= hi + 1e-12
    if feasible and abs(hi - lo) <= 1e-12:
        lo = hi = (lo + hi) / 2
    clash = None if feasible else (lo_name, hi_name)
    logger.info(f"Scale audit for {algebra}: {'feasible' if feasible else 'infeasible'} (t in [{lo:.6g}, {hi:.6g}])")
    return ScaleAudit(norms, lo, hi, feasible, clash)


##########################################################
# QCS morphism audit
##########################################################


def _aligned_anchors(Z: np.ndarray, domain: QcsDesc) -> list[HermMat]:
    """A domain point along the top right-singular vector of Z, where the conjugation stretches most."""
    _, _, vh = np.linalg.svd(np.atleast_2d(Z))
    v = vh[0].conj()
    if domain.variant == QcsVariant.UNIT:
        return [identity(1)]
    if domain.variant == QcsVariant.TENSOR:
        left, right = domain.factors
        if not (left.is_canonical and right.is_canonical):
            return []
        # closest product state: top Schmidt pair of v
        u, _, wh = np.linalg.svd(v.reshape(left.carrier, right.carrier))
        return [kron(projector(u[:, 0]), projector(wh[0]))]
    return [projector(v)]


def qcs_morphism_audit(ms: MsTqft, samples: int = 500, seed: int = 0, atoms: Optional[Sequence[str]] = None,
                       budget: int = 40, tol: float = DEFAULT_TOL) -> AuditReport:
    """Runs hom_membership_audit on each generator image against its policy objects.

    Args:
        ms (MsTqft): The theory.
        samples (int): Random domain points per generator.
        seed (int): Sampling seed.
        atoms (Sequence[str] | None): Generators to audit (all six when None).
        budget (int): Cutting-plane budget for tensor codomains.
        tol (float): Membership tolerance.

    Returns:
        AuditReport: One child report per generator.

    """
    names = list(GENERATOR_NAMES if atoms is None else atoms)
    unknown = [name for name in names if name not in GENERATOR_NAMES]
    if unknown:
        logger.error(f"Unknown generators: {unknown}")
        raise ValueError(f"Unknown generators: {', '.join(unknown)}")
    report = AuditReport("qcs-morphisms")
    for name in names:
        F = ms.generator_chois[name]
        Z = ms.lam ** EULER[name] * generator_matrix(ms.algebra, name).matrix
        anchors = _aligned_anchors(Z, F.domain) + default_anchors(F.domain)
        child = hom_membership_audit(F, samples=samples, seed=seed, anchors=anchors, budget=budget, tol=tol)
        child.name = name
        report.children.append(child)
        if not child.passed:
            logger.info(f"Generator {name} is not a QCS morphism {F.domain} -> {F.codomain}")
    return report


##########################################################
# Trace-out construction
##########################################################


def trace_out_build(A1: FrobeniusAlgebra, mu: complex,
                    object_policy: ObjectPolicy = ObjectPolicy.TENSOR_OF_COMPONENTS,
                    samples: int = 50, seed: int = 0, budget: int = 40,
                    tol: float = DEFAULT_TOL, audit: bool = True) -> tuple[MsTqft, AuditReport]:
    """Product with the invertible Euler theory Z2(M) = mu^χ(M) on C, then the C factor traced out.

    Each generator image is built as c -> tr_2((Z1 ⊗ mu^χ)(c ⊗ 1)(Z1 ⊗ mu^χ)^†), which equals
    |mu|^{2χ} Z1 c Z1^†: the Euler rescaling of the first theory with lambda = |mu|.

    Raises:
        ValueError: If mu is zero.

    """
    mu = complex(mu)
    if mu == 0:
        logger.error("trace_out_build called with mu = 0")
        raise ValueError("mu must be nonzero")
    k = A1.dim
    chois = {}
    for name in GENERATOR_NAMES:
        Z1 = generator_matrix(A1, name).matrix
        joint = choi_of_conjugation(np.kron(Z1, np.array([[mu ** EULER[name]]])))
        out_dim, in_dim = Z1.shape

        def traced(c: HermMat, joint=joint, out_dim=out_dim) -> HermMat:
            return partial_trace(choi_apply(joint, kron(c, identity(1))), (out_dim, 1), 2)

        circles_in, circles_out = _arity(name)
        chois[name] = choi_of_map(traced, in_dim, out_dim, object_for(circles_in, k, object_policy),
                                  object_for(circles_out, k, object_policy))
    ms = MsTqft(A1, abs(mu), ObjectPolicy(object_policy), chois)

    report = AuditReport("trace-out")
    report.notes.append("trace-out over an invertible second factor = Euler rescaling of the first factor "
                        f"with lambda = |mu| = {abs(mu):.6g}")
    reference = build_ms(A1, abs(mu), object_policy)
    residual = max(choi_distance(chois[name], reference.generator_chois[name]) for name in GENERATOR_NAMES)
    report.add(CheckResult("matches-euler-rescaling", residual <= 1e-12, residual=residual))
    if audit:
        report.children.append(functor_axiom_check(ms, tol, seed))
        report.children.append(qcs_morphism_audit(ms, samples, seed, budget=budget, tol=tol))
    return ms, report


##########################################################
# Tensor gap
##########################################################


def tensor_gap_demo(n: int = 2, pairs: int = 200, seed: int = 0, tol: float = DEFAULT_TOL) -> AuditReport:
    """Shows D(C^2) ⊗ D(C^2) is strictly smaller than D(C^4) using the singlet and SWAP/2.

    Raises:
        ValueError: For n other than 2.

    """
    if n != 2:
        logger.error(f"Unsupported tensor gap dimension: {n}")
        raise ValueError(f"Unsupported dimension {n}: the demonstration is fixed at n = 2")
    rng = get_rng(seed)
    singlet = singlet_projector()
    swap = swap_operator(2)
    g = swap * 0.5
    report = AuditReport("tensor-gap")

    check = report.add(CheckResult("swap-pairs-with-products", True, witness=g))
    identity_residual = 0.0
    for _ in range(pairs):
        c, d = random_in_d(rng, 2), random_in_d(rng, 2)
        value = inner(g, kron(c, d))
        identity_residual = max(identity_residual, abs(inner(swap, kron(c, d)) - float(np.real(np.trace(c.entries @ d.entries)))))
        if value < -tol or value > 1 + tol:
            check.passed = False
            check.point = kron(c, d)
            check.notes.append(f"product pairs to {value:.6g}")
            break
    check.residual = identity_residual
    check.passed = check.passed and identity_residual <= tol
    check.notes.append(f"tr(SWAP (c ⊗ d)) = tr(cd) on {pairs} seeded pairs")

    value = inner(g, singlet)
    report.add(CheckResult("singlet-pairing", abs(value + 0.5) <= 1e-12, residual=abs(value + 0.5), witness=g,
                           notes=[f"tr(g · singlet) = {value:.12g}"]))

    verdict = canonical_membership(singlet, QcsVariant.D, tol)
    eigenvalues = ", ".join(f"{v:.6g}" for v in singlet.spectrum.eigenvalues)
    report.add(CheckResult("singlet-in-D4", verdict.is_in, notes=[f"eigenvalues {eigenvalues}"]))

    verdict = tensor_membership(singlet, QcsDesc.canonical_d(2), QcsDesc.canonical_d(2), seed=seed, tol=tol)
    check = report.add(CheckResult("singlet-not-in-tensor", verdict.is_out, witness=verdict.witness))
    if verdict.is_out:
        check.notes.append(f"tensor oracle: Out ({verdict.certificate}, pairing {verdict.pairing:.6g})")

    report.notes.append("singlet ∈ D(C^4) but ∉ D(C^2) ⊗ D(C^2): under TensorOfComponents two circles map to the "
                        "smaller tensor object, under CanonicalDOfProduct to D(C^4)")
    return report
