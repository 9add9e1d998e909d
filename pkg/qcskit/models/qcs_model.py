from dataclasses import dataclass, field, replace
from enum import Enum
import logging
from typing import Optional, Sequence

import numpy as np

from qcskit.models.herm_model import (
    DimensionMismatch,
    HermMat,
    _basis_array,
    coordinates,
    from_coordinates,
    hermitize,
    identity,
    inner,
    kron,
    projector,
    zeros,
)
from qcskit.models.lp_model import LpOutcome, LpProblem, LpStatus, solve_lp
from qcskit.models.report_model import AuditReport, CheckResult
from qcskit.utils.logger import configure_logger
from qcskit.utils.random_utils import (
    get_rng,
    random_hermitian,
    random_in_d,
    random_in_p,
    random_projector,
    random_pure_state,
)


logger = logging.getLogger(__name__)
configure_logger(logger)


DEFAULT_TOL = 1e-9
LP_MAX_CARRIER = 8
MAX_CUTS = 4000
HEURISTIC_SEPARATION_NOTE = ("heuristic separation: the product search over two canonical factors is not exhaustive, "
                             "so the witness may pair outside [0, 1] with an unsearched product")


class QcsVariant(str, Enum):
    D = "D"
    P = "P"
    GENERATED = "generated"
    POLAR = "polar"
    TENSOR = "tensor"
    UNIT = "unit"


@dataclass(frozen=True, eq=False)
class QcsDesc:
    """Description of a quantum coherent space.

    Membership semantics:
        D(n)            {f >= 0, ||f||_op <= 1}
        P(n)            {f >= 0, tr f <= 1}
        generated(S)    the double polar of S
        polar(S)        the polar of S
        tensor(C, D)    the double polar of {c ⊗ d}
        unit            the interval [0, 1] of 1 x 1 matrices

    Use the classmethod constructors rather than building instances directly.
    """
    variant: QcsVariant
    n: int
    generators: tuple = ()
    factors: tuple = ()

    @classmethod
    def canonical_d(cls, n: int) -> "QcsDesc":
        return cls(QcsVariant.D, _positive_dim(n))

    @classmethod
    def canonical_p(cls, n: int) -> "QcsDesc":
        return cls(QcsVariant.P, _positive_dim(n))

    @classmethod
    def generated(cls, generators: Sequence[HermMat]) -> "QcsDesc":
        return cls(QcsVariant.GENERATED, _common_dim(generators), tuple(generators))

    @classmethod
    def polar_of(cls, generators: Sequence[HermMat]) -> "QcsDesc":
        return cls(QcsVariant.POLAR, _common_dim(generators), tuple(generators))

    @classmethod
    def tensor_of(cls, left: "QcsDesc", right: "QcsDesc") -> "QcsDesc":
        return cls(QcsVariant.TENSOR, left.carrier * right.carrier, factors=(left, right))

    @classmethod
    def unit(cls) -> "QcsDesc":
        return cls(QcsVariant.UNIT, 1)

    @property
    def carrier(self) -> int:
        return self.n

    @property
    def is_canonical(self) -> bool:
        return self.variant in (QcsVariant.D, QcsVariant.P)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QcsDesc):
            return NotImplemented
        if self.variant != other.variant or self.n != other.n:
            return False
        if len(self.generators) != len(other.generators) or len(self.factors) != len(other.factors):
            return False
        for a, b in zip(self.generators, other.generators):
            if not np.allclose(a.entries, b.entries, atol=1e-12, rtol=0):
                return False
        return all(a == b for a, b in zip(self.factors, other.factors))

    __hash__ = None

    def __str__(self) -> str:
        if self.variant == QcsVariant.TENSOR:
            return f"({self.factors[0]} ⊗ {self.factors[1]})"
        if self.variant == QcsVariant.UNIT:
            return "Unit"
        if self.is_canonical:
            return f"{self.variant.value}({self.n})"
        return f"{self.variant.value}[{len(self.generators)} x {self.n}x{self.n}]"


def _positive_dim(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        logger.error(f"Invalid carrier dimension: {n}")
        raise ValueError(f"Invalid carrier dimension: {n}. Must be a positive integer.")
    return int(n)


def _common_dim(generators: Sequence[HermMat]) -> int:
    if len(generators) == 0:
        logger.error("Generator list is empty")
        raise ValueError("Generator list must be nonempty")
    dims = {g.n for g in generators}
    if len(dims) != 1:
        logger.error(f"Generators have mixed carrier dimensions: {sorted(dims)}")
        raise DimensionMismatch(f"Generators have mixed carrier dimensions: {sorted(dims)}")
    return dims.pop()


class Verdict(str, Enum):
    IN = "In"
    OUT = "Out"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class MembershipVerdict:
    """Answer of a membership oracle.

    Attributes:
        answer (Verdict): In, Out or Unresolved.
        witness (HermMat | None): For Out, a polar-side g with tr(f g) outside [0, 1].
        pairing (float | None): tr(f · witness).
        side (str | None): "below" when the pairing is < 0, "above" when > 1.
        iterations (int): LPs solved (or cutting-plane rounds).
        certificate (str): How the verdict was certified.
        relative_to_outer_approximation (bool): In-verdicts obtained from finitely many
            product cuts of a semi-infinite polar.

    """
    answer: Verdict
    witness: Optional[HermMat] = None
    pairing: Optional[float] = None
    side: Optional[str] = None
    iterations: int = 0
    certificate: str = ""
    relative_to_outer_approximation: bool = False
    notes: tuple = field(default_factory=tuple)

    @property
    def is_in(self) -> bool:
        return self.answer == Verdict.IN

    @property
    def is_out(self) -> bool:
        return self.answer == Verdict.OUT


def _out(witness: HermMat, pairing: float, **kwargs) -> MembershipVerdict:
    side = "below" if pairing < 0 else "above"
    return MembershipVerdict(Verdict.OUT, witness=witness, pairing=float(pairing), side=side, **kwargs)


def _violates(pairing: float, tol: float) -> bool:
    return pairing < -tol or pairing > 1 + tol


##########################################################
# Polarity
##########################################################


def is_polar_pair(f: HermMat, g: HermMat, tol: float = DEFAULT_TOL) -> bool:
    """True iff -tol <= tr(fg) <= 1 + tol."""
    if tol < 0:
        raise ValueError(f"Invalid tolerance: {tol}. Must be non-negative.")
    return not _violates(inner(f, g), tol)


def polar_membership(g: HermMat, generators: Sequence[HermMat], tol: float = DEFAULT_TOL) -> MembershipVerdict:
    """Decides g ∈ ∼S by checking every pairing; Out carries the first violating generator."""
    _common_dim(generators)
    for s in generators:
        value = inner(g, s)
        if _violates(value, tol):
            return _out(s, value, iterations=1, certificate="pairing")
    return MembershipVerdict(Verdict.IN, iterations=1, certificate="pairing")


def _check_lp_carrier(f: HermMat, generators: Sequence[HermMat]) -> None:
    n = _common_dim(generators)
    if n != f.n:
        logger.error(f"Dimension mismatch: point {f.n} vs generators {n}")
        raise DimensionMismatch(f"Dimension mismatch: point has carrier {f.n}, generators {n}")
    if n > LP_MAX_CARRIER:
        logger.error(f"Carrier {n} exceeds LP oracle limit {LP_MAX_CARRIER}")
        raise ValueError(f"Carrier dimension {n} exceeds the LP oracle limit of {LP_MAX_CARRIER}")


def _polar_lp(f: HermMat, generators: Sequence[HermMat], sense: str) -> LpOutcome:
    """Optimizes tr(f g) over g ∈ ∼S, an intersection of slabs in n^2 coordinates."""
    rows = np.array([coordinates(s) for s in generators])
    slabs = [(row, 0.0, 1.0) for row in rows]
    c = coordinates(f)
    return solve_lp(LpProblem(c if sense == "min" else -c, slabs))


def _witness_from_lp(f: HermMat, generators: Sequence[HermMat], outcome: LpOutcome, sense: str) -> HermMat:
    """Turns an LP optimum or recession ray into a concrete element of ∼S violating polarity with f."""
    if outcome.status == LpStatus.OPTIMAL:
        return from_coordinates(outcome.point, f.n)
    rows = np.array([coordinates(s) for s in generators])
    ray = outcome.ray - np.linalg.pinv(rows) @ (rows @ outcome.ray)
    direction = from_coordinates(ray, f.n)
    slope = inner(f, direction)
    # the recession cone of ∼S is the common null space of the generators, so 0 + t*ray stays polar
    target = -1.0 if sense == "min" else 2.0
    return direction * (target / slope)


def _lp_candidate(f: HermMat, generators: Sequence[HermMat], sense: str, tol: float) -> Optional[HermMat]:
    """Witness candidate for one side of the bipolar test, or None when the bound holds."""
    outcome = _polar_lp(f, generators, sense)
    if outcome.status == LpStatus.INFEASIBLE:
        # 0 always lies in ∼S
        logger.error("Polar LP reported infeasible")
        raise RuntimeError("Polar LP reported infeasible although 0 is always feasible")
    if outcome.status == LpStatus.OPTIMAL:
        bound = outcome.value if sense == "min" else -outcome.value
        if (sense == "min" and bound >= -tol) or (sense == "max" and bound <= 1 + tol):
            return None
    return _witness_from_lp(f, generators, outcome, sense)


def bipolar_membership(f: HermMat, generators: Sequence[HermMat], tol: float = DEFAULT_TOL) -> MembershipVerdict:
    """Decides f ∈ ∼∼S exactly: inf and sup of tr(fg) over the slab polyhedron ∼S.

    Args:
        f (HermMat): The point to test.
        generators (Sequence[HermMat]): The finite set S.
        tol (float): Pairing tolerance.

    Returns:
        MembershipVerdict: In, or Out with a witness g ∈ ∼S from the LP optimum or ray.

    Raises:
        DimensionMismatch: If carriers differ.
        ValueError: If S is empty or the carrier exceeds the LP limit.

    """
    _check_lp_carrier(f, generators)
    iterations = 0
    for sense in ("min", "max"):
        iterations += 1
        witness = _lp_candidate(f, generators, sense, tol)
        if witness is not None:
            pairing = inner(f, witness)
            logger.debug(f"Bipolar test Out ({sense} side, pairing {pairing:.6g})")
            return _out(witness, pairing, iterations=iterations, certificate="lp-exact")
    return MembershipVerdict(Verdict.IN, iterations=iterations, certificate="lp-exact")


def hull_membership(f: HermMat, generators: Sequence[HermMat], tol: float = DEFAULT_TOL) -> bool:
    """True iff f is a sub-convex combination Σ w_i s_i (w >= 0, Σ w <= 1) of S ∪ {0}."""
    _check_lp_carrier(f, generators)
    k = len(generators)
    coords = np.array([coordinates(s) for s in generators]).T
    target = coordinates(f)
    slabs = [(np.eye(k)[i], 0.0, np.inf) for i in range(k)]
    slabs.append((np.ones(k), -np.inf, 1.0 + tol))
    equalities = list(zip(coords, target))
    outcome = solve_lp(LpProblem(np.zeros(k), slabs, equalities))
    return outcome.status == LpStatus.OPTIMAL


##########################################################
# Canonical spaces
##########################################################


def _canonical_kind(which) -> QcsVariant:
    kind = QcsVariant(which.value if isinstance(which, QcsVariant) else str(which))
    if kind not in (QcsVariant.D, QcsVariant.P):
        raise ValueError(f"Invalid canonical space: {which}. Expected 'D' or 'P'.")
    return kind


def _canonical_contains(f: HermMat, kind: QcsVariant, tol: float) -> bool:
    spec = f.spectrum
    if spec.min_eigenvalue < -tol:
        return False
    if kind == QcsVariant.D:
        return spec.op_norm <= 1 + tol
    return spec.trace <= 1 + tol


def canonical_membership(f: HermMat, which, tol: float = DEFAULT_TOL) -> MembershipVerdict:
    """Spectral membership in D(n) or P(n); Out carries the polar_witness certificate."""
    kind = _canonical_kind(which)
    if _canonical_contains(f, kind, tol):
        return MembershipVerdict(Verdict.IN, certificate="spectral")
    witness = polar_witness(f, kind, tol)
    return _out(witness, inner(f, witness), certificate="spectral")


def polar_witness(f: HermMat, which, tol: float = DEFAULT_TOL) -> HermMat:
    """An element g of the opposite canonical set with tr(fg) outside [0, 1].

    - f not PSD: projector onto the most negative eigenvector (in both D and P).
    - f PSD, fails D's norm bound: top eigenprojector (in P), pairing = ||f||_op.
    - f PSD, fails P's trace bound: the identity (in D), pairing = tr f.

    Raises:
        ValueError: If f is a member of the requested set.

    """
    kind = _canonical_kind(which)
    if _canonical_contains(f, kind, tol):
        logger.error(f"polar_witness called on a member of {kind.value}")
        raise ValueError(f"Matrix is a member of {kind.value}({f.n}); no polar witness exists")
    spec = f.spectrum
    if spec.min_eigenvalue < -tol:
        return spec.projector(f.n - 1)
    if kind == QcsVariant.D:
        return spec.projector(0)
    return identity(f.n)


##########################################################
# Tensor product
##########################################################


def _finite_generators(desc: QcsDesc) -> Optional[list[HermMat]]:
    if desc.variant == QcsVariant.GENERATED:
        return list(desc.generators)
    if desc.variant == QcsVariant.UNIT:
        return [identity(1)]
    return None


def _check_tensor_factor(desc: QcsDesc) -> None:
    if not desc.is_canonical and _finite_generators(desc) is None:
        logger.error(f"Unsupported tensor factor: {desc}")
        raise ValueError(f"Unsupported tensor factor {desc}: must be canonical, generated or unit")


def _is_positive_factor(desc: QcsDesc) -> bool:
    gens = _finite_generators(desc)
    if gens is None:
        return True
    return all(g.spectrum.is_psd(1e-12) and g.spectrum.trace > 1e-12 for g in gens)


def _left_reduced(g: HermMat, a: HermMat, n: int, m: int) -> HermMat:
    """K_a on the second factor with tr(K_a b) = tr(g (a ⊗ b))."""
    return hermitize(np.einsum("ikjl,ji->kl", g.entries.reshape(n, m, n, m), a.entries))


def _right_reduced(g: HermMat, b: HermMat, n: int, m: int) -> HermMat:
    """H_b on the first factor with tr(H_b a) = tr(g (a ⊗ b))."""
    return hermitize(np.einsum("ikjl,lk->ij", g.entries.reshape(n, m, n, m), b.entries))


def _lowest(h: HermMat) -> tuple[float, HermMat]:
    """min over unit vectors of <v|h|v> and the minimizing pure state."""
    spec = h.spectrum
    return spec.min_eigenvalue, spec.projector(h.n - 1)


def _highest(h: HermMat, kind: QcsVariant) -> tuple[float, HermMat]:
    """max of tr(h x) over the extreme points of D (projectors) or P (pure states and 0)."""
    spec = h.spectrum
    if kind == QcsVariant.P:
        if spec.max_eigenvalue <= 0:
            return 0.0, zeros(h.n)
        return spec.max_eigenvalue, spec.projector(0)
    positive = spec.eigenvalues > 0
    v = spec.eigenvectors[:, positive]
    return float(np.sum(spec.eigenvalues[positive])), hermitize(v @ v.conj().T)


def _canonical_seeds(kind: QcsVariant, n: int) -> list[HermMat]:
    """Pure states spanning H(C^n) (computational and pairwise superpositions); D adds I."""
    seeds = [projector(np.eye(n)[i]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for phase in (1, -1, 1j, -1j):
                v = np.zeros(n, dtype=complex)
                v[i], v[j] = 1, phase
                seeds.append(projector(v))
    if kind == QcsVariant.D:
        seeds.append(identity(n))
    return seeds


def _factor_seeds(desc: QcsDesc) -> list[HermMat]:
    gens = _finite_generators(desc)
    return gens if gens is not None else _canonical_seeds(desc.variant, desc.n)


def _size(x: HermMat, kind: QcsVariant) -> float:
    return x.spectrum.op_norm if kind == QcsVariant.D else x.spectrum.trace


def _product_split(f: HermMat, left: QcsDesc, right: QcsDesc) -> Optional[HermMat]:
    """If f = c ⊗ d with c ∈ left and d ∈ right (canonical factors), returns c ⊗ d rebuilt.

    Uses the operator-Schmidt decomposition in product Hermitian-basis coordinates.
    """
    if not (left.is_canonical and right.is_canonical):
        return None
    n, m = left.n, right.n
    bn, bm = _basis_array(n), _basis_array(m)
    t = np.real(np.einsum("pkql,iqp,jlk->ij", f.entries.reshape(n, m, n, m), bn, bm))
    u, sigma, vt = np.linalg.svd(t)
    if sigma[0] < 1e-12 or (sigma.size > 1 and sigma[1] > 1e-9 * sigma[0]):
        return None
    a = from_coordinates(u[:, 0], n)
    b = from_coordinates(vt[0], m)
    if a.spectrum.trace < 0:
        a, b = -a, -b
    if not (a.spectrum.is_psd(1e-10) and b.spectrum.is_psd(1e-10)):
        return None
    lo = sigma[0] * _size(b, right.variant)
    hi = 1.0 / _size(a, left.variant)
    if lo > hi * (1 + 1e-9):
        return None
    alpha = np.sqrt(lo * hi)
    return kron(a * alpha, b * (sigma[0] / alpha))


def partial_transpose(f: HermMat, dims: tuple[int, int]) -> HermMat:
    """Transposes the second tensor factor of f on C^{d1} ⊗ C^{d2}."""
    d1, d2 = dims
    if d1 * d2 != f.n:
        raise DimensionMismatch(f"Dimensions {tuple(dims)} do not factor carrier dimension {f.n}")
    t = f.entries.reshape(d1, d2, d1, d2).transpose(0, 3, 2, 1)
    return hermitize(t.reshape(f.n, f.n))


def _partial_transpose_witness(f: HermMat, n: int, m: int, tol: float) -> Optional[HermMat]:
    """W = (v v^*)^Γ for the most negative eigenvector v of f^Γ, or None when f^Γ ⪰ 0.

    For positive a, b with ||a||, ||b|| <= 1: tr(W (a ⊗ b)) = <v|a ⊗ b^T|v> lies in [0, 1],
    so W is polar to every product of D(n) and D(m) (hence of P(n) and P(m)), while
    tr(W f) is the negative eigenvalue.
    """
    spec = partial_transpose(f, (n, m)).spectrum
    if spec.min_eigenvalue >= -tol:
        return None
    return partial_transpose(spec.projector(f.n - 1), (n, m))


def _polar_seeds(kind: QcsVariant, n: int) -> list[HermMat]:
    """Elements of the polar of a canonical set: pure states (in P = ∼D), plus I when that polar is D."""
    seeds = _canonical_seeds(QcsVariant.P, n)
    if kind == QcsVariant.P:
        seeds.append(identity(n))
    return seeds


def _polar_product_witness(f: HermMat, left: QcsDesc, right: QcsDesc, tol: float) -> Optional[HermMat]:
    """A product a ⊗ b of polar elements pairing with f outside [0, 1], if one is among the seeds.

    tr((a ⊗ b)(c ⊗ d)) = tr(ac) tr(bd) lies in [0, 1] whenever a ∈ ∼left and b ∈ ∼right.
    """
    for a in _polar_seeds(left.variant, left.n):
        for b in _polar_seeds(right.variant, right.n):
            g = kron(a, b)
            if _violates(inner(f, g), tol):
                return g
    return None


@dataclass
class _Separation:
    lower: float
    upper: float
    cuts: list


def _separate(g: HermMat, left: QcsDesc, right: QcsDesc, rng: np.random.Generator,
              tol: float, restarts: int = 6) -> _Separation:
    """Searches products a ⊗ b of the factors' generators for pairings with g outside [0, 1].

    `lower` is the least pairing per unit tr(a)tr(b); `upper` the largest pairing. Exact when a
    factor is finitely generated; otherwise alternating eigenprojector ascent with restarts.
    """
    n, m = left.n, right.n
    lower, upper, cuts = np.inf, -np.inf, []

    def record(value_low, pair_low, value_high, pair_high):
        nonlocal lower, upper
        if value_low < lower:
            lower = value_low
        if value_high > upper:
            upper = value_high
        if value_low < -tol:
            cuts.append(kron(*pair_low))
        if value_high > 1 + tol:
            cuts.append(kron(*pair_high))

    left_gens, right_gens = _finite_generators(left), _finite_generators(right)

    if left_gens is not None and right_gens is not None:
        for s in left_gens:
            for t in right_gens:
                value = inner(g, kron(s, t))
                weight = s.spectrum.trace * t.spectrum.trace
                record(value / weight if weight > 1e-12 else value, (s, t), value, (s, t))
        return _Separation(lower, upper, cuts)

    if left_gens is not None or right_gens is not None:
        fixed_left = left_gens is not None
        for s in (left_gens if fixed_left else right_gens):
            h = _left_reduced(g, s, n, m) if fixed_left else _right_reduced(g, s, n, m)
            other = right if fixed_left else left
            low, low_state = _lowest(h)
            high, high_elem = _highest(h, other.variant)
            weight = s.spectrum.trace if s.spectrum.trace > 1e-12 else 1.0
            pair_low = (s, low_state) if fixed_left else (low_state, s)
            pair_high = (s, high_elem) if fixed_left else (high_elem, s)
            record(low / weight, pair_low, high, pair_high)
        return _Separation(lower, upper, cuts)

    starts = _canonical_seeds(right.variant, m)[: m + 1]
    starts += [random_pure_state(rng, m) for _ in range(restarts)]
    starts += [random_projector(rng, m) for _ in range(restarts // 2)]
    for b in starts:
        # lower side over pure product states
        b_low = b if b.spectrum.trace <= 1 + 1e-12 else random_pure_state(rng, m)
        b_low = projector(b_low.spectrum.eigenvectors[:, 0])
        value_low, previous = np.inf, np.inf
        for _ in range(30):
            _, a_low = _lowest(_right_reduced(g, b_low, n, m))
            value_low, b_low = _lowest(_left_reduced(g, a_low, n, m))
            if previous - value_low < 1e-13:
                break
            previous = value_low
        # upper side over extreme points of each factor
        b_high, value_high, previous = b, -np.inf, -np.inf
        a_high = zeros(n)
        for _ in range(30):
            _, a_high = _highest(_right_reduced(g, b_high, n, m), left.variant)
            value_high, b_high = _highest(_left_reduced(g, a_high, n, m), right.variant)
            if value_high - previous < 1e-13:
                break
            previous = value_high
        record(value_low, (a_low, b_low), value_high, (a_high, b_high))
    return _Separation(lower, upper, cuts)


def _repair(g: HermMat, left: QcsDesc, right: QcsDesc, rng: np.random.Generator, tol: float) -> Optional[HermMat]:
    """Moves g into the polar of all products: add (-lower)·I, then divide by the new upper bound."""
    sep = _separate(g, left, right, rng, tol)
    shifted = g + identity(g.n) * max(0.0, -sep.lower) if sep.lower < 0 else g
    sep = _separate(shifted, left, right, rng, tol)
    scaled = shifted * (1.0 / max(1.0, sep.upper))
    final = _separate(scaled, left, right, rng, tol)
    if final.lower < -tol or final.upper > 1 + tol:
        return None
    return scaled


def _seed_products(f: HermMat, left: QcsDesc, right: QcsDesc) -> list[HermMat]:
    products = [kron(a, b) for a in _factor_seeds(left) for b in _factor_seeds(right)]
    split = _product_split(f, left, right)
    if split is not None:
        products.append(split)
    return products


def _is_new_cut(cut: HermMat, cuts: list[HermMat]) -> bool:
    return not any(np.allclose(cut.entries, c.entries, atol=1e-10) for c in cuts)


def tensor_membership(f: HermMat, left: QcsDesc, right: QcsDesc, budget: int = 40,
                      seed: int = 0, tol: float = DEFAULT_TOL) -> MembershipVerdict:
    """Decides f ∈ ∼∼{c ⊗ d : c ∈ left, d ∈ right} by a cutting-plane loop.

    When both factors are finitely generated the polar of the product set equals the polar of
    the generator products, so a single bipolar LP decides exactly. For two canonical factors a
    negative eigenvalue of the partial transpose of f gives an exact witness at once. Otherwise a finite set G of
    products is kept: the LPs over ∼G (an outer approximation of the polar) either certify
    0 <= tr(fg) <= 1, giving In, or produce a candidate g; the separation oracle then either adds
    violated products to G or confirms g. For positive factors the candidate is also repaired
    into the polar (identity shift, then rescale) so a witness need not wait for G to converge.

    Args:
        f (HermMat): The point, on the product carrier.
        left (QcsDesc): The first factor (canonical, generated or unit).
        right (QcsDesc): The second factor.
        budget (int): Maximum cutting-plane rounds.
        seed (int): Seed for the separation restarts.
        tol (float): Pairing tolerance.

    Returns:
        MembershipVerdict: In (flagged relative to the outer approximation), Out with a witness,
            or Unresolved when the budget runs out.

    Raises:
        ValueError: For a non-positive budget, unsupported factors or carriers above the LP limit.

    """
    if not isinstance(budget, (int, np.integer)) or budget <= 0:
        logger.error(f"Invalid budget: {budget}")
        raise ValueError(f"Invalid budget: {budget}. Must be a positive integer.")
    _check_tensor_factor(left)
    _check_tensor_factor(right)
    if f.n != left.carrier * right.carrier:
        logger.error(f"Point carrier {f.n} does not match {left.carrier}x{right.carrier}")
        raise DimensionMismatch(f"Point carrier {f.n} does not match {left.carrier} x {right.carrier}")
    if f.n > LP_MAX_CARRIER:
        logger.error(f"Product carrier {f.n} exceeds LP oracle limit {LP_MAX_CARRIER}")
        raise ValueError(f"Product carrier {f.n} exceeds the LP oracle limit of {LP_MAX_CARRIER}")

    left_gens, right_gens = _finite_generators(left), _finite_generators(right)
    if left_gens is not None and right_gens is not None:
        verdict = bipolar_membership(f, [kron(s, t) for s in left_gens for t in right_gens], tol)
        return replace(verdict, certificate="lp-exact (generator products)")

    if left.is_canonical and right.is_canonical:
        witness = _partial_transpose_witness(f, left.n, right.n, tol)
        if witness is not None:
            return _out(witness, inner(f, witness), certificate="partial-transpose witness")
        witness = _polar_product_witness(f, left, right, tol)
        if witness is not None:
            return _out(witness, inner(f, witness), certificate="product of polar elements")

    rng = get_rng(seed)
    positive = _is_positive_factor(left) and _is_positive_factor(right)
    # with two canonical factors the separation search is a local ascent, not an exhaustive one
    notes = () if left_gens is not None or right_gens is not None else (HEURISTIC_SEPARATION_NOTE,)
    cuts = _seed_products(f, left, right)
    logger.info(f"Tensor membership in {left} ⊗ {right}: {len(cuts)} seed products, budget {budget}")

    for iteration in range(1, budget + 1):
        certified = 0
        added = 0
        for sense in ("min", "max"):
            candidate = _lp_candidate(f, cuts, sense, tol)
            if candidate is None:
                certified += 1
                continue
            sep = _separate(candidate, left, right, rng, tol)
            if not sep.cuts:
                return _out(candidate, inner(f, candidate), iterations=iteration,
                            certificate="cutting-plane (separation search found no violated product)", notes=notes)
            if positive:
                repaired = _repair(candidate, left, right, rng, tol)
                if repaired is not None and _violates(inner(f, repaired), tol):
                    return _out(repaired, inner(f, repaired), iterations=iteration,
                                certificate="cutting-plane with identity-shift repair", notes=notes)
            for cut in sep.cuts:
                if len(cuts) < MAX_CUTS and _is_new_cut(cut, cuts):
                    cuts.append(cut)
                    added += 1
        if certified == 2:
            return MembershipVerdict(Verdict.IN, iterations=iteration, relative_to_outer_approximation=True,
                                     certificate=f"lp bounds on the polar of {len(cuts)} product cuts")
        logger.debug(f"Cutting-plane round {iteration}: {added} new cuts ({len(cuts)} total)")
        if added == 0:
            break

    logger.warning(f"Tensor membership unresolved after {iteration} rounds")
    return MembershipVerdict(Verdict.UNRESOLVED, iterations=iteration, certificate="budget exhausted")


##########################################################
# Dispatch and sampling
##########################################################


def qcs_membership(f: HermMat, desc: QcsDesc, tol: float = DEFAULT_TOL, budget: int = 40,
                   seed: int = 0) -> MembershipVerdict:
    """Membership of f in any QCS description."""
    if f.n != desc.carrier:
        logger.error(f"Point carrier {f.n} does not match {desc}")
        raise DimensionMismatch(f"Point carrier {f.n} does not match carrier {desc.carrier} of {desc}")
    if desc.is_canonical:
        return canonical_membership(f, desc.variant, tol)
    if desc.variant == QcsVariant.GENERATED:
        return bipolar_membership(f, desc.generators, tol)
    if desc.variant == QcsVariant.POLAR:
        return polar_membership(f, desc.generators, tol)
    if desc.variant == QcsVariant.UNIT:
        value = float(np.real(f.entries[0, 0]))
        if _violates(value, tol):
            return _out(identity(1), value, certificate="interval")
        return MembershipVerdict(Verdict.IN, certificate="interval")
    return tensor_membership(f, desc.factors[0], desc.factors[1], budget=budget, seed=seed, tol=tol)


def _hull_sample(generators: Sequence[HermMat], rng: np.random.Generator) -> HermMat:
    weights = rng.dirichlet(np.ones(len(generators) + 1))[:-1]
    total = zeros(generators[0].n)
    for w, s in zip(weights, generators):
        total = total + s * w
    return total


def sample_members(desc: QcsDesc, rng: np.random.Generator, count: int) -> list[HermMat]:
    """Seeded points of a QCS description.

    Canonical sets clamp Gaussian spectra, generated sets mix hull samples with LP-confirmed
    Gaussian points, polar sets rescale Gaussian points into the slabs, tensors take products.
    """
    n = desc.carrier
    samples = []
    for i in range(count):
        if desc.variant == QcsVariant.D:
            samples.append(random_in_d(rng, n))
        elif desc.variant == QcsVariant.P:
            samples.append(random_in_p(rng, n))
        elif desc.variant == QcsVariant.UNIT:
            samples.append(HermMat([[rng.uniform(0.0, 1.0)]]))
        elif desc.variant == QcsVariant.GENERATED:
            point = None
            if i % 4 == 3:
                trial = random_hermitian(rng, n, scale=rng.uniform(0.1, 1.0))
                if bipolar_membership(trial, desc.generators).is_in:
                    point = trial
            samples.append(point if point is not None else _hull_sample(desc.generators, rng))
        elif desc.variant == QcsVariant.POLAR:
            samples.append(_polar_sample(desc.generators, rng))
        else:
            left, right = desc.factors
            samples.append(kron(sample_members(left, rng, 1)[0], sample_members(right, rng, 1)[0]))
    return samples


def _polar_sample(generators: Sequence[HermMat], rng: np.random.Generator) -> HermMat:
    n = generators[0].n
    g = random_hermitian(rng, n)
    rows = np.array([coordinates(s) for s in generators])
    x = coordinates(g)
    null_part = x - np.linalg.pinv(rows) @ (rows @ x)
    for candidate in (x, -x, null_part):
        pairings = rows @ candidate
        if np.all(pairings >= 0):
            top = float(np.max(pairings, initial=0.0))
            scale = rng.uniform(0.0, 1.0) / top if top > 1 else rng.uniform(0.0, 1.0)
            return from_coordinates(candidate * scale, n)
    return zeros(n)


##########################################################
# Audits
##########################################################


def qcs_axiom_suite(generators: Sequence[HermMat], samples: int = 500, seed: int = 0,
                    tol: float = DEFAULT_TOL) -> AuditReport:
    """Closure-operator laws of ∼ on a finite set S.

    Checks extensivity (S ⊆ ∼∼S), agreement of ∼S with ∼∼∼S on sampled points (the latter via
    pairings with S and with sampled members of ∼∼S), [0,1]-scaling closure and convexity of ∼∼S.
    """
    _common_dim(generators)
    if generators[0].n > LP_MAX_CARRIER:
        raise ValueError(f"Carrier dimension {generators[0].n} exceeds the LP oracle limit of {LP_MAX_CARRIER}")
    rng = get_rng(seed)
    n = generators[0].n
    desc = QcsDesc.generated(generators)
    report = AuditReport("qcs-axioms")
    logger.info(f"Running QCS axiom suite on {len(generators)} generators (n={n}, {samples} samples)")

    check = report.add(CheckResult("extensivity", True))
    for i, s in enumerate(generators):
        verdict = bipolar_membership(s, generators, tol)
        if not verdict.is_in:
            check.passed = False
            check.witness = verdict.witness
            check.notes.append(f"generator {i} not in its own bipolar (pairing {verdict.pairing:.6g})")
            break

    members = list(generators) + sample_members(desc, rng, max(4, samples // 10))
    check = report.add(CheckResult("polar-idempotence", True))
    inside = 0
    for i in range(samples):
        g = _polar_sample(generators, rng) if i % 2 else random_hermitian(rng, n, scale=rng.uniform(0.05, 1.0))
        direct = polar_membership(g, generators, tol).is_in
        triple = all(is_polar_pair(g, h, tol) for h in members)
        inside += direct
        if direct != triple:
            check.passed = False
            check.witness = g
            check.notes.append(f"∼S says {direct}, sampled ∼∼∼S says {triple}")
            break
    check.notes.append(f"{inside} of {samples} sampled points were in the polar")

    check = report.add(CheckResult("scaling-closure", True))
    for f in sample_members(desc, rng, samples):
        lam = rng.uniform(0.0, 1.0)
        verdict = bipolar_membership(f * lam, generators, tol)
        if not verdict.is_in:
            check.passed = False
            check.witness = f * lam
            check.notes.append(f"λ={lam:.6g} scaling left the bipolar")
            break

    check = report.add(CheckResult("convexity", True))
    pool = sample_members(desc, rng, samples)
    for f, h in zip(pool, pool[1:] + pool[:1]):
        midpoint = (f + h) * 0.5
        verdict = bipolar_membership(midpoint, generators, tol)
        if not verdict.is_in:
            check.passed = False
            check.witness = midpoint
            check.notes.append("midpoint of two members left the bipolar")
            break

    logger.info(f"QCS axiom suite finished: {report.status}")
    return report


def unit_object_audit(tol: float = DEFAULT_TOL) -> AuditReport:
    """Evaluates the polars of R+, {0} and [0, 1] on the 1-dimensional carrier.

    The nonnegative reals are not a QCS under the slab polarity: their polar is {0}, whose polar
    is all of R. The interval [0, 1] = D(C) = P(C) is self-polar and is the unit used here.
    """
    report = AuditReport("unit-object")
    report.notes.append("Unit is modelled as [0,1] = D(C) = P(C); R+ fails the double-polar law")

    check = report.add(CheckResult("polar-of-nonnegative-reals-is-zero", True))
    for g in (-1.0, -0.5, 0.5, 1.0, 2.0):
        f = 1.0 if g < 0 else 2.0 / g
        pairing = f * g
        check.notes.append(f"g={g}: f={f:g} >= 0 gives fg={pairing:g}")
        if not _violates(pairing, tol):
            check.passed = False
    for f in (0.0, 1.0, 10.0, 1e6):
        if _violates(f * 0.0, tol):
            check.passed = False
    check.notes.append("g=0 pairs to 0 with every f >= 0")

    check = report.add(CheckResult("polar-of-zero-is-everything", True))
    for g in (-5.0, -1.0, 0.0, 1.0, 5.0):
        if _violates(g * 0.0, tol):
            check.passed = False
    check.notes.append("every g pairs to 0 with f = 0")

    check = report.add(CheckResult("bipolar-of-nonnegative-reals-differs", True, witness=HermMat([[-1.0]])))
    for f in (2.0, -1.0):
        pairing = f * 0.0
        check.notes.append(f"f={f:g}: pairing with the only polar element 0 is {pairing:g}, so f is in the bipolar")
        if _violates(pairing, tol):
            check.passed = False
    check.notes.append("-1 lies in the bipolar of R+ but not in R+")

    check = report.add(CheckResult("unit-interval-self-polar", True))
    if not is_polar_pair(identity(1), identity(1), tol):
        check.passed = False
    if is_polar_pair(identity(1), HermMat([[1.1]]), tol):
        check.passed = False
    check.notes.append("f=1, g=1 pairs to 1; f=1, g=1.1 pairs to 1.1 > 1")
    grid = np.linspace(0.0, 1.0, 11)
    check.residual = float(max(0.0, np.max(np.outer(grid, grid)) - 1.0))

    check = report.add(CheckResult("unit-interval-bipolar-lp", True))
    interval = [identity(1)]
    for value, expected in ((0.0, True), (0.5, True), (1.0, True), (-0.1, False), (1.1, False)):
        verdict = bipolar_membership(HermMat([[value]]), interval, tol)
        if verdict.is_in != expected:
            check.passed = False
            check.notes.append(f"f={value:g}: expected {'In' if expected else 'Out'}, got {verdict.answer.value}")
    check.notes.append("bipolar of {1} is [0, 1] per the LP oracle")

    return report
