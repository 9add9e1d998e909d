from dataclasses import dataclass
from functools import cached_property
import logging
from typing import Optional, Sequence

import numpy as np

from qcskit.models.report_model import AuditReport, CheckResult, max_abs
from qcskit.utils.logger import configure_logger


logger = logging.getLogger(__name__)
configure_logger(logger)


MAX_ALGEBRA_DIM = 8
FROBENIUS_TOL = 1e-9
PAIRING_TOL = 1e-9

GENERATOR_NAMES = ("cap", "cup", "mul", "comul", "id", "swap")
EULER = {"cap": 1, "cup": 1, "mul": -1, "comul": -1, "id": 0, "swap": 0}
ARITY = {"cap": (0, 1), "cup": (1, 0), "mul": (2, 1), "comul": (1, 2), "id": (1, 1), "swap": (2, 2)}


@dataclass(frozen=True, eq=False)
class FrobeniusAlgebra:
    """A commutative Frobenius algebra given by structure constants in a fixed basis x_0..x_{k-1}.

    Attributes:
        mu (np.ndarray): Shape (k, k, k); x_a x_b = Σ_c mu[a, b, c] x_c.
        counit (np.ndarray): ε(x_a), shape (k,).
        unit (np.ndarray | None): Coordinates of 1; derived from mu by least squares when None.
        theta (tuple | None): Idempotent weights when the algebra is tagged semisimple.
        name (str): Label used in reports.

    """
    mu: np.ndarray
    counit: np.ndarray
    unit: Optional[np.ndarray] = None
    theta: Optional[tuple] = None
    name: str = "algebra"

    def __post_init__(self):
        mu = np.array(self.mu, dtype=complex)
        if mu.ndim != 3 or len(set(mu.shape)) != 1 or mu.shape[0] < 1:
            logger.error(f"Invalid structure constant shape: {mu.shape}")
            raise ValueError(f"Invalid structure constant shape: {mu.shape}. Must be (k, k, k) with k >= 1.")
        k = mu.shape[0]
        if k > MAX_ALGEBRA_DIM:
            logger.error(f"Algebra dimension {k} exceeds {MAX_ALGEBRA_DIM}")
            raise ValueError(f"Algebra dimension {k} exceeds the supported maximum of {MAX_ALGEBRA_DIM}")
        counit = np.array(self.counit, dtype=complex).reshape(-1)
        if counit.shape != (k,):
            logger.error(f"Counit has length {counit.size}, expected {k}")
            raise ValueError(f"Counit has length {counit.size}, expected {k}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(counit))):
            logger.error("Algebra data contains NaN or infinity")
            raise ValueError("Algebra data contains NaN or infinity")
        if self.unit is None:
            # Σ_a e_a mu[a, b, c] = δ_bc
            system = mu.transpose(1, 2, 0).reshape(k * k, k)
            unit = np.linalg.lstsq(system, np.eye(k).reshape(-1).astype(complex), rcond=None)[0]
        else:
            unit = np.array(self.unit, dtype=complex).reshape(-1)
            if unit.shape != (k,):
                logger.error(f"Unit has length {unit.size}, expected {k}")
                raise ValueError(f"Unit has length {unit.size}, expected {k}")
        theta = None if self.theta is None else tuple(complex(t) for t in self.theta)
        for array in (mu, counit, unit):
            array.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "counit", counit)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "theta", theta)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @cached_property
    def pairing(self) -> np.ndarray:
        """P[a, b] = ε(x_a x_b)."""
        return np.einsum("abc,c->ab", self.mu, self.counit)

    @cached_property
    def validation(self) -> AuditReport:
        return validate_frobenius(self)

    @property
    def is_valid(self) -> bool:
        return self.validation.passed

    def __str__(self) -> str:
        return self.name


##########################################################
# Constructors
##########################################################


def trivial() -> FrobeniusAlgebra:
    """A = C with ε(1) = 1."""
    return FrobeniusAlgebra(np.ones((1, 1, 1)), [1.0], unit=[1.0], theta=(1.0,), name="C")


def group_algebra_z2() -> FrobeniusAlgebra:
    """C[Z/2] in the group basis {1, g} with ε(1) = 1, ε(g) = 0 (idempotent weights ½, ½)."""
    mu = np.zeros((2, 2, 2))
    mu[0, 0, 0] = mu[0, 1, 1] = mu[1, 0, 1] = mu[1, 1, 0] = 1.0
    return FrobeniusAlgebra(mu, [1.0, 0.0], unit=[1.0, 0.0], theta=(0.5, 0.5), name="C[Z/2]")


def semisimple(theta: Sequence[complex], basis: Optional[np.ndarray] = None, name: Optional[str] = None) -> FrobeniusAlgebra:
    """C^k with idempotents e_i (e_i e_j = δ_ij e_i) and ε(e_i) = θ_i, optionally re-expressed in `basis`.

    Raises:
        ValueError: If theta is empty or has a zero weight.

    """
    theta = [complex(t) for t in theta]
    if len(theta) == 0 or any(abs(t) < PAIRING_TOL for t in theta):
        logger.error(f"Invalid idempotent weights: {theta}")
        raise ValueError(f"Invalid idempotent weights: {theta}. Must be nonempty and nonzero.")
    k = len(theta)
    mu = np.zeros((k, k, k))
    for i in range(k):
        mu[i, i, i] = 1.0
    label = name or "C^{}(theta={})".format(k, ",".join(f"{t.real:g}" if t.imag == 0 else str(t) for t in theta))
    algebra = FrobeniusAlgebra(mu, theta, unit=np.ones(k), theta=tuple(theta), name=label)
    return algebra if basis is None else change_basis(algebra, basis)


def change_basis(A: FrobeniusAlgebra, Q: np.ndarray) -> FrobeniusAlgebra:
    """Re-expresses A in the basis y_a = Σ_i Q[i, a] x_i; the semisimple tag is kept.

    Raises:
        ValueError: If Q is not an invertible k x k matrix.

    """
    Q = np.asarray(Q, dtype=complex)
    if Q.shape != (A.dim, A.dim):
        logger.error(f"Basis change of shape {Q.shape} for algebra of dimension {A.dim}")
        raise ValueError(f"Basis change must be {A.dim} x {A.dim}, got {Q.shape}")
    if np.linalg.svd(Q, compute_uv=False).min() < PAIRING_TOL:
        logger.error("Basis change matrix is singular")
        raise ValueError("Basis change matrix is singular")
    Qinv = np.linalg.inv(Q)
    mu = np.einsum("ia,jb,ijl,cl->abc", Q, Q, A.mu, Qinv)
    return FrobeniusAlgebra(mu, Q.T @ A.counit, unit=Qinv @ A.unit, theta=A.theta, name=A.name)


##########################################################
# Generators
##########################################################


@dataclass(frozen=True, eq=False)
class GeneratorMap:
    """Value of the TQFT on one generating bordism: a matrix A^{⊗out} x A^{⊗in}."""
    name: str
    matrix: np.ndarray
    euler: int

    @property
    def arity(self) -> tuple[int, int]:
        return ARITY[self.name]


def _swap_matrix(k: int) -> np.ndarray:
    s = np.zeros((k * k, k * k), dtype=complex)
    for a in range(k):
        for b in range(k):
            s[b * k + a, a * k + b] = 1.0
    return s


def _raw_generators(A: FrobeniusAlgebra) -> dict[str, np.ndarray]:
    """All six generator matrices, without checking the algebra laws."""
    k = A.dim
    pairing_inv = np.linalg.inv(A.pairing)
    # comul(x_c) = Σ_{a,b} Pinv[a, b] (x_c x_a) ⊗ x_b
    comul = np.einsum("ab,cad->dbc", pairing_inv, A.mu).reshape(k * k, k)
    return {
        "cap": A.unit.reshape(k, 1).copy(),
        "cup": A.counit.reshape(1, k).copy(),
        "mul": A.mu.transpose(2, 0, 1).reshape(k, k * k).copy(),
        "comul": comul,
        "id": np.eye(k, dtype=complex),
        "swap": _swap_matrix(k),
    }


def generator_matrix(A: FrobeniusAlgebra, name: str) -> GeneratorMap:
    """The matrix of one generator (cap, cup, mul, comul, id, swap).

    comul is the pairing-dual of mul: comul = (mul ⊗ id)(id ⊗ copairing) with copairing Σ P^{-1}_ab x_a ⊗ x_b.

    Raises:
        ValueError: If the name is unknown or the algebra fails validation.

    """
    if name not in GENERATOR_NAMES:
        logger.error(f"Unknown generator: {name}")
        raise ValueError(f"Unknown generator: {name}. Expected one of {', '.join(GENERATOR_NAMES)}.")
    if not A.is_valid:
        logger.error(f"Algebra {A} failed validation")
        raise ValueError(f"Algebra {A} is not a validated commutative Frobenius algebra")
    return GeneratorMap(name, _raw_generators(A)[name], EULER[name])


##########################################################
# Validation
##########################################################


def _min_singular_value(a: np.ndarray) -> float:
    return float(np.linalg.svd(a, compute_uv=False).min())


def is_unitary(A: FrobeniusAlgebra, tol: float = FROBENIUS_TOL) -> bool:
    """True iff the pairing is Hermitian positive definite in the given basis."""
    P = A.pairing
    if max_abs(P - P.conj().T) > tol:
        return False
    return float(np.linalg.eigvalsh((P + P.conj().T) / 2).min()) > tol


def validate_frobenius(A: FrobeniusAlgebra, tol: float = FROBENIUS_TOL) -> AuditReport:
    """Residuals of every commutative Frobenius algebra law.

    Args:
        A (FrobeniusAlgebra): The algebra.
        tol (float): Largest acceptable residual.

    Returns:
        AuditReport: Checks commutativity, associativity, unit, counit, coassociativity,
            frobenius and pairing-nondegenerate; notes carry the unitarity flag.

    Raises:
        ValueError: If the pairing ε(x_a x_b) is degenerate.

    """
    k = A.dim
    sigma_min = _min_singular_value(A.pairing)
    if sigma_min < PAIRING_TOL:
        logger.error(f"Algebra {A} has a degenerate pairing (smallest singular value {sigma_min:.3e})")
        raise ValueError(f"Degenerate pairing: smallest singular value {sigma_min:.3e} < {PAIRING_TOL}")

    report = AuditReport(f"frobenius {A}")
    mu = A.mu
    gens = _raw_generators(A)
    mul, comul, ident = gens["mul"], gens["comul"], gens["id"]

    def add(name: str, residual: float) -> None:
        report.add(CheckResult(name, residual <= tol, residual=residual))

    add("commutativity", max_abs(mu - mu.transpose(1, 0, 2)))
    add("associativity", max_abs(np.einsum("abd,dce->abce", mu, mu) - np.einsum("bcd,ade->abce", mu, mu)))
    left_unit = np.einsum("a,abc->bc", A.unit, mu) - np.eye(k)
    right_unit = np.einsum("a,bac->bc", A.unit, mu) - np.eye(k)
    add("unit", max(max_abs(left_unit), max_abs(right_unit)))
    cup = gens["cup"]
    add("counit", max(max_abs(np.kron(cup, ident) @ comul - ident), max_abs(np.kron(ident, cup) @ comul - ident)))
    add("coassociativity", max_abs(np.kron(comul, ident) @ comul - np.kron(ident, comul) @ comul))
    middle = comul @ mul
    add("frobenius", max(max_abs(np.kron(mul, ident) @ np.kron(ident, comul) - middle),
                         max_abs(np.kron(ident, mul) @ np.kron(comul, ident) - middle)))
    report.add(CheckResult("pairing-nondegenerate", True, notes=[f"smallest singular value {sigma_min:.6g}"]))

    report.notes.append(f"unitary: {is_unitary(A, tol)}")
    logger.info(f"Validated {A} (k={k}): {report.status}")
    return report


##########################################################
# Invariants
##########################################################


def closed_surface_invariant(A: FrobeniusAlgebra, genus: int) -> complex:
    """Value of the closed genus-g surface: cap ; (comul ; mul)^g ; cup, evaluated through bord."""
    # Local import: bord_model evaluates terms with this module's generators.
    from qcskit.models.bord_model import evaluate, genus_term

    return complex(evaluate(genus_term(genus), A)[0, 0])


def semisimple_invariant(theta: Sequence[complex], genus: int) -> complex:
    """Σ_i θ_i^{1-g}, the closed-form genus-g invariant of a semisimple algebra."""
    if genus < 0:
        raise ValueError(f"Invalid genus: {genus}. Must be non-negative.")
    return complex(sum(complex(t) ** (1 - genus) for t in theta))
