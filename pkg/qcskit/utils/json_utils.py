"""JSON file formats: matrices, QCS descriptions, Choi morphisms and Frobenius algebras.

Hermitian matrices are {"n": int, "entries": rows}; a bare list of rows is also accepted.
Every entry is either a real number or a [re, im] pair. Output always uses [re, im] pairs
so files written by the toolkit round-trip exactly.
"""
import json
import logging
import math
from typing import Any, Union

import numpy as np

from qcskit.models.choi_model import ChoiMorphism
from qcskit.models.frobenius_model import FrobeniusAlgebra, semisimple
from qcskit.models.herm_model import HermMat
from qcskit.models.qcs_model import MembershipVerdict, QcsDesc, QcsVariant
from qcskit.utils.logger import configure_logger


logger = logging.getLogger(__name__)
configure_logger(logger)


def read_json(path: str) -> Any:
    """Loads a JSON file; decode errors become ValueError with the file position.

    Raises:
        OSError: If the file cannot be read.
        ValueError: If the content is not valid JSON.

    """
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        logger.error(f"Malformed JSON in {path} at line {e.lineno}, column {e.colno}")
        raise ValueError(f"{path}:{e.lineno}:{e.colno}: malformed JSON ({e.msg})") from e


def dumps(payload: Any) -> str:
    """Stable rendering: sorted keys, two-space indent."""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


##########################################################
# Scalars and matrices
##########################################################


def complex_from_json(value: Any, where: str = "value") -> complex:
    if isinstance(value, bool):
        raise ValueError(f"{where}: expected a number or [re, im], got a boolean")
    if isinstance(value, (int, float)):
        result = complex(value)
    elif isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        result = complex(value[0], value[1])
    else:
        logger.error(f"{where}: invalid scalar {value!r}")
        raise ValueError(f"{where}: expected a number or [re, im], got {value!r}")
    if not (math.isfinite(result.real) and math.isfinite(result.imag)):
        raise ValueError(f"{where}: non-finite entry")
    return result


def complex_to_json(value: complex) -> list[float]:
    value = complex(value)
    return [float(value.real), float(value.imag)]


def array_from_json(data: Any, rank: int, where: str = "array") -> np.ndarray:
    """Nested lists of scalars to a complex array of the given rank.

    The rank resolves the ambiguity between a [re, im] pair and a length-2 real vector.
    """
    if rank == 0:
        return np.array(complex_from_json(data, where))
    if not isinstance(data, list) or not data:
        logger.error(f"{where}: expected a nonempty list")
        raise ValueError(f"{where}: expected a nonempty list (rank {rank})")
    parts = [array_from_json(item, rank - 1, f"{where}[{i}]") for i, item in enumerate(data)]
    if len({p.shape for p in parts}) != 1:
        logger.error(f"{where}: ragged nesting")
        raise ValueError(f"{where}: nested lists have different lengths")
    return np.array(parts, dtype=complex)


def matrix_from_json(data: Any, where: str = "matrix") -> np.ndarray:
    """A rectangular 2D complex matrix."""
    return array_from_json(data, 2, where)


def herm_from_json(data: Any, where: str = "matrix") -> HermMat:
    """A Hermitian matrix as {"n": int, "entries": rows} or as a bare list of rows.

    Raises:
        ValueError: If the entries are malformed, not n x n or not Hermitian.

    """
    if isinstance(data, dict):
        n = _int_field(data, "n", where)
        if "entries" not in data:
            logger.error(f"{where}.entries: missing")
            raise ValueError(f"{where}.entries: missing")
        entries = matrix_from_json(data["entries"], f"{where}.entries")
        if entries.shape != (n, n):
            logger.error(f"{where}.n: declared {n}, entries have shape {entries.shape}")
            raise ValueError(f"{where}.n: declared {n} but entries are {entries.shape[0]} x {entries.shape[1]}")
        data = entries
    try:
        return HermMat(data if isinstance(data, np.ndarray) else matrix_from_json(data, where))
    except ValueError as e:
        if str(e).startswith(where):
            raise
        raise ValueError(f"{where}: {e}") from e


def herm_to_json(f: HermMat) -> dict:
    return {"n": f.n, "entries": matrix_to_json(f.entries)}


def matrix_to_json(a) -> Union[list, dict]:
    """Nested [re, im] pairs for a complex array; a HermMat is written as {"n", "entries"}."""
    if isinstance(a, HermMat):
        return herm_to_json(a)
    a = np.asarray(a)
    if a.ndim == 0:
        return complex_to_json(a.item())
    return [matrix_to_json(row) for row in a]


##########################################################
# Descriptions and morphisms
##########################################################


def desc_from_json(data: Any, where: str = "desc") -> QcsDesc:
    """{"variant": "D"|"P"|"generated"|"polar"|"tensor"|"unit", "n": int, "generators": [...], "factors": [...]}"""
    if not isinstance(data, dict) or "variant" not in data:
        logger.error(f"{where}: missing variant")
        raise ValueError(f"{where}: expected an object with a 'variant' field")
    try:
        variant = QcsVariant(data["variant"])
    except ValueError:
        logger.error(f"{where}: unknown variant {data['variant']!r}")
        raise ValueError(f"{where}: unknown variant {data['variant']!r}")
    if variant == QcsVariant.D:
        return QcsDesc.canonical_d(_int_field(data, "n", where))
    if variant == QcsVariant.P:
        return QcsDesc.canonical_p(_int_field(data, "n", where))
    if variant == QcsVariant.UNIT:
        return QcsDesc.unit()
    if variant == QcsVariant.TENSOR:
        factors = data.get("factors")
        if not isinstance(factors, list) or len(factors) != 2:
            raise ValueError(f"{where}.factors: expected exactly two descriptions")
        return QcsDesc.tensor_of(desc_from_json(factors[0], f"{where}.factors[0]"),
                                 desc_from_json(factors[1], f"{where}.factors[1]"))
    generators = data.get("generators")
    if not isinstance(generators, list) or not generators:
        raise ValueError(f"{where}.generators: expected a nonempty list of matrices")
    mats = [herm_from_json(g, f"{where}.generators[{i}]") for i, g in enumerate(generators)]
    desc = QcsDesc.generated(mats) if variant == QcsVariant.GENERATED else QcsDesc.polar_of(mats)
    if "n" in data and _int_field(data, "n", where) != desc.carrier:
        raise ValueError(f"{where}.n: declared {data['n']} but generators have carrier {desc.carrier}")
    return desc


def desc_to_json(desc: QcsDesc) -> dict:
    data = {"variant": desc.variant.value, "n": desc.carrier}
    if desc.generators:
        data["generators"] = [herm_to_json(g) for g in desc.generators]
    if desc.factors:
        data["factors"] = [desc_to_json(f) for f in desc.factors]
    return data


def _int_field(data: dict, key: str, where: str) -> int:
    value = data.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        logger.error(f"{where}.{key}: not an integer")
        raise ValueError(f"{where}.{key}: expected an integer, got {value!r}")
    return value


def morphism_from_json(data: Any, where: str = "morphism") -> ChoiMorphism:
    """{"in_dim": n, "out_dim": m, "choi": matrix, "domain": desc, "codomain": desc}"""
    if not isinstance(data, dict):
        raise ValueError(f"{where}: expected an object")
    n, m = _int_field(data, "in_dim", where), _int_field(data, "out_dim", where)
    if "choi" not in data:
        raise ValueError(f"{where}.choi: missing")
    F = herm_from_json(data["choi"], f"{where}.choi")
    domain = desc_from_json(data["domain"], f"{where}.domain") if "domain" in data else None
    codomain = desc_from_json(data["codomain"], f"{where}.codomain") if "codomain" in data else None
    return ChoiMorphism(F, n, m, domain, codomain)


def morphism_to_json(F: ChoiMorphism) -> dict:
    return {
        "in_dim": F.in_dim,
        "out_dim": F.out_dim,
        "choi": herm_to_json(F.F),
        "domain": desc_to_json(F.domain),
        "codomain": desc_to_json(F.codomain),
    }


##########################################################
# Algebras
##########################################################


def algebra_from_json(data: Any, where: str = "algebra") -> FrobeniusAlgebra:
    """{"dim": k, "kind": "structure"|"semisimple", "mu": [...], "counit": [...], "theta": [...]}

    Optional keys: "unit" (structure kind), "basis" (semisimple kind), "name".
    """
    if not isinstance(data, dict):
        raise ValueError(f"{where}: expected an object")
    k = _int_field(data, "dim", where)
    kind = data.get("kind", "structure")
    name = data.get("name")
    if kind == "semisimple":
        theta = data.get("theta")
        if not isinstance(theta, list) or len(theta) != k:
            raise ValueError(f"{where}.theta: expected {k} weights")
        weights = [complex_from_json(t, f"{where}.theta[{i}]") for i, t in enumerate(theta)]
        basis = matrix_from_json(data["basis"], f"{where}.basis") if "basis" in data else None
        return semisimple(weights, basis=basis, name=name)
    if kind != "structure":
        logger.error(f"{where}.kind: unknown kind {kind!r}")
        raise ValueError(f"{where}.kind: expected 'structure' or 'semisimple', got {kind!r}")
    mu = array_from_json(data.get("mu"), 3, f"{where}.mu")
    if mu.shape != (k, k, k):
        raise ValueError(f"{where}.mu: expected shape ({k}, {k}, {k}), got {mu.shape}")
    counit = array_from_json(data.get("counit"), 1, f"{where}.counit")
    unit = array_from_json(data["unit"], 1, f"{where}.unit") if "unit" in data else None
    theta = data.get("theta")
    theta = None if theta is None else tuple(complex_from_json(t, f"{where}.theta[{i}]") for i, t in enumerate(theta))
    return FrobeniusAlgebra(mu, counit, unit=unit, theta=theta, name=name or "algebra")


def algebra_to_json(A: FrobeniusAlgebra) -> dict:
    data = {
        "dim": A.dim,
        "kind": "structure",
        "name": A.name,
        "mu": matrix_to_json(A.mu),
        "counit": matrix_to_json(A.counit),
        "unit": matrix_to_json(A.unit),
    }
    if A.theta is not None:
        data["theta"] = [complex_to_json(t) for t in A.theta]
    return data


##########################################################
# Command-line arguments and verdicts
##########################################################


def load_argument(value: str, where: str = "argument") -> Any:
    """Inline JSON when the value starts with '[' or '{', otherwise a path to a JSON file.

    Raises:
        OSError: If the file cannot be read.
        ValueError: If the content is not valid JSON (message carries line and column).

    """
    text = value.lstrip()
    if not text.startswith(("[", "{")):
        return read_json(value)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        logger.error(f"Malformed inline JSON for {where} at line {e.lineno}, column {e.colno}")
        raise ValueError(f"{where}:{e.lineno}:{e.colno}: malformed JSON ({e.msg})") from e


def matrices_from_json(data: Any, where: str = "generators") -> list[HermMat]:
    """A nonempty list of Hermitian matrices, or a description object carrying "generators"."""
    if isinstance(data, dict):
        data = data.get("generators")
    if not isinstance(data, list) or not data:
        logger.error(f"{where}: expected a nonempty list of matrices")
        raise ValueError(f"{where}: expected a nonempty list of matrices")
    return [herm_from_json(g, f"{where}[{i}]") for i, g in enumerate(data)]


def verdict_to_json(verdict: MembershipVerdict) -> dict:
    data = {
        "answer": verdict.answer.value,
        "certificate": verdict.certificate,
        "iterations": verdict.iterations,
        "witness": None if verdict.witness is None else herm_to_json(verdict.witness),
        "pairing": verdict.pairing,
        "side": verdict.side,
        "notes": list(verdict.notes),
    }
    if verdict.relative_to_outer_approximation:
        data["relative_to_outer_approximation"] = True
    return data
