import json

import numpy as np
import pytest
from click.testing import CliRunner

from app import create_app
from config import TestConfig
from qcskit.models.frobenius_model import group_algebra_z2, semisimple, trivial
from qcskit.models.herm_model import HermMat, diag
from qcskit.utils.random_utils import get_rng


@pytest.fixture
def rng():
    """Fixture providing a generator seeded with 0 for each test.

    """
    return get_rng(0)


@pytest.fixture
def cli():
    """Fixture providing the command line application built with the test configuration.

    """
    return create_app(TestConfig)


@pytest.fixture
def runner():
    """Fixture providing a CliRunner that keeps stdout and stderr apart.

    """
    return CliRunner(mix_stderr=False)


@pytest.fixture
def invoke(cli, runner):
    """Fixture returning a helper that runs the CLI and parses the JSON on stdout when there is one.

    """
    def _invoke(*args):
        result = runner.invoke(cli, list(args))
        payload = json.loads(result.output) if result.output.strip().startswith("{") else None
        return result, payload
    return _invoke


# Fixtures providing the algebra corpus
@pytest.fixture
def algebra_c():
    """The trivial algebra C with counit 1.
    """
    return trivial()


@pytest.fixture
def algebra_z2():
    """The group algebra C[Z/2] in the group basis.
    """
    return group_algebra_z2()


@pytest.fixture
def algebra_theta23():
    """C^2 with idempotent weights (2, 3).
    """
    return semisimple([2, 3])


@pytest.fixture
def algebra_theta11():
    """C^2 with idempotent weights (1, 1); its generators cannot all be rescaled into norm 1.
    """
    return semisimple([1, 1])


@pytest.fixture
def algebra_corpus(algebra_c, algebra_z2, algebra_theta23):
    """The named algebras plus seeded semisimple algebras in random bases.
    """
    rng = np.random.default_rng(7)
    seeded = []
    for i in range(5):
        k = int(rng.integers(1, 4))
        theta = rng.uniform(0.5, 3.0, size=k)
        basis = rng.standard_normal((k, k)) + np.eye(k) * 3
        seeded.append(semisimple(theta, basis=basis, name=f"seeded-{i}"))
    return [algebra_c, algebra_z2, algebra_theta23] + seeded


@pytest.fixture
def generators_square():
    """A small finite generator set on C^2.
    """
    return [diag(1, 0), diag(0, 1), HermMat(np.array([[0.5, 0.5], [0.5, 0.5]]))]
