import math

import numpy as np
import pytest
from scipy.special import erfc

from model.mdd import make_breit_wigner, make_toy_mdd
from utils.config import QuadratureConfig

# <eta> for the toy density alpha = 0, xi0 = 1 at rest
A0_TOY = 1.0 + math.e * math.sqrt(math.pi) / 2.0 * float(erfc(1.0))


@pytest.fixture(scope="session")
def toy0():
    return make_toy_mdd(0.0, 1.0)


@pytest.fixture(scope="session")
def toy1():
    return make_toy_mdd(1.0, 1.0)


@pytest.fixture(scope="session")
def toy2():
    return make_toy_mdd(2.0, 1.0)


@pytest.fixture(scope="session")
def toy_half():
    return make_toy_mdd(0.5, 1.0)


@pytest.fixture(scope="session")
def breit_wigner():
    return make_breit_wigner(1.0, 0.2, 0.5)


@pytest.fixture(scope="session")
def cfg():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def oracle_cfg():
    return QuadratureConfig.oracle()


@pytest.fixture
def toy_table(tmp_path):
    """Toy alpha = 0 density sampled on [1, 7] with its metadata sidecar."""

    def build(factor: float = 1.0):
        xi = np.linspace(1.0, 7.0, 601)
        omega = factor * 2.0 * xi * np.exp(-(xi * xi - 1.0))
        table = tmp_path / f"toy_{factor:g}.csv"
        with open(table, "w") as f:
            f.write("xi,omega\n")
            for x, w in zip(xi, omega):
                f.write(f"{x:.17g},{w:.17g}\n")
        meta = table.with_suffix(".json")
        meta.write_text(
            '{"alpha": 0, "xi0": 1.0, "omega0_at_xi0": %r, "omega0_prime_at_xi0": %r, '
            '"tail_decay_exponent": "inf"}' % (2.0 * factor, -2.0 * factor)
        )
        return table

    return build
