import numpy as np
import pytest

from chanest.channels import ChannelParams
from chanest.states import BellDiagonal


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def random_simplex_p(rng: np.random.Generator) -> ChannelParams:
    """Uniform channel parameters with p1 + p2 + p3 <= 1."""
    p = rng.dirichlet(np.ones(4))[:3]
    return ChannelParams(*p)


def random_identifiable_alpha(rng: np.random.Generator, margin: float = 0.1) -> BellDiagonal:
    """Random Bell-diagonal weights whose Walsh coefficients stay away from zero.

    The margin keeps the estimator inversion well conditioned so oracle
    comparisons at 1e-12 are meaningful.
    """
    while True:
        alpha = rng.dirichlet(np.ones(4))
        a1, a2, a3, a4 = alpha
        coeffs = (1 - 2 * a1 - 2 * a2, 1 - 2 * a1 - 2 * a3, 1 - 2 * a2 - 2 * a3)
        if min(abs(c) for c in coeffs) >= margin:
            return BellDiagonal(tuple(alpha))
