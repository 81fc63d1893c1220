import math

import numpy as np
from scipy.integrate import trapezoid

from solitonlab.core.gaussians import GaussianSum, GaussianTerm


def normalized_gaussian(alpha: complex, beta: complex = 0j) -> GaussianSum:
    """Single unit-norm Gaussian; beta must be real."""
    a = complex(alpha).real
    b = complex(beta).real
    # integral of exp(-2a x^2 + 2b x + 2 Re gamma) = sqrt(pi / 2a) exp(b^2 / 2a + 2 Re gamma)
    gamma = -0.25 * math.log(math.pi / (2.0 * a)) - b * b / (4.0 * a)
    return GaussianSum((GaussianTerm(alpha, beta, gamma),))


def random_sum(rng, n_terms: int) -> GaussianSum:
    terms = []
    for _ in range(n_terms):
        alpha = complex(rng.uniform(0.1, 1.0), rng.uniform(-0.3, 0.3))
        beta = complex(rng.uniform(-0.5, 0.5), rng.uniform(-1.0, 1.0))
        gamma = complex(rng.uniform(-0.5, 0.5), rng.uniform(-math.pi, math.pi))
        terms.append(GaussianTerm(alpha, beta, gamma))
    return GaussianSum(tuple(terms))


def dense_grid(half_width: float = 40.0, points: int = 40001) -> np.ndarray:
    return np.linspace(-half_width, half_width, points)


def terms_on_grid(psi: GaussianSum, x: np.ndarray) -> np.ndarray:
    """g_n(x) for every term, shape (N, len(x))."""
    return np.exp(-psi.alphas[:, None] * x**2 + psi.betas[:, None] * x + psi.gammas[:, None])


def integrate(values: np.ndarray, x: np.ndarray) -> complex:
    return complex(trapezoid(values, x))
