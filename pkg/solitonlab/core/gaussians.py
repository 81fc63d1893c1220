"""
Exact algebra of complex Gaussians g(x) = exp(-alpha x^2 + beta x + gamma).

Every bracket the variational engine needs is a product of a few Gaussians,
some of them conjugated, times a monomial x^d with d <= 4. A product of
Gaussians is again a Gaussian, so all brackets reduce to the closed-form moment

    M_d(a, b, c) = integral of x^d exp(-a x^2 + b x + c) dx,   Re(a) > 0,

computed by the b-derivative recurrence

    M_0     = sqrt(pi / a) exp(b^2 / (4a) + c)
    M_{d+1} = (b / 2a) M_d + (d / 2a) M_{d-1}.

The pair and quartic helpers return the exponent arrays of all products at
once so that sums over term indices are numpy reductions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from solitonlab.core.errors import DomainError, HermiticityError

MAX_DEGREE = 4
HERMITICITY_RTOL = 1e-12


# ----------------------------
# Value types
# ----------------------------

def _frozen_array(values: Iterable[complex]) -> NDArray[np.complex128]:
    arr = np.array(list(values), dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GaussianTerm:
    """One term exp(-alpha x^2 + beta x + gamma); gamma holds log-amplitude and phase."""

    alpha: complex
    beta: complex = 0j
    gamma: complex = 0j

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "gamma", complex(self.gamma))
        if not self.alpha.real > 0.0:
            raise DomainError(f"Re(alpha) must be positive (got {self.alpha})")


@dataclass(frozen=True)
class GaussianSum:
    """Ordered superposition of Gaussian terms."""

    terms: Tuple[GaussianTerm, ...]

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        if not terms:
            raise DomainError("a Gaussian sum needs at least one term")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    @cached_property
    def alphas(self) -> NDArray[np.complex128]:
        return _frozen_array([g.alpha for g in self.terms])

    @cached_property
    def betas(self) -> NDArray[np.complex128]:
        return _frozen_array([g.beta for g in self.terms])

    @cached_property
    def gammas(self) -> NDArray[np.complex128]:
        return _frozen_array([g.gamma for g in self.terms])

    def to_vector(self) -> NDArray[np.complex128]:
        """Parameter vector z = [alpha_1, beta_1, gamma_1, ..., gamma_N]."""
        return np.column_stack([self.alphas, self.betas, self.gammas]).reshape(-1)

    @classmethod
    def from_arrays(cls, alphas: ArrayLike, betas: ArrayLike, gammas: ArrayLike) -> "GaussianSum":
        return cls(
            tuple(
                GaussianTerm(a, b, c)
                for a, b, c in zip(np.ravel(alphas), np.ravel(betas), np.ravel(gammas))
            )
        )

    @classmethod
    def from_vector(cls, z: ArrayLike) -> "GaussianSum":
        z = np.asarray(z, dtype=complex).reshape(-1, 3)
        return cls.from_arrays(z[:, 0], z[:, 1], z[:, 2])


@dataclass(frozen=True)
class ExponentTriple:
    """Combined exponent exp(-a x^2 + b x + c) of a product of Gaussians."""

    a: complex
    b: complex
    c: complex


# ----------------------------
# Moments
# ----------------------------

def _require_normalizable(a: NDArray[np.complex128]) -> None:
    if np.any(~(np.real(a) > 0.0)):
        raise DomainError("non-normalizable integrand: Re(a) must be positive")


def moment_table(
    a: ArrayLike, b: ArrayLike, c: ArrayLike, max_degree: int = MAX_DEGREE
) -> NDArray[np.complex128]:
    """
    All moments M_0..M_max_degree for broadcastable exponent arrays.

    Returns an array of shape (max_degree + 1, *broadcast_shape).
    """
    a, b, c = np.broadcast_arrays(
        np.asarray(a, dtype=complex), np.asarray(b, dtype=complex), np.asarray(c, dtype=complex)
    )
    _require_normalizable(a)

    inv_2a = 0.5 / a
    u = b * inv_2a
    table = np.empty((max_degree + 1,) + a.shape, dtype=complex)
    table[0] = np.sqrt(np.pi / a) * np.exp(b * b * (0.5 * inv_2a) + c)
    if max_degree >= 1:
        table[1] = u * table[0]
    for d in range(1, max_degree):
        table[d + 1] = u * table[d] + d * inv_2a * table[d - 1]
    return table


def moment_integral(d: int, e: ExponentTriple) -> complex:
    """Closed-form integral of x^d exp(-a x^2 + b x + c) over the real line."""
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or not 0 <= d <= MAX_DEGREE:
        raise ValueError(f"moment degree must be an integer in 0..{MAX_DEGREE} (got {d!r})")
    return complex(moment_table(e.a, e.b, e.c, max_degree=int(d))[int(d)])


def product_exponent(
    conjugated: Sequence[GaussianTerm], plain: Sequence[GaussianTerm]
) -> ExponentTriple:
    """Exponent of prod conj(g_k) * prod g_n."""
    if not conjugated and not plain:
        raise ValueError("product_exponent needs at least one term")
    a = sum((g.alpha.conjugate() for g in conjugated), 0j) + sum((g.alpha for g in plain), 0j)
    b = sum((g.beta.conjugate() for g in conjugated), 0j) + sum((g.beta for g in plain), 0j)
    c = sum((g.gamma.conjugate() for g in conjugated), 0j) + sum((g.gamma for g in plain), 0j)
    return ExponentTriple(a=a, b=b, c=c)


def pair_exponents(psi: GaussianSum) -> Tuple[NDArray, NDArray, NDArray]:
    """Exponents of conj(g_k) g_n for all (k, n), each of shape (N, N)."""
    al, be, ga = psi.alphas, psi.betas, psi.gammas
    return (
        np.conj(al)[:, None] + al[None, :],
        np.conj(be)[:, None] + be[None, :],
        np.conj(ga)[:, None] + ga[None, :],
    )


def quartic_exponents(psi: GaussianSum) -> Tuple[NDArray, NDArray, NDArray]:
    """Exponents of conj(g_k) conj(g_l) g_m g_n, each of shape (N, N, N, N)."""

    def combine(v: NDArray) -> NDArray:
        cv = np.conj(v)
        return (
            cv[:, None, None, None]
            + cv[None, :, None, None]
            + v[None, None, :, None]
            + v[None, None, None, :]
        )

    return combine(psi.alphas), combine(psi.betas), combine(psi.gammas)


# ----------------------------
# Wave function and functionals
# ----------------------------

def evaluate(psi: GaussianSum, x: ArrayLike) -> NDArray[np.complex128] | complex:
    """psi(x) = sum_n exp(-alpha_n x^2 + beta_n x + gamma_n); x scalar or array."""
    xs = np.asarray(x, dtype=float)
    exponents = (
        -psi.alphas[:, None] * xs.reshape(-1)[None, :] ** 2
        + psi.betas[:, None] * xs.reshape(-1)[None, :]
        + psi.gammas[:, None]
    )
    values = np.exp(exponents).sum(axis=0).reshape(xs.shape)
    if values.ndim == 0:
        return complex(values)
    return values


def _hermitian_real(values: NDArray[np.complex128], what: str) -> float:
    total = values.sum()
    scale = float(np.abs(values).sum())
    if abs(total.imag) > HERMITICITY_RTOL * scale:
        raise HermiticityError(
            f"{what}: imaginary residue {total.imag:.3e} exceeds {HERMITICITY_RTOL:g} x {scale:.3e}"
        )
    return float(total.real)


def norm_squared(psi: GaussianSum) -> float:
    """<psi|psi> from the pairwise overlaps."""
    overlaps = moment_table(*pair_exponents(psi), max_degree=0)[0]
    return _hermitian_real(overlaps, "norm")


def second_derivative_factor(g: GaussianTerm) -> Tuple[complex, complex, complex]:
    """(c2, c1, c0) with g'' = (c2 x^2 + c1 x + c0) g."""
    a, b = g.alpha, g.beta
    return 4.0 * a * a, -4.0 * a * b, b * b - 2.0 * a


def _second_derivative_arrays(psi: GaussianSum) -> Tuple[NDArray, NDArray, NDArray]:
    a, b = psi.alphas, psi.betas
    return 4.0 * a * a, -4.0 * a * b, b * b - 2.0 * a


def kinetic_energy(psi: GaussianSum) -> float:
    """<psi| -d^2/dx^2 |psi>."""
    m = moment_table(*pair_exponents(psi), max_degree=2)
    c2, c1, c0 = _second_derivative_arrays(psi)
    brackets = -(c2[None, :] * m[2] + c1[None, :] * m[1] + c0[None, :] * m[0])
    return _hermitian_real(brackets, "kinetic energy")


def interaction_integral(psi: GaussianSum) -> float:
    """Integral of |psi|^4."""
    quartic = moment_table(*quartic_exponents(psi), max_degree=0)[0]
    return _hermitian_real(quartic, "interaction")


def energy(psi: GaussianSum) -> float:
    """Mean-field energy <-d^2/dx^2 - |psi|^2 / 2>."""
    return kinetic_energy(psi) - 0.5 * interaction_integral(psi)


def term_norms(psi: GaussianSum) -> NDArray[np.float64]:
    """<g_n|g_n> for every term separately."""
    al, be, ga = psi.alphas, psi.betas, psi.gammas
    m0 = moment_table(2.0 * al.real, 2.0 * be.real, 2.0 * ga.real, max_degree=0)[0]
    return m0.real


def concatenate(parts: Iterable[GaussianSum]) -> GaussianSum:
    """Join several sums into one, keeping term order."""
    return GaussianSum(tuple(g for part in parts for g in part.terms))
