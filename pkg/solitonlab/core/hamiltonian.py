"""
Single-Gaussian Hamiltonian picture.

For one normalized Gaussian the energy functional reduces to a particle with
coordinate q = 1/(2 sqrt(Re alpha)) moving in

    H(q, p) = p^2 + 1/(4 q^2) - 1/(4 sqrt(pi) q),

with the minimum of V at q_min = 2 sqrt(pi), V(q_min) = -1/(16 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp

from solitonlab.core.errors import DomainError
from solitonlab.core.gaussians import GaussianTerm

SQRT_PI = math.sqrt(math.pi)
Q_MIN = 2.0 * SQRT_PI


@dataclass(frozen=True)
class HamiltonianPoint:
    q: float
    p: float
    H: float
    T: float
    V: float


def _require_positive(q: float) -> None:
    if not q > 0.0:
        raise DomainError(f"q must be positive (got {q})")


def potential(q: float) -> float:
    _require_positive(q)
    return 1.0 / (4.0 * q * q) - 1.0 / (4.0 * SQRT_PI * q)


def potential_derivative(q: float) -> float:
    _require_positive(q)
    return -1.0 / (2.0 * q**3) + 1.0 / (4.0 * SQRT_PI * q * q)


def potential_curvature(q: float) -> float:
    _require_positive(q)
    return 3.0 / (2.0 * q**4) - 1.0 / (2.0 * SQRT_PI * q**3)


def hamiltonian_picture(q: float, p: float) -> HamiltonianPoint:
    q, p = float(q), float(p)
    V = potential(q)
    T = p * p
    return HamiltonianPoint(q=q, p=p, H=T + V, T=T, V=V)


def hamiltonian_scan(q_min: float, q_max: float, q_points: int, p: float = 0.0) -> List[HamiltonianPoint]:
    """H on an equidistant q grid; the data behind the V(q) curve."""
    if not q_max > q_min:
        raise ValueError("q_max must be larger than q_min")
    return [hamiltonian_picture(q, p) for q in np.linspace(q_min, q_max, int(q_points))]


def harmonic_frequency() -> float:
    """Small-oscillation frequency around q_min, sqrt(2 V''(q_min)) = 1/(4 pi)."""
    return math.sqrt(2.0 * potential_curvature(Q_MIN))


def collective_coordinates(term: GaussianTerm) -> Tuple[float, float]:
    """
    (q, p) of a single Gaussian.

    q = 1/(2 sqrt(Re alpha)) and p = -Im(alpha) / sqrt(Re alpha), so that the
    free part of the motion gives dq/dt = 2p as Hamilton's equations require.
    """
    a = term.alpha.real
    return 1.0 / (2.0 * math.sqrt(a)), -term.alpha.imag / math.sqrt(a)


def alpha_from_coordinates(q: float, p: float) -> complex:
    """Inverse of collective_coordinates for the width parameter."""
    _require_positive(q)
    a = 1.0 / (4.0 * q * q)
    return complex(a, -p * math.sqrt(a))


def hamilton_trajectory(
    q0: float,
    p0: float,
    times: Sequence[float],
    *,
    rtol: float = 1e-12,
    atol: float = 1e-12,
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Integrate dq/dt = 2p, dp/dt = -V'(q) and sample at `times`."""
    _require_positive(q0)
    t_eval = np.asarray(times, dtype=float)

    def rhs(_t: float, y: NDArray) -> List[float]:
        return [2.0 * y[1], -potential_derivative(y[0])]

    sol = solve_ivp(
        rhs,
        (float(t_eval[0]), float(t_eval[-1])),
        [q0, p0],
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise RuntimeError(f"Hamilton integration failed: {sol.message}")
    return sol.y[0], sol.y[1]
