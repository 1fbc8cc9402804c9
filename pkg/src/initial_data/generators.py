"""
Fixture families of initial data

Every generator evaluates its profiles, their radial derivatives and the
enclosed mass in closed form, so the returned data carries exact node
slopes and an exact m0.
"""
import logging
from typing import Optional

import numpy as np

from src.errors import ConstructionError
from src.initial_data.initial_data import InitialData
from src.potential.radial_potential import (
    PotentialSpec, c_min, equilibrium_radius, newtonian, newtonian_d1
)

logger = logging.getLogger(__name__)

FAMILIES = ('stationary', 'compliant', 'perturbed', 'blowup')


def radial_grid(R0: float = 1.0, n_nodes: int = 512, min_fraction: float = 1e-4) -> np.ndarray:
    """Log-spaced nodes on [min_fraction * R0, R0]"""
    if R0 <= 0:
        raise ConstructionError(f"R0 must be positive, got {R0}")
    if n_nodes < 2:
        raise ConstructionError(f"Need at least two nodes, got {n_nodes}")
    return np.geomspace(min_fraction * R0, R0, n_nodes)


def make_stationary(d: int, R0: float = 1.0, n_nodes: int = 512, min_fraction: float = 1e-4) -> InitialData:
    """
    Steady state u0 = 0 with force balance m0 N'(r) + r = 0 at every node

    The enclosed mass solving the balance is m0 = r / |N'(r)|, a power law
    c r^d, so P0 = d m0 / r.
    """
    spec = PotentialSpec(d=d)
    r = radial_grid(R0, n_nodes, min_fraction)
    m = r / np.abs(newtonian_d1(r, spec))
    P = d * m / r
    P_slopes = d * (d - 1) * m / r ** 2
    zeros = np.zeros_like(r)
    return InitialData.from_arrays(r, P, zeros, d, P0_slopes=P_slopes, u0_slopes=zeros, m0=m)


def make_compliant(d: int, C0: float, A: Optional[float] = None, B: float = 0.0, R0: float = 1.0,
                   sign: float = 1.0, n_nodes: int = 512, min_fraction: float = 1e-4) -> InitialData:
    """
    Data with c0(r) = C0 at every node

    The mass is m0 = A r^d (1 + B r^2); u0 is solved from the energy:
        u0 = sign * sqrt(2 (C0 m0^(2/d) - m0 N - r^2/2))             (d >= 3)
        u0 = sign * sqrt(2 (m0 (C0 - ln(m0)/(4 pi)) - m0 N - r^2/2))  (d = 2)
    The default A = r*^(-d) of the unit-mass potential places every
    characteristic near the middle of its orbit.

    Raises:
        ConstructionError: If C0 < C_min, P0 turns negative, or the
            radicand is negative at some node.
    """
    spec = PotentialSpec(d=d)
    floor = c_min(d)
    if C0 < floor:
        raise ConstructionError(f"C0 = {C0} lies below C_min = {floor}")
    if A is None:
        A = equilibrium_radius(spec) ** (-d)
    if A <= 0:
        raise ConstructionError(f"Mass amplitude A must be positive, got {A}")
    if sign not in (1.0, -1.0, 1, -1):
        raise ConstructionError(f"sign must be +1 or -1, got {sign}")

    r = radial_grid(R0, n_nodes, min_fraction)
    m = A * r ** d * (1.0 + B * r * r)
    P = A * r ** (d - 1) * (d + (d + 2) * B * r * r)
    P_slopes = A * r ** (d - 2) * (d * (d - 1) + (d + 2) * (d + 1) * B * r * r)
    if np.any(P < 0):
        bad = r[np.argmax(P < 0)]
        raise ConstructionError(f"Mass shape B = {B} makes P0 negative", radius=float(bad))

    N = newtonian(r, spec)
    N1 = newtonian_d1(r, spec)
    if d == 2:
        log_term = C0 - np.log(m) / (4.0 * np.pi)
        K = 2.0 * (m * log_term - m * N - 0.5 * r * r)
        K_slopes = 2.0 * (P * log_term - P / (4.0 * np.pi) - P * N - m * N1 - r)
    else:
        K = 2.0 * (C0 * m ** (2.0 / d) - m * N - 0.5 * r * r)
        K_slopes = 2.0 * (C0 * (2.0 / d) * m ** (2.0 / d - 1.0) * P - P * N - m * N1 - r)

    tol = 1e-12 * np.maximum(1.0, np.abs(m * N) + r * r)
    if np.any(K < -tol):
        bad = r[np.argmax(K < -tol)]
        raise ConstructionError(f"Energy radicand is negative for C0 = {C0}", radius=float(bad))
    K = np.maximum(K, 0.0)

    root = np.sqrt(K)
    u = sign * root
    with np.errstate(divide='ignore', invalid='ignore'):
        u_slopes = sign * K_slopes / (2.0 * root)
    turning = ~np.isfinite(u_slopes)
    if np.any(turning):
        # nodes sitting exactly on a turning point: finite-difference slope
        u_slopes[turning] = np.gradient(u, r)[turning]

    logger.debug(f"Built compliant data d={d}, C0={C0}, A={A:.6g}, B={B:.6g}")
    return InitialData.from_arrays(r, P, u, d, P0_slopes=P_slopes, u0_slopes=u_slopes, m0=m)


def perturb_velocity(data: InitialData, alpha: float = 1.0) -> InitialData:
    """Scale u0 by (1 + alpha r / R0), which breaks constancy of c0"""
    r = data.grid
    factor = 1.0 + alpha * r / data.R0
    u = data.u0.values
    slopes = data.u0.node_slopes() * factor + u * alpha / data.R0
    return data.with_velocity(u * factor, slopes)


def blowup_shape(d: int, R0: float = 1.0, margin: float = 0.98) -> float:
    """Shape parameter B close to the lower bound -d/((d+2) R0^2), where P0(R0) -> 0"""
    return -margin * d / ((d + 2) * R0 * R0)


def make_fixture(family: str, d: int, c0_offset: float = 0.5, R0: float = 1.0, n_nodes: int = 512,
                 shape: Optional[float] = None, alpha: float = 1.0, min_fraction: float = 1e-4,
                 blowup_margin: float = 0.98) -> InitialData:
    """
    Named data families

    stationary  force-balanced steady state
    compliant   constant c0 = C_min + c0_offset, mild shape B = 0.05/R0^2
    perturbed   compliant data with u0 scaled by (1 + alpha r/R0)
    blowup      constant c0 with P0/(d m0) small near R0
    """
    if family not in FAMILIES:
        raise ConstructionError(f"Unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    if family == 'stationary':
        return make_stationary(d, R0=R0, n_nodes=n_nodes, min_fraction=min_fraction)

    C0 = c_min(d) + c0_offset
    if family == 'blowup':
        B = blowup_shape(d, R0, blowup_margin) if shape is None else shape
    else:
        B = 0.05 / (R0 * R0) if shape is None else shape
    data = make_compliant(d, C0, B=B, R0=R0, n_nodes=n_nodes, min_fraction=min_fraction)
    if family == 'perturbed':
        data = perturb_velocity(data, alpha)
    return data
