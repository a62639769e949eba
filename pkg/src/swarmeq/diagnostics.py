"""Quantitative checks on computed critical points.

The headline diagnostic is the sup-norm residual of the critical-point
identity K*rho + nu log(rho) + V = const, with the constant taken as
total + interaction energy (the two agree for any exact critical point).
The boundary identity rho(0) = g/nu and the centre-of-mass drift give
independent checks tied to the domain boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .energy import total_energy
from .grid import Density, KernelOperator, convolve_kernel, integrate
from .potentials import ExternalPotential, InteractionKernel, LinearPotential


class Moments(NamedTuple):
    m1: float
    m2: float
    com: float


@dataclass(frozen=True)
class DiagnosticsReport:
    lambda_inf: float
    e0: float | None
    com_drift: float
    lam: float
    moments: Moments


def euler_lagrange_residual(
    kernel: InteractionKernel,
    potential: ExternalPotential,
    nu: float,
    rho: Density,
    conv: np.ndarray | None = None,
) -> float:
    """max_i | K*rho + nu log(rho) + V - (total + interaction energy) |.

    Vanishes (to accumulated roundoff) exactly on discrete fixed points of the
    Gibbs map.  Requires a strictly positive density, which Gibbs-map outputs
    are by construction.
    """
    values = rho.values
    if np.any(values <= 0):
        i = int(np.argmax(values <= 0))
        raise ValueError(
            f"density is not strictly positive at node {i} "
            f"(x = {rho.grid.nodes[i]!r}); not a Gibbs-map output"
        )
    if conv is None:
        conv = convolve_kernel(rho.grid, kernel, rho)
    breakdown = total_energy(kernel, potential, nu, rho, conv=conv)
    profile = conv + nu * np.log(values) + np.asarray(potential(rho.grid.nodes), float)
    lam = breakdown.total + breakdown.interaction
    return float(np.max(np.abs(profile - lam)))


def boundary_condition_error(rho: Density, potential: LinearPotential, nu: float) -> float:
    """Relative error of the boundary identity rho(0) = g/nu (exact on the
    half-line when the far tail is negligible)."""
    if not isinstance(potential, LinearPotential) or potential.g <= 0:
        raise ValueError(
            "boundary identity needs a linear potential with g > 0; "
            "for g = 0 use com_drift instead"
        )
    target = potential.g / nu
    return abs(float(rho.values[0]) - target) / target


def com_drift(rho: Density, potential: ExternalPotential, nu: float) -> float:
    """Instantaneous centre-of-mass drift of the evolution at this density.

    In one dimension on [0, L] this is -int V' rho + nu (rho(0) - rho(L));
    it vanishes at critical points.  Positive drift pushes the swarm right
    (mass escaping from the x = 0 wall).
    """
    nodes = rho.grid.nodes
    vprime = np.asarray(potential.derivative(nodes), dtype=float)
    forcing = integrate(rho.grid, vprime * rho.values)
    return -forcing + nu * (float(rho.values[0]) - float(rho.values[-1]))


def moments(rho: Density) -> Moments:
    """First and second moments about the origin; com coincides with m1 here."""
    nodes = rho.grid.nodes
    m1 = integrate(rho.grid, nodes * rho.values)
    m2 = integrate(rho.grid, nodes * nodes * rho.values)
    return Moments(m1=m1, m2=m2, com=m1)


def diagnose(
    kernel: InteractionKernel,
    potential: ExternalPotential,
    nu: float,
    rho: Density,
    operator: KernelOperator | None = None,
) -> DiagnosticsReport:
    """Run all diagnostics on a density and collect them in one report."""
    conv = (operator or KernelOperator(rho.grid, kernel)).apply(rho.values)
    breakdown = total_energy(kernel, potential, nu, rho, conv=conv)
    e0: float | None = None
    if isinstance(potential, LinearPotential) and potential.g > 0:
        e0 = boundary_condition_error(rho, potential, nu)
    return DiagnosticsReport(
        lambda_inf=euler_lagrange_residual(kernel, potential, nu, rho, conv=conv),
        e0=e0,
        com_drift=com_drift(rho, potential, nu),
        lam=breakdown.total + breakdown.interaction,
        moments=moments(rho),
    )
