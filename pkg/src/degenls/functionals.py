"""Conserved quantities, Weinstein quotient, Pohozaev residuals, and scalings.

Reported integrals are full-space values: every radial quadrature carries the
surface-measure constant |S^{d-1}| exactly once.  The identities are
homogeneous in that constant, so residuals are convention-free; keeping it
explicit avoids the factor-of-2 trap in d = 1 (full line = 2 x half line).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .discretization import Profile, RadialGrid, build_grid, gradient_energy
from .exceptions import InvalidParameterError
from .model import ModelParams, profile_evaluator


def sphere_area(d: int) -> float:
    """|S^{d-1}| = 2 pi^{d/2} / Gamma(d/2); equals 2 for d = 1."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def mass_of(grid: RadialGrid, u: np.ndarray) -> float:
    """integral |u|^2 dx."""
    return sphere_area(grid.d) * float(np.sum(grid.volumes * np.abs(u) ** 2))


def lp_power_of(grid: RadialGrid, u: np.ndarray, q: float) -> float:
    """integral |u|^q dx."""
    return sphere_area(grid.d) * float(np.sum(grid.volumes * np.abs(u) ** q))


def kinetic_of(grid: RadialGrid, a: float, u: np.ndarray) -> float:
    """integral |x|^{2a} |grad u|^2 dx for radial samples."""
    return sphere_area(grid.d) * gradient_energy(grid, a, u)


def energy_of(params: ModelParams, grid: RadialGrid, u: np.ndarray) -> float:
    """E = (1/2) integral |x|^{2a}|grad u|^2 - (1/(p+1)) integral |u|^{p+1}."""
    return 0.5 * kinetic_of(grid, params.a, u) \
        - lp_power_of(grid, u, params.p + 1.0) / (params.p + 1.0)


def virial_of(params: ModelParams, grid: RadialGrid, u: np.ndarray) -> float:
    """P(u) = (1-a)/2 integral |x|^{2a}|grad u|^2 - alpha/(2(p+1)) integral |u|^{p+1}."""
    alpha = params.d * (params.p - 1.0) / 2.0
    return 0.5 * (1.0 - params.a) * kinetic_of(grid, params.a, u) \
        - alpha / (2.0 * (params.p + 1.0)) * lp_power_of(grid, u, params.p + 1.0)


def variance_of(params: ModelParams, grid: RadialGrid, u: np.ndarray) -> float:
    """Weighted variance integral |x|^{2(1-a)} |u|^2 dx."""
    weight = grid.nodes ** (2.0 * (1.0 - params.a))
    return sphere_area(grid.d) * float(np.sum(grid.volumes * weight * np.abs(u) ** 2))


def weinstein_quotient(params: ModelParams, grid: RadialGrid, u: np.ndarray) -> float:
    """J[u] = (integral |x|^{2a}|grad u|^2 + |u|^2) / |u|_{p+1}^2."""
    num = kinetic_of(grid, params.a, u) + mass_of(grid, u)
    den = lp_power_of(grid, u, params.p + 1.0) ** (2.0 / (params.p + 1.0))
    return num / den


@dataclass(frozen=True)
class IdentityReport:
    """Conserved quantities and identity residuals for one profile."""

    mass: float
    energy: float
    j: float
    pohozaev_1: float
    pohozaev_2: float
    p: float
    alpha: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def pohozaev_coefficient(params: ModelParams) -> float:
    """d(p-1) / (2(p+1)(1-a)), the kinetic-to-potential ratio of converged waves."""
    return params.d * (params.p - 1.0) / (2.0 * (params.p + 1.0) * (1.0 - params.a))


def evaluate_identities(params: ModelParams, profile: Profile) -> IdentityReport:
    """Pohozaev residuals (relative to the kinetic term), virial value, invariants."""
    grid, u = profile.grid, profile.values
    kin = kinetic_of(grid, params.a, u)
    mass = mass_of(grid, u)
    lp1 = lp_power_of(grid, u, params.p + 1.0)
    coeff = pohozaev_coefficient(params)
    res1 = abs(kin - coeff * lp1) / kin
    res2 = abs(params.omega * mass - (1.0 - coeff) * lp1) / kin
    return IdentityReport(
        mass=mass,
        energy=0.5 * kin - lp1 / (params.p + 1.0),
        j=weinstein_quotient(params, grid, u),
        pohozaev_1=res1,
        pohozaev_2=res2,
        p=virial_of(params, grid, u),
        alpha=params.d * (params.p - 1.0) / 2.0,
    )


def l2_scale(profile: Profile, lam: float, grid: RadialGrid | None = None) -> Profile:
    """Mass-invariant dilation u_lam(x) = lam^{d/2} u(lam x).

    With grid=None the samples ride on the exactly contracted grid (radii
    divided by lam), which conserves the discrete mass and every power norm
    to machine precision; passing a grid interpolates onto it instead.
    """
    if not (lam > 0.0):
        raise InvalidParameterError(f"scale factor must be positive, got {lam}")
    src = profile.grid
    amp = lam ** (src.d / 2.0)
    if grid is None:
        if lam == 1.0:
            return Profile(grid=src, values=profile.values.copy(),
                           omega=profile.omega, residual=profile.residual)
        new_grid = build_grid(src.d, src.r_max / lam, src.n, src.gamma)
        return Profile(grid=new_grid, values=amp * profile.values.copy(),
                       omega=profile.omega)
    values = amp * profile_evaluator(profile)(lam * grid.nodes)
    return Profile(grid=grid, values=values, omega=profile.omega)


def scaled_energy(params: ModelParams, profile: Profile, lam: float) -> tuple[float, float]:
    """E(u_lam) by the closed form and by direct evaluation, for cross-checking.

    Closed form: E(u_lam) = (alpha lam^{2-2a} - 2(1-a) lam^alpha)
    / (2(p+1)(1-a)) * |u|_{p+1}^{p+1}, valid for converged waves; the direct
    value evaluates E on the dilated samples.  Agreement of the two is
    equivalent to the first Pohozaev identity holding for the input.
    """
    a, p = params.a, params.p
    alpha = params.d * (p - 1.0) / 2.0
    lp1 = lp_power_of(profile.grid, profile.values, p + 1.0)
    closed = (alpha * lam ** (2.0 - 2.0 * a) - 2.0 * (1.0 - a) * lam ** alpha) \
        / (2.0 * (p + 1.0) * (1.0 - a)) * lp1
    scaled = l2_scale(profile, lam)
    direct = energy_of(params, scaled.grid, scaled.values)
    return closed, direct
