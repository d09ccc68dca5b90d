"""Parameter tuple, validity predicates, and the exact frequency-scaling laws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .discretization import Profile, RadialGrid, build_grid
from .exceptions import GridRangeError, InvalidParameterError, InvalidWindowError

DEGENERATE_BAND = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """The tuple (d, a, p, omega): dimension, degeneracy exponent, power, frequency."""

    d: int
    a: float
    p: float
    omega: float = 1.0

    def __post_init__(self):
        if self.d < 1 or int(self.d) != self.d:
            raise InvalidParameterError(f"dimension must be a positive integer, got {self.d}")
        if not (0.0 <= self.a < 1.0):
            raise InvalidParameterError(f"degeneracy exponent must satisfy 0 <= a < 1, got {self.a}")
        if not (self.p > 1.0):
            raise InvalidParameterError(f"nonlinearity power must exceed 1, got {self.p}")
        if not (self.omega > 0.0):
            raise InvalidParameterError(f"frequency must be positive, got {self.omega}")
        object.__setattr__(self, "d", int(self.d))

    def with_omega(self, omega: float) -> "ModelParams":
        return ModelParams(self.d, self.a, self.p, omega)


@dataclass(frozen=True)
class StabilityVerdict:
    """Threshold classification: stable below p_c = 1 + 4(1-a)/d, unstable above."""

    threshold: float
    slope_sign: int
    verdict: str        # "Stable" | "Unstable" | "Degenerate"


def exists_window(params: ModelParams) -> bool:
    """True iff 1/2 - 1/(p+1) < (1-a)/d, the sharp admissibility window."""
    return 0.5 - 1.0 / (params.p + 1.0) < (1.0 - params.a) / params.d


def interpolation_theta(params: ModelParams) -> float:
    """theta = (d/(1-a)) (1/2 - 1/(p+1)); the window is exactly theta in (0, 1)."""
    return params.d / (1.0 - params.a) * (0.5 - 1.0 / (params.p + 1.0))


def critical_power(params: ModelParams) -> float:
    """Stability threshold p_c = 1 + 4(1-a)/d."""
    return 1.0 + 4.0 * (1.0 - params.a) / params.d


def mass_scaling_exponent(params: ModelParams) -> float:
    """Exponent of the squared-mass law |phi_omega|_2^2 = omega^e |phi_1|_2^2."""
    return 2.0 / (params.p - 1.0) - params.d / (2.0 * (1.0 - params.a))


def classify_by_threshold(params: ModelParams) -> StabilityVerdict:
    """Classify by p against p_c; the verdict does not depend on omega."""
    if not exists_window(params):
        raise InvalidWindowError(f"no solitary waves exist at {params}")
    p_c = critical_power(params)
    if abs(params.p - p_c) < DEGENERATE_BAND * p_c:
        return StabilityVerdict(threshold=p_c, slope_sign=0, verdict="Degenerate")
    exponent = mass_scaling_exponent(params)
    sign = 1 if exponent > 0 else -1
    return StabilityVerdict(threshold=p_c, slope_sign=sign,
                            verdict="Stable" if sign > 0 else "Unstable")


def profile_evaluator(profile: Profile, a: float | None = None, tail_rel: float = 1e-8):
    """Pointwise evaluator for a positive decaying profile.

    Monotone cubic interpolation of log(phi) between the first and last node
    (preserves positivity and the decay tail); beyond the last node the
    stretched-exponential continuation exp(-c rho^{1-a}) is grafted, anchored
    at the boundary value.  With a=None the tail exponent is fitted from the
    outermost nodes instead.  Raises GridRangeError when the boundary value is
    not yet in the negligible-tail regime (> tail_rel of the peak), since
    extrapolation would then be unreliable.
    """
    phi = profile.values
    if np.any(phi <= 0.0):
        raise InvalidParameterError("log interpolation needs a strictly positive profile")
    nodes = profile.grid.nodes
    interp = PchipInterpolator(nodes, np.log(phi), extrapolate=True)
    r_last = nodes[-1]
    phi_last = phi[-1]
    peak = float(np.max(phi))
    if a is None:
        # Empirical log-linear tail rate from the outer 10% of nodes; only
        # values below tail_rel * peak ever use it.
        k = max(4, profile.grid.n // 10)
        slope = np.polyfit(nodes[-k:], np.log(phi[-k:]), 1)[0]
        rate, power = max(-slope, 0.0), 1.0
    else:
        rate, power = np.sqrt(profile.omega) / (1.0 - a), 1.0 - a

    def evaluate(rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        out = np.empty_like(rho)
        inside = rho <= r_last
        out[inside] = np.exp(interp(rho[inside]))
        beyond = ~inside
        if np.any(beyond):
            if phi_last > tail_rel * peak:
                raise GridRangeError(
                    "rescaled support falls outside the source grid "
                    f"(boundary value {phi_last:.3e} vs peak {peak:.3e})")
            out[beyond] = phi_last * np.exp(
                -rate * (rho[beyond] ** power - r_last ** power))
        return out

    return evaluate


def omega_rescale(profile: Profile, params: ModelParams,
                  grid: RadialGrid | None = None) -> Profile:
    """Map a profile at its own frequency to the wave at params.omega.

    Uses phi_w(rho) = w^{1/(p-1)} phi_1(w^{1/(2(1-a))} rho) with w the
    frequency ratio.  With grid=None the output lives on the exactly rescaled
    grid (same cell layout, radii scaled), which keeps every scaling law exact
    at the discrete level; passing a target grid interpolates instead.
    """
    a, p = params.a, params.p
    ratio = params.omega / profile.omega
    amp = ratio ** (1.0 / (p - 1.0))
    stretch = ratio ** (1.0 / (2.0 * (1.0 - a)))   # argument factor
    src = profile.grid
    if src.d != params.d:
        raise InvalidParameterError("profile grid dimension does not match params")

    if grid is None:
        if ratio == 1.0:
            return Profile(grid=src, values=profile.values.copy(),
                           omega=params.omega, residual=profile.residual)
        new_grid = build_grid(src.d, src.r_max / stretch, src.n, src.gamma)
        return Profile(grid=new_grid, values=amp * profile.values.copy(),
                       omega=params.omega)

    evaluate = profile_evaluator(profile, a)
    values = amp * evaluate(stretch * grid.nodes)
    return Profile(grid=grid, values=values, omega=params.omega)
