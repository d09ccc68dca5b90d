"""Solitary-wave profiles two independent ways: variational minimization and shooting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import cho_solve_banded, cholesky_banded

from . import functionals
from .discretization import Profile, RadialGrid, assemble_operator, build_grid, weighted_norm
from .exceptions import (BracketInvalidError, InvalidWindowError, NonConvergenceError,
                         StiffnessFailureError)
from .model import ModelParams, exists_window, omega_rescale


@dataclass
class MinimizerReport:
    """Outcome of the constrained Weinstein minimization (unit-frequency normalization)."""

    phi_normalized: np.ndarray   # minimizer with unit H^{1,a} norm
    j_min: float
    lam: float                   # integral of phi_normalized^{p+1}
    kappa: float                 # Lagrange multiplier, 1/lam at unit norm
    iterations: int
    residual: float              # Euler-Lagrange defect of phi_normalized, weighted norm
    grid: RadialGrid

    def profile(self, params: ModelParams) -> Profile:
        """Unit-frequency wave phi = kappa^{1/(p-1)} * minimizer."""
        scale = self.kappa ** (1.0 / (params.p - 1.0))
        return Profile(grid=self.grid, values=scale * self.phi_normalized,
                       omega=1.0, residual=scale * self.residual)


def el_residual(params: ModelParams, grid: RadialGrid, values: np.ndarray) -> float:
    """Full-space weighted norm of A0 u + omega u - |u|^{p-1} u."""
    op = assemble_operator(grid, params.a, sector=0)
    defect = op.apply(values) + params.omega * values \
        - np.abs(values) ** (params.p - 1.0) * values
    return np.sqrt(functionals.sphere_area(grid.d)) * weighted_norm(grid, defect)


def weinstein_gradient(params: ModelParams, grid: RadialGrid,
                       u: np.ndarray) -> np.ndarray:
    """Frechet derivative of the Weinstein quotient wrt the full-space L2 pairing.

    dJ[u;h] = <grad, h> with <f,g> = |S^{d-1}| sum_i w_i f_i g_i.
    """
    a, p = params.a, params.p
    op = assemble_operator(grid, a, sector=0)
    sa = functionals.sphere_area(grid.d)
    lin = op.apply(u) + u
    norm_sq = sa * float(np.sum(grid.volumes * u * lin))
    lam = functionals.lp_power_of(grid, u, p + 1.0)
    den = lam ** (2.0 / (p + 1.0))
    return (2.0 / den) * (lin - (norm_sq / lam) * np.abs(u) ** (p - 1.0) * u)


def minimize_weinstein(params: ModelParams, grid: RadialGrid, tol: float = 1e-8,
                       max_iter: int = 50000, tau: float = 0.1) -> MinimizerReport:
    """Minimize J[u] = |u|_{H^{1,a}}^2 / |u|_{p+1}^2 by a normalized semi-implicit flow.

    Each step solves (I + tau (A0 + I)) v = u + tau kappa_u u^p and renormalizes
    to unit H^{1,a} norm; tau is halved whenever J fails to decrease, so the
    recorded J sequence is monotone.  The implicit linear part damps the stiff
    weighted-Laplacian modes unconditionally, and the M-matrix structure of
    the solve keeps iterates positive.  Stops when the relative J change falls
    below 1e-12 and the Euler-Lagrange defect below tol (both required).
    """
    if not exists_window(params):
        raise InvalidWindowError(f"no solitary waves exist at {params}")
    a, p = params.a, params.p
    sa = functionals.sphere_area(grid.d)
    w = grid.volumes
    sqw = np.sqrt(w)
    op = assemble_operator(grid, a, sector=0)
    diag_lin = op.diag + 1.0                       # A0 + I
    off_sym = -op.flux[1:-1] / np.sqrt(w[:-1] * w[1:])

    def factorize(step):
        ab = np.zeros((2, grid.n))
        ab[0, 1:] = step * off_sym
        ab[1, :] = 1.0 + step * diag_lin
        return cholesky_banded(ab)

    def h_norm(u):
        return np.sqrt(sa * (op.quad_form(u) + float(np.sum(w * u * u))))

    def lam_of(u):
        return sa * float(np.sum(w * u ** (p + 1.0)))

    def j_of(u):
        return (op.quad_form(u) + float(np.sum(w * u * u))) * sa / lam_of(u) ** (2.0 / (p + 1.0))

    def residual_of(u, kappa):
        defect = op.apply(u) + u - kappa * u ** p
        return np.sqrt(sa) * weighted_norm(grid, defect)

    u = np.exp(-grid.nodes ** 2)
    u /= h_norm(u)
    j_curr = j_of(u)
    chol = factorize(tau)
    tau_min = 1e-6
    accepted = 0

    for iteration in range(1, max_iter + 1):
        kappa = 1.0 / lam_of(u)                    # unit H-norm Lagrange multiplier
        rhs = u + tau * kappa * u ** p
        v = cho_solve_banded((chol, False), sqw * rhs) / sqw
        v /= h_norm(v)
        j_new = j_of(v)
        if j_new > j_curr * (1.0 + 1e-15) and tau > tau_min:
            tau = 0.5 * tau
            chol = factorize(tau)
            continue
        dj = abs(j_curr - j_new)
        u, j_curr = v, j_new
        accepted += 1
        if accepted % 20 == 0 and tau < 10.0:
            tau = 1.5 * tau
            chol = factorize(tau)
        kappa = 1.0 / lam_of(u)
        res = residual_of(u, kappa)
        if res < tol and dj <= 1e-12 * abs(j_curr):
            lam = lam_of(u)
            return MinimizerReport(phi_normalized=u, j_min=j_curr, lam=lam,
                                   kappa=1.0 / lam, iterations=iteration,
                                   residual=res, grid=grid)
    raise NonConvergenceError(
        f"Weinstein flow did not reach tol={tol} in {max_iter} iterations",
        residual=residual_of(u, 1.0 / lam_of(u)), iterations=max_iter)


def ground_state(params: ModelParams, grid: RadialGrid, tol: float = 1e-8,
                 max_iter: int = 50000) -> Profile:
    """Converged wave at params.omega on the given grid via minimization + rescaling.

    The minimization runs at the unit-frequency normalization on the inversely
    rescaled grid, so the exact frequency rescaling lands back on `grid`
    without interpolation.
    """
    if params.omega == 1.0:
        report = minimize_weinstein(params, grid, tol=tol, max_iter=max_iter)
        return report.profile(params)
    stretch = params.omega ** (1.0 / (2.0 * (1.0 - params.a)))
    unit_grid = build_grid(grid.d, grid.r_max * stretch, grid.n, grid.gamma)
    report = minimize_weinstein(params, unit_grid, tol=tol, max_iter=max_iter)
    wave = omega_rescale(report.profile(params), params)
    wave.residual = el_residual(params, wave.grid, wave.values)
    return wave


def _series_start(params: ModelParams, beta: float, rho: float) -> tuple[float, float]:
    """Two-term origin expansion of (phi, F = rho^{d-1+2a} phi') at small rho."""
    d, a, p, omega = params.d, params.a, params.p, params.omega
    g0 = beta ** p - omega * beta
    c1 = -g0 / (d * (2.0 - 2.0 * a))
    g1 = p * beta ** (p - 1.0) - omega
    c2 = -g1 * c1 / ((d + 2.0 - 2.0 * a) * (4.0 - 4.0 * a))
    phi = beta + c1 * rho ** (2.0 - 2.0 * a) + c2 * rho ** (4.0 - 4.0 * a)
    flux = -g0 * rho ** d / d - g1 * c1 * rho ** (d + 2.0 - 2.0 * a) / (d + 2.0 - 2.0 * a)
    return phi, flux


def _integrate_shot(params: ModelParams, beta: float, r0: float, r_end: float,
                    rtol: float = 1e-10):
    """Integrate the flux system outward; returns (classification, solution).

    classification: 'over' (phi crossed zero), 'under' (flux turned positive,
    i.e. phi started growing again), 'done' (reached r_end with phi tiny).
    """
    d, a, p, omega = params.d, params.a, params.p, params.omega
    m = d - 1 + 2.0 * a

    def rhs(rho, y):
        phi, flux = y
        return [flux / rho ** m, -rho ** (d - 1) * (np.abs(phi) ** (p - 1.0) * phi - omega * phi)]

    def ev_cross(rho, y):
        return y[0]
    ev_cross.terminal = True
    ev_cross.direction = -1.0

    def ev_turn(rho, y):
        return y[1]
    ev_turn.terminal = True
    ev_turn.direction = 1.0

    y0 = _series_start(params, beta, r0)
    sol = solve_ivp(rhs, (r0, r_end), y0, method="RK45", rtol=rtol,
                    atol=[1e-14 * beta, 1e-14 * beta], dense_output=True,
                    events=[ev_cross, ev_turn])
    if sol.status == -1:
        raise StiffnessFailureError(f"integrator failed near the origin: {sol.message}")
    if sol.t_events[0].size:
        return "over", sol
    if sol.t_events[1].size:
        return "under", sol
    phi_end = sol.y[0, -1]
    return ("done" if phi_end < 1e-6 * beta else "under"), sol


def shoot_profile(params: ModelParams, grid: RadialGrid,
                  beta_bracket: tuple[float, float] | None = None,
                  tol: float = 1e-10, max_bisect: int = 200) -> Profile:
    """Profile by bisection on the central value beta = phi(0).

    Integrates (phi, F = rho^{d-1+2a} phi') outward from a two-term origin
    series; overshoot = phi crosses zero, undershoot = F turns positive while
    phi is above the tail level tol * beta.  The returned samples follow the
    integrated trajectory down to the tail level and continue with the
    stretched-exponential tail exp(-sqrt(omega) rho^{1-a}/(1-a)) beyond, so
    phi(r_max) is below tol * phi(0) by construction.
    """
    if not exists_window(params):
        raise InvalidWindowError(f"no solitary waves exist at {params}")
    omega, p, a = params.omega, params.p, params.a
    beta_fixed = omega ** (1.0 / (p - 1.0))
    r0 = 0.5 * grid.nodes[0]
    r_end = grid.r_max

    if beta_bracket is None:
        lo = beta_fixed * (1.0 + 1e-6)
        hi = 2.0 * beta_fixed
        for _ in range(64):
            kind, _sol = _integrate_shot(params, hi, r0, r_end)
            if kind == "over":
                break
            lo = hi
            hi *= 2.0
        else:
            raise BracketInvalidError("could not find an overshooting upper endpoint")
    else:
        lo, hi = beta_bracket
        if lo <= beta_fixed:
            raise BracketInvalidError(
                f"beta_lo = {lo} does not exceed the constant-solution value {beta_fixed}"
                " (phi^p(0) - omega phi(0) must be positive)")
        kind_lo, _ = _integrate_shot(params, lo, r0, r_end)
        kind_hi, _ = _integrate_shot(params, hi, r0, r_end)
        if kind_lo == kind_hi and not (kind_lo == "done" or kind_hi == "done"):
            raise BracketInvalidError(f"both endpoints classify as '{kind_lo}'")
        if kind_lo == "over" or kind_hi == "under":
            lo, hi = hi, lo

    best = None
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        kind, sol = _integrate_shot(params, mid, r0, r_end)
        if kind == "done":
            best = (mid, sol)
            break
        if kind == "over":
            hi = mid
        else:
            lo = mid
        best = (mid, sol)
        if hi - lo < 4.0 * np.finfo(float).eps * hi:
            break

    beta, sol = best
    values = _sample_shot(params, grid, beta, r0, sol, tol)
    return Profile(grid=grid, values=values, omega=omega,
                   residual=el_residual(params, grid, values), phi0=beta)


def _sample_shot(params: ModelParams, grid: RadialGrid, beta: float, r0: float,
                 sol, tol: float) -> np.ndarray:
    """Sample the trajectory at the nodes: series / dense output / tail graft."""
    a, omega = params.a, params.omega
    # Graft where the trajectory last sits at its minimum positive level.
    t_fine = np.linspace(sol.t[0], sol.t[-1], 4096)
    phi_fine = sol.sol(t_fine)[0]
    positive = phi_fine > 0
    idx = np.argmin(np.where(positive, phi_fine, np.inf))
    rho_graft = t_fine[idx]
    phi_graft = phi_fine[idx]

    nodes = grid.nodes
    values = np.empty(grid.n)
    rate = np.sqrt(omega) / (1.0 - a)
    for i, rho in enumerate(nodes):
        if rho < r0:
            values[i] = _series_start(params, beta, rho)[0]
        elif rho <= rho_graft:
            values[i] = sol.sol(rho)[0]
        else:
            values[i] = phi_graft * np.exp(-rate * (rho ** (1.0 - a) - rho_graft ** (1.0 - a)))
    return values


@dataclass(frozen=True)
class ReconcileReport:
    """Discrepancy between two profiles computed for the same parameters and grid."""

    max_abs: float
    rel_max: float
    rel_weighted: float
    agree: bool


def reconcile(profile_a: Profile, profile_b: Profile,
              rel_tol: float = 1e-3) -> ReconcileReport:
    """Cross-validate two solver outputs; flags relative disagreement above rel_tol."""
    if profile_a.grid.nodes.shape != profile_b.grid.nodes.shape or \
            not np.allclose(profile_a.grid.nodes, profile_b.grid.nodes):
        raise InvalidWindowError("profiles must share a grid to be reconciled")
    diff = profile_a.values - profile_b.values
    max_abs = float(np.max(np.abs(diff)))
    scale = float(np.max(np.abs(profile_a.values)))
    rel_max = max_abs / scale
    rel_weighted = weighted_norm(profile_a.grid, diff) / weighted_norm(
        profile_a.grid, profile_a.values)
    return ReconcileReport(max_abs=max_abs, rel_max=rel_max,
                           rel_weighted=rel_weighted,
                           agree=bool(rel_max < rel_tol and rel_weighted < rel_tol))
