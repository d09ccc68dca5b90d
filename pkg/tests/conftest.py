"""Shared fixtures: expensive wave solves are cached for the whole session."""

import numpy as np
import pytest

import degenls as dl

# Closed-form anchor (d=1, a=0, p=3, omega=1): phi = sqrt(2) sech(rho).
SQRT2 = np.sqrt(2.0)


def sech_values(nodes):
    return SQRT2 / np.cosh(nodes)


@pytest.fixture(scope="session")
def anchor_params():
    return dl.ModelParams(1, 0.0, 3.0, 1.0)


@pytest.fixture(scope="session")
def anchor_grid():
    return dl.build_grid(1, 20.0, 4096, 1.0)


@pytest.fixture(scope="session")
def anchor_report(anchor_params, anchor_grid):
    return dl.minimize_weinstein(anchor_params, anchor_grid)


@pytest.fixture(scope="session")
def anchor_wave(anchor_params, anchor_report):
    return anchor_report.profile(anchor_params)


@pytest.fixture(scope="session")
def anchor_shot(anchor_params, anchor_grid):
    return dl.shoot_profile(anchor_params, anchor_grid)


@pytest.fixture(scope="session")
def wave_cache():
    """Factory for converged waves at omega = 1 on moderately sized grids."""
    cache = {}

    def solve(d, a, p, n=8192, tail_decades=7.0):
        key = (d, a, p, n, tail_decades)
        if key not in cache:
            params = dl.ModelParams(d, a, p, 1.0)
            from degenls.presets import sweep_grid
            grid = sweep_grid(params, n=n, tail_decades=tail_decades)
            cache[key] = (params, dl.ground_state(params, grid))
        return cache[key]

    return solve
