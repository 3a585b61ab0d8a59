import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsiwave.model import (AdmissibilityError, LsiState, SolitonProfile, ground_state_profile,
                           make_params, read_profile, residual_cs1, solitary_state, write_profile)
from lsiwave.spectral import PeriodicGrid, default_grid


def sech(x):
    e = np.exp(-np.abs(x))
    return 2 * e / (1 + e * e)


@pytest.mark.parametrize("beta,c,omega,Omega,gamma", [
    (math.sqrt(2), 2.0, 2.0, 1.0, 1.0),
    (1.0, 1.0, 1.0, 0.75, 1.0),
])
def test_derived_constants(beta, c, omega, Omega, gamma):
    p = make_params(beta, c, omega)
    assert p.Omega == pytest.approx(Omega, abs=1e-15)
    assert p.gamma == pytest.approx(gamma, abs=1e-15)


@pytest.mark.parametrize("beta,c,omega,needle", [
    (1.0, 2.0, 1.0, "4*omega - c^2"),
    (1.0, 0.0, 1.0, "c > 0"),
    (1.0, -1.0, 1.0, "c > 0"),
    (0.0, 1.0, 1.0, "beta"),
])
def test_inadmissible_params_name_the_condition(beta, c, omega, needle):
    with pytest.raises(AdmissibilityError, match=needle.replace("*", r"\*").replace("^", r"\^")):
        make_params(beta, c, omega)


def test_canonical_profile_is_sech(profile, grid):
    assert np.max(np.abs(profile.R1 - sech(grid.x))) < 1e-15
    assert np.max(np.abs(profile.R1 - profile.R2)) < 1e-15   # cos and sin of pi/4 differ by 1 ulp
    assert profile.R1[grid.n // 2] == pytest.approx(1.0, abs=1e-15)
    assert max(residual_cs1(profile)) < 1e-10


def test_scalar_reduction(params, grid):
    pr = ground_state_profile(params, 0.0, grid)
    assert not np.any(pr.R2)
    assert np.max(np.abs(pr.R1 - math.sqrt(2) * sech(grid.x))) < 1e-14
    assert max(residual_cs1(pr)) < 1e-10
    pr = ground_state_profile(params, math.pi / 2, grid)
    assert not np.any(pr.R1)


def test_larger_Omega_narrows_profile():
    p = make_params(1.0, 1.0, 4.25)       # Omega = 4, gamma = 1
    pr = ground_state_profile(p, math.pi / 4, default_grid(p.Omega))
    x = pr.grid.x
    assert pr.R1[pr.grid.n // 2] / math.cos(math.pi / 4) == pytest.approx(2 * math.sqrt(2), abs=1e-14)
    # ray amplitude sqrt(2 Omega/gamma) = 2*sqrt(2); per component 2.0
    assert pr.R1[pr.grid.n // 2] == pytest.approx(2.0, abs=1e-14)
    assert np.max(np.abs(pr.R1 - 2 * sech(2 * x))) < 1e-14
    assert max(residual_cs1(pr)) < 1e-10


def test_rescaling_maps_to_unit_Omega():
    """P(x) = Q_Omega(x / sqrt(Omega)) / sqrt(Omega) recovers the Omega = 1 profile."""
    p4 = make_params(1.0, 1.0, 4.25)
    p1 = make_params(1.0, 1.0, 1.25)
    g1 = PeriodicGrid(1024, 80.0)
    q4 = ground_state_profile(p4, math.pi / 4, PeriodicGrid(1024, 40.0))
    ref = ground_state_profile(p1, math.pi / 4, g1)
    P = q4.grid.interpolate(q4.R1, g1.x / math.sqrt(p4.Omega)) / math.sqrt(p4.Omega)
    assert np.max(np.abs(P - ref.R1)) < 1e-13


@settings(max_examples=20, deadline=None)
@given(beta=st.floats(0.2, 3.0), c=st.floats(0.2, 3.0), extra=st.floats(0.1, 3.0),
       theta=st.floats(0.0, math.pi / 2))
def test_residual_small_for_admissible_params(beta, c, extra, theta):
    p = make_params(beta, c, c * c / 4 + extra)
    pr = ground_state_profile(p, theta, default_grid(p.Omega, n=2048))
    scale = max(1.0, p.Omega * math.sqrt(2 * p.Omega / p.gamma))
    assert max(residual_cs1(pr)) < 1e-10 * scale
    R = np.sqrt(pr.rho2)
    assert np.allclose(R, math.sqrt(2 * p.Omega / p.gamma) * sech(math.sqrt(p.Omega) * pr.grid.x),
                       atol=1e-14 * scale)
    assert np.max(np.abs(pr.W + p.beta * pr.rho2 / p.c)) == 0.0


def test_ray_leaves_rho_invariant(params, grid):
    base = ground_state_profile(params, 0.0, grid).rho2
    for th in np.linspace(0, math.pi / 2, 7):
        assert np.allclose(ground_state_profile(params, th, grid).rho2, base, atol=1e-15)


def test_residual_detects_nonsolutions(profile):
    scaled = SolitonProfile(profile.params, profile.theta, profile.grid,
                            1.1 * profile.R1, 1.1 * profile.R2, profile.W)
    assert min(residual_cs1(scaled)) > 1e-3
    z = np.zeros_like(profile.R1)
    zero = SolitonProfile(profile.params, profile.theta, profile.grid, z, z, z)
    assert residual_cs1(zero) == (0.0, 0.0)


def test_profile_rejects_short_domain_and_bad_angle(params):
    with pytest.raises(ValueError, match="too short"):
        ground_state_profile(params, math.pi / 4, PeriodicGrid(256, 20.0))
    with pytest.raises(ValueError):
        ground_state_profile(params, 2.0, PeriodicGrid(1024, 80.0))


@pytest.mark.parametrize("t", [0.0, 1.3, 7.0])
def test_solitary_state_closed_form(profile, grid, t):
    p = profile.params
    st_ = solitary_state(profile, t)
    xi = grid.x - p.c * t
    xi = (xi + grid.length / 2) % grid.length - grid.length / 2
    exact = sech(xi) * np.exp(0.5j * p.c * xi + 1j * p.omega * t)
    assert np.max(np.abs(st_.phi - exact)) < 1e-12
    assert np.max(np.abs(np.abs(st_.phi) - sech(xi))) < 1e-12
    assert grid.norm2(st_.phi) == pytest.approx(2.0, abs=1e-12)
    assert np.isrealobj(st_.w)


def test_state_validation(grid):
    z = np.zeros(grid.n)
    with pytest.raises(ValueError):
        LsiState(grid, z, z, z + 1j)
    with pytest.raises(ValueError):
        LsiState(grid, z[:-2], z, z)
    s = LsiState(grid, z, z, z.astype(complex))
    assert np.isrealobj(s.w) and np.iscomplexobj(s.phi)
    assert s.replace(t=2.0).t == 2.0 and s.t == 0.0


def test_profile_roundtrip(tmp_path, profile):
    csv_path, json_path = write_profile(tmp_path / "prof", profile)
    assert csv_path.exists() and json_path.exists()
    back = read_profile(tmp_path / "prof")
    assert back.grid == profile.grid
    for a in ("R1", "R2", "W"):
        assert np.array_equal(getattr(back, a), getattr(profile, a))
    assert back.params == profile.params and back.theta == profile.theta
