import math

import numpy as np
import pytest

from lsiwave.dynamics import BlowUpError, EvolveConfig, evolve, rhs, step_ifrk4
from lsiwave.functionals import invariants
from lsiwave.model import LsiState, make_params, solitary_state
from lsiwave.spectral import PeriodicGrid


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(dt=-1e-3), dict(t_end=-1.0),
                                dict(record_every=0), dict(record_every=2.5)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        EvolveConfig(**kw)


def test_rhs_of_zero_state(grid, params):
    z = np.zeros(grid.n)
    assert all(np.max(np.abs(d)) == 0 for d in rhs(LsiState(grid, z, z, z), params))


def test_rhs_free_mode(grid, params):
    k = 2 * np.pi * 5 / grid.length
    phi = np.exp(1j * k * grid.x)
    d = rhs(LsiState(grid, phi, 0 * phi, np.zeros(grid.n)), params)
    assert np.max(np.abs(d[0] + 1j * k * k * phi)) < 1e-12


@pytest.mark.parametrize("dealias", [True, False])
def test_rhs_matches_time_derivative_of_closed_form(profile, params, dealias):
    t, eps = 0.3, 1e-4
    d = rhs(solitary_state(profile, t), params, dealias=dealias)
    plus, minus = solitary_state(profile, t + eps), solitary_state(profile, t - eps)
    fd = ((plus.phi - minus.phi) / (2 * eps), (plus.psi - minus.psi) / (2 * eps),
          (plus.w - minus.w) / (2 * eps))
    for a, b in zip(d, fd):
        assert np.max(np.abs(a - b)) < 1e-7     # O(eps^2) with O(1) third derivatives


def test_zero_state_is_fixed(grid, params):
    z = np.zeros(grid.n)
    out = step_ifrk4(LsiState(grid, z, z, z), params, 1e-2)
    assert not np.any(out.phi) and not np.any(out.w)


def test_linear_propagation_is_exact():
    """With beta -> 0 the nonlinear term vanishes and the integrating factor
    propagates the free Schroedinger flow exactly."""
    g = PeriodicGrid(256, 40.0)
    p = make_params(1e-300, 2.0, 2.0)
    phi0 = np.exp(-g.x**2) + 0j
    out = step_ifrk4(LsiState(g, phi0, 0 * phi0, 0 * g.x), p, 0.05)
    exact = np.fft.ifft(np.exp(-1j * g.k**2 * 0.05) * np.fft.fft(phi0))
    assert np.max(np.abs(out.phi - exact)) < 1e-14
    k = 2 * np.pi * 3 / g.length
    mode = np.exp(1j * k * g.x)
    final, _ = evolve(LsiState(g, mode, 0 * mode, 0 * g.x), p, EvolveConfig(dt=1e-2, t_end=1.0))
    assert np.max(np.abs(final.phi - mode * np.exp(-1j * k * k))) < 1e-10
    assert np.max(np.abs(np.abs(final.phi) - 1)) < 1e-12


def test_blow_up_signalled(grid, params):
    z = np.zeros(grid.n)
    bad = LsiState(grid, z + np.nan, z, z)
    with pytest.raises(BlowUpError) as info:
        step_ifrk4(bad, params, 1e-3, step_index=7)
    assert info.value.step == 7
    with pytest.raises(BlowUpError) as info:
        evolve(bad, params, EvolveConfig(dt=1e-3, t_end=0.01))
    assert info.value.step == 1 and info.value.t == pytest.approx(1e-3)


def test_evolve_records(profile, params):
    s0 = solitary_state(profile)
    final, rec = evolve(s0, params, EvolveConfig(dt=1e-3, t_end=0.0))
    assert final is s0 and len(rec) == 1
    final, rec = evolve(s0, params, EvolveConfig(dt=1e-2, t_end=0.255, record_every=10),
                        observer=lambda s: s.t)
    assert [t for t, _ in rec] == pytest.approx([0.0, 0.1, 0.2, 0.255])
    assert final.t == pytest.approx(0.255)
    assert [p for _, p in rec] == pytest.approx([t for t, _ in rec])


def test_last_step_lands_on_end_time(profile, params):
    final, _ = evolve(solitary_state(profile), params, EvolveConfig(dt=1e-2, t_end=0.105))
    exact = solitary_state(profile, 0.105)
    # a missed landing would leave an O(dt) = 1e-2 phase error
    assert np.max(np.abs(final.phi - exact.phi)) < 1e-6


def test_time_reversal(profile, params, rng):
    s0 = solitary_state(profile)
    s0 = s0.replace(phi=s0.phi * (1 + 0.05 * np.exp(-(profile.grid.x - 2) ** 2)))
    cfg = EvolveConfig(dt=1e-3, t_end=1.0)
    fwd, _ = evolve(s0, params, cfg)
    back, _ = evolve(fwd, params, cfg, backward=True)
    assert back.t == pytest.approx(0.0, abs=1e-12)
    for a in ("phi", "psi", "w"):
        assert np.max(np.abs(getattr(back, a) - getattr(s0, a))) < 1e-7


def test_soliton_error_fourth_order(profile, params):
    errs = []
    dts = (4e-3, 2e-3)
    for dt in dts:
        final, _ = evolve(solitary_state(profile), params, EvolveConfig(dt=dt, t_end=0.5))
        errs.append(np.max(np.abs(final.phi - solitary_state(profile, 0.5).phi)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.3)


def test_mean_of_w_conserved(profile, params):
    s0 = solitary_state(profile)
    s0 = s0.replace(w=s0.w + 0.1 * np.exp(-profile.grid.x**2))
    final, _ = evolve(s0, params, EvolveConfig(dt=1e-3, t_end=0.5))
    assert abs(np.mean(final.w) - np.mean(s0.w)) < 1e-15


def test_dt_insensitivity_of_functionals(profile, params):
    s0 = solitary_state(profile)
    s0 = s0.replace(psi=s0.psi * (1 + 0.02 * np.exp(-(profile.grid.x + 1) ** 2)))
    vals = []
    for dt in (1e-3, 5e-4):
        final, _ = evolve(s0, params, EvolveConfig(dt=dt, t_end=0.5))
        vals.append(np.array(invariants(final, params).as_tuple()))
    assert np.max(np.abs(vals[0] - vals[1])) < 1e-9
