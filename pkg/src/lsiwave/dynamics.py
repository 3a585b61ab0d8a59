r"""Fourier pseudospectral time stepping of the three-wave LSI system.

.. math::

    i\phi_t + \phi_{xx} = \beta w \phi, \quad
    i\psi_t + \psi_{xx} = \beta w \psi, \quad
    w_t = \beta (|\phi|^2 + |\psi|^2)_x

Dispersion ``-i k^2`` of the short waves is integrated exactly through an
integrating factor and the remaining terms by classical RK4 (Lawson's
IF-RK4).  The long wave has no linear part and is stepped directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .model import LsiState, PhysParams

__all__ = ["EvolveConfig", "BlowUpError", "rhs", "step_ifrk4", "evolve"]


class BlowUpError(FloatingPointError):
    def __init__(self, step: int, t: float):
        super().__init__(f"non-finite values after step {step} (t = {t:.6g})")
        self.step = step
        self.t = t


@dataclass(frozen=True)
class EvolveConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    record_every: int = 100
    dealias: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every}")


def _nonlinear(grid, beta, ph, ps, wh, dealias):
    """Non-stiff right-hand side in Fourier space."""
    if dealias:
        m = grid.dealias_mask
        ph, ps, wh = ph * m, ps * m, wh * m
    phi, psi = np.fft.ifft(ph), np.fft.ifft(ps)
    w = np.fft.ifft(wh).real
    nph = np.fft.fft(-1j * beta * w * phi)
    nps = np.fft.fft(-1j * beta * w * psi)
    nw = 1j * grid.k_odd * np.fft.fft(beta * (np.abs(phi) ** 2 + np.abs(psi) ** 2))
    if dealias:
        nph *= m
        nps *= m
        nw *= m
    return nph, nps, nw


def rhs(state: LsiState, params: PhysParams, dealias: bool = True):
    """Time derivatives ``(phi_t, psi_t, w_t)`` in physical space."""
    g = state.grid
    ph, ps, wh = np.fft.fft(state.phi), np.fft.fft(state.psi), np.fft.fft(state.w)
    nph, nps, nw = _nonlinear(g, params.beta, ph, ps, wh, dealias)
    lin = -1j * g.k**2
    return (np.fft.ifft(lin * ph + nph),
            np.fft.ifft(lin * ps + nps),
            np.fft.ifft(nw).real)


def _ifrk4(grid, beta, u, dt, dealias):
    ph, ps, wh = u
    E = np.exp(-0.5j * grid.k**2 * dt)
    E2 = E * E

    def N(a, b, c):
        return _nonlinear(grid, beta, a, b, c, dealias)

    k1 = N(ph, ps, wh)
    k2 = N(E * (ph + 0.5 * dt * k1[0]), E * (ps + 0.5 * dt * k1[1]), wh + 0.5 * dt * k1[2])
    k3 = N(E * ph + 0.5 * dt * k2[0], E * ps + 0.5 * dt * k2[1], wh + 0.5 * dt * k2[2])
    k4 = N(E2 * ph + dt * E * k3[0], E2 * ps + dt * E * k3[1], wh + dt * k3[2])
    s = dt / 6.0
    return (E2 * ph + s * (E2 * k1[0] + 2 * E * (k2[0] + k3[0]) + k4[0]),
            E2 * ps + s * (E2 * k1[1] + 2 * E * (k2[1] + k3[1]) + k4[1]),
            wh + s * (k1[2] + 2 * (k2[2] + k3[2]) + k4[2]))


def _to_state(grid, u, t):
    return LsiState(grid, np.fft.ifft(u[0]), np.fft.ifft(u[1]), np.fft.ifft(u[2]).real, t=t)


def step_ifrk4(state: LsiState, params: PhysParams, dt: float, dealias: bool = True,
               step_index: int = 0) -> LsiState:
    """Advance one step.  A negative ``dt`` integrates backwards in time."""
    g = state.grid
    u = (np.fft.fft(state.phi), np.fft.fft(state.psi), np.fft.fft(state.w))
    u = _ifrk4(g, params.beta, u, dt, dealias)
    if not all(np.all(np.isfinite(a)) for a in u):
        raise BlowUpError(step_index, state.t + dt)
    return _to_state(g, u, state.t + dt)


def evolve(state: LsiState, params: PhysParams, config: EvolveConfig,
           observer: Callable[[LsiState], Any] | None = None,
           backward: bool = False) -> tuple[LsiState, list[tuple[float, Any]]]:
    """Integrate to ``state.t + t_end`` (or ``- t_end`` if ``backward``).

    ``observer(state)`` runs on the initial state, every ``record_every``
    steps and on the final state; its return values are collected as
    ``(t, payload)`` records.  The last step is shortened to land exactly on
    the end time.
    """
    g = state.grid
    sign = -1.0 if backward else 1.0
    records = []

    def record(st):
        records.append((st.t, observer(st) if observer is not None else None))

    record(state)
    if config.t_end == 0:
        return state, records

    nsteps = max(1, math.ceil(config.t_end / config.dt - 1e-9))
    t0 = state.t
    u = (np.fft.fft(state.phi), np.fft.fft(state.psi), np.fft.fft(state.w))
    for i in range(1, nsteps + 1):
        dt = config.dt if i < nsteps else config.t_end - (nsteps - 1) * config.dt
        u = _ifrk4(g, params.beta, u, sign * dt, config.dealias)
        if not all(np.all(np.isfinite(a)) for a in u):
            raise BlowUpError(i, t0 + sign * ((i - 1) * config.dt + dt))
        if i % config.record_every == 0 and i < nsteps:
            record(_to_state(g, u, t0 + sign * i * config.dt))
    final = _to_state(g, u, t0 + sign * config.t_end)
    record(final)
    return final, records
