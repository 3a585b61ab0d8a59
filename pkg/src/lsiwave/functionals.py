"""Conserved integrals, the Lyapunov functional and profile-level functionals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LsiState, PhysParams, SolitonProfile
from .spectral import PeriodicGrid

__all__ = [
    "InvariantRecord",
    "invariants",
    "lyapunov",
    "j_functional",
    "j_functional_homogeneous",
    "j_gradient",
    "pohozaev_terms",
    "pohozaev_residuals",
    "profile_energy",
    "scale_profile",
    "UnderResolvedError",
]

IMAG_TOL = 1e-12


class UnderResolvedError(ValueError):
    """A rescaled profile no longer fits the grid (tails or bandwidth)."""


@dataclass(frozen=True)
class InvariantRecord:
    """Masses ``I1, I2``, momentum ``I3``, energy ``I4`` and ``L`` at time ``t``.

    ``scales`` holds the integral of the absolute value of each integrand
    (I1, I2, I3, I4, L); drifts are measured relative to these, since the
    energy of a solitary wave can vanish identically.
    """

    I1: float
    I2: float
    I3: float
    I4: float
    L: float
    t: float
    scales: tuple = (1.0, 1.0, 1.0, 1.0, 1.0)

    def as_tuple(self):
        return (self.I1, self.I2, self.I3, self.I4, self.L)


def _real(z, scale, what):
    if abs(z.imag) > IMAG_TOL * max(1.0, scale):
        raise ArithmeticError(f"{what} has imaginary residue {z.imag:.3e}")
    return float(z.real)


def invariants(state: LsiState, params: PhysParams) -> InvariantRecord:
    g = state.grid
    phi, psi, w = state.phi, state.psi, state.w
    phx, psx = g.deriv(phi), g.deriv(psi)
    phcx, pscx = g.deriv(np.conj(phi)), g.deriv(np.conj(psi))
    a2, b2 = np.abs(phi) ** 2, np.abs(psi) ** 2

    I1 = g.integrate(a2)
    I2 = g.integrate(b2)
    mom = 1j * (np.conj(phi) * phx - phi * phcx + np.conj(psi) * psx - psi * pscx)
    dens3 = w**2 + mom
    s3 = g.integrate(np.abs(dens3))
    I3 = _real(g.integrate(dens3), s3, "momentum I3")
    kin = np.abs(phx) ** 2 + np.abs(psx) ** 2
    pot = params.beta * (a2 + b2) * w
    I4 = float(g.integrate(kin + pot))
    s4 = float(g.integrate(kin + np.abs(pot)))

    L = params.omega * (I1 + I2) + 0.5 * params.c * I3 + I4
    sL = params.omega * (I1 + I2) + 0.5 * params.c * s3 + s4
    return InvariantRecord(float(I1), float(I2), I3, I4, float(L), state.t,
                           scales=(float(I1), float(I2), float(s3), s4, float(sL)))


def lyapunov(state: LsiState, params: PhysParams) -> float:
    """``omega (I1 + I2) + (c/2) I3 + I4``."""
    return invariants(state, params).L


def _jparts(u, v, grid):
    u, v = grid.check(u), grid.check(v)
    M = grid.norm2(u) + grid.norm2(v)
    K = grid.norm2(grid.deriv(u)) + grid.norm2(grid.deriv(v))
    Q = float(grid.integrate((u * u + v * v) ** 2))
    if not Q > 0:
        raise ValueError("J is undefined when u^2 + v^2 vanishes identically")
    return M, K, Q


def j_functional(u, v, grid: PeriodicGrid, theta: float = 0.25) -> float:
    """``(|u|^2 + |v|^2)^(1 - theta/2) (|u_x|^2 + |v_x|^2)^(theta/2) / |u^2 + v^2|_2^(1/2)``.

    Invariant under the mass-preserving dilation ``sqrt(q) u(qx)`` but
    homogeneous of degree one under amplitude scaling, so its infimum over
    all pairs is zero; see :func:`j_functional_homogeneous`.
    """
    M, K, Q = _jparts(u, v, grid)
    return M ** (1 - theta / 2) * K ** (theta / 2) / Q**0.25


def j_functional_homogeneous(u, v, grid: PeriodicGrid, theta: float = 0.25) -> float:
    """Degree-zero variant with mass exponent ``(1 - theta)/2``; this is the
    Gagliardo-Nirenberg quotient whose minimizers are the ground-state ray.
    Equals ``j_functional / sqrt(mass)``."""
    M, K, Q = _jparts(u, v, grid)
    return M ** ((1 - theta) / 2) * K ** (theta / 2) / Q**0.25


def j_gradient(u, v, grid: PeriodicGrid, theta: float = 0.25,
               homogeneous: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """L2 gradient ``(dJ/du, dJ/dv)`` of :func:`j_functional` (or of the
    homogeneous variant)."""
    M, K, Q = _jparts(u, v, grid)
    a = (1 - theta) / 2 if homogeneous else 1 - theta / 2
    b = theta / 2
    J = M**a * K**b / Q**0.25
    r2 = u * u + v * v
    return tuple(J * (2 * a * f / M - 2 * b * grid.deriv(f, 2) / K - r2 * f / Q)
                 for f in (u, v))


def pohozaev_terms(profile: SolitonProfile) -> tuple[float, float, float]:
    """``A = 3 int(R1x^2 + R2x^2)``, ``B = Omega int rho^2``, ``C = (3 gamma/4) int rho^4``."""
    g, p = profile.grid, profile.params
    A = 3 * (g.norm2(profile.R1x) + g.norm2(profile.R2x))
    B = p.Omega * float(g.integrate(profile.rho2))
    C = 0.75 * p.gamma * float(g.integrate(profile.rho2**2))
    return A, B, C


def pohozaev_residuals(profile: SolitonProfile) -> tuple[float, float]:
    A, B, C = pohozaev_terms(profile)
    return A - B, B - C


def profile_energy(profile: SolitonProfile, u=None, v=None) -> float:
    """``int(u_x^2 + v_x^2 + (c^2/4)(u^2 + v^2) - gamma (u^2 + v^2)^2)``.

    Evaluated on the profile's own pair unless ``u, v`` are given.
    """
    g, p = profile.grid, profile.params
    u = profile.R1 if u is None else g.check(u)
    v = profile.R2 if v is None else g.check(v)
    r2 = u * u + v * v
    return float(g.norm2(g.deriv(u)) + g.norm2(g.deriv(v))
                 + g.integrate(0.25 * p.c**2 * r2 - p.gamma * r2**2))


def scale_profile(u, v, q: float, grid: PeriodicGrid, tail_tol: float = 1e-8,
                  band_tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Mass-preserving dilation ``sqrt(q) (u(qx), v(qx))`` about the grid centre.

    Resampled through the trigonometric interpolant.  Raises
    :class:`UnderResolvedError` if the result has non-negligible tails at the
    seam or content in the top tenth of the spectrum.
    """
    if not q > 0:
        raise ValueError(f"dilation factor must be positive, got {q}")
    u, v = grid.check(u), grid.check(v)
    if q == 1:
        return u.copy(), v.copy()
    y = grid.center + q * (grid.x - grid.center)
    inside = np.abs(y - grid.center) < 0.5 * grid.length
    out = []
    for f in (u, v):
        fq = np.zeros(grid.n)
        fq[inside] = np.sqrt(q) * grid.interpolate(f, y[inside])
        peak = np.max(np.abs(fq))
        if peak > 0:
            edge = max(abs(fq[0]), abs(fq[-1]))
            if edge > tail_tol * peak:
                raise UnderResolvedError(f"dilation q={q} leaves tail {edge / peak:.1e} at the seam")
            spec = np.abs(np.fft.fft(fq))
            top = np.abs(grid.k) >= 0.9 * np.pi / grid.h
            if np.max(spec[top]) > band_tol * np.max(spec):
                raise UnderResolvedError(f"dilation q={q} is under-resolved on this grid")
        out.append(fq)
    return out[0], out[1]
