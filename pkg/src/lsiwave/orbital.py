"""Orbital distance between a state and the solitary-wave orbit.

The metric is

    I(x0, th1, th2) = N(e^{i th1} A1 - R1) + N(e^{i th2} A2 - R2),
    A_k(x) = e^{-i(c/2)(x + x0 - ct)} f_k(x + x0, t),  N(f) = Omega|f|^2 + |f_x|^2,

and its infimum over translations and phases.  For fixed ``x0`` the phases
are optimal in closed form; the translation is found by an exhaustive scan
over all grid shifts (one FFT) followed by golden-section refinement and a
Newton polish on the band-limited overlap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import LsiState, SolitonProfile

__all__ = [
    "OrbitalFit",
    "IncrementFields",
    "Phases",
    "demodulate",
    "i_omega_value",
    "optimal_phases",
    "increments",
    "orbital_distance",
    "constraint_residuals",
]

TWO_PI = 2 * math.pi
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True, eq=False)
class IncrementFields:
    """``w_k = p_k + i q_k`` and the long-wave deviation ``eta``."""

    p1: np.ndarray
    q1: np.ndarray
    p2: np.ndarray
    q2: np.ndarray
    eta: np.ndarray


@dataclass(frozen=True, eq=False)
class OrbitalFit:
    x0: float
    theta1: float
    theta2: float
    i_omega: float
    rho: float
    w_dist: float
    w_dist_min: float
    x0_w: float
    increments: IncrementFields
    degenerate: bool = False


class Phases(tuple):
    """``(theta1, theta2)`` with a ``degenerate`` flag for vanishing overlaps."""

    def __new__(cls, theta1, theta2, degenerate=False):
        obj = super().__new__(cls, (theta1, theta2))
        obj.degenerate = degenerate
        return obj

    theta1 = property(lambda self: self[0])
    theta2 = property(lambda self: self[1])


def _carrier(profile, x0, t):
    g, c = profile.grid, profile.params.c
    return np.exp(-0.5j * c * (g.x + x0 - c * t))


def _demod_pair(field, profile, x0, theta, t):
    """Demodulated field and its x-derivative (product rule, so the
    non-periodic carrier never meets a spectral derivative)."""
    g, c = profile.grid, profile.params.c
    f = g.shift(np.asarray(field, dtype=complex), x0)
    fx = g.deriv(f)
    e = np.exp(1j * theta) * _carrier(profile, x0, t)
    return e * f, e * (fx - 0.5j * c * f)


def demodulate(field, profile: SolitonProfile, x0: float, theta: float, t: float) -> np.ndarray:
    """``e^{i theta} e^{-i(c/2)(x + x0 - ct)} field(x + x0)``."""
    return _demod_pair(field, profile, x0, theta, t)[0]


def _n_dist(profile, A, Ax, R, Rx):
    g = profile.grid
    return profile.params.Omega * g.norm2(A - R) + g.norm2(Ax - Rx)


def i_omega_value(state: LsiState, profile: SolitonProfile, x0: float,
                  theta1: float, theta2: float) -> float:
    total = 0.0
    for f, th, R, Rx in ((state.phi, theta1, profile.R1, profile.R1x),
                         (state.psi, theta2, profile.R2, profile.R2x)):
        A, Ax = _demod_pair(f, profile, x0, th, state.t)
        total += _n_dist(profile, A, Ax, R, Rx)
    return float(total)


def _overlap(profile, A, Ax, R, Rx):
    g = profile.grid
    return complex(g.integrate(profile.params.Omega * R * A + Rx * Ax))


def optimal_phases(state: LsiState, profile: SolitonProfile, x0: float) -> Phases:
    """Closed-form minimizing phases ``theta_k = -arg(int Omega R_k A_k + R_k' A_k')``.

    A component whose overlap vanishes gets phase 0 and sets ``degenerate``.
    """
    out, degenerate = [], False
    for f, R, Rx in ((state.phi, profile.R1, profile.R1x),
                     (state.psi, profile.R2, profile.R2x)):
        A, Ax = _demod_pair(f, profile, x0, 0.0, state.t)
        z = _overlap(profile, A, Ax, R, Rx)
        scale = math.sqrt(profile.grid.n_omega(R, profile.params.Omega) *
                          profile.grid.n_omega(A, profile.params.Omega)) if np.any(R) else 0.0
        if abs(z) <= 1e-14 * max(scale, 1e-300):
            out.append(0.0)
            degenerate = True
        else:
            th = (-np.angle(z)) % TWO_PI
            out.append(0.0 if th >= TWO_PI else float(th))   # -0.0 % 2pi rounds to 2pi
    return Phases(out[0], out[1], degenerate)


def increments(state: LsiState, profile: SolitonProfile, x0: float,
               theta1: float, theta2: float) -> IncrementFields:
    g, p = profile.grid, profile.params
    w1 = demodulate(state.phi, profile, x0, theta1, state.t) - profile.R1
    w2 = demodulate(state.psi, profile, x0, theta2, state.t) - profile.R2
    eta = g.shift(state.w, x0) + (p.beta / p.c) * profile.rho2
    return IncrementFields(w1.real, w1.imag, w2.real, w2.imag, eta)


# -- translation search -------------------------------------------------------

class _BandLimited:
    """``S(x0) = sum_j c_j e^{i k_j x0}`` with analytic derivatives."""

    def __init__(self, grid, coeffs):
        self.grid = grid
        self.c = coeffs

    def on_grid(self):
        # S(m h) for m = 0..n-1
        return self.grid.n * np.fft.ifft(self.c)

    def __call__(self, x0, order=0):
        e = self.c * np.exp(1j * self.grid.k * x0)
        if order:
            e = (1j * self.grid.k) ** order * e
        return e.sum()


class _Modulus:
    """``|S|`` with first and second derivatives."""

    def __init__(self, S):
        self.S = S

    def on_grid(self):
        return np.abs(self.S.on_grid())

    def derivs(self, x):
        s, s1, s2 = self.S(x), self.S(x, 1), self.S(x, 2)
        mod = abs(s)
        if mod == 0:
            return 0.0, 0.0, 0.0
        re1 = (np.conj(s) * s1).real
        d2 = ((np.conj(s1) * s1).real + (np.conj(s) * s2).real) / mod - re1**2 / mod**3
        return mod, re1 / mod, d2


class _RealPart:
    def __init__(self, S):
        self.S = S

    def on_grid(self):
        return self.S.on_grid().real

    def derivs(self, x):
        return self.S(x).real, self.S(x, 1).real, self.S(x, 2).real


def _short_wave_overlaps(state, profile):
    """``|z_k(x0)| = |S_k(x0)|`` for the two short-wave components."""
    g, p = profile.grid, profile.params
    out = []
    for f, R in ((state.phi, profile.R1), (state.psi, profile.R2)):
        # z(x0) = e^{-i(c/2)(x0-ct)} int m(x) f(x + x0) dx after integrating by parts
        m = np.exp(-0.5j * p.c * g.x) * (p.Omega * R - g.deriv(R, 2))
        out.append(_Modulus(_BandLimited(g, g.h * np.fft.fft(f) * np.fft.ifft(m))))
    return out


def _maximize(terms, grid, tol):
    """Maximize ``sum(terms)`` over x0 in [-L/2, L/2).

    Returns ``(x0, flat)``; ``flat`` flags a landscape with no resolvable
    maximum, in which case the leftmost scan point is returned.
    """
    n, h = grid.n, grid.h
    vals = np.roll(sum(t.on_grid() for t in terms), n // 2)   # index i <-> shift (i - n/2) h
    top, bottom = np.max(vals), np.min(vals)
    if top - bottom <= 1e-13 * max(abs(top), abs(bottom), 1e-300):
        return -0.5 * n * h, True
    xc = (int(np.argmax(vals)) - n // 2) * h

    def F(x):
        return sum(t.derivs(x)[0] for t in terms)

    a, b = xc - h, xc + h
    c1, c2 = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    f1, f2 = F(c1), F(c2)
    while b - a > tol:
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - _GOLDEN * (b - a)
            f1 = F(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + _GOLDEN * (b - a)
            f2 = F(c2)
    x = 0.5 * (a + b)

    # golden section resolves x0 only to ~sqrt(eps); polish with Newton on F'
    for _ in range(8):
        d = [t.derivs(x) for t in terms]
        d1, d2 = sum(v[1] for v in d), sum(v[2] for v in d)
        if d2 >= 0 or abs(d1 / d2) > h:
            break
        x -= d1 / d2
        if abs(d1 / d2) < 1e-15 * max(1.0, abs(x)):
            break
    x = (x + 0.5 * grid.length) % grid.length - 0.5 * grid.length
    return float(x), False


def orbital_distance(state: LsiState, profile: SolitonProfile) -> OrbitalFit:
    """Minimize the metric over translation and both phases."""
    g = profile.grid
    if state.grid != g:
        raise ValueError("state and profile live on different grids")
    tol = 1e-8 * g.length
    x0, flat = _maximize(_short_wave_overlaps(state, profile), g, tol)
    ph = optimal_phases(state, profile, x0)
    val = i_omega_value(state, profile, x0, ph[0], ph[1])
    inc = increments(state, profile, x0, ph[0], ph[1])
    w_dist = math.sqrt(g.norm2(inc.eta))

    # long wave: independent translation maximizing int W(x) w(x + x0)
    Sw = _BandLimited(g, g.h * np.fft.fft(state.w) * np.fft.ifft(profile.W))
    xw, _ = _maximize([_RealPart(Sw)], g, tol)
    w_dist_min = math.sqrt(g.norm2(g.shift(state.w, xw) - profile.W))
    w_dist_min = min(w_dist_min, w_dist)
    return OrbitalFit(x0=x0, theta1=ph[0], theta2=ph[1], i_omega=val,
                      rho=math.sqrt(max(val, 0.0)), w_dist=w_dist, w_dist_min=w_dist_min,
                      x0_w=xw, increments=inc, degenerate=flat or ph.degenerate)


def constraint_residuals(inc: IncrementFields, profile: SolitonProfile) -> tuple[float, float, float]:
    """First-order conditions at a minimizer:
    ``int rho^2 R1 q1``, ``int rho^2 R2 q2``, ``int rho^2 (R1 p1_x + R2 p2_x)``."""
    g = profile.grid
    r2 = profile.rho2
    return (float(g.integrate(r2 * profile.R1 * inc.q1)),
            float(g.integrate(r2 * profile.R2 * inc.q2)),
            float(g.integrate(r2 * (profile.R1 * g.deriv(inc.p1) + profile.R2 * g.deriv(inc.p2)))))
