"""Physical parameters, the sech solitary-wave family and profile residuals."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectral import PeriodicGrid

__all__ = [
    "AdmissibilityError",
    "PhysParams",
    "make_params",
    "SolitonProfile",
    "LsiState",
    "ground_state_profile",
    "solitary_state",
    "residual_cs1",
    "write_profile",
    "read_profile",
]

TAIL_TOL = 1e-8


class AdmissibilityError(ValueError):
    """Parameters outside the region where solitary waves exist."""


@dataclass(frozen=True)
class PhysParams:
    beta: float
    c: float
    omega: float

    @property
    def Omega(self) -> float:
        return self.omega - self.c**2 / 4

    @property
    def gamma(self) -> float:
        return self.beta**2 / self.c


def make_params(beta: float, c: float, omega: float) -> PhysParams:
    """Validated :class:`PhysParams`; raises :class:`AdmissibilityError`
    naming the violated condition."""
    beta, c, omega = float(beta), float(c), float(omega)
    if not c > 0:
        raise AdmissibilityError(f"wave speed must satisfy c > 0 (got c={c})")
    if not 4 * omega - c**2 > 0:
        raise AdmissibilityError(
            f"need 4*omega - c^2 > 0 (got 4*{omega} - {c}^2 = {4 * omega - c**2})"
        )
    if beta == 0:
        raise AdmissibilityError("coupling beta must be nonzero")
    return PhysParams(beta, c, omega)


@dataclass(frozen=True, eq=False)
class SolitonProfile:
    """Ground-state pair ``(R1, R2) = (cos theta, sin theta) * R`` and the
    slaved long wave ``W = -beta (R1^2 + R2^2) / c``."""

    params: PhysParams
    theta: float
    grid: PeriodicGrid
    R1: np.ndarray
    R2: np.ndarray
    W: np.ndarray

    @property
    def rho2(self) -> np.ndarray:
        return self.R1**2 + self.R2**2

    @property
    def R1x(self) -> np.ndarray:
        return self.grid.deriv(self.R1)

    @property
    def R2x(self) -> np.ndarray:
        return self.grid.deriv(self.R2)


@dataclass(frozen=True, eq=False)
class LsiState:
    """Short waves ``phi``, ``psi`` (complex), long wave ``w`` (real) at time ``t``."""

    grid: PeriodicGrid
    phi: np.ndarray
    psi: np.ndarray
    w: np.ndarray
    t: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("phi", "psi"):
            object.__setattr__(self, name, np.asarray(self.grid.check(getattr(self, name)), dtype=complex))
        w = self.grid.check(self.w)
        if np.iscomplexobj(w):
            if np.max(np.abs(w.imag), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(w))):
                raise ValueError("long-wave field w must be real")
            w = w.real
        object.__setattr__(self, "w", np.asarray(w, dtype=float))

    def replace(self, **kw) -> "LsiState":
        args = dict(grid=self.grid, phi=self.phi, psi=self.psi, w=self.w, t=self.t)
        args.update(kw)
        return LsiState(**args)


def _sech(z):
    # avoids overflow warnings of 1/cosh for large |z|
    e = np.exp(-np.abs(z))
    return 2 * e / (1 + e * e)


def ground_state_profile(params: PhysParams, theta: float = math.pi / 4,
                         grid: PeriodicGrid | None = None) -> SolitonProfile:
    """Closed-form ground state ``R = sqrt(2 Omega/gamma) sech(sqrt(Omega)(x - center))``
    split along the ray ``(cos theta, sin theta)``."""
    if grid is None:
        from .spectral import default_grid
        grid = default_grid(params.Omega)
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError(f"mixing angle must lie in [0, pi/2], got {theta}")
    Omega, gamma = params.Omega, params.gamma
    tail = float(_sech(math.sqrt(Omega) * grid.length / 2))
    if tail > TAIL_TOL:
        raise ValueError(
            f"domain length {grid.length} too short: relative tail {tail:.2e} exceeds {TAIL_TOL:g}"
        )
    R = math.sqrt(2 * Omega / gamma) * _sech(math.sqrt(Omega) * (grid.x - grid.center))
    # cos(pi/2) is 6e-17, not 0; endpoints of the ray must be exactly scalar
    ct, st = (0.0 if abs(v) < 1e-15 else v for v in (math.cos(theta), math.sin(theta)))
    R1, R2 = ct * R, st * R
    W = -params.beta * (R1**2 + R2**2) / params.c
    return SolitonProfile(params, float(theta), grid, R1, R2, W)


def solitary_state(profile: SolitonProfile, t: float = 0.0) -> LsiState:
    """Travelling wave ``e^{i omega t} R_k(x - ct) e^{i c (x - ct)/2}``,
    ``w = W(x - ct)``, transported spectrally with periodic wrap."""
    g, p = profile.grid, profile.params
    carrier = np.exp(0.5j * p.c * g.x)
    shift = -p.c * t
    rot = np.exp(1j * p.omega * t)
    phi = rot * g.shift(profile.R1 * carrier, shift)
    psi = rot * g.shift(profile.R2 * carrier, shift)
    w = g.shift(profile.W, shift)
    return LsiState(g, phi, psi, w, t=float(t))


def residual_cs1(profile: SolitonProfile) -> tuple[float, float]:
    """Sup-norm residuals of ``-u'' + Omega u - gamma (u^2 + v^2) u = 0`` for each component."""
    g, p = profile.grid, profile.params
    rho2 = profile.rho2
    out = []
    for R in (profile.R1, profile.R2):
        r = -g.deriv(R, 2) + p.Omega * R - p.gamma * rho2 * R
        out.append(float(np.max(np.abs(r))))
    return out[0], out[1]


def write_profile(prefix, profile: SolitonProfile) -> tuple[Path, Path]:
    """Write ``<prefix>.csv`` (x, R1, R2, W) and the ``<prefix>.json`` parameter sidecar."""
    prefix = Path(prefix)
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    g, p = profile.grid, profile.params
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "R1", "R2", "W"])
        for row in zip(g.x, profile.R1, profile.R2, profile.W):
            w.writerow([f"{float(v):.17g}" for v in row])
    meta = dict(beta=p.beta, c=p.c, omega=p.omega, Omega=p.Omega, gamma=p.gamma,
                theta=profile.theta, n=g.n, length=g.length)
    json_path.write_text(json.dumps(meta, indent=2))
    return csv_path, json_path


def read_profile(prefix) -> SolitonProfile:
    prefix = Path(prefix)
    meta = json.loads(prefix.with_suffix(".json").read_text())
    data = np.genfromtxt(prefix.with_suffix(".csv"), delimiter=",", names=True)
    params = make_params(meta["beta"], meta["c"], meta["omega"])
    x = np.asarray(data["x"])
    grid = PeriodicGrid(int(meta["n"]), float(meta["length"]), center=float(x[0] + meta["length"] / 2))
    return SolitonProfile(params, float(meta["theta"]), grid,
                          np.asarray(data["R1"]), np.asarray(data["R2"]), np.asarray(data["W"]))
