"""Fourier representation of fields on a uniform periodic grid.

Fields are plain numpy arrays sampled on a :class:`PeriodicGrid`; the grid
owns every operation that needs spacing or wavenumbers (derivatives,
quadrature, translation).  Real arrays stay real through every operation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "PeriodicGrid",
    "default_grid",
    "min_length",
    "write_field_csv",
    "read_field_csv",
]


def min_length(Omega: float) -> float:
    """Shortest domain on which a sech profile of decay rate sqrt(Omega)
    drops below 1e-8 at the boundary."""
    return 40.0 / np.sqrt(Omega)


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic sampling of ``[center - length/2, center + length/2)``.

    Parameters
    ----------
    n : int
        Number of points, even and at least 8.
    length : float
        Domain length.
    center : float
        Midpoint of the domain; ``x[n // 2] == center``.
    """

    n: int
    length: float
    center: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"domain length must be positive, got {self.length}")

    @cached_property
    def h(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return self.center - 0.5 * self.length + self.h * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def k_odd(self) -> np.ndarray:
        # Nyquist mode has no consistent sign for odd derivatives
        k = self.k.copy()
        k[self.n // 2] = 0.0
        return k

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping modes with ``|k| <= (2/3) k_max``."""
        kmax = np.pi / self.h
        return np.abs(self.k) <= (2.0 / 3.0) * kmax

    def check(self, f) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != (self.n,):
            raise ValueError(f"field of shape {f.shape} does not live on a grid of {self.n} points")
        return f

    # -- calculus -----------------------------------------------------------

    def deriv(self, f, order: int = 1) -> np.ndarray:
        """Spectral derivative of order 1 or 2."""
        f = self.check(f)
        if order not in (1, 2):
            raise ValueError(f"derivative order must be 1 or 2, got {order}")
        mult = 1j * self.k_odd if order == 1 else -self.k**2
        out = np.fft.ifft(mult * np.fft.fft(f))
        return out.real if np.isrealobj(f) else out

    def integrate(self, f):
        """Periodic trapezoid rule; spectrally accurate for smooth periodic f."""
        f = self.check(f)
        return self.h * np.sum(f)

    def inner(self, f, g) -> complex:
        """L2 inner product, conjugate-linear in the first slot."""
        f, g = self.check(f), self.check(g)
        return complex(self.h * np.vdot(f, g))

    def norm2(self, f) -> float:
        """Squared L2 norm."""
        f = self.check(f)
        return float(self.h * np.sum(np.abs(f) ** 2))

    def modal_norm2(self, f) -> float:
        """Squared L2 norm from Fourier coefficients (Parseval)."""
        fh = np.fft.fft(self.check(f))
        return float(self.h / self.n * np.sum(np.abs(fh) ** 2))

    def h1_norm2(self, f) -> float:
        return self.norm2(f) + self.norm2(self.deriv(f, 1))

    def n_omega(self, f, Omega: float) -> float:
        """Weighted H1 form ``Omega*||f||^2 + ||f_x||^2``."""
        if not Omega > 0:
            raise ValueError(f"Omega must be positive, got {Omega}")
        return Omega * self.norm2(f) + self.norm2(self.deriv(f, 1))

    # -- translation --------------------------------------------------------

    def shift(self, f, x0: float) -> np.ndarray:
        """Return ``f(x + x0)`` by modal phase multiplication (periodic wrap)."""
        f = self.check(f)
        out = np.fft.ifft(np.exp(1j * self.k * x0) * np.fft.fft(f))
        return out.real if np.isrealobj(f) else out

    def interpolate(self, f, y) -> np.ndarray:
        """Evaluate the trigonometric interpolant of ``f`` at arbitrary points."""
        f = self.check(f)
        y = np.asarray(y, dtype=float)
        u = y - self.x[0]
        if np.isrealobj(f):
            fh = np.fft.rfft(f) / self.n
            w = np.full(fh.size, 2.0)          # conjugate modes fold onto j > 0
            w[0] = 1.0
            w[-1] = 1.0                        # Nyquist enters once, as a cosine
            k = 2 * np.pi * np.arange(fh.size) / self.length
        else:
            fh = np.fft.fft(f) / self.n
            w = np.ones(fh.size)
            k = self.k
        # modes below 1e-20 of the peak cannot change the sum at double precision
        keep = np.abs(fh) > 1e-20 * np.max(np.abs(fh), initial=0.0)
        phase = np.exp(1j * np.outer(u, k[keep]))
        out = phase @ (w[keep] * fh[keep])
        return out.real if np.isrealobj(f) else out


def default_grid(Omega: float, n: int = 1024) -> PeriodicGrid:
    """Default truncation: twice :func:`min_length`, so a profile can travel a
    quarter of the domain before its tails reach the seam."""
    return PeriodicGrid(n=n, length=2.0 * min_length(Omega))


def _g(v) -> str:
    return f"{float(v):.17g}"


def write_field_csv(path, grid: PeriodicGrid, f) -> None:
    """Snapshot export: ``x, value`` for real fields, ``x, re, im`` for complex."""
    f = grid.check(f)
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        if np.iscomplexobj(f):
            w.writerow(["x", "re", "im"])
            for xi, fi in zip(grid.x, f):
                w.writerow([_g(xi), _g(fi.real), _g(fi.imag)])
        else:
            w.writerow(["x", "value"])
            for xi, fi in zip(grid.x, f):
                w.writerow([_g(xi), _g(fi)])


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_field_csv`; returns ``(x, samples)``."""
    data = np.genfromtxt(Path(path), delimiter=",", names=True)
    x = np.asarray(data["x"], dtype=float)
    if "re" in data.dtype.names:
        return x, data["re"] + 1j * data["im"]
    return x, np.asarray(data["value"], dtype=float)
