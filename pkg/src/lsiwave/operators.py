"""Linearized operators about the ground state and constrained spectral bounds.

    L0 = -d^2 + Omega - gamma (R1^2 + R2^2)
    L1 = -d^2 + Omega - gamma (3 R1^2 + R2^2)
    L2 = -d^2 + Omega - gamma (R1^2 + 3 R2^2)
    L3 = -2 gamma R1 R2            (multiplication)

``L0`` governs the imaginary increments ``q_k``; the block operator
``[[L1, L3], [L3, L2]]`` governs the real increments ``(p1, p2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .model import SolitonProfile

__all__ = [
    "LinearizedOperator",
    "ConvergenceError",
    "RayleighResult",
    "quad_form_q",
    "quad_form_p",
    "kernel_identities",
    "constrained_rayleigh",
]

KINDS = ("L0", "L1", "L2", "L3")


class ConvergenceError(RuntimeError):
    def __init__(self, iterations, residual):
        super().__init__(f"inverse iteration did not converge in {iterations} sweeps "
                         f"(last residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    kind: str
    profile: SolitonProfile

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator {self.kind!r}; expected one of {KINDS}")

    @property
    def potential(self) -> np.ndarray:
        """Multiplicative part of the operator."""
        p, R1, R2 = self.profile.params, self.profile.R1, self.profile.R2
        g = p.gamma
        if self.kind == "L0":
            return p.Omega - g * (R1**2 + R2**2)
        if self.kind == "L1":
            return p.Omega - g * (3 * R1**2 + R2**2)
        if self.kind == "L2":
            return p.Omega - g * (R1**2 + 3 * R2**2)
        return -2 * g * R1 * R2

    @property
    def has_laplacian(self) -> bool:
        return self.kind != "L3"

    def apply(self, f) -> np.ndarray:
        grid = self.profile.grid
        f = grid.check(f)
        out = self.potential * f
        if self.has_laplacian:
            out = out - grid.deriv(f, 2)
        return out

    __call__ = apply

    def matrix(self) -> np.ndarray:
        """Dense symmetric discretization (spectral second derivative)."""
        m = np.diag(self.potential)
        if self.has_laplacian:
            m = m + _neg_laplacian(self.profile.grid)
        return m


def _neg_laplacian(grid) -> np.ndarray:
    col = np.fft.ifft(grid.k**2).real          # circulant first column of -d^2
    idx = (np.arange(grid.n)[:, None] - np.arange(grid.n)[None, :]) % grid.n
    return col[idx]


def _ops(profile):
    return {k: LinearizedOperator(k, profile) for k in KINDS}


def quad_form_q(profile: SolitonProfile, q1, q2) -> float:
    """``<L0 q1, q1> + <L0 q2, q2>``."""
    g, L0 = profile.grid, LinearizedOperator("L0", profile)
    return float(g.integrate(L0(q1) * q1) + g.integrate(L0(q2) * q2))


def quad_form_p(profile: SolitonProfile, p1, p2) -> float:
    """``<L1 p1, p1> + <L2 p2, p2> + 2 <L3 p1, p2>``."""
    g, op = profile.grid, _ops(profile)
    return float(g.integrate(op["L1"](p1) * p1) + g.integrate(op["L2"](p2) * p2)
                 + 2 * g.integrate(op["L3"](p1) * p2))


def kernel_identities(profile: SolitonProfile) -> tuple[float, float, float]:
    """Sup norms of ``L0 R1``, ``L0 R2`` and of the translation-mode identities
    ``L1 R1x + L3 R2x``, ``L2 R2x + L3 R1x`` (the larger of the two)."""
    op = _ops(profile)
    R1, R2, R1x, R2x = profile.R1, profile.R2, profile.R1x, profile.R2x
    sup = lambda f: float(np.max(np.abs(f)))
    t1 = sup(op["L1"](R1x) + op["L3"](R2x))
    t2 = sup(op["L2"](R2x) + op["L3"](R1x))
    return sup(op["L0"](R1)), sup(op["L0"](R2)), max(t1, t2)


@dataclass(frozen=True, eq=False)
class RayleighResult:
    """Constrained minimum ``mu`` and its minimizer (a tuple of fields, one per
    component, normalized to unit L2 norm)."""

    mu: float
    minimizer: tuple
    iterations: int
    residual: float


def _form_matrix(profile, form):
    if form == "q":
        L0 = LinearizedOperator("L0", profile).matrix()
        Z = np.zeros_like(L0)
        return np.block([[L0, Z], [Z, L0]])
    if form == "p":
        op = _ops(profile)
        L3 = np.diag(op["L3"].potential)
        return np.block([[op["L1"].matrix(), L3], [L3, op["L2"].matrix()]])
    raise ValueError(f"form must be 'q' or 'p', got {form!r}")


def constrained_rayleigh(profile: SolitonProfile, constraint_fields=(), form: str = "q",
                         block: int = 6, tol: float = 1e-10, max_iter: int = 3000,
                         seed: int = 0) -> RayleighResult:
    """Minimum of the Rayleigh quotient over the L2-orthogonal complement of
    ``constraint_fields``.

    Both forms act on pairs: ``form='q'`` uses ``diag(L0, L0)`` on
    ``(q1, q2)`` and ``form='p'`` the coupled block operator on ``(p1, p2)``.
    Each constraint is a pair ``(f1, f2)``; pass ``(R1, 0)`` and ``(0, R2)``
    for ``<p_k, R_k> = 0``.  Constraints that vanish identically (an empty
    component at the ends of the ray) are dropped.

    Block inverse iteration with a shift below the spectrum: every sweep
    solves the constraint-bordered system, re-orthonormalizes the block and
    applies Rayleigh-Ritz.  Converged when the projected residual of the
    lowest Ritz pair drops below ``tol`` times the operator scale.
    """
    g = profile.grid
    A = _form_matrix(profile, form)
    m = A.shape[0]
    ncomp = 2
    C = []
    for c in constraint_fields:
        c = np.concatenate([np.asarray(part, dtype=float).ravel() for part in c])
        if c.shape != (m,):
            raise ValueError(f"constraint has {c.size} entries, expected {m}")
        if np.any(c):
            C.append(c)
    if C:
        C = np.array(C).T
        Qc, Rc = np.linalg.qr(C)
        if np.min(np.abs(np.diag(Rc))) < 1e-10 * np.max(np.abs(np.diag(Rc))):
            raise ValueError("constraint fields are linearly dependent on this grid")
    else:
        Qc = np.zeros((m, 0))
    r = Qc.shape[1]

    def project(X):
        return X - Qc @ (Qc.T @ X)

    # -d^2 is non-negative, so the pointwise potential bounds the spectrum below
    pot = A - np.kron(np.eye(ncomp), _neg_laplacian(g))
    lower = np.min(np.diag(pot) - (np.sum(np.abs(pot), axis=1) - np.abs(np.diag(pot))))
    sigma = lower - 1.0
    scale = np.max(np.abs(A))

    def factor(shift):
        bordered = np.zeros((m + r, m + r))
        bordered[:m, :m] = A - shift * np.eye(m)
        bordered[:m, m:] = Qc
        bordered[m:, :m] = Qc.T
        return sla.lu_factor(bordered)

    lu = factor(sigma)
    rng = np.random.default_rng(seed)
    b = min(block, m - r)
    X, _ = np.linalg.qr(project(rng.standard_normal((m, b))))
    residual = np.inf
    for it in range(1, max_iter + 1):
        rhs = np.vstack([X, np.zeros((r, b))])
        Y = project(sla.lu_solve(lu, rhs)[:m])
        X, _ = np.linalg.qr(Y)
        H = X.T @ A @ X
        evals, V = np.linalg.eigh(0.5 * (H + H.T))
        X = X @ V
        x = X[:, 0]
        res = project(A @ x) - evals[0] * x
        residual = float(np.linalg.norm(res))
        if residual < tol * scale:
            parts = tuple(x[i * g.n:(i + 1) * g.n] / np.sqrt(g.h) for i in range(ncomp))
            return RayleighResult(float(evals[0]), parts, it, residual)
        # some eigenvalue lies within `residual` of the Ritz value, and the Ritz
        # value bounds the minimum from above: a shift 2*residual below it stays
        # under the spectrum once the lowest pair dominates.  Move it when the
        # gap to the spectrum would at least halve.
        target = evals[0] - max(2 * residual, 1e-3)
        if target - sigma > 0.5 * (evals[0] - sigma) and it >= 3:
            sigma = target
            lu = factor(sigma)
    raise ConvergenceError(max_iter, residual)
