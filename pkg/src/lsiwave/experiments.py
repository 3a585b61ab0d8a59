"""Experiment configuration and orchestration: perturbed-soliton stability
runs, delta sweeps and the identity check report."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
import tomli

from .dynamics import BlowUpError, EvolveConfig, evolve
from .functionals import (invariants, j_functional, j_functional_homogeneous, j_gradient,
                          pohozaev_residuals, pohozaev_terms)
from .model import (LsiState, SolitonProfile, ground_state_profile,
                    make_params, residual_cs1, solitary_state)
from .operators import constrained_rayleigh, kernel_identities
from .orbital import orbital_distance
from .spectral import PeriodicGrid

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "config_from_dict",
    "perturb",
    "trajectory",
    "StabilityReport",
    "run_stability",
    "run_check",
    "run_sweep",
    "write_trajectory_csv",
    "write_summary_csv",
    "TRAJECTORY_COLUMNS",
    "SUMMARY_COLUMNS",
]

KINDS = ("amplitude", "localized_bump", "random_fourier", "w_only")
NOISE_MODES = 24          # random_fourier keeps |k| <= NOISE_MODES * 2pi/L
DRIFT_TOL = 1e-8
CHECK_TOL = 1e-8

TRAJECTORY_COLUMNS = ("t", "I1", "I2", "I3", "I4", "L", "rho", "i_omega", "x0",
                      "theta1", "theta2", "w_dist_shared", "w_dist_min")
SUMMARY_COLUMNS = ("delta", "sup_rho", "final_rho", "sup_w_dist", "delta_L0",
                   "sup_w_dist_min", "status")


class ConfigError(ValueError):
    """Invalid or inadmissible experiment configuration."""


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class ParamsSection:
    beta: float = math.sqrt(2.0)
    c: float = 2.0
    omega: float = 2.0
    theta: float = math.pi / 4


@dataclass(frozen=True)
class GridSection:
    n: int = 1024
    length: float = 80.0
    center: float = 0.0


@dataclass(frozen=True)
class RunSection:
    dt: float = 1e-3
    t_end: float = 10.0
    record_every: int = 100
    dealias: bool = True


@dataclass(frozen=True)
class PerturbationSection:
    kind: str = "amplitude"
    delta: float = 0.0
    seed: int = 0
    preserve_mass: bool = True
    preserve_ray: bool = False
    offset: float = 0.0


@dataclass(frozen=True)
class OutputsSection:
    dir: str = "out"
    snapshot_times: tuple = ()


@dataclass(frozen=True)
class SweepSection:
    deltas: tuple = (1e-3, 3e-3, 1e-2)


@dataclass(frozen=True)
class ExperimentConfig:
    params: ParamsSection = field(default_factory=ParamsSection)
    grid: GridSection = field(default_factory=GridSection)
    run: RunSection = field(default_factory=RunSection)
    perturbation: PerturbationSection = field(default_factory=PerturbationSection)
    outputs: OutputsSection = field(default_factory=OutputsSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def __post_init__(self):
        self.validate()

    def validate(self):
        p, g, r, pt = self.params, self.grid, self.run, self.perturbation
        try:
            make_params(p.beta, p.c, p.omega)
            PeriodicGrid(g.n, g.length, g.center)
            EvolveConfig(r.dt, r.t_end, r.record_every, r.dealias)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0 <= p.theta <= math.pi / 2:
            raise ConfigError(f"params.theta must lie in [0, pi/2], got {p.theta}")
        if pt.kind not in KINDS:
            raise ConfigError(f"perturbation.kind must be one of {KINDS}, got {pt.kind!r}")
        if not pt.delta >= 0:
            raise ConfigError(f"perturbation.delta must be non-negative, got {pt.delta}")
        if any(not 0 <= t <= r.t_end for t in self.outputs.snapshot_times):
            raise ConfigError("outputs.snapshot_times must lie in [0, run.t_end]")
        d = self.sweep.deltas
        if any(not x > 0 for x in d) or any(b <= a for a, b in zip(d, d[1:])):
            raise ConfigError(f"sweep.deltas must be positive and strictly ascending, got {list(d)}")

    def phys(self):
        return make_params(self.params.beta, self.params.c, self.params.omega)

    def make_grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.grid.n, self.grid.length, self.grid.center)

    def profile(self) -> SolitonProfile:
        try:
            return ground_state_profile(self.phys(), self.params.theta, self.make_grid())
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def evolve_config(self, t_end: float | None = None) -> EvolveConfig:
        r = self.run
        return EvolveConfig(r.dt, r.t_end if t_end is None else t_end, r.record_every, r.dealias)

    def with_overrides(self, **sections) -> "ExperimentConfig":
        """``cfg.with_overrides(perturbation={"delta": 1e-3})``."""
        new = {name: replace(getattr(self, name), **kw) for name, kw in sections.items()}
        return replace(self, **new)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTION_TYPES = {"params": ParamsSection, "grid": GridSection, "run": RunSection,
                  "perturbation": PerturbationSection, "outputs": OutputsSection,
                  "sweep": SweepSection}


def _coerce(section, key, value, default):
    where = f"{section}.{key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float))
                                              for v in value):
            raise ConfigError(f"{where} must be a list of numbers")
        return tuple(float(v) for v in value)
    raise ConfigError(f"unsupported key {where}")  # pragma: no cover


def config_from_dict(data: dict) -> ExperimentConfig:
    """Strict construction: unknown sections or keys are errors."""
    sections = {}
    for name, body in data.items():
        if name not in _SECTION_TYPES:
            raise ConfigError(f"unknown section [{name}]")
        if not isinstance(body, dict):
            raise ConfigError(f"{name} must be a section, not a value")
        cls = _SECTION_TYPES[name]
        defaults = cls()
        known = {f.name for f in fields(cls)}
        kw = {}
        for key, value in body.items():
            if key not in known:
                raise ConfigError(f"unknown key {name}.{key}")
            kw[key] = _coerce(name, key, value, getattr(defaults, key))
        sections[name] = cls(**kw)
    return ExperimentConfig(**sections)


def load_config(path) -> ExperimentConfig:
    """Read ``key = value`` lines with dotted sections (TOML syntax), e.g.
    ``params.beta = 1.5`` or a ``[run]`` table."""
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return config_from_dict(data)


# -- perturbations ------------------------------------------------------------

def _h1_dist(grid, a, b):
    return math.sqrt(grid.h1_norm2(a - b))


def _dilate_envelope(field_, profile, q):
    """Mass-preserving dilation ``sqrt(q) A(center + q(x - center))`` of the
    envelope ``A = e^{-icx/2} field``, carrier restored afterwards."""
    g, c = profile.grid, profile.params.c
    carrier = np.exp(0.5j * c * g.x)
    env = field_ / carrier
    y = g.center + q * (g.x - g.center)
    inside = np.abs(y - g.center) < 0.5 * g.length
    out = np.zeros(g.n, dtype=complex)
    out[inside] = math.sqrt(q) * g.interpolate(env, y[inside])
    return out * carrier


def _renormalize(grid, f, R):
    m = grid.norm2(f)
    return f * math.sqrt(grid.norm2(R) / m) if m > 0 else f


def _noise(grid, rng):
    modes = np.abs(grid.k) <= NOISE_MODES * 2 * np.pi / grid.length
    coef = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * modes
    return np.fft.ifft(coef)


def perturb(state: LsiState, profile: SolitonProfile, spec: PerturbationSection):
    """Perturbed copy of ``state`` and the distances it moved.

    ``amplitude`` scales the short waves by ``1 + delta``; with
    ``preserve_mass`` that would be undone by the renormalization, so the
    amplitude change is realized as the mass-preserving dilation with
    ``sqrt(q) = 1 + delta``.  ``preserve_ray`` projects the short-wave
    increment onto the ray ``(cos theta, sin theta)`` so both components move
    in proportion to the profile split.

    Returns
    -------
    (LsiState, dict)
        The new state and ``{"h1_phi", "h1_psi", "l2_w"}`` distances from
        the input state.
    """
    delta = spec.delta
    if not delta >= 0:
        raise ValueError(f"perturbation size must be non-negative, got {delta}")
    if spec.kind not in KINDS:
        raise ValueError(f"unknown perturbation kind {spec.kind!r}")
    g, p = profile.grid, profile.params
    phi, psi, w = state.phi.copy(), state.psi.copy(), state.w.copy()
    if delta > 0:
        if spec.kind == "amplitude":
            if spec.preserve_mass:
                q = (1 + delta) ** 2
                phi, psi = _dilate_envelope(phi, profile, q), _dilate_envelope(psi, profile, q)
            else:
                phi, psi = (1 + delta) * phi, (1 + delta) * psi
        elif spec.kind == "localized_bump":
            bump = delta / np.cosh(2 * (g.x - spec.offset)) * np.exp(0.5j * p.c * g.x)
            phi, psi = phi + bump, psi + bump
        elif spec.kind == "random_fourier":
            rng = np.random.default_rng(spec.seed)
            n1, n2 = _noise(g, rng), _noise(g, rng)
            scale = delta / math.sqrt(g.h1_norm2(n1) + g.h1_norm2(n2))
            phi, psi = phi + scale * n1, psi + scale * n2
        else:
            w = w + delta / np.cosh(g.x - spec.offset) ** 2
        if spec.preserve_ray:
            ct, st = math.cos(profile.theta), math.sin(profile.theta)
            d = ct * (phi - state.phi) + st * (psi - state.psi)
            phi, psi = state.phi + ct * d, state.psi + st * d
        if spec.preserve_mass and spec.kind != "w_only":
            phi = _renormalize(g, phi, profile.R1)
            psi = _renormalize(g, psi, profile.R2)
    new = state.replace(phi=phi, psi=psi, w=w)
    info = {"h1_phi": _h1_dist(g, phi, state.phi), "h1_psi": _h1_dist(g, psi, state.psi),
            "l2_w": math.sqrt(g.norm2(w - state.w))}
    return new, info


# -- runs ---------------------------------------------------------------------

def _row(state, profile, params):
    inv = invariants(state, params)
    fit = orbital_distance(state, profile)
    return {"t": state.t, "I1": inv.I1, "I2": inv.I2, "I3": inv.I3, "I4": inv.I4, "L": inv.L,
            "rho": fit.rho, "i_omega": fit.i_omega, "x0": fit.x0, "theta1": fit.theta1,
            "theta2": fit.theta2, "w_dist_shared": fit.w_dist, "w_dist_min": fit.w_dist_min,
            "scales": inv.scales, "mean_w": float(np.mean(state.w))}


def trajectory(state: LsiState, profile: SolitonProfile, cfg: ExperimentConfig,
               snapshot=None):
    """Evolve over ``run.t_end`` recording diagnostics rows.

    The run is split at ``outputs.snapshot_times`` so that ``snapshot(state)``
    sees states exactly at those times.  Returns ``(final_state, rows,
    failure)`` where ``failure`` is a :class:`BlowUpError` or ``None``; rows
    collected before a failure are kept.
    """
    params = profile.params
    snaps = {float(s) for s in cfg.outputs.snapshot_times}
    stops = sorted(snaps | {float(cfg.run.t_end)})
    rows = []

    def observe(st):
        rows.append(_row(st, profile, params))

    elapsed = 0.0
    for i, stop in enumerate(stops):
        if i and stop == elapsed:
            continue
        mark = len(rows)
        failure = None
        try:
            state, _ = evolve(state, params, cfg.evolve_config(stop - elapsed), observer=observe)
        except BlowUpError as exc:
            failure = exc
        if i and len(rows) > mark:
            del rows[mark]          # later segments re-record their starting state
        if failure is not None:
            return state, rows, failure
        elapsed = stop
        if snapshot is not None and stop in snaps:
            snapshot(state)
    return state, rows, None


@dataclass
class StabilityReport:
    delta: float
    kind: str
    seed: int
    sup_rho: float
    final_rho: float
    sup_w_dist: float
    sup_w_dist_min: float
    invariant_drifts: tuple
    L_drift: float
    mean_w_drift: float
    delta_L0: float
    initial_distance: dict
    runtime_s: float
    failure_time: float | None = None
    rows: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return (self.failure_time is None and max(self.invariant_drifts) < DRIFT_TOL
                and self.L_drift < DRIFT_TOL)

    def summary(self) -> dict:
        return {"delta": self.delta, "sup_rho": self.sup_rho, "final_rho": self.final_rho,
                "sup_w_dist": self.sup_w_dist, "delta_L0": self.delta_L0,
                "sup_w_dist_min": self.sup_w_dist_min,
                "status": "ok" if self.ok else
                ("blow-up" if self.failure_time is not None else "drift")}


def _drifts(rows):
    first = rows[0]
    sc = first["scales"]
    d = tuple(max(abs(r[k] - first[k]) for r in rows) / sc[i]
              for i, k in enumerate(("I1", "I2", "I3", "I4")))
    dL = max(abs(r["L"] - first["L"]) for r in rows) / sc[4]
    dw = max(abs(r["mean_w"] - first["mean_w"]) for r in rows)
    return d, dL, dw


def run_stability(cfg: ExperimentConfig, snapshot=None) -> StabilityReport:
    """Perturb the solitary wave per ``cfg.perturbation``, evolve, and report
    orbital distances and conservation along the run."""
    start = time.perf_counter()
    profile = cfg.profile()
    params = profile.params
    base = solitary_state(profile, 0.0)
    state, info = perturb(base, profile, cfg.perturbation)
    delta_L0 = invariants(state, params).L - invariants(base, params).L
    _, rows, failure = trajectory(state, profile, cfg, snapshot=snapshot)
    if rows:
        drifts, dL, dw = _drifts(rows)
        rho = [r["rho"] for r in rows]
        wd = [r["w_dist_shared"] for r in rows]
        wm = [r["w_dist_min"] for r in rows]
        sup_rho, final_rho, sup_w, sup_wm = max(rho), rho[-1], max(wd), max(wm)
    else:  # pragma: no cover - the initial state is always recorded
        drifts, dL, dw = (math.nan,) * 4, math.nan, math.nan
        sup_rho = final_rho = sup_w = sup_wm = math.nan
    pt = cfg.perturbation
    return StabilityReport(delta=pt.delta, kind=pt.kind, seed=pt.seed, sup_rho=sup_rho,
                           final_rho=final_rho, sup_w_dist=sup_w, sup_w_dist_min=sup_wm,
                           invariant_drifts=drifts, L_drift=dL, mean_w_drift=dw,
                           delta_L0=delta_L0, initial_distance=info,
                           runtime_s=time.perf_counter() - start,
                           failure_time=None if failure is None else failure.t, rows=rows)


def write_trajectory_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for r in rows:
            w.writerow([f"{float(r[k]):.17g}" for k in TRAJECTORY_COLUMNS])


def write_summary_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for rep in reports:
            s = rep.summary() if isinstance(rep, StabilityReport) else rep
            w.writerow([s[k] if isinstance(s[k], str) else f"{float(s[k]):.17g}"
                        for k in SUMMARY_COLUMNS])


# -- sweep --------------------------------------------------------------------

def _sweep_one(cfg, delta):
    try:
        return run_stability(cfg.with_overrides(perturbation={"delta": delta}))
    except Exception as exc:  # isolate per-run failures
        return {"delta": delta, "sup_rho": math.nan, "final_rho": math.nan,
                "sup_w_dist": math.nan, "delta_L0": math.nan, "sup_w_dist_min": math.nan,
                "status": f"error: {exc}"}


def fit_delta_L0(deltas, values) -> dict:
    """Quadratic-leading fit ``dL0 = a1 d^2 - a2 d^3`` and log-log slope."""
    d = np.asarray(deltas, float)
    v = np.asarray(values, float)
    ok = np.isfinite(v)
    d, v = d[ok], v[ok]
    out = {"a1": math.nan, "a2": math.nan, "loglog_slope": math.nan,
           "all_positive": bool(len(v) and np.all(v > 0))}
    if len(d) >= 1:
        cols = [d**2, -d**3] if len(d) >= 3 else [d**2]
        coef = np.linalg.lstsq(np.column_stack(cols), v, rcond=None)[0]
        out["a1"] = float(coef[0])
        if len(coef) > 1:
            out["a2"] = float(coef[1])
    if len(d) >= 2 and np.all(v > 0):
        out["loglog_slope"] = float(np.polyfit(np.log(d), np.log(v), 1)[0])
    return out


def run_sweep(cfg: ExperimentConfig, deltas=None, threads: int = 1):
    """Independent stability runs over ``deltas`` (default ``sweep.deltas``).

    Returns ``(reports, fit)``; a failed run appears as a summary dict with an
    ``error`` status instead of a :class:`StabilityReport`.
    """
    deltas = list(cfg.sweep.deltas if deltas is None else deltas)
    if not deltas:
        return [], fit_delta_L0([], [])
    if any(not x > 0 for x in deltas) or any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise ConfigError(f"deltas must be positive and strictly ascending, got {deltas}")
    if threads > 1 and len(deltas) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(deltas))) as pool:
            reports = list(pool.map(_sweep_one, [cfg] * len(deltas), deltas))
    else:
        reports = [_sweep_one(cfg, d) for d in deltas]
    vals = [r.delta_L0 if isinstance(r, StabilityReport) else math.nan for r in reports]
    return reports, fit_delta_L0(deltas, vals)


# -- identity check -----------------------------------------------------------

def _tangent_norm(grid, gu, gv, u, v):
    """L2 norm of the gradient with its component along ``(u, v)`` removed."""
    m = grid.norm2(u) + grid.norm2(v)
    a = (grid.integrate(gu * u) + grid.integrate(gv * v)) / m
    return math.sqrt(grid.norm2(gu - a * u) + grid.norm2(gv - a * v))


def run_check(cfg: ExperimentConfig) -> dict:
    """Profile, operator and functional identities for the configured
    parameters, as a JSON-ready dict with an overall ``ok`` flag."""
    profile = cfg.profile()
    g = profile.grid
    R1, R2 = profile.R1, profile.R2
    z = np.zeros(g.n)
    ode = residual_cs1(profile)
    A, B, C = pohozaev_terms(profile)
    kern = kernel_identities(profile)
    qcons = ((profile.rho2 * R1, z), (z, profile.rho2 * R2))
    mu = constrained_rayleigh(profile, qcons, form="q")
    pres = constrained_rayleigh(profile, ((R1, z), (z, R2)), form="p")
    a = np.concatenate(pres.minimizer)
    b = np.concatenate([profile.R1x, profile.R2x])
    cosine = float(abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    gu, gv = j_gradient(R1, R2, g)
    residuals = {"ode": list(ode), "pohozaev": list(pohozaev_residuals(profile)),
                 "kernel_identities": list(kern)}
    worst = max(abs(v) for vals in residuals.values() for v in vals)
    ok = bool(worst < CHECK_TOL and mu.mu > 0 and abs(pres.mu) < CHECK_TOL and cosine > 0.999)
    return {
        "params": asdict(cfg.params),
        "grid": asdict(cfg.grid),
        "ode_residuals": list(ode),
        "pohozaev": {"A": A, "B": B, "C": C, "residuals": list(pohozaev_residuals(profile))},
        "kernel_identities": list(kern),
        "mu_constrained": mu.mu,
        "rayleigh_p_min": pres.mu,
        "rayleigh_p_cosine": cosine,
        "J": j_functional(R1, R2, g),
        "J_homogeneous": j_functional_homogeneous(R1, R2, g),
        "J_gradient_norm": math.sqrt(g.norm2(gu) + g.norm2(gv)),
        "J_gradient_mass_tangent_norm": _tangent_norm(g, gu, gv, R1, R2),
        "max_residual": worst,
        "ok": ok,
    }
