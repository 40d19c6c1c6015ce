"""Picard iteration for the complexified Navier-Stokes system on the torus.

The velocity scheme evolves the pair (U, V) = (Re, Im) of the solution
evaluated along the imaginary shift y = alpha t:

    U = e^{t Lap} u0 + Duh[-(U.grad)U + (V.grad)V - grad Pi + F] - Duh[alpha.grad V]
    V =               Duh[-(U.grad)V - (V.grad)U - grad R  + G] + Duh[alpha.grad U]

with Duh the heat-semigroup Duhamel integral and (Pi, R) the complexified
pressure pair.  The alpha.grad terms couple U and V at the new level and are
resolved by an inner fixed point, which contracts because |alpha| is kept
below the shift bound C |alpha| t^{1/2} psi2(t) < 1/2.

The sign split (-alpha.grad V in the U equation, +alpha.grad U in the V
equation) is the Cauchy-Riemann-consistent one: per Fourier mode the coupled
linear system then has solution exp(-(|k|^2 + k.alpha) t), which is exactly
the complex shift of the heat flow.

The vorticity scheme evolves (W, Z) with stretching terms (W.grad)U etc. and
velocities recovered from Biot-Savart at every snapshot.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Grid, SpectralField, zero_field
from .operators import (
    advect,
    biot_savart,
    divergence,
    divergence_residual,
    gradient,
    heat_apply,
    leray_project,
    make_duhamel_rule,
    pressure_pair,
)
from .spaces import besov_norm, bmo_norm, linf_norm, lp_norm
from . import weights as wt

log = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e6
VELOCITY_MONITORS = ["L", "Lp", "Lpp", "Lppp", "M"]
VORTICITY_MONITORS = ["K", "Kp", "Kpp", "Kppp", "Q", "Mcal"]


class ConfigError(ValueError):
    pass


class DivergenceError(RuntimeError):
    """Raised when a monitor exceeds the blow-up guard; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class ForcingSpec:
    """Band-limited forcing pair (f, g); g defaults to zero (self-extension).

    Band-limited fields are entire, so any finite analyticity radius delta_f
    is admissible; a finite value is only used for truncation experiments.
    """

    f: SpectralField | None = None
    g: SpectralField | None = None
    delta_f: float = math.inf

    def __post_init__(self):
        if self.f is not None:
            defect = divergence_residual(self.f)
            scale = float(np.max(np.abs(self.f.coeffs))) or 1.0
            if defect > 1e-12 * scale:
                raise ConfigError(f"forcing f must be divergence-free, defect {defect:g}")

    def gamma(self) -> float:
        """Forcing level: bmo norm of f plus bmo norm of g."""
        total = 0.0
        if self.f is not None:
            total += bmo_norm(self.f, local=True)
        if self.g is not None:
            total += bmo_norm(self.g, local=True)
        return total


def snapshot_times(T: float, n: int, extra=()) -> np.ndarray:
    """t = 0 plus n-1 geometrically refined times on [T/1000, T], plus extras."""
    ts = np.concatenate([[0.0], np.geomspace(T / 1000.0, T, n - 1), np.asarray(extra, float)])
    ts = np.unique(ts)
    if ts[-1] > T + 1e-12 * T:
        raise ConfigError("probe times must lie in [0, T]")
    return ts


@dataclass
class IterationConfig:
    grid: Grid
    u0: SpectralField
    T: float
    alpha: np.ndarray | None = None
    forcing: ForcingSpec | None = None
    n_snapshots: int = 25
    max_iter: int = 40
    eps_conv: float = 1e-9
    mode: str = "velocity"
    p: float = 2.0
    C: float = 1.0
    quad_nodes: int = 32
    inner_tol: float = 1e-10
    inner_max: int = 200
    probe_times: tuple = ()
    check_pressure: bool = False
    horizon_warning: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.mode not in ("velocity", "vorticity"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "vorticity":
            if self.grid.d != 3:
                raise ConfigError("vorticity mode requires d=3")
            if not (1.0 <= self.p < 3.0):
                raise ConfigError(f"p must lie in [1, 3), got {self.p}")
        if not self.T > 0:
            raise ConfigError(f"horizon T must be positive, got {self.T}")
        if self.alpha is None:
            self.alpha = np.zeros(self.grid.d)
        self.alpha = np.asarray(self.alpha, dtype=float)
        if self.alpha.shape != (self.grid.d,):
            raise ConfigError(f"alpha must be a {self.grid.d}-vector")
        bound = wt.shift_bound(self.T, self.C)
        if np.linalg.norm(self.alpha) > bound:
            raise ConfigError(
                f"|alpha| = {np.linalg.norm(self.alpha):g} exceeds the shift bound "
                f"{bound:g} = 1/(2 C T^(1/2) psi2(T)) at T = {self.T:g}")
        if self.u0.grid != self.grid or self.u0.m != self.grid.d:
            raise ConfigError("u0 must be a d-component field on the config grid")
        data_norm = bmo_norm(self.u0, local=True)
        gamma = self.forcing.gamma() if self.forcing else 0.0
        horizon = wt.horizon_Tstar(wt.HorizonInput(bmo_norm=data_norm, gamma=gamma, C=self.C))
        if self.T > horizon.T:
            self.horizon_warning = True
            log.warning("T = %g exceeds the guaranteed horizon T* = %g; "
                        "run proceeds as an experiment", self.T, horizon.T)

    @property
    def times(self) -> np.ndarray:
        return snapshot_times(self.T, self.n_snapshots, self.probe_times)


@dataclass
class TimeSeries:
    """A field sampled on snapshot times, linearly interpolated in coefficients."""

    times: np.ndarray
    fields: list

    def stack(self) -> np.ndarray:
        return np.stack([f.coeffs for f in self.fields])

    def at(self, s: float) -> SpectralField:
        ts = self.times
        if s <= ts[0]:
            return self.fields[0]
        if s >= ts[-1]:
            return self.fields[-1]
        i = int(np.searchsorted(ts, s)) - 1
        w = (s - ts[i]) / (ts[i + 1] - ts[i])
        coeffs = (1.0 - w) * self.fields[i].coeffs + w * self.fields[i + 1].coeffs
        return SpectralField(self.fields[i].grid, coeffs,
                             self.fields[i].real and self.fields[i + 1].real)

    def sup_diff(self, other: "TimeSeries", weight_fn=None) -> float:
        """sup over positive snapshot times of weight(t) * Linf difference."""
        out = 0.0
        for t, a, b in zip(self.times, self.fields, other.fields):
            if t == 0.0:
                continue
            w = weight_fn(t) if weight_fn else 1.0
            out = max(out, w * linf_norm(a - b))
        return out


def _zero_series(grid: Grid, times: np.ndarray, m: int) -> TimeSeries:
    return TimeSeries(times, [zero_field(grid, m) for _ in times])


def _duhamel_series(source: TimeSeries, times: np.ndarray, n_nodes: int) -> TimeSeries:
    """Duhamel integral of an interpolated source, evaluated at every snapshot."""
    grid = source.fields[0].grid
    m = source.fields[0].m
    out = []
    for t in times:
        if t == 0.0:
            out.append(zero_field(grid, m))
            continue
        rule = make_duhamel_rule(float(t), kind="none", n=n_nodes)
        total = zero_field(grid, m)
        for s, w in zip(rule.nodes, rule.weights):
            total = total + w * heat_apply(source.at(float(s)), float(t) - float(s))
        out.append(total)
    return TimeSeries(times, out)


def _alpha_grad(f: SpectralField, alpha: np.ndarray) -> SpectralField:
    coeffs = np.zeros_like(f.coeffs)
    for j, a in enumerate(alpha):
        if a != 0.0:
            coeffs += a * (1j * f.grid.k_vectors[j]) * f.coeffs
    return SpectralField(f.grid, coeffs, f.real)


def _series_map(series: TimeSeries, fn) -> TimeSeries:
    return TimeSeries(series.times, [fn(f) for f in series.fields])


def _resolve_alpha_coupling(base_U: TimeSeries, base_V: TimeSeries,
                            config: IterationConfig) -> tuple:
    """Inner fixed point for U = base_U - Duh[a.grad V], V = base_V + Duh[a.grad U]."""
    alpha, times = config.alpha, base_U.times
    if not np.any(alpha):
        return base_U, base_V
    U, V = base_U, base_V
    for _ in range(config.inner_max):
        dU = _duhamel_series(_series_map(V, lambda f: _alpha_grad(f, alpha)),
                             times, config.quad_nodes)
        dV = _duhamel_series(_series_map(U, lambda f: _alpha_grad(f, alpha)),
                             times, config.quad_nodes)
        U_new = TimeSeries(times, [b - d for b, d in zip(base_U.fields, dU.fields)])
        V_new = TimeSeries(times, [b + d for b, d in zip(base_V.fields, dV.fields)])
        change = U_new.sup_diff(U) + V_new.sup_diff(V)
        scale = max(linf_norm(f) for f in U_new.fields + V_new.fields) or 1.0
        U, V = U_new, V_new
        if change <= config.inner_tol * scale:
            return U, V
    raise ConfigError("alpha-coupling fixed point failed to contract; "
                      "|alpha| too close to the shift bound")


# --- monitors -----------------------------------------------------------------


def _pair_sup(series_a: TimeSeries, series_b: TimeSeries, norm_fn, weight_fn=None) -> float:
    out = 0.0
    for t, a, b in zip(series_a.times, series_a.fields, series_b.fields):
        w = 1.0 if weight_fn is None else (weight_fn(t) if t > 0 else 0.0)
        if w == 0.0:
            continue
        out = max(out, w * (norm_fn(a) + norm_fn(b)))
    return out


def velocity_monitors(U: TimeSeries, V: TimeSeries) -> dict:
    L = _pair_sup(U, V, linf_norm, wt.phi1)
    Lp = _pair_sup(U, V, lambda f: besov_norm(f, 0.0, np.inf, np.inf, homogeneous=False))
    Lpp = _pair_sup(U, V, lambda f: bmo_norm(f, local=True))
    Lppp = _pair_sup(U, V, lambda f: besov_norm(f, 1.0, np.inf, 1.0, homogeneous=True),
                     wt.phi2)
    return dict(zip(VELOCITY_MONITORS, [L, Lp, Lpp, Lppp, max(L, Lp, Lpp, Lppp)]))


def vorticity_monitors(W: TimeSeries, Z: TimeSeries, U_rec: TimeSeries,
                       V_rec: TimeSeries, p: float) -> dict:
    K = _pair_sup(W, Z, linf_norm, wt.phi1)
    Kp = _pair_sup(W, Z, lambda f: besov_norm(f, 0.0, np.inf, np.inf, homogeneous=False))
    Kpp = _pair_sup(W, Z, lambda f: bmo_norm(f, local=True))
    Kppp = _pair_sup(W, Z, lambda f: lp_norm(f, p))
    Q = _pair_sup(U_rec, V_rec, linf_norm)
    return dict(zip(VORTICITY_MONITORS, [K, Kp, Kpp, Kppp, Q, max(K, Kp, Kpp, Kppp)]))


def recovered_velocity_ratio(W: TimeSeries, U_rec: TimeSeries, p: float) -> float:
    """max over snapshots of ||U||_inf / (||W||_inf + ||W||_p)."""
    out = 0.0
    for w_f, u_f in zip(W.fields, U_rec.fields):
        denom = linf_norm(w_f) + lp_norm(w_f, p)
        if denom > 0:
            out = max(out, linf_norm(u_f) / denom)
    return out


@dataclass
class IterationState:
    n: int
    U: TimeSeries
    V: TimeSeries
    monitors: list
    diff_norms: list
    mode: str = "velocity"
    U_recovered: TimeSeries | None = None
    V_recovered: TimeSeries | None = None
    velocity_ratios: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return self.U.times


@dataclass
class ConvergenceReport:
    converged: bool
    n_iterations: int
    final_diff: float
    diff_history: list
    contraction_ratios: list
    monitor_bound: float
    monitor_bound_ok: bool
    residual_times: list
    residuals: list
    horizon_warning: bool = False

    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


def _guard_blowup(monitors: dict, n: int):
    worst = max(monitors.values())
    if not np.isfinite(worst) or worst > BLOWUP_THRESHOLD:
        raise DivergenceError(
            f"monitor blow-up at iterate {n}: max monitor {worst:g}",
            diagnostics={"n": n, "monitors": monitors})


# --- velocity scheme ----------------------------------------------------------


def _velocity_sources(U: TimeSeries, V: TimeSeries, config: IterationConfig) -> tuple:
    """Right-hand sides (S_U, S_V) at every snapshot time."""
    f = config.forcing.f if config.forcing else None
    g = config.forcing.g if config.forcing else None
    su, sv = [], []
    for U_t, V_t in zip(U.fields, V.fields):
        Pi, R = pressure_pair(U_t, V_t)
        s_u = -1.0 * advect(U_t, U_t) + advect(V_t, V_t) - gradient(Pi)
        s_v = -1.0 * advect(U_t, V_t) - advect(V_t, U_t) - gradient(R)
        if f is not None:
            s_u = s_u + f
        if g is not None:
            s_v = s_v + g
        if config.check_pressure:
            proj = leray_project(-1.0 * advect(U_t, U_t) + advect(V_t, V_t))
            forced = s_u - f if f is not None else s_u
            gap = linf_norm(proj - forced)
            scale = max(linf_norm(proj), 1.0)
            assert gap <= 1e-8 * scale, \
                f"pressure formulation mismatch {gap:g} vs Leray projection"
        su.append(s_u)
        sv.append(s_v)
    return TimeSeries(U.times, su), TimeSeries(U.times, sv)


def init_iterate(config: IterationConfig) -> IterationState:
    """Coupled linear zeroth iterate: heat flow of the data plus forcing response."""
    if config.mode == "vorticity":
        return _init_vorticity(config)
    times = config.times
    grid = config.grid
    heat_series = TimeSeries(times, [heat_apply(config.u0, float(t)) for t in times])
    f = config.forcing.f if config.forcing else None
    g = config.forcing.g if config.forcing else None
    base_U = heat_series
    if f is not None:
        f_series = TimeSeries(times, [f for _ in times])
        duh_f = _duhamel_series(f_series, times, config.quad_nodes)
        base_U = TimeSeries(times, [h - d for h, d in zip(heat_series.fields, duh_f.fields)])
    base_V = _zero_series(grid, times, grid.d)
    if g is not None:
        g_series = TimeSeries(times, [g for _ in times])
        base_V = _duhamel_series(g_series, times, config.quad_nodes)
    U, V = _resolve_alpha_coupling(base_U, base_V, config)
    U.fields[0] = config.u0.copy()
    V.fields[0] = zero_field(grid, grid.d)
    monitors = velocity_monitors(U, V)
    _guard_blowup(monitors, 0)
    return IterationState(n=0, U=U, V=V, monitors=[monitors], diff_norms=[])


def step_iterate(state: IterationState, config: IterationConfig) -> IterationState:
    if config.mode == "vorticity":
        return _step_vorticity(state, config)
    times = state.times
    S_U, S_V = _velocity_sources(state.U, state.V, config)
    heat_series = [heat_apply(config.u0, float(t)) for t in times]
    duh_U = _duhamel_series(S_U, times, config.quad_nodes)
    duh_V = _duhamel_series(S_V, times, config.quad_nodes)
    base_U = TimeSeries(times, [h + d for h, d in zip(heat_series, duh_U.fields)])
    base_V = duh_V
    U, V = _resolve_alpha_coupling(base_U, base_V, config)
    U.fields[0] = config.u0.copy()
    V.fields[0] = zero_field(config.grid, config.grid.d)
    monitors = velocity_monitors(U, V)
    _guard_blowup(monitors, state.n + 1)
    diff = (U.sup_diff(state.U, wt.phi1) + V.sup_diff(state.V, wt.phi1))
    return IterationState(n=state.n + 1, U=U, V=V,
                          monitors=state.monitors + [monitors],
                          diff_norms=state.diff_norms + [diff])


def mild_residual(state: IterationState, config: IterationConfig, probe_times=None) -> tuple:
    """Linf defect of the mild equation at probe times, for the current iterate."""
    if probe_times is None:
        pos = state.times[state.times > 0]
        idx = np.linspace(0, len(pos) - 1, min(8, len(pos))).astype(int)
        probe_times = [float(pos[i]) for i in idx]
    successor = step_iterate(state, config)
    out = []
    for t in probe_times:
        a = state.U.at(t) - successor.U.at(t)
        b = state.V.at(t) - successor.V.at(t)
        out.append(linf_norm(a) + linf_norm(b))
    return list(probe_times), out


def run_iteration(config: IterationConfig) -> tuple:
    """Iterate to convergence in the phi1-weighted Linf metric."""
    state = init_iterate(config)
    converged = False
    for _ in range(config.max_iter):
        state = step_iterate(state, config)
        scale = max(state.monitors[-1]["M" if config.mode == "velocity" else "Mcal"], 1e-300)
        if state.diff_norms[-1] <= config.eps_conv * max(scale, 1.0):
            converged = True
            break
    diffs = state.diff_norms
    ratios = [diffs[i + 1] / diffs[i] for i in range(len(diffs) - 1) if diffs[i] > 0]
    bound = 1.0 / (2.0 * config.C * math.sqrt(config.T) * wt.weight("Psi2", config.T))
    key = "M" if config.mode == "velocity" else "Mcal"
    bound_ok = all(m[key] <= bound for m in state.monitors)
    res_times, residuals = mild_residual(state, config, list(config.probe_times) or None)
    report = ConvergenceReport(
        converged=converged,
        n_iterations=state.n,
        final_diff=diffs[-1] if diffs else 0.0,
        diff_history=diffs,
        contraction_ratios=ratios,
        monitor_bound=bound,
        monitor_bound_ok=bound_ok,
        residual_times=res_times,
        residuals=residuals,
        horizon_warning=config.horizon_warning,
    )
    if not converged:
        log.warning("iteration did not reach eps_conv = %g after %d steps "
                    "(last diff %g)", config.eps_conv, state.n, report.final_diff)
    return state, report


# --- vorticity scheme -----------------------------------------------------------


def _recover_velocities(W: TimeSeries, Z: TimeSeries) -> tuple:
    return (_series_map(W, biot_savart), _series_map(Z, biot_savart))


def _vorticity_sources(W: TimeSeries, Z: TimeSeries, U: TimeSeries, V: TimeSeries) -> tuple:
    sw, sz = [], []
    for W_t, Z_t, U_t, V_t in zip(W.fields, Z.fields, U.fields, V.fields):
        s_w = (advect(W_t, U_t) - advect(Z_t, V_t)
               - advect(U_t, W_t) + advect(V_t, Z_t))
        s_z = (advect(Z_t, U_t) + advect(W_t, V_t)
               - advect(V_t, W_t) - advect(U_t, Z_t))
        sw.append(s_w)
        sz.append(s_z)
    return TimeSeries(W.times, sw), TimeSeries(W.times, sz)


def _finish_vorticity(n, W, Z, config, prev=None):
    W.fields[0] = config.u0.copy()
    Z.fields[0] = zero_field(config.grid, 3)
    U_rec, V_rec = _recover_velocities(W, Z)
    monitors = vorticity_monitors(W, Z, U_rec, V_rec, config.p)
    _guard_blowup(monitors, n)
    ratio = recovered_velocity_ratio(W, U_rec, config.p)
    if prev is None:
        return IterationState(n=n, U=W, V=Z, monitors=[monitors], diff_norms=[],
                              mode="vorticity", U_recovered=U_rec, V_recovered=V_rec,
                              velocity_ratios=[ratio])
    diff = W.sup_diff(prev.U, wt.phi1) + Z.sup_diff(prev.V, wt.phi1)
    return IterationState(n=n, U=W, V=Z,
                          monitors=prev.monitors + [monitors],
                          diff_norms=prev.diff_norms + [diff],
                          mode="vorticity", U_recovered=U_rec, V_recovered=V_rec,
                          velocity_ratios=prev.velocity_ratios + [ratio])


def _init_vorticity(config: IterationConfig) -> IterationState:
    times = config.times
    W = TimeSeries(times, [heat_apply(config.u0, float(t)) for t in times])
    Z = _zero_series(config.grid, times, 3)
    # alpha coupling at the zeroth level, mirroring the velocity init
    W, Z = _resolve_alpha_coupling(W, Z, config)
    return _finish_vorticity(0, W, Z, config)


def _step_vorticity(state: IterationState, config: IterationConfig) -> IterationState:
    times = state.times
    S_W, S_Z = _vorticity_sources(state.U, state.V,
                                  state.U_recovered, state.V_recovered)
    heat_series = [heat_apply(config.u0, float(t)) for t in times]
    duh_W = _duhamel_series(S_W, times, config.quad_nodes)
    duh_Z = _duhamel_series(S_Z, times, config.quad_nodes)
    base_W = TimeSeries(times, [h + d for h, d in zip(heat_series, duh_W.fields)])
    base_Z = duh_Z
    W, Z = _resolve_alpha_coupling(base_W, base_Z, config)
    return _finish_vorticity(state.n + 1, W, Z, config, prev=state)


def run_vorticity(config: IterationConfig) -> tuple:
    if config.mode != "vorticity":
        raise ConfigError("run_vorticity requires mode='vorticity'")
    return run_iteration(config)
