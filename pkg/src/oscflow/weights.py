"""Scalar time weights, the shift-vector bound and the existence horizons.

phi1(t) = 1/ln(e + 1/t)                     phi2(t) = sqrt(t)
psi1(t) = t^-1    int_0^t ln(e + 1/(t-s)) ds
psi2(t) = t^-1/2  int_0^t (t-s)^-1/2 ln(e + 1/(t-s)) ds
psi3    = phi1 psi1
psi4(t) = t^-1/2 phi1(t) int_0^t (t-s)^-1/2 phi1(s)^-2 ds
psi5(t) = int_0^t s^-1/2 (t-s)^-1/2 phi1(s)^-1 ds

Psi1 = max{1, psi1, psi3},  Psi2 = max{psi2, psi4, psi5, phi1 psi2, psi4/phi1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import make_duhamel_rule

WEIGHT_NAMES = ["phi1", "phi2", "psi1", "psi2", "psi3", "psi4", "psi5", "Psi1", "Psi2"]

# geometric panel count for the singular quadratures; the square-root
# substitution leaves a log factor that graded panels resolve to ~1e-12
_PANELS = 14


def _logk(r):
    return np.log(np.e + 1.0 / np.asarray(r, dtype=float))


def phi1(t: float) -> float:
    return 1.0 / math.log(math.e + 1.0 / t)


def phi2(t: float) -> float:
    return math.sqrt(t)


def _psi1(t: float, n: int) -> float:
    # integrand ln(e+1/r) has only a mild log singularity at r=0
    rule = make_duhamel_rule(t, kind="left", n=n, panels=_PANELS)
    return rule.integrate(lambda r: float(_logk(r))) / t


def _psi2(t: float, n: int) -> float:
    rule = make_duhamel_rule(t, kind="left", n=n, panels=_PANELS)
    return rule.integrate(lambda r: r ** -0.5 * float(_logk(r))) / math.sqrt(t)


def _psi4(t: float, n: int) -> float:
    rule = make_duhamel_rule(t, kind="both", n=n, panels=_PANELS)
    val = rule.integrate(lambda s: (t - s) ** -0.5 * phi1(s) ** -2)
    return phi1(t) * val / math.sqrt(t)


def _psi5(t: float, n: int) -> float:
    rule = make_duhamel_rule(t, kind="both", n=n, panels=_PANELS)
    return rule.integrate(lambda s: s ** -0.5 * (t - s) ** -0.5 / phi1(s))


def weight(name: str, t: float, n: int = 64) -> float:
    """Evaluate one named weight at time t > 0."""
    if not t > 0:
        raise ValueError(f"weights require t > 0, got {t}")
    if name == "phi1":
        return phi1(t)
    if name == "phi2":
        return phi2(t)
    if name == "psi1":
        return _psi1(t, n)
    if name == "psi2":
        return _psi2(t, n)
    if name == "psi3":
        return phi1(t) * _psi1(t, n)
    if name == "psi4":
        return _psi4(t, n)
    if name == "psi5":
        return _psi5(t, n)
    if name == "Psi1":
        p1 = _psi1(t, n)
        return max(1.0, p1, phi1(t) * p1)
    if name == "Psi2":
        p2, p4 = _psi2(t, n), _psi4(t, n)
        return max(p2, p4, _psi5(t, n), phi1(t) * p2, p4 / phi1(t))
    raise ValueError(f"unknown weight name {name!r}")


def psi1_omega(t: float, n: int = 64) -> float:
    """t^-1 int_0^t phi1(t-s)^-1 (phi1(s)^-1 + phi1(s)^-2) ds (vorticity, p > 1)."""
    rule = make_duhamel_rule(t, kind="both", n=n, panels=_PANELS)
    val = rule.integrate(lambda s: (1.0 / phi1(t - s)) * (1.0 / phi1(s) + phi1(s) ** -2))
    return val / t


def psi2_omega(t: float, n: int = 64) -> float:
    """t^-1/2 int_0^t (t-s)^-1/2 phi1(s)^-1 ds (vorticity, p = 1)."""
    rule = make_duhamel_rule(t, kind="both", n=n, panels=_PANELS)
    return rule.integrate(lambda s: (t - s) ** -0.5 / phi1(s)) / math.sqrt(t)


def Phi1_envelope(r: float) -> float:
    """Concrete logarithmic-growth envelope max{1, ln(e + r)}."""
    return max(1.0, math.log(math.e + r))


def Phi2_envelope(t: float, n: int = 64) -> float:
    """min{1, 1/psi2(t)}, the analyticity-domain shrink factor."""
    return min(1.0, 1.0 / _psi2(t, n))


# --- tabulation -----------------------------------------------------------------


@dataclass
class WeightTable:
    """Weights precomputed on a geometric time grid, with linear-in-log-t lookup."""

    t_grid: np.ndarray
    columns: dict
    quadrature_nodes: int = 64

    @classmethod
    def build(cls, t_min: float = 1e-6, t_max: float = 10.0, n_points: int = 200,
              quadrature_nodes: int = 64) -> "WeightTable":
        ts = np.geomspace(t_min, t_max, n_points)
        cols = {name: np.array([weight(name, float(t), quadrature_nodes) for t in ts])
                for name in WEIGHT_NAMES}
        return cls(t_grid=ts, columns=cols, quadrature_nodes=quadrature_nodes)

    def lookup(self, name: str, t: float) -> float:
        ts = self.t_grid
        if not (ts[0] <= t <= ts[-1]):
            return weight(name, t, self.quadrature_nodes)
        return float(np.interp(math.log(t), np.log(ts), self.columns[name]))

    def to_csv(self) -> str:
        header = ",".join(["t"] + WEIGHT_NAMES)
        lines = [header]
        for i, t in enumerate(self.t_grid):
            row = [f"{t:.17g}"] + [f"{self.columns[nm][i]:.17g}" for nm in WEIGHT_NAMES]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


# --- shift bound and horizons ------------------------------------------------------


def shift_bound(T: float, C: float, n: int = 64) -> float:
    """Largest |alpha| with C |alpha| t^(1/2) psi2(t) < 1/2 for all t < T.

    t^(1/2) psi2(t) = int_0^t r^(-1/2) ln(e+1/r) dr is increasing, so the sup
    over (0, T) sits at T.
    """
    sup = math.sqrt(T) * _psi2(T, n)
    return 1.0 / (2.0 * C * sup)


@dataclass
class HorizonResult:
    T: float
    saturated: bool
    closed_form_T: float
    lhs_at_T: float
    rhs_at_T: float


@dataclass
class HorizonInput:
    """Data norms and forcing level entering the horizon formulas."""

    bmo_norm: float
    gamma: float = 0.0
    C: float = 1.0
    lp_norm: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        if self.bmo_norm < 0 or self.lp_norm < 0:
            raise ValueError("norms must be nonnegative")
        if not self.C > 0:
            raise ValueError("C must be positive")


_T_LO, _T_HI, _BISECT_ITERS = 1e-8, 1e3, 200


def _largest_root(excess) -> tuple:
    """Largest T in [T_LO, T_HI] with excess(T) <= 0 (excess increasing)."""
    if excess(_T_HI) <= 0.0:
        return _T_HI, True
    if excess(_T_LO) > 0.0:
        return _T_LO, False
    lo, hi = _T_LO, _T_HI
    for _ in range(_BISECT_ITERS):
        mid = math.sqrt(lo * hi)
        if excess(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-12:
            break
    return lo, False


def horizon_Tstar(inp: HorizonInput, n: int = 64) -> HorizonResult:
    """Existence horizon from T^(1/2) Psi2(T) <= 1 / (C (||u0|| + T Psi1(T) Gamma)).

    The left side increases and the right side decreases in T, so the largest
    admissible T is found by bisection; the closed min-form with the
    logarithmic envelope is reported alongside.
    """
    u0, g, C = inp.bmo_norm, inp.gamma, inp.C

    def lhs(T):
        return math.sqrt(T) * weight("Psi2", T, n)

    def rhs(T):
        return 1.0 / (C * (u0 + T * weight("Psi1", T, n) * g))

    def excess(T):
        return lhs(T) * C * (u0 + T * weight("Psi1", T, n) * g) - 1.0

    T, saturated = _largest_root(excess)
    closed = min(
        1.0 / (C * u0 ** 2 * Phi1_envelope(u0)) if u0 > 0 else _T_HI,
        u0 * Phi1_envelope(u0) / (C * Phi1_envelope(g)) if u0 > 0 else _T_HI,
    )
    return HorizonResult(T=T, saturated=saturated, closed_form_T=closed,
                         lhs_at_T=lhs(T), rhs_at_T=rhs(T))


def horizon_Tomega(inp: HorizonInput, n: int = 64) -> HorizonResult:
    """Vorticity horizon; p > 1 uses T Psi1_omega(T), p = 1 uses T^(1/2) Psi2_omega(T)."""
    if not (1.0 <= inp.p < 3.0):
        raise ValueError(f"p must lie in [1, 3), got {inp.p}")
    D, g, C = inp.bmo_norm + inp.lp_norm, inp.gamma, inp.C
    if inp.p > 1.0:
        def lhs(T):
            return T * psi1_omega(T, n)
    else:
        def lhs(T):
            return math.sqrt(T) * psi2_omega(T, n)

    def rhs(T):
        return 1.0 / (C * (D + T * psi1_omega(T, n) * g))

    def excess(T):
        return lhs(T) / rhs(T) - 1.0

    T, saturated = _largest_root(excess)
    Phi = Phi1_envelope(D)
    if inp.p > 1.0:
        closed = min(1.0 / (C * D * Phi) if D > 0 else _T_HI,
                     D * Phi / (C * Phi1_envelope(g)) if D > 0 else _T_HI)
    else:
        closed = min(1.0 / (C * D ** 2 * Phi ** 2) if D > 0 else _T_HI,
                     D ** 2 * Phi ** 2 / (C * Phi1_envelope(g)) if D > 0 else _T_HI)
    return HorizonResult(T=T, saturated=saturated, closed_form_T=closed,
                         lhs_at_T=lhs(T), rhs_at_T=rhs(T))
