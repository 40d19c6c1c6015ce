"""Littlewood-Paley decomposition and the monitored norms.

Covers dyadic-block Besov norms (homogeneous and inhomogeneous), local and
global mean-oscillation norms, Lebesgue norms, Luxemburg (Orlicz) norms and a
numerical Legendre-Fenchel transform.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Grid, SpectralField, zero_field

log = logging.getLogger(__name__)


# --- smooth dyadic multiplier -------------------------------------------------

def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x<=0, 1 for x>=1, built from exp(-1/x)."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    pos = x > 0
    g[pos] = np.exp(-1.0 / x[pos])
    gc = np.zeros_like(x)
    neg = x < 1
    gc[neg] = np.exp(-1.0 / (1.0 - x[neg]))
    with np.errstate(invalid="ignore"):
        out = np.where(pos & neg, g / (g + gc), 0.0)
    out[x >= 1] = 1.0
    return out


def radial_bump(r: np.ndarray) -> np.ndarray:
    """chi(r): 1 on r<=1, 0 on r>=2, smooth monotone transition between."""
    return _smooth_step(2.0 - np.asarray(r, dtype=float))


def _block_range(grid: Grid) -> tuple:
    k = grid.k_abs
    kmin = float(np.min(k[k > 0]))
    kmax = float(np.max(k))
    j_min = int(math.floor(math.log2(kmin)))
    j_max = int(math.ceil(math.log2(kmax)))
    return j_min, j_max


def block_multiplier(grid: Grid, j: int) -> np.ndarray:
    """Annulus multiplier phi_j(k) = chi(|k|/2^j) - chi(|k|/2^(j-1))."""
    k = grid.k_abs
    return radial_bump(k / 2.0 ** j) - radial_bump(k / 2.0 ** (j - 1))


def low_multiplier(grid: Grid, j: int) -> np.ndarray:
    """Ball multiplier chi(|k|/2^j) for the inhomogeneous low block."""
    return radial_bump(grid.k_abs / 2.0 ** j)


@dataclass
class LPDecomposition:
    """Band-passed copies of a field over dyadic annuli.

    ``blocks`` maps block index j to a SpectralField.  The inhomogeneous
    variant carries an extra low-frequency ball block under index
    ``LOW_BLOCK`` (reconstruction then includes the mean mode; the
    homogeneous variant reconstructs f minus its mean).
    """

    field_ref: SpectralField
    homogeneous: bool
    j_min: int
    j_max: int
    blocks: dict = field(default_factory=dict)

    LOW_BLOCK = "low"

    def reconstruct(self) -> SpectralField:
        total = zero_field(self.field_ref.grid, self.field_ref.m)
        for blk in self.blocks.values():
            total = total + blk
        return total


def lp_decompose(f: SpectralField, homogeneous: bool = True) -> LPDecomposition:
    grid = f.grid
    j_min, j_max = _block_range(grid)
    dec = LPDecomposition(field_ref=f, homogeneous=homogeneous, j_min=j_min, j_max=j_max)
    if homogeneous:
        for j in range(j_min, j_max + 1):
            dec.blocks[j] = SpectralField(grid, f.coeffs * block_multiplier(grid, j), f.real)
    else:
        dec.blocks[LPDecomposition.LOW_BLOCK] = SpectralField(
            grid, f.coeffs * low_multiplier(grid, j_min), f.real)
        for j in range(j_min + 1, j_max + 1):
            dec.blocks[j] = SpectralField(grid, f.coeffs * block_multiplier(grid, j), f.real)
    return dec


# --- Lebesgue norms -----------------------------------------------------------

def lp_norm(f: SpectralField, p: float) -> float:
    """Grid-quadrature L^p norm; p = inf gives the max over grid points."""
    if p == np.inf:
        return linf_norm(f)
    if not p >= 1:
        raise ValueError(f"p must be in [1, inf], got {p}")
    vals = np.abs(f.values())
    if f.m > 1:
        vals = np.sqrt(np.sum(vals.astype(float) ** 2, axis=0, keepdims=True))
    return float((np.sum(vals ** p) * f.grid.cell_volume) ** (1.0 / p))


def linf_norm(f: SpectralField) -> float:
    vals = np.abs(f.values())
    if f.m > 1:
        vals = np.sqrt(np.sum(vals.astype(float) ** 2, axis=0))
    return float(np.max(vals))


# --- Besov norms ----------------------------------------------------------------

def _project_out_mean(f: SpectralField) -> SpectralField:
    c = f.coeffs.copy()
    c[(slice(None),) + (0,) * f.grid.d] = 0.0
    return SpectralField(f.grid, c, f.real)


def besov_norm(f: SpectralField, s: float, p: float, q: float,
               homogeneous: bool = True) -> float:
    """Dyadic-block norm ( sum_j (2^(js) ||phi_j * f||_p)^q )^(1/q).

    Homogeneous norms are computed modulo constants: the k=0 mode is
    projected out (the space is a quotient by polynomials); the exclusion
    is logged when the mean is nonzero.
    """
    if not (-2.0 <= s <= 2.0):
        raise ValueError(f"s must lie in [-2, 2], got {s}")
    if not (p >= 1 and q >= 1):
        raise ValueError("p and q must lie in [1, inf]")
    g = f
    if homogeneous:
        mean = abs(complex(f.coeffs[(0,) + (0,) * f.grid.d]))
        if mean > 0:
            log.info("homogeneous Besov norm: excluding nonzero mean mode (|mean|=%g)", mean)
        g = _project_out_mean(f)
    dec = lp_decompose(g, homogeneous=homogeneous)
    terms = []
    for key, blk in dec.blocks.items():
        w = 1.0 if key == LPDecomposition.LOW_BLOCK else 2.0 ** (key * s)
        terms.append(w * lp_norm(blk, p))
    terms = np.asarray(terms)
    if q == np.inf:
        return float(np.max(terms)) if terms.size else 0.0
    return float(np.sum(terms ** q) ** (1.0 / q))


# --- mean oscillation norms -----------------------------------------------------

def _cube_scales(grid: Grid) -> list:
    """Dyadic cube sizes in grid cells, from the full torus down to 4 cells."""
    sizes = []
    s = grid.N
    while s >= 4:
        sizes.append(s)
        s //= 2
    return sizes


def _cube_stats(vals: np.ndarray, side: int, d: int) -> tuple:
    """Per-cube mean and mean absolute oscillation for an aligned tiling,
    over 4 diagonal offsets per scale.  Returns (max |mean|, max oscillation)."""
    N = vals.shape[0]
    blocks = N // side
    offsets = sorted({0, side // 4, side // 2, 3 * side // 4})
    max_mean = 0.0
    max_osc = 0.0
    for off in offsets:
        v = vals
        if off:
            v = np.roll(vals, shift=(-off,) * d, axis=tuple(range(d)))
        if d == 2:
            r = v.reshape(blocks, side, blocks, side)
            means = r.mean(axis=(1, 3))
            osc = np.abs(r - means[:, None, :, None]).mean(axis=(1, 3))
        else:
            r = v.reshape(blocks, side, blocks, side, blocks, side)
            means = r.mean(axis=(1, 3, 5))
            osc = np.abs(r - means[:, None, :, None, :, None]).mean(axis=(1, 3, 5))
        max_mean = max(max_mean, float(np.max(np.abs(means))))
        max_osc = max(max_osc, float(np.max(osc)))
    return max_mean, max_osc


def bmo_norm(f: SpectralField, local: bool = False) -> float:
    """Mean-oscillation norm over the grid-aligned dyadic cube family.

    local=False: sup of mean oscillation over all scales (BMO).
    local=True: oscillation restricted to cubes of side <= 1 plus the sup
    of |cube mean| at the coarsest scale with side <= 1 (bmo).  Falls back
    to the finest scale when no cube side <= 1 exists on the grid.
    """
    vals = f.values()
    if f.m > 1:
        return max(bmo_norm(f.component(j), local=local) for j in range(f.m))
    v = np.asarray(vals[0], dtype=float)
    grid = f.grid
    scales = _cube_scales(grid)
    stats = {side: _cube_stats(v, side, grid.d) for side in scales}
    if not local:
        return max(osc for _, osc in stats.values())
    small = [side for side in scales if side * grid.dx <= 1.0]
    if not small:
        small = [scales[-1]]
    osc_part = max(stats[side][1] for side in small)
    mean_part = stats[small[0]][0]  # coarsest scale with side <= 1
    return max(osc_part, mean_part)


# --- Orlicz layer ---------------------------------------------------------------

def phi_star(x):
    """x ln(e + x), the L log L profile."""
    x = np.asarray(x, dtype=float)
    return x * np.log(np.e + x)


def psi_star(x):
    """e^x - 1, the exponential profile."""
    return np.expm1(np.asarray(x, dtype=float))


def make_psi_k(k: float):
    def psi_k(x):
        x = np.asarray(x, dtype=float)
        return np.expm1(x ** (1.0 / k))
    psi_k.__name__ = f"psi_{k}"
    return psi_k


class OrliczError(ValueError):
    pass


@dataclass
class OrliczSpec:
    """A convex Orlicz profile with a sampled convexity certificate.

    psi_k = exp(x^(1/k)) - 1 is convex only for x >= (k-1)^k; its certificate
    is sampled on that sub-domain.
    """

    name: str
    profile: object
    k: float = 1.0
    certificate: bool = field(init=False, default=False)

    _NAMES = ("phi_star", "psi_star", "psi_k", "custom")

    def __post_init__(self):
        if self.name not in self._NAMES:
            raise OrliczError(f"unknown profile name {self.name!r}")
        if self.name == "psi_k" and not self.k >= 1:
            raise OrliczError(f"psi_k requires k >= 1, got {self.k}")
        self.certificate = self._check_convexity()
        if not self.certificate:
            raise OrliczError(f"profile {self.name} failed the convexity certificate")

    def _check_convexity(self, tol: float = 1e-9) -> bool:
        lo = 1e-3
        if self.name == "psi_k":
            lo = max(lo, (self.k - 1.0) ** self.k)
        xs = np.geomspace(max(lo, 1e-6), 1e3, 200)
        with np.errstate(over="ignore"):
            ys = np.asarray(self.profile(xs), dtype=float)
        finite = np.isfinite(ys)
        xs, ys = xs[finite], ys[finite]  # exp-type profiles overflow at the top
        if xs.size < 10:
            return False
        if abs(float(self.profile(0.0))) > tol:
            return False
        if np.any(np.diff(ys) < -tol):
            return False
        # secant-slope monotonicity is the convexity test robust to uneven spacing
        slopes = np.diff(ys) / np.diff(xs)
        return bool(np.all(np.diff(slopes) >= -tol * np.maximum(1.0, slopes[1:])))

    @classmethod
    def make(cls, name: str, k: float = 1.0, profile=None) -> "OrliczSpec":
        if name == "phi_star":
            return cls(name, phi_star)
        if name == "psi_star":
            return cls(name, psi_star)
        if name == "psi_k":
            return cls(name, make_psi_k(k), k=k)
        if name == "custom":
            if profile is None:
                raise OrliczError("custom spec needs a profile callable")
            return cls(name, profile)
        raise OrliczError(f"unknown profile name {name!r}")


def orlicz_norm(f: SpectralField, spec: OrliczSpec, mask: np.ndarray | None = None,
                rel_tol: float = 1e-8) -> float:
    """Luxemburg norm inf{ s>0 : integral phi(|f|/s) dmu <= 1 } by bisection.

    ``mask`` restricts the measure to a subset of grid points (cube-restricted
    Lebesgue measure); None uses the whole torus.
    """
    vals = np.abs(f.values())
    if f.m > 1:
        vals = np.sqrt(np.sum(vals.astype(float) ** 2, axis=0, keepdims=True))
    v = vals.ravel()
    w = np.full(v.shape, f.grid.cell_volume)
    if mask is not None:
        v = v[np.asarray(mask, dtype=bool).ravel()]
        w = np.full(v.shape, f.grid.cell_volume)
    if v.size == 0 or np.max(v) == 0.0:
        return 0.0

    def integral(s: float) -> float:
        return float(np.sum(w * np.asarray(spec.profile(v / s), dtype=float)))

    s_hi = max(float(np.max(v)), 1e-300)
    while integral(s_hi) > 1.0:
        s_hi *= 2.0
    s_lo = s_hi
    while integral(s_lo) <= 1.0 and s_lo > 1e-300:
        s_lo /= 2.0
    for _ in range(200):
        mid = 0.5 * (s_lo + s_hi)
        if integral(mid) <= 1.0:
            s_hi = mid
        else:
            s_lo = mid
        if (s_hi - s_lo) <= rel_tol * s_hi:
            break
    return float(s_hi)


def legendre_fenchel(profile, y_grid, x_max: float = 1e9) -> np.ndarray:
    """Convex conjugate psi(y) = sup_x (x y - profile(x)) on the given y grid.

    Coarse log-spaced envelope scan followed by ternary refinement of the
    (concave in x) objective.  Where the supremum is unbounded within the scan
    window the entry is +inf.
    """
    ys = np.asarray(y_grid, dtype=float)
    xs = np.concatenate(([0.0], np.geomspace(1e-9, x_max, 400)))
    fx = np.asarray(profile(xs), dtype=float)
    out = np.empty_like(ys)
    for i, y in enumerate(ys):
        obj = xs * y - fx
        j = int(np.argmax(obj))
        if j >= len(xs) - 1:
            # still climbing at the edge of the scan window: sup is unbounded
            out[i] = np.inf
            continue
        lo = xs[max(j - 1, 0)]
        hi = xs[min(j + 1, len(xs) - 1)]
        for _ in range(200):
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if (m1 * y - float(profile(m1))) < (m2 * y - float(profile(m2))):
                lo = m1
            else:
                hi = m2
            if hi - lo <= 1e-12 * max(1.0, hi):
                break
        xstar = 0.5 * (lo + hi)
        out[i] = max(xstar * y - float(profile(xstar)), 0.0)
    return out


# --- norm reports ----------------------------------------------------------------

NORM_REPORT_COLUMNS = [
    "t", "l2", "linf", "bmo", "BMO", "besov_0_inf_inf", "besov_dot_0_inf_inf",
    "besov_dot_1_inf_1", "phi1_linf", "sqrt_t_besov_dot_1_inf_1",
]


@dataclass
class NormReport:
    """All monitored norms of one field at one time."""

    t: float
    l2: float
    linf: float
    bmo: float
    BMO: float
    besov_0_inf_inf: float
    besov_dot_0_inf_inf: float
    besov_dot_1_inf_1: float
    phi1_linf: float
    sqrt_t_besov_dot_1_inf_1: float

    def to_row(self) -> list:
        return [getattr(self, c) for c in NORM_REPORT_COLUMNS]

    def to_json(self) -> dict:
        return {c: getattr(self, c) for c in NORM_REPORT_COLUMNS}


def norm_report(f: SpectralField, t: float) -> NormReport:
    from .weights import weight  # local import to avoid a cycle
    phi1 = weight("phi1", t) if t > 0 else 0.0
    li = linf_norm(f)
    b1 = besov_norm(f, 1.0, np.inf, 1.0, homogeneous=True)
    return NormReport(
        t=t,
        l2=lp_norm(f, 2.0),
        linf=li,
        bmo=bmo_norm(f, local=True),
        BMO=bmo_norm(f, local=False),
        besov_0_inf_inf=besov_norm(f, 0.0, np.inf, np.inf, homogeneous=False),
        besov_dot_0_inf_inf=besov_norm(f, 0.0, np.inf, np.inf, homogeneous=True),
        besov_dot_1_inf_1=b1,
        phi1_linf=phi1 * li,
        sqrt_t_besov_dot_1_inf_1=math.sqrt(max(t, 0.0)) * b1,
    )
