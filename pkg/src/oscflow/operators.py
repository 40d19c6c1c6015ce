"""Fourier-multiplier operators and the Duhamel integrator.

Heat semigroup and fractional powers, gradient/divergence/curl, Leray
projection, the complexified pressure pair, the dealiased advection term,
the 3D Biot-Savart recovery and singular-endpoint quadrature rules for
Duhamel integrals.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .core import Grid, SpectralField, zero_field

log = logging.getLogger(__name__)


@dataclass
class MultiplierOp:
    """A scalar Fourier multiplier with a description tag."""

    grid: Grid
    symbol: np.ndarray
    tag: str = ""

    def __post_init__(self):
        if not np.all(np.isfinite(self.symbol)):
            raise ValueError(f"multiplier {self.tag!r} has non-finite symbol entries")

    def apply(self, f: SpectralField) -> SpectralField:
        return SpectralField(f.grid, f.coeffs * self.symbol, f.real)


# --- semigroup ---------------------------------------------------------------

def heat_apply(f: SpectralField, t: float) -> SpectralField:
    """e^(t Laplacian) f; multiplies coefficients by exp(-t|k|^2)."""
    if t < 0:
        raise ValueError(f"heat semigroup needs t >= 0, got {t}")
    if t == 0:
        return f.copy()
    return SpectralField(f.grid, f.coeffs * np.exp(-t * f.grid.k_squared), f.real)


def frac_heat_apply(f: SpectralField, t: float, alpha: float) -> SpectralField:
    """(-Laplacian)^alpha e^(t Laplacian) f, symbol |k|^(2 alpha) exp(-t|k|^2)."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not t > 0:
        raise ValueError("t must be positive (symbol unbounded at t=0)")
    k2 = f.grid.k_squared
    return SpectralField(f.grid, f.coeffs * k2 ** alpha * np.exp(-t * k2), f.real)


# --- differential operators ----------------------------------------------------

def partial_derivative(f: SpectralField, axis: int, order: int = 1) -> SpectralField:
    k = f.grid.k_vectors[axis]
    return SpectralField(f.grid, f.coeffs * (1j * k) ** order, f.real)


def gradient(f: SpectralField) -> SpectralField:
    """Gradient of a scalar field, returned as a d-component vector field."""
    if f.m != 1:
        raise ValueError("gradient expects a scalar field")
    grid = f.grid
    comps = [f.coeffs[0] * (1j * grid.k_vectors[j]) for j in range(grid.d)]
    return SpectralField(grid, np.stack(comps), f.real)


def divergence(u: SpectralField) -> SpectralField:
    if u.m != u.grid.d:
        raise ValueError("divergence expects a d-component vector field")
    grid = u.grid
    out = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.d):
        out += u.coeffs[j] * (1j * grid.k_vectors[j])
    return SpectralField(grid, out[np.newaxis], u.real)


def curl(u: SpectralField) -> SpectralField:
    """3D curl of a 3-component vector field."""
    if u.grid.d != 3 or u.m != 3:
        raise ValueError("curl requires a 3-component field on a 3D grid")
    k = u.grid.k_vectors
    c = u.coeffs
    out = np.stack([
        1j * (k[1] * c[2] - k[2] * c[1]),
        1j * (k[2] * c[0] - k[0] * c[2]),
        1j * (k[0] * c[1] - k[1] * c[0]),
    ])
    return SpectralField(u.grid, out, u.real)


def divergence_residual(u: SpectralField) -> float:
    """max_k |k . uhat(k)|, the spectral divergence-free defect."""
    grid = u.grid
    out = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.d):
        out += u.coeffs[j] * grid.k_vectors[j]
    return float(np.max(np.abs(out)))


# --- projections and pressure ---------------------------------------------------

def leray_project(u: SpectralField) -> SpectralField:
    """P u with symbol delta_jl - k_j k_l / |k|^2; the k=0 mode passes through."""
    grid = u.grid
    if u.m != grid.d:
        raise ValueError("Leray projection expects a d-component vector field")
    k2 = grid.k_squared.copy()
    zero = (0,) * grid.d
    k2[zero] = 1.0  # mean mode passes through unchanged
    ks = grid.k_vectors
    k_dot_u = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.d):
        k_dot_u += ks[j] * u.coeffs[j]
    k_dot_u[zero] = 0.0
    out = np.stack([u.coeffs[j] - ks[j] * k_dot_u / k2 for j in range(grid.d)])
    return SpectralField(grid, out, u.real)


def dealias(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * f.grid.dealias_mask, f.real)


def field_product(a: SpectralField, b: SpectralField) -> SpectralField:
    """Pseudo-spectral pointwise product of scalar fields with 2/3-rule dealiasing."""
    grid = a.grid
    axes = tuple(range(1, grid.d + 1))
    av = np.fft.ifftn(a.coeffs * grid.dealias_mask, axes=axes) * grid.n_points
    bv = np.fft.ifftn(b.coeffs * grid.dealias_mask, axes=axes) * grid.n_points
    prod = av * bv
    coeffs = np.fft.fftn(prod, axes=axes) / grid.n_points
    return SpectralField(grid, coeffs * grid.dealias_mask, a.real and b.real)


def outer_product_tensor(a: SpectralField, b: SpectralField) -> np.ndarray:
    """Dealiased coefficients of a_j b_k, shape (d, d) + grid.shape."""
    grid = a.grid
    axes = tuple(range(1, grid.d + 1))
    mask = grid.dealias_mask
    av = np.fft.ifftn(a.coeffs * mask, axes=axes) * grid.n_points
    bv = np.fft.ifftn(b.coeffs * mask, axes=axes) * grid.n_points
    d = grid.d
    out = np.empty((d, d) + grid.shape, dtype=np.complex128)
    for j in range(d):
        for l in range(d):
            out[j, l] = np.fft.fftn(av[j] * bv[l], axes=tuple(range(grid.d))) / grid.n_points
            out[j, l] *= mask
    return out


def pressure_pair(U: SpectralField, V: SpectralField) -> tuple:
    """Complexified pressure pair.

    Pi = -inv(Laplacian) d_j d_k (U_j U_k - V_j V_k)
    R  = -2 inv(Laplacian) d_j d_k (U_j V_k)

    Products are dealiased; the k=0 modes of Pi and R are set to zero.
    """
    grid = U.grid
    ks = grid.k_vectors
    k2 = grid.k_squared.copy()
    zero = (0,) * grid.d
    k2[zero] = 1.0
    UU = outer_product_tensor(U, U)
    VV = outer_product_tensor(V, V)
    UV = outer_product_tensor(U, V)
    num_pi = np.zeros(grid.shape, dtype=np.complex128)
    num_r = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.d):
        for l in range(grid.d):
            kk = ks[j] * ks[l]
            num_pi += kk * (UU[j, l] - VV[j, l])
            num_r += kk * UV[j, l]
    # Pi_hat = -(k_j k_l / |k|^2) T_jl with the stated sign conventions
    pi_hat = -num_pi / k2
    r_hat = -2.0 * num_r / k2
    pi_hat[zero] = 0.0
    r_hat[zero] = 0.0
    real = U.real and V.real
    return (SpectralField(grid, pi_hat[np.newaxis], real),
            SpectralField(grid, r_hat[np.newaxis], real))


def advect(a: SpectralField, b: SpectralField, warn_tol: float = 1e-8) -> SpectralField:
    """(a . grad) b, pseudo-spectral with 2/3-rule dealiasing."""
    grid = a.grid
    if a.m != grid.d or b.m != grid.d:
        raise ValueError("advect expects d-component vector fields")
    div_defect = divergence_residual(a)
    scale = float(np.max(np.abs(a.coeffs))) or 1.0
    if div_defect > warn_tol * scale:
        log.warning("advect: advecting field has divergence defect %g", div_defect)
    axes = tuple(range(1, grid.d + 1))
    mask = grid.dealias_mask
    av = np.fft.ifftn(a.coeffs * mask, axes=axes) * grid.n_points
    out = np.zeros((grid.d,) + grid.shape, dtype=np.complex128)
    for j in range(grid.d):
        db_j = b.coeffs * (1j * grid.k_vectors[j]) * mask
        dbv = np.fft.ifftn(db_j, axes=axes) * grid.n_points
        out += av[j] * dbv
    coeffs = np.fft.fftn(out, axes=axes) / grid.n_points
    return SpectralField(grid, coeffs * mask, a.real and b.real)


def biot_savart(W: SpectralField) -> SpectralField:
    """Velocity from vorticity on a 3D grid: uhat = i k x What / |k|^2, zero mean."""
    grid = W.grid
    if grid.d != 3 or W.m != 3:
        raise ValueError("biot_savart requires a 3-component field on a 3D grid")
    k = grid.k_vectors
    k2 = grid.k_squared.copy()
    zero = (0, 0, 0)
    k2[zero] = 1.0
    c = W.coeffs
    cross = np.stack([
        k[1] * c[2] - k[2] * c[1],
        k[2] * c[0] - k[0] * c[2],
        k[0] * c[1] - k[1] * c[0],
    ])
    out = 1j * cross / k2
    out[(slice(None),) + zero] = 0.0
    return SpectralField(grid, out, W.real)


# --- Duhamel quadrature ------------------------------------------------------------

def _gauss_legendre_on(a: float, b: float, n: int) -> tuple:
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    return nodes, weights


@dataclass
class QuadratureRule:
    """Nodes and weights approximating integral_0^t g(s) ds.

    ``kind`` records which endpoint singularity the rule absorbs exactly:
    'left' (s^-1/2), 'right' ((t-s)^-1/2), 'both', or 'none'.  The
    square-root substitutions s = tau^2 / s = t - tau^2 remove those
    singularities before Gauss-Legendre is applied.
    """

    t: float
    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, g) -> float:
        return float(sum(w * g(s) for s, w in zip(self.nodes, self.weights)))

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "kind": self.kind,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "QuadratureRule":
        return cls(t=float(data["t"]), kind=str(data["kind"]),
                   nodes=np.asarray(data["nodes"], dtype=float),
                   weights=np.asarray(data["weights"], dtype=float))

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path: str) -> "QuadratureRule":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _graded_tau_panels(tau_max: float, n: int, panels: int) -> tuple:
    """GL nodes/weights on (0, tau_max], geometrically graded toward 0.

    Grading absorbs residual logarithmic singularities left over after the
    square-root substitution.
    """
    if panels <= 1:
        return _gauss_legendre_on(0.0, tau_max, n)
    edges = [tau_max * 2.0 ** (-j) for j in range(panels)] + [0.0]
    nodes, weights = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        x, w = _gauss_legendre_on(lo, hi, n)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def make_duhamel_rule(t: float, kind: str = "both", n: int = 64,
                      panels: int = 1) -> QuadratureRule:
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if kind not in ("none", "left", "right", "both"):
        raise ValueError(f"unknown rule kind {kind!r}")
    if t == 0:
        return QuadratureRule(t=0.0, kind=kind, nodes=np.empty(0), weights=np.empty(0))
    if kind == "none":
        nodes, weights = _gauss_legendre_on(0.0, t, n)
        return QuadratureRule(t=t, kind=kind, nodes=nodes, weights=weights)
    pieces = []
    if kind == "left":
        tau, w = _graded_tau_panels(np.sqrt(t), n, panels)
        pieces.append((tau ** 2, 2.0 * tau * w))
    elif kind == "right":
        tau, w = _graded_tau_panels(np.sqrt(t), n, panels)
        pieces.append((t - tau ** 2, 2.0 * tau * w))
    else:  # both: split at t/2 and substitute toward each endpoint
        tau, w = _graded_tau_panels(np.sqrt(t / 2.0), n, panels)
        pieces.append((tau ** 2, 2.0 * tau * w))
        pieces.append((t - tau ** 2, 2.0 * tau * w))
    nodes = np.concatenate([p[0] for p in pieces])
    weights = np.concatenate([p[1] for p in pieces])
    order = np.argsort(nodes)
    return QuadratureRule(t=t, kind=kind, nodes=nodes[order], weights=weights[order])


def duhamel_integrate(source, t: float, rule: QuadratureRule) -> SpectralField:
    """integral_0^t e^((t-s) Laplacian) source(s) ds by the given rule.

    ``source`` maps a time in (0, t) to a SpectralField on a fixed grid.
    """
    if t == 0:
        probe = source(0.0)
        return zero_field(probe.grid, probe.m)
    total = None
    for s, w in zip(rule.nodes, rule.weights):
        term = heat_apply(source(float(s)), t - float(s))
        total = term * w if total is None else total + term * w
    return total
