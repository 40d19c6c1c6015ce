"""Periodic spectral grids, Fourier-coefficient fields and complex-shifted evaluation.

Fields live on a d-dimensional torus of period L and are stored as complex
Fourier coefficients with the convention

    f(x) = sum_k  fhat(k) exp(i k.x),      fhat(k) = mean_x f(x) exp(-i k.x)

so a constant c has fhat(0) = c and cos(x1) has fhat(+-e1) = 1/2.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"OSCF"
FORMAT_VERSION = 1

# exp(-k.y) overflows double beyond this; shifted evaluations are flagged instead
SHIFT_OVERFLOW_EXPONENT = 700.0


class GridError(ValueError):
    pass


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with its wavenumber lattice.

    Wavenumbers are (2*pi/L) times the integer FFT frequencies, in numpy FFT
    ordering (non-negative frequencies first), identically on every axis.
    """

    d: int
    N: int
    L: float

    def __post_init__(self):
        if self.d not in (2, 3):
            raise GridError(f"dimension must be 2 or 3, got {self.d}")
        if not _is_power_of_two(self.N) or self.N < 8:
            raise GridError(f"N must be a power of two >= 8, got {self.N}")
        if not self.L > 0:
            raise GridError(f"period L must be positive, got {self.L}")

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def n_points(self) -> int:
        return self.N ** self.d

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def cell_volume(self) -> float:
        return (self.L / self.N) ** self.d

    @property
    def k_axis(self) -> np.ndarray:
        """1D wavenumbers along one axis, FFT ordering."""
        return 2.0 * np.pi / self.L * np.fft.fftfreq(self.N, d=1.0 / self.N)

    @property
    def k_vectors(self) -> list:
        """List of d broadcastable wavenumber arrays (sparse meshgrid)."""
        axes = np.meshgrid(*([self.k_axis] * self.d), indexing="ij", sparse=True)
        return list(axes)

    @property
    def k_squared(self) -> np.ndarray:
        ks = self.k_vectors
        out = np.zeros(self.shape)
        for ka in ks:
            out = out + ka ** 2
        return out

    @property
    def k_abs(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @property
    def x_axis(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def x_vectors(self) -> list:
        axes = np.meshgrid(*([self.x_axis] * self.d), indexing="ij", sparse=True)
        return list(axes)

    @property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: True where all integer frequencies satisfy |n_i| <= N/3."""
        n = np.fft.fftfreq(self.N, d=1.0 / self.N)
        keep_1d = np.abs(n) <= self.N / 3.0
        mask = np.ones(self.shape, dtype=bool)
        for ax in range(self.d):
            shape = [1] * self.d
            shape[ax] = self.N
            mask &= keep_1d.reshape(shape)
        return mask


def make_grid(d: int, N: int, L: float = 2.0 * np.pi) -> Grid:
    return Grid(d=int(d), N=int(N), L=float(L))


def _conj_reflect(coeffs: np.ndarray, d: int) -> np.ndarray:
    """Map coefficient array c(k) -> c(-k) over the last d (spatial) axes."""
    out = coeffs
    for ax in range(-d, 0):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


@dataclass
class SpectralField:
    """Scalar or vector field as Fourier coefficients, shape (m,) + grid.shape."""

    grid: Grid
    coeffs: np.ndarray
    real: bool = True

    def __post_init__(self):
        expected = (self.grid.N,) * self.grid.d
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.shape == expected:
            arr = arr[np.newaxis]
        if arr.ndim != self.grid.d + 1 or arr.shape[1:] != expected:
            raise GridError(
                f"coefficient shape {np.asarray(self.coeffs).shape} does not match "
                f"grid shape {expected}"
            )
        self.coeffs = arr

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def is_scalar(self) -> bool:
        return self.m == 1

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), self.real)

    def values(self) -> np.ndarray:
        """Point values on the grid; real array when the reality flag is set."""
        axes = tuple(range(1, self.grid.d + 1))
        vals = np.fft.ifftn(self.coeffs, axes=axes) * self.grid.n_points
        if self.real:
            return vals.real
        return vals

    def enforce_reality(self) -> "SpectralField":
        """Project onto conjugate-symmetric coefficients (forces Nyquist modes real)."""
        sym = 0.5 * (self.coeffs + np.conj(_conj_reflect(self.coeffs, self.grid.d)))
        return SpectralField(self.grid, sym, real=True)

    def conjugate_asymmetry(self) -> float:
        """Max deviation from u(-k) = conj(u(k)), for reality checks."""
        refl = np.conj(_conj_reflect(self.coeffs, self.grid.d))
        return float(np.max(np.abs(self.coeffs - refl)))

    def component(self, j: int) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs[j][np.newaxis], self.real)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs,
                             self.real and other.real)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs,
                             self.real and other.real)

    def __mul__(self, c) -> "SpectralField":
        c = complex(c)
        return SpectralField(self.grid, self.coeffs * c,
                             self.real and c.imag == 0.0)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs, self.real)

    def _check_compatible(self, other: "SpectralField"):
        if self.grid != other.grid or self.m != other.m:
            raise GridError("field grids or component counts do not match")


def zeros_like(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, np.zeros_like(f.coeffs), real=True)


def zero_field(grid: Grid, m: int = 1) -> SpectralField:
    return SpectralField(grid, np.zeros((m,) + grid.shape, dtype=np.complex128))


def transform_forward(grid: Grid, values: np.ndarray, real: bool | None = None) -> SpectralField:
    """Point values -> SpectralField.  Accepts (m, N, ..) or scalar (N, ..) arrays."""
    arr = np.asarray(values)
    if arr.shape == grid.shape:
        arr = arr[np.newaxis]
    if arr.ndim != grid.d + 1 or arr.shape[1:] != grid.shape:
        raise GridError(f"value shape {np.asarray(values).shape} does not match grid {grid.shape}")
    axes = tuple(range(1, grid.d + 1))
    coeffs = np.fft.fftn(arr, axes=axes) / grid.n_points
    if real is None:
        real = bool(np.isrealobj(values))
    return SpectralField(grid, coeffs, real=real)


def transform_inverse(f: SpectralField) -> np.ndarray:
    return f.values()


def evaluate_complex_shift(f: SpectralField, y) -> np.ndarray:
    """Evaluate f(x + i y) = sum_k fhat(k) exp(i k.x) exp(-k.y) on the grid.

    Returns a complex array of shape (m,) + grid.shape.  If max_k |k.y|
    exceeds the overflow guard the result is filled with +-inf instead of
    raising; callers should test np.isfinite.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (f.grid.d,):
        raise GridError(f"shift vector must have shape ({f.grid.d},), got {y.shape}")
    ks = f.grid.k_vectors
    k_dot_y = np.zeros(f.grid.shape)
    for j in range(f.grid.d):
        k_dot_y = k_dot_y + ks[j] * y[j]
    if np.max(np.abs(k_dot_y)) > SHIFT_OVERFLOW_EXPONENT:
        out = np.empty((f.m,) + f.grid.shape, dtype=np.complex128)
        out.fill(np.inf + 0j)
        return out
    shifted = SpectralField(f.grid, f.coeffs * np.exp(-k_dot_y), real=False)
    axes = tuple(range(1, f.grid.d + 1))
    return np.fft.ifftn(shifted.coeffs, axes=axes) * f.grid.n_points


def shift_field(f: SpectralField, y) -> SpectralField:
    """Coefficient-space complex shift: returns the (generally non-real) field f(.+iy)."""
    y = np.asarray(y, dtype=float)
    ks = f.grid.k_vectors
    k_dot_y = np.zeros(f.grid.shape)
    for j in range(f.grid.d):
        k_dot_y = k_dot_y + ks[j] * y[j]
    return SpectralField(f.grid, f.coeffs * np.exp(-k_dot_y), real=False)


@dataclass
class ComplexPair:
    """Real/imaginary parts of a complexified field, on a common grid."""

    re: SpectralField
    im: SpectralField

    def __post_init__(self):
        if self.re.grid != self.im.grid or self.re.m != self.im.m:
            raise GridError("ComplexPair parts must share grid and component count")

    @property
    def grid(self) -> Grid:
        return self.re.grid

    def combined_coeffs(self) -> np.ndarray:
        return self.re.coeffs + 1j * self.im.coeffs

    def combined_values(self) -> np.ndarray:
        return self.re.values() + 1j * self.im.values()


def real_imag_parts(grid: Grid, complex_coeffs: np.ndarray) -> ComplexPair:
    """Split coefficients of a complex-valued function h into the coefficient
    arrays of Re h and Im h (via h(-k) conjugation)."""
    refl = np.conj(_conj_reflect(complex_coeffs, grid.d))
    re = 0.5 * (complex_coeffs + refl)
    im = -0.5j * (complex_coeffs - refl)
    return ComplexPair(SpectralField(grid, re, real=True),
                       SpectralField(grid, im, real=True))


# --- serialization -----------------------------------------------------------

_HEADER = struct.Struct("<4sIIIII d")  # magic, version, d, N, m, flags, L  (32 bytes)


def dump_field(f: SpectralField, path: str, sidecar: bool = True) -> None:
    flags = 1 if f.real else 0
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, f.grid.d, f.grid.N, f.m, flags, f.grid.L)
    assert len(header) == 32
    payload = np.ascontiguousarray(f.coeffs).astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    if sidecar:
        meta = {
            "magic": MAGIC.decode(),
            "version": FORMAT_VERSION,
            "d": f.grid.d,
            "N": f.grid.N,
            "m": f.m,
            "real": f.real,
            "L": f.grid.L,
            "sha256": hashlib.sha256(payload).hexdigest(),
            "coefficients": [
                [float(c.real), float(c.imag)] for c in f.coeffs.ravel()
            ],
        }
        with open(str(path) + ".json", "w") as fh:
            json.dump(meta, fh)


def load_field(path: str) -> SpectralField:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, d, N, m, flags, L = _HEADER.unpack(raw[:32])
    if magic != MAGIC:
        raise GridError(f"bad magic {magic!r} in {path}")
    if version != FORMAT_VERSION:
        raise GridError(f"unsupported format version {version}")
    grid = Grid(d=d, N=N, L=L)
    coeffs = np.frombuffer(raw[32:], dtype="<c16").reshape((m,) + grid.shape)
    return SpectralField(grid, coeffs.astype(np.complex128), real=bool(flags & 1))
