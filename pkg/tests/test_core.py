"""Grid, spectral transform, complex shift, and field-file round trips."""

import os

import numpy as np
import pytest

from oscflow.core import (
    Grid,
    GridError,
    SpectralField,
    dump_field,
    evaluate_complex_shift,
    load_field,
    make_grid,
    real_imag_parts,
    shift_field,
    transform_forward,
    transform_inverse,
    zero_field,
)

from conftest import random_real_field


# --- grid validation -------------------------------------------------------


@pytest.mark.parametrize("d", [0, 1, 4])
def test_grid_rejects_bad_dimension(d):
    with pytest.raises(GridError):
        make_grid(d, 16)


@pytest.mark.parametrize("N", [7, 12, 4, 0])
def test_grid_rejects_bad_size(N):
    with pytest.raises(GridError):
        make_grid(2, N)


def test_grid_geometry():
    g = make_grid(2, 16, L=4.0)
    assert g.dx == pytest.approx(0.25)
    assert g.cell_volume == pytest.approx(0.0625)
    assert g.x_axis[0] == 0.0 and g.x_axis[-1] == pytest.approx(4.0 - 0.25)
    # wavenumbers come in 2 pi / L units
    assert np.max(np.abs(g.k_axis)) == pytest.approx(8 * 2 * np.pi / 4.0)


# --- transform round trip and Parseval --------------------------------------


@pytest.mark.parametrize("d,N", [(2, 16), (2, 64), (3, 16)])
def test_roundtrip_and_parseval(d, N, rng):
    g = make_grid(d, N)
    vals = rng.standard_normal((d,) + g.shape)
    f = transform_forward(g, vals)
    back = transform_inverse(f)
    assert np.max(np.abs(back - vals)) <= 1e-12 * np.max(np.abs(vals))
    # Parseval: grid mean of |u|^2 (summed over components) equals sum of |coefficients|^2
    lhs = np.sum(np.abs(vals) ** 2) / g.n_points
    rhs = np.sum(np.abs(f.coeffs) ** 2)
    assert abs(lhs - rhs) <= 1e-12 * lhs


def test_single_mode_coefficient_convention():
    # f(x) = cos(3 x1) has coefficients 1/2 at k = (+-3, 0)
    g = make_grid(2, 32)
    x = g.x_vectors
    f = transform_forward(g, (np.cos(3 * x[0]) + 0.0 * x[1])[np.newaxis])
    assert f.coeffs[0, 3, 0] == pytest.approx(0.5, abs=1e-14)
    assert f.coeffs[0, -3 % 32, 0] == pytest.approx(0.5, abs=1e-14)
    other = np.abs(f.coeffs).sum() - 1.0
    assert abs(other) <= 1e-12


def test_reality_detection_and_enforcement(grid2, rng):
    f = random_real_field(grid2, rng)
    assert f.real
    g = SpectralField(grid2, f.coeffs + 1e-3j * np.ones(grid2.shape), real=False)
    assert g.conjugate_asymmetry() > 0
    h = g.enforce_reality()
    assert h.real and h.conjugate_asymmetry() <= 1e-14


def test_field_arithmetic(grid2, rng):
    f = random_real_field(grid2, rng)
    g = random_real_field(grid2, rng)
    s = f + g - f * 2.0
    expected = g.coeffs - f.coeffs
    assert np.allclose(s.coeffs, expected, atol=1e-15)
    assert np.allclose((-f).coeffs, -f.coeffs)


# --- complex shift ----------------------------------------------------------


def test_complex_shift_single_mode_oracle():
    # cos(k.x) evaluated at x + iy becomes cos(k.x)cosh(k.y) - i sin(k.x)sinh(k.y)
    g = make_grid(2, 32)
    x = g.x_vectors
    f = transform_forward(g, np.cos(2 * x[0] + x[1])[np.newaxis])
    y = np.array([0.1, 0.05])
    vals = evaluate_complex_shift(f, y)
    ky = 2 * y[0] + y[1]
    phase = 2 * x[0] + x[1]
    expected = np.cos(phase) * np.cosh(ky) - 1j * np.sin(phase) * np.sinh(ky)
    assert np.max(np.abs(vals[0] - expected)) <= 1e-12 * np.cosh(ky)


def test_complex_shift_zero_is_identity(grid2, rng):
    f = random_real_field(grid2, rng)
    vals = evaluate_complex_shift(f, np.zeros(2))
    assert np.max(np.abs(vals.imag)) <= 1e-12
    assert np.allclose(vals.real, transform_inverse(f), atol=1e-12)


def test_complex_shift_overflow_guard(grid2):
    coeffs = np.zeros(grid2.shape, dtype=complex)
    coeffs[30, 0] = 1.0
    f = SpectralField(grid2, coeffs[np.newaxis], real=False)
    vals = evaluate_complex_shift(f, np.array([50.0, 0.0]))
    assert np.all(np.isinf(vals) | np.isnan(vals))


def test_shift_field_matches_pointwise_evaluation(grid2, rng):
    f = random_real_field(grid2, rng)
    y = np.array([0.02, -0.01])
    h = shift_field(f, y)
    assert np.allclose(transform_inverse(h), evaluate_complex_shift(f, y), atol=1e-12)


def test_real_imag_parts_recombine(grid2, rng):
    f = random_real_field(grid2, rng)
    h = shift_field(f, np.array([0.03, 0.0]))
    pair = real_imag_parts(grid2, h.coeffs)
    assert np.allclose(pair.combined_coeffs(), h.coeffs, atol=1e-13)
    assert pair.re.real and pair.im.real


# --- serialization ----------------------------------------------------------


def test_field_file_roundtrip(tmp_path, grid2, rng):
    f = random_real_field(grid2, rng, m=2)
    path = os.path.join(tmp_path, "f.oscf")
    dump_field(f, path)
    g = load_field(path)
    assert g.grid == grid2 and g.m == 2 and g.real == f.real
    assert np.array_equal(g.coeffs, f.coeffs)  # bit-exact round trip
    assert os.path.exists(path + ".json")  # human-readable sidecar


def test_zero_field(grid2):
    z = zero_field(grid2, 2)
    assert z.m == 2 and np.all(z.coeffs == 0)
