"""Fourier multiplier operators, nonlinear terms, and singular quadrature."""

import math
import os

import numpy as np
import pytest
from scipy.integrate import quad

from oscflow.core import make_grid, transform_forward, transform_inverse
from oscflow.operators import (
    QuadratureRule,
    advect,
    biot_savart,
    curl,
    dealias,
    divergence,
    divergence_residual,
    duhamel_integrate,
    field_product,
    frac_heat_apply,
    gradient,
    heat_apply,
    leray_project,
    make_duhamel_rule,
    partial_derivative,
    pressure_pair,
)

from conftest import random_real_field


# --- semigroup ----------------------------------------------------------------


def test_heat_single_mode_oracle(grid2):
    x = grid2.x_vectors
    f = transform_forward(grid2, (np.cos(3 * x[0] + 2 * x[1]))[np.newaxis])
    g = heat_apply(f, 0.2)
    expected = math.exp(-0.2 * 13.0)
    assert np.allclose(transform_inverse(g)[0],
                       expected * transform_inverse(f)[0], atol=1e-14)


def test_heat_semigroup_law(grid2, rng):
    f = random_real_field(grid2, rng)
    a = heat_apply(heat_apply(f, 0.1), 0.25)
    b = heat_apply(f, 0.35)
    assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-12 * np.max(np.abs(f.coeffs))


def test_heat_rejects_negative_time(grid2, rng):
    with pytest.raises(ValueError):
        heat_apply(random_real_field(grid2, rng), -0.1)


def test_frac_heat_single_mode(grid2):
    x = grid2.x_vectors
    f = transform_forward(grid2, (np.cos(2 * x[0]) + 0.0 * x[1])[np.newaxis])
    g = frac_heat_apply(f, 0.1, 0.5)
    # symbol |k|^1 exp(-0.1 |k|^2) at |k| = 2
    expected = 2.0 * math.exp(-0.4)
    assert np.allclose(g.coeffs, expected * f.coeffs, atol=1e-15)


# --- differentiation ------------------------------------------------------------


def test_partial_derivative_oracle(grid2):
    x = grid2.x_vectors
    f = transform_forward(grid2, np.sin(5 * x[0] + 0.0 * x[1])[np.newaxis])
    df = partial_derivative(f, 0)
    expected = 5 * np.cos(5 * x[0] + 0.0 * x[1])
    assert np.max(np.abs(transform_inverse(df)[0] - expected)) <= 1e-11


def test_gradient_divergence_identity(grid2, rng):
    # div grad f = Laplacian f
    f = random_real_field(grid2, rng)
    lap = divergence(gradient(f))
    expected = f.coeffs * (-grid2.k_squared)
    assert np.allclose(lap.coeffs, expected, atol=1e-13)


def test_curl_of_gradient_vanishes(grid3, rng):
    f = random_real_field(grid3, rng)
    c = curl(gradient(f))
    assert np.max(np.abs(c.coeffs)) <= 1e-12 * max(np.max(np.abs(f.coeffs)), 1e-30)


# --- Leray projection -------------------------------------------------------------


def test_leray_idempotent_and_divergence_free(grid2, rng):
    u = random_real_field(grid2, rng, m=2)
    pu = leray_project(u)
    scale = np.max(np.abs(u.coeffs))
    assert divergence_residual(pu) <= 1e-12 * scale
    ppu = leray_project(pu)
    assert np.max(np.abs(ppu.coeffs - pu.coeffs)) <= 1e-12 * scale


def test_leray_annihilates_gradients(grid2, rng):
    g = gradient(random_real_field(grid2, rng))
    pg = leray_project(g)
    assert np.max(np.abs(pg.coeffs)) <= 1e-12 * np.max(np.abs(g.coeffs))


def test_leray_preserves_mean_mode(grid2):
    coeffs = np.zeros((2,) + grid2.shape, dtype=complex)
    coeffs[:, 0, 0] = [1.0, 2.0]
    from oscflow.core import SpectralField

    u = SpectralField(grid2, coeffs)
    pu = leray_project(u)
    assert pu.coeffs[0, 0, 0] == 1.0 and pu.coeffs[1, 0, 0] == 2.0


# --- products and dealiasing -------------------------------------------------------


def test_field_product_oracle():
    # cos(a x) cos(b x) = (cos((a+b)x) + cos((a-b)x)) / 2
    g = make_grid(2, 64)
    x = g.x_vectors
    a = transform_forward(g, (np.cos(3 * x[0]) + 0.0 * x[1])[np.newaxis])
    b = transform_forward(g, (np.cos(5 * x[0]) + 0.0 * x[1])[np.newaxis])
    p = field_product(a, b)
    expected = 0.5 * (np.cos(8 * x[0]) + np.cos(2 * x[0])) + 0.0 * x[1]
    assert np.max(np.abs(transform_inverse(p)[0] - expected)) <= 1e-12


def test_dealias_kills_high_band(grid2, rng):
    f = random_real_field(grid2, rng, smooth=0.0)
    fd = dealias(f)
    n = np.fft.fftfreq(grid2.N, d=1.0 / grid2.N)
    high = (np.abs(n)[:, None] > grid2.N / 3.0) | (np.abs(n)[None, :] > grid2.N / 3.0)
    assert np.all(fd.coeffs[0][high] == 0)
    assert np.array_equal(fd.coeffs[0][~high], f.coeffs[0][~high])


def test_advect_matches_pointwise_product(grid2, rng):
    u = leray_project(random_real_field(grid2, rng, m=2))
    b = random_real_field(grid2, rng, m=2)
    adv = advect(u, b)
    # reference: dealias inputs, differentiate, multiply on the grid
    ud = dealias(u)
    ref = np.zeros((2,) + grid2.shape)
    for j in range(2):
        dj = dealias(partial_derivative(b, j))
        ref += transform_inverse(ud)[j] * transform_inverse(dj)
    ref_c = transform_forward(grid2, ref)
    assert np.max(np.abs(dealias(ref_c).coeffs - adv.coeffs)) <= 1e-13


def test_pressure_pair_matches_leray_residual(grid2, rng):
    # for real data (V = 0): -(u.grad)u - grad Pi equals P[-(u.grad)u]
    from oscflow.core import zero_field

    u = leray_project(random_real_field(grid2, rng, m=2))
    V = zero_field(grid2, 2)
    Pi, R = pressure_pair(u, V)
    assert np.max(np.abs(R.coeffs)) <= 1e-15
    nl = -1.0 * advect(u, u)
    lhs = nl - gradient(Pi)
    rhs = leray_project(nl)
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-12 * np.max(np.abs(nl.coeffs))


# --- Biot-Savart ---------------------------------------------------------------


def test_biot_savart_inverts_curl(grid3, rng):
    u = leray_project(random_real_field(grid3, rng, m=3))
    u.coeffs[(slice(None),) + (0,) * 3] = 0.0  # recovery fixes the mean to zero
    w = curl(u)
    u_rec = biot_savart(w)
    # recovery is exact for mean-free divergence-free fields
    scale = np.max(np.abs(u.coeffs))
    assert np.max(np.abs(u_rec.coeffs - u.coeffs)) <= 1e-12 * scale
    assert divergence_residual(u_rec) <= 1e-12 * scale


# --- quadrature ------------------------------------------------------------------


def test_plain_rule_is_gauss_exact():
    rule = make_duhamel_rule(2.0, kind="none", n=8)
    # exact for polynomials up to degree 15
    assert rule.integrate(lambda s: s**7) == pytest.approx(2.0**8 / 8, rel=1e-14)


@pytest.mark.parametrize(
    "kind,f",
    [
        ("left", lambda s: 1.0 / math.sqrt(s) * math.cos(s)),
        ("right", lambda s: math.exp(s) / math.sqrt(0.7 - s)),
        ("both", lambda s: 1.0 / math.sqrt(s * (0.7 - s))),
    ],
)
def test_singular_rules_vs_adaptive_quadrature(kind, f):
    t = 0.7
    rule = make_duhamel_rule(t, kind=kind, n=64, panels=8)
    ref, err = quad(f, 0.0, t, points=[0.0, t], limit=200)
    assert rule.integrate(f) == pytest.approx(ref, rel=1e-8)


def test_rule_serialization_roundtrip(tmp_path):
    rule = make_duhamel_rule(0.3, kind="both", n=16, panels=4)
    path = os.path.join(tmp_path, "rule.json")
    rule.dump(path)
    back = QuadratureRule.load(path)
    assert back.kind == rule.kind and back.t == rule.t
    assert np.array_equal(back.nodes, rule.nodes)
    assert np.array_equal(back.weights, rule.weights)


def test_duhamel_integrate_constant_source_oracle(grid2):
    # source f constant in time: integral_0^t e^((t-s)L) f ds has the
    # closed per-mode form (1 - e^(-t|k|^2)) / |k|^2
    x = grid2.x_vectors
    f = transform_forward(grid2, (np.cos(3 * x[0]) + 0.0 * x[1])[np.newaxis])
    t = 0.4
    rule = make_duhamel_rule(t, kind="none", n=48)
    out = duhamel_integrate(lambda s: f, t, rule)
    factor = (1.0 - math.exp(-t * 9.0)) / 9.0
    assert np.max(np.abs(out.coeffs - factor * f.coeffs)) <= 1e-10
