"""Orlicz profiles, Luxemburg norms, and convex conjugates."""

import numpy as np
import pytest

from oscflow.core import make_grid, transform_forward, zero_field
from oscflow.spaces import (
    OrliczError,
    OrliczSpec,
    legendre_fenchel,
    lp_norm,
    make_psi_k,
    orlicz_norm,
    phi_star,
    psi_star,
)

from conftest import random_real_field


# --- profiles and their certificates -----------------------------------------


def test_builtin_profiles_pass_convexity():
    for name in ("phi_star", "psi_star"):
        assert OrliczSpec.make(name).certificate
    for k in (1.0, 2.0, 3.0):
        assert OrliczSpec.make("psi_k", k=k).certificate


def test_nonconvex_custom_profile_rejected():
    with pytest.raises(OrliczError):
        OrliczSpec.make("custom", profile=np.sqrt)


def test_psi_k_requires_k_at_least_one():
    with pytest.raises(OrliczError):
        OrliczSpec.make("psi_k", k=0.5)


def test_profile_values():
    assert phi_star(0.0) == 0.0
    assert psi_star(0.0) == 0.0
    assert phi_star(1.0) == pytest.approx(np.log(np.e + 1.0))
    assert make_psi_k(2.0)(4.0) == pytest.approx(np.e**2 - 1.0)


# --- Luxemburg norm -----------------------------------------------------------


def test_luxemburg_self_consistency(grid2, rng):
    # at the Luxemburg norm s, the defining integral equals one
    f = random_real_field(grid2, rng)
    for name in ("phi_star", "psi_star"):
        spec = OrliczSpec.make(name)
        s = orlicz_norm(f, spec)
        integral = float(
            np.sum(grid2.cell_volume * spec.profile(np.abs(f.values()) / s))
        )
        assert 0.999 <= integral <= 1.001


def test_luxemburg_power_profile_matches_lp(grid2, rng):
    # profile x^2 makes the Luxemburg norm the L^2 norm exactly
    f = random_real_field(grid2, rng)
    spec = OrliczSpec.make("custom", profile=lambda x: np.asarray(x, float) ** 2)
    assert orlicz_norm(f, spec) == pytest.approx(lp_norm(f, 2.0), rel=1e-6)


def test_luxemburg_homogeneity(grid2, rng):
    f = random_real_field(grid2, rng)
    spec = OrliczSpec.make("phi_star")
    assert orlicz_norm(f * 4.0, spec) == pytest.approx(
        4.0 * orlicz_norm(f, spec), rel=1e-6
    )


def test_luxemburg_mask_restriction(grid2, rng):
    f = random_real_field(grid2, rng)
    spec = OrliczSpec.make("phi_star")
    mask = np.zeros(grid2.shape, dtype=bool)
    mask[:16, :16] = True
    assert orlicz_norm(f, spec, mask=mask) <= orlicz_norm(f, spec) + 1e-12


def test_luxemburg_zero_field(grid2):
    assert orlicz_norm(zero_field(grid2), OrliczSpec.make("phi_star")) == 0.0


# --- convex conjugate ------------------------------------------------------------


def test_quadratic_self_duality():
    # x^2/2 is its own conjugate
    y = np.geomspace(0.1, 100.0, 25)
    conj = legendre_fenchel(lambda x: np.asarray(x, float) ** 2 / 2.0, y)
    err = np.max(np.abs(conj - y**2 / 2.0) / np.maximum(y**2 / 2.0, 1.0))
    assert err <= 1e-6


def test_llogl_conjugate_is_exponential_type():
    # the conjugate of x ln(e+x) grows like e^y/e: the ratio e^y / conjugate
    # settles between 2 and 10 once y is past the kink at y = 1
    y = np.linspace(2.0, 20.0, 20)
    conj = legendre_fenchel(phi_star, y)
    ratio = np.exp(y) / conj
    assert np.all(ratio >= 2.0) and np.all(ratio <= 10.0)
    # and tends to e
    assert ratio[-1] == pytest.approx(np.e, rel=1e-3)


def test_conjugate_young_inequality():
    # psi(y) >= x y - phi(x) for sampled pairs
    y = np.linspace(0.5, 10.0, 8)
    conj = legendre_fenchel(phi_star, y)
    xs = np.geomspace(1e-3, 1e3, 50)
    for yi, ci in zip(y, conj):
        assert np.all(ci + phi_star(xs) - xs * yi >= -1e-8 * max(ci, 1.0))
