"""Seeded test corpus standing in for "for all f" in the inequality suite.

Members are defined by grid-independent recipes (integer-mode coefficients or
pointwise profiles), so the same function can be realized at different
resolutions for stability checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Grid, SpectralField, transform_forward, zero_field
from .spaces import NormReport, norm_report

DEFAULT_SEED = 2026


@dataclass
class CorpusMember:
    name: str
    family: str
    recipe: object  # callable grid -> SpectralField
    _cache: dict = field(default_factory=dict, repr=False)

    def realize(self, grid: Grid) -> SpectralField:
        key = (grid.d, grid.N, grid.L)
        if key not in self._cache:
            self._cache[key] = self.recipe(grid)
        return self._cache[key]

    def report(self, grid: Grid, t: float = 0.0) -> NormReport:
        key = ("report", grid.d, grid.N, grid.L, t)
        if key not in self._cache:
            self._cache[key] = norm_report(self.realize(grid), t)
        return self._cache[key]


def _mode_recipe(n_vec, amplitude=1.0, phase=0.0):
    n_vec = tuple(int(n) for n in n_vec)

    def build(grid: Grid) -> SpectralField:
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        pos = tuple(n % grid.N for n in n_vec)
        neg = tuple((-n) % grid.N for n in n_vec)
        c = 0.5 * amplitude * np.exp(1j * phase)
        coeffs[pos] += c
        coeffs[neg] += np.conj(c)
        return SpectralField(grid, coeffs[np.newaxis], real=True)

    return build


def _band_recipe(kmax, seed):
    def build(grid: Grid) -> SpectralField:
        rng = np.random.default_rng(seed)
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        # draw coefficients on the integer lattice so the function is the same
        # at every resolution that contains the band
        ranges = [range(-kmax, kmax + 1)] * grid.d
        for n_vec in np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, grid.d):
            if not np.any(n_vec):
                continue
            c = (rng.standard_normal() + 1j * rng.standard_normal()) / (2 * kmax) ** grid.d
            pos = tuple(int(n) % grid.N for n in n_vec)
            coeffs[pos] += c
        f = SpectralField(grid, coeffs[np.newaxis], real=False)
        return f.enforce_reality()

    return build


def _truncated_log_recipe(center_frac, floor):
    """ln(1/r) capped at ln(1/floor): bounded on the grid, near-extremal in BMO."""

    def build(grid: Grid) -> SpectralField:
        xs = grid.x_vectors
        r2 = np.zeros(grid.shape)
        for j in range(grid.d):
            delta = xs[j] - center_frac[j] * grid.L
            delta = (delta + grid.L / 2) % grid.L - grid.L / 2  # periodic distance
            r2 = r2 + delta ** 2
        r = np.sqrt(r2)
        vals = np.log(1.0 / np.maximum(r / grid.L, floor))
        return transform_forward(grid, vals[np.newaxis])

    return build


def _bump_recipe(center_frac, radius_frac, width_frac):
    """Smoothed indicator of a ball: 0.5 (1 - tanh((r - R)/w))."""

    def build(grid: Grid) -> SpectralField:
        xs = grid.x_vectors
        r2 = np.zeros(grid.shape)
        for j in range(grid.d):
            delta = xs[j] - center_frac[j] * grid.L
            delta = (delta + grid.L / 2) % grid.L - grid.L / 2
            r2 = r2 + delta ** 2
        r = np.sqrt(r2)
        vals = 0.5 * (1.0 - np.tanh((r - radius_frac * grid.L) / (width_frac * grid.L)))
        return transform_forward(grid, vals[np.newaxis])

    return build


def _white_band_recipe(kmax, seed):
    """Flat-spectrum noise on the band |n_i| <= kmax (rough but band-limited)."""

    def build(grid: Grid) -> SpectralField:
        rng = np.random.default_rng(seed)
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        ranges = [range(-kmax, kmax + 1)] * grid.d
        for n_vec in np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, grid.d):
            if not np.any(n_vec):
                continue
            phase = rng.uniform(0, 2 * np.pi)
            pos = tuple(int(n) % grid.N for n in n_vec)
            coeffs[pos] += np.exp(1j * phase) / (2 * kmax + 1) ** (grid.d / 2)
        f = SpectralField(grid, coeffs[np.newaxis], real=False)
        return f.enforce_reality()

    return build


def build_corpus(d: int = 2, seed: int = DEFAULT_SEED, max_k: int = 16) -> list:
    """Deterministic >= 40-member corpus spanning the resolvable frequency range.

    max_k caps the frequency content so every member is resolvable (after the
    2/3 rule) on the smallest grid the corpus will be realized on.
    """
    rng = np.random.default_rng(seed)
    members = []

    # single modes across dyadic shells and directions
    shells = [k for k in (1, 2, 4, 8, 16) if k <= max_k]
    for k in shells:
        members.append(CorpusMember(f"mode-k{k}-axis", "single-mode",
                                    _mode_recipe((k,) + (0,) * (d - 1))))
        diag = (k,) * d
        members.append(CorpusMember(f"mode-k{k}-diag", "single-mode",
                                    _mode_recipe(diag, phase=float(rng.uniform(0, np.pi)))))

    # random band-limited fields
    for i, kmax in enumerate([k for k in (2, 4, 8, 16) if k <= max_k]):
        for j in range(3):
            s = int(rng.integers(0, 2 ** 31))
            members.append(CorpusMember(f"band-k{kmax}-{j}", "band-limited",
                                        _band_recipe(kmax, s)))

    # truncated-log profiles (near-extremal for BMO on the grid)
    for i in range(6):
        center = rng.uniform(0.2, 0.8, size=d)
        floor = [1e-2, 3e-3, 1e-3][i % 3]
        members.append(CorpusMember(f"trunclog-{i}", "truncated-log",
                                    _truncated_log_recipe(tuple(center), floor)))

    # smoothed indicator bumps at several radii and sharpness levels
    for i in range(8):
        center = rng.uniform(0.25, 0.75, size=d)
        radius = [0.08, 0.15, 0.25, 0.35][i % 4]
        width = [0.02, 0.05][i % 2]
        members.append(CorpusMember(f"bump-{i}", "bump",
                                    _bump_recipe(tuple(center), radius, width)))

    # white-band noise
    for i in range(8):
        s = int(rng.integers(0, 2 ** 31))
        members.append(CorpusMember(f"white-{i}", "white-band",
                                    _white_band_recipe(min(10, max_k), s)))

    if max_k >= 16:
        assert len(members) >= 40
    return members
