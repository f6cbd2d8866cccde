"""Brute-force oracles for the spectral layer.

Every Fourier multiplier is re-evaluated with an explicit ``O(N^2)`` DFT
matrix, and dealiased products are compared with the exact product formed on
a twice finer grid.  Fault injection swaps in a deliberately broken operator
to confirm that the suite notices.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .. import spectral as sp
from ..spectral import GridSpec, SpectralField

TOLERANCE = 1e-11
FAULTS = ("hilbert_sign", "frac_deriv_power", "dealias_off")


@dataclass(frozen=True)
class Check:
    name: str
    error: float
    passed: bool


def dft_matrix(n: int) -> np.ndarray:
    """Forward transform with the ``1/N`` normalization, built entry by entry."""
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / n


def direct_multiplier(values: np.ndarray, symbol_fn, length: float) -> np.ndarray:
    n = values.size
    F = dft_matrix(n)
    k = np.arange(n)
    k = np.where(k < n // 2, k, k - n)  # index -N/2 sits at position N/2
    xi = 2 * np.pi * k / length
    return np.linalg.solve(F, symbol_fn(xi) * (F @ values))


def _ops(fault: str | None) -> SimpleNamespace:
    ops = SimpleNamespace(
        hilbert=sp.hilbert,
        project_neg=sp.project_neg,
        frac_deriv=sp.frac_deriv,
        derivative=sp.derivative,
        product=sp.product,
    )
    if fault is None:
        return ops
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
    if fault == "hilbert_sign":
        ops.hilbert = lambda f: -sp.hilbert(f)
        # P built from the (corrupted) H: P = (I - iH) / 2 plus the zero mode
        def proj(f):
            Hf = ops.hilbert(f)
            c = 0.5 * (f.coeffs - 1j * Hf.coeffs)
            c[0] = f.coeffs[0]
            return SpectralField.from_coeffs(f.grid, c)
        ops.project_neg = proj
    elif fault == "frac_deriv_power":
        ops.frac_deriv = lambda f, s: sp.frac_deriv(f, 2 * s)
    elif fault == "dealias_off":
        ops.product = lambda f, g, holomorphic=None: SpectralField.from_values(f.grid, f.values * g.values)
    return ops


def _err(a, b) -> float:
    """Sup-norm mismatch relative to the reference's size (floored at 1)."""
    a = a.values if isinstance(a, SpectralField) else np.asarray(a)
    b = b.values if isinstance(b, SpectralField) else np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def _band_limited(grid: GridSpec, rng: np.random.Generator, kmax: int) -> SpectralField:
    n = grid.n_points
    c = np.zeros(n, complex)
    idx = np.r_[0 : kmax + 1, n - kmax : n]
    c[idx] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
    return SpectralField.from_coeffs(grid, c)


def run_oracles(n_points: int = 32, seed: int = 0, fault: str | None = None) -> list[Check]:
    ops = _ops(fault)
    L = 2 * np.pi
    grid = GridSpec(n_points, L)
    a = grid.alpha
    rng = np.random.default_rng(seed)
    f = SpectralField.from_values(grid, rng.normal(size=n_points) + 1j * rng.normal(size=n_points))
    checks: list[tuple[str, float]] = []

    # multipliers against the direct DFT
    sgn = lambda xi: np.sign(xi)  # noqa: E731
    checks.append(("hilbert_dft", _err(ops.hilbert(f), direct_multiplier(f.values, lambda xi: -1j * sgn(xi), L))))
    checks.append(("project_neg_dft", _err(ops.project_neg(f), direct_multiplier(f.values, lambda xi: (xi <= 0) * 1.0, L))))
    for s in (0.5, 1.0, 1.5, 2.0):
        checks.append(
            (f"frac_deriv_{s:g}_dft", _err(ops.frac_deriv(f, s), direct_multiplier(f.values, lambda xi: np.abs(xi) ** s, L)))
        )
    checks.append(("derivative_dft", _err(ops.derivative(f), direct_multiplier(f.values, lambda xi: 1j * xi, L))))

    # two-mode symbolic checks
    e = lambda m: SpectralField.from_values(grid, np.exp(1j * m * a))  # noqa: E731
    cos = SpectralField.from_values(grid, np.cos(a))
    checks.append(("P_exp_minus", _err(ops.project_neg(e(-1)), e(-1))))
    checks.append(("P_exp_plus", _err(ops.project_neg(e(1)), np.zeros(n_points))))
    checks.append(("P_cos", _err(ops.project_neg(cos), 0.5 * e(-1).values)))
    for m in (1, 3):
        checks.append((f"H_cos{m}", _err(ops.hilbert(SpectralField.from_values(grid, np.cos(m * a))), np.sin(m * a))))
    checks.append(("absD_half_exp", _err(ops.frac_deriv(e(-4), 0.5), 2.0 * e(-4).values)))
    checks.append(("P_plus_Pbar", _err(ops.project_neg(f).coeffs + sp.project_pos(f).coeffs, f.coeffs)))
    g = SpectralField.from_coeffs(grid, f.coeffs - f.coeffs[0])
    checks.append(("HH_minus_identity", _err(ops.hilbert(ops.hilbert(g)), -g.values)))
    checks.append(
        ("frac_deriv_semigroup", _err(ops.frac_deriv(ops.frac_deriv(f, 0.5), 0.75), ops.frac_deriv(f, 1.25)))
    )

    # dealiased product against the exact product on a 2x finer grid
    kmax = int(np.floor(grid.dealias_fraction * n_points / 2))
    u, w = _band_limited(grid, rng, kmax), _band_limited(grid, rng, kmax)
    fine = GridSpec(2 * n_points, L)
    Ff = dft_matrix(2 * n_points)
    up = lambda h: _upsample(h, fine, Ff)  # noqa: E731
    exact = Ff @ (up(u) * up(w))
    k2 = np.arange(2 * n_points)
    k2 = np.where(k2 < n_points, k2, k2 - 2 * n_points)
    keep = np.abs(k2) <= grid.dealias_fraction * n_points / 2 * (1 + 1e-12)
    ref = np.zeros(n_points, complex)
    ref[k2[keep] % n_points] = exact[keep]
    got = ops.product(u, w)
    checks.append(("dealiased_product_fine_grid", _err(got, grid.to_values(ref))))

    return [Check(name, err, bool(err <= TOLERANCE)) for name, err in checks]


def _upsample(h: SpectralField, fine: GridSpec, Ff: np.ndarray) -> np.ndarray:
    """Values on ``fine`` of the trigonometric interpolant of ``h`` (direct synthesis)."""
    n = h.grid.n_points
    k = np.arange(n)
    k = np.where(k < n // 2, k, k - n)
    c = np.zeros(fine.n_points, complex)
    c[k % fine.n_points] = h.coeffs
    return np.linalg.solve(Ff, c)


def cmd_oracle(n_points: int = 32, seed: int = 0, fault: str | None = None) -> dict:
    t0 = time.perf_counter()
    checks = run_oracles(n_points, seed, fault)
    elapsed = time.perf_counter() - t0
    return {
        "n_points": n_points,
        "tolerance": TOLERANCE,
        "fault": fault,
        "runtime_s": elapsed,
        "passed": all(c.passed for c in checks),
        "checks": [{"name": c.name, "error": c.error, "passed": c.passed} for c in checks],
    }
