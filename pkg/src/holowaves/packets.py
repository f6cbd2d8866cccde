"""Wave packets along rays ``alpha = v t``, the packet pairing ``gamma(t, v)``,
its asymptotic ODE residual and the scattering profile ``Psi(v)``.

The packet is built from

    u = v^{-3/2} chi((alpha - v t) / (t^{1/2} v^{3/2})) exp(i phi),  phi = t^2 / (4 alpha),

with ``chi`` a smooth unit-mass bump on ``(-1, 1)``; it is concentrated at
frequency ``xi_v = -1/(4 v^2)``, where the group velocity of the linear flow
is ``v``.  Testing the normal-form variables against ``(w, q)`` gives
``gamma``, which obeys

    d gamma / dt = i / (2 t (2v)^5) gamma |gamma|^2 + sigma

with a rapidly decaying remainder ``sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import quad

from .normalform import NormalFormState, to_normal_form
from .spectral import GridSpec, SpectralField
from .waterwave import DEFAULT_CHORD_ARC_FLOOR, WaterState


class DomainOverflow(ValueError):
    """The packet support does not fit in the periodic domain."""


class ProfileUnstable(RuntimeError):
    """The profile extracted at ``T`` and ``T/2`` disagree beyond the allowed band."""


# --------------------------------------------------------------------------
# bump


def _raw_bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    m = np.abs(y) < 1
    out[m] = np.exp(1.0 - 1.0 / (1.0 - y[m] ** 2))
    return out


@lru_cache(maxsize=1)
def bump_mass() -> float:
    val, _ = quad(lambda y: float(_raw_bump(y)), -1.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def bump(y, derivative: int = 0):
    """Unit-integral bump ``chi`` and its first two derivatives."""
    y = np.asarray(y, dtype=float)
    chi = _raw_bump(y) / bump_mass()
    if derivative == 0:
        return chi
    m = np.abs(y) < 1
    s = np.where(m, 1.0 - y**2, 1.0)
    h1 = np.where(m, -2.0 * y / s**2, 0.0)
    if derivative == 1:
        return chi * h1
    if derivative == 2:
        h2 = np.where(m, -2.0 / s**2 - 8.0 * y**2 / s**3, 0.0)
        return chi * (h1**2 + h2)
    raise ValueError("derivative must be 0, 1 or 2")


# --------------------------------------------------------------------------
# packets


def in_region(v: float, t: float) -> bool:
    """Ray region ``t^{-1/9} <= |v| <= t^{1/9}``, ``t >= 1``."""
    return t >= 1.0 and t ** (-1.0 / 9.0) <= abs(v) <= t ** (1.0 / 9.0)


def xi_of_v(v):
    return -1.0 / (4.0 * np.asarray(v, dtype=float) ** 2)


@dataclass(frozen=True)
class PacketFamily:
    v: float
    t: float
    u: SpectralField
    w: SpectralField
    q: SpectralField
    g: SpectralField

    @property
    def scale(self) -> float:
        return np.sqrt(self.t) * self.v**1.5


def build_packet(v: float, t: float, grid: GridSpec) -> PacketFamily:
    """Packet ``(u, w, q, g)`` on the centered torus coordinate, ``v > 0``."""
    if v <= 0 or t <= 0:
        raise ValueError("build_packet needs v > 0 and t > 0")
    s = np.sqrt(t) * v**1.5
    if v * t + s >= grid.length / 2 or v * t - s <= 0:
        raise DomainOverflow(f"packet support [{v * t - s:.4g}, {v * t + s:.4g}] outside (0, L/2)")
    a = grid.centered_alpha
    y = (a - v * t) / s
    m = np.abs(y) < 1
    a_safe = np.where(m, a, 1.0)
    chi, chi1, chi2 = (bump(y, k) for k in range(3))
    e = np.where(m, np.exp(1j * t * t / (4.0 * a_safe)), 0.0) * v**-1.5
    u = chi * e
    w = 0.5 * u + ((v * t - a_safe) / (2.0 * a_safe) * chi + 1j * (v * t + a_safe) / (2.0 * t**1.5 * v**0.5) * chi1) * e
    # (d_a - i d_t^2) u, closed form
    c = 4.0 * v**1.5 * t**2.5
    f_a = (
        v * t / (2.0 * a_safe**2) * chi
        + (a_safe - v * t) / (2.0 * a_safe) * chi1 / s
        - 1j * (2.0 * (a_safe + v * t) / c * chi1 + (a_safe + v * t) ** 2 / c * chi2 / s)
    )
    rest = (a_safe - v * t) / (2.0 * a_safe**2) * chi - 1j * (a_safe - v * t) / c * chi1
    g = v * (f_a + rest) * e
    mk = lambda x: SpectralField.from_values(grid, np.where(m, x, 0.0))  # noqa: E731
    return PacketFamily(float(v), float(t), mk(u), mk(w), mk(v * u), mk(g))


def gamma_functional(nf: NormalFormState, p: PacketFamily) -> complex:
    """``<(Wt, Qt), (w, q)>_{Hdot_0} = int Wt conj(w) + |D|^{1/2} Qt conj(|D|^{1/2} q)``."""
    g = nf.grid
    if p.u.grid != g:
        raise ValueError("packet and state live on different grids")
    return complex(
        g.length * (np.vdot(p.w.coeffs, nf.W.coeffs) + np.vdot(p.q.coeffs, g.abs_xi * nf.Q.coeffs))
    )


def gamma_simplified(nf: NormalFormState, p: PacketFamily) -> complex:
    """Leading-order form ``1/2 int (Wt + |D|^{1/2} Qt) conj(u)`` (rightward rays)."""
    g = nf.grid
    r = g.to_values(np.sqrt(g.abs_xi) * nf.Q.coeffs)
    return complex(0.5 * g.integrate((nf.W.values + r) * p.u.values.conj()))


# --------------------------------------------------------------------------
# time series


def default_v_grid(t_min: float, t_max: float, n: int = 33) -> np.ndarray:
    lo = max(t_min ** (-1.0 / 9.0), 0.3)
    hi = min(t_max ** (1.0 / 9.0), 3.0)
    return np.geomspace(lo, hi, n)


def geometric_times(t_min: float, t_max: float, ratio: float = 1.05) -> np.ndarray:
    """Sample times with ``t_{k+1} = ratio * t_k``, ending exactly at ``t_max``."""
    n = int(np.ceil(np.log(t_max / t_min) / np.log(ratio))) + 1
    return np.geomspace(t_min, t_max, n)


@dataclass(frozen=True)
class GammaSeries:
    v_grid: np.ndarray
    t_samples: np.ndarray
    gamma: np.ndarray  # [t, v], NaN outside the ray region
    sigma: np.ndarray | None = None
    psi: np.ndarray | None = None


def gamma_row(nf: NormalFormState, v_grid: Sequence[float]) -> np.ndarray:
    row = np.full(len(v_grid), np.nan + 0j)
    for j, v in enumerate(v_grid):
        if not in_region(v, nf.time):
            continue
        try:
            p = build_packet(v, nf.time, nf.grid)
        except DomainOverflow:
            continue
        row[j] = gamma_functional(nf, p)
    return row


def gamma_series(
    states: Iterable[WaterState | NormalFormState],
    v_grid: Sequence[float],
    chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR,
) -> GammaSeries:
    """Evaluate ``gamma`` on each snapshot (converted to normal form) and ray."""
    times, rows = [], []
    for s in states:
        nf = s if isinstance(s, NormalFormState) else to_normal_form(s, chord_arc_floor)
        times.append(nf.time)
        rows.append(gamma_row(nf, v_grid))
    return GammaSeries(np.asarray(v_grid, float), np.asarray(times), np.array(rows).reshape(len(times), len(v_grid)))


def ode_coefficient(v):
    """Real coefficient ``c(v) = (2v)^{-5} / 2`` in ``gamma' = i c |gamma|^2 gamma / t``."""
    return 0.5 * (2.0 * np.asarray(v, dtype=float)) ** -5


def ode_residual(gs: GammaSeries) -> GammaSeries:
    """``sigma = d gamma/dt - i c(v) gamma |gamma|^2 / t`` on interior samples.

    The derivative is a centered difference in ``ln t`` (second order on
    geometric sampling); the first and last rows of ``sigma`` are NaN.
    """
    t = gs.t_samples
    G = gs.gamma
    sigma = np.full_like(G, np.nan + 0j)
    if len(t) >= 3:
        lt = np.log(t)
        dG = (G[2:] - G[:-2]) / (lt[2:] - lt[:-2])[:, None] / t[1:-1, None]
        Gm = G[1:-1]
        sigma[1:-1] = dG - 1j * ode_coefficient(gs.v_grid)[None, :] * Gm * np.abs(Gm) ** 2 / t[1:-1, None]
    return GammaSeries(gs.v_grid, t, G, sigma, gs.psi)


def profile_at(gs: GammaSeries, index: int) -> np.ndarray:
    """``Psi = gamma(T) exp(-i c(v) |gamma(T)|^2 ln T)`` at sample ``index``."""
    T = gs.t_samples[index]
    g = gs.gamma[index]
    return g * np.exp(-1j * ode_coefficient(gs.v_grid) * np.abs(g) ** 2 * np.log(T))


def half_time_index(gs: GammaSeries) -> int:
    return int(np.argmin(np.abs(gs.t_samples - gs.t_samples[-1] / 2.0)))


def extract_profile(gs: GammaSeries, band: float = 0.05) -> GammaSeries:
    """Profile at the final sample, checked against the one at ``T/2``.

    Raises :class:`ProfileUnstable` when ``max |Psi_T - Psi_{T/2}|`` exceeds
    ``3 * band * max |Psi_T|`` over the rays where both are defined.
    """
    psi = profile_at(gs, -1)
    half = profile_at(gs, half_time_index(gs))
    ok = np.isfinite(psi) & np.isfinite(half)
    if ok.any():
        scale = np.max(np.abs(psi[ok]))
        gap = np.max(np.abs(psi[ok] - half[ok]))
        if scale > 0 and gap > 3.0 * band * scale:
            raise ProfileUnstable(f"profile drift {gap / scale:.3g} exceeds {3 * band:.3g}")
    return GammaSeries(gs.v_grid, gs.t_samples, gs.gamma, gs.sigma, psi)


def asymptotic_eval(psi: np.ndarray, v_grid: np.ndarray, t: float, grid: GridSpec):
    """Predicted ``(W, Q)`` on the rays covered by ``v_grid``:

    ``W = t^{-1/2} exp(i t^2/(4 alpha)) Psi(v) exp(i c(v) |Psi|^2 ln t)``, ``Q = 2 v W``,
    with ``v = alpha / t``; zero outside ``[min v_grid, max v_grid]``.
    """
    psi = np.nan_to_num(np.asarray(psi, complex))
    a = grid.centered_alpha
    v = a / t
    m = (v >= v_grid[0]) & (v <= v_grid[-1])
    vs = np.where(m, v, v_grid[0])
    P = np.interp(vs, v_grid, psi.real) + 1j * np.interp(vs, v_grid, psi.imag)
    phase = t * t / (4.0 * np.where(m, a, 1.0)) + ode_coefficient(vs) * np.abs(P) ** 2 * np.log(t)
    W = np.where(m, t**-0.5 * P * np.exp(1j * phase), 0.0)
    Q = 2.0 * vs * W
    return SpectralField.from_values(grid, W), SpectralField.from_values(grid, np.where(m, Q, 0.0))


def fit_slope(x, y) -> tuple[float, float]:
    """Least-squares slope of ``y`` against ``x`` and its standard error."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    if len(x) > 2:
        resid = y - A @ coef
        s2 = resid @ resid / (len(x) - 2)
        se = float(np.sqrt(s2 / np.sum((x - x.mean()) ** 2)))
    else:
        se = float("nan")
    return float(coef[0]), se
