"""Gravity water waves in holomorphic position / velocity-potential variables.

State ``(W, Q)`` with ``W = Z - alpha`` evolves by

    W_t + F (1 + W_a) = 0
    Q_t + F Q_a - i W + P[|Q_a|^2 / J] = 0,
    F = P[(Q_a - conj Q_a) / J],  J = |1 + W_a|^2,

and the differentiated variables ``(bW, R) = (W_a, Q_a / (1 + W_a))`` by the
self-contained diagonal system.  Both share the linear part
``w_t + q_a = 0, q_t - i w = 0`` which is integrated exactly; the
nonlinear remainder goes through a Lawson (integrating-factor) RK4.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .spectral import GridSpec, SpectralField

log = logging.getLogger(__name__)

DEFAULT_CHORD_ARC_FLOOR = 0.5


class ChordArcViolation(RuntimeError):
    """``|1 + W_a|`` fell below the configured floor (surface about to self-intersect)."""


class NaNDetected(FloatingPointError):
    """The state became non-finite during a step."""


class InfeasibleData(ValueError):
    """Requested data size cannot be realised within the chord-arc constraint."""


# --------------------------------------------------------------------------
# array kernels


class Kernel:
    """Coefficient-array operations for one grid.

    Every nonlinear term is formed pointwise on the collocation grid, then
    transformed back with the holomorphic projection and dealiasing applied.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.n = grid.n_points
        self.xi = grid.xi
        self.ik = 1j * grid.xi
        self.keep = grid.keep_mask.astype(float)
        self.keep_pos = (grid.dealias_mask & ~grid.neg_mask).astype(float)
        self.dmask = grid.dealias_mask.astype(float)
        self.neg = grid.neg_mask.astype(float)
        self.neg_strict = (grid.xi < 0).astype(float)

    def vals(self, c):
        return np.fft.ifft(c) * self.n

    def coef(self, v):
        return np.fft.fft(v) / self.n

    def P(self, v):
        """Values -> coefficients of ``P`` (dealiased)."""
        return self.coef(v) * self.keep

    def Pbar(self, v):
        """Values -> coefficients of ``I - P`` (dealiased)."""
        return self.coef(v) * self.keep_pos

    def Pv(self, v):
        return self.vals(self.P(v))

    def Pbarv(self, v):
        return self.vals(self.Pbar(v))

    def dx(self, v):
        """Spectral derivative of collocation values (dealiased)."""
        return self.vals(self.ik * self.coef(v) * self.dmask)

    def real_pair(self, v):
        """Real part of ``P[x] + Pbar[conj x]`` with ``Pbar = I - P``.

        The mean of ``x`` is counted once (it belongs to ``P``); the nonzero
        modes pair up into a real function.
        """
        c = self.coef(v) * self.dmask
        return (self.vals(c * self.neg) + self.vals(c * self.neg_strict).conj()).real

    def guard(self, z, floor):
        m = np.min(np.abs(z))
        if m <= floor:
            raise ChordArcViolation(f"min |1 + W_a| = {m:.6g} <= floor {floor}")
        return m

    # ww2d1 ---------------------------------------------------------------
    def wq_nonlinear(self, U, floor=DEFAULT_CHORD_ARC_FLOOR):
        W, Q = U
        Wa = self.vals(self.ik * W)
        Qa = self.vals(self.ik * Q * self.keep)
        z = 1.0 + Wa
        self.guard(z, floor)
        J = (z * z.conj()).real
        # F = P[Q_a] + P[(Q_a - conj Q_a)(1/J - 1)], the first term exactly Q_a
        Fn = self.Pv((Qa - Qa.conj()) * (-(2.0 * Wa.real + (Wa * Wa.conj()).real) / J))
        F = Qa + Fn
        dW = -self.P(Fn + F * Wa)
        dQ = -self.P(F * Qa + (Qa * Qa.conj()).real / J)
        return np.stack([dW, dQ])

    def linear(self, U):
        W, Q = U
        return np.stack([-self.ik * Q, 1j * W])

    # ww2d-diff -----------------------------------------------------------
    def diff_aux(self, bW, R, floor=DEFAULT_CHORD_ARC_FLOOR):
        Wv = self.vals(bW)
        Rv = self.vals(R)
        Wav = self.vals(self.ik * bW)
        Rav = self.vals(self.ik * R)
        z = 1.0 + Wv
        self.guard(z, floor)
        b = self.real_pair(Rv / z.conj())  # Q_a / J = R / (1 + conj bW)
        # a = i (Pbar[conj(R) R_a] - P[R conj(R_a)]) = -Im of the pair, exactly real
        a = -self.real_pair(1j * Rv * Rav.conj())
        ba = self.dx(b)
        M = (Rav / z.conj() + Rav.conj() / z - ba).real
        return Wv, Rv, Wav, Rav, z, b, a, M

    def diff_nonlinear(self, U, floor=DEFAULT_CHORD_ARC_FLOOR):
        bW, R = U
        Wv, Rv, Wav, Rav, z, b, a, M = self.diff_aux(bW, R, floor)
        dbW = self.P(-b * Wav - z * Rav / z.conj() + z * M) + self.ik * R
        dR = self.P(-b * Rav + 1j * (Wv - a) / z) - 1j * bW
        return np.stack([dbW, dR])

    # exact linear flow ---------------------------------------------------
    def propagator_coeffs(self, dt):
        """Per-mode ``exp(A dt)`` for ``A = [[0, -i xi], [i, 0]]``, as ``(cos, sin/omega)``.

        Holomorphic states have no ``xi > 0`` content; those modes are zeroed.
        """
        neg = self.xi <= 0
        om = np.sqrt(np.where(neg, -self.xi, 0.0))
        c = np.where(neg, np.cos(om * dt), 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(om > 0, np.sin(om * dt) / np.where(om > 0, om, 1.0), dt)
        s = np.where(neg, s, 0.0)
        return c, s

    def apply_propagator(self, U, cs):
        c, s = cs
        W, Q = U
        return np.stack([c * W - s * self.ik * Q, c * Q + 1j * s * W])


@lru_cache(maxsize=32)
def kernel(grid: GridSpec) -> Kernel:
    return Kernel(grid)


# --------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class WaterState:
    time: float
    W: SpectralField
    Q: SpectralField

    def __post_init__(self):
        if self.W.grid != self.Q.grid:
            raise ValueError("W and Q must share a grid")
        if not (self.W.holomorphic and self.Q.holomorphic):
            raise ValueError("W and Q must be holomorphic")

    @classmethod
    def from_coeffs(cls, grid: GridSpec, W, Q, time: float = 0.0) -> "WaterState":
        m = grid.neg_mask
        return cls(
            float(time),
            SpectralField.from_coeffs(grid, np.asarray(W) * m, True),
            SpectralField.from_coeffs(grid, np.asarray(Q) * m, True),
        )

    @classmethod
    def zeros(cls, grid: GridSpec, time: float = 0.0) -> "WaterState":
        return cls(float(time), SpectralField.zeros(grid), SpectralField.zeros(grid))

    @property
    def grid(self) -> GridSpec:
        return self.W.grid

    @property
    def U(self) -> np.ndarray:
        return np.stack([self.W.coeffs, self.Q.coeffs])

    def with_U(self, U, time: float) -> "WaterState":
        return WaterState.from_coeffs(self.grid, U[0], U[1], time)

    def scaled(self, factor: float) -> "WaterState":
        return replace(self, W=self.W * factor, Q=self.Q * factor)

    def chord_arc_min(self) -> float:
        k = kernel(self.grid)
        return float(np.min(np.abs(1.0 + k.vals(k.ik * self.W.coeffs))))


@dataclass(frozen=True)
class DiffState:
    time: float
    bW: SpectralField
    R: SpectralField

    @property
    def grid(self) -> GridSpec:
        return self.bW.grid

    @property
    def U(self) -> np.ndarray:
        return np.stack([self.bW.coeffs, self.R.coeffs])

    @classmethod
    def from_coeffs(cls, grid: GridSpec, bW, R, time: float = 0.0) -> "DiffState":
        m = grid.neg_mask
        return cls(
            float(time),
            SpectralField.from_coeffs(grid, np.asarray(bW) * m, True),
            SpectralField.from_coeffs(grid, np.asarray(R) * m, True),
        )

    def with_U(self, U, time: float) -> "DiffState":
        return DiffState.from_coeffs(self.grid, U[0], U[1], time)


@dataclass(frozen=True)
class AuxFields:
    """Derived fields of a state.  ``J, b, a, M`` are real collocation arrays."""

    bW: SpectralField
    R: SpectralField
    F: SpectralField
    Y: SpectralField
    J: np.ndarray
    b: np.ndarray
    a: np.ndarray
    M: np.ndarray
    M_alt: np.ndarray


def to_diff_state(s: WaterState, floor: float = DEFAULT_CHORD_ARC_FLOOR) -> DiffState:
    k = kernel(s.grid)
    Wa = k.vals(k.ik * s.W.coeffs)
    k.guard(1.0 + Wa, floor)
    Qa = k.vals(k.ik * s.Q.coeffs)
    R = k.P(Qa / (1.0 + Wa))
    return DiffState.from_coeffs(s.grid, k.ik * s.W.coeffs, R, s.time)


def compute_aux(s: WaterState, floor: float = DEFAULT_CHORD_ARC_FLOOR) -> AuxFields:
    k = kernel(s.grid)
    g = s.grid
    Wa = k.vals(k.ik * s.W.coeffs)
    Qa = k.vals(k.ik * s.Q.coeffs)
    z = 1.0 + Wa
    k.guard(z, floor)
    J = (z * z.conj()).real
    F = k.P((Qa - Qa.conj()) / J)
    R = k.P(Qa / z)
    d = DiffState.from_coeffs(g, k.ik * s.W.coeffs, R, s.time)
    Wv, Rv, Wav, Rav, _, b, a, M = k.diff_aux(d.bW.coeffs, d.R.coeffs, floor)
    Y = k.P(Wv / z)
    Yv = k.vals(Y)
    Yav = k.vals(k.ik * Y)
    M_alt = k.real_pair(Rv * Yav.conj() - Rav.conj() * Yv)
    return AuxFields(
        bW=d.bW,
        R=d.R,
        F=SpectralField.from_coeffs(g, F, True),
        Y=SpectralField.from_coeffs(g, Y, True),
        J=J,
        b=b,
        a=a,
        M=M,
        M_alt=M_alt,
    )


def rhs_wq(s: WaterState, floor: float = DEFAULT_CHORD_ARC_FLOOR) -> tuple[SpectralField, SpectralField]:
    """Time derivatives ``(W_t, Q_t)``, holomorphic and dealiased."""
    k = kernel(s.grid)
    U = s.U
    dU = k.wq_nonlinear(U, floor) + k.linear(U * k.dmask)
    return (
        SpectralField.from_coeffs(s.grid, dU[0], True),
        SpectralField.from_coeffs(s.grid, dU[1] * s.grid.neg_mask, True),
    )


def rhs_diff(d: DiffState, floor: float = DEFAULT_CHORD_ARC_FLOOR) -> tuple[SpectralField, SpectralField]:
    """Time derivatives ``(bW_t, R_t)`` of the diagonal system."""
    k = kernel(d.grid)
    U = d.U
    dU = k.diff_nonlinear(U, floor) + k.linear(U * k.dmask)
    m = d.grid.neg_mask
    return (
        SpectralField.from_coeffs(d.grid, dU[0] * m, True),
        SpectralField.from_coeffs(d.grid, dU[1] * m, True),
    )


def linear_propagator(s: WaterState, dt: float) -> WaterState:
    """Exact solution of ``w_t + q_a = 0, q_t - i w = 0`` over ``dt``."""
    k = kernel(s.grid)
    return s.with_U(k.apply_propagator(s.U, k.propagator_coeffs(dt)), s.time + dt)


# --------------------------------------------------------------------------
# time stepping


def dt_max(grid: GridSpec, b_max: float = 0.0) -> float:
    """Phase-resolution bound, tightened by an advection CFL when ``b_max > 0``."""
    xi_max = grid.dealias_fraction * grid.nyquist
    bound = 0.5 / np.sqrt(xi_max)
    if b_max > 0:
        bound = min(bound, 0.25 * grid.dalpha / b_max)
    return bound


class LawsonRK4:
    """Classical RK4 applied in the frame of the exact linear propagator.

    ``system`` selects the nonlinear remainder: ``"wq"`` for ``(W, Q)`` and
    ``"diff"`` for ``(bW, R)``.
    """

    def __init__(
        self,
        grid: GridSpec,
        dt: float,
        system: str = "wq",
        chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR,
        check_dt: bool = True,
    ):
        if check_dt and abs(dt) > dt_max(grid) * (1 + 1e-12):
            raise ValueError(f"|dt| = {abs(dt)} exceeds dt_max = {dt_max(grid):.6g}")
        self.grid = grid
        self.dt = float(dt)
        self.floor = chord_arc_floor
        self.k = kernel(grid)
        nl = {"wq": self.k.wq_nonlinear, "diff": self.k.diff_nonlinear}[system]
        self._nl: Callable = lambda U: nl(U, self.floor)
        self._half = self.k.propagator_coeffs(self.dt / 2)

    def advance(self, U: np.ndarray) -> np.ndarray:
        h = self.dt
        E = lambda X: self.k.apply_propagator(X, self._half)  # noqa: E731
        k1 = self._nl(U)
        EU = E(U)
        k2 = self._nl(EU + 0.5 * h * E(k1))
        k3 = self._nl(EU + 0.5 * h * k2)
        E2U = E(EU)
        k4 = self._nl(E2U + h * E(k3))
        out = E2U + (h / 6.0) * (E(E(k1)) + 2.0 * E(k2 + k3) + k4)
        if not np.all(np.isfinite(out)):
            raise NaNDetected("non-finite state after Lawson RK4 step")
        return out

    def step(self, s):
        return s.with_U(self.advance(s.U), s.time + self.dt)

    def run(self, s, n_steps: int):
        U = s.U
        for _ in range(n_steps):
            U = self.advance(U)
        return s.with_U(U, s.time + n_steps * self.dt)


def step(s: WaterState, dt: float, chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR) -> WaterState:
    return LawsonRK4(s.grid, dt, "wq", chord_arc_floor).step(s)


def evolve(s, t_end: float, dt: float, system: str = "wq", chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR):
    """Step from ``s.time`` to ``t_end`` with steps no larger than ``|dt|``."""
    if abs(dt) > dt_max(s.grid) * (1 + 1e-12):
        raise ValueError(f"|dt| = {abs(dt)} exceeds dt_max = {dt_max(s.grid):.6g}")
    span = t_end - s.time
    if span == 0:
        return s
    n = max(1, int(np.ceil(abs(span) / abs(dt) - 1e-9)))
    stepper = LawsonRK4(s.grid, span / n, system, chord_arc_floor, check_dt=False)
    out = stepper.run(s, n)
    return replace(out, time=float(t_end))


# --------------------------------------------------------------------------
# initial data

DEFAULT_CARRIER = 0.3


def localized_profile(grid: GridSpec, width: float, carrier: float = DEFAULT_CARRIER):
    """Unit-amplitude rightward-moving Gaussian wave group centred at ``alpha = 0``.

    ``W`` has coefficients ``exp(-((xi + carrier) width)^2)`` on ``xi < 0``;
    ``Q = W / sqrt|xi|`` selects the branch travelling towards ``alpha > 0``.
    """
    xi = grid.xi
    neg = xi < 0
    W = np.where(neg, np.exp(-(((xi + carrier) * width) ** 2)), 0.0) * grid.dealias_mask
    Q = np.where(neg, W / np.sqrt(np.where(neg, -xi, 1.0)), 0.0)
    scale = 1.0 / np.max(np.abs(grid.to_values(W)))
    return WaterState.from_coeffs(grid, W * scale, Q * scale)


def amplitude_data(amplitude: float, width: float, grid: GridSpec, carrier: float = DEFAULT_CARRIER) -> WaterState:
    """Localized data with ``sup |W| = amplitude`` (used for amplitude-scaling studies)."""
    return localized_profile(grid, width, carrier).scaled(amplitude)


def max_admissible_scale(s: WaterState, floor: float = DEFAULT_CHORD_ARC_FLOOR) -> float:
    """Smallest ``c > 0`` with ``min |1 + c W_a| = floor``, i.e. the end of the
    amplitude range connected to zero on which ``c s`` is admissible."""
    k = kernel(s.grid)
    w = k.vals(k.ik * s.W.coeffs)
    a2 = np.abs(w) ** 2
    b = w.real
    disc = b * b - a2 * (1.0 - floor**2)
    ok = (a2 > 0) & (disc >= 0) & (b < 0)
    if not ok.any():
        return np.inf
    # first root of |w|^2 c^2 + 2 Re(w) c + 1 - floor^2 = 0
    roots = (-b[ok] - np.sqrt(disc[ok])) / a2[ok]
    return float(np.min(roots))


def make_localized_data(
    eps: float,
    width: float,
    grid: GridSpec,
    carrier: float = DEFAULT_CARRIER,
    chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR,
) -> WaterState:
    """Localized data whose squared weighted energy equals ``eps`` (to 1%)."""
    from scipy.optimize import brentq

    from .diagnostics import weighted_energy

    if eps < 0 or width <= 0:
        raise ValueError("eps must be >= 0 and width > 0")
    if eps == 0:
        return WaterState.zeros(grid)
    base = localized_profile(grid, width, carrier)
    c_max = max_admissible_scale(base, chord_arc_floor)

    def size(c):
        return weighted_energy(base.scaled(c), chord_arc_floor)

    # quadratic at small amplitude: start from the linear estimate
    c0 = np.sqrt(eps / size(1e-6)) * 1e-6
    top = np.log(c_max) + np.log1p(-1e-9)
    f = lambda logc: np.log(size(np.exp(logc))) - np.log(eps)  # noqa: E731
    lo, hi = min(np.log(c0) - 2.0, top - 1.0), min(np.log(c0) + 0.5, top)
    while f(hi) < 0 and hi < top:
        hi = min(hi + 0.5, top)
    if f(hi) < 0:
        raise InfeasibleData(
            f"weighted energy {eps} not reachable: the chord-arc floor {chord_arc_floor} "
            f"is met at amplitude {c_max:.4g} (weighted energy {size(np.exp(top)):.4g})"
        )
    c = np.exp(brentq(f, lo, hi, xtol=1e-10))
    out = base.scaled(c)
    log.debug("localized data: amplitude %.6g, sup|W| %.6g", c, out.W.sup_norm())
    return out
