"""Quadratic normal form and the cubic source terms of the transformed flow.

The near-identity map

    Wt = W - 2 P[Re W * W_a],   Qt = Q - 2 P[Re W * R]

removes the quadratic interactions: ``(Wt, Qt)`` satisfy the linear system
up to cubic sources ``(G, K)``.  :func:`cubic_sources` evaluates the cubic
truncation of those sources together with its resonant / nonresonant / null
split, and :func:`nf_residual` measures ``(G, K)`` directly from the flow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral import GridSpec, SpectralField
from .waterwave import (
    DEFAULT_CHORD_ARC_FLOOR,
    WaterState,
    evolve,
    kernel,
    to_diff_state,
)


@dataclass(frozen=True)
class NormalFormState:
    time: float
    W: SpectralField
    Q: SpectralField

    @property
    def grid(self) -> GridSpec:
        return self.W.grid

    @property
    def U(self) -> np.ndarray:
        return np.stack([self.W.coeffs, self.Q.coeffs])


def to_normal_form(s: WaterState, chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR) -> NormalFormState:
    k = kernel(s.grid)
    d = to_diff_state(s, chord_arc_floor)
    re_w = s.W.values.real
    Wt = s.W.coeffs - 2.0 * k.P(re_w * d.bW.values)
    Qt = s.Q.coeffs - 2.0 * k.P(re_w * d.R.values)
    g = s.grid
    return NormalFormState(
        s.time,
        SpectralField.from_coeffs(g, Wt, True),
        SpectralField.from_coeffs(g, Qt, True),
    )


# --------------------------------------------------------------------------
# cubic sources


@dataclass(frozen=True)
class CubicSources:
    G3r: SpectralField
    G3nr: SpectralField
    G3null: SpectralField
    K3r: SpectralField
    K3nr: SpectralField
    K3null: SpectralField
    G3: SpectralField  # the undecomposed expression
    K3: SpectralField

    def split_sum(self) -> tuple[SpectralField, SpectralField]:
        return self.G3r + self.G3nr + self.G3null, self.K3r + self.K3nr + self.K3null


def _cubic_arrays(grid: GridSpec, W: np.ndarray, bW: np.ndarray, R: np.ndarray) -> dict[str, np.ndarray]:
    """All cubic source terms from collocation values of ``(W, bW, R)``.

    Inner projections are exact (``P + Pbar = I``); every outer ``P`` also
    dealiases.
    """
    k = kernel(grid)
    neg = grid.neg_mask
    Pin = lambda v: k.vals(k.coef(v) * neg)  # noqa: E731
    Pbin = lambda v: k.vals(k.coef(v) * ~neg)  # noqa: E731
    Pout = k.P
    d = lambda v: k.vals(k.ik * k.coef(v))  # noqa: E731

    cW, cbW, cR = W.conj(), bW.conj(), R.conj()
    re_w = W.real
    Ra = d(R)
    RbW_a = d(R * bW)
    A1 = R * cbW - cR * bW  # R conj(bW) - conj(R) bW
    dPA1 = d(Pin(A1))

    G3 = 2.0 * Pout(-dPA1 * re_w + RbW_a * re_w + bW * (bW * R).real) - Pout(
        cbW**2 * R - bW * (Pin(cR * bW) + Pbin(R * cbW))
    )
    G3r = Pout(RbW_a * cW + bW * R * cbW)
    G3nr = Pout(RbW_a * W + bW * bW * R)
    G3null = Pout(-2.0 * dPA1 * re_w + cbW * (bW * cR - cbW * R) + bW * Pin(-A1))

    K3 = 2.0 * Pout(Pin((R + cR) * Ra) * re_w + 1j * bW**2 * re_w + Pin(R * Ra.conj()) * re_w) + Pout(
        cR * cbW * R - R * Pbin(-A1)
    )
    K3nr = Pout(cR * cbW * R)
    K3null = Pout(-R * Pbin(-A1) + 2.0 * d(Pin(R * cR)) * re_w + 2.0 * (R * Ra + 1j * bW**2) * re_w)
    return dict(
        G3=G3, G3r=G3r, G3nr=G3nr, G3null=G3null,
        K3=K3, K3r=np.zeros_like(K3), K3nr=K3nr, K3null=K3null,
    )


def cubic_sources(
    s: WaterState, variables: str = "WR", chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR
) -> CubicSources:
    """Cubic sources evaluated on ``(W, W_a, R)`` (``variables="WR"``) or on
    the normal-form variables ``(Wt, Wt_a, Qt_a)`` (``variables="tilde"``)."""
    g = s.grid
    k = kernel(g)
    if variables == "WR":
        W, R = s.W, to_diff_state(s, chord_arc_floor).R
        Rv = R.values
    elif variables == "tilde":
        nf = to_normal_form(s, chord_arc_floor)
        W = nf.W
        Rv = k.vals(k.ik * nf.Q.coeffs)
    else:
        raise ValueError("variables must be 'WR' or 'tilde'")
    return sources_from_fields(g, W.values, k.vals(k.ik * W.coeffs), Rv)


def sources_from_fields(grid: GridSpec, W: np.ndarray, bW: np.ndarray, R: np.ndarray) -> CubicSources:
    arrs = _cubic_arrays(grid, np.asarray(W, complex), np.asarray(bW, complex), np.asarray(R, complex))
    return CubicSources(**{name: SpectralField.from_coeffs(grid, c, True) for name, c in arrs.items()})


# --------------------------------------------------------------------------
# flow residual


def fd_weights(order: int = 4) -> tuple[list[int], list[float]]:
    """Centered first-derivative stencil offsets and weights (divide by ``h``)."""
    if order == 2:
        return [-1, 1], [-0.5, 0.5]
    if order == 4:
        return [-2, -1, 1, 2], [1 / 12, -8 / 12, 8 / 12, -1 / 12]
    raise ValueError("order must be 2 or 4")


def nf_residual(
    s: WaterState,
    dt_probe: float = 0.1,
    substeps: int = 5,
    chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR,
) -> tuple[SpectralField, SpectralField]:
    """``(G, K) = (Wt_t + Qt_a, Qt_t - i Wt)`` measured from the full flow.

    The normal-form variables are sampled at ``t + m dt_probe`` (``m = +-1, +-2``)
    by stepping the full system forward and backward, pulled back through the
    exact linear propagator, ``V(tau) = exp(-A tau) U(t + tau)``, and
    differenced with a fourth-order centered stencil; ``V'(0) = (G, K)``.
    """
    g = s.grid
    k = kernel(g)
    offsets, weights = fd_weights(4)
    acc = np.zeros((2, g.n_points), dtype=complex)
    dt_int = dt_probe / substeps
    for m, wgt in zip(offsets, weights):
        tau = m * dt_probe
        sm = evolve(s, s.time + tau, dt_int, chord_arc_floor=chord_arc_floor)
        U = to_normal_form(sm, chord_arc_floor).U
        acc += wgt * k.apply_propagator(U, k.propagator_coeffs(-tau))
    acc /= dt_probe
    return (
        SpectralField.from_coeffs(g, acc[0], True),
        SpectralField.from_coeffs(g, acc[1], True),
    )


# --------------------------------------------------------------------------
# null structure on the asymptotic ansatz


def packet_ansatz(grid: GridSpec, t: float, gamma: Callable[[np.ndarray], np.ndarray]) -> NormalFormState:
    """Leading asymptotic profile along rays ``alpha = v t``:

    ``Wt = t^{-1/2} exp(i t^2 / (4 alpha)) gamma(alpha/t)``, ``Qt = (2 alpha / t) Wt``,

    for ``alpha > 0``; ``gamma`` must vanish near ``v = 0``.
    """
    a = grid.centered_alpha
    pos = a > 0
    v = np.where(pos, a / t, 1.0)
    amp = np.where(pos, gamma(v), 0.0)
    phase = np.where(pos, t * t / (4.0 * np.where(pos, a, 1.0)), 0.0)
    W = t**-0.5 * amp * np.exp(1j * phase)
    Q = 2.0 * v * W
    P = lambda x: SpectralField.from_coeffs(grid, grid.to_coeffs(x) * grid.neg_mask, True)  # noqa: E731
    return NormalFormState(float(t), P(W), P(Q))


def null_forms(Wt: SpectralField, Qt: SpectralField) -> list[tuple[np.ndarray, np.ndarray]]:
    """The three null bilinear forms, each paired with its leading (non-null) term.

    ``Wt_a conj(Qt_a) - conj(Wt_a) Qt_a``, ``(|Qt|^2)_a`` and ``Qt_a Qt_aa + i Wt_a^2``.
    """
    g = Wt.grid
    k = kernel(g)
    Wa = k.vals(k.ik * Wt.coeffs)
    Qa = k.vals(k.ik * Qt.coeffs)
    Qaa = k.vals(k.ik**2 * Qt.coeffs)
    Qv = Qt.values
    absq2_a = k.vals(k.ik * k.coef((Qv * Qv.conj()).real))
    return [
        (Wa * Qa.conj() - Wa.conj() * Qa, Wa * Qa.conj()),
        (absq2_a, Qv.conj() * Qa),
        (Qa * Qaa + 1j * Wa**2, Qa * Qaa),
    ]


def null_cancellation_check(Wt: SpectralField, Qt: SpectralField) -> float:
    """Largest ratio ``sup|null form| / sup|its leading term|`` over the three
    null forms; small on the asymptotic ansatz, ``O(1)`` for generic fields."""
    ratios = []
    for null, generic in null_forms(Wt, Qt):
        den = np.max(np.abs(generic))
        ratios.append(0.0 if den == 0 else float(np.max(np.abs(null)) / den))
    return max(ratios)
