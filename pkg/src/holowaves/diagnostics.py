"""Norms, conserved energies and decay functionals.

``Hdot_0`` is the space of holomorphic pairs with the ``L^2 x Hdot^{1/2}``
norm.  Energies are evaluated by Parseval on the torus.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable

import numpy as np

from . import spectral as sp
from .spectral import GridSpec, SpectralField
from .waterwave import (
    DEFAULT_CHORD_ARC_FLOOR,
    DiffState,
    WaterState,
    rhs_wq,
    to_diff_state,
)

N_SOBOLEV = 6


def _sq(grid: GridSpec, c: np.ndarray, weight=1.0) -> float:
    return float(grid.length * np.sum(weight * np.abs(c) ** 2))


def h0_norm_sq(w: SpectralField, q: SpectralField) -> float:
    """``||w||_{L^2}^2 + || |D|^{1/2} q ||_{L^2}^2``."""
    g = w.grid
    return _sq(g, w.coeffs) + _sq(g, q.coeffs, g.abs_xi)


def energy0(w: SpectralField, q: SpectralField) -> float:
    """Quadratic energy of the linearized flow.

    ``int 1/2 |w|^2 + 1/(4i) (q conj(q)_a - conj(q) q_a)``; for holomorphic
    ``q`` the second term is ``1/2 || |D|^{1/2} q ||^2``, so both halves carry
    the weight ``1/2`` that the linear flow conserves.
    """
    g = w.grid
    kinetic = -0.5 * float(g.length * np.sum(g.xi * np.abs(q.coeffs) ** 2))
    return 0.5 * _sq(g, w.coeffs) + kinetic


def energy(s: WaterState) -> float:
    """Conserved energy of the full system: ``energy0`` plus the cubic term
    ``-1/4 int (conj(W)^2 W_a + W^2 conj(W_a))``."""
    g = s.grid
    W = s.W.values
    Wa = g.to_values(1j * g.xi * s.W.coeffs)
    cubic = -0.25 * g.integrate(2.0 * (W.conj() ** 2 * Wa).real)
    return energy0(s.W, s.Q) + float(np.real(cubic))


def _diff_norm_sq(bW: SpectralField, R: SpectralField, n: int) -> float:
    g = bW.grid
    total = 0.0
    for k in range(n + 1):
        m = g.abs_xi ** (2 * k)
        total += _sq(g, bW.coeffs, m) + _sq(g, R.coeffs, m * g.abs_xi)
    return total


def sobolev_norm(d: DiffState, n: int) -> float:
    """``( sum_{k<=n} || d^k (bW, R) ||_{L^2 x Hdot^{1/2}}^2 )^{1/2}``."""
    if not 0 <= n < N_SOBOLEV:
        raise ValueError("n must lie in 0..5")
    return float(np.sqrt(_diff_norm_sq(d.bW, d.R, n)))


def _lp_sup(f: SpectralField, norm) -> float:
    return max((norm(sp.lp_block(f, j)) for j in sp.lp_indices(f.grid)), default=0.0)


def control_norms(d: DiffState) -> tuple[float, float]:
    """Lifespan control norms ``(A, B)``.

    BMO is replaced by the supremum over dyadic blocks of the sup norm and
    ``B^{0,inf}_2`` by the supremum over dyadic blocks of the ``L^2`` norm.
    """
    bW, R = d.bW, d.R
    Y = bW.values / (1.0 + bW.values)
    hR = sp.frac_deriv(R, 0.5)
    A = bW.sup_norm() + float(np.max(np.abs(Y))) + hR.sup_norm() + _lp_sup(hR, SpectralField.l2_norm)
    B = _lp_sup(sp.frac_deriv(bW, 0.5), SpectralField.sup_norm) + _lp_sup(
        sp.derivative(R), SpectralField.sup_norm
    )
    return float(A), float(B)


def x_norm(s: WaterState, chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR) -> float:
    """``||W||_inf + ||R||_inf + ||D^2 W||_inf + || |D|^{3/2} R ||_inf``."""
    R = to_diff_state(s, chord_arc_floor).R
    return (
        s.W.sup_norm()
        + R.sup_norm()
        + sp.frac_deriv(s.W, 2.0).sup_norm()
        + sp.frac_deriv(R, 1.5).sup_norm()
    )


def _alpha_d(f: SpectralField) -> np.ndarray:
    """``2 alpha f_a`` in physical space on the centered coordinate."""
    g = f.grid
    return 2.0 * g.centered_alpha * g.to_values(1j * g.xi * f.coeffs)


def scaling_action(
    s: WaterState, chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR
) -> tuple[SpectralField, SpectralField]:
    """``((S - 2) W, (S - 3) Q)`` with ``S = t d_t + 2 alpha d_a``, ``d_t`` from the flow."""
    g = s.grid
    if s.time != 0.0:
        dW, dQ = rhs_wq(s, chord_arc_floor)
        tW, tQ = s.time * dW.values, s.time * dQ.values
    else:
        tW = tQ = 0.0
    sW = tW + _alpha_d(s.W) - 2.0 * s.W.values
    sQ = tQ + _alpha_d(s.Q) - 3.0 * s.Q.values
    P = lambda v: SpectralField.from_coeffs(g, g.to_coeffs(v) * g.neg_mask, True)  # noqa: E731
    return P(sW), P(sQ)


def diagonalize(w: SpectralField, q: SpectralField, R: SpectralField, inverse: bool = False):
    """``(w, q - P[R w])``; with ``inverse`` the map ``(w, q + P[R w])``."""
    Rw = sp.product(R, w, holomorphic=True)
    return w, (q + Rw) if inverse else (q - Rw)


def weighted_energy(s: WaterState, chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR) -> float:
    """Squared weighted energy ``||(W,Q)||_{Hdot_0}^2 + ||(bW,R)||_{Hdot_5}^2 + ||A S(W,Q)||_{Hdot_1}^2``."""
    d = to_diff_state(s, chord_arc_floor)
    sW, sQ = scaling_action(s, chord_arc_floor)
    w, q = diagonalize(sW, sQ, d.R)
    return h0_norm_sq(s.W, s.Q) + _diff_norm_sq(d.bW, d.R, 5) + _diff_norm_sq(w, q, 1)


def tvf_quantity(Wt: SpectralField, Qt: SpectralField, time: float) -> float:
    """``|| (2 alpha Wt_a + t Qt_a, 2 alpha Qt_a - i t Wt) ||_{Hdot_0}`` on normal-form variables."""
    g = Wt.grid
    u = _alpha_d(Wt) + time * g.to_values(1j * g.xi * Qt.coeffs)
    v = _alpha_d(Qt) - 1j * time * Wt.values
    return float(np.sqrt(h0_norm_sq(SpectralField.from_values(g, u), SpectralField.from_values(g, v))))


# --------------------------------------------------------------------------
# records

CSV_FIELDS = (
    ["time", "E0", "E"]
    + [f"H{n}" for n in range(N_SOBOLEV)]
    + ["A", "B", "X", "WH", "tvf", "chord_arc_min", "sqrtt_X"]
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    E0: float
    E: float
    Hn: tuple[float, ...] = field(default=())
    A: float = 0.0
    B: float = 0.0
    Xnorm: float = 0.0
    WH: float = 0.0
    tvf: float = 0.0
    chord_arc_min: float = 0.0
    sqrtt_X: float = 0.0

    def row(self) -> list[float]:
        return (
            [self.time, self.E0, self.E]
            + list(self.Hn)
            + [self.A, self.B, self.Xnorm, self.WH, self.tvf, self.chord_arc_min, self.sqrtt_X]
        )

    def as_dict(self) -> dict:
        return asdict(self)


def record(s: WaterState, chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR) -> DiagnosticsRecord:
    """Evaluate every diagnostic on one snapshot."""
    from .normalform import to_normal_form

    d = to_diff_state(s, chord_arc_floor)
    A, B = control_norms(d)
    X = x_norm(s, chord_arc_floor)
    nf = to_normal_form(s)
    return DiagnosticsRecord(
        time=s.time,
        E0=energy0(s.W, s.Q),
        E=energy(s),
        Hn=tuple(sobolev_norm(d, n) for n in range(N_SOBOLEV)),
        A=A,
        B=B,
        Xnorm=X,
        WH=weighted_energy(s, chord_arc_floor),
        tvf=tvf_quantity(nf.W, nf.Q, s.time),
        chord_arc_min=s.chord_arc_min(),
        sqrtt_X=float(np.sqrt(s.time) * X),
    )


class CsvLog:
    """CSV sink with full double precision (17 significant digits)."""

    def __init__(self, fh: IO[str], write_header: bool = True):
        self._w = csv.writer(fh, lineterminator="\n")
        self._fh = fh
        if write_header:
            self._w.writerow(CSV_FIELDS)

    def write(self, rec: DiagnosticsRecord) -> None:
        self._w.writerow([f"{x:.17g}" for x in rec.row()])
        self._fh.flush()

    def write_all(self, recs: Iterable[DiagnosticsRecord]) -> None:
        for r in recs:
            self.write(r)


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    return {name: body[:, i] for i, name in enumerate(header)}


__all__ = [
    "energy0",
    "energy",
    "h0_norm_sq",
    "sobolev_norm",
    "control_norms",
    "x_norm",
    "scaling_action",
    "diagonalize",
    "weighted_energy",
    "tvf_quantity",
    "DiagnosticsRecord",
    "record",
    "CsvLog",
    "read_csv",
    "CSV_FIELDS",
]
