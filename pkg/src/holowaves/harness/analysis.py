"""Trajectory sampling and the packet / asymptotics analyses built on it."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import packets as pk
from ..normalform import to_normal_form
from ..waterwave import WaterState, evolve, linear_propagator
from .config import ExperimentConfig, validate
from .runner import initial_state

# rays at which the phase rotation is compared with its prediction
PHASE_RAYS = (0.8, 1.0, 1.25)


def sample_trajectory(
    s: WaterState, times, dt: float, chord_arc_floor: float, linear: bool = False
) -> list[WaterState]:
    """Snapshots of the flow (or of the free linear flow) at ``times``."""
    out = []
    for t in times:
        s = linear_propagator(s, t - s.time) if linear else evolve(s, float(t), dt, chord_arc_floor=chord_arc_floor)
        out.append(s)
    return out


def v_grid(cfg: ExperimentConfig) -> np.ndarray:
    """Geometric ray grid, plus ``v = 1`` and the phase rays inside ``[v_min, v_max]``."""
    base = np.geomspace(cfg.v_min, cfg.v_max, cfg.n_v) if cfg.n_v > 1 else np.array([cfg.v_min])
    extra = [v for v in (1.0, *PHASE_RAYS) if cfg.v_min <= v <= cfg.v_max]
    return np.unique(np.r_[base, extra])


def _nearest(grid_v: np.ndarray, v: float) -> int:
    return int(np.argmin(np.abs(grid_v - v)))


def sigma_sup(gs: pk.GammaSeries) -> np.ndarray:
    """``sup_v |sigma(t, v)|`` over the rays where it is defined."""
    with np.errstate(invalid="ignore"):
        a = np.abs(gs.sigma)
    return np.array([np.nanmax(r) if np.isfinite(r).any() else np.nan for r in a])


def final_decade(t: np.ndarray) -> np.ndarray:
    return t >= t[-1] / 10.0 * (1 - 1e-12)


def modulus_drift_per_decade(t: np.ndarray, g: np.ndarray) -> float:
    """Fitted relative change of ``|gamma|`` per decade of time."""
    ok = np.isfinite(g) & (np.abs(g) > 0)
    slope, _ = pk.fit_slope(np.log10(t[ok]), np.log(np.abs(g[ok])))
    return float(np.expm1(slope))


def phase_slope(t: np.ndarray, g: np.ndarray) -> tuple[float, float]:
    """Regression slope (and its standard error) of ``arg gamma`` against ``ln t``."""
    ok = np.isfinite(g)
    return pk.fit_slope(np.log(t[ok]), np.unwrap(np.angle(g[ok])))


@dataclass
class PacketReport:
    series: pk.GammaSeries
    psi_half: np.ndarray
    summary: dict


def analyse_gamma(gs: pk.GammaSeries, phase_t_min: float | None = None) -> PacketReport:
    """All fitted quantities of the packet test."""
    gs = pk.ode_residual(gs)
    t = gs.t_samples
    vg = gs.v_grid
    summary: dict = {}

    sup = sigma_sup(gs)
    m = final_decade(t) & np.isfinite(sup) & (sup > 0)
    if m.sum() >= 2:
        slope, se = pk.fit_slope(np.log(t[m]), np.log(sup[m]))
        summary["sigma_decay_slope"] = {"value": slope, "stderr": se, "t_range": [float(t[m][0]), float(t[m][-1])]}

    j1 = _nearest(vg, 1.0)
    summary["modulus_drift_per_decade"] = {"v": float(vg[j1]), "value": modulus_drift_per_decade(t, gs.gamma[:, j1])}

    try:
        gs = pk.extract_profile(gs)
        summary["profile_status"] = "stable"
    except pk.ProfileUnstable as exc:
        gs = pk.GammaSeries(gs.v_grid, t, gs.gamma, gs.sigma, pk.profile_at(gs, -1))
        summary["profile_status"] = f"unstable: {exc}"
    psi = gs.psi
    psi_half = pk.profile_at(gs, pk.half_time_index(gs))
    ok = np.isfinite(psi) & np.isfinite(psi_half) & (np.abs(psi) > 0)
    rel = np.abs(np.abs(psi[ok]) - np.abs(psi_half[ok])) / np.abs(psi[ok])
    summary["profile_modulus_gap"] = {
        "max_relative": float(rel.max()) if rel.size else None,
        "T": float(t[-1]),
        "T_half": float(t[pk.half_time_index(gs)]),
    }

    tm = phase_t_min if phase_t_min is not None else t[0]
    win = t >= tm * (1 - 1e-12)
    rays = {}
    for v in PHASE_RAYS:
        j = _nearest(vg, v)
        slope, se = phase_slope(t[win], gs.gamma[win, j])
        pred = float(pk.ode_coefficient(vg[j]) * abs(psi[j]) ** 2) if np.isfinite(psi[j]) else None
        rays[f"{vg[j]:.4g}"] = {
            "slope": slope,
            "stderr": se,
            "predicted": pred,
            "ratio": slope / pred if pred else None,
        }
    summary["phase_slopes"] = {"t_range": [float(t[win][0]), float(t[-1])], "rays": rays}
    return PacketReport(gs, psi_half, summary)


def packet_series(cfg: ExperimentConfig, linear: bool = False):
    """Sampled trajectory and its ``gamma`` series on the configured rays."""
    validate(cfg, packets=True)
    times = pk.geometric_times(cfg.t_min, cfg.t_max, cfg.t_ratio)
    states = sample_trajectory(initial_state(cfg), times, cfg.dt, cfg.chord_arc_floor, linear)
    return states, pk.gamma_series(states, v_grid(cfg), cfg.chord_arc_floor)


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{x:.17g}" for x in r])


def write_packet_outputs(root: Path, report: PacketReport) -> list[Path]:
    gs = report.series
    root.mkdir(parents=True, exist_ok=True)
    out = [root / "gamma.csv", root / "sigma.csv", root / "psi.csv", root / "packet_summary.json"]
    cells = [(i, j) for i in range(len(gs.t_samples)) for j in range(len(gs.v_grid))]
    for path, arr in ((out[0], gs.gamma), (out[1], gs.sigma)):
        _write_rows(
            path,
            ["t", "v", "re", "im"],
            [(gs.t_samples[i], gs.v_grid[j], arr[i, j].real, arr[i, j].imag) for i, j in cells],
        )
    _write_rows(
        out[2],
        ["v", "re_psi", "im_psi", "abs_psi_T", "abs_psi_T_half"],
        [
            (v, p.real, p.imag, abs(p), abs(h))
            for v, p, h in zip(gs.v_grid, gs.psi, report.psi_half)
        ],
    )
    out[3].write_text(json.dumps(report.summary, indent=2, sort_keys=True, default=float) + "\n")
    return out


# --------------------------------------------------------------------------
# asymptotic formula comparison


def asymptotic_errors(states: list[WaterState], psi: np.ndarray, vg: np.ndarray) -> np.ndarray:
    """``t^{1/2} sup |W - W_pred|`` over the followed rays, per snapshot."""
    out = []
    for s in states:
        Wp, _ = pk.asymptotic_eval(psi, vg, s.time, s.grid)
        v = s.grid.centered_alpha / s.time
        m = (v >= vg[0]) & (v <= vg[-1])
        out.append(np.sqrt(s.time) * np.max(np.abs(s.W.values - Wp.values)[m]))
    return np.array(out)


def pointwise_packet_gap(states: list[WaterState], vg: np.ndarray, gs: pk.GammaSeries) -> np.ndarray:
    """``sup_v |Wt(vt) - t^{-1/2} e^{i phi} gamma(t, v)|`` per snapshot (normal-form ``Wt``)."""
    out = []
    for s, g in zip(states, gs.gamma):
        nf = to_normal_form(s)
        vals = []
        for v, gam in zip(vg, g):
            if not np.isfinite(gam):
                continue
            # exact trigonometric interpolation at alpha = v t
            W_at = np.sum(nf.W.coeffs * np.exp(1j * s.grid.xi * v * s.time))
            vals.append(abs(W_at - s.time**-0.5 * np.exp(1j * s.time / (4 * v)) * gam))
        out.append(max(vals) if vals else np.nan)
    return np.array(out)


def edge_mass(s: WaterState, margin: float = 0.05) -> float:
    """Fraction of ``int |W|^2`` within ``margin L`` of the period's edges."""
    a = np.abs(s.W.grid.centered_alpha)
    w2 = np.abs(s.W.values) ** 2
    tot = w2.sum()
    return float(w2[a >= (0.5 - margin) * s.grid.length].sum() / tot) if tot > 0 else 0.0


__all__ = [
    "PHASE_RAYS",
    "PacketReport",
    "analyse_gamma",
    "asymptotic_errors",
    "edge_mass",
    "packet_series",
    "phase_slope",
    "sample_trajectory",
    "sigma_sup",
    "v_grid",
    "write_packet_outputs",
]
