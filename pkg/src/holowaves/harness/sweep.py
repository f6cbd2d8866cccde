"""Amplitude sweeps: parallel runs and log-log exponent fits."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from ..diagnostics import h0_norm_sq
from ..normalform import cubic_sources, nf_residual
from ..packets import fit_slope
from ..spectral import SpectralField
from ..waterwave import WaterState, amplitude_data, kernel, rhs_wq
from .config import ExperimentConfig, validate

# the residual is differenced from five substeps per probe offset
PROBE_SUBSTEPS = 5


def _h0(a: SpectralField, b: SpectralField) -> float:
    return float(np.sqrt(h0_norm_sq(a, b)))


def sweep_state(cfg: ExperimentConfig, eps: float) -> WaterState:
    """Sweep data: the configured profile with ``sup |W| = eps``.

    The sweep parameter is an amplitude, so every measured quantity of
    homogeneous degree ``p`` in the data scales exactly like ``eps^p``.
    """
    return amplitude_data(eps, cfg.width, cfg.grid, cfg.carrier)


def rhs_nonlinear_norm(s: WaterState, chord_arc_floor: float) -> float:
    """``Hdot_0`` size of the flow's right-hand side minus its linear part."""
    g = s.grid
    dW, dQ = rhs_wq(s, chord_arc_floor)
    lin = kernel(g).linear(s.U)
    return _h0(
        SpectralField.from_coeffs(g, dW.coeffs - lin[0] * g.dealias_mask),
        SpectralField.from_coeffs(g, dQ.coeffs - lin[1] * g.dealias_mask),
    )


def measure_nf(cfg: ExperimentConfig, eps: float) -> dict:
    s = sweep_state(cfg, eps)
    G, K = nf_residual(s, cfg.dt_probe, PROBE_SUBSTEPS, cfg.chord_arc_floor)
    cs = cubic_sources(s, "tilde", cfg.chord_arc_floor)
    return {
        "eps": eps,
        "residual": _h0(G, K),
        "residual_minus_cubic": _h0(G - cs.G3, K - cs.K3),
        "cubic_sources": _h0(cs.G3, cs.K3),
    }


def measure_sweep(cfg: ExperimentConfig, eps: float) -> dict:
    out = measure_nf(cfg, eps)
    out["rhs_nonlinear"] = rhs_nonlinear_norm(sweep_state(cfg, eps), cfg.chord_arc_floor)
    return out


def fit_exponent(eps: Sequence[float], values: Sequence[float]) -> dict:
    """Log-log slope with its standard error, or an "insufficient points" marker."""
    x = np.asarray(eps, float)
    y = np.asarray(values, float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if np.unique(x[ok]).size < 2:
        return {"status": "insufficient points", "exponent": None, "stderr": None}
    slope, se = fit_slope(np.log(x[ok]), np.log(y[ok]))
    return {"status": "ok", "exponent": slope, "stderr": se if np.isfinite(se) else None}


def _map(fn, cfg: ExperimentConfig, eps_list: Sequence[float], threads: int) -> list[dict]:
    if threads <= 1 or len(eps_list) <= 1:
        return [fn(cfg, e) for e in eps_list]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, [cfg] * len(eps_list), eps_list))


def cmd_sweep(cfg: ExperimentConfig, eps_list: Sequence[float] | None = None, threads: int = 1) -> dict:
    """Run every amplitude in ``eps_list`` (in parallel) and fit the exponents
    of the nonlinear right-hand side (expected 2), the normal-form residual
    (3) and the residual beyond the cubic sources (4)."""
    validate(cfg)
    eps_list = list(cfg.eps_list if eps_list is None else eps_list)
    rows = _map(measure_sweep, cfg, eps_list, threads)
    keys = ("rhs_nonlinear", "residual", "residual_minus_cubic")
    return {
        "eps": eps_list,
        "points": rows,
        "exponents": {k: fit_exponent(eps_list, [r[k] for r in rows]) for k in keys},
        "expected": {"rhs_nonlinear": 2, "residual": 3, "residual_minus_cubic": 4},
    }


def cmd_nf_check(cfg: ExperimentConfig, eps_list: Sequence[float] | None = None, threads: int = 1) -> dict:
    """Normal-form report: per-amplitude residual norms, fitted exponents and
    the linear-regime residual."""
    validate(cfg)
    eps_list = list(cfg.eps_list if eps_list is None else eps_list)
    rows = _map(measure_nf, cfg, eps_list, threads)
    tiny = measure_nf(cfg, 1e-8)
    return {
        "eps": eps_list,
        "points": rows,
        "exponents": {
            k: fit_exponent(eps_list, [r[k] for r in rows])
            for k in ("residual", "residual_minus_cubic", "cubic_sources")
        },
        "expected": {"residual": 3, "residual_minus_cubic": 4, "cubic_sources": 3},
        "linear_regime": tiny,
    }
