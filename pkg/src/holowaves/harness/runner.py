"""The ``run`` stage: step the flow, log diagnostics, checkpoint, resume."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..diagnostics import CsvLog, record
from ..spectral import read_field, write_field
from ..waterwave import (
    ChordArcViolation,
    LawsonRK4,
    NaNDetected,
    WaterState,
    amplitude_data,
    make_localized_data,
)
from .config import ConfigRefusal, ExperimentConfig, validate

log = logging.getLogger(__name__)

DIAGNOSTICS = "diagnostics.csv"
MANIFEST = "manifest.json"
CHECKPOINTS = "checkpoints"


class StageError(RuntimeError):
    """An I/O failure, annotated with the stage in which it happened."""


@dataclass
class RunManifest:
    config_hash: str
    code_version: str = __version__
    stages: dict[str, str] = field(default_factory=dict)
    files: dict[str, str] = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def add_files(self, root: Path, paths) -> None:
        for p in sorted(paths):
            self.files[str(p.relative_to(root))] = sha256_file(p)

    def write(self, root: Path) -> Path:
        path = root / MANIFEST
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path

    @property
    def ok(self) -> bool:
        return all(v == "ok" for v in self.stages.values())


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def initial_state(cfg: ExperimentConfig) -> WaterState:
    """The configured data; data already below the chord-arc floor is refused."""
    grid = cfg.grid
    if cfg.amplitude is None:
        return make_localized_data(cfg.eps, cfg.width, grid, cfg.carrier, cfg.chord_arc_floor)
    s = amplitude_data(cfg.amplitude, cfg.width, grid, cfg.carrier)
    m = s.chord_arc_min()
    if m <= cfg.chord_arc_floor:
        raise ConfigRefusal("data", f"initial min |1 + W_a| = {m:.4g} is below chord_arc_floor")
    return s


# --------------------------------------------------------------------------
# checkpoints


def checkpoint_path(root: Path, step_index: int) -> Path:
    return root / CHECKPOINTS / f"ckpt_{step_index:09d}.bin"


def write_checkpoint(path: Path, s: WaterState) -> None:
    """``W`` and ``Q`` records, complex128, written atomically."""
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        write_field(fh, s.W, s.time)
        write_field(fh, s.Q, s.time)
    tmp.replace(path)


def read_checkpoint(path: str | Path, dealias_fraction: float = 2.0 / 3.0) -> WaterState:
    with open(path, "rb") as fh:
        W, t = read_field(fh, dealias_fraction)
        Q, _ = read_field(fh, dealias_fraction)
    return WaterState.from_coeffs(W.grid, W.coeffs, Q.coeffs, t)


def _truncate_csv(path: Path, t_keep: float) -> None:
    """Drop diagnostics rows later than ``t_keep`` (the resume point)."""
    lines = path.read_text().splitlines(keepends=True)
    kept = lines[:1] + [ln for ln in lines[1:] if float(ln.split(",", 1)[0]) <= t_keep * (1 + 1e-12)]
    path.write_text("".join(kept))


# --------------------------------------------------------------------------
# the run stage


def cmd_run(cfg: ExperimentConfig, out: str | Path | None = None, resume: str | Path | None = None) -> RunManifest:
    """Step ``cfg``'s data to ``t_max``; emit diagnostics, checkpoints and a manifest.

    Times are ``k dt`` for an integer step index, so a run resumed from any
    checkpoint reproduces the uninterrupted run bit for bit.  A chord-arc or
    NaN breakdown stops the run after checkpointing the last good state; the
    manifest then records ``run: breakdown``.
    """
    validate(cfg)
    root = Path(out or cfg.output_dir)
    manifest = RunManifest(cfg.digest())
    try:
        (root / CHECKPOINTS).mkdir(parents=True, exist_ok=True)
        (root / "config.txt").write_text(cfg.to_text())
    except OSError as exc:
        raise StageError(f"setup: cannot prepare {root}: {exc}") from exc

    grid = cfg.grid
    n_total = int(round(cfg.t_max / cfg.dt))
    every_sample = int(round(cfg.sample_cadence / cfg.dt))
    every_ckpt = int(round(cfg.checkpoint_cadence / cfg.dt))
    csv_path = root / DIAGNOSTICS

    if resume is not None:
        s = read_checkpoint(resume, cfg.dealias_fraction)
        if s.grid != grid:
            raise StageError(f"resume: checkpoint grid {s.grid} does not match the config")
        k0 = int(round(s.time / cfg.dt))
        _truncate_csv(csv_path, s.time)
        fh = open(csv_path, "a", newline="")
        sink = CsvLog(fh, write_header=False)
        manifest.detail["resumed_from"] = k0 * cfg.dt
    else:
        s = initial_state(cfg)
        k0 = 0
        fh = open(csv_path, "w", newline="")
        sink = CsvLog(fh)
        sink.write(record(s, cfg.chord_arc_floor))
        write_checkpoint(checkpoint_path(root, 0), s)

    stepper = LawsonRK4(grid, cfg.dt, "wq", cfg.chord_arc_floor)
    U = s.U
    k = k0
    status = "ok"
    try:
        with fh:
            while k < n_total:
                try:
                    U_next = stepper.advance(U)
                except (ChordArcViolation, NaNDetected) as exc:
                    status = "breakdown"
                    manifest.detail["breakdown"] = {"time": k * cfg.dt, "error": type(exc).__name__, "message": str(exc)}
                    log.warning("breakdown at t = %g: %s", k * cfg.dt, exc)
                    write_checkpoint(checkpoint_path(root, k), s.with_U(U, k * cfg.dt))
                    break
                U = U_next
                k += 1
                if k % every_sample == 0 or k == n_total:
                    sink.write(record(s.with_U(U, k * cfg.dt), cfg.chord_arc_floor))
                if k % every_ckpt == 0 or k == n_total:
                    write_checkpoint(checkpoint_path(root, k), s.with_U(U, k * cfg.dt))
    except OSError as exc:
        raise StageError(f"run: write failed at t = {k * cfg.dt}: {exc}") from exc

    manifest.stages["run"] = status
    manifest.detail["final_time"] = k * cfg.dt
    outputs = [csv_path, root / "config.txt", *sorted((root / CHECKPOINTS).glob("*.bin"))]
    manifest.add_files(root, outputs)
    manifest.write(root)
    return manifest


def final_state(root: str | Path, dealias_fraction: float = 2.0 / 3.0) -> WaterState:
    """The latest checkpoint of a run directory."""
    paths = sorted((Path(root) / CHECKPOINTS).glob("ckpt_*.bin"))
    if not paths:
        raise FileNotFoundError(f"no checkpoints under {root}")
    return read_checkpoint(paths[-1], dealias_fraction)


def energy_drift(csv_path: str | Path) -> float:
    from ..diagnostics import read_csv

    E = read_csv(csv_path)["E"]
    return float(np.max(np.abs(E - E[0])) / abs(E[0])) if E[0] != 0 else float(np.max(np.abs(E)))
