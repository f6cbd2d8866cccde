"""Flat ``key = value`` experiment configuration and the domain-size policy."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path

from ..spectral import GridSpec
from ..waterwave import DEFAULT_CARRIER, DEFAULT_CHORD_ARC_FLOOR, dt_max

# minimum ratios enforced by the domain-size policy
WIDTH_RATIO = 40.0
REACH_RATIO = 2.5


class ConfigRefusal(ValueError):
    """A configuration rejected before any computation.

    ``code`` is a stable machine-readable identifier and ``reason`` a human
    explanation; :meth:`as_dict` is what the CLI writes to ``refusal.json``.
    """

    def __init__(self, code: str, reason: str):
        super().__init__(f"{code}: {reason}")
        self.code = code
        self.reason = reason

    def as_dict(self) -> dict:
        return {"status": "refused", "code": self.code, "reason": self.reason}


@dataclass(frozen=True)
class ExperimentConfig:
    # grid
    n_points: int = 1024
    length: float = 400.0
    dealias_fraction: float = 2.0 / 3.0
    # initial data; ``amplitude`` (sup |W|) overrides the weighted-energy target ``eps``
    eps: float = 0.01
    amplitude: float | None = None
    width: float = 5.0
    carrier: float = DEFAULT_CARRIER
    # integrator
    dt: float = 0.1
    t_max: float = 50.0
    sample_cadence: float = 1.0
    checkpoint_cadence: float = 10.0
    chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR
    # packet analysis
    t_min: float = 10.0
    t_ratio: float = 1.05
    v_min: float = 0.7
    v_max: float = 1.4
    n_v: int = 15
    phase_t_min: float | None = None
    # sweeps
    eps_list: tuple[float, ...] = (0.02, 0.01, 0.005)
    dt_probe: float = 0.1
    # misc
    output_dir: str = "out"
    seed: int = 0

    # -------------------------------------------------------------- derived
    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n_points, self.length, self.dealias_fraction)

    def to_text(self) -> str:
        """Canonical text form; parsing it returns an equal config."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ", ".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def with_updates(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "float | None":
            return None if raw.lower() in ("", "none") else float(raw)
        if kind == "tuple[float, ...]":
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return raw
    except ValueError as exc:
        raise ConfigRefusal("bad_value", f"{key}: cannot parse {raw!r}") from exc


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) over ``base``."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigRefusal("syntax", f"line {lineno}: expected key = value")
        key, raw = (x.strip() for x in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigRefusal("unknown_key", f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return replace(base or ExperimentConfig(), **values)


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigRefusal("unreadable", f"{path}: {exc.strerror}") from exc
    return parse_config(text)


def validate(cfg: ExperimentConfig, packets: bool = False) -> ExperimentConfig:
    """Check the configuration before any run; raise :class:`ConfigRefusal`.

    The domain-size policy requires ``length >= 40 width`` and
    ``length >= 2.5 v_max t_max``: the packet on the fastest ray followed,
    centred at ``v_max t_max``, then stays inside the half period with a 25%
    margin.
    """
    try:
        grid = cfg.grid
    except ValueError as exc:
        raise ConfigRefusal("grid", str(exc)) from exc
    if cfg.width <= 0:
        raise ConfigRefusal("data", "width must be positive")
    if cfg.eps < 0 or (cfg.amplitude is not None and cfg.amplitude < 0):
        raise ConfigRefusal("data", "eps and amplitude must be non-negative")
    if not (cfg.dt > 0 and cfg.t_max > 0 and cfg.sample_cadence > 0 and cfg.checkpoint_cadence > 0):
        raise ConfigRefusal("integrator", "dt, t_max and cadences must be positive")
    limit = dt_max(grid)
    if cfg.dt > limit * (1 + 1e-12):
        raise ConfigRefusal("dt_max", f"dt = {cfg.dt} exceeds dt_max = {limit:.6g} for this grid")
    for name in ("sample_cadence", "checkpoint_cadence"):
        ratio = getattr(cfg, name) / cfg.dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigRefusal("integrator", f"{name} must be a multiple of dt")
    if abs(cfg.t_max / cfg.dt - round(cfg.t_max / cfg.dt)) > 1e-9:
        raise ConfigRefusal("integrator", "t_max must be a multiple of dt")
    if cfg.length < WIDTH_RATIO * cfg.width:
        raise ConfigRefusal(
            "domain_width", f"length {cfg.length} < {WIDTH_RATIO:g} x width {cfg.width}"
        )
    if cfg.length < REACH_RATIO * cfg.v_max * cfg.t_max:
        raise ConfigRefusal(
            "domain_reach",
            f"length {cfg.length} < {REACH_RATIO:g} x v_max {cfg.v_max} x t_max {cfg.t_max}",
        )
    if not 0 <= cfg.chord_arc_floor < 1:
        raise ConfigRefusal("chord_arc_floor", "chord_arc_floor must lie in [0, 1)")
    if packets:
        if not 0 < cfg.t_min < cfg.t_max:
            raise ConfigRefusal("packet", "need 0 < t_min < t_max")
        if not cfg.t_ratio > 1:
            raise ConfigRefusal("packet", "t_ratio must exceed 1")
        if not 0 < cfg.v_min <= cfg.v_max or cfg.n_v < 1:
            raise ConfigRefusal("packet", "need 0 < v_min <= v_max and n_v >= 1")
    return cfg
