"""Command-line entry point: ``holowaves <subcommand> [--config PATH] [--out DIR] ...``.

Exit codes: 0 ok, 2 configuration refused, 3 numerical breakdown,
4 oracle or test failure; 1 for I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..packets import fit_slope
from ..waterwave import ChordArcViolation, InfeasibleData, NaNDetected
from . import analysis as an
from .config import ConfigRefusal, load_config
from .oracle import FAULTS, cmd_oracle
from .runner import RunManifest, StageError, cmd_run, sha256_file
from .sweep import cmd_nf_check, cmd_sweep

EXIT_OK, EXIT_REFUSED, EXIT_BREAKDOWN, EXIT_FAILED = 0, 2, 3, 4

# pass/fail gates applied to the reports
SWEEP_GATES = {"rhs_nonlinear": (2.0, 0.2), "residual": (3.0, 0.3), "residual_minus_cubic": (4.0, 0.5)}
SIGMA_SLOPE_MAX = -0.9
MODULUS_DRIFT_MAX = 0.05
PROFILE_GAP_MAX = 0.05
PHASE_RATIO_TOL = 0.2
ASYMPTOTIC_SLOPE_MAX = -0.03

log = logging.getLogger("holowaves")


def _dump(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


def _finish(root: Path, stage: str, report: dict, files: list[Path], cfg_digest: str, ok: bool) -> int:
    m = RunManifest(cfg_digest)
    m.stages[stage] = "ok" if ok else "failed"
    m.add_files(root, files)
    m.write(root)
    print(json.dumps(report.get("gates", {}), indent=2, default=_jsonable))
    return EXIT_OK if ok else EXIT_FAILED


def _exponent_gates(report: dict, gates: dict) -> dict:
    out = {}
    for key, (target, tol) in gates.items():
        e = report["exponents"].get(key)
        if e is None:
            continue
        val = e["exponent"]
        out[key] = {
            "target": target,
            "tolerance": tol,
            "value": val,
            "passed": val is not None and abs(val - target) <= tol,
        }
    return out


def packet_gates(summary: dict) -> dict:
    gates = {}
    sig = summary.get("sigma_decay_slope")
    gates["sigma_decay"] = {"value": sig and sig["value"], "limit": SIGMA_SLOPE_MAX,
                            "passed": bool(sig) and sig["value"] <= SIGMA_SLOPE_MAX}
    d = summary["modulus_drift_per_decade"]["value"]
    gates["modulus_drift"] = {"value": d, "limit": MODULUS_DRIFT_MAX, "passed": abs(d) <= MODULUS_DRIFT_MAX}
    gap = summary["profile_modulus_gap"]["max_relative"]
    gates["profile_stability"] = {"value": gap, "limit": PROFILE_GAP_MAX,
                                  "passed": gap is not None and gap <= PROFILE_GAP_MAX}
    for v, r in summary["phase_slopes"]["rays"].items():
        ratio = r["ratio"]
        gates[f"phase_v{v}"] = {"value": ratio, "limit": [1 - PHASE_RATIO_TOL, 1 + PHASE_RATIO_TOL],
                               "passed": ratio is not None and abs(ratio - 1) <= PHASE_RATIO_TOL}
    return gates


# --------------------------------------------------------------------------
# subcommands


def _run(args, cfg, root: Path) -> int:
    m = cmd_run(cfg, root, args.resume)
    print(json.dumps({"stages": m.stages, **m.detail}, default=_jsonable))
    return EXIT_OK if m.ok else EXIT_BREAKDOWN


def _sweep(args, cfg, root: Path) -> int:
    report = cmd_sweep(cfg, args.eps, args.threads)
    report["gates"] = _exponent_gates(report, SWEEP_GATES)
    ok = all(g["passed"] for g in report["gates"].values())
    return _finish(root, "sweep", report, [_dump(root / "sweep.json", report)], cfg.digest(), ok)


def _nf_check(args, cfg, root: Path) -> int:
    report = cmd_nf_check(cfg, args.eps, args.threads)
    report["gates"] = _exponent_gates(report, {k: SWEEP_GATES[k] for k in ("residual", "residual_minus_cubic")})
    ok = all(g["passed"] for g in report["gates"].values())
    return _finish(root, "nf-check", report, [_dump(root / "nf_check.json", report)], cfg.digest(), ok)


def _series_pair(cfg, threads: int, with_linear: bool):
    if not with_linear:
        return an.packet_series(cfg), None
    if threads > 1:
        with ProcessPoolExecutor(max_workers=2) as pool:
            a = pool.submit(an.packet_series, cfg, False)
            b = pool.submit(an.packet_series, cfg, True)
            return a.result(), b.result()
    return an.packet_series(cfg), an.packet_series(cfg, True)


def _packet_test(args, cfg, root: Path) -> int:
    (states, gs), lin = _series_pair(cfg, args.threads, args.linear_control)
    rep = an.analyse_gamma(gs, cfg.phase_t_min)
    rep.summary["edge_mass_final"] = an.edge_mass(states[-1])
    if lin is not None:
        rep.summary["linear_control"] = an.analyse_gamma(lin[1], cfg.phase_t_min).summary
    rep.summary["gates"] = packet_gates(rep.summary)
    files = an.write_packet_outputs(root, rep)
    ok = all(g["passed"] for g in rep.summary["gates"].values())
    return _finish(root, "packet-test", rep.summary, files, cfg.digest(), ok)


def _asymptotics(args, cfg, root: Path) -> int:
    states, gs = an.packet_series(cfg)
    rep = an.analyse_gamma(gs, cfg.phase_t_min)
    t = gs.t_samples
    err = an.asymptotic_errors(states, rep.series.psi, gs.v_grid)
    gap = an.pointwise_packet_gap(states, gs.v_grid, gs)
    m = an.final_decade(t)
    slope, se = fit_slope(np.log(t[m]), np.log(err[m]))
    gslope, gse = fit_slope(np.log(t[m]), np.log(gap[m]))
    report = {
        "t": t,
        "sqrt_t_error": err,
        "pointwise_gap": gap,
        "error_slope": {"value": slope, "stderr": se},
        "pointwise_gap_slope": {"value": gslope, "stderr": gse},
        "gates": {"asymptotic_error": {"value": slope, "limit": ASYMPTOTIC_SLOPE_MAX,
                                       "passed": slope <= ASYMPTOTIC_SLOPE_MAX}},
    }
    ok = report["gates"]["asymptotic_error"]["passed"]
    return _finish(root, "asymptotics", report, [_dump(root / "asymptotics.json", report)], cfg.digest(), ok)


def _oracle(args, cfg, root: Path) -> int:
    report = cmd_oracle(args.n_points, cfg.seed, args.inject_fault)
    path = _dump(root / "oracle.json", report)
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['error']:.3e}")
    m = RunManifest(cfg.digest())
    m.stages["oracle"] = "ok" if report["passed"] else "failed"
    m.files[path.name] = sha256_file(path)
    m.write(root)
    return EXIT_OK if report["passed"] else EXIT_FAILED


COMMANDS = {
    "run": _run,
    "sweep": _sweep,
    "packet-test": _packet_test,
    "nf-check": _nf_check,
    "asymptotics": _asymptotics,
    "oracle": _oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory (default: output_dir from the config)")
    common.add_argument("--threads", metavar="K", type=int, default=1, help="worker processes for independent runs")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="holowaves", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="evolve and log diagnostics")
    run.add_argument("--resume", metavar="CHECKPOINT", help="continue from a checkpoint file")
    for name in ("sweep", "nf-check"):
        sp = sub.add_parser(name, parents=[common], help=f"{name} over an amplitude list")
        sp.add_argument("--eps", type=float, nargs="+", help="amplitudes (default: eps_list from the config)")
    pt = sub.add_parser("packet-test", parents=[common], help="wave-packet functional and profile")
    pt.add_argument("--linear-control", action="store_true", help="also analyse the free linear flow")
    sub.add_parser("asymptotics", parents=[common], help="compare with the asymptotic formula")
    orc = sub.add_parser("oracle", parents=[common], help="brute-force DFT oracle suite")
    orc.add_argument("--n-points", type=int, default=32)
    orc.add_argument("--inject-fault", choices=FAULTS, help="deliberately break one operator")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigRefusal as exc:
        print(json.dumps(exc.as_dict()), file=sys.stderr)
        return EXIT_REFUSED
    root = Path(args.out or cfg.output_dir)
    try:
        return COMMANDS[args.command](args, cfg, root)
    except ConfigRefusal as exc:
        _dump(root / "refusal.json", exc.as_dict())
        print(json.dumps(exc.as_dict()), file=sys.stderr)
        return EXIT_REFUSED
    except InfeasibleData as exc:
        _dump(root / "refusal.json", {"status": "refused", "code": "infeasible_data", "reason": str(exc)})
        return EXIT_REFUSED
    except (ChordArcViolation, NaNDetected) as exc:
        log.error("numerical breakdown: %s", exc)
        return EXIT_BREAKDOWN
    except StageError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
