"""``obstacle-lab`` command-line driver.

Exit codes: 0 ok, 2 configuration error, 3 solver non-convergence,
4 obstacle violates the scaling inequality.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import blowup, weiss
from .config import ExperimentConfig, load_config
from .errors import ConfigError, ConvergenceError, ObstacleLabError
from .grid import ScalarField
from .obstacles import verify_scaling_inequality
from .report import config_hash, dump_json
from .solver import SolveResult, solve

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_HYPOTHESIS = 0, 2, 3, 4


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out if args.out else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _mask_csv(res: SolveResult) -> str:
    g = res.u.grid
    rows = [f"{g.m},{g.L:.17g}"] + [",".join("1" if b else "0" for b in row) for row in res.contact_mask]
    return "\n".join(rows) + "\n"


def _write_solution(out: Path, res: SolveResult, chash: str, converged: bool) -> None:
    res.u.to_csv(out / "solution.csv")
    (out / "contact_mask.csv").write_text(_mask_csv(res))
    side = res.sidecar()
    side.update({"converged": converged, "config_hash": chash})
    (out / "solution.json").write_text(dump_json(side))


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    chash = config_hash(cfg.raw)
    try:
        res = solve(cfg.problem())
    except ConvergenceError as exc:
        if exc.partial is not None:
            _write_solution(out, exc.partial, chash, converged=False)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write_solution(out, res, chash, converged=True)
    print(f"solved: {res.iterations} sweeps, residual {res.final_residual:.3e}, "
          f"{res.contact_count} contact nodes -> {out}")
    return EXIT_OK


def _load_field(args, cfg: ExperimentConfig, out: Path) -> ScalarField:
    path = args.field or args.solution or out / "solution.csv"
    try:
        u = ScalarField.from_csv(Path(path))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load field {path}: {exc}") from exc
    if u.grid != cfg.grid:
        raise ConfigError(f"grid mismatch: field {path} has m={u.grid.m}, L={u.grid.L}; "
                          f"config has m={cfg.grid.m}, L={cfg.grid.L}")
    return u


def cmd_profile(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    u = _load_field(args, cfg, out)
    prof = weiss.profile(u, cfg.alpha, cfg.profile_radii)
    prof.to_csv(out / "profile.csv")
    prof.to_svg(out / "profile.svg")
    A = prof.A
    pair_diffs = (A[None, :] - A[:, None])[np.triu_indices(A.size, k=1)]
    summary = {
        "alpha": cfg.alpha,
        "config_hash": config_hash(cfg.raw),
        "radii_count": int(A.size),
        "A_min": float(A.min()),
        "A_max": float(A.max()),
        "min_pairwise_A_difference": float(pair_diffs.min()) if pair_diffs.size else 0.0,
        "monotonicity_violation": weiss.monotonicity_violation(prof),
        "drift_inequality_violation": weiss.weiss_violation(prof),
        "max_drift": float(prof.drifts.max()),
    }
    (out / "profile.json").write_text(dump_json(summary))
    print(f"profile: {A.size} radii, monotonicity violation {summary['monotonicity_violation']:.3e}, "
          f"drift-inequality violation {summary['drift_inequality_violation']:.3e} -> {out}")
    return EXIT_OK


def cmd_blowup(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    u = _load_field(args, cfg, out)
    rep = blowup.classify(u, cfg.alpha, cfg.blowup_radii, cfg.thresholds, cfg.blowup_grid, cfg.annulus)
    rep.to_json(out / "blowup.json", extra={"config_hash": config_hash(cfg.raw)})
    rep.to_csv(out / "blowup.csv")
    print(f"blow-up classification: {rep.classification} -> {out}")
    return EXIT_OK


def cmd_verify_obstacle(args) -> int:
    cfg = load_config(args.config)
    rep = verify_scaling_inequality(cfg.obstacle, cfg.verify_rays, cfg.verify_radii, alpha=cfg.alpha)
    if rep.passed:
        print(f"scaling inequality holds on {cfg.verify_rays} rays; worst_violation {rep.worst_violation:g}")
        return EXIT_OK
    r, R = rep.worst_pair
    print(f"scaling inequality violated: worst_violation {rep.worst_violation:.6g} on ray theta={rep.worst_ray:.6g} "
          f"between r={r:.6g} and R={R:.6g}")
    return EXIT_HYPOTHESIS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="obstacle-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "solve": (cmd_solve, "solve the obstacle problem of a config"),
        "profile": (cmd_profile, "tabulate the monotone quantity A(R) of a solution"),
        "blowup": (cmd_blowup, "rescale a solution toward the origin and classify the limit"),
        "verify-obstacle": (cmd_verify_obstacle, "check the obstacle's scaling inequality"),
    }
    for name, (fn, help_) in commands.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", help="output directory (default: the config's 'output')")
        if name in ("profile", "blowup"):
            p.add_argument("--solution", help="solution CSV (default: <out>/solution.csv)")
            p.add_argument("--field", help="field CSV to analyse instead of the solution")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ObstacleLabError as exc:
        # inadmissible data and radius errors trace back to the config too
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
