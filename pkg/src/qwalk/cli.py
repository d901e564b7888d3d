"""
Command-line front end.

    qwalk run       --config exp.json [--csv out.csv]
    qwalk sweep-q   --config exp.json --q 0 0.25 0.5 [--csv out.csv]
    qwalk absorb    --config exp.json
    qwalk fit       --config exp.json --measured data.csv
    qwalk apparatus elements|loss|visibility|calibrate ...

Results go to stdout as JSON, diagnostics to stderr. Exit codes: 0 success,
2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analysis import fit_decoherence, spread_stats, spreading_exponent
from .apparatus import (
    CalibrationModel,
    element_count,
    misalignment_to_visibility,
    q_from_visibility,
    survival_probability,
    visibility_from_q,
)
from .config import ConfigError, ExperimentConfig, load_config
from .lattice import Distribution, WindowOverflowError, evolve
from .trajectories import sample_trajectories

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

# measured CSVs carry ~12 significant digits per row
CSV_MASS_TOL = 1e-6


class InputError(ValueError):
    pass


def _dist_json(d: Distribution) -> dict[str, list]:
    nz = d.nonzero()
    return {"positions": list(nz.support), "probabilities": [float(p) for p in nz.probabilities]}


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


def simulate(cfg: ExperimentConfig) -> dict[str, Any]:
    """Run ``cfg`` and build its result envelope."""
    schedule = cfg.schedule()
    if cfg.mode == "trajectories":
        ens = sample_trajectories(schedule, cfg.samples, cfg.seed)
        dists = list(ens.per_step)
        cumulative = list(ens.absorbed_fraction)
        remaining = [1.0 - c for c in cumulative]
    else:
        rec = evolve(schedule, mode=cfg.mode)
        dists = list(rec.distributions)
        cumulative = [0.0, *rec.cumulative]
        remaining = list(rec.remaining)

    per_step = []
    stats = []
    for k, d in enumerate(dists):
        if d.mass > 0.0:
            s = spread_stats(d, k)
            mean, sd = s.mean, s.stddev
            if k >= 1 and sd > 0.0:
                stats.append(s)
        else:
            mean = sd = None
        per_step.append(
            {
                "step": k,
                "distribution": _dist_json(d),
                "mean": mean,
                "stddev": sd,
                "stddev_over_n": sd / k if (sd is not None and k) else None,
                "absorbed": cumulative[k] - cumulative[k - 1] if k else 0.0,
                "cumulative_absorbed": cumulative[k],
            }
        )
    try:
        exponent = spreading_exponent(stats)
    except ValueError:
        exponent = None
    return {
        "tool_version": __version__,
        "seed": cfg.seed,
        "config_echo": cfg.to_dict(),
        "per_step": per_step,
        "summary": {
            "final_distribution": _dist_json(dists[-1]),
            "spreading_exponent": exponent,
            "transmission": remaining[-1],
        },
    }


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def _write_csv(path: str, header: Sequence[str], rows: list[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in row])


def _config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(mode=args.mode, seed=args.seed, samples=args.samples)


def cmd_run(args: argparse.Namespace) -> int:
    env = simulate(_config(args))
    if args.csv:
        rows = [
            (s["step"], j, float(p))
            for s in env["per_step"]
            for j, p in zip(s["distribution"]["positions"], s["distribution"]["probabilities"])
        ]
        _write_csv(args.csv, ("step", "position", "probability"), rows)
    print(_dumps(env))
    return EXIT_OK


def cmd_sweep_q(args: argparse.Namespace) -> int:
    base = _config(args)
    for q in args.q:
        if not 0.0 <= q <= 1.0:
            raise ConfigError("q", f"sweep value {q!r} outside [0, 1]")
    mode = "density" if base.mode == "pure" else base.mode
    envelopes = [simulate(base.with_overrides(q=float(q), mode=mode)) for q in args.q]
    if args.csv:
        rows = [
            (float(q), j, float(p))
            for q, env in zip(args.q, envelopes)
            for j, p in zip(
                env["summary"]["final_distribution"]["positions"],
                env["summary"]["final_distribution"]["probabilities"],
            )
        ]
        _write_csv(args.csv, ("q", "position", "probability"), rows)
    print(_dumps(envelopes))
    return EXIT_OK


def cmd_absorb(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if not cfg.absorbers:
        raise ConfigError("absorbers", "absorb needs at least one absorber")
    print(_dumps(simulate(cfg)))
    return EXIT_OK


def read_measured_csv(path: str | Path) -> Distribution:
    """Parse a ``position,probability`` CSV into a normalized distribution."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"measured: cannot read {path}: {exc.strerror or exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["position", "probability"]:
            raise InputError("measured: header must be 'position,probability'")
        probs: dict[int, float] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise InputError(f"measured: line {lineno} must have 2 columns")
            try:
                j, p = int(row[0]), float(row[1])
            except ValueError:
                raise InputError(f"measured: line {lineno} is not 'int,float'") from None
            if not math.isfinite(p) or p < 0:
                raise InputError(f"measured: line {lineno} has invalid probability {row[1]!r}")
            if j in probs:
                raise InputError(f"measured: duplicate position {j} on line {lineno}")
            probs[j] = p
    if not probs:
        raise InputError("measured: no data rows")
    total = sum(probs.values())
    if abs(total - 1.0) > CSV_MASS_TOL:
        raise InputError(f"measured: probabilities sum to {total:.12g}, expected 1")
    return Distribution.from_mapping(probs)


def cmd_fit(args: argparse.Namespace) -> int:
    cfg = _config(args)
    measured = read_measured_csv(args.measured)
    res = fit_decoherence(measured, cfg.schedule())
    print(_dumps({"q_hat": res.q_hat, "residual": res.residual, "evaluations": res.evaluations}))
    return EXIT_OK


def cmd_apparatus(args: argparse.Namespace) -> int:
    what = args.what
    if what == "elements":
        this, tri = element_count(args.n)
        out: dict[str, Any] = {"n": args.n, "this_scheme": this, "triangular_scheme": tri}
    elif what == "loss":
        out = {"n": args.n, "loss_per_step": args.rate,
               "survival": survival_probability(args.n, args.rate)}
    elif what == "visibility":
        out = {"q": args.q, "visibility": visibility_from_q(args.q)}
    else:
        model = CalibrationModel(args.zero_angle, floor=args.floor)
        if args.angle is not None:
            vis = misalignment_to_visibility(args.angle, model)
            out = {"angle": args.angle, "visibility": vis}
        else:
            vis = args.visibility
            out = {"visibility": vis}
        out["q"] = q_from_visibility(vis)
        out["sigma_angle"] = model.sigma
    print(_dumps(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment JSON config")
    common.add_argument("--csv", help="write long-format CSV results here")
    common.add_argument("--seed", type=_u64, help="override the config seed")
    common.add_argument("--mode", choices=("pure", "density", "trajectories"))
    common.add_argument("--samples", type=int, help="trajectories per run")

    p = argparse.ArgumentParser(prog="qwalk", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("run", parents=[common], help="run a walk").set_defaults(func=cmd_run)
    sp = sub.add_parser("sweep-q", parents=[common], help="rerun at each dephasing value")
    sp.add_argument("--q", type=float, nargs="*", default=[], help="dephasing values")
    sp.set_defaults(func=cmd_sweep_q)
    sub.add_parser("absorb", parents=[common], help="walk with absorbers").set_defaults(
        func=cmd_absorb
    )
    fp = sub.add_parser("fit", parents=[common], help="fit q to a measured distribution")
    fp.add_argument("--measured", required=True, help="CSV with position,probability")
    fp.set_defaults(func=cmd_fit)

    ap = sub.add_parser("apparatus", help="optical-apparatus model")
    asub = ap.add_subparsers(dest="what", required=True)
    e = asub.add_parser("elements")
    e.add_argument("--n", type=int, required=True)
    lo = asub.add_parser("loss")
    lo.add_argument("--n", type=int, required=True)
    lo.add_argument("--rate", type=float, default=0.01)
    vi = asub.add_parser("visibility")
    vi.add_argument("--q", type=float, required=True)
    ca = asub.add_parser("calibrate")
    g = ca.add_mutually_exclusive_group(required=True)
    g.add_argument("--angle", type=float, help="relative displacer angle, degrees")
    g.add_argument("--visibility", type=float)
    ca.add_argument("--zero-angle", type=float, default=10.5)
    ca.add_argument("--floor", type=float, default=0.005)
    ap.set_defaults(func=cmd_apparatus)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        print(f"qwalk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (WindowOverflowError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"qwalk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"qwalk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
