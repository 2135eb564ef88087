"""Command-line front end: ``flipin {solve,analyze,simulate,rse,replay}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

from . import __version__
from .analysis import (advantage_intervals, benefit_curve, gdt_witness, key_points,
                       recommend_sigma)
from .equilibrium import solve, verify_equilibrium
from .errors import (ConfigError, DomainError, EdgeCaseRoutingError, InternalConsistencyError,
                     NoEquilibriumError)
from .flipsim import Strategy, run_campaigns, simulate_flipit
from .game import GameParameters
from .rse import RseConfig, rse_parameters, run_rse_experiment

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NO_EQUILIBRIUM = 4

SEED_ENV = "FLIPIN_SEED"


# -- output plumbing -------------------------------------------------------------

def fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _json_default(obj):
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def to_json(data) -> str:
    def clean(x):
        if isinstance(x, float) and not math.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        return x
    return json.dumps(clean(data), indent=2, default=_json_default) + "\n"


def csv_text(header: List[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class RunManifest:
    command: str
    argv: List[str]
    parameters: Optional[dict]
    master_seed: Optional[int]
    version: str = __version__
    outputs: List[str] = field(default_factory=list)


class Emitter:
    """Routes named outputs to files (plus a manifest) or to stdout."""

    def __init__(self, args, argv, params: Optional[GameParameters], seed: Optional[int] = None):
        self.manifest = RunManifest(args.command, list(argv),
                                    params.to_mapping() if params else None, seed)
        self.written = []

    def emit(self, text: str, path: Optional[str]):
        if path:
            write_atomic(Path(path), text)
            self.written.append(str(path))
        else:
            sys.stdout.write(text)

    def finish(self):
        if not self.written:
            return
        self.manifest.outputs = list(self.written)
        write_atomic(Path(self.written[0] + ".manifest.json"), to_json(asdict(self.manifest)))


# -- argument types ----------------------------------------------------------------

def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None


# -- commands -------------------------------------------------------------------------

_MODELS = {"bne": "bayesian", "malicious": "malicious", "inadvertent": "inadvertent",
           "corrupt": "corrupt"}


def cmd_solve(args, argv) -> int:
    params = GameParameters.load(args.config)
    model = _MODELS[args.model]
    if model == "inadvertent" and args.gamma is None:
        raise ConfigError("--model inadvertent requires --gamma")
    result = solve(params, model, gamma=args.gamma, rule=args.rule)
    if result is None:
        raise NoEquilibriumError(f"no closed-form {model} equilibrium at sigma={params.sigma:.6g}")
    record = result.to_record()
    if args.verify:
        mode = "bayesian" if model == "bayesian" else model
        report = verify_equilibrium(result.profile, params, mode, grid_step=args.grid_step)
        record["verification"] = {"verified": report.verified, "gains": report.gains,
                                  "deviations": report.deviations, "tolerance": report.tolerance,
                                  "grid_step": report.grid_step}
    out = Emitter(args, argv, params)
    out.emit(to_json(record), args.out)
    out.finish()
    return EXIT_OK


def _sigma_grid(args):
    if args.sigma_max <= args.sigma_min:
        raise ConfigError("--sigma-max must exceed --sigma-min")
    if args.sigma_steps == 1:
        return [args.sigma_min]
    step = (args.sigma_max - args.sigma_min) / (args.sigma_steps - 1)
    return [args.sigma_min + k * step for k in range(args.sigma_steps)]


def _interval_record(s):
    return {"text": str(s), "pieces": [
        {"lower": p.lower, "upper": p.upper, "lower_strict": p.lower_strict,
         "upper_strict": p.upper_strict} for p in s.pieces]}


def cmd_analyze(args, argv) -> int:
    params = GameParameters.load(args.config)
    out = Emitter(args, argv, params)
    if args.what == "curve":
        points = benefit_curve(params, args.model, _sigma_grid(args), gamma=args.gamma, rule=args.rule)
        text = csv_text(["sigma", "benefit", "model", "defined", "baseline", "branch", "ambiguous"],
                        ((p.sigma, p.benefit, args.model, int(p.defined), p.baseline, p.branch,
                          int(p.ambiguous)) for p in points))
    elif args.what == "points":
        pts = key_points(params, args.model, args.sigma_max)
        text = to_json({"A": list(pts.A), "B": list(pts.B), "C": list(pts.C)})
    elif args.what == "intervals":
        iv = advantage_intervals(params, form=args.form)
        text = to_json({"form": iv.form, "T_M": _interval_record(iv.t_m),
                        "T_I": _interval_record(iv.t_i), "T_C": _interval_record(iv.t_c),
                        "intersection": _interval_record(iv.intersection),
                        "warnings": list(iv.warnings)})
    elif args.what == "gdt":
        (s1, s2), (b1, b2) = gdt_witness(params, args.model)
        text = to_json({"sigma1": s1, "sigma2": s2, "benefit1": b1, "benefit2": b2})
    else:
        sigma, tag = recommend_sigma(params, args.model, args.sigma_max, gamma=args.gamma)
        text = to_json({"sigma": sigma, "rationale": tag})
    out.emit(text, args.out)
    out.finish()
    return EXIT_OK


def cmd_simulate(args, argv) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    if args.what == "flipit":
        tl = simulate_flipit(args.alpha, args.beta, args.horizon, seed)
        out = Emitter(args, argv, None, seed)
        out.emit(to_json({"alpha": args.alpha, "beta": args.beta, "horizon": args.horizon,
                          "seed": seed, "defender_fraction": tl.defender_fraction,
                          "defender_flips": tl.flip_count(0), "attacker_flips": tl.flip_count(1)}),
                 args.out)
        if args.segments:
            out.emit(csv_text(["start", "end", "owner"],
                              ((s, e, o.name.lower()) for s, e, o in tl.segments())), args.segments)
        out.finish()
        return EXIT_OK

    params = GameParameters.load(args.config)
    strategies = [Strategy(s) for s in args.strategies] if args.strategies else list(Strategy)
    results = run_campaigns(params, args.runs, seed, strategies)
    rows = []
    for strategy, res in results.items():
        for rec, cum in zip(res.records, res.cumulative):
            rows.append((rec.run, rec.insider_type.value, rec.gamma, strategy.value, rec.benefit,
                         float(cum)))
    out = Emitter(args, argv, params, seed)
    out.emit(csv_text(["run", "insider_type", "gamma", "strategy", "benefit", "cumulative"], rows),
             args.out)
    out.finish()
    for strategy, res in results.items():
        print(f"total {strategy.value}: {res.total:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_rse(args, argv) -> int:
    params = GameParameters.load(args.config) if args.config else rse_parameters()
    seed = args.seed if args.seed is not None else default_seed()
    config = RseConfig(params=params, horizon=args.horizon, dt=args.dt,
                       experiment_index=args.experiment, master_seed=seed)
    kinds = ("bayesian", "basic") if args.strategy == "both" else (args.strategy,)
    results = {k: run_rse_experiment(config, k) for k in kinds}
    rows = []
    for kind, res in results.items():
        for entry, run, cu, cr in zip(res.schedule, res.runs, res.cum_u_d, res.cum_rmse):
            rows.append((entry.sim, entry.insider_type.value, entry.gamma, kind, run.u_d, run.rmse,
                         float(cu), float(cr)))
    totals = {"experiment": args.experiment, "alignment_ratio": 1.0 / args.experiment,
              "master_seed": seed,
              "totals": {k: {"u_d": r.total_u_d, "rmse": r.total_rmse} for k, r in results.items()}}
    out = Emitter(args, argv, params, seed)
    out.emit(csv_text(["sim", "insider_type", "gamma", "strategy", "u_d", "rmse", "cum_u_d",
                       "cum_rmse"], rows), args.out)
    if args.totals:
        out.emit(to_json(totals), args.totals)
    else:
        sys.stderr.write(to_json(totals))
    out.finish()
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        recorded = manifest["argv"]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read manifest {args.manifest}: {exc}") from None
    if recorded and recorded[0] == "replay":
        raise ConfigError("a manifest cannot replay another replay")
    return main(recorded)


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flipin", description="FlipIt game with an insider: "
                                "equilibria, guidance analysis and simulations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="closed-form equilibrium for a parameter file")
    s.add_argument("config")
    s.add_argument("--model", choices=sorted(_MODELS), default="bne")
    s.add_argument("--gamma", type=float, help="leak fraction for --model inadvertent")
    s.add_argument("--rule", choices=("printed", "sign"), default="printed",
                   help="Bayesian branch conditions: as printed, or derived from the insider's sign")
    s.add_argument("--verify", action="store_true", help="append the best-response grid report")
    s.add_argument("--grid-step", type=positive_float, default=1e-3)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    a = sub.add_parser("analyze", help="benefit curves, key points, intervals, GDT, recommendation")
    a.add_argument("config")
    a.add_argument("what", choices=("curve", "points", "intervals", "gdt", "recommend"))
    a.add_argument("--model", choices=("bayesian", "malicious", "inadvertent", "corrupt"),
                   default="bayesian")
    a.add_argument("--gamma", type=float)
    a.add_argument("--rule", choices=("printed", "sign"), default="printed")
    a.add_argument("--form", choices=("reciprocal", "literal"), default="reciprocal")
    a.add_argument("--sigma-min", type=positive_float, default=0.1)
    a.add_argument("--sigma-max", type=positive_float, default=10.0)
    a.add_argument("--sigma-steps", type=positive_int, default=100)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("simulate", help="FlipIt timeline or insider campaign")
    msub = m.add_subparsers(dest="what", required=True)
    f = msub.add_parser("flipit")
    f.add_argument("--alpha", type=float, required=True)
    f.add_argument("--beta", type=float, required=True)
    f.add_argument("--horizon", type=positive_float, default=1e4)
    f.add_argument("--seed", type=int)
    f.add_argument("--out")
    f.add_argument("--segments", help="also write ownership segments as CSV")
    c = msub.add_parser("campaign")
    c.add_argument("config")
    c.add_argument("--runs", type=positive_int, default=100)
    c.add_argument("--seed", type=int)
    c.add_argument("--strategies", nargs="+", choices=[s.value for s in Strategy])
    c.add_argument("--out")
    for q in (f, c):
        q.set_defaults(func=cmd_simulate, command="simulate")

    r = sub.add_parser("rse", help="remote state estimation experiment")
    r.add_argument("config", nargs="?", help="parameter file (default: the experiment's values)")
    r.add_argument("--experiment", type=int, choices=(1, 2, 3, 4), default=1)
    r.add_argument("--strategy", choices=("bayesian", "basic", "both"), default="both")
    r.add_argument("--seed", type=int)
    r.add_argument("--horizon", type=positive_float, default=100.0)
    r.add_argument("--dt", type=positive_float, default=0.1)
    r.add_argument("--out")
    r.add_argument("--totals")
    r.set_defaults(func=cmd_rse)

    x = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    x.add_argument("manifest")
    x.set_defaults(func=cmd_replay)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, argv)
    except ConfigError as exc:
        print(f"flipin: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EdgeCaseRoutingError as exc:
        print(f"flipin: edge-case routing: {exc} (use --model {exc.solver})", file=sys.stderr)
        return EXIT_DOMAIN
    except DomainError as exc:
        print(f"flipin: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NoEquilibriumError, InternalConsistencyError) as exc:
        print(f"flipin: no equilibrium: {exc}", file=sys.stderr)
        return EXIT_NO_EQUILIBRIUM


if __name__ == "__main__":
    sys.exit(main())
