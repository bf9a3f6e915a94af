"""Command-line entry point: ``seqfair <command> [options]``.

Exit codes: 0 success, 1 input error, 2 infeasible / no policy / no selection.
Reports are JSON on stdout (or ``--output``). They are pure functions of the
inputs and flags; wall-clock time is added only with ``--timing``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .binary import (
    check_corollary1,
    check_es_condition,
    check_theorem3_condition,
    solve_es_policy,
)
from .distributions import BinaryJointPMF, CounterfactualModel, ScoreModel
from .dp import (
    EPSILON_CAP,
    DPConfig,
    feasibility_bound,
    solve_dp_policy,
)
from .errors import InfeasibleError, IngestError, SeqFairError, ValidationError
from .ingest import DatasetManifest, dumps, load, model_to_dict, read_policy, sniff_format
from .simulator import SimConfig, closed_form_outcome, simulate
from .thresholds import (
    ABOVE_MAX,
    SearchConfig,
    ThresholdPair,
    TimeConstraint,
    search_dp_thresholds,
    search_thresholds,
)

SWEEP_FIELDS = ("variable", "value", "target", "status", "accuracy", "p_e0", "p_e1", "disparity")


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Context:
    def __init__(self, args):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.warnings: list[str] = []

    def load(self, expect: tuple[type, ...]):
        args = self.args
        if args.input is None:
            raise IngestError("--input is required")
        path = Path(args.input)
        if not path.exists():
            raise IngestError("input file not found", path=path)
        if path.suffix == ".json":
            manifest = DatasetManifest.from_json(path)
            self.inputs[str(path)] = _digest(path)
        else:
            fmt = args.data_format or sniff_format(path)
            manifest = DatasetManifest(
                path, fmt, group_prior=args.group_prior, smoothing=args.smoothing
            )
        if args.smoothing and manifest.smoothing != args.smoothing:
            manifest = DatasetManifest(
                manifest.path, manifest.format, manifest.support, manifest.group_prior,
                manifest.group_counts, args.smoothing,
            )
        self.inputs[str(manifest.path)] = _digest(manifest.path)
        model = load(manifest)
        if not isinstance(model, expect):
            names = " or ".join(t.__name__ for t in expect)
            raise IngestError(f"{manifest.format} data gives a {type(model).__name__}; this command needs {names}")
        return model

    def report(self, **body) -> dict:
        rep = {
            "command": self.args.command,
            "argv": self.args.argv,
            "inputs": self.inputs,
            "version": __version__,
        }
        rep.update(body)
        if self.warnings:
            rep["warnings"] = self.warnings
        return rep


def _dp_config(args) -> DPConfig:
    if args.epsilon is None:
        raise ValidationError("--epsilon is required")
    return DPConfig(args.epsilon)


def _time_constraint(args):
    if args.horizon is None and args.psi is None:
        return None
    if args.horizon is None or args.psi is None:
        raise ValidationError("--horizon and --psi go together")
    return TimeConstraint(args.horizon, args.psi)


def _fairness(name: str) -> str:
    return name.replace("-", "_")


# ---------------------------------------------------------------------------
# commands


def cmd_estimate(ctx: Context) -> dict:
    model = ctx.load((BinaryJointPMF, ScoreModel, CounterfactualModel))
    return ctx.report(model=model_to_dict(model))


def cmd_solve_binary(ctx: Context) -> dict:
    pmf = ctx.load((BinaryJointPMF,))
    target = _fairness(ctx.args.fairness)
    sol = solve_es_policy(pmf, target)
    return ctx.report(
        fairness=target, policy=sol.policy.to_dict(), outcome=sol.outcome.to_dict()
    )


def cmd_solve_dp(ctx: Context) -> dict:
    model = ctx.load((CounterfactualModel,))
    config = _dp_config(ctx.args)
    target = _fairness(ctx.args.fairness)
    sol = solve_dp_policy(model, config, target)
    if sol.zero_policy:
        ctx.warnings.append(
            f"only the all-zero policy is {target}-fair at epsilon={config.epsilon}; nobody is ever selected"
        )
    return ctx.report(
        fairness=target,
        epsilon=config.epsilon,
        zero_policy=sol.zero_policy,
        policy=sol.policy.to_dict(),
        outcome=sol.outcome.to_dict(),
        diagnostics={"constraint_residual": sol.residual},
    )


def cmd_feasibility(ctx: Context) -> dict:
    model = ctx.load((BinaryJointPMF, CounterfactualModel))
    pmf = model.induced_pmf() if isinstance(model, CounterfactualModel) else model
    fb = feasibility_bound(pmf)
    if not fb.defined:
        ctx.warnings.append("a qualified-and-predicted cell is empty; the bound is infinite")
    return ctx.report(feasibility_bound=fb.epsilon, defined=fb.defined)


def _threshold_body(res) -> dict:
    return {
        "thresholds": res.pair.to_dict(),
        "strict_thresholds": {"tau0": res.strict[0], "tau1": res.strict[1]},
        "outcome": res.outcome.to_dict(),
        "fairness_gap": res.fairness_gap,
        "feasible_pairs": res.feasible_pairs,
    }


def cmd_thresholds(ctx: Context) -> dict:
    model = ctx.load((ScoreModel,))
    args = ctx.args
    cfg = SearchConfig(_fairness(args.fairness), args.gamma, _time_constraint(args))
    res = search_thresholds(model, cfg)
    body = _threshold_body(res)
    if args.csv_row:
        row = [cfg.fairness, cfg.gamma, args.horizon or "", args.psi or "",
               res.strict[0], res.strict[1], res.outcome.p_e0, res.outcome.p_e1, res.outcome.accuracy]
        Path(args.csv_row).write_text(",".join(map(str, row)) + "\n", encoding="utf-8")
    return ctx.report(fairness=cfg.fairness, gamma=cfg.gamma,
                      time_constraint=None if cfg.time_constraint is None
                      else {"horizon": args.horizon, "psi": args.psi}, **body)


def cmd_thresholds_dp(ctx: Context) -> dict:
    model = ctx.load((CounterfactualModel,))
    config = _dp_config(ctx.args)
    res = search_dp_thresholds(model, config, ctx.args.gamma)
    return ctx.report(
        epsilon=config.epsilon,
        gamma=ctx.args.gamma,
        thresholds=res.pair.to_dict(),
        strict_thresholds=dict(zip(("tau0", "tau1"), res.pair.strict(model.support))),
        outcome=res.outcome.to_dict(),
        diagnostics={"constraint_residual": res.residual},
        feasible_pairs=res.feasible_pairs,
    )


def _parse_tau(text: str) -> float:
    return ABOVE_MAX if text.lower() in ("above_max", "inf") else float(text)


def cmd_simulate(ctx: Context) -> dict:
    args = ctx.args
    model = ctx.load((BinaryJointPMF, ScoreModel, CounterfactualModel))
    dp = DPConfig(args.epsilon) if args.epsilon is not None else None
    if args.tau0 is not None or args.tau1 is not None:
        if args.tau0 is None or args.tau1 is None:
            raise ValidationError("--tau0 and --tau1 go together")
        policy = ThresholdPair(_parse_tau(args.tau0), _parse_tau(args.tau1))
    elif args.policy is not None:
        policy = read_policy(args.policy)
        ctx.inputs[str(args.policy)] = _digest(Path(args.policy))
    else:
        raise ValidationError("simulate needs --policy or --tau0/--tau1")
    cfg = SimConfig(args.trials, args.seed, args.positions, args.max_steps, args.workers)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = simulate(policy, model, cfg, dp)
    ctx.warnings.extend(str(w.message) for w in caught)
    closed = None
    if res.estimates is not None:
        closed = closed_form_outcome(policy, model, dp).to_dict()
    if args.histogram:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("steps", "count"))
        for k, v in sorted(res.steps_histogram.items()):
            w.writerow((k, v))
        Path(args.histogram).write_text(buf.getvalue(), encoding="utf-8")
    body = res.to_dict()
    body["seed"] = args.seed
    body["closed_form"] = closed
    return ctx.report(simulation=body)


def cmd_diagnose(ctx: Context) -> dict:
    model = ctx.load((BinaryJointPMF, CounterfactualModel))
    pmf = model.induced_pmf() if isinstance(model, CounterfactualModel) else model
    es = check_es_condition(pmf, ctx.args.tol)
    c1 = check_corollary1(pmf, ctx.args.tol)
    t3 = check_theorem3_condition(pmf, ctx.args.tol)
    fb = feasibility_bound(pmf)
    return ctx.report(
        diagnostics={
            "es_condition": {"residual": es.residual, "fair": es.fair, "degenerate": es.degenerate},
            "equal_opportunity": {
                "eo_residual": c1.eo_residual,
                "base_rate_residual": c1.base_rate_residual,
                "eo_holds": c1.eo_holds,
                "es_holds": c1.es_holds,
                "undefined_groups": list(c1.undefined_groups),
            },
            "independence_condition": {
                "residual": t3.independence_residual,
                "model_accuracy": t3.model_accuracy,
                "holds": t3.holds,
            },
            "feasibility_bound": {"epsilon": fb.epsilon, "defined": fb.defined},
        }
    )


def parse_grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError("grid must look like start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValidationError("grid count must be >= 1")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",") if v.strip()]


def sweep_rows(model, variable: str, grid, targets, gamma=0.0, horizon=None) -> list[dict]:
    rows = []
    for value in grid:
        for target in targets:
            row = {"variable": variable, "value": value, "target": target}
            try:
                if variable == "epsilon":
                    sol = solve_dp_policy(model, DPConfig(value), target)
                    o = sol.outcome
                    row["status"] = "zero_policy" if sol.zero_policy else "ok"
                else:
                    cfg = SearchConfig(target, gamma, TimeConstraint(horizon, value))
                    o = search_thresholds(model, cfg).outcome
                    row["status"] = "ok"
                row.update(accuracy=o.accuracy, p_e0=o.p_e0, p_e1=o.p_e1, disparity=o.disparity)
            except InfeasibleError as e:
                row.update(status=f"infeasible:{e.binding}", accuracy="", p_e0="", p_e1="", disparity="")
            rows.append(row)
    return rows


def cmd_sweep(ctx: Context) -> str:
    args = ctx.args
    grid = parse_grid(args.grid)
    if args.variable == "epsilon":
        model = ctx.load((CounterfactualModel,))
        targets = args.targets or ["es", "eo", "none"]
        rows = sweep_rows(model, "epsilon", grid, targets)
    else:
        model = ctx.load((ScoreModel,))
        if args.horizon is None:
            raise ValidationError("a psi sweep needs --horizon")
        targets = args.targets or ["es", "eo", "none"]
        rows = sweep_rows(model, "psi", grid, targets, args.gamma, args.horizon)
    buf = io.StringIO()
    w = csv.DictWriter(buf, SWEEP_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: format(v, ".17g") if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


COMMANDS = {
    "estimate": cmd_estimate,
    "solve-binary": cmd_solve_binary,
    "solve-dp": cmd_solve_dp,
    "feasibility": cmd_feasibility,
    "thresholds": cmd_thresholds,
    "thresholds-dp": cmd_thresholds_dp,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", default=argparse.SUPPRESS,
                        help="data CSV or dataset manifest (.json)")
    common.add_argument("--output", "-o", default=argparse.SUPPRESS,
                        help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (simulate)")
    common.add_argument("--data-format", choices=["binary_samples", "dp_samples", "score_samples", "fico_cdf"],
                        default=argparse.SUPPRESS, help="CSV schema (default: detect from header)")
    common.add_argument("--smoothing", type=float, default=argparse.SUPPRESS,
                        help="additive pseudo-count for empirical estimates")
    common.add_argument("--group-prior", type=float, default=argparse.SUPPRESS,
                        help="Pr{A=0} for fico_cdf tables read without a manifest")
    common.add_argument("--format", dest="report_format", choices=["json", "table"],
                        default=argparse.SUPPRESS, help="report rendering")
    common.add_argument("--timing", action="store_true", default=argparse.SUPPRESS,
                        help="add wall-clock seconds to the report (breaks bit-identical reruns)")

    p = argparse.ArgumentParser(prog="seqfair", description=__doc__.split("\n")[0], parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    p.set_defaults(input=None, output=None, seed=0, data_format=None, smoothing=0.0,
                   group_prior=None, report_format="json", timing=False)
    sub = p.add_subparsers(dest="command", required=True)

    eps_help = (f"privacy level (natural log); values above {EPSILON_CAP:g} use the "
                "noiseless limit where the reported attribute equals the true one")

    sub.add_parser("estimate", parents=[common], help="estimate a model from samples")

    s = sub.add_parser("solve-binary", parents=[common], help="fair post-processing of a binary classifier")
    s.add_argument("--fairness", choices=["es", "es-demographic", "none"], default="es")

    s = sub.add_parser("solve-dp", parents=[common], help="fair post-processing with a privatized attribute")
    s.add_argument("--epsilon", type=float, required=True, help=eps_help)
    s.add_argument("--fairness", choices=["es", "eo", "none"], default="es")

    sub.add_parser("feasibility", parents=[common], help="epsilon above which a nonzero fair DP policy exists")

    s = sub.add_parser("thresholds", parents=[common], help="group threshold search on a score model")
    s.add_argument("--fairness", choices=["es", "es-demographic", "eo", "sp", "none"], default="es")
    s.add_argument("--gamma", type=float, default=0.0)
    s.add_argument("--horizon", type=int, help="time-constraint horizon H (steps)")
    s.add_argument("--psi", type=float, help="max probability of no selection within H steps")
    s.add_argument("--csv-row", help="also write a one-line CSV summary here")

    s = sub.add_parser("thresholds-dp", parents=[common], help="threshold search on r(X, privatized A)")
    s.add_argument("--epsilon", type=float, required=True, help=eps_help)
    s.add_argument("--gamma", type=float, required=True)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo run of the selection process")
    s.add_argument("--policy", help="policy JSON with an alpha or beta object")
    s.add_argument("--tau0", help="group-0 threshold (score value or above_max)")
    s.add_argument("--tau1", help="group-1 threshold (score value or above_max)")
    s.add_argument("--epsilon", type=float, help=eps_help)
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--positions", type=int, default=1)
    s.add_argument("--max-steps", type=int, default=1_000_000)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--histogram", help="write the stopping-time histogram CSV here")

    s = sub.add_parser("diagnose", parents=[common], help="fairness diagnostics of a binary classifier")
    s.add_argument("--tol", type=float, default=1e-9)

    s = sub.add_parser("sweep", parents=[common], help="accuracy vs epsilon or psi, as CSV")
    s.add_argument("--variable", choices=["epsilon", "psi"], required=True)
    s.add_argument("--grid", required=True, help="start:stop:count or comma list")
    s.add_argument("--targets", nargs="+", choices=["es", "es_demographic", "eo", "sp", "none"])
    s.add_argument("--gamma", type=float, default=0.0)
    s.add_argument("--horizon", type=int)
    return p


def _render_table(rep: dict) -> str:
    lines = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in v:
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        else:
            lines.append(f"{prefix:<40} {v}")

    walk("", {k: v for k, v in rep.items() if k != "argv"})
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    if not hasattr(args, "epsilon"):
        args.epsilon = None
    ctx = Context(args)
    start = time.perf_counter()
    try:
        out = COMMANDS[args.command](ctx)
    except SeqFairError as e:
        print(f"seqfair {args.command}: {e}", file=sys.stderr)
        return e.exit_code
    if isinstance(out, dict):
        if args.timing:
            out["wall_clock_seconds"] = time.perf_counter() - start
        text = dumps(out) if args.report_format == "json" else _render_table(out)
        for w in out.get("warnings", []):
            print(f"warning: {w}", file=sys.stderr)
    else:
        text = out
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
