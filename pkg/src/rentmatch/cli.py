"""Command-line entry point: ``rentmatch <subcommand> ...``.

Exit codes: 0 success, 1 a check failed, 2 bad input (including a missing corpus).
Numeric flags such as ``--gamma 1/32`` are parsed as exact fractions.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import corpus as corpus_mod
from .accounting import Params
from .factorlp import analytic_params, check_grid, check_refined, solve_factor_lp
from .instance import (Instance, InstanceError, dumps_instance, gen_integrality_gap, gen_random,
                       gen_upper_triangular, load_instance, single_edge)
from .ocr import QueryError, load_trace
from .offline import StateSpaceTooLarge, exact_opt, lp_upper_bound
from .outer import dual_feasibility_audit, matched_count_samples, plan_queries, run_greedy
from .verify import check_ocr_guarantee, check_reversal, enumerate_exact_dmu, estimate_dmu

SCHEMA_VERSION = "rentmatch.report/1"
ALGORITHMS = ("pd-ocr", "pd-uniform", "greedy")
REPORT_COLUMNS = ["algorithm", "trials", "mean", "se", "exact_opt", "lp_bound", "ratio_opt", "ratio_lp",
                  "audit_min"]
REPORT_SCHEMA = {
    "version": SCHEMA_VERSION,
    "csv_columns": REPORT_COLUMNS,
    "summary": {
        "version": "string",
        "config": "ExperimentConfig as an object",
        "instance": {"num_offline": "int", "num_online": "int", "duration": "int", "num_edges": "int"},
        "exact_opt": "int or null when the state space is too large",
        "lp_bound": "float",
        "algorithms": "one object per CSV row, same keys",
    },
}


class CliError(Exception):
    pass


def fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def make_params(gamma=Fraction(1, 32), beta1=None, beta2=None, Gamma=None) -> Params:
    base = analytic_params(gamma)
    return Params(gamma=gamma,
                  beta1=base.beta1 if beta1 is None else beta1,
                  beta2=base.beta2 if beta2 is None else beta2,
                  Gamma=base.Gamma if Gamma is None else Gamma)


def resolve_instance(spec: str) -> Instance:
    """A file path, ``-``, or a generator spec: gap, single-edge,
    upper-triangular:N[,D], random:V,U,P,D[,SEED]."""
    name, _, args = spec.partition(":")
    parts = [a for a in args.split(",") if a]
    if name == "gap" and not parts:
        return gen_integrality_gap()
    if name == "single-edge" and not parts:
        return single_edge()
    if name == "upper-triangular" and parts:
        n = int(parts[0])
        return gen_upper_triangular(n, int(parts[1]) if len(parts) > 1 else n)
    if name == "random" and len(parts) in (4, 5):
        seed = int(parts[4]) if len(parts) == 5 else 0
        return gen_random(int(parts[0]), int(parts[1]), float(parts[2]), int(parts[3]), seed)
    return load_instance(spec)


def _num(x):
    if x is None:
        return None
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return float(x)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        x = float(x)
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def _open_out(path: Optional[str]):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


# ---------------------------------------------------------------- experiment

@dataclass
class ExperimentConfig:
    instance: str
    algorithms: list[str] = field(default_factory=lambda: ["pd-ocr"])
    gamma: str = "1/32"
    beta1: Optional[str] = None
    beta2: Optional[str] = None
    Gamma: Optional[str] = None
    trials: int = 10_000
    seed: int = 0
    out_csv: Optional[str] = None
    out_json: Optional[str] = None
    jobs: Optional[int] = None

    def __post_init__(self):
        if not self.algorithms:
            raise CliError("config: at least one algorithm is required")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise CliError(f"config: unknown algorithms {unknown}; choose from {list(ALGORITHMS)}")
        if self.trials < 1:
            raise CliError("config: trials must be >= 1")

    def params(self) -> Params:
        conv = (lambda s: None if s is None else Fraction(s))
        return make_params(Fraction(self.gamma), conv(self.beta1), conv(self.beta2), conv(self.Gamma))


def run_experiment(config: ExperimentConfig) -> tuple[list[dict], dict]:
    try:
        inst = resolve_instance(config.instance)
    except (InstanceError, OSError) as exc:
        raise CliError(f"instance {config.instance!r}: {exc}") from None
    try:
        opt = exact_opt(inst)
    except StateSpaceTooLarge:
        opt = None
    lp = float(lp_upper_bound(inst).value)
    params = config.params()
    plan = plan_queries(inst, params) if any(a.startswith("pd-") for a in config.algorithms) else None
    rows = []
    for algo in config.algorithms:
        if algo == "greedy":
            mean, se, trials, audit = float(run_greedy(inst)), 0.0, 1, None
        else:
            samples = matched_count_samples(inst, plan, algo[3:], config.trials, config.seed, jobs=config.jobs)
            trials = len(samples)
            mean = float(samples.mean())
            se = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
            audit = _num(dual_feasibility_audit(plan.ledger, inst, plan.params.Gamma))
        rows.append({
            "algorithm": algo, "trials": trials, "mean": mean, "se": se,
            "exact_opt": opt, "lp_bound": lp,
            "ratio_opt": (mean / opt if opt else 1.0) if opt is not None else None,
            "ratio_lp": mean / lp if lp > 0 else 1.0,
            "audit_min": audit,
        })
    summary = {
        "version": SCHEMA_VERSION,
        "config": asdict(config),
        "instance": {"num_offline": inst.num_offline, "num_online": inst.num_online,
                     "duration": inst.duration, "num_edges": inst.num_edges},
        "exact_opt": opt,
        "lp_bound": lp,
        "algorithms": rows,
    }
    return rows, summary


def write_report(rows: list[dict], summary: dict, config: ExperimentConfig) -> None:
    out, close = _open_out(config.out_csv)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])
    finally:
        if close:
            out.close()
    if config.out_json:
        Path(config.out_json).write_text(json.dumps(summary, indent=2, default=str) + "\n")


# ---------------------------------------------------------------- subcommands

def cmd_gen(a) -> int:
    if a.kind == "random":
        inst = gen_random(a.num_offline, a.num_online, a.edge_prob, a.d, a.seed)
    elif a.kind == "gap":
        inst = gen_integrality_gap()
    elif a.kind == "upper-triangular":
        inst = gen_upper_triangular(a.n, a.d)
    else:
        inst = single_edge()
    text = dumps_instance(inst) + "\n"
    if a.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(a.out).write_text(text)
    return 0


def cmd_run(a) -> int:
    inst = resolve_instance(a.instance)
    out, close = _open_out(a.out)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["trial", "matched_count", "primal", "dual", "audit_min"])
        if a.algo == "greedy":
            count = run_greedy(inst)
            for t in range(a.trials):
                w.writerow([t + 1, count, "", "", ""])
            return 0
        params = make_params(a.gamma, a.beta1, a.beta2, a.Gamma)
        plan = plan_queries(inst, params)
        primal, dual = plan.ledger.primal(), plan.ledger.dual()
        audit = dual_feasibility_audit(plan.ledger, inst, plan.params.Gamma)
        if a.ledger_dump:
            Path(a.ledger_dump).write_text(json.dumps(plan.ledger.to_dict(), indent=2) + "\n")
        samples = matched_count_samples(inst, plan, a.algo[3:], a.trials, a.seed, jobs=a.jobs)
        cells = [_fmt(_num(primal)), _fmt(_num(dual)), _fmt(_num(audit))]
        for t, c in enumerate(samples):
            w.writerow([t + 1, int(c), *cells])
    finally:
        if close:
            out.close()
    return 0


def cmd_opt(a) -> int:
    inst = resolve_instance(a.instance)
    opt = lp = None
    if a.mode in ("exact", "both"):
        try:
            opt = exact_opt(inst)
            print(f"exact_opt {opt}")
        except StateSpaceTooLarge as exc:
            print(f"exact_opt unavailable: {exc}", file=sys.stderr)
    if a.mode in ("lp", "both"):
        bound = lp_upper_bound(inst, exact=a.exact)
        lp = bound.value
        print(f"lp_upper_bound {_fmt(lp)}" + (f" ({bound.flag})" if bound.flag else ""))
    if opt is not None and lp is not None:
        ratio = Fraction(lp) / opt if a.exact and opt else (float(lp) / opt if opt else 1.0)
        print(f"ratio_lp_over_opt {_fmt(ratio)}")
    return 0


def cmd_verify_ocr(a) -> int:
    queries, file_d = load_trace(a.trace)
    d = a.d if a.d is not None else file_d
    if d is None:
        raise CliError("verify-ocr: the trace has no duration; pass --d")
    if a.mode == "exact":
        table = enumerate_exact_dmu(queries, d, a.selector)
    else:
        table = estimate_dmu(queries, d, a.trials, a.seed, a.selector, jobs=a.jobs)
    report = check_ocr_guarantee(table, a.gamma, z=a.z)
    out, close = _open_out(a.out)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["round", "vertex", "case", "dmu", "bound", "se", "z", "ok"])
        for c in report.cells:
            if c.case == "absent":
                continue
            w.writerow([c.round + 1, c.vertex + 1, c.case, _fmt(c.dmu), _fmt(c.bound), _fmt(c.se),
                        _fmt(c.z), int(c.ok)])
    finally:
        if close:
            out.close()
    verdict = "PASS" if report.passed else f"FAIL ({len(report.failures)} cells)"
    print(f"verdict {verdict}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_factor_lp(a) -> int:
    sol = solve_factor_lp(a.gamma, float(a.step))
    print(f"status {sol.status} iterations {sol.iterations}")
    print(f"Gamma* {sol.Gamma!r}\nbeta1 {sol.beta1!r}\nbeta2 {sol.beta2!r}")
    print(f"tight families {','.join(sol.tight) or '-'}")
    print(f"refined min residual {sol.refined.min_residual:.3e}")
    if not a.check_analytic:
        return 0
    p = analytic_params(a.gamma)
    grid, fine = check_grid(p, float(a.step)), check_refined(p, float(a.step))
    print(f"analytic Gamma {p.Gamma} beta1 {p.beta1} beta2 {p.beta2}")
    print(f"analytic grid min {grid.min_residual:.3e} refined min {fine.min_residual:.3e}")
    print(f"Gamma* - analytic {sol.Gamma - float(p.Gamma):.3e}")
    return 0 if grid.feasible() and fine.feasible() else 1


def _battery_cases(a, kind):
    root = Path(a.corpus)
    if not root.is_dir():
        raise CliError(f"corpus directory not found: {root}")
    if kind == "instances":
        return corpus_mod.load_instances(root)
    cases = corpus_mod.load_traces(root, "traces")
    if a.mode == "mc":
        cases += corpus_mod.load_traces(root, "long_traces")
    return cases


def cmd_battery(a) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    failures = 0
    if a.kind in ("ocr-guarantee", "reversal"):
        cases = _battery_cases(a, "traces")
        w.writerow(["case", "d", "mode", "ok", "detail"])
        for k, c in enumerate(cases):
            mode = "exact" if a.mode == "exact" else "mc"
            if a.kind == "ocr-guarantee":
                if mode == "exact":
                    table = enumerate_exact_dmu(c.queries, c.d)
                else:
                    table = estimate_dmu(c.queries, c.d, a.trials, a.seed + k, jobs=a.jobs)
                rep = check_ocr_guarantee(table, a.gamma, z=a.z)
                ok, detail = rep.passed, f"min_z={rep.min_z():.3g}"
            else:
                rep = check_reversal(c.queries, c.d, mode, a.trials, a.seed + k, a.z, jobs=a.jobs)
                ok = rep.passed
                detail = "max_abs_diff=" + _fmt(max((abs(v.diff) for v in rep.vertices), default=0))
            failures += not ok
            w.writerow([c.name, c.d, mode, int(ok), detail])
    else:
        params = make_params(a.gamma)
        cases = _battery_cases(a, "instances")
        w.writerow(["case", "ok", "detail"])
        for c in cases:
            inst = c.instance
            if a.kind == "dual-audit":
                plan = plan_queries(inst, params)
                audit = dual_feasibility_audit(plan.ledger, inst, plan.params.Gamma)
                balanced = plan.ledger.primal() == plan.ledger.dual()
                ok = audit >= -1e-9 and balanced
                detail = f"audit_min={_fmt(_num(audit))} primal_eq_dual={balanced}"
            else:
                opt, g = exact_opt(inst), run_greedy(inst)
                ok, detail = 2 * g >= opt, f"greedy={g} opt={opt}"
            failures += not ok
            w.writerow([c.name, int(ok), detail])
    print(f"verdict {'PASS' if not failures else f'FAIL ({failures} cases)'}", file=sys.stderr)
    return 0 if not failures else 1


def cmd_report(a) -> int:
    if a.schema:
        print(json.dumps(REPORT_SCHEMA, indent=2))
        return 0
    if a.config:
        doc = json.loads(Path(a.config).read_text())
        config = ExperimentConfig(**doc)
    else:
        if not a.instance:
            raise CliError("report: pass --instance or --config")
        config = ExperimentConfig(
            instance=a.instance, algorithms=a.algos.split(","), gamma=a.gamma, beta1=a.beta1, beta2=a.beta2,
            Gamma=a.Gamma, trials=a.trials, seed=a.seed, out_csv=a.out_csv, out_json=a.out_json, jobs=a.jobs)
    rows, summary = run_experiment(config)
    write_report(rows, summary, config)
    return 0


# ---------------------------------------------------------------- parser

def _add_params(p, as_text: bool = False):
    conv = str if as_text else fraction
    p.add_argument("--gamma", type=conv, default="1/32" if as_text else Fraction(1, 32))
    for flag in ("--beta1", "--beta2", "--Gamma"):
        p.add_argument(flag, type=conv, default=None, help="defaults to the analytic value for --gamma")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rentmatch", description="Online matching with reusable resources.")
    sub = ap.add_subparsers(dest="command", required=True)
    jobs_help = "worker processes (default: $RENTMATCH_JOBS or 1)"

    p = sub.add_parser("gen", help="write an instance as JSON")
    p.add_argument("--kind", choices=["random", "gap", "upper-triangular", "single-edge"], default="random")
    p.add_argument("--num-offline", type=int, default=4)
    p.add_argument("--num-online", type=int, default=10)
    p.add_argument("--edge-prob", type=float, default=0.5)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=3, help="size for upper-triangular")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="per-trial matched counts of one algorithm")
    p.add_argument("--instance", required=True, help="path, '-', or generator spec (gap, random:V,U,P,D,SEED, ...)")
    p.add_argument("--algo", choices=ALGORITHMS, default="pd-ocr")
    _add_params(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--ledger-dump", help="write the bookkeeping ledger as JSON")
    p.add_argument("--jobs", type=int, help=jobs_help)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("opt", help="offline optimum and LP bound")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", choices=["exact", "lp", "both"], default="both")
    p.add_argument("--exact", action="store_true", help="solve the LP in rational arithmetic")
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("verify-ocr", help="check the selector guarantee on one trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--trials", type=int, default=10**5)
    p.add_argument("--gamma", type=fraction, default=Fraction(1, 32))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--selector", choices=["ocr", "uniform"], default="ocr")
    p.add_argument("--z", type=float, default=3.0)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, help=jobs_help)
    p.set_defaults(func=cmd_verify_ocr)

    p = sub.add_parser("factor-lp", help="solve the factor-revealing LP")
    p.add_argument("--gamma", type=fraction, default=Fraction(1, 32))
    p.add_argument("--step", type=fraction, default=Fraction(1, 100))
    p.add_argument("--check-analytic", action="store_true")
    p.set_defaults(func=cmd_factor_lp)

    p = sub.add_parser("battery", help="run a checker over a corpus")
    p.add_argument("kind", choices=["ocr-guarantee", "reversal", "dual-audit", "greedy-bound"])
    p.add_argument("--corpus", default=str(corpus_mod.DEFAULT_CORPUS))
    p.add_argument("--mode", choices=["exact", "mc"], default="exact",
                   help="mc also covers the long traces")
    p.add_argument("--trials", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=fraction, default=Fraction(1, 32))
    p.add_argument("--z", type=float, default=3.0)
    p.add_argument("--jobs", type=int, help=jobs_help)
    p.set_defaults(func=cmd_battery)

    p = sub.add_parser("report", help="experiment summary: CSV plus JSON")
    p.add_argument("--schema", action="store_true", help="print the report schema and exit")
    p.add_argument("--config", help="ExperimentConfig as JSON")
    p.add_argument("--instance")
    p.add_argument("--algos", default="pd-ocr,greedy")
    _add_params(p, as_text=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p.add_argument("--jobs", type=int, help=jobs_help)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, InstanceError, QueryError, FileNotFoundError, ValueError) as exc:
        print(f"rentmatch {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
