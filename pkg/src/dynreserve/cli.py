"""Command-line entry point: solve, gen, oracle, ic-check, bench, gap-curve."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import io, kernels
from .auction import dominance_check, verify_table1
from .cd2rp import DEFAULT_SAMPLE_SIZE, CoordinateInfeasible, solve_cd2rp
from .d3rp import D3rpConfig, heuristic_alpha, solve_d3rp
from .oracle import MAX_EXHAUSTIVE_N, exhaustive
from .parallel import default_shards, plan
from .pricing import reserve_prices
from .problem import (GeneralProblem, PlatformConstraints, compile_domain_arrays,
                      generate_domain, generate_synthetic)

log = logging.getLogger("dynreserve")

BENCH_COLUMNS = ("n", "l", "shards", "sweeps", "wall_ms", "relative_gap")
GAP_COLUMNS = ("iteration", "algo", "alpha", "dual_value", "primal_value",
               "relative_gap", "best_relative_gap")

# thresholds used when `gen`/`gap-curve` build synthetic domain traffic
DEFAULT_TCTR = 0.06
DEFAULT_TGPM = 50.0
DEFAULT_TPV_FRACTION = 0.5


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    input: str
    mode: str = "domain"
    tctr: Optional[float] = None
    tgpm: Optional[float] = None
    tpv: Optional[float] = None
    bounds: Optional[list] = None
    algo: str = "cd2rp"
    alpha: Optional[float] = None
    max_iter: int = 100
    max_sweeps: int = 100
    tol: Optional[float] = None
    candidate_mode: Optional[str] = None
    sample_size: int = DEFAULT_SAMPLE_SIZE
    shards: int = 1
    seed: int = 0
    out_dir: str = "out"
    backend: str = field(default_factory=kernels.active)

    def validate(self):
        if self.mode not in ("domain", "general"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        thresholds = {"--tctr": self.tctr, "--tgpm": self.tgpm, "--tpv": self.tpv}
        if self.mode == "domain":
            missing = [k for k, v in thresholds.items() if v is None]
            if missing:
                raise ConfigError(f"domain mode requires {', '.join(missing)}")
            if self.bounds is not None:
                raise ConfigError("--bounds is only valid in general mode")
        else:
            given = [k for k, v in thresholds.items() if v is not None]
            if given:
                raise ConfigError(f"general mode does not accept {', '.join(given)}")
            if not self.bounds:
                raise ConfigError("general mode requires --bounds")
            if self.algo == "d3rp" and self.alpha is None:
                raise ConfigError("d3rp on a general-form problem requires --alpha")
        if self.algo not in ("cd2rp", "d3rp"):
            raise ConfigError(f"unknown algorithm {self.algo!r}")
        if self.shards < 1:
            raise ConfigError("--shards must be >= 1")
        return self

    def platform(self) -> PlatformConstraints:
        return PlatformConstraints(self.tctr, self.tgpm, self.tpv)


def _floats(text: str) -> list:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list:
    return [int(float(t)) for t in text.split(",") if t.strip()]


def load_problem(cfg: RunConfig):
    """Parse the input file; returns (problem, domain columns or None)."""
    if cfg.mode == "domain":
        ids, bid, ctr, gpm = io.read_domain_csv(cfg.input)
        return compile_domain_arrays(bid, ctr, gpm, cfg.platform(), ids=ids), (ids, bid, ctr, gpm)
    ids, c, b = io.read_general_csv(cfg.input)
    if b.shape[1] != len(cfg.bounds):
        raise ConfigError(f"input has {b.shape[1]} constraint columns but "
                          f"{len(cfg.bounds)} bounds were given")
    return GeneralProblem(c=c, b=b, bounds=cfg.bounds, ids=ids), None


def run_solver(problem: GeneralProblem, cfg: RunConfig):
    shard_plan = plan(problem.n, cfg.shards)
    if cfg.algo == "d3rp":
        alpha = cfg.alpha if cfg.alpha is not None else heuristic_alpha(problem)
        return solve_d3rp(problem, D3rpConfig(alpha, cfg.max_iter, cfg.tol), shard_plan)
    return solve_cd2rp(problem, cfg.max_sweeps, cfg.tol or 0.0, shard_plan,
                       cfg.candidate_mode, cfg.sample_size)


def cmd_solve(cfg: RunConfig) -> int:
    cfg.validate()
    with kernels.using(cfg.backend):
        problem, domain = load_problem(cfg)
        log.info("loaded %d records, %d constraints", problem.n, problem.n_constraints)
        duals, final, report = run_solver(problem, cfg)
    out = io.ensure_dir(cfg.out_dir)
    doc = report.to_dict()
    doc["config"] = asdict(cfg)
    doc["final_lambdas"] = duals.lambdas.tolist()
    doc["n"] = problem.n
    doc["bounds"] = problem.bounds.tolist()
    sol = report.solution
    if sol is not None:
        io.write_selection_csv(out / "selection.csv", problem.ids, sol.x)
    if domain is not None:
        ids, bid, ctr, gpm = domain
        lam = report.solution_duals if report.solution_duals is not None else duals
        r = reserve_prices(ctr, gpm, cfg.platform(), lam)
        io.write_reserve_csv(out / "reserve_prices.csv", ids, r, bid > r)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
    if not report.feasible:
        slack = final.cons - problem.bounds
        worst = int(np.argmin(slack))
        print(f"infeasible: constraint {worst + 1} violated by {-slack[worst]!r}", file=sys.stderr)
        return 3
    print(json.dumps({"feasible": True, "primal_value": sol.primal_value,
                      "selected": int(sol.x.sum()), "relative_gap": report.relative_gap,
                      "lambdas": duals.lambdas.tolist(), "out_dir": str(out)}))
    return 0


def _config_from_args(args) -> RunConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        return RunConfig(**doc.get("config", doc))
    shards = args.shards if args.shards is not None else default_shards()
    return RunConfig(
        input=args.input, mode=args.mode, tctr=args.tctr, tgpm=args.tgpm, tpv=args.tpv,
        bounds=_floats(args.bounds) if args.bounds else None, algo=args.algo,
        alpha=args.alpha, max_iter=args.max_iter, max_sweeps=args.max_sweeps, tol=args.tol,
        candidate_mode=args.candidate_mode, sample_size=args.sample_size, shards=shards,
        seed=args.seed, out_dir=args.out_dir, backend=args.backend or kernels.active(),
    )


def build_synthetic(kind: str, n: int, l: int, seed: int, fractions=None,
                    tctr=DEFAULT_TCTR, tgpm=DEFAULT_TGPM, tpv=None) -> GeneralProblem:
    if kind == "domain":
        bid, ctr, gpm = generate_domain(n, seed)
        tpv = tpv if tpv is not None else DEFAULT_TPV_FRACTION * n
        return compile_domain_arrays(bid, ctr, gpm, PlatformConstraints(tctr, tgpm, tpv))
    return generate_synthetic(n, l, seed, fractions, kind=kind)


def cmd_gen(args) -> int:
    if args.kind == "domain":
        bid, ctr, gpm = generate_domain(args.n, args.seed)
        io.write_domain_csv(args.out, [str(i) for i in range(args.n)], bid, ctr, gpm)
        print(json.dumps({"out": args.out, "mode": "domain"}))
        return 0
    fractions = _floats(args.fractions) if args.fractions else None
    p = generate_synthetic(args.n, args.l, args.seed, fractions, kind=args.kind)
    io.write_general_csv(args.out, [str(i) for i in range(p.n)], p.c, p.b)
    bounds = p.bounds.tolist()
    print(json.dumps({"out": args.out, "mode": "general", "bounds": bounds,
                      "flag": "--bounds=" + ",".join(repr(b) for b in bounds)}))
    return 0


def cmd_oracle(args) -> int:
    cfg = RunConfig(input=args.input, mode=args.mode, tctr=args.tctr, tgpm=args.tgpm,
                    tpv=args.tpv, bounds=_floats(args.bounds) if args.bounds else None)
    cfg.validate()
    problem, _ = load_problem(cfg)
    if problem.n > MAX_EXHAUSTIVE_N:
        print(f"instance too large for exhaustive oracle (N={problem.n} > {MAX_EXHAUSTIVE_N})",
              file=sys.stderr)
        return 2
    res = exhaustive(problem)
    print(json.dumps({"opt_value": res.opt_value,
                      "opt_x": [int(v) for v in res.opt_x],
                      "selected_ids": [problem.ids[i] for i in np.flatnonzero(res.opt_x)],
                      "feasible_count": res.feasible_count}))
    return 0


def cmd_ic_check(args) -> int:
    ok = True
    for row in verify_table1():
        status = "ok" if row.ok else "MISMATCH"
        ok &= row.ok
        print(f"row {row.row:2d}  {row.ordering:<16} utility {row.observed[0]} "
              f"optimal {row.observed[1]}  expected {row.expected[0]}/{row.expected[1]}  {status}")
    res = dominance_check(args.trials, args.seed, negative_control=args.negative_control)
    print(f"dominance: trials={res.trials} violations={res.violations}"
          + (" (negative control)" if args.negative_control else ""))
    if res.counterexample is not None:
        print(f"counterexample: {res.counterexample} gain={res.counterexample_gain!r}")
    if args.negative_control:
        # the harness is expected to find a violation here
        return 0 if ok and res.violations > 0 else 1
    return 0 if ok and res.passed else 1


def bench_rows(scales, l, shards_list, max_sweeps, seed, kind="pack", backend=None):
    """One CD2RP run per (scale, shard count); yields dicts keyed by BENCH_COLUMNS."""
    seeds = np.random.SeedSequence(seed).spawn(len(scales))
    with kernels.using(backend or kernels.active()):
        for n, ss in zip(scales, seeds):
            problem = build_synthetic(kind, n, l, int(ss.generate_state(1)[0]))
            for shards in shards_list:
                t0 = time.perf_counter()
                _, _, rep = solve_cd2rp(problem, max_sweeps, 0.0, plan(n, shards))
                wall = (time.perf_counter() - t0) * 1e3
                yield {"n": n, "l": problem.n_constraints, "shards": shards,
                       "sweeps": rep.iterations, "wall_ms": wall,
                       "relative_gap": rep.relative_gap}


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def cmd_bench(args) -> int:
    fh, close = _open_out(args.out)
    try:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for row in bench_rows(_ints(args.scales), args.l, _ints(args.shards_list),
                              args.max_sweeps, args.seed, args.kind, args.backend):
            w.writerow({k: ("" if v is None else v) for k, v in row.items()})
            fh.flush()
    finally:
        if close:
            fh.close()
    return 0


def gap_curve_rows(problem: GeneralProblem, iterations: int, alphas, shards: int = 1):
    """Per-iteration gaps for D3RP at each alpha and for CD2RP, run for exactly ``iterations``."""
    if iterations <= 0:
        return []
    shard_plan = plan(problem.n, shards)
    rows = []
    for alpha in alphas:
        _, _, rep = solve_d3rp(problem, D3rpConfig(alpha, iterations), shard_plan,
                               early_stop=False)
        rows += [_gap_row(t, "d3rp", alpha) for t in rep.trace]
    _, _, rep = solve_cd2rp(problem, iterations, 0.0, shard_plan, early_stop=False)
    rows += [_gap_row(t, "cd2rp", None) for t in rep.trace]
    return rows


def _gap_row(t, algo, alpha):
    return {"iteration": t.iteration, "algo": algo, "alpha": alpha,
            "dual_value": t.dual_value, "primal_value": t.primal_value,
            "relative_gap": t.relative_gap, "best_relative_gap": t.best_relative_gap}


def cmd_gap_curve(args) -> int:
    if args.input:
        cfg = RunConfig(input=args.input, mode=args.mode, tctr=args.tctr, tgpm=args.tgpm,
                        tpv=args.tpv, bounds=_floats(args.bounds) if args.bounds else None)
        cfg.validate()
        problem, _ = load_problem(cfg)
    else:
        problem = build_synthetic(args.kind, args.n, args.l, args.seed,
                                  tctr=args.tctr or DEFAULT_TCTR,
                                  tgpm=args.tgpm or DEFAULT_TGPM, tpv=args.tpv)
    if args.alpha_grid:
        alphas = _floats(args.alpha_grid)
    else:
        base = heuristic_alpha(problem)
        alphas = [m * base for m in _floats(args.alpha_scale)]
    shards = args.shards if args.shards is not None else 1
    fh, close = _open_out(args.out)
    try:
        w = csv.DictWriter(fh, fieldnames=GAP_COLUMNS)
        w.writeheader()
        for row in gap_curve_rows(problem, args.iterations, alphas, shards):
            w.writerow({k: (repr(v) if isinstance(v, float) else "" if v is None else v)
                        for k, v in row.items()})
    finally:
        if close:
            fh.close()
    return 0


def _add_domain_flags(p):
    p.add_argument("--tctr", type=float)
    p.add_argument("--tgpm", type=float)
    p.add_argument("--tpv", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynreserve", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a traffic file and write reserve prices")
    p.add_argument("--input")
    p.add_argument("--config", help="re-run the config embedded in a report.json")
    p.add_argument("--mode", choices=("domain", "general"), default="domain")
    _add_domain_flags(p)
    p.add_argument("--bounds", help="comma-separated B_k (general mode)")
    p.add_argument("--algo", choices=("cd2rp", "d3rp"), default="cd2rp")
    p.add_argument("--alpha", type=float)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--max-sweeps", type=int, default=100)
    p.add_argument("--tol", type=float)
    p.add_argument("--candidate-mode", choices=("exact", "sampled"))
    p.add_argument("--sample-size", type=int, default=DEFAULT_SAMPLE_SIZE)
    p.add_argument("--shards", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--backend", choices=kernels.available())

    p = sub.add_parser("gen", help="write a synthetic instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fractions")
    p.add_argument("--kind", choices=("cover", "pack", "domain"), default="cover")
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="exact optimum by enumeration (N <= 25)")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("domain", "general"), default="general")
    _add_domain_flags(p)
    p.add_argument("--bounds")

    p = sub.add_parser("ic-check", help="truthfulness checks for the reserve auction")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--negative-control", action="store_true")

    p = sub.add_parser("bench", help="CD2RP wall time across scales and shard counts")
    p.add_argument("--scales", default="100000,1000000")
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--shards", dest="shards_list", default="1")
    p.add_argument("--max-sweeps", type=int, default=15)
    p.add_argument("--kind", choices=("cover", "pack", "domain"), default="pack")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=kernels.available())
    p.add_argument("--out")

    p = sub.add_parser("gap-curve", help="per-iteration relative gaps for both solvers")
    p.add_argument("--input")
    p.add_argument("--mode", choices=("domain", "general"), default="domain")
    _add_domain_flags(p)
    p.add_argument("--bounds")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--kind", choices=("cover", "pack", "domain"), default="domain")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=15)
    p.add_argument("--alpha-grid", help="absolute learning rates")
    p.add_argument("--alpha-scale", default="0.5,1,2",
                   help="multiples of the heuristic learning rate")
    p.add_argument("--shards", type=int)
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "solve":
            if not args.input and not args.config:
                raise ConfigError("solve needs --input or --config")
            return cmd_solve(_config_from_args(args))
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "oracle":
            return cmd_oracle(args)
        if args.command == "ic-check":
            return cmd_ic_check(args)
        if args.command == "bench":
            return cmd_bench(args)
        if args.command == "gap-curve":
            return cmd_gap_curve(args)
    except (ConfigError, io.InputError, CoordinateInfeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
