"""``despso`` command line: generate DES point sets, solve interval problems, benchmark.

Exit codes: 0 ok, 1 bad arguments, 2 DES set not stationary (still written),
3 runtime failure.
"""
import argparse
import concurrent.futures
import logging
import math
import os
import statistics
import sys
import warnings
from pathlib import Path

from . import cases
from .des import DesConfig, NotConverged, centered_l2_discrepancy, generate_des
from .expr import ProblemFileError, load_problem
from .interval import SpeedupRow, bounds, compare_modes, write_speedup_csv
from .pso import PsoConfig, PsoError

log = logging.getLogger("despso")

OUT_ENV = "DESPSO_OUTPUT_DIR"
EXIT_OK, EXIT_ARGS, EXIT_SOFT, EXIT_RUNTIME = 0, 1, 2, 3
BUILTINS = ("linear2x2", "smartwatch")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def _floats(text):
    vals = tuple(float(v) for v in text.replace(",", " ").split())
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected two numbers: start,end")
    return vals


def _seed_list(text):
    return [int(v) for v in text.replace(",", " ").split()]


def _add_des_flags(p):
    g = p.add_argument_group("DES settings")
    d = DesConfig()
    g.add_argument("--q", type=float, default=d.q, help="distance exponent")
    g.add_argument("--p", type=float, default=d.p, help="potential exponent")
    g.add_argument("--dt", type=float, default=d.dt)
    g.add_argument("--kappa", type=float, default=d.kappa)
    g.add_argument("--max-steps", type=int, default=d.max_steps)
    g.add_argument("--stop-tol", type=float, default=d.stop_tol)


def _add_pso_flags(p):
    g = p.add_argument_group("optimizer settings")
    c = PsoConfig()
    g.add_argument("--pop-size", type=int, default=c.pop_size)
    g.add_argument("--explore-size", type=int, default=None, help="default: half the swarm, rounded up")
    g.add_argument("--max-iters", type=int, default=c.max_iters)
    g.add_argument("--inertia", type=_floats, default=c.inertia, help="start,end")
    g.add_argument("--explore-accel", type=_floats, default=c.explore_accel, help="start,end")
    g.add_argument("--refresh-gap", type=int, default=c.refresh_gap)
    g.add_argument("--vmax-frac", type=float, default=c.vmax_frac)
    g.add_argument("--fixed-matrices", dest="permute", action="store_false",
                   help="reuse the DES matrices unchanged every iteration (default: shuffle their columns)")


def _add_problem_flags(p):
    p.add_argument("--problem", required=True, help="linear2x2, smartwatch or a problem file")
    p.add_argument("--corrected", action="store_true",
                   help="smartwatch: use the sign-corrected sigma2_N/sigma3_N surfaces")


def build_parser():
    parser = _Parser(prog="despso", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--config", help="file of 'key = value' lines (flags win)")
    parser.add_argument("--out", default=None, help=f"output directory (env {OUT_ENV}, else .)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False, allow_abbrev=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help=argparse.SUPPRESS)

    gen = sub.add_parser("generate", parents=[common], allow_abbrev=False, help="generate a DES point set")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", help="CSV path (default: des_<n>x<dim>_s<seed>.csv in the output dir)")
    _add_des_flags(gen)

    sol = sub.add_parser("solve", parents=[common], allow_abbrev=False, help="bounds of every response of a problem")
    _add_problem_flags(sol)
    sol.add_argument("--mode", choices=("hclpso", "despso", "both"), default="despso")
    sol.add_argument("--seed", type=int, default=0)
    _add_pso_flags(sol)
    _add_des_flags(sol)

    bench = sub.add_parser("bench", parents=[common], allow_abbrev=False, help="convergence steps of both optimizers against oracle bounds")
    _add_problem_flags(bench)
    bench.add_argument("--seeds", type=int, default=20, help="number of seeds")
    bench.add_argument("--seed-base", type=int, default=0)
    bench.add_argument("--seed-list", type=_seed_list, default=None, help="explicit seeds, overrides --seeds")
    bench.add_argument("--tol", type=float, default=1e-3)
    bench.add_argument("--jobs", type=int, default=1)
    _add_pso_flags(bench)
    _add_des_flags(bench)

    orc = sub.add_parser("oracle", parents=[common], allow_abbrev=False, help="exact bounds of a built-in problem")
    _add_problem_flags(orc)

    dom = sub.add_parser("domain", parents=[common], allow_abbrev=False, help="sampled solution cloud of the linear system")
    dom.add_argument("--samples", type=int, default=5000)
    dom.add_argument("--seed", type=int, default=0)
    return parser


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment.  Keys may use dashes or underscores."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def parse_args(argv):
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known_args, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if not known_args.config:
        return parser.parse_args(argv)
    try:
        cfg = read_config(known_args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    for key in ("out", "verbose"):
        if key in cfg:
            val = cfg.pop(key)
            parser.set_defaults(**{key: val if key == "out" else val.lower() in ("1", "true", "yes", "on")})
    # keys are applied to whichever subcommand is run; a key unknown to every one is an error
    subs = _subparsers(parser)
    everything = {a.dest for p in subs.values() for a in p._actions}
    unknown = sorted(set(cfg) - everything)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for sub in subs.values():
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, val in cfg.items():
            action = known.get(key)
            if action is None:
                continue
            if action.nargs == 0:  # store_true flags
                defaults[key] = val.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                try:
                    defaults[key] = action.type(val)
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise UsageError(f"config key {key}: {exc}") from None
            else:
                defaults[key] = val
            action.required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _out_dir(args):
    path = Path(args.out or os.environ.get(OUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _des_config(args):
    try:
        return DesConfig(q=args.q, p=args.p, dt=args.dt, kappa=args.kappa, max_steps=args.max_steps,
                         stop_tol=args.stop_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _pso_config(args):
    try:
        return PsoConfig(pop_size=args.pop_size, explore_size=args.explore_size, max_iters=args.max_iters,
                         inertia=tuple(args.inertia), explore_accel=tuple(args.explore_accel),
                         refresh_gap=args.refresh_gap, vmax_frac=args.vmax_frac)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _problem(args):
    if args.problem in BUILTINS:
        return cases.builtin_problem(args.problem, args.corrected)
    if not os.path.isfile(args.problem):
        raise UsageError(f"unknown problem {args.problem!r}: not a built-in name or an existing file")
    try:
        return load_problem(args.problem)
    except ProblemFileError as exc:
        raise UsageError(f"{args.problem}: {exc}") from None


def _fmt(v):
    return "inf" if math.isinf(v) else f"{v:.0f}"


def cmd_generate(args):
    if args.n < 2:
        raise UsageError("n must be >= 2")
    if args.dim < 1:
        raise UsageError("dim must be >= 1")
    config = _des_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NotConverged)
        ps = generate_des(args.n, args.dim, config, seed=args.seed)
    path = Path(args.output) if args.output else _out_dir(args) / f"des_{args.n}x{args.dim}_s{args.seed}.csv"
    ps.to_csv(path)
    print(f"wrote {path}")
    print(f"CD2 = {centered_l2_discrepancy(ps):.6f}")
    print(f"iterations = {ps.steps}")
    if any(issubclass(w.category, NotConverged) for w in caught):
        print(f"warning: not stationary after {ps.steps} steps", file=sys.stderr)
        return EXIT_SOFT
    return EXIT_OK


def cmd_solve(args):
    problem = _problem(args)
    config = _pso_config(args)
    des_config = _des_config(args)
    out = _out_dir(args)
    modes = ("hclpso", "despso") if args.mode == "both" else (args.mode,)
    results = {}
    for mode in modes:
        for r in problem.responses:
            res = bounds(problem, r.name, config, mode, args.seed, des_config, args.permute)
            res.min_report.to_csv(out / f"{r.name}_{mode}_lower.csv")
            res.max_report.to_csv(out / f"{r.name}_{mode}_upper.csv")
            results[mode, r.name] = res

    width = max(8, max(len(r.name) for r in problem.responses))
    head = f"{'response':<{width}}" + "".join(f"  {m + ' min':>14}  {m + ' max':>14}" for m in modes)
    print(head)
    print("-" * len(head))
    for r in problem.responses:
        line = f"{r.name:<{width}}"
        for m in modes:
            res = results[m, r.name]
            line += f"  {res.y_min:>14.3f}  {res.y_max:>14.3f}"
        print(line)
    return EXIT_OK


def _bench_task(task):
    problem_name, corrected, response, targets, config, tol, seed, des_config, permute = task
    problem = cases.builtin_problem(problem_name, corrected)
    return compare_modes(problem, response, config, targets, tol, (seed,), des_config, permute)


def run_bench(problem_name, corrected, config, seeds, tol, des_config=None, permute=True, jobs=1):
    """Per-response lower/upper :class:`SpeedupRow` pairs, aggregated in (response, seed) order."""
    oracles = cases.oracle_bounds(problem_name, corrected)
    tasks = [
        (problem_name, corrected, o.response, (o.y_min, o.y_max), config, tol, seed, des_config, permute)
        for o in oracles for seed in seeds
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_bench_task, tasks))
    else:
        done = [_bench_task(t) for t in tasks]
    rows = []
    for k, o in enumerate(oracles):
        lower, upper = SpeedupRow(o.response, "lower", []), SpeedupRow(o.response, "upper", [])
        for lo, hi in done[k * len(seeds):(k + 1) * len(seeds)]:
            lower.records += lo.records
            upper.records += hi.records
        rows += [lower, upper]
    return rows


def average_speedup(rows, bound):
    vals = [r.median_speedup for r in rows if r.bound == bound and r.median_speedup is not None]
    return statistics.mean(vals) if vals else None


def step_reduction(hclpso_steps, despso_steps):
    """Fewer evaluations relative to HCLPSO, in percent."""
    return (hclpso_steps - despso_steps) / hclpso_steps * 100.0


def average_improvement(rows, bound):
    """Mean step reduction of the median counts over the rows of one bound direction."""
    vals = [
        step_reduction(r.median_hclpso, r.median_des_pso) for r in rows
        if r.bound == bound and math.isfinite(r.median_hclpso) and math.isfinite(r.median_des_pso)
    ]
    return statistics.mean(vals) if vals else None


def cmd_bench(args):
    if args.problem not in BUILTINS:
        if not os.path.isfile(args.problem):
            raise UsageError(f"unknown problem {args.problem!r}")
        print(f"no oracle bounds for {args.problem}; bench needs a built-in problem", file=sys.stderr)
        return EXIT_RUNTIME
    seeds = args.seed_list if args.seed_list is not None else list(range(args.seed_base, args.seed_base + args.seeds))
    if not seeds:
        raise UsageError("need at least one seed")
    if not args.tol > 0:
        raise UsageError("tol must be > 0")
    if args.jobs < 1:
        raise UsageError("jobs must be >= 1")
    config = _pso_config(args)
    des_config = _des_config(args)
    rows = run_bench(args.problem, args.corrected, config, seeds, args.tol, des_config, args.permute, args.jobs)
    path = _out_dir(args) / f"bench_{args.problem}.csv"
    write_speedup_csv(rows, path)

    head = f"{'response':<10}  {'bound':<5}  {'DES-PSO':>9}  {'HCLPSO':>9}  {'speedup %':>9}"
    print(head)
    print("-" * len(head))
    for r in rows:
        sp = r.median_speedup
        sp_txt = "n/a" if sp is None else f"{sp:.3f}"
        print(f"{r.response:<10}  {r.bound:<5}  {_fmt(r.median_des_pso):>9}  {_fmt(r.median_hclpso):>9}  {sp_txt:>9}")
    print("-" * len(head))
    for label, func in (("average speedup", average_speedup), ("average improvement", average_improvement)):
        parts = []
        for bound in ("lower", "upper"):
            avg = func(rows, bound)
            parts.append(f"{bound} " + ("n/a" if avg is None else f"{avg:.3f} %"))
        print(f"{label + ':':<21}" + "   ".join(parts))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_oracle(args):
    if args.problem not in BUILTINS:
        raise UsageError(f"oracle bounds exist only for {', '.join(BUILTINS)}")
    results = cases.oracle_bounds(args.problem, args.corrected)
    path = _out_dir(args) / f"oracle_{args.problem}.csv"
    cases.write_oracle_csv(results, path)
    for r in results:
        print(f"{r.response:<10}  {r.y_min:>12.3f}  {r.y_max:>12.3f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_domain(args):
    if args.samples < 1:
        raise UsageError("samples must be >= 1")
    pts = cases.sample_solution_domain(args.samples, args.seed)
    path = _out_dir(args) / "linear2x2_domain.csv"
    cases.write_domain_csv(pts, path)
    print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "bench": cmd_bench, "oracle": cmd_oracle,
            "domain": cmd_domain}


def main(argv=None):
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"despso: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"despso: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (PsoError, ArithmeticError, ValueError, OSError) as exc:
        print(f"despso: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
