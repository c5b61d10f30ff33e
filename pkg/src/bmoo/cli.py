"""Command-line interface: ``bmoo run``, ``bmoo bench``, ``bmoo list-problems``."""

import argparse
import csv
import logging
import sys

from .driver import RunConfig, bench, run_bmoo, write_particles_csv
from .problems import SUITES, UsageError, get_problem, list_problems

log = logging.getLogger("bmoo")


def _cmd_run(args):
    cfg = RunConfig(
        problem=args.problem,
        budget=args.budget,
        seed=args.seed,
        m_x=args.m_x,
        m_y=args.m_y,
        nu=args.nu,
        n_init=args.n_init,
        factorial_density=args.factorial_density,
        dump_particles=bool(args.dump_particles),
    )

    def progress(n, record):
        e = record.entries[-1]
        log.info("eval %d feasible=%s f=%s", n, e["feasible"], e["f"])

    rec = run_bmoo(cfg, progress=progress if args.verbose else None)
    text = rec.to_json(args.out)
    if args.out is None:
        sys.stdout.write(text + "\n")
    if args.dump_particles:
        write_particles_csv(rec, args.dump_particles)
    summary = {k: v for k, v in rec.metrics.items() if k not in ("best_feasible", "hv_fraction")}
    log.info("status=%s metrics=%s", rec.status, summary)
    return 0 if rec.status == "ok" else 1


def _cmd_bench(args):
    overrides = {"m_x": args.m_x, "m_y": args.m_y}
    header, rows, failures = bench(
        args.suite, args.repeats, args.budget, args.jobs, args.out,
        problems=args.problems, seed0=args.seed, **overrides,
    )
    w = csv.writer(sys.stdout)
    w.writerow(header)
    w.writerows(rows)
    for name, seed, status in failures:
        log.warning("run %s seed %d: %s", name, seed, status)
    return 0


def _cmd_list(args):
    suites = [args.suite] if args.suite else [s for s in SUITES]
    w = csv.writer(sys.stdout)
    w.writerow(["name", "suite", "d", "p", "q", "budget"])
    for s in suites:
        for pb in list_problems(s):
            w.writerow([pb.name, pb.suite, pb.d, pb.p, pb.q, pb.budget])
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="bmoo", description="Bayesian constrained multi-objective optimization")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="optimize one problem")
    r.add_argument("--problem", required=True)
    r.add_argument("--budget", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--m-x", type=int, default=1000)
    r.add_argument("--m-y", type=int, default=1000)
    r.add_argument("--nu", type=float, default=0.2)
    r.add_argument("--n-init", type=int, default=None)
    r.add_argument("--factorial-density", action="store_true")
    r.add_argument("--out", default=None, help="JSON record path (stdout if omitted)")
    r.add_argument("--dump-particles", default=None, metavar="CSV", help="write particle snapshots")
    r.set_defaults(func=_cmd_run)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True, choices=["mono", "multi", "modified"])
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--budget", type=int, default=None, help="override per-problem budgets")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", default=None, help="output directory")
    b.add_argument("--problems", nargs="*", default=None)
    b.add_argument("--seed", type=int, default=0, help="seed of the first repeat")
    b.add_argument("--m-x", type=int, default=1000)
    b.add_argument("--m-y", type=int, default=1000)
    b.set_defaults(func=_cmd_bench)

    ls = sub.add_parser("list-problems", help="list the registered problems")
    ls.add_argument("--suite", default=None, choices=list(SUITES))
    ls.set_defaults(func=_cmd_list)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if getattr(args, "problem", None):
            get_problem(args.problem)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
