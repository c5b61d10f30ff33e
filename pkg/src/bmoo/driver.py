"""Optimization loop, run records and benchmark harness

One run proceeds as follows: a maximin Latin hypercube initial design is
evaluated, then at each iteration the Gaussian process models are refit,
the output box is updated, output-space particles are drawn uniformly on
the non-dominated region, the candidate particles on the search domain
are updated, the expected improvement is computed at every candidate and
the problem is evaluated at the best one.

All randomness derives from a single integer seed split into named
streams, so a (config, seed) pair reproduces the same record.
"""

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import smc_x
from .bounds import bounds_from_predictions
from .criterion import CriterionState, PosteriorBundle, expected_improvement, project_front
from .domination import front_from_outputs
from .gp import GpConfig, fit_all, predict_all
from .hypervolume import HvReference, evaluations_to_fraction, hv_fraction
from .problems import EvaluationError, UsageError, evaluate, get_problem, list_problems
from .smc_y import advance_front, sample_region, RestartSignal

SCHEMA_VERSION = 1
HV_LEVELS = (0.90, 0.95, 0.99)
STREAMS = ("design", "gp", "smc_x", "smc_y")
DUPLICATE_TOL = 1e-9


@dataclass
class RunConfig:
    """Settings of one optimization run.

    Attributes
    ----------
    problem : str
    budget : int
        Total number of evaluations, initial design included.
    n_init : int or None
        Initial design size; defaults to the problem's value or 3d.
    m_x, m_y : int
        Sizes of the candidate and output-space particle sets.
    nu : float
        Survival fraction of the output-space subset simulation.
    nu_x : float
        ESS fraction of the candidate particles.
    lambda_obj, lambda_cons : float
        Width of the posterior quantiles used for the output box.
    seed : int
    feas_tol : float
        Constraint tolerance used when reporting feasibility.
    factorial_density : bool
    exact_single_objective_path : bool
    mh_steps_y, mh_steps_x : int
    n_draws : int
        Monte Carlo draws per candidate for the probability of improvement.
    gp_n_starts : int
    dump_particles : bool
    """

    problem: str
    budget: int
    n_init: int = None
    m_x: int = 1000
    m_y: int = 1000
    nu: float = 0.2
    nu_x: float = 0.2
    lambda_obj: float = 5.0
    lambda_cons: float = 5.0
    seed: int = 0
    feas_tol: float = 1e-5
    factorial_density: bool = False
    exact_single_objective_path: bool = True
    mh_steps_y: int = 10
    mh_steps_x: int = 5
    n_draws: int = 100
    gp_n_starts: int = 5
    dump_particles: bool = False

    def resolved_n_init(self, problem):
        if self.n_init is not None:
            return int(self.n_init)
        return int(problem.n_init) if problem.n_init else 3 * problem.d

    def validate(self, problem):
        n_init = self.resolved_n_init(problem)
        if n_init < 2 or self.budget <= n_init:
            raise UsageError("need budget > n_init >= 2")
        if self.m_x < 10 or self.m_y < 10:
            raise UsageError("particle counts must be at least 10")
        if not (0 < self.nu < 1 and 0 < self.nu_x < 1):
            raise UsageError("nu and nu_x must lie in (0, 1)")


@dataclass
class RunRecord:
    """Trace of one run.

    Attributes
    ----------
    config : dict
    entries : list of dict
        One entry per evaluation: x, f, c, feasible, ei (None for the
        initial design), bounds (None for the initial design), time.
    metrics : dict
    status : str
        "ok" or "aborted: <message>".
    particles : list of dict
        Optional per-iteration particle snapshots.
    """

    config: dict
    entries: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    status: str = "ok"
    particles: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    @property
    def X(self):
        return np.array([e["x"] for e in self.entries], dtype=float)

    @property
    def F(self):
        return np.array([e["f"] for e in self.entries], dtype=float)

    @property
    def C(self):
        return np.array([e["c"] for e in self.entries], dtype=float)

    def to_dict(self, timings=True):
        out = asdict(self)
        if not timings:
            for e in out["entries"]:
                e.pop("time", None)
        return out

    def to_json(self, path=None, timings=True):
        text = json.dumps(self.to_dict(timings), indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, data):
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {data.get('schema_version')!r}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def streams(seed):
    """Independent named generators derived from one seed."""
    children = np.random.SeedSequence(int(seed)).spawn(len(STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}


def _lhs(n, d, rng):
    perms = np.argsort(rng.random((n, d)), axis=0)
    return (perms + rng.random((n, d))) / n


def _min_dist(U):
    diff = U[:, None, :] - U[None, :, :]
    D = np.sqrt((diff**2).sum(-1))
    D[np.diag_indices(U.shape[0])] = np.inf
    return D.min()


def initial_design(d, n_init, bounds, seed=None, n_candidates=1000):
    """Maximin Latin hypercube design.

    Parameters
    ----------
    d, n_init : int
    bounds : tuple (x_low, x_upp)
    seed : int or Generator
    n_candidates : int
        Number of random Latin hypercubes among which the one with the
        largest minimal pairwise distance is kept.

    Returns
    -------
    ndarray, shape (n_init, d)
    """
    if n_init < 2:
        raise ValueError("n_init must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x_low, x_upp = (np.asarray(b, dtype=float) for b in bounds)
    best, best_d = None, -np.inf
    for _ in range(n_candidates):
        U = _lhs(n_init, d, rng)
        md = _min_dist(U)
        if md > best_d:
            best, best_d = U, md
    return x_low + best * (x_upp - x_low)


def _is_duplicate(X_cand, X_design, x_low, x_upp):
    span = x_upp - x_low
    if X_design.shape[0] == 0:
        return np.zeros(X_cand.shape[0], bool)
    A = (X_cand - x_low) / span
    B = (X_design - x_low) / span
    D2 = ((A[:, None, :] - B[None, :, :]) ** 2).sum(-1)
    return np.sqrt(D2.min(axis=1)) < DUPLICATE_TOL


def select_next(candidates, criterion, existing=None, bounds=None, fallback=None):
    """Discrete search of the criterion over the candidates.

    Parameters
    ----------
    candidates : ndarray (m, d) or ParticleSetX
    criterion : callable or ndarray
        Maps the (m, d) candidates to criterion values, or the values.
    existing : ndarray (n, d), optional
        Design points; candidates closer than 1e-9 (normalized) are skipped.
    bounds : tuple (x_low, x_upp), optional
        Needed with ``existing``.
    fallback : callable or ndarray, optional
        Scores (e.g. summed posterior variances) used when every
        candidate is a duplicate or has zero criterion.

    Returns
    -------
    x : ndarray (d,)
    index : int
    value : float
        Criterion value at the selected candidate.
    """
    X = np.asarray(getattr(candidates, "particles", candidates), dtype=float)
    if X.shape[0] == 0:
        raise ValueError("no candidate")
    vals = np.asarray(criterion(X) if callable(criterion) else criterion, dtype=float).ravel()
    dup = np.zeros(X.shape[0], bool)
    if existing is not None and len(existing):
        dup = _is_duplicate(X, np.asarray(existing, dtype=float), *bounds)
    ok = ~dup & np.isfinite(vals) & (vals > 0)
    if np.any(ok):
        i = int(np.argmax(np.where(ok, vals, -np.inf)))
        return X[i].copy(), i, float(vals[i])
    if fallback is not None:
        score = np.asarray(fallback(X) if callable(fallback) else fallback, dtype=float).ravel()
        score = np.where(dup, -np.inf, score)
        if np.any(np.isfinite(score)):
            i = int(np.argmax(score))
            return X[i].copy(), i, float(vals[i])
    free = np.flatnonzero(~dup)
    i = int(free[0]) if free.size else 0
    return X[i].copy(), i, float(vals[i])


def _output_particles(prev, bounds, front, config, space, rng):
    """Output-space particles uniform on the non-dominated region."""
    yfront = project_front(front, space)
    if prev is not None and prev.space == space and np.array_equal(prev.low, bounds.space(space)[0]) \
            and np.array_equal(prev.upp, bounds.space(space)[1]):
        try:
            return advance_front(prev, yfront, config.nu, config.mh_steps_y)
        except RestartSignal:
            pass
    return sample_region(bounds, yfront, config.m_y, rng, space, config.nu, config.mh_steps_y)


def _entry(x, f, c, tol, ei=None, bounds=None, elapsed=0.0):
    return {
        "x": np.asarray(x, dtype=float).tolist(),
        "f": np.asarray(f, dtype=float).tolist(),
        "c": np.asarray(c, dtype=float).tolist(),
        "feasible": bool(np.all(np.asarray(c) <= tol)),
        "ei": None if ei is None else float(ei),
        "bounds": None if bounds is None else bounds.to_dict(),
        "time": float(elapsed),
    }


def compute_metrics(record, problem=None):
    """Derived metrics of a record (recomputable from its entries)."""
    problem = problem or get_problem(record.config["problem"])
    tol = record.config.get("feas_tol", 1e-5)
    out = {"n_evaluations": len(record.entries)}
    if not record.entries:
        return out
    F, C = record.F, record.C
    feas = np.all(C <= tol, axis=1)
    idx = np.flatnonzero(feas)
    out["first_feasible"] = int(idx[0]) + 1 if idx.size else None
    if problem.p == 1:
        best = np.minimum.accumulate(np.where(feas, F[:, 0], np.inf))
        out["best_feasible"] = [None if not np.isfinite(b) else float(b) for b in best]
        if problem.target is not None:
            hit = np.flatnonzero(feas & (F[:, 0] <= problem.target))
            out["first_target"] = int(hit[0]) + 1 if hit.size else None
    elif problem.ref_point is not None:
        ref = HvReference(problem.ref_point, problem.ref_volume)
        fr = hv_fraction(F, C, ref, tol)
        out["hv_fraction"] = fr.tolist()
        for lev in HV_LEVELS:
            out[f"hv_{int(round(lev * 100))}"] = evaluations_to_fraction(fr, lev)
    nd = front_from_outputs(F[feas], C[feas]) if idx.size else None
    out["n_nondominated_feasible"] = 0 if nd is None else len(nd)
    return out


def run_bmoo(config, problem=None, progress=None, stop=None):
    """Run the optimization loop.

    Parameters
    ----------
    config : RunConfig
    problem : ProblemSpec, optional
        Defaults to the registered problem named in the config.
    progress : callable, optional
        Called with (n_evaluations, record) after every evaluation.
    stop : callable, optional
        Called with (F, C) after every evaluation; a true value ends the
        run before the budget (status "stopped").  First-hit metrics are
        unaffected when the predicate only fires after they are reached.

    Returns
    -------
    RunRecord
    """
    problem = problem or get_problem(config.problem)
    config.validate(problem)
    n_init = config.resolved_n_init(problem)
    rngs = streams(config.seed)
    record = RunRecord(config=asdict(config))
    x_low, x_upp = problem.x_low, problem.x_upp
    p, q = problem.p, problem.q
    gp_cfg = GpConfig(n_starts=config.gp_n_starts)
    tag = "factorial-modified" if config.factorial_density else "plain"

    X = initial_design(problem.d, n_init, (x_low, x_upp), rngs["design"])
    Fs, Cs = [], []
    try:
        for x in X:
            t0 = time.perf_counter()
            f, c = evaluate(problem, x)
            Fs.append(f)
            Cs.append(c)
            record.entries.append(_entry(x, f, c, config.feas_tol, elapsed=time.perf_counter() - t0))
            if progress:
                progress(len(record.entries), record)
    except EvaluationError as exc:
        record.status = f"aborted: {exc}"
        record.metrics = compute_metrics(record, problem)
        return record

    xset = smc_x.init(x_low, x_upp, config.m_x, rngs["smc_x"], tag, config.n_draws)
    yset = None
    warm = None
    while len(record.entries) < config.budget:
        t0 = time.perf_counter()
        Xd = np.array([e["x"] for e in record.entries])
        F = np.array(Fs).reshape(-1, p)
        C = np.array(Cs).reshape(-1, q)
        models = fit_all(Xd, np.hstack([F, C]), gp_cfg, x_low, x_upp, warm, rngs["gp"])
        warm = [mo.log_params for mo in models]
        mean, var = predict_all(models, xset.particles)
        bounds = bounds_from_predictions(F, C, mean, var, p, config.lambda_obj, config.lambda_cons)
        front = front_from_outputs(F, C)
        feasible_found = front.has_feasible
        exact = config.exact_single_objective_path and p == 1 and feasible_found
        if exact:
            yset = None
        else:
            space = "obj" if feasible_found else "cons"
            yset = _output_particles(yset, bounds, front, config, space, rngs["smc_y"])
        state = CriterionState.from_front(front, bounds, yset)
        density = smc_x.ImprovementDensity(models, bounds, config.factorial_density,
                                           config.exact_single_objective_path)
        smc_x.step(xset, density, front, config.nu_x, config.mh_steps_x)
        mean, var = predict_all(models, xset.particles)
        bundle = PosteriorBundle.from_arrays(mean, var, p)
        ei = np.asarray(expected_improvement(bundle, state, config.exact_single_objective_path))
        x_next, idx, val = select_next(
            xset.particles, ei, Xd, (x_low, x_upp), fallback=var.sum(axis=1)
        )
        if config.dump_particles:
            record.particles.append({
                "iteration": len(record.entries) + 1,
                "x": xset.particles.tolist(),
                "y": None if yset is None else yset.particles.tolist(),
                "y_space": None if yset is None else yset.space,
            })
        try:
            f, c = evaluate(problem, x_next)
        except EvaluationError as exc:
            record.status = f"aborted: {exc}"
            break
        Fs.append(f)
        Cs.append(c)
        record.entries.append(
            _entry(x_next, f, c, config.feas_tol, val, bounds, time.perf_counter() - t0)
        )
        if progress:
            progress(len(record.entries), record)
        if stop is not None and stop(np.array(Fs).reshape(-1, p), np.array(Cs).reshape(-1, q)):
            record.status = "stopped"
            break
    record.metrics = compute_metrics(record, problem)
    return record


def _bench_job(args):
    name, seed, budget, overrides = args
    cfg = RunConfig(problem=name, budget=budget, seed=seed, **overrides)
    try:
        rec = run_bmoo(cfg)
    except Exception as exc:  # per-run failures are recorded, not fatal
        return name, seed, None, f"{type(exc).__name__}: {exc}"
    return name, seed, rec.to_dict(), rec.status


def _mean_sd(values, repeats):
    vals = [v for v in values if v is not None]
    if not vals:
        return len(vals), "-"
    m = float(np.mean(vals))
    if repeats == 1 or len(vals) == 1:
        return len(vals), f"{m:.1f} (-)"
    return len(vals), f"{m:.1f} ({float(np.std(vals, ddof=1)):.1f})"


def summarize(suite, results, repeats):
    """Rows of the benchmark table from per-run metrics.

    Parameters
    ----------
    suite : str
    results : dict
        problem name -> list of metrics dicts (None for failed runs).
    repeats : int

    Returns
    -------
    header : list of str
    rows : list of list
    """
    if suite == "multi":
        header = ["problem"]
        for lev in HV_LEVELS:
            k = int(round(lev * 100))
            header += [f"n_success_{k}", f"mean(sd)_{k}"]
    else:
        header = ["problem", "n_success_feasible", "mean(sd)_feasible", "n_success_target", "mean(sd)_target"]
    rows = []
    for name, mets in results.items():
        mets = [m for m in mets if m is not None]
        if suite == "multi":
            row = [name]
            for lev in HV_LEVELS:
                key = f"hv_{int(round(lev * 100))}"
                row += list(_mean_sd([m.get(key) for m in mets], repeats))
        else:
            row = [name]
            row += list(_mean_sd([m.get("first_feasible") for m in mets], repeats))
            row += list(_mean_sd([m.get("first_target") for m in mets], repeats))
        rows.append(row)
    return header, rows


def bench(suite, repeats=1, budget=None, jobs=1, out_dir=None, problems=None, seed0=0, **overrides):
    """Run every problem of a suite several times and tabulate the results.

    Parameters
    ----------
    suite : {"mono", "multi", "modified"}
    repeats : int
    budget : int, optional
        Overrides the per-problem default budgets.
    jobs : int
        Number of worker processes.
    out_dir : str, optional
        Receives ``<suite>.csv`` and one JSON record per run.
    problems : list of str, optional
        Restrict to these problems.
    seed0 : int
        Seed of the first repeat; repeat r uses seed0 + r.
    **overrides
        Extra RunConfig fields.

    Returns
    -------
    header, rows, failures
    """
    pbs = list_problems(suite)
    if problems:
        pbs = [pb for pb in pbs if pb.name in problems]
    tasks = []
    for pb in pbs:
        b = budget or pb.budget or 3 * pb.d + 50
        for r in range(repeats):
            tasks.append((pb.name, seed0 + r, b, overrides))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outs = list(ex.map(_bench_job, tasks))
    else:
        outs = [_bench_job(t) for t in tasks]
    results = {pb.name: [] for pb in pbs}
    failures = []
    if out_dir:
        os.makedirs(os.path.join(out_dir, "runs"), exist_ok=True)
    for name, seed, rec, status in outs:
        if rec is None:
            failures.append((name, seed, status))
            results[name].append(None)
            continue
        results[name].append(rec["metrics"])
        if status != "ok":
            failures.append((name, seed, status))
        if out_dir:
            with open(os.path.join(out_dir, "runs", f"{name}_seed{seed}.json"), "w") as fh:
                json.dump(rec, fh)
    header, rows = summarize(suite, results, repeats)
    if out_dir:
        with open(os.path.join(out_dir, f"{suite}.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    return header, rows, failures


def write_particles_csv(record, path):
    """Write particle snapshots as CSV rows (iteration, kind, coordinates)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "kind", "coords"])
        for snap in record.particles:
            for row in snap["x"]:
                w.writerow([snap["iteration"], "x", " ".join(f"{v:.10g}" for v in row)])
            if snap.get("y") is not None:
                for row in snap["y"]:
                    w.writerow([snap["iteration"], f"y-{snap['y_space']}", " ".join(f"{v:.10g}" for v in row)])
