import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from bmoo.cli import main
from bmoo.driver import (
    SCHEMA_VERSION,
    RunConfig,
    RunRecord,
    bench,
    compute_metrics,
    initial_design,
    run_bmoo,
    select_next,
    streams,
    write_particles_csv,
)
from bmoo.problems import ProblemSpec, UsageError, get_problem

SMALL = dict(m_x=100, m_y=100, n_draws=20, gp_n_starts=2)


def _random_lhs_min_dist(n, d, rng):
    U = (np.argsort(rng.random((n, d)), axis=0) + rng.random((n, d))) / n
    diff = U[:, None] - U[None]
    D = np.sqrt((diff**2).sum(-1))
    return D[np.triu_indices(n, 1)].min()


# initial design

@pytest.mark.parametrize("n,d", [(2, 1), (6, 2), (15, 5)])
def test_design_strata(n, d):
    low, upp = np.full(d, -2.0), np.full(d, 3.0)
    X = initial_design(d, n, (low, upp), seed=0, n_candidates=50)
    assert X.shape == (n, d)
    strata = np.floor((X - low) / (upp - low) * n).astype(int)
    for j in range(d):
        np.testing.assert_array_equal(np.sort(strata[:, j]), np.arange(n))


def test_design_maximin_beats_median_random():
    wins = 0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        med = np.median([_random_lhs_min_dist(10, 3, rng) for _ in range(200)])
        X = initial_design(3, 10, (np.zeros(3), np.ones(3)), seed=seed)
        diff = X[:, None] - X[None]
        md = np.sqrt((diff**2).sum(-1))[np.triu_indices(10, 1)].min()
        wins += md >= med
    assert wins == 20


def test_design_deterministic_and_validated():
    a = initial_design(2, 6, ([0.0, 0.0], [1.0, 1.0]), seed=7, n_candidates=30)
    b = initial_design(2, 6, ([0.0, 0.0], [1.0, 1.0]), seed=7, n_candidates=30)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        initial_design(2, 1, ([0.0, 0.0], [1.0, 1.0]))


def test_streams_independent_and_reproducible():
    a, b = streams(3), streams(3)
    for k in a:
        assert a[k].random() == b[k].random()
    draws = [g.random() for g in streams(3).values()]
    assert len(set(draws)) == len(draws)


# select_next

def test_select_single_particle():
    x, i, _ = select_next(np.array([[0.3, 0.4]]), lambda X: np.ones(len(X)))
    np.testing.assert_array_equal(x, [0.3, 0.4])
    assert i == 0


def test_select_tie_takes_first():
    X = np.random.default_rng(0).random((20, 2))
    _, i, v = select_next(X, np.full(20, 0.5))
    assert i == 0 and v == 0.5


@pytest.mark.parametrize("seed", range(5))
def test_select_matches_argmax(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((50, 3))
    vals = rng.random(50)
    x, i, v = select_next(X, vals)
    assert i == int(np.argmax(vals)) and v == vals.max()
    np.testing.assert_array_equal(x, X[i])


def test_select_skips_duplicates():
    X = np.array([[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]])
    vals = np.array([0.2, 0.9, 0.5])
    _, i, _ = select_next(X, vals, existing=np.array([[0.5, 0.5 + 1e-12]]), bounds=(np.zeros(2), np.ones(2)))
    assert i == 2
    # a point 1e-6 away is not a duplicate
    _, i, _ = select_next(X, vals, existing=np.array([[0.5, 0.5 + 1e-6]]), bounds=(np.zeros(2), np.ones(2)))
    assert i == 1


def test_select_fallback_on_zero_criterion():
    X = np.array([[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]])
    _, i, v = select_next(X, np.zeros(3), fallback=np.array([0.1, 0.3, 0.2]))
    assert i == 1 and v == 0.0
    # duplicates are excluded from the fallback too
    _, i, _ = select_next(X, np.zeros(3), existing=X[1:2], bounds=(np.zeros(2), np.ones(2)),
                          fallback=np.array([0.1, 0.3, 0.2]))
    assert i == 2
    with pytest.raises(ValueError):
        select_next(np.empty((0, 2)), np.empty(0))


# config

def test_config_validation():
    toy = get_problem("toy")
    RunConfig("toy", budget=11).validate(toy)
    for bad in (RunConfig("toy", budget=10), RunConfig("toy", budget=20, n_init=1),
                RunConfig("toy", budget=20, m_x=5), RunConfig("toy", budget=20, nu=1.0)):
        with pytest.raises(UsageError):
            bad.validate(toy)
    assert RunConfig("g24", budget=50).resolved_n_init(get_problem("g24")) == 6


# runs

@pytest.fixture(scope="module")
def toy_record():
    return run_bmoo(RunConfig("toy", budget=60, seed=0))


def test_toy_run_finds_feasible_front(toy_record):
    rec = toy_record
    assert rec.status == "ok"
    assert rec.metrics["first_feasible"] is not None
    assert rec.metrics["n_nondominated_feasible"] >= 5


def test_budget_exactness_and_metrics_consistency(toy_record):
    rec = toy_record
    assert len(rec.entries) == 60
    assert rec.metrics == compute_metrics(rec)
    C = rec.C
    first = int(np.flatnonzero(np.max(C, axis=1) <= 1e-5)[0]) + 1
    assert rec.metrics["first_feasible"] == first
    n_init = RunConfig("toy", budget=60).resolved_n_init(get_problem("toy"))
    assert all(e["ei"] is None for e in rec.entries[:n_init])
    assert all(e["ei"] is not None and e["bounds"] is not None for e in rec.entries[n_init:])
    # the toy problem has no reference front, hence no hypervolume trace
    assert "hv_fraction" not in rec.metrics


def test_no_duplicate_design_points(toy_record):
    X = toy_record.X
    toy = get_problem("toy")
    U = (X - toy.x_low) / toy.span
    D = np.sqrt(((U[:, None] - U[None]) ** 2).sum(-1))
    assert D[np.triu_indices(len(X), 1)].min() >= 1e-9


def test_json_roundtrip(toy_record, tmp_path):
    path = tmp_path / "rec.json"
    toy_record.to_json(path)
    back = RunRecord.from_json(path)
    assert back.to_dict() == json.loads(json.dumps(toy_record.to_dict()))
    data = json.loads(path.read_text())
    assert data["schema_version"] == SCHEMA_VERSION
    data["schema_version"] = -1
    with pytest.raises(ValueError):
        RunRecord.from_dict(data)


def test_reproducible_record():
    cfg = dict(problem="g24", budget=12, seed=5, **SMALL)
    a = run_bmoo(RunConfig(**cfg)).to_dict(timings=False)
    b = run_bmoo(RunConfig(**cfg)).to_dict(timings=False)
    assert a == b
    c = run_bmoo(RunConfig(**{**cfg, "seed": 6})).to_dict(timings=False)
    assert a["entries"] != c["entries"]


def test_monotone_best_single_objective():
    rec = run_bmoo(RunConfig("g24", budget=16, seed=1, **SMALL))
    best = [b for b in rec.metrics["best_feasible"] if b is not None]
    assert best and np.all(np.diff(best) <= 0)


def test_stop_predicate_ends_run():
    rec = run_bmoo(RunConfig("g24", budget=40, seed=2, **SMALL),
                   stop=lambda F, C: len(F) >= 9)
    assert rec.status == "stopped" and len(rec.entries) == 9


def _problem_failing_at(call):
    count = [0]

    def func(X):
        count[0] += 1
        f = X[:, :1].copy()
        if count[0] >= call:
            f[:] = np.nan
        return f, X[:, 1:2] - 0.5
    return ProblemSpec("failing", 2, 1, 1, np.zeros(2), np.ones(2), func)


@pytest.mark.parametrize("call,kept", [(1, 0), (6, 5)])
def test_evaluation_error_aborts_with_partial_record(call, kept):
    rec = run_bmoo(RunConfig("failing", budget=8, n_init=3, **SMALL), problem=_problem_failing_at(call))
    assert rec.status.startswith("aborted")
    assert len(rec.entries) == kept
    assert rec.metrics["n_evaluations"] == kept


def test_particle_dump(tmp_path):
    rec = run_bmoo(RunConfig("toy", budget=12, n_init=10, dump_particles=True, **SMALL))
    assert len(rec.particles) == 2
    path = tmp_path / "p.csv"
    write_particles_csv(rec, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["iteration", "kind", "coords"]
    kinds = {r[1] for r in rows[1:]}
    assert "x" in kinds and any(k.startswith("y-") for k in kinds)


# bench and CLI

def test_bench_mono_columns(tmp_path):
    header, rows, failures = bench("mono", repeats=1, budget=8, out_dir=str(tmp_path),
                                   problems=["g24"], **SMALL)
    assert header == ["problem", "n_success_feasible", "mean(sd)_feasible", "n_success_target", "mean(sd)_target"]
    assert rows[0][0] == "g24" and not failures
    for cell in (rows[0][2], rows[0][4]):
        assert cell == "-" or cell.endswith("(-)")
    assert (tmp_path / "mono.csv").exists()
    assert (tmp_path / "runs" / "g24_seed0.json").exists()


def test_bench_multi_columns_and_sd():
    header, rows, _ = bench("multi", repeats=2, budget=8, problems=["BNH"], **SMALL)
    assert header == ["problem", "n_success_90", "mean(sd)_90", "n_success_95", "mean(sd)_95",
                      "n_success_99", "mean(sd)_99"]
    assert len(rows) == 1


def test_cli_list_and_run(tmp_path, capsys):
    assert main(["list-problems", "--suite", "multi"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "name,suite,d,p,q,budget" and any(l.startswith("BNH,") for l in out)
    path = tmp_path / "r.json"
    code = main(["run", "--problem", "toy", "--budget", "11", "--m-x", "50", "--m-y", "50",
                 "--out", str(path)])
    assert code == 0
    assert len(json.loads(path.read_text())["entries"]) == 11
    assert main(["run", "--problem", "nope", "--budget", "11"]) == 2


def test_cli_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "bmoo", "list-problems", "--suite", "mono"],
                         capture_output=True, text=True, check=True).stdout
    assert out.startswith("name,suite") and "g24" in out
