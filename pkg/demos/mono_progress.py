"""Follow the best feasible value on g24 over a few seeds."""

from bmoo.driver import RunConfig, run_bmoo


def main(seeds=range(3), budget=25):
    for seed in seeds:
        rec = run_bmoo(RunConfig("g24", budget=budget, seed=seed))
        best = rec.metrics["best_feasible"]
        trace = " ".join("-" if b is None else f"{b:.3f}" for b in best[::3])
        print(f"seed {seed}: feasible at {rec.metrics['first_feasible']}, "
              f"target at {rec.metrics['first_target']}")
        print(f"  best feasible every 3 evaluations: {trace}")


if __name__ == "__main__":
    main()
