"""Optimize the two-objective toy problem and print the feasible front found."""

import numpy as np

from bmoo.domination import nondominated_mask
from bmoo.driver import RunConfig, run_bmoo


def main():
    rec = run_bmoo(RunConfig("toy", budget=40, seed=0))
    F, C = rec.F, rec.C
    feas = np.all(C <= 1e-5, axis=1)
    print(f"first feasible evaluation: {rec.metrics['first_feasible']}")
    front = F[feas][nondominated_mask(F[feas])]
    print(f"{len(front)} nondominated feasible points:")
    for f in front[np.argsort(front[:, 0])]:
        print(f"  f1 = {f[0]:9.4f}  f2 = {f[1]:9.4f}")


if __name__ == "__main__":
    main()
