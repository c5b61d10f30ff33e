"""Compare the exact single-objective criterion with its particle estimate.

With one objective and a feasible observation the criterion has a closed
form.  The same value can be estimated with particles spread uniformly
over the non-dominated part of the objective box; the estimate tightens
as the particle count grows.
"""

import numpy as np

from bmoo.bounds import BoxBounds
from bmoo.criterion import CriterionState, PosteriorBundle, expected_improvement, project_front
from bmoo.domination import front_from_rows, psi
from bmoo.smc_y import sample_region


def main():
    b = BoxBounds([-3.0], [4.0], [-2.0], [1.0])
    front = front_from_rows(1, 1, [psi([1.0], [-0.5]).as_row()])
    bundle = PosteriorBundle(np.array([0.5]), np.array([0.6]), np.array([-0.2]), np.array([0.1]))
    exact = expected_improvement(bundle, CriterionState.from_front(front, b))
    print(f"closed form: {exact:.5f}")
    for m in (100, 1000, 10000):
        vals = []
        for seed in range(10):
            ps = sample_region(b, project_front(front, "obj"), m, seed=seed, space="obj")
            st = CriterionState.from_front(front, b, ps)
            vals.append(expected_improvement(bundle, st, exact_single=False))
        print(f"m = {m:5d}: mean {np.mean(vals):.5f}  sd {np.std(vals):.5f}")


if __name__ == "__main__":
    main()
