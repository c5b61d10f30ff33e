from math import factorial

import numpy as np
import pytest
from scipy.stats import kstest, ks_2samp

from bmoo.bounds import BoxBounds
from bmoo.criterion import CriterionState
from bmoo.domination import ExtendedFront, front_from_outputs, front_from_rows, psi
from bmoo.gp import fit_all
from bmoo.problems import get_problem
from bmoo.smc_x import (
    ImprovementDensity,
    ParticleSetX,
    ess,
    init,
    move,
    prob_improvement,
    reweight,
    residual_indices,
    residual_resample,
    step,
)
from oracles import FixedMomentsDensity, IdealizedBoxDensity


def all_satisfied(X, eps=0.2):
    return int(np.sum(np.all(X <= eps, axis=1)))


def test_init_examples():
    xs = init([0.0, -1.0], [2.0, 1.0], 4000, seed=0)
    np.testing.assert_allclose(xs.weights, 1 / 4000)
    assert ess(xs) == pytest.approx(4000)
    np.testing.assert_allclose(xs.particles.mean(0), [1.0, 0.0], atol=0.05)
    assert np.all((xs.particles >= xs.x_low) & (xs.particles <= xs.x_upp))
    with pytest.raises(ValueError):
        init([0.0], [1.0], 1)


def test_ess_examples():
    assert ess(np.full(10, 0.1)) == pytest.approx(10)
    assert ess(np.array([1.0, 0.0, 0.0])) == pytest.approx(1)
    assert ess(np.array([0.5, 0.5])) == pytest.approx(2)


def _two(weights=(0.5, 0.5)):
    return ParticleSetX(np.array([[0.0], [1.0]]), np.array(weights), [0.0], [1.0], np.random.default_rng(0))


def test_reweight_examples():
    xs = reweight(_two(), [1.0, 1.0], [1.0, 1.0])
    np.testing.assert_allclose(xs.weights, [0.5, 0.5])
    xs = reweight(_two(), [1.0, 2.0], [2.0, 4.0])
    np.testing.assert_allclose(xs.weights, [0.5, 0.5])
    xs = reweight(_two(), [1.0, 1.0], [1.0, 3.0])
    np.testing.assert_allclose(xs.weights, [0.25, 0.75])
    assert xs.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_residual_resample_examples():
    xs = residual_resample(_two((0.5, 0.5)))
    np.testing.assert_array_equal(np.sort(xs.particles[:, 0]), [0.0, 1.0])
    xs = residual_resample(_two((1.0, 0.0)))
    np.testing.assert_array_equal(xs.particles[:, 0], [0.0, 0.0])
    np.testing.assert_allclose(xs.weights, 0.5)


def test_residual_resample_unbiased():
    rng = np.random.default_rng(1)
    w = np.array([0.3, 0.7])
    counts = np.array([np.bincount(residual_indices(w, rng), minlength=2) for _ in range(10_000)])
    # one residual draw: copies of particle 0 are Bernoulli(0.6)
    sd = np.sqrt(0.6 * 0.4 / 10_000)
    assert abs(counts[:, 0].mean() - 0.6) <= 3 * sd
    assert np.all(counts.sum(1) == 2)


def test_resampling_preserves_weighted_mean():
    rng = np.random.default_rng(2)
    x = rng.random(50)
    w = rng.random(50) ** 3
    w /= w.sum()
    means = [np.mean(np.sin(3 * x[residual_indices(w, rng)])) for _ in range(4000)]
    target = np.sum(w * np.sin(3 * x))
    assert abs(np.mean(means) - target) <= 4 * np.std(means) / np.sqrt(4000)


def test_move_uniform_target_only_domain_rejections():
    xs = init([0.0, 0.0], [1.0, 1.0], 3000, seed=3)
    xs.log_scale = np.log(1.5)
    rng = np.random.default_rng(3)
    seen = []

    def target(X, Z):
        seen.append(len(X))
        return np.ones(len(X))

    move(xs, target, steps=1)
    # every proposal inside the box was accepted
    assert xs.acceptance[-1] * xs.m == pytest.approx(seen[0])


def test_move_invariance_and_confinement():
    rng = np.random.default_rng(4)
    # density proportional to x1 on the unit square: x1 = sqrt(U)
    xs = init([0.0, 0.0], [1.0, 1.0], 4000, seed=5)
    xs.particles = np.column_stack([np.sqrt(rng.random(4000)), rng.random(4000)])
    xs.pi = xs.particles[:, 0].copy()
    for _ in range(4):
        move(xs, lambda X, Z: X[:, 0], steps=5)
        assert np.all((xs.particles >= 0) & (xs.particles <= 1))
    ref = np.sqrt(rng.random(4000))
    assert ks_2samp(xs.particles[:, 0], ref).pvalue > 0.01
    assert kstest(xs.particles[:, 1], "uniform").pvalue > 0.01


def test_constant_density_keeps_uniform():
    dens = IdealizedBoxDensity(factorial=False)
    xs = init(np.zeros(5), np.ones(5), 2000, seed=6, n_draws=20)
    empty = ExtendedFront(1, 5)
    step(xs, dens, empty)
    for _ in range(3):
        step(xs, dens, empty)
    for j in range(5):
        assert kstest(xs.particles[:, j], "uniform").pvalue > 0.001
    assert ess(xs) == pytest.approx(xs.m)


def test_factorial_weight_examples():
    b = BoxBounds([-1.0], [1.0], -np.ones(3), np.ones(3))

    def feasible(X):
        return np.column_stack([np.zeros(len(X)), -0.5 * np.ones((len(X), 3))]), np.zeros((len(X), 4))

    dens = FixedMomentsDensity(feasible, b, factorial=True)
    Z = np.random.default_rng(0).standard_normal((4, 10, 4))
    val = dens.evaluator(np.zeros((4, 1)), Z).pi(ExtendedFront(1, 3))
    np.testing.assert_allclose(val, factorial(3))
    plain = FixedMomentsDensity(feasible, b, factorial=False)
    np.testing.assert_allclose(plain.evaluator(np.zeros((4, 1)), Z).pi(ExtendedFront(1, 3)), 1.0)


def test_factorial_weight_is_plain_without_satisfied_constraints():
    # K = 0 on every draw: the factorial weight 0! = 1 reduces to P(improvement)
    b = BoxBounds([-1.0], [1.0], -np.ones(2), np.ones(2))

    def violated(X):
        return np.column_stack([np.zeros(len(X)), 0.5 * np.ones((len(X), 2))]), np.column_stack(
            [np.zeros(len(X)), 0.1 * np.ones((len(X), 2))])

    fr = front_from_rows(1, 2, [psi([0.0], [0.6, 0.2]).as_row()])
    Z = np.random.default_rng(1).standard_normal((3, 200, 3))
    a = FixedMomentsDensity(violated, b, factorial=True).evaluator(np.zeros((3, 1)), Z).pi(fr)
    c = FixedMomentsDensity(violated, b, factorial=False).evaluator(np.zeros((3, 1)), Z).pi(fr)
    np.testing.assert_allclose(a, c)


def idealized_counts(seed, factorial, iterations=5, m=1000):
    """Particles satisfying every constraint after a few sampler iterations."""
    xs = init(np.zeros(5), np.ones(5), m, seed=seed, n_draws=20,
              density_tag="factorial-modified" if factorial else "plain")
    dens = IdealizedBoxDensity(factorial=factorial)
    for _ in range(iterations):
        step(xs, dens, ExtendedFront(1, 5))
    return all_satisfied(xs.particles)


def test_factorial_density_favours_feasible_region():
    wins = 0
    for seed in range(10):
        counts = [idealized_counts(seed, fac) for fac in (False, True)]
        wins += counts[1] > counts[0]
    assert wins >= 8


# tests with fitted models

def _toy_state(n=12, seed=0):
    toy = get_problem("toy")
    rng = np.random.default_rng(seed)
    X = toy.x_low + rng.random((n, 2)) * toy.span
    F, C = toy.evaluate_batch(X)
    models = fit_all(X, np.hstack([F, C]), x_low=toy.x_low, x_upp=toy.x_upp, rng=rng)
    from bmoo.bounds import update_bounds

    bounds = update_bounds((F, C), models, toy.x_low + rng.random((500, 2)) * toy.span)
    return toy, X, F, C, models, bounds


def test_prob_improvement_examples():
    toy, X, F, C, models, bounds = _toy_state()
    empty = CriterionState.from_front(ExtendedFront(2, 1), bounds)
    x = toy.x_low + 0.3 * toy.span
    assert prob_improvement(models, empty, x, seed=0) == 1.0
    # a point that has been observed is (nearly) deterministic and dominated by the front
    fr = front_from_outputs(F, C)
    st = CriterionState.from_front(fr, bounds)
    i = int(np.argmax(np.all(C <= 0, 1) if np.any(np.all(C <= 0, 1)) else np.zeros(len(C))))
    assert prob_improvement(models, st, X[i] , seed=0) <= 0.05


@pytest.mark.parametrize("seed", range(20))
def test_closed_form_vs_monte_carlo_single_objective(seed):
    rng = np.random.default_rng(seed)
    b = BoxBounds([-3.0], [3.0], [-2.0, -2.0], [2.0, 2.0])
    mu = rng.normal(0, 1, 3)
    sd = rng.uniform(0.2, 1.5, 3)

    def moments(X):
        return np.tile(mu, (len(X), 1)), np.tile(sd, (len(X), 1))

    t = rng.uniform(-2, 2)
    fr = front_from_rows(1, 2, [psi([t], [-0.5, -0.5]).as_row()])
    exact = FixedMomentsDensity(moments, b, exact_single=True).evaluator(np.zeros((1, 1)), np.zeros((1, 1, 3))).pi(fr)[0]
    n = 100_000
    Z = rng.standard_normal((1, n, 3))
    mc = FixedMomentsDensity(moments, b, exact_single=False).evaluator(np.zeros((1, 1)), Z).pi(fr)[0]
    assert abs(mc - exact) <= 3 * np.sqrt(exact * (1 - exact) / n) + 1e-12


def test_step_without_new_data_is_resample_and_move():
    toy, X, F, C, models, bounds = _toy_state()
    fr = front_from_outputs(F, C)
    dens = ImprovementDensity(models, bounds)
    xs = init(toy.x_low, toy.x_upp, 400, seed=1, n_draws=50)
    step(xs, dens, fr)
    restarts = xs.restarts
    step(xs, dens, fr)
    assert xs.restarts == restarts
    assert ess(xs) == pytest.approx(xs.m)
    assert np.all((xs.particles >= toy.x_low) & (xs.particles <= toy.x_upp))


def test_particles_concentrate_after_step():
    toy = get_problem("toy")
    gains = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = toy.x_low + rng.random((10, 2)) * toy.span
        F, C = toy.evaluate_batch(X)
        models = fit_all(X, np.hstack([F, C]), x_low=toy.x_low, x_upp=toy.x_upp, rng=rng)
        from bmoo.bounds import update_bounds

        bounds = update_bounds((F, C), models, toy.x_low + rng.random((500, 2)) * toy.span)
        dens = ImprovementDensity(models, bounds)
        fr = front_from_outputs(F, C)
        xs = init(toy.x_low, toy.x_upp, 300, seed=seed, n_draws=50)
        before = dens(xs.particles, rng.standard_normal((300, 50, 3)), fr).mean()
        step(xs, dens, fr)
        after = dens(xs.particles, rng.standard_normal((300, 50, 3)), fr).mean()
        gains.append(after - before)
    gains = np.array(gains)
    assert np.sum(gains > 0) >= 15 and gains.mean() > 0
