"""Weighted candidate particles on the search domain

A :class:`ParticleSetX` targets the density proportional to the
probability of improvement ``P(xi(x) in G)``, where G is the part of the
output box not dominated by the current front.  When the models or the
front change, the particles are reweighted, resampled (residual scheme)
and moved by an adaptive random-walk Metropolis-Hastings kernel.  If the
effective sample size of the reweighted set falls below ``nu * m`` the
front is reached through intermediate fronts built exactly as for the
output-space particles, and if the model change alone degenerates the
weights, the population restarts from the uniform law and is driven
front by front to the current target.

The density is estimated by Monte Carlo with a fixed block of standard
normal draws per particle (pseudo-marginal Metropolis-Hastings); the block
is refreshed only when a move is accepted.  Closed forms are used where
available (single objective after a feasible observation, and the
probability of feasibility factor once a feasible point exists).
"""

from math import factorial

import numpy as np
from scipy.special import ndtr

from .domination import ExtendedFront, dominated_by_any, psi_rows
from .smc_y import advance_generic

DEFAULT_NU_X = 0.2
DEFAULT_MH_STEPS_X = 5
DEFAULT_N_DRAWS = 100
TARGET_ACCEPT = 0.3
MAX_LEVELS_X = 50
SCALE_FLOOR_X = 1e-4


class DegeneracySignal(RuntimeError):
    """All importance weights vanished."""


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class ImprovementDensity:
    """Unnormalized density x -> P(xi(x) in G(front)) (or its factorial variant).

    Parameters
    ----------
    models : sequence of GpModel
        p + q models, objectives first.
    bounds : BoxBounds
    factorial : bool
        Weight each draw by K! where K is the number of satisfied
        constraints.
    exact_single : bool
        Closed form for p = 1 once the front holds a feasible point.
    """

    def __init__(self, models, bounds, factorial=False, exact_single=True):
        self.models = list(models)
        self.bounds = bounds
        self.p = bounds.p
        self.q = bounds.q
        self.factorial = bool(factorial)
        self.exact_single = bool(exact_single)
        if len(self.models) != self.p + self.q:
            raise ValueError("one model per output is required")

    @property
    def k(self):
        return self.p + self.q

    def moments(self, X):
        from .gp import predict_all

        mean, var = predict_all(self.models, X)
        return mean, np.sqrt(np.maximum(var, 0.0))

    def evaluator(self, X, Z, moments=None):
        mean, sd = self.moments(X) if moments is None else moments
        return DensityEvaluator(self, mean, sd, Z)

    def __call__(self, X, Z, front):
        return self.evaluator(X, Z).pi(front)


class DensityEvaluator:
    """Density estimates at fixed particles and draws for varying fronts.

    The alive masks of the draws are cached per front so that trial
    fronts built by adding a few rows only test the new rows.
    """

    def __init__(self, density, mean, sd, Z):
        self.d = density
        self.mean = mean
        self.sd = sd
        self.Z = Z
        b = density.bounds
        p, q = density.p, density.q
        draws = np.clip(mean[:, None, :] + sd[:, None, :] * Z, b.low, b.upp)
        self.draws_ = draws
        self.obj_draws = draws[..., :p]
        self._rows_full = None
        if density.factorial:
            K = np.sum(draws[..., p:] <= 0, axis=-1)
            table = np.array([factorial(k) for k in range(q + 1)], dtype=float)
            self.w_full = table[K]
            self.w_fact = float(factorial(q))
        else:
            self.w_full = None
            self.w_fact = 1.0
        self.pf = np.prod(ndtr_ratio(0.0, mean[:, p:], sd[:, p:]), axis=-1)
        self._cache = {}

    @property
    def rows_full(self):
        if self._rows_full is None:
            p = self.d.p
            self._rows_full = psi_rows(self.draws_[..., :p], self.draws_[..., p:])
        return self._rows_full

    def _mode(self, front, new_rows):
        if front.has_feasible:
            return "fact"
        if new_rows is not None and len(new_rows):
            return "fact" if np.any(np.all(new_rows[:, self.d.p :] <= 0, axis=1)) else "full"
        return "full"

    def _feasible_obj(self, rows):
        p = self.d.p
        return rows[np.all(rows[:, p:] <= 0, axis=1), :p]

    def _base_mask(self, front, mode):
        key = (id(front), mode)
        hit = self._cache.get(key)
        if hit is not None and hit[0] is front:
            return hit[1]
        if mode == "fact":
            fo = self._feasible_obj(front.rows)
            mask = ~dominated_by_any(fo, self.obj_draws) if len(fo) else np.ones(self.obj_draws.shape[:2], bool)
        else:
            mask = ~dominated_by_any(front.rows, self.rows_full) if len(front) else np.ones(self.rows_full.shape[:2], bool)
        self._cache[key] = (front, mask)
        return mask

    def _closed_single(self, rows):
        fo = self._feasible_obj(rows)
        t = float(fo[:, 0].min())
        lo, up = self.d.bounds.y_low_obj[0], self.d.bounds.y_upp_obj[0]
        if t >= up:
            p_obj = np.ones(self.mean.shape[0])
        elif t <= lo:
            p_obj = np.zeros(self.mean.shape[0])
        else:
            p_obj = ndtr_ratio(t, self.mean[:, 0], self.sd[:, 0])
        return self.w_fact * self.pf * p_obj

    def pi(self, front, new_rows=None):
        """Density estimate at every particle for G(front with new_rows)."""
        if new_rows is not None:
            new_rows = np.asarray(new_rows, dtype=float).reshape(-1, self.d.k)
        mode = self._mode(front, new_rows)
        if mode == "fact" and self.d.p == 1 and self.d.exact_single:
            rows = front.rows if new_rows is None else np.vstack([front.rows, new_rows])
            return self._closed_single(rows)
        mask = self._base_mask(front, mode)
        if new_rows is not None and len(new_rows):
            if mode == "fact":
                fo = self._feasible_obj(new_rows)
                if len(fo):
                    mask = mask & ~dominated_by_any(fo, self.obj_draws)
            else:
                mask = mask & ~dominated_by_any(new_rows, self.rows_full)
        if mode == "fact":
            return self.w_fact * self.pf * mask.mean(axis=1)
        if self.w_full is not None:
            return (self.w_full * mask).mean(axis=1)
        return mask.mean(axis=1)


def ndtr_ratio(a, mean, sd):
    """Phi((a - mean) / sd), with the indicator 1{mean <= a} when sd = 0."""
    pos = sd > 0
    val = ndtr((a - mean) / np.where(pos, sd, 1.0))
    return np.where(pos, val, (mean <= a).astype(float))


class ParticleSetX:
    """Weighted particles on the search domain.

    Attributes
    ----------
    particles : ndarray, shape (m, d)
    weights : ndarray, shape (m,)
    x_low, x_upp : ndarray, shape (d,)
    rng : numpy.random.Generator
    density_tag : {"plain", "factorial-modified"}
    Z : ndarray, shape (m, n_draws, k) or None
        Standard normal draws attached to each particle.
    pi : ndarray, shape (m,)
        Current density estimates at the particles.
    """

    def __init__(self, particles, weights, x_low, x_upp, rng, density_tag="plain", n_draws=DEFAULT_N_DRAWS):
        self.particles = np.asarray(particles, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.x_low = np.asarray(x_low, dtype=float)
        self.x_upp = np.asarray(x_upp, dtype=float)
        self.rng = rng
        self.density_tag = density_tag
        self.n_draws = int(n_draws)
        self.Z = None
        self.pi = np.ones(self.m)
        self.log_scale = np.log(0.5)
        self.n_adapt = 0
        self.front = None
        self.restarts = 0
        self.levels = []
        self.acceptance = []

    @property
    def m(self):
        return self.particles.shape[0]

    @property
    def d(self):
        return self.particles.shape[1]

    def draws(self, n, k):
        return self.rng.standard_normal((n, self.n_draws, k))

    def ensure_draws(self, k):
        if self.Z is None or self.Z.shape[2] != k or self.Z.shape[0] != self.m:
            self.Z = self.draws(self.m, k)

    def __repr__(self):
        return f"ParticleSetX(m={self.m}, d={self.d}, ess={ess(self):.1f}, tag={self.density_tag!r})"


def init(x_low, x_upp, m, seed=None, density_tag="plain", n_draws=DEFAULT_N_DRAWS):
    """Uniform particles on [x_low, x_upp] with equal weights.

    Parameters
    ----------
    x_low, x_upp : array_like, shape (d,)
    m : int
    seed : int, Generator or None
    density_tag : {"plain", "factorial-modified"}

    Returns
    -------
    ParticleSetX
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    x_low = np.asarray(x_low, dtype=float)
    x_upp = np.asarray(x_upp, dtype=float)
    rng = _rng(seed)
    X = rng.uniform(x_low, x_upp, size=(m, x_low.size))
    return ParticleSetX(X, np.full(m, 1.0 / m), x_low, x_upp, rng, density_tag, n_draws)


def ess(xset):
    """Effective sample size 1 / sum(w^2)."""
    w = xset.weights if isinstance(xset, ParticleSetX) else np.asarray(xset, dtype=float)
    return float(1.0 / np.sum(w * w))


def reweight(xset, old_vals, new_vals):
    """w_k <- w_k new_k / old_k, renormalized.

    Raises
    ------
    DegeneracySignal
        When every new weight is zero.
    """
    old_vals = np.asarray(old_vals, dtype=float)
    new_vals = np.asarray(new_vals, dtype=float)
    ratio = np.where(old_vals > 0, new_vals / np.where(old_vals > 0, old_vals, 1.0), 0.0)
    w = xset.weights * ratio
    tot = w.sum()
    if not tot > 0:
        raise DegeneracySignal("all weights vanished")
    xset.weights = w / tot
    return xset


def _reweighted_ess(weights, old_vals, new_vals):
    ratio = np.where(old_vals > 0, new_vals / np.where(old_vals > 0, old_vals, 1.0), 0.0)
    w = weights * ratio
    tot = w.sum()
    if not tot > 0:
        return 0.0
    w = w / tot
    return float(1.0 / np.sum(w * w))


def residual_indices(weights, rng):
    """Residual resampling: floor(m w_k) deterministic copies, rest multinomial."""
    m = weights.size
    mw = m * weights
    base = np.floor(mw).astype(int)
    r = m - base.sum()
    idx = np.repeat(np.arange(m), base)
    if r > 0:
        res = mw - base
        res = res / res.sum()
        extra = rng.choice(m, size=r, replace=True, p=res)
        idx = np.concatenate([idx, np.sort(extra)])
    return idx


def residual_resample(xset):
    """Resample to equal weights with the residual scheme."""
    idx = residual_indices(xset.weights, xset.rng)
    xset.particles = xset.particles[idx]
    xset.pi = xset.pi[idx]
    if xset.Z is not None:
        xset.Z = xset.Z[idx]
    xset.weights = np.full(xset.m, 1.0 / xset.m)
    return xset


def move(xset, target, steps=DEFAULT_MH_STEPS_X):
    """Adaptive random-walk Metropolis-Hastings sweeps.

    Parameters
    ----------
    xset : ParticleSetX
        Equally weighted particles whose ``pi`` attribute holds the target
        estimates at the current positions.
    target : callable (X, Z) -> ndarray
        Unbiased density estimate at X using draws Z (ignored for a
        deterministic target); the draws of accepted particles are kept.
    steps : int

    Notes
    -----
    The per-coordinate proposal scale is exp(log_scale) times the
    particle spread; log_scale follows a Robbins-Monro recursion towards
    an acceptance rate of 0.3 with steps (n + 1)^-0.6.
    """
    span = xset.x_upp - xset.x_low
    k = xset.Z.shape[2] if xset.Z is not None else 0
    for _ in range(int(steps)):
        spread = np.maximum(xset.particles.std(axis=0), SCALE_FLOOR_X * span)
        scale = np.exp(xset.log_scale) * spread
        prop = xset.particles + scale * xset.rng.standard_normal(xset.particles.shape)
        inside = np.all((prop >= xset.x_low) & (prop <= xset.x_upp), axis=1)
        idx = np.flatnonzero(inside)
        acc = np.zeros(xset.m, bool)
        if idx.size:
            Zp = xset.draws(idx.size, k) if k else None
            pi_p = np.asarray(target(prop[idx], Zp), dtype=float)
            cur = xset.pi[idx]
            u = xset.rng.uniform(size=idx.size)
            ok = np.where(cur > 0, u * cur < pi_p, True)
            sel = idx[ok]
            acc[sel] = True
            xset.particles[sel] = prop[sel]
            xset.pi[sel] = pi_p[ok]
            if k:
                xset.Z[sel] = Zp[ok]
        rate = float(acc.mean())
        xset.acceptance.append(rate)
        xset.n_adapt += 1
        xset.log_scale += (xset.n_adapt + 1) ** -0.6 * (rate - TARGET_ACCEPT)
        xset.log_scale = float(np.clip(xset.log_scale, np.log(1e-3), np.log(2.0)))
    return xset


def _target_fn(density, front):
    def target(X, Z):
        return density.evaluator(X, Z).pi(front)

    return target


def _restart(xset, density):
    m = xset.m
    xset.particles = xset.rng.uniform(xset.x_low, xset.x_upp, size=(m, xset.d))
    xset.weights = np.full(m, 1.0 / m)
    xset.Z = xset.draws(m, density.k)
    empty = ExtendedFront(density.p, density.q)
    xset.pi = density.evaluator(xset.particles, xset.Z).pi(empty)
    # uniform draws are an importance sample of pi (not uniform for the factorial variant)
    tot = xset.pi.sum()
    if tot > 0:
        xset.weights = xset.pi / tot
    xset.restarts += 1
    return empty


def step(xset, density, front_new, nu=DEFAULT_NU_X, mh_steps=DEFAULT_MH_STEPS_X, max_levels=MAX_LEVELS_X):
    """Reweight-resample-move the set to the density for front_new.

    Parameters
    ----------
    xset : ParticleSetX
        Its ``front`` attribute holds the previous front (None on the
        first call, meaning the set is uniform).
    density : ImprovementDensity
        Built on the new models and bounds.
    front_new : ExtendedFront
        Current extended front of the evaluations.
    nu : float
        ESS fraction below which intermediate fronts are inserted.
    mh_steps : int
    max_levels : int

    Returns
    -------
    ParticleSetX
    """
    m = xset.m
    thr = nu * m
    xset.ensure_draws(density.k)
    front_old = xset.front
    if front_old is None:
        front_old = _restart(xset, density)
        xset.restarts -= 1
    else:
        ev = density.evaluator(xset.particles, xset.Z)
        new_vals = ev.pi(front_old)
        try:
            reweight(xset, xset.pi, new_vals)
            xset.pi = new_vals
            degenerate = ess(xset) < thr
        except DegeneracySignal:
            degenerate = True
        if degenerate:
            front_old = _restart(xset, density)
    state = {"ev": density.evaluator(xset.particles, xset.Z)}

    def count(front, rows):
        return _reweighted_ess(xset.weights, xset.pi, state["ev"].pi(front, rows))

    def on_level(front):
        vals = state["ev"].pi(front)
        reweight(xset, xset.pi, vals)
        xset.pi = vals
        residual_resample(xset)
        move(xset, _target_fn(density, front), mh_steps)
        xset.levels.append(len(front))
        state["ev"] = density.evaluator(xset.particles, xset.Z)

    if front_old.same_as(front_new):
        residual_resample(xset)
        move(xset, _target_fn(density, front_new), mh_steps)
    else:
        advance_generic(front_old, front_new, count, thr, density.bounds.upp, xset.rng, on_level, max_levels)
    xset.front = front_new
    return xset


def prob_improvement(models, state, x, n_draws=DEFAULT_N_DRAWS, seed=None, factorial=False, exact_single=True):
    """P(xi(x) in G) for the state's front and box.

    Closed form for p = 1 once a feasible point exists, Monte Carlo with
    n_draws draws otherwise.

    Parameters
    ----------
    models : sequence of GpModel
    state : CriterionState
    x : array_like, shape (d,) or (M, d)
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    dens = ImprovementDensity(models, state.bounds, factorial, exact_single)
    Z = _rng(seed).standard_normal((X.shape[0], n_draws, dens.k))
    val = dens.evaluator(X, Z).pi(state.front)
    return float(val[0]) if np.ndim(x) == 1 else val


def factorial_density_weight(models, state, x, n_draws=DEFAULT_N_DRAWS, seed=None):
    """Monte Carlo estimate of E[K! 1{xi(x) in G}], K = number of satisfied constraints."""
    return prob_improvement(models, state, x, n_draws, seed, factorial=True, exact_single=False)


__all__ = [
    "DegeneracySignal",
    "ImprovementDensity",
    "DensityEvaluator",
    "ParticleSetX",
    "init",
    "ess",
    "reweight",
    "residual_resample",
    "residual_indices",
    "move",
    "step",
    "prob_improvement",
    "factorial_density_weight",
]
