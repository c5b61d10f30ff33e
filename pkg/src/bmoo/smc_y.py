"""Uniform particles on the non-dominated region of the output box

A :class:`ParticleSetY` holds ``m`` points uniformly distributed on
``G = B minus the region dominated by a front``.  The set follows a
shrinking sequence of regions by subset simulation: each level removes
the particles that became dominated, replicates the survivors and moves
all of them with a random-walk Metropolis-Hastings kernel that leaves the
uniform law on G invariant.  When too few particles would survive the
next target front, intermediate fronts are built along segments from an
anchor at the upper corner of the box towards a target point, with the
position on the segment set by bisection.

The running product of survival fractions times ``|B|`` estimates ``|G|``.

Particle sets live in one of three spaces: the full output space
("full", p objectives then q constraints), the objective box alone
("obj") or the constraint box alone ("cons").
"""

import numpy as np

from .domination import ExtendedFront, dominated_by_any, front_insert, psi_rows

DEFAULT_NU = 0.2
DEFAULT_MH_STEPS = 10
SCALE_FACTOR = 0.2
SCALE_FLOOR = 1e-6
MAX_BISECTIONS = 30
MAX_LEVELS = 200


class RestartSignal(RuntimeError):
    """No particle survived a level; the caller should restart from B."""


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class ParticleSetY:
    """Particle population uniform on the non-dominated part of a box.

    Parameters
    ----------
    particles : ndarray, shape (m, p + q)
        Raw output coordinates (objectives then constraints).
    low, upp : ndarray, shape (p + q,)
        Box corners.
    p, q : int
        Number of objective and constraint coordinates of the space.
    front : ExtendedFront
    log_volume : float
        Log of the current estimate of |G|.
    rng : numpy.random.Generator
    space : {"full", "obj", "cons"}
    nu : float
        Survival fraction used when building intermediate fronts.
    mh_steps : int
        Metropolis-Hastings sweeps per level.

    Notes
    -----
    Operations mutate the set in place and return it.
    """

    def __init__(self, particles, low, upp, p, q, front, log_volume, rng, space="full",
                 nu=DEFAULT_NU, mh_steps=DEFAULT_MH_STEPS):
        self.particles = np.asarray(particles, dtype=float)
        self.low = np.asarray(low, dtype=float)
        self.upp = np.asarray(upp, dtype=float)
        self.p = int(p)
        self.q = int(q)
        self.front = front
        self.log_volume = float(log_volume)
        self.rng = rng
        self.space = space
        self.nu = float(nu)
        self.mh_steps = int(mh_steps)
        self.levels = []
        self.acceptance = []

    @property
    def m(self):
        return self.particles.shape[0]

    @property
    def volume(self):
        return float(np.exp(self.log_volume))

    @property
    def box_volume(self):
        return float(np.prod(self.upp - self.low))

    def rows(self, Y=None):
        """Extended rows of the particles (or of Y)."""
        Y = self.particles if Y is None else Y
        return psi_rows(Y[:, : self.p], Y[:, self.p :])

    def __repr__(self):
        return f"ParticleSetY(space={self.space!r}, m={self.m}, front={len(self.front)}, volume={self.volume:.4g})"


def init_uniform(bounds, m, seed=None, space="full", nu=DEFAULT_NU, mh_steps=DEFAULT_MH_STEPS):
    """Draw m i.i.d. uniform particles on the box, with an empty front.

    Parameters
    ----------
    bounds : BoxBounds or tuple (low, upp, p, q)
    m : int
    seed : int, Generator or None
    space : {"full", "obj", "cons"}
        Which factor of a BoxBounds to use (ignored for tuples).

    Returns
    -------
    ParticleSetY
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if isinstance(bounds, tuple):
        low, upp, p, q = bounds
    else:
        low, upp, p, q = bounds.space(space)
    low = np.asarray(low, dtype=float)
    upp = np.asarray(upp, dtype=float)
    rng = _rng(seed)
    X = rng.uniform(low, upp, size=(m, low.size))
    logv = float(np.sum(np.log(upp - low)))
    return ParticleSetY(X, low, upp, p, q, ExtendedFront(p, q), logv, rng, space, nu, mh_steps)


def count_in_region(pset, front):
    """Number of particles not dominated by the front."""
    if len(front) == 0:
        return pset.m
    return int(np.sum(~dominated_by_any(front.rows, pset.rows())))


def move_mh(pset, steps=None, front=None):
    """Random-walk Metropolis-Hastings sweeps targeting uniform on G.

    Proposals are per-coordinate Gaussian with scale 0.2 times the
    particle standard deviation (floored at 1e-6 of the box span); moves
    leaving the box or entering the dominated region are rejected.
    """
    steps = pset.mh_steps if steps is None else int(steps)
    front = pset.front if front is None else front
    span = pset.upp - pset.low
    Y = pset.particles
    rng = pset.rng
    for _ in range(steps):
        scale = np.maximum(SCALE_FACTOR * Y.std(axis=0), SCALE_FLOOR * span)
        prop = Y + scale * rng.standard_normal(Y.shape)
        ok = np.all((prop >= pset.low) & (prop <= pset.upp), axis=1)
        if len(front) and np.any(ok):
            idx = np.flatnonzero(ok)
            ok[idx] = ~dominated_by_any(front.rows, pset.rows(prop[idx]))
        Y = np.where(ok[:, None], prop, Y)
        pset.acceptance.append(float(ok.mean()))
    pset.particles = Y
    return pset


def remove_resample_move(pset, front, steps=None):
    """One subset-simulation level towards G(front).

    Raises
    ------
    RestartSignal
        When no particle survives.
    """
    alive = ~dominated_by_any(front.rows, pset.rows()) if len(front) else np.ones(pset.m, bool)
    n0 = int(alive.sum())
    if n0 == 0:
        raise RestartSignal("no particle survived the level")
    m = pset.m
    surv = pset.particles[alive]
    extra = surv[pset.rng.integers(0, n0, size=m - n0)]
    pset.particles = np.vstack([surv, extra])
    pset.log_volume += np.log(n0 / m)
    pset.front = front
    pset.levels.append(n0)
    return move_mh(pset, steps, front)


def segment_builder(p, q, upp, ystar, count, thr):
    """Intermediate-front rows along an anchor path towards ystar.

    Parameters
    ----------
    p, q : int
    upp : ndarray, shape (p + q,)
        Upper corner of the box.
    ystar : ndarray, shape (p + q,)
        Extended row of the target point.
    count : callable
        Maps candidate rows to the survival measure of the current front
        augmented with those rows.
    thr : float

    Returns
    -------
    callable
        u in [0, 1] -> (k, p + q) rows; u = 1 yields ystar (or, for the
        corner sweep, the anchor (y_upp_obj, 0)).
    """
    upp_o, upp_c = upp[:p], upp[p:]
    ys_o, ys_c = ystar[:p], ystar[p:]
    if np.any(ys_c > 0):
        # infeasible target: anchor at the upper corner on violated coordinates
        anchor_c = np.where(ys_c > 0, upp_c, 0.0)

        def seg(u):
            c = anchor_c + u * (ys_c - anchor_c)
            return np.concatenate([np.full(p, np.inf), c])[None, :]

        return seg

    def seg0(u):
        o = upp_o + u * (ys_o - upp_o)
        return np.concatenate([o, np.zeros(q)])[None, :]

    if q == 0 or count(seg0(0.0)) >= thr:
        return seg0

    # feasible target whose anchor already kills too much: sweep the q
    # corner anchors (y_upp_obj, y_upp_cons_k e_k) towards (y_upp_obj, 0)
    def seg_corner(u):
        if u >= 1.0:
            return seg0(0.0)
        out = np.zeros((q, p + q))
        out[:, :p] = np.inf
        out[np.arange(q), p + np.arange(q)] = (1.0 - u) * upp_c
        return out

    return seg_corner


def bisect_segment(seg, count, thr):
    """Largest u found by bisection with count(seg(u)) >= thr.

    Stops early once the count lies in [thr, 2 thr].  When no tested
    u > 0 keeps thr survivors, the smallest failing u is returned so that
    the front still moves.
    """
    if count(seg(1.0)) >= thr:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        n = count(seg(mid))
        if n >= thr:
            lo = mid
            if n <= 2 * thr:
                break
        else:
            hi = mid
    return lo if lo > 0 else hi


def insert_rows(P, new_rows):
    """Pareto front of P together with the given rows."""
    for r in new_rows:
        P = front_insert(P, r)
    return P


def advance_generic(P, target, count, thr, upp, rng, on_level, max_levels=MAX_LEVELS):
    """Sequence of nested fronts from P to target.

    Parameters
    ----------
    P, target : ExtendedFront
    count : callable (front, rows) -> float
        Survival measure of G(front with rows added) for the population
        as it stands at the start of the level.
    thr : float
    upp : ndarray
        Upper corner of the box.
    rng : numpy.random.Generator
    on_level : callable
        Called with each new intermediate front; updates the population.
    max_levels : int
        Past this many levels the target is reached in one jump.

    Returns
    -------
    ExtendedFront
        The target front.
    """
    p, q = target.p, target.q
    n_levels = 0
    while not P.same_as(target):
        if n_levels >= max_levels:
            P = target
            on_level(P)
            break
        for y in target.rows:
            if P.contains(y):
                continue
            if count(P, y[None, :]) >= thr:
                P = front_insert(P, y)
        if not P.same_as(target):
            remaining = [y for y in target.rows if not P.contains(y)]
            ystar = remaining[int(rng.integers(len(remaining)))]
            base = P

            def cnt(rows):
                return count(base, rows)

            seg = segment_builder(p, q, upp, ystar, cnt, thr)
            u = bisect_segment(seg, cnt, thr)
            P_new = insert_rows(P, seg(u))
            if P_new.same_as(P):
                P_new = front_insert(P, ystar)
            P = P_new
        on_level(P)
        n_levels += 1
    return P


def advance_front(pset, target_front, nu=None, mh_steps=None, max_levels=MAX_LEVELS):
    """Move the population from G(pset.front) to G(target_front).

    Target points are inserted greedily while at least ``nu * m``
    particles survive; otherwise an intermediate front is built by
    bisection along an anchor path.  Each new front triggers one
    remove-resample-move level.

    Parameters
    ----------
    pset : ParticleSetY
    target_front : ExtendedFront
        Must satisfy G(target_front) within G(pset.front).
    nu : float, optional
        Minimal survival fraction per level (default: ``pset.nu``).
    mh_steps : int, optional
    max_levels : int
        Safety cap on the number of levels; past it the remaining target
        points are inserted at once.

    Returns
    -------
    ParticleSetY
        The same object, updated.

    Raises
    ------
    RestartSignal
        When a level leaves no survivor.
    """
    nu = pset.nu if nu is None else float(nu)
    if (target_front.p, target_front.q) != (pset.p, pset.q):
        raise ValueError("target front lives in another space")
    cache = {}

    def alive_of(front):
        key = id(front)
        if key not in cache or cache[key][0] is not front:
            rows = pset.rows()
            alive = ~dominated_by_any(front.rows, rows) if len(front) else np.ones(pset.m, bool)
            cache[key] = (front, rows, alive)
        return cache[key][1], cache[key][2]

    def count(front, new_rows):
        rows, alive = alive_of(front)
        return int(np.sum(alive & ~dominated_by_any(new_rows, rows)))

    def on_level(front):
        cache.clear()
        remove_resample_move(pset, front, mh_steps)

    advance_generic(pset.front, target_front, count, nu * pset.m, pset.upp, pset.rng, on_level, max_levels)
    pset.front = target_front
    return pset


def estimate_ei_integral(pset, integrand, region_volume=None):
    """Monte Carlo estimate of the integral of integrand over G.

    Parameters
    ----------
    pset : ParticleSetY
    integrand : callable
        Maps the (m, p + q) particle array to m values.
    region_volume : float, optional
        Defaults to the set's running estimate of |G|.
    """
    vol = pset.volume if region_volume is None else float(region_volume)
    vals = np.asarray(integrand(pset.particles), dtype=float)
    return vol * float(vals.mean())


def sample_region(bounds, front, m, seed=None, space="full", nu=DEFAULT_NU,
                  mh_steps=DEFAULT_MH_STEPS, max_restarts=5):
    """Particles uniform on G(front), restarting from B on degeneracy.

    Parameters
    ----------
    bounds : BoxBounds or tuple (low, upp, p, q)
    front : ExtendedFront
        Front in the chosen space.
    m : int
    seed : int or Generator
    space : {"full", "obj", "cons"}

    Returns
    -------
    ParticleSetY
    """
    rng = _rng(seed)
    last = None
    for _ in range(max_restarts):
        pset = init_uniform(bounds, m, rng, space, nu, mh_steps)
        try:
            return advance_front(pset, front)
        except RestartSignal as exc:
            last = exc
    raise last
