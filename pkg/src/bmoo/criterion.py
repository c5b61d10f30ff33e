"""Expected improvement criteria

Closed-form pieces (the gamma function, classical EI, probability of
feasibility, the Schonlau product criterion, the probability
``P(xi(x) <| y)`` for independent Gaussian outputs) and the unified
expected hyper-volume improvement under the extended domination rule,
split into a feasible and an unfeasible part.

All functions are vectorized over candidates: a :class:`PosteriorBundle`
may hold moments with arbitrary leading dimensions, and results carry the
same leading shape (a Python float for a single candidate).

Dispatch used by :func:`expected_improvement`:

* no feasible observation yet: the feasible part has a closed form (box
  integral of the objective CDFs); the unfeasible part is a Monte Carlo
  estimate over particles uniform on the non-dominated part of the
  constraint box;
* feasible observation and a single objective: exact product
  ``|B_c-| * P_feas * gamma(min(m_n, y_upp) - mu, sigma^2)``;
* feasible observation and several objectives: Monte Carlo estimate over
  particles uniform on the non-dominated part of the objective box; the
  unfeasible part vanishes.
"""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy.special import ndtr

from .domination import ExtendedFront

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
_CHUNK = 2_000_000


class StateError(ValueError):
    """Raised when a criterion is called on an inconsistent state."""


def _out(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


@dataclass(frozen=True)
class PosteriorBundle:
    """Posterior moments of all outputs at one or several candidates.

    Attributes
    ----------
    obj_mean, obj_var : ndarray, shape (..., p)
    cons_mean, cons_var : ndarray, shape (..., q)
    """

    obj_mean: np.ndarray
    obj_var: np.ndarray
    cons_mean: np.ndarray
    cons_var: np.ndarray

    def __post_init__(self):
        for name in ("obj_mean", "obj_var", "cons_mean", "cons_var"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.any(self.obj_var < 0) or np.any(self.cons_var < 0):
            raise ValueError("posterior variances must be nonnegative")

    @classmethod
    def from_arrays(cls, mean, var, p):
        """Split (..., p + q) moment arrays, objectives first."""
        mean = np.asarray(mean, dtype=float)
        var = np.maximum(np.asarray(var, dtype=float), 0.0)
        return cls(mean[..., :p], var[..., :p], mean[..., p:], var[..., p:])

    @classmethod
    def from_posteriors(cls, obj, cons):
        """Build from sequences of :class:`bmoo.gp.Posterior`."""
        return cls(
            [o.mean for o in obj], [o.var for o in obj], [c.mean for c in cons], [c.var for c in cons]
        )

    @classmethod
    def from_models(cls, models, X, p):
        from .gp import predict_all

        mean, var = predict_all(models, X)
        return cls.from_arrays(mean, var, p)

    @property
    def p(self):
        return self.obj_mean.shape[-1]

    @property
    def q(self):
        return self.cons_mean.shape[-1]

    @property
    def shape(self):
        return self.obj_mean.shape[:-1]

    @property
    def obj_sd(self):
        return np.sqrt(self.obj_var)

    @property
    def cons_sd(self):
        return np.sqrt(self.cons_var)

    def __getitem__(self, idx):
        return PosteriorBundle(
            self.obj_mean[idx], self.obj_var[idx], self.cons_mean[idx], self.cons_var[idx]
        )


@dataclass(frozen=True)
class CriterionState:
    """Everything the criterion needs besides the posterior at x.

    Attributes
    ----------
    front : ExtendedFront
        Extended Pareto front of the evaluations (full output space).
    bounds : BoxBounds
    best_feasible_value : float or None
        Best feasible objective m_n (single-objective problems only).
    y_particles : ParticleSetY or None
        Particles uniform on the non-dominated part of the objective box
        (after a feasible observation) or of the constraint box (before).
    feasible_found : bool
    """

    front: ExtendedFront
    bounds: Any
    best_feasible_value: Optional[float] = None
    y_particles: Any = None
    feasible_found: bool = False

    def __post_init__(self):
        if self.feasible_found != self.front.has_feasible:
            raise StateError("feasible_found disagrees with the front")
        if (self.best_feasible_value is not None) != (self.feasible_found and self.front.p == 1):
            raise StateError("best_feasible_value requires p = 1 and a feasible point")

    @classmethod
    def from_front(cls, front, bounds, y_particles=None):
        feas = front.has_feasible
        best = None
        if feas and front.p == 1:
            rows = front.rows[np.all(front.rows[:, 1:] <= 0, axis=1)]
            best = float(rows[:, 0].min())
        return cls(front, bounds, best, y_particles, feas)


def gamma_ei(z, s):
    """gamma(z, s) = sqrt(s) phi(z / sqrt(s)) + z Phi(z / sqrt(s)).

    Equals max(z, 0) when s = 0; it is the expectation of max(z + sqrt(s) U, 0)
    for a standard normal U, and an antiderivative of Phi(z / sqrt(s)) in z.
    """
    z = np.asarray(z, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    sd = np.sqrt(s)
    pos = sd > 0
    safe = np.where(pos, sd, 1.0)
    t = z / safe
    val = safe * _INV_SQRT_2PI * np.exp(-0.5 * t * t) + z * ndtr(t)
    return _out(np.where(pos, val, np.maximum(z, 0.0)))


def ei_classic(post, m_n):
    """Classical expected improvement gamma(m_n - mean, var) for minimization."""
    return gamma_ei(m_n - np.asarray(post.mean), np.asarray(post.var))


def cdf_ratio(a, mean, sd):
    """Phi((a - mean) / sd), with the indicator 1{mean <= a} when sd = 0."""
    a = np.asarray(a, dtype=float)
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    pos = sd > 0
    val = ndtr((a - mean) / np.where(pos, sd, 1.0))
    return np.where(pos, val, (mean <= a).astype(float))


def _prob_feasible_arrays(cons_mean, cons_sd):
    return np.prod(cdf_ratio(0.0, cons_mean, cons_sd), axis=-1)


def prob_feasible(cons_post):
    """Probability that all constraints are satisfied.

    Parameters
    ----------
    cons_post : PosteriorBundle or sequence of Posterior
    """
    if isinstance(cons_post, PosteriorBundle):
        return _out(_prob_feasible_arrays(cons_post.cons_mean, cons_post.cons_sd))
    mean = np.array([c.mean for c in cons_post], dtype=float)
    sd = np.sqrt(np.maximum(np.array([c.var for c in cons_post], dtype=float), 0.0))
    return _out(_prob_feasible_arrays(mean, sd))


def ei_schonlau(bundle, m_n):
    """Product of the probability of feasibility and the classical EI."""
    if bundle.p != 1:
        raise StateError("ei_schonlau requires a single objective")
    if m_n is None:
        raise StateError("ei_schonlau requires a feasible point")
    pf = _prob_feasible_arrays(bundle.cons_mean, bundle.cons_sd)
    return _out(pf * gamma_ei(m_n - bundle.obj_mean[..., 0], bundle.obj_var[..., 0]))


def _pairwise_prob(bundle, Yo, Yc, space="full"):
    """P(xi(x) <| y_k) for every candidate and every row y_k.

    Parameters
    ----------
    bundle : PosteriorBundle with leading shape (M,)
    Yo : ndarray (K, p) or None
    Yc : ndarray (K, q) or None
    space : {"full", "obj", "cons"}
        "obj": y is an objective vector of a feasible output (the
        probability of feasibility factor is *not* included);
        "cons": y is a constraint vector and infeasible rows only are
        counted (feasible rows give 0).

    Returns
    -------
    ndarray, shape (M, K)
    """
    om, osd = bundle.obj_mean, bundle.obj_sd
    cm, csd = bundle.cons_mean, bundle.cons_sd
    M = om.shape[0]
    K = (Yo if Yo is not None else Yc).shape[0]
    width = max(om.shape[1] + cm.shape[1], 1)
    step = max(1, _CHUNK // max(M * width, 1))
    out = np.empty((M, K))
    for s in range(0, K, step):
        sl = slice(s, s + step)
        if space == "obj":
            out[:, sl] = np.prod(cdf_ratio(Yo[None, sl, :], om[:, None, :], osd[:, None, :]), axis=-1)
            continue
        yc = Yc[sl]
        infeas = np.any(yc > 0, axis=-1)
        p_unf = np.prod(
            cdf_ratio(np.maximum(yc, 0.0)[None], cm[:, None, :], csd[:, None, :]), axis=-1
        )
        if space == "cons":
            out[:, sl] = np.where(infeas[None, :], p_unf, 0.0)
            continue
        pf = _prob_feasible_arrays(cm, csd)[:, None]
        p_obj = np.prod(cdf_ratio(Yo[None, sl, :], om[:, None, :], osd[:, None, :]), axis=-1)
        out[:, sl] = np.where(infeas[None, :], p_unf, p_obj * pf)
    return out


def prob_extended_dominates(bundle, y_obj, y_cons):
    """P(xi(x) <| y) for independent Gaussian outputs.

    Parameters
    ----------
    bundle : PosteriorBundle
    y_obj : array_like, shape (p,) or (K, p)
    y_cons : array_like, shape (q,) or (K, q)

    Returns
    -------
    float or ndarray
        Shape ``bundle.shape + (K,)`` when several points are given.
    """
    y_obj = np.asarray(y_obj, dtype=float)
    y_cons = np.asarray(y_cons, dtype=float)
    single_y = y_obj.ndim == 1
    Yo = np.atleast_2d(y_obj).reshape(-1, bundle.p)
    Yc = np.atleast_2d(y_cons).reshape(Yo.shape[0], bundle.q)
    lead = bundle.shape
    flat = PosteriorBundle(
        bundle.obj_mean.reshape(-1, bundle.p),
        bundle.obj_var.reshape(-1, bundle.p),
        bundle.cons_mean.reshape(-1, bundle.q),
        bundle.cons_var.reshape(-1, bundle.q),
    )
    res = _pairwise_prob(flat, Yo, Yc, "full").reshape(lead + (Yo.shape[0],))
    if single_y:
        res = res[..., 0]
    return _out(res)


def _flatten(bundle):
    lead = bundle.shape
    flat = PosteriorBundle(
        bundle.obj_mean.reshape(-1, bundle.p),
        bundle.obj_var.reshape(-1, bundle.p),
        bundle.cons_mean.reshape(-1, bundle.q),
        bundle.cons_var.reshape(-1, bundle.q),
    )
    return flat, lead


def _check_particles(state, space):
    ps = state.y_particles
    if ps is None:
        raise StateError(f"{space}-space particles required")
    if ps.space != space:
        raise StateError(f"particles live in {ps.space!r} space, expected {space!r}")
    if not ps.front.same_as(_project_front(state.front, space)):
        raise StateError("particles were built for a different front")
    return ps


def _project_front(front, space):
    """Front restricted to one factor of the output space.

    "obj": Pareto front of the objective vectors of feasible members;
    "cons": the violation vectors of the members (all infeasible before
    any feasible observation).
    """
    from .domination import front_from_rows

    p, q = front.p, front.q
    if space == "full":
        return front
    if space == "obj":
        feas = np.all(front.rows[:, p:] <= 0, axis=1)
        return front_from_rows(p, 0, front.rows[feas, :p])
    if space == "cons":
        return front_from_rows(0, q, front.rows[:, p:])
    raise ValueError(space)


def project_front(front, space):
    """Public alias of the front projection used to build particle sets."""
    return _project_front(front, space)


def _box_integral_obj(flat, bounds):
    lo, up = bounds.y_low_obj, bounds.y_upp_obj
    m, v = flat.obj_mean, flat.obj_var
    return np.prod(gamma_ei(up - m, v) - gamma_ei(lo - m, v), axis=-1)


def ei_feasible_part(bundle, state):
    """Expected improvement brought by a feasible outcome.

    ``|B_c-| * P_feas * integral over the non-dominated objective box of
    P(xi_obj(x) <= y_obj)``.
    """
    flat, lead = _flatten(bundle)
    b = state.bounds
    pf = _prob_feasible_arrays(flat.cons_mean, flat.cons_sd)
    if not state.feasible_found:
        val = b.vol_cons_neg * pf * _box_integral_obj(flat, b)
    else:
        ps = _check_particles(state, "obj")
        probs = _pairwise_prob(flat, ps.particles, None, "obj")
        val = b.vol_cons_neg * pf * ps.volume * probs.mean(axis=1)
    return _out(np.maximum(val, 0.0).reshape(lead))


def _ei_unf_empty_front(flat, bounds):
    # integral over B_c of prod_j Phi((y_j^+ - mu_j)/s_j) minus its feasible part
    lo, up = bounds.y_low_cons, bounds.y_upp_cons
    m, sd, v = flat.cons_mean, flat.cons_sd, flat.cons_var
    phi0 = cdf_ratio(0.0, m, sd)
    per = -lo * phi0 + gamma_ei(up - m, v) - gamma_ei(-m, v)
    return np.prod(per, axis=-1) - bounds.vol_cons_neg * np.prod(phi0, axis=-1)


def ei_unfeasible_part(bundle, state):
    """Expected improvement brought by an infeasible outcome.

    Zero once a feasible observation exists; otherwise ``|B_o|`` times the
    integral, over infeasible non-dominated constraint vectors y, of
    ``prod_j Phi((y_j^+ - mu_j) / s_j)``.
    """
    flat, lead = _flatten(bundle)
    if state.feasible_found:
        return _out(np.zeros(lead))
    b = state.bounds
    if len(state.front) == 0 and state.y_particles is None:
        val = b.vol_obj * _ei_unf_empty_front(flat, b)
    else:
        ps = _check_particles(state, "cons")
        probs = _pairwise_prob(flat, None, ps.particles, "cons")
        val = b.vol_obj * ps.volume * probs.mean(axis=1)
    return _out(np.maximum(val, 0.0).reshape(lead))


def ei_exact_single(bundle, state):
    """Exact single-objective path ``|B_c-| * P_feas * gamma(min(m_n, y_upp) - mu, s^2)``."""
    if not state.feasible_found or bundle.p != 1:
        raise StateError("exact path needs p = 1 and a feasible observation")
    m_n = min(state.best_feasible_value, float(state.bounds.y_upp_obj[0]))
    return _out(state.bounds.vol_cons_neg * np.asarray(ei_schonlau(bundle, m_n)))


def expected_improvement(bundle, state, exact_single=True):
    """Expected hyper-volume improvement under extended domination.

    Parameters
    ----------
    bundle : PosteriorBundle
    state : CriterionState
    exact_single : bool
        Use the exact product for single-objective problems once a
        feasible point exists.

    Returns
    -------
    float or ndarray
    """
    if state.feasible_found and bundle.p == 1 and exact_single:
        return ei_exact_single(bundle, state)
    feas = np.asarray(ei_feasible_part(bundle, state))
    unf = np.asarray(ei_unfeasible_part(bundle, state))
    return _out(feas + unf)


def ei_full_smc(bundle, particles):
    """EI from particles uniform on the non-dominated part of the full box.

    Parameters
    ----------
    bundle : PosteriorBundle
    particles : ParticleSetY
        Full-space particle set (``space == "full"``).
    """
    if particles.space != "full":
        raise StateError("full-space particles required")
    flat, lead = _flatten(bundle)
    p = flat.p
    Y = particles.particles
    probs = _pairwise_prob(flat, Y[:, :p], Y[:, p:], "full")
    return _out((particles.volume * probs.mean(axis=1)).reshape(lead))
