"""Bounding boxes of the objective and constraint spaces

Dominated volumes are only finite inside a bounded box ``B = B_o x B_c``.
The corners are estimated from the evaluation results and from posterior
quantiles ``mean +/- lambda * sd`` at the candidate particles; the
constraint box always contains 0 strictly in its interior.

The module also provides the closed-form volume dominated by a single
evaluation, used both as a test oracle and as a sanity check of the Monte
Carlo machinery.
"""

from dataclasses import dataclass

import numpy as np

PAD_REL = 1e-6


class BoundsError(ValueError):
    """Raised when the box cannot be computed (non-finite inputs)."""


@dataclass(frozen=True)
class BoxBounds:
    """Corners of B_o (objectives) and B_c (constraints).

    Attributes
    ----------
    y_low_obj, y_upp_obj : ndarray, shape (p,)
    y_low_cons, y_upp_cons : ndarray, shape (q,)
    """

    y_low_obj: np.ndarray
    y_upp_obj: np.ndarray
    y_low_cons: np.ndarray
    y_upp_cons: np.ndarray

    def __post_init__(self):
        for name in ("y_low_obj", "y_upp_obj", "y_low_cons", "y_upp_cons"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        if np.any(self.y_low_obj >= self.y_upp_obj) or np.any(self.y_low_cons >= self.y_upp_cons):
            raise BoundsError("box corners must satisfy low < upp")
        if np.any(self.y_low_cons >= 0) or np.any(self.y_upp_cons <= 0):
            raise BoundsError("0 must lie strictly inside the constraint box")

    @property
    def p(self):
        return self.y_low_obj.size

    @property
    def q(self):
        return self.y_low_cons.size

    @property
    def low(self):
        return np.concatenate([self.y_low_obj, self.y_low_cons])

    @property
    def upp(self):
        return np.concatenate([self.y_upp_obj, self.y_upp_cons])

    @property
    def vol_obj(self):
        return float(np.prod(self.y_upp_obj - self.y_low_obj))

    @property
    def vol_cons(self):
        return float(np.prod(self.y_upp_cons - self.y_low_cons))

    @property
    def vol_cons_neg(self):
        """Volume of the feasible part B_c ∩ ]-inf, 0]^q."""
        return float(np.prod(-self.y_low_cons))

    @property
    def volume(self):
        return self.vol_obj * self.vol_cons

    def space(self, which):
        """Corners (low, upp, p, q) of the full box or of one factor.

        which : {"full", "obj", "cons"}
        """
        if which == "full":
            return self.low, self.upp, self.p, self.q
        if which == "obj":
            return self.y_low_obj, self.y_upp_obj, self.p, 0
        if which == "cons":
            return self.y_low_cons, self.y_upp_cons, 0, self.q
        raise ValueError(f"unknown space {which!r}")

    def to_dict(self):
        return {
            "y_low_obj": self.y_low_obj.tolist(),
            "y_upp_obj": self.y_upp_obj.tolist(),
            "y_low_cons": self.y_low_cons.tolist(),
            "y_upp_cons": self.y_upp_cons.tolist(),
        }

    def same_as(self, other):
        return other is not None and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("y_low_obj", "y_upp_obj", "y_low_cons", "y_upp_cons")
        )


def _pad(low, upp):
    span = upp - low
    eps = np.where(span > 0, PAD_REL * span, 1.0)
    return low - eps, upp + eps


def bounds_from_predictions(F, C, mean, var, p, lambda_obj=5.0, lambda_cons=5.0):
    """Box corners from observations and posterior moments at candidates.

    Parameters
    ----------
    F : ndarray, shape (n, p)
        Observed objectives.
    C : ndarray, shape (n, q)
        Observed constraints.
    mean, var : ndarray, shape (m, p + q)
        Posterior moments at the candidate points (objectives first).
    p : int
    lambda_obj, lambda_cons : float

    Returns
    -------
    BoxBounds
    """
    F = np.asarray(F, dtype=float).reshape(-1, p)
    q = np.asarray(C).shape[-1] if np.ndim(C) > 1 else np.size(C) // max(F.shape[0], 1)
    C = np.asarray(C, dtype=float).reshape(F.shape[0], q)
    mean = np.asarray(mean, dtype=float).reshape(-1, p + q)
    var = np.asarray(var, dtype=float).reshape(-1, p + q)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(var))):
        raise BoundsError("non-finite model predictions")
    if not (np.all(np.isfinite(F)) and np.all(np.isfinite(C))):
        raise BoundsError("non-finite observations")
    sd = np.sqrt(np.maximum(var, 0.0))
    lam = np.concatenate([np.full(p, lambda_obj), np.full(q, lambda_cons)])
    lo_pred = (mean - lam * sd).min(0) if mean.shape[0] else np.full(p + q, np.inf)
    up_pred = (mean + lam * sd).max(0) if mean.shape[0] else np.full(p + q, -np.inf)
    Y = np.hstack([F, C])
    lo = np.minimum(Y.min(0), lo_pred) if Y.shape[0] else lo_pred
    up = np.maximum(Y.max(0), up_pred) if Y.shape[0] else up_pred
    lo[p:] = np.minimum(lo[p:], 0.0)
    up[p:] = np.maximum(up[p:], 0.0)
    lo, up = _pad(lo, up)
    return BoxBounds(lo[:p], up[:p], lo[p:], up[p:])


def update_bounds(evals, models, candidates, lambda_obj=5.0, lambda_cons=5.0):
    """Recompute the box from evaluations, models and candidate points.

    Parameters
    ----------
    evals : tuple (F, C)
        Observed objectives (n, p) and constraints (n, q).
    models : sequence of GpModel
        p + q fitted models, objectives first.
    candidates : ndarray (m, d) or object with a ``particles`` attribute
    lambda_obj, lambda_cons : float

    Returns
    -------
    BoxBounds
    """
    from .gp import predict_all

    F, C = evals
    X = getattr(candidates, "particles", candidates)
    mean, var = predict_all(models, X)
    p = np.asarray(F).shape[1]
    return bounds_from_predictions(F, C, mean, var, p, lambda_obj, lambda_cons)


def volume_H1_infeasible(bounds, c1):
    """Volume dominated by one infeasible evaluation with constraints c1."""
    c1 = np.asarray(c1, dtype=float).ravel()
    if not np.any(c1 > 0):
        raise ValueError("c1 is feasible; use volume_H1_feasible")
    lo, up = bounds.y_low_cons, bounds.y_upp_cons
    sat = c1 <= 0
    factors = np.where(sat, up - lo, np.maximum(up - np.minimum(c1, up), 0.0))
    return bounds.vol_obj * float(np.prod(factors))


def volume_H1_feasible(bounds, f1):
    """Volume dominated by one feasible evaluation with objectives f1.

    The infeasible part of B is entirely dominated; in the feasible part
    the dominated set is the orthant above f1 clipped to B_o.
    """
    f1 = np.asarray(f1, dtype=float).ravel()
    lo, up = bounds.y_low_obj, bounds.y_upp_obj
    obj_part = np.prod(up - np.clip(f1, lo, up))
    return bounds.vol_obj * (bounds.vol_cons - bounds.vol_cons_neg) + float(obj_part) * bounds.vol_cons_neg
