"""Dominated hyper-volume metrics

Exact sweep for two objectives, a Monte Carlo estimator for more, and the
per-evaluation fraction of a reference volume used to measure progress of
multi-objective runs.  Boxes are treated as closed; points lying on the
reference point in some coordinate contribute zero measure.
"""

from dataclasses import dataclass

import numpy as np

from .domination import nondominated_mask
from .problems import UsageError

DEFAULT_MC_SAMPLES = 200_000
DEFAULT_MC_SEED = 12345


@dataclass(frozen=True)
class HvReference:
    """Reference point and dominated volume of the true Pareto front."""

    ref_point: np.ndarray
    ref_volume: float

    def __post_init__(self):
        object.__setattr__(self, "ref_point", np.asarray(self.ref_point, dtype=float).ravel())
        if not self.ref_volume > 0:
            raise ValueError("ref_volume must be positive")


def _clip_front(front, ref):
    F = np.asarray(front, dtype=float).reshape(-1, ref.size)
    F = F[np.all(F < ref, axis=1)]
    if F.shape[0]:
        F = F[nondominated_mask(F)]
    return F


def hv_exact_2d(front, ref):
    """Area dominated by a set of 2-D points and bounded by ref.

    Parameters
    ----------
    front : array_like, shape (n, 2)
    ref : array_like, shape (2,)

    Returns
    -------
    float
    """
    ref = np.asarray(ref, dtype=float).ravel()
    if ref.size != 2:
        raise UsageError("hv_exact_2d needs two objectives")
    F = _clip_front(front, ref)
    if F.shape[0] == 0:
        return 0.0
    F = F[np.argsort(F[:, 0])]
    area = 0.0
    prev_y = ref[1]
    for x, y in F:
        if y < prev_y:
            area += (ref[0] - x) * (prev_y - y)
            prev_y = y
    return float(area)


def hv_monte_carlo(front, ref_box, n_samples=DEFAULT_MC_SAMPLES, seed=DEFAULT_MC_SEED):
    """Monte Carlo estimate of the dominated volume inside a box.

    Parameters
    ----------
    front : array_like, shape (n, p)
    ref_box : tuple (low, ref)
        Box containing the dominated region; ``ref`` is the reference point.
    n_samples : int
    seed : int or Generator

    Returns
    -------
    estimate, sd : float
    """
    low, ref = (np.asarray(a, dtype=float).ravel() for a in ref_box)
    F = _clip_front(front, ref)
    if F.shape[0] == 0:
        return 0.0, 0.0
    low = np.minimum(low, F.min(axis=0))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    vol = float(np.prod(ref - low))
    hits = 0
    chunk = 50_000
    done = 0
    while done < n_samples:
        n = min(chunk, n_samples - done)
        U = rng.uniform(low, ref, size=(n, ref.size))
        dom = np.zeros(n, bool)
        for f in F:
            dom |= np.all(f <= U, axis=1)
        hits += int(dom.sum())
        done += n
    frac = hits / n_samples
    return vol * frac, vol * np.sqrt(frac * (1 - frac) / n_samples)


def hypervolume(front, ref, n_samples=DEFAULT_MC_SAMPLES, seed=DEFAULT_MC_SEED, low=None):
    """Exact for p = 2, Monte Carlo (fixed seed) otherwise."""
    ref = np.asarray(ref, dtype=float).ravel()
    if ref.size == 2:
        return hv_exact_2d(front, ref)
    F = np.asarray(front, dtype=float).reshape(-1, ref.size)
    if F.shape[0] == 0:
        return 0.0
    lo = F.min(axis=0) if low is None else np.asarray(low, dtype=float)
    return hv_monte_carlo(F, (lo, ref), n_samples, seed)[0]


def hv_fraction(F, C, ref, tol=0.0, n_samples=DEFAULT_MC_SAMPLES, seed=DEFAULT_MC_SEED):
    """Fraction of the reference volume dominated after each evaluation.

    Parameters
    ----------
    F : ndarray, shape (n, p)
        Objective values in evaluation order.
    C : ndarray, shape (n, q)
    ref : HvReference
    tol : float
        Feasibility tolerance on the constraints.

    Returns
    -------
    ndarray, shape (n,)
        Nondecreasing, clipped to [0, 1].
    """
    F = np.asarray(F, dtype=float)
    C = np.asarray(C, dtype=float)
    feas = np.all(C <= tol, axis=1) if C.size else np.ones(F.shape[0], bool)
    out = np.zeros(F.shape[0])
    current = 0.0
    front = np.empty((0, F.shape[1]))
    for i in range(F.shape[0]):
        if feas[i] and np.all(F[i] < ref.ref_point):
            if front.shape[0] == 0 or not np.any(np.all(front <= F[i], axis=1)):
                front = np.vstack([front, F[i]])
                front = front[nondominated_mask(front)]
                current = max(current, hypervolume(front, ref.ref_point, n_samples, seed))
        out[i] = min(current / ref.ref_volume, 1.0)
    return out


def evaluations_to_fraction(fractions, level):
    """1-based index of the first evaluation reaching the level, or None."""
    hit = np.flatnonzero(np.asarray(fractions) >= level)
    return int(hit[0]) + 1 if hit.size else None
