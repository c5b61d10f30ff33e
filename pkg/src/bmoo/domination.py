"""Extended domination rule for constrained multi-objective problems

An output ``y = (y_obj, y_cons)`` is mapped to the extended point

    psi(y) = (y_obj, 0)              if y_cons <= 0,
    psi(y) = (+inf, max(y_cons, 0))  otherwise,

and ``y1`` dominates ``y2`` (written ``y1 <| y2``) when ``psi(y1)`` Pareto
dominates ``psi(y2)``.  Feasible points are thus compared on their
objectives, infeasible points on their constraint violations, and any
feasible point dominates any infeasible one.

Extended points are stored as flat rows ``[obj | cons]`` of length p + q so
that domination reduces to ordinary Pareto comparisons; ``+inf`` compares
equal to itself, which is exactly the behaviour required for infeasible
points.  Exact zero constraint values count as satisfied.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ExtendedPoint:
    """Image of an output vector under psi.

    Attributes
    ----------
    obj : ndarray, shape (p,)
        Objective part, +inf on every coordinate for infeasible points.
    cons : ndarray, shape (q,)
        Clipped constraint violations, all zero for feasible points.
    """

    obj: np.ndarray
    cons: np.ndarray

    @property
    def feasible(self):
        return not np.any(self.cons > 0)

    def as_row(self):
        return np.concatenate([self.obj, self.cons])


def psi(y_obj, y_cons):
    """Map raw outputs to their extended point.

    Parameters
    ----------
    y_obj : array_like, shape (p,)
    y_cons : array_like, shape (q,)

    Returns
    -------
    ExtendedPoint
    """
    y_obj = np.asarray(y_obj, dtype=float).ravel()
    y_cons = np.asarray(y_cons, dtype=float).ravel()
    z = psi_rows(y_obj[None, :], y_cons[None, :])[0]
    p = y_obj.size
    return ExtendedPoint(z[:p], z[p:])


def psi_rows(Y_obj, Y_cons):
    """Vectorized psi: returns an (n, p + q) array of extended rows.

    Any of the two blocks may have zero columns.
    """
    Y_obj = np.asarray(Y_obj, dtype=float)
    Y_cons = np.asarray(Y_cons, dtype=float)
    viol = np.maximum(Y_cons, 0.0)
    infeasible = np.any(Y_cons > 0, axis=-1)
    obj = np.where(infeasible[..., None], np.inf, Y_obj)
    return np.concatenate([obj, viol], axis=-1)


def pareto_dominates(a, b):
    """True when a <= b componentwise with at least one strict inequality."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(a <= b) and np.any(a < b))


def _as_row(y):
    if isinstance(y, ExtendedPoint):
        return y.as_row()
    if isinstance(y, tuple) and len(y) == 2:
        return psi(y[0], y[1]).as_row()
    return np.asarray(y, dtype=float).ravel()


def extended_dominates(a, b):
    """Extended domination a <| b.

    Parameters
    ----------
    a, b : ExtendedPoint or tuple (y_obj, y_cons)
        Raw tuples are mapped through psi first.
    """
    return pareto_dominates(_as_row(a), _as_row(b))


def dominated_by_any(front_rows, Z):
    """For each row of Z, whether some front row Pareto dominates it.

    Parameters
    ----------
    front_rows : ndarray, shape (n, k)
    Z : ndarray, shape (..., k)

    Returns
    -------
    ndarray of bool, shape (...)
    """
    Z = np.asarray(Z, dtype=float)
    front_rows = np.asarray(front_rows, dtype=float).reshape(-1, Z.shape[-1])
    k = Z.shape[-1]
    if front_rows.shape[0] == 0 or Z.size == 0:
        return np.zeros(Z.shape[:-1], dtype=bool)
    if k == 2 and front_rows.shape[0] > 4:
        return _dominated_2d(front_rows, Z)
    cols = [np.ascontiguousarray(Z[..., j]) for j in range(k)]
    out = np.zeros(Z.shape[:-1], dtype=bool)
    for f in front_rows:
        le = f[0] <= cols[0]
        lt = f[0] < cols[0]
        for j in range(1, k):
            le &= f[j] <= cols[j]
            lt |= f[j] < cols[j]
        out |= le & lt
    return out


def _dominated_2d(front_rows, Z):
    # staircase search: keep the weakly non-dominated rows sorted by the
    # first coordinate, the second one is then strictly decreasing
    F = np.unique(front_rows, axis=0)
    F = F[nondominated_mask(F)]
    F = F[np.lexsort((F[:, 1], F[:, 0]))]
    keep = np.ones(F.shape[0], bool)
    keep[1:] = F[1:, 1] < np.minimum.accumulate(F[:, 1])[:-1]
    F = F[keep]
    z0, z1 = Z[..., 0], Z[..., 1]
    j = np.searchsorted(F[:, 0], z0, side="right") - 1
    jj = np.maximum(j, 0)
    b0, b1 = F[jj, 0], F[jj, 1]
    return (j >= 0) & (b1 <= z1) & ((b0 < z0) | (b1 < z1))


def weakly_dominated_by_any(front_rows, Z):
    """For each row of Z, whether some front row dominates it or equals it."""
    Z = np.asarray(Z, dtype=float)
    out = np.zeros(Z.shape[:-1], dtype=bool)
    for f in front_rows:
        out |= np.all(f <= Z, axis=-1)
    return out


class ExtendedFront:
    """Set of mutually non-dominated extended points.

    Parameters
    ----------
    p, q : int
        Number of objective and constraint coordinates.
    rows : ndarray, shape (n, p + q), optional
        Extended rows, assumed mutually non-dominated.

    Notes
    -----
    Instances are treated as immutable; :func:`front_insert` returns a new
    front.
    """

    def __init__(self, p, q, rows=None):
        self.p = int(p)
        self.q = int(q)
        if rows is None:
            rows = np.empty((0, self.p + self.q))
        rows = np.array(rows, dtype=float).reshape(-1, self.p + self.q)
        rows.setflags(write=False)
        self.rows = rows

    def __len__(self):
        return self.rows.shape[0]

    def __iter__(self):
        for r in self.rows:
            yield ExtendedPoint(r[: self.p].copy(), r[self.p :].copy())

    def __repr__(self):
        return f"ExtendedFront(p={self.p}, q={self.q}, n={len(self)})"

    @property
    def points(self):
        return list(self)

    @property
    def has_feasible(self):
        if len(self) == 0:
            return False
        return bool(np.any(np.all(self.rows[:, self.p :] <= 0, axis=1)))

    def same_as(self, other):
        """Set equality of the two fronts."""
        if len(self) != len(other) or (self.p, self.q) != (other.p, other.q):
            return False
        a = _sorted_rows(self.rows)
        b = _sorted_rows(other.rows)
        return bool(np.array_equal(a, b))

    def contains(self, row):
        row = np.asarray(row, dtype=float)
        return bool(np.any(np.all(self.rows == row, axis=1)))

    def dominated(self, Z):
        """Mask of extended rows Z dominated by the front."""
        return dominated_by_any(self.rows, Z)

    def dominated_raw(self, Y_obj, Y_cons):
        """Mask of raw outputs dominated by the front."""
        return dominated_by_any(self.rows, psi_rows(Y_obj, Y_cons))


def _sorted_rows(rows):
    if rows.shape[0] == 0:
        return rows
    big = np.where(np.isinf(rows), np.finfo(float).max, rows)
    order = np.lexsort(big.T[::-1])
    return rows[order]


def _row_of(front, y):
    if isinstance(y, ExtendedPoint):
        return y.as_row()
    if isinstance(y, tuple) and len(y) == 2:
        return psi(y[0], y[1]).as_row()
    row = np.asarray(y, dtype=float).ravel()
    if row.size != front.p + front.q:
        raise ValueError("extended row has the wrong length")
    return row


def front_insert(front, y):
    """Insert a point into a front.

    Parameters
    ----------
    front : ExtendedFront
    y : ExtendedPoint, tuple (y_obj, y_cons) or extended row

    Returns
    -------
    ExtendedFront
        The front itself when y is dominated by or equal to a member,
        otherwise a new front with y added and the members it dominates
        removed.
    """
    row = _row_of(front, y)
    if len(front) and weakly_dominated_by_any(front.rows, row[None, :])[0]:
        return front
    keep = ~dominated_by_any(row[None, :], front.rows) if len(front) else np.zeros(0, bool)
    rows = np.vstack([front.rows[keep], row[None, :]])
    return ExtendedFront(front.p, front.q, rows)


def front_from_rows(p, q, rows):
    """Pareto front of a collection of extended rows."""
    front = ExtendedFront(p, q)
    for r in np.asarray(rows, dtype=float).reshape(-1, p + q):
        front = front_insert(front, r)
    return front


def front_from_outputs(F, C):
    """Extended Pareto front of raw evaluation results F (n, p), C (n, q)."""
    F = np.asarray(F, dtype=float)
    C = np.asarray(C, dtype=float)
    return front_from_rows(F.shape[1], C.shape[1], psi_rows(F, C))


def in_dominated_region(front, y):
    """Whether a raw output y = (y_obj, y_cons) is dominated by the front.

    Parameters
    ----------
    front : ExtendedFront
    y : tuple (y_obj, y_cons) or extended row

    Returns
    -------
    bool
    """
    if len(front) == 0:
        return False
    row = _row_of(front, y)
    return bool(dominated_by_any(front.rows, row[None, :])[0])


def nondominated_mask(F):
    """Mask of the rows of F not Pareto dominated by another row."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if keep[i]:
            le = np.all(F[i] <= F, axis=1)
            lt = np.any(F[i] < F, axis=1)
            keep &= ~(le & lt)
    return keep
