"""Benchmark problems for constrained single- and multi-objective optimization

Every problem is exposed through a :class:`ProblemSpec` that bundles the
search box, the output dimensions and a vectorized evaluator
``x -> (f, c)``.  Constraints follow the ``c_j(x) <= 0`` convention and all
objectives are minimized.

The numerical metadata (boxes, best known values, targets, reference
points and volumes) lives in ``data/problems.json``; the formulas live
here, keyed by problem name.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

SUITES = ("mono", "multi", "modified", "toy")


class DomainError(ValueError):
    """Raised when a point lies outside the search box of a problem."""


class EvaluationError(RuntimeError):
    """Raised when a problem returns non-finite outputs."""

    def __init__(self, problem_name, x, message="non-finite output"):
        self.problem_name = problem_name
        self.x = np.asarray(x, dtype=float).copy()
        super().__init__(f"{problem_name}: {message} at x={self.x.tolist()}")


class UsageError(ValueError):
    """Raised on invalid user-level requests (unknown suite or problem)."""


@dataclass(frozen=True)
class ProblemSpec:
    """A constrained black-box problem.

    Parameters
    ----------
    name : str
        Problem identifier.
    d, p, q : int
        Input dimension, number of objectives and number of constraints.
    x_low, x_upp : ndarray, shape (d,)
        Search box.
    func : callable
        Vectorized evaluator mapping an (n, d) array to a pair
        ``(f, c)`` of arrays with shapes (n, p) and (n, q).
    suite : str
        One of ``mono``, ``multi``, ``modified``, ``toy``.
    best_known : float or None
        Best known objective value (single-objective problems).
    target : float or None
        Target objective value (single-objective problems).
    ref_point : ndarray or None
        Hypervolume reference point (multi-objective problems).
    ref_volume : float or None
        Volume dominated by the true Pareto front w.r.t. ``ref_point``.
    gamma_pct : float or None
        Tabulated percentage of the search box that is feasible.
    n_init : int or None
        Problem-specific initial design size, overriding the default 3d.
    budget : int or None
        Default evaluation budget of the benchmark harness.
    note : str
        Free-form remark carried from the metadata file.
    """

    name: str
    d: int
    p: int
    q: int
    x_low: np.ndarray
    x_upp: np.ndarray
    func: object = field(repr=False)
    suite: str = "mono"
    best_known: float = None
    target: float = None
    ref_point: np.ndarray = None
    ref_volume: float = None
    gamma_pct: float = None
    n_init: int = None
    budget: int = None
    note: str = ""

    @property
    def span(self):
        return self.x_upp - self.x_low

    def evaluate_batch(self, X):
        """Evaluate the problem at the rows of X, without domain checks."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        f, c = self.func(X)
        f = np.asarray(f, dtype=float).reshape(X.shape[0], self.p)
        c = np.asarray(c, dtype=float).reshape(X.shape[0], self.q)
        return f, c


def plog(x):
    """Signed logarithm: log(1 + x) for x >= 0 and -log(1 - x) otherwise."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.log1p(np.abs(x))
    return out if out.ndim else float(out)


def is_feasible(c, tol=0.0):
    """True when every constraint value is at most tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    c = np.asarray(c, dtype=float)
    return bool(np.all(c <= tol))


def evaluate(problem, x):
    """Evaluate a problem at a single point.

    Parameters
    ----------
    problem : ProblemSpec
    x : array_like, shape (d,)

    Returns
    -------
    f : ndarray, shape (p,)
    c : ndarray, shape (q,)

    Raises
    ------
    DomainError
        If x is outside the search box.
    EvaluationError
        If any output is not finite.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (problem.d,):
        raise DomainError(f"{problem.name}: expected a point of dimension {problem.d}")
    slack = 1e-12 * np.maximum(problem.span, 1.0)
    if np.any(x < problem.x_low - slack) or np.any(x > problem.x_upp + slack):
        raise DomainError(f"{problem.name}: x={x.tolist()} outside the search box")
    x = np.clip(x, problem.x_low, problem.x_upp)
    with np.errstate(all="ignore"):
        f, c = problem.evaluate_batch(x[None, :])
    f, c = f[0], c[0]
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(c))):
        raise EvaluationError(problem.name, x)
    return f, c


# ---------------------------------------------------------------------------
# Single-objective problems


def _g1(x):
    f = 5 * x[:, :4].sum(1) - 5 * (x[:, :4] ** 2).sum(1) - x[:, 4:].sum(1)
    x1, x2, x3, x4, x5, x6, x7, x8, x9, x10, x11, x12, x13 = x.T
    c = np.column_stack(
        (
            2 * x1 + 2 * x2 + x10 + x11 - 10,
            2 * x1 + 2 * x3 + x10 + x12 - 10,
            2 * x2 + 2 * x3 + x11 + x12 - 10,
            -8 * x1 + x10,
            -8 * x2 + x11,
            -8 * x3 + x12,
            -2 * x4 - x5 + x10,
            -2 * x6 - x7 + x11,
            -2 * x8 - x9 + x12,
        )
    )
    return f, c


def _g3mod_parts(x):
    d = x.shape[1]
    # (sqrt d)^d prod x, computed in log space to avoid underflow
    with np.errstate(divide="ignore"):
        logz = 0.5 * d * np.log(d) + np.log(x).sum(1)
    z = np.exp(logz)
    c = (x**2).sum(1) - 1.0
    return z, c


def _g3mod(x):
    z, c = _g3mod_parts(x)
    return -plog(z), c


def _g5mod(x):
    x1, x2, x3, x4 = x.T
    f = 3 * x1 + 1e-6 * x1**3 + 2 * x2 + (2e-6 / 3) * x2**3
    c = np.column_stack(
        (
            x3 - x4 - 0.55,
            x4 - x3 - 0.55,
            1000 * (np.sin(-x3 - 0.25) + np.sin(-x4 - 0.25)) + 894.8 - x1,
            1000 * (np.sin(x3 - 0.25) + np.sin(x3 - x4 - 0.25)) + 894.8 - x2,
            1000 * (np.sin(x4 - 0.25) + np.sin(x4 - x3 - 0.25)) + 1294.8,
        )
    )
    return f, c


def _g6(x):
    x1, x2 = x.T
    f = (x1 - 10) ** 3 + (x2 - 20) ** 3
    c = np.column_stack(
        (-((x1 - 5) ** 2) - (x2 - 5) ** 2 + 100, (x1 - 6) ** 2 + (x2 - 5) ** 2 - 82.81)
    )
    return f, c


def _g7(x):
    x1, x2, x3, x4, x5, x6, x7, x8, x9, x10 = x.T
    f = (
        x1**2 + x2**2 + x1 * x2 - 14 * x1 - 16 * x2 + (x3 - 10) ** 2
        + 4 * (x4 - 5) ** 2 + (x5 - 3) ** 2 + 2 * (x6 - 1) ** 2 + 5 * x7**2
        + 7 * (x8 - 11) ** 2 + 2 * (x9 - 10) ** 2 + (x10 - 7) ** 2 + 45
    )
    # constraints divided by constants to put them on comparable scales
    c = np.column_stack(
        (
            (4 * x1 + 5 * x2 - 3 * x7 + 9 * x8 - 105) / 105,
            (10 * x1 - 8 * x2 - 17 * x7 + 2 * x8) / 370,
            (-8 * x1 + 2 * x2 + 5 * x9 - 2 * x10 - 12) / 158,
            (3 * (x1 - 2) ** 2 + 4 * (x2 - 3) ** 2 + 2 * x3**2 - 7 * x4 - 120) / 1258,
            (5 * x1**2 + 8 * x2 + (x3 - 6) ** 2 - 2 * x4 - 40) / 816,
            (0.5 * (x1 - 8) ** 2 + 2 * (x2 - 4) ** 2 + 3 * x5**2 - x6 - 30) / 834,
            (x1**2 + 2 * (x2 - 2) ** 2 - 2 * x1 * x2 + 14 * x5 - 6 * x6) / 788,
            (-3 * x1 + 6 * x2 + 12 * (x9 - 8) ** 2 - 7 * x10) / 4048,
        )
    )
    return f, c


def _g8(x):
    x1, x2 = x.T
    with np.errstate(divide="ignore", invalid="ignore"):
        f = -(np.sin(2 * np.pi * x1) ** 3) * np.sin(2 * np.pi * x2) / (x1**3 * (x1 + x2))
    c = np.column_stack((x1**2 - x2 + 1, 1 - x1 + (x2 - 4) ** 2))
    return f, c


def _g9(x):
    x1, x2, x3, x4, x5, x6, x7 = x.T
    f = (
        (x1 - 10) ** 2 + 5 * (x2 - 12) ** 2 + x3**4 + 3 * (x4 - 11) ** 2
        + 10 * x5**6 + 7 * x6**2 + x7**4 - 4 * x6 * x7 - 10 * x6 - 8 * x7
    )
    c = np.column_stack(
        (
            (2 * x1**2 + 3 * x2**4 + x3 + 4 * x4**2 + 5 * x5 - 127) / 127,
            (7 * x1 + 3 * x2 + 10 * x3**2 + x4 - x5 - 282) / 282,
            (23 * x1 + x2**2 + 6 * x6**2 - 8 * x7 - 196) / 196,
            4 * x1**2 + x2**2 - 3 * x1 * x2 + 2 * x3**2 + 5 * x6 - 11 * x7,
        )
    )
    return f, c


def _g10_raw(x):
    x1, x2, x3, x4, x5, x6, x7, x8 = x.T
    f = x1 + x2 + x3
    c = np.column_stack(
        (
            0.0025 * (x4 + x6) - 1,
            0.0025 * (x5 + x7 - x4) - 1,
            0.01 * (x8 - x5) - 1,
            100 * x1 - x1 * x6 + 833.33252 * x4 - 83333.333,
            x2 * x4 - x2 * x7 - 1250 * x4 + 1250 * x5,
            x3 * x5 - x3 * x8 - 2500 * x5 + 1250000,
        )
    )
    return f, c


def _g13mod(x):
    x1, x2, x3, x4, x5 = x.T
    f = np.exp(x1 * x2 * x3 * x4 * x5)
    c = np.column_stack(
        ((x**2).sum(1) - 10, x2 * x3 - 5 * x4 * x5, x1**3 + x2**3 + 1)
    )
    return f, c


def _g16(x):
    x1, x2, x3, x4, x5 = x.T
    y1 = x2 + x3 + 41.6
    c1 = 0.024 * x4 - 4.62
    y2 = 12.5 / c1 + 12
    c2 = 0.0003535 * x1**2 + 0.5311 * x1 + 0.08705 * y2 * x1
    c3 = 0.052 * x1 + 78 + 0.002377 * y2 * x1
    y3 = c2 / c3
    y4 = 19 * y3
    c4 = (
        0.04782 * (x1 - y3) + 0.1956 * (x1 - y3) ** 2 / x2 + 0.6376 * y4 + 1.594 * y3
    )
    c5 = 100 * x2
    c6 = x1 - y3 - y4
    c7 = 0.950 - c4 / c5
    y5 = c6 * c7
    y6 = x1 - y5 - y4 - y3
    c8 = (y5 + y4) * 0.995
    y7 = c8 / y1
    y8 = c8 / 3798
    c9 = y7 - 0.0663 * y7 / y8 - 0.3153
    y9 = 96.82 / c9 + 0.321 * y1
    y10 = 1.29 * y5 + 1.258 * y4 + 2.29 * y3 + 1.71 * y6
    y11 = 1.71 * x1 - 0.452 * y4 + 0.580 * y3
    c10 = 12.3 / 752.3
    c11 = (1.75 * y2) * (0.995 * x1)
    c12 = 0.995 * y10 + 1998
    y12 = c10 * x1 + c11 / c12
    y13 = c12 + 1.75 * y2
    y14 = 3623 + 64.4 * x2 + 58.4 * x3 + 146312 / (y9 + x5)
    c13 = 0.995 * y10 + 60.8 * x2 + 48 * x4 - 0.1121 * y14 - 5095
    y15 = y13 / c13
    y16 = 148000 - 331000 * y15 + 40 * y13 - 61 * y15 * y13
    c14 = 2324 * y10 - 28740000 * y2
    y17 = 14130000 - 1328 * y10 - 531 * y11 + c14 / c12
    c15 = y13 / y15 - y13 / 0.52
    c16 = 1.104 - 0.72 * y15
    c17 = y9 + x5
    f = (
        0.000117 * y14 + 0.1365 + 0.00002358 * y13 + 0.000001502 * y16
        + 0.0321 * y12 + 0.004324 * y5 + 0.0001 * c15 / c16 + 37.48 * y2 / c12
        - 0.0000005843 * y17
    )
    ys = (y1, y2, y3, y4, y5, y6, y7, y8, y9, y10, y11, y12, y13, y14, y15, y16, y17)
    lows = (213.1, 17.505, 11.275, 214.228, 7.458, 0.961, 1.612, 0.146, 107.99,
            922.693, 926.832, 18.766, 1072.163, 8961.448, 0.063, 71084.33, 2802713)
    upps = (405.23, 1053.6667, 35.03, 665.585, 584.463, 265.916, 7.046, 0.222,
            273.366, 1286.105, 1444.046, 537.141, 3247.039, 26844.086, 0.386,
            140000, 12146108)
    cols = [
        0.28 / 0.72 * y5 - y4,
        x3 - 1.5 * x2,
        3496 * y2 / c12 - 21,
        110.6 + y1 - 62212 / c17,
    ]
    for y, lo, up in zip(ys, lows, upps):
        cols.append(lo - y)
        cols.append(y - up)
    return f, np.column_stack(cols)


def _g18(x):
    x1, x2, x3, x4, x5, x6, x7, x8, x9 = x.T
    f = -0.5 * (x1 * x4 - x2 * x3 + x3 * x9 - x5 * x9 + x5 * x8 - x6 * x7)
    c = np.column_stack(
        (
            x3**2 + x4**2 - 1,
            x9**2 - 1,
            x5**2 + x6**2 - 1,
            x1**2 + (x2 - x9) ** 2 - 1,
            (x1 - x5) ** 2 + (x2 - x6) ** 2 - 1,
            (x1 - x7) ** 2 + (x2 - x8) ** 2 - 1,
            (x3 - x5) ** 2 + (x4 - x6) ** 2 - 1,
            (x3 - x7) ** 2 + (x4 - x8) ** 2 - 1,
            x7**2 + (x8 - x9) ** 2 - 1,
            x2 * x3 - x1 * x4,
            -x3 * x9,
            x5 * x9,
            x6 * x7 - x5 * x8,
        )
    )
    return f, c


_G19_B = np.array([-40, -2, -0.25, -4, -4, -1, -40, -60, 5, 1])
_G19_E = np.array([-15, -27, -36, -18, -12])
_G19_C = np.array(
    [
        [30, -20, -10, 32, -10],
        [-20, 39, -6, -31, 32],
        [-10, -6, 10, -6, -10],
        [32, -31, -6, 39, -20],
        [-10, 32, -10, -20, 30],
    ],
    dtype=float,
)
_G19_D = np.array([4, 8, 10, 6, 2])
_G19_A = np.array(
    [
        [-16, 2, 0, 1, 0],
        [0, -2, 0, 0.4, 2],
        [-3.5, 0, 2, 0, 0],
        [0, -2, 0, -4, -1],
        [0, -9, -2, 1, -2.8],
        [2, 0, -4, 0, 0],
        [-1, -1, -1, -1, -1],
        [-1, -2, -3, -2, -1],
        [1, 2, 3, 4, 5],
        [1, 1, 1, 1, 1],
    ]
)


def _g19(x):
    u, v = x[:, :10], x[:, 10:]
    f = np.einsum("ni,ij,nj->n", v, _G19_C, v) + 2 * (v**3) @ _G19_D - u @ _G19_B
    c = -2 * v @ _G19_C - _G19_E + u @ _G19_A
    return f, c


def _g24(x):
    x1, x2 = x.T
    f = -x1 - x2
    c = np.column_stack(
        (
            -2 * x1**4 + 8 * x1**3 - 8 * x1**2 + x2 - 2,
            -4 * x1**4 + 32 * x1**3 - 88 * x1**2 + 96 * x1 + x2 - 36,
        )
    )
    return f, c


def _sr7(x):
    x1, x2, x3, x4, x5, x6, x7 = x.T
    a = 3.3333 * x3**2 + 14.9334 * x3 - 43.0934
    f = (
        0.7854 * x1 * x2**2 * a - 1.508 * x1 * (x6**2 + x7**2)
        + 7.477 * (x6**3 + x7**3) + 0.7854 * (x4 * x6**2 + x5 * x7**2)
    )
    a1 = np.sqrt((745 * x4 / (x2 * x3)) ** 2 + 16.91e6)
    a2 = np.sqrt((745 * x5 / (x2 * x3)) ** 2 + 157.5e6)
    c = np.column_stack(
        (
            (27 - x1 * x2**2 * x3) / 27,
            (397.5 - x1 * x2**2 * x3**2) / 397.5,
            (1.93 - x2 * x6**4 * x3 / x4**3) / 1.93,
            (1.93 - x2 * x7**4 * x3 / x5**3) / 1.93,
            (a1 / (0.1 * x6**3) - 1100) / 1100,
            (a2 / (0.1 * x7**3) - 850) / 850,
            (x2 * x3 - 40) / 40,
            (5 - x1 / x2) / 5,
            (x1 / x2 - 12) / 12,
            (1.9 + 1.5 * x6 - x4) / 1.9,
            (1.9 + 1.1 * x7 - x5) / 1.9,
        )
    )
    return f, c


def _pvd4_parts(x):
    x1, x2, x3, x4 = x.T
    f = 0.6224 * x1 * x3 * x4 + 1.7781 * x2 * x3**2 + 3.1661 * x1**2 * x4 + 19.84 * x1**2 * x3
    c1 = -x1 + 0.0193 * x3
    c2 = -x2 + 0.00954 * x3
    c3 = -np.pi * x3**2 * x4 - (4 / 3) * np.pi * x3**3 + 1296000
    return f, c1, c2, c3


def _pvd4(x):
    f, c1, c2, c3 = _pvd4_parts(x)
    return f, np.column_stack((c1, c2, c3))


def _welded_beam_stress(h, l, t, b, j_factor=2 * np.sqrt(2)):
    # j_factor scales the polar moment of inertia of the weld group; the
    # four-variable single-objective variant uses the older value sqrt(2)
    tau_p = 6000 / (np.sqrt(2) * h * l)
    r = np.sqrt(0.25 * (l**2 + (h + t) ** 2))
    tau_pp = 6000 * (14 + 0.5 * l) * r / (j_factor * h * l * (l**2 / 12 + 0.25 * (h + t) ** 2))
    tau = np.sqrt(tau_p**2 + tau_pp**2 + l * tau_p * tau_pp / r)
    sigma = 504000 / (b * t**2)
    pc = 64746.022 * (1 - 0.0282346 * t) * t * b**3
    return tau, sigma, pc


def _wb4(x):
    h, l, t, b = x.T
    f = 1.10471 * l * h**2 + 0.04811 * t * b * (14 + l)
    tau, sigma, pc = _welded_beam_stress(h, l, t, b, j_factor=np.sqrt(2))
    c = np.column_stack(
        (
            tau - 13600,
            sigma - 30000,
            h - b,
            (0.10471 * h**2 + 0.04811 * t * b * (14 + l) - 5) / 5,
            (2.1952 / (b * t**3) - 0.25) / 0.25,
            (6000 - pc) / 6000,
        )
    )
    return f, c


# ---------------------------------------------------------------------------
# Multi-objective problems


def _bnh(x):
    x1, x2 = x.T
    f = np.column_stack((4 * x1**2 + 4 * x2**2, (x1 - 5) ** 2 + (x2 - 5) ** 2))
    c = np.column_stack(((x1 - 5) ** 2 + x2**2 - 25, 7.7 - (x1 - 8) ** 2 - (x2 + 3) ** 2))
    return f, c


def _srn(x):
    x1, x2 = x.T
    f = np.column_stack((2 + (x1 - 2) ** 2 + (x2 - 2) ** 2, 9 * x1**2 - (x2 - 1) ** 2))
    c = np.column_stack((x1**2 + x2**2 - 225, x1 - 3 * x2 + 10))
    return f, c


def _tnk(x):
    x1, x2 = x.T
    # arctan2 extends arctan(x1 / x2) continuously to x2 = 0
    c = np.column_stack(
        (
            1 + 0.1 * np.cos(16 * np.arctan2(x1, x2)) - x1**2 - x2**2,
            (x1 - 0.5) ** 2 + (x2 - 0.5) ** 2 - 0.5,
        )
    )
    return x.copy(), c


def _osy(x):
    x1, x2, x3, x4, x5, x6 = x.T
    f = np.column_stack(
        (
            -25 * (x1 - 2) ** 2 - (x2 - 2) ** 2 - (x3 - 1) ** 2 - (x4 - 4) ** 2 - (x5 - 1) ** 2,
            (x**2).sum(1),
        )
    )
    c = np.column_stack(
        (
            2 - x1 - x2,
            x1 + x2 - 6,
            x2 - x1 - 2,
            x1 - 3 * x2 - 2,
            (x3 - 3) ** 2 + x4 - 4,
            4 - (x5 - 3) ** 2 - x6,
        )
    )
    return f, c


def _two_bar_truss(x):
    x1, x2, y = x.T
    s1 = 20 * np.sqrt(16 + y**2) / (y * x1)
    s2 = 80 * np.sqrt(1 + y**2) / (y * x2)
    smax = np.maximum(s1, s2)
    f = np.column_stack((x1 * np.sqrt(16 + y**2) + x2 * np.sqrt(1 + y**2), smax))
    return f, (smax - 1e5)[:, None]


def _welded_beam(x):
    h, l, t, b = x.T
    f = np.column_stack(
        (1.10471 * l * h**2 + 0.04811 * t * b * (14 + l), 2.1952 / (b * t**3))
    )
    tau, sigma, pc = _welded_beam_stress(h, l, t, b)
    c = np.column_stack((tau - 13600, sigma - 30000, h - b, 6000 - pc))
    return f, c


def _constr(x):
    x1, x2 = x.T
    f = np.column_stack((x1, (1 + x2) / x1))
    c = np.column_stack((6 - x2 - 9 * x1, 1 + x2 - 9 * x1))
    return f, c


def _water(x):
    x1, x2, x3 = x.T
    r = 1.0 / (x1 * x2)
    f = np.column_stack(
        (
            (106780.37 * (x2 + x3) + 61704.67) / 8.0e4,
            3000 * x1 / 1500,
            305700 * 2289 * x2 / (0.06 * 2289) ** 0.65 / 3.0e6,
            250 * 2289 * np.exp(-39.75 * x2 + 9.9 * x3 + 2.74) / 6.0e6,
            25 * (1.39 * r + 4940 * x3 - 80) / 8000,
        )
    )
    c = np.column_stack(
        (
            0.00139 * r + 4.94 * x3 - 0.08 - 1,
            0.000306 * r + 1.082 * x3 - 0.0986 - 1,
            (12.307 * r + 49408.24 * x3 + 4051.02) / 50000 - 1,
            (2.098 * r + 8046.33 * x3 - 696.71) / 16000 - 1,
            (2.138 * r + 7883.39 * x3 - 705.04) / 10000 - 1,
            (0.417 * x1 * x2 + 1721.26 * x3 - 136.54) / 2000 - 1,
            (0.164 * r + 631.13 * x3 - 54.48) / 550 - 1,
        )
    )
    return f, c


# ---------------------------------------------------------------------------
# Transformed variants and the 2-D illustration problem


def _modified_g3mod(x):
    z, c = _g3mod_parts(x)
    return -(plog(z) ** 0.1), c


def _modified_g10(x):
    f, c = _g10_raw(x)
    c = c.copy()
    c[:, 3:] = plog(c[:, 3:]) ** 7
    return f, c


def _modified_pvd4(x):
    f, c1, c2, c3 = _pvd4_parts(x)
    return f, np.column_stack((c1, c2, plog(c3) ** 7))


def _toy(x):
    x1, x2 = x.T
    f = np.column_stack((-((x1 - 10) ** 2) - (x2 - 15) ** 2, -((x1 + 5) ** 2) - x2**2))
    b = 5.1 / (4 * np.pi**2)
    c = (x2 - b * x1**2 + 5 * x1 / np.pi - 6) ** 2 + 10 * (1 - 1 / (8 * np.pi)) * np.cos(x1) + 9
    return f, c[:, None]


_FUNCS = {
    "g1": _g1,
    "g3mod": _g3mod,
    "g5mod": _g5mod,
    "g6": _g6,
    "g7": _g7,
    "g8": _g8,
    "g9": _g9,
    "g10": _g10_raw,
    "g13mod": _g13mod,
    "g16": _g16,
    "g18": _g18,
    "g19": _g19,
    "g24": _g24,
    "SR7": _sr7,
    "PVD4": _pvd4,
    "WB4": _wb4,
    "BNH": _bnh,
    "SRN": _srn,
    "TNK": _tnk,
    "OSY": _osy,
    "TwoBarTruss": _two_bar_truss,
    "WeldedBeam": _welded_beam,
    "CONSTR": _constr,
    "WATER": _water,
    "modified-g3mod": _modified_g3mod,
    "modified-g10": _modified_g10,
    "modified-PVD4": _modified_pvd4,
    "toy": _toy,
}


def _load_registry():
    text = resources.files("bmoo").joinpath("data/problems.json").read_text()
    meta = json.loads(text)
    registry = {}
    for rec in meta["problems"]:
        ref = rec.get("ref_point")
        registry[rec["name"]] = ProblemSpec(
            name=rec["name"],
            d=rec["d"],
            p=rec["p"],
            q=rec["q"],
            x_low=np.asarray(rec["x_low"], dtype=float),
            x_upp=np.asarray(rec["x_upp"], dtype=float),
            func=_FUNCS[rec["name"]],
            suite=rec["suite"],
            best_known=rec.get("best_known"),
            target=rec.get("target"),
            ref_point=None if ref is None else np.asarray(ref, dtype=float),
            ref_volume=rec.get("ref_volume"),
            gamma_pct=rec.get("gamma_pct"),
            n_init=rec.get("n_init"),
            budget=rec.get("budget"),
            note=rec.get("note", ""),
        )
    return registry


_REGISTRY = _load_registry()


def list_problems(suite):
    """Return the problems of a suite, in metadata-file order.

    Parameters
    ----------
    suite : {"mono", "multi", "modified", "toy"}

    Raises
    ------
    UsageError
        If the suite is unknown.
    """
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; expected one of {SUITES}")
    return [pb for pb in _REGISTRY.values() if pb.suite == suite]


def get_problem(name):
    """Look up a problem by name."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UsageError(f"unknown problem {name!r}") from None


def all_problems():
    return list(_REGISTRY.values())
