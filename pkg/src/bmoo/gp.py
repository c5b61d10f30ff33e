"""Gaussian-process regression with a Matérn 5/2 covariance

Each objective and constraint function gets its own independent model with

* a constant but unknown mean (estimated by generalized least squares and
  integrated out in the predictive variance),
* an anisotropic Matérn 5/2 covariance ``sigma2 * k(h)`` with
  ``h = ||(x - x') / theta||``,
* a small relative nugget added to the diagonal for conditioning only,
* hyperparameters estimated by maximum a posteriori on the restricted
  likelihood, with log-normal priors on ``theta`` and ``sigma2``.

Inputs are rescaled to the unit cube and outputs standardized before
fitting; all public quantities are reported in the original units.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

SQRT5 = np.sqrt(5.0)
LN10 = np.log(10.0)


class FittingError(RuntimeError):
    """Raised when the covariance matrix cannot be factorized."""


def matern52(r):
    """Matérn 5/2 correlation at scaled distance r >= 0."""
    r = np.asarray(r, dtype=float)
    s = SQRT5 * r
    out = (1.0 + s + s * s / 3.0) * np.exp(-s)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GpHyperparameters:
    """Covariance parameters in the original units.

    Attributes
    ----------
    sigma2 : float
        Process variance.
    theta : ndarray, shape (d,)
        Range parameters.
    nugget : float
        Variance added to the diagonal of the training covariance.
    """

    sigma2: float
    theta: np.ndarray
    nugget: float


@dataclass(frozen=True)
class GpConfig:
    """Settings of the MAP fit.

    Attributes
    ----------
    n_starts : int
        Number of local optimizations (a warm start counts as one).
    nugget_rel : float
        Initial nugget, relative to sigma2.
    nugget_rel_max : float
        Largest nugget tried when the factorization fails (x10 steps).
    theta_bounds : tuple of float
        Bounds on theta in unit-cube coordinates.
    log10_sd_theta : float
        Prior standard deviation of log10(theta), centered at 1.
    log10_sd_sigma2 : float
        Prior standard deviation of log10(sigma2), centered at the
        empirical variance.
    sigma2_bounds : tuple of float
        Bounds on sigma2 relative to the empirical variance.
    maxiter : int
        Iteration cap of each local optimization.
    """

    n_starts: int = 5
    nugget_rel: float = 1e-10
    nugget_rel_max: float = 1e-2
    theta_bounds: tuple = (1e-3, 1e3)
    log10_sd_theta: float = 1.0
    log10_sd_sigma2: float = 2.0
    sigma2_bounds: tuple = (1e-6, 1e6)
    maxiter: int = 200


@dataclass(frozen=True)
class Posterior:
    """Gaussian posterior at one input."""

    mean: float
    var: float

    @property
    def sd(self):
        return float(np.sqrt(self.var))


@dataclass(frozen=True, eq=False)
class GpModel:
    """A fitted model; immutable once built.

    Attributes
    ----------
    hyper : GpHyperparameters
    mean_coefficient : float
        Estimated constant mean, original units.
    train_x : ndarray, shape (n, d)
    train_y : ndarray, shape (n,)
    factor : dict
        Cholesky factor and solves in standardized coordinates.
    """

    hyper: GpHyperparameters
    mean_coefficient: float
    train_x: np.ndarray
    train_y: np.ndarray
    factor: dict = field(repr=False)
    x_low: np.ndarray = field(repr=False, default=None)
    x_span: np.ndarray = field(repr=False, default=None)
    y_mean: float = 0.0
    y_std: float = 1.0
    log_params: np.ndarray = field(repr=False, default=None)
    constant: bool = False

    def predict(self, x):
        return predict(self, x)


def _pairwise_sq(xs):
    diff = xs[:, None, :] - xs[None, :, :]
    return np.moveaxis(diff * diff, 2, 0)  # (d, n, n)


def _corr(D2, theta):
    h = np.sqrt(np.tensordot(1.0 / theta**2, D2, axes=1))
    return matern52(h), h


def _factorize(R, eta, eta_max):
    n = R.shape[0]
    while True:
        try:
            L = cholesky(R + eta * np.eye(n), lower=True)
            return L, eta
        except np.linalg.LinAlgError:
            eta *= 10.0
            if eta > eta_max * (1 + 1e-9):
                raise FittingError("covariance factorization failed after nugget escalation")


def _neg_log_post(phi, D2, ys, cfg):
    """Negative log restricted posterior and its gradient.

    phi = (log sigma2, log theta_1, ..., log theta_d) in standardized units.
    """
    n = ys.size
    sigma2 = np.exp(phi[0])
    theta = np.exp(phi[1:])
    R, h = _corr(D2, theta)
    try:
        L, eta = _factorize(R, cfg.nugget_rel, cfg.nugget_rel_max)
    except FittingError:
        return 1e10, np.zeros_like(phi)
    one = np.ones(n)
    u = cho_solve((L, True), one)
    s = one @ u
    beta = (u @ ys) / s
    e = ys - beta
    v = cho_solve((L, True), e)
    Q = e @ v
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    nll = 0.5 * ((n - 1) * phi[0] + logdet + np.log(s) + Q / sigma2)

    sd_s = cfg.log10_sd_sigma2 * LN10
    sd_t = cfg.log10_sd_theta * LN10
    nll += 0.5 * phi[0] ** 2 / sd_s**2 + 0.5 * np.sum(phi[1:] ** 2) / sd_t**2

    Ainv = cho_solve((L, True), np.eye(n))
    M = Ainv - np.outer(u, u) / s - np.outer(v, v) / sigma2
    G = (5.0 / 3.0) * (1.0 + SQRT5 * h) * np.exp(-SQRT5 * h)
    W = M * G
    grad = np.empty_like(phi)
    grad[0] = 0.5 * ((n - 1) - Q / sigma2) + phi[0] / sd_s**2
    grad[1:] = 0.5 * np.einsum("ij,kij->k", W, D2) / theta**2 + phi[1:] / sd_t**2
    return nll, grad


def _build(xs, ys, sigma2_s, theta_s, cfg):
    n = ys.size
    D2 = _pairwise_sq(xs)
    R, _ = _corr(D2, theta_s)
    L, eta = _factorize(R, cfg.nugget_rel, cfg.nugget_rel_max)
    one = np.ones(n)
    u = cho_solve((L, True), one)
    s = one @ u
    beta = (u @ ys) / s
    v = cho_solve((L, True), ys - beta)
    return dict(L=L, u=u, s=s, beta=beta, v=v, xs=xs, sigma2=sigma2_s, theta=theta_s, eta=eta)


def _scalings(train_x, train_y, x_low, x_upp):
    if x_low is None:
        x_low = train_x.min(0)
    if x_upp is None:
        x_upp = train_x.max(0)
    x_low = np.asarray(x_low, dtype=float)
    span = np.asarray(x_upp, dtype=float) - x_low
    span = np.where(span > 0, span, 1.0)
    y_mean = float(np.mean(train_y))
    y_std = float(np.std(train_y))
    return x_low, span, y_mean, y_std


def fit_map(train_x, train_y, config=None, x_low=None, x_upp=None, warm_start=None, rng=None):
    """Fit a model by maximum a posteriori.

    Parameters
    ----------
    train_x : array_like, shape (n, d)
    train_y : array_like, shape (n,)
    config : GpConfig, optional
    x_low, x_upp : array_like, optional
        Input box used for rescaling (defaults to the data range).
    warm_start : ndarray, optional
        ``log_params`` of a previous model, used as one of the starts.
    rng : numpy.random.Generator, optional
        Source of the random starting points.

    Returns
    -------
    GpModel

    Raises
    ------
    FittingError
        If the covariance matrix cannot be factorized even with the
        largest nugget.
    """
    cfg = config or GpConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    train_x = np.atleast_2d(np.asarray(train_x, dtype=float))
    train_y = np.asarray(train_y, dtype=float).ravel()
    n, d = train_x.shape
    x_low, span, y_mean, y_std = _scalings(train_x, train_y, x_low, x_upp)
    xs = (train_x - x_low) / span

    if n < 2 or y_std <= 1e-12 * max(1.0, abs(y_mean)):
        return _constant_model(train_x, train_y, x_low, span, y_mean, d, cfg)

    ys = (train_y - y_mean) / y_std
    D2 = _pairwise_sq(xs)
    lb = np.concatenate([[np.log(cfg.sigma2_bounds[0])], np.full(d, np.log(cfg.theta_bounds[0]))])
    ub = np.concatenate([[np.log(cfg.sigma2_bounds[1])], np.full(d, np.log(cfg.theta_bounds[1]))])

    starts = []
    if warm_start is not None and np.size(warm_start) == d + 1:
        starts.append(np.clip(np.asarray(warm_start, dtype=float), lb, ub))
    starts.append(np.concatenate([[0.0], np.full(d, np.log(0.5))]))
    while len(starts) < cfg.n_starts:
        phi = np.concatenate(
            [
                [rng.normal(0.0, 0.5 * LN10)],
                rng.normal(np.log(0.5), 0.5 * LN10, size=d),
            ]
        )
        starts.append(np.clip(phi, lb, ub))

    best = None
    for phi0 in starts[: max(cfg.n_starts, 1)]:
        res = minimize(
            _neg_log_post,
            phi0,
            args=(D2, ys, cfg),
            jac=True,
            method="L-BFGS-B",
            bounds=list(zip(lb, ub)),
            options={"maxiter": cfg.maxiter},
        )
        if best is None or res.fun < best.fun:
            best = res
    phi = best.x
    fac = _build(xs, ys, np.exp(phi[0]), np.exp(phi[1:]), cfg)
    return _assemble(train_x, train_y, x_low, span, y_mean, y_std, fac, phi)


def build_model(hyper, train_x, train_y, x_low=None, x_upp=None, config=None):
    """Condition a model with fixed hyperparameters on data (no fitting).

    Hyperparameters are given in original units; the nugget is
    re-expressed relative to sigma2.
    """
    cfg = config or GpConfig()
    train_x = np.atleast_2d(np.asarray(train_x, dtype=float))
    train_y = np.asarray(train_y, dtype=float).ravel()
    x_low, span, y_mean, _ = _scalings(train_x, train_y, x_low, x_upp)
    y_std = float(np.sqrt(hyper.sigma2))
    xs = (train_x - x_low) / span
    ys = (train_y - y_mean) / y_std
    eta = max(hyper.nugget / hyper.sigma2, 0.0)
    cfg = GpConfig(**{**cfg.__dict__, "nugget_rel": max(eta, 1e-12)})
    fac = _build(xs, ys, 1.0, np.asarray(hyper.theta, dtype=float) / span, cfg)
    phi = np.concatenate([[0.0], np.log(fac["theta"])])
    return _assemble(train_x, train_y, x_low, span, y_mean, y_std, fac, phi)


def _assemble(train_x, train_y, x_low, span, y_mean, y_std, fac, phi):
    sigma2 = fac["sigma2"] * y_std**2
    hyper = GpHyperparameters(
        sigma2=float(sigma2), theta=fac["theta"] * span, nugget=float(fac["eta"] * sigma2)
    )
    return GpModel(
        hyper=hyper,
        mean_coefficient=float(y_mean + y_std * fac["beta"]),
        train_x=train_x.copy(),
        train_y=train_y.copy(),
        factor=fac,
        x_low=x_low,
        x_span=span,
        y_mean=y_mean,
        y_std=y_std,
        log_params=np.asarray(phi, dtype=float).copy(),
    )


def _constant_model(train_x, train_y, x_low, span, y_mean, d, cfg):
    # documented fallback for constant data: the predictor is the constant
    # and the predictive variance is floored at a tiny value
    sigma2_min = 1e-12 * max(1.0, y_mean**2)
    hyper = GpHyperparameters(sigma2=sigma2_min, theta=span.copy(), nugget=0.0)
    return GpModel(
        hyper=hyper,
        mean_coefficient=y_mean,
        train_x=train_x.copy(),
        train_y=train_y.copy(),
        factor={},
        x_low=x_low,
        x_span=span,
        y_mean=y_mean,
        y_std=1.0,
        log_params=None,
        constant=True,
    )


def predict_batch(model, X):
    """Posterior mean and variance at the rows of X.

    Parameters
    ----------
    model : GpModel
    X : array_like, shape (m, d)

    Returns
    -------
    mean, var : ndarray, shape (m,)
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m = X.shape[0]
    if model.constant:
        return np.full(m, model.mean_coefficient), np.full(m, model.hyper.sigma2)
    fac = model.factor
    xs = (X - model.x_low) / model.x_span
    diff = (xs[:, None, :] - fac["xs"][None, :, :]) / fac["theta"]
    r = matern52(np.sqrt(np.sum(diff * diff, axis=2)))  # (m, n)
    mean_s = fac["beta"] + r @ fac["v"]
    w = solve_triangular(fac["L"], r.T, lower=True)
    rr = np.sum(w * w, axis=0)
    ur = 1.0 - r @ fac["u"]
    var_s = fac["sigma2"] * (1.0 - rr + ur * ur / fac["s"])
    mean = model.y_mean + model.y_std * mean_s
    var = np.maximum(var_s, 0.0) * model.y_std**2
    return mean, var


def predict(model, x):
    """Posterior at a single input."""
    mean, var = predict_batch(model, np.asarray(x, dtype=float).reshape(1, -1))
    return Posterior(float(mean[0]), float(var[0]))


def fit_all(X, Y, config=None, x_low=None, x_upp=None, warm_starts=None, rng=None):
    """Fit one independent model per column of Y."""
    Y = np.asarray(Y, dtype=float).reshape(len(X), -1)
    models = []
    for j in range(Y.shape[1]):
        ws = None if warm_starts is None else warm_starts[j]
        models.append(fit_map(X, Y[:, j], config, x_low, x_upp, ws, rng))
    return models


def predict_all(models, X):
    """Stack predictions of several models: returns (m, k) mean and var."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if not models:
        return np.empty((X.shape[0], 0)), np.empty((X.shape[0], 0))
    out = [predict_batch(mo, X) for mo in models]
    mean = np.column_stack([o[0] for o in out])
    var = np.column_stack([o[1] for o in out])
    return mean, var
