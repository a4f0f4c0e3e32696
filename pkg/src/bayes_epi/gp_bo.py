"""Gaussian-process surrogate regression and UCB-driven optimization.

The surrogate models a noisy black-box objective over a box-bounded search
space with an anisotropic squared-exponential kernel. Inputs are rescaled
to the unit box before kernel evaluation and objective values are centered
by their mean, so the prior mean tracks the running data average. Kernel
hyperparameters are refit after every observation by maximizing the log
marginal likelihood with a bounded, derivative-free coordinate search.

Acquisition maximization is approximate by design: a scrambled
low-discrepancy candidate sweep followed by local coordinate refinement of
the best candidates. The returned point always scores at least as high as
every candidate examined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .exceptions import (
    DimensionMismatchError,
    InvalidConfigError,
    ObjectiveFailureError,
)
from .numerics import CholeskyFactor, cholesky, solve_spd
from .rng import RngStream

_N_CANDIDATES = 2048
_N_REFINE_STARTS = 5
_DUPLICATE_TOL = 1e-6  # unit-box L-inf distance
_LOG_ELL_BOUNDS = (np.log(0.05), np.log(2.0))
_LOG_VAR_BOUNDS = (np.log(1e-4), np.log(4.0))
_LOG_NOISE_BOUNDS = (np.log(1e-6), np.log(1.0))

DEFAULT_KAPPA = 2.576  # 97.5%-style confidence bound


@dataclass(frozen=True)
class Domain:
    """Axis-aligned search box."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise InvalidConfigError("lower and upper must be 1-d arrays of equal length")
        if not (self.lower < self.upper).all():
            raise InvalidConfigError("lower bounds must be strictly below upper bounds")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool((theta >= self.lower).all() and (theta <= self.upper).all())

    def to_unit(self, theta):
        return (np.asarray(theta, dtype=float) - self.lower) / (self.upper - self.lower)

    def from_unit(self, u):
        return self.lower + np.asarray(u, dtype=float) * (self.upper - self.lower)


def _unit_domain(dim: int) -> Domain:
    return Domain(np.zeros(dim), np.ones(dim))


@dataclass
class GpSurrogate:
    """Conditioned GP state; queries cost O(T) after O(T^3) setup."""

    X_obs: np.ndarray
    y_obs: np.ndarray
    kernel_lengthscales: np.ndarray
    kernel_variance: float
    noise_variance: float
    domain: Domain
    gram_chol: CholeskyFactor = field(repr=False)
    _unit_X: np.ndarray = field(repr=False)
    _y_mean: float = field(repr=False)
    _alpha: np.ndarray = field(repr=False)


def _sq_distances(U1, U2, lengthscales):
    diff = U1[:, None, :] - U2[None, :, :]
    return np.sum((diff / lengthscales) ** 2, axis=2)


def _kernel(U1, U2, lengthscales, variance):
    return variance * np.exp(-0.5 * _sq_distances(U1, U2, lengthscales))


def gp_condition(X_obs, y_obs, lengthscales, variance, noise_variance,
                 domain: Domain | None = None) -> GpSurrogate:
    """Condition the GP prior on observed (point, value) pairs."""
    X_obs = np.atleast_2d(np.asarray(X_obs, dtype=float))
    y_obs = np.asarray(y_obs, dtype=float)
    if X_obs.shape[0] != y_obs.shape[0]:
        raise DimensionMismatchError("X_obs and y_obs must have equal length")
    if X_obs.shape[0] < 1:
        raise InvalidConfigError("need at least one observation")
    lengthscales = np.asarray(lengthscales, dtype=float)
    if lengthscales.ndim == 0:
        lengthscales = np.full(X_obs.shape[1], float(lengthscales))
    if (lengthscales <= 0).any() or variance <= 0 or noise_variance < 0:
        raise InvalidConfigError("kernel parameters must be positive (noise nonnegative)")
    if domain is None:
        domain = _unit_domain(X_obs.shape[1])
    U = domain.to_unit(X_obs)
    gram = _kernel(U, U, lengthscales, variance)
    gram[np.diag_indices_from(gram)] += noise_variance
    factor = cholesky(gram)
    y_mean = float(y_obs.mean())
    alpha = solve_spd(factor, y_obs - y_mean)
    return GpSurrogate(
        X_obs=X_obs,
        y_obs=y_obs,
        kernel_lengthscales=lengthscales,
        kernel_variance=float(variance),
        noise_variance=float(noise_variance),
        domain=domain,
        gram_chol=factor,
        _unit_X=U,
        _y_mean=y_mean,
        _alpha=alpha,
    )


def _posterior_from_unit(s: GpSurrogate, U_query):
    k_star = _kernel(U_query, s._unit_X, s.kernel_lengthscales, s.kernel_variance)
    mu = s._y_mean + k_star @ s._alpha
    w = solve_spd(s.gram_chol, k_star.T)
    var = s.kernel_variance - np.sum(k_star * w.T, axis=1)
    sd = np.sqrt(np.maximum(var, 0.0))
    return mu, sd


def gp_posterior(s: GpSurrogate, theta) -> tuple[float, float]:
    """Posterior mean and standard deviation at one point."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape[0] != s.X_obs.shape[1]:
        raise DimensionMismatchError("query dimension does not match observations")
    mu, sd = _posterior_from_unit(s, s.domain.to_unit(theta)[None, :])
    return float(mu[0]), float(sd[0])


def gp_posterior_batch(s: GpSurrogate, thetas):
    """Posterior means and standard deviations for a matrix of points."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    return _posterior_from_unit(s, s.domain.to_unit(thetas))


def ucb(s: GpSurrogate, theta, kappa: float) -> float:
    """Upper confidence bound mean + kappa * sd."""
    if kappa < 0:
        raise InvalidConfigError("kappa must be nonnegative")
    mu, sd = gp_posterior(s, theta)
    return mu + kappa * sd


def log_marginal_likelihood(U, y, lengthscales, variance, noise_variance) -> float:
    """Marginal log likelihood of centered values under the GP prior."""
    yc = y - y.mean()
    gram = _kernel(U, U, lengthscales, variance)
    gram[np.diag_indices_from(gram)] += noise_variance
    try:
        factor = cholesky(gram)
    except Exception:
        return -np.inf
    alpha = solve_spd(factor, yc)
    return float(-0.5 * yc @ alpha - 0.5 * factor.logdet()
                 - 0.5 * len(yc) * np.log(2.0 * np.pi))


def fit_gp_params(X_obs, y_obs, domain: Domain | None = None):
    """Maximize the marginal likelihood over kernel hyperparameters.

    Derivative-free multi-start coordinate search in log space, bounded to
    lengthscales in [0.05, 2] (unit box), variance in [1e-4, 4], and noise
    variance in [1e-6, 1]. Deterministic: fixed starts, fixed grids.
    """
    X_obs = np.atleast_2d(np.asarray(X_obs, dtype=float))
    y_obs = np.asarray(y_obs, dtype=float)
    d = X_obs.shape[1]
    if domain is None:
        domain = _unit_domain(d)
    U = domain.to_unit(X_obs)
    y_var = float(np.var(y_obs))
    v0 = float(np.clip(y_var if y_var > 0 else 1e-3, np.exp(_LOG_VAR_BOUNDS[0]),
                       np.exp(_LOG_VAR_BOUNDS[1])))
    bounds = [_LOG_ELL_BOUNDS] * d + [_LOG_VAR_BOUNDS, _LOG_NOISE_BOUNDS]
    starts = [
        np.r_[np.full(d, np.log(0.3)), np.log(v0), np.log(max(1e-5, 1e-3 * v0))],
        np.r_[np.full(d, np.log(1.0)), np.log(v0), np.log(max(1e-4, 1e-2 * v0))],
    ]

    def score(psi):
        return log_marginal_likelihood(U, y_obs, np.exp(psi[:d]),
                                       float(np.exp(psi[d])), float(np.exp(psi[d + 1])))

    best_psi, best_val = None, -np.inf
    for psi in starts:
        psi = np.array([np.clip(p, lo, hi) for p, (lo, hi) in zip(psi, bounds)])
        val = score(psi)
        for _ in range(2):  # sweeps
            for k, (lo, hi) in enumerate(bounds):
                grid = np.linspace(lo, hi, 7)
                vals = []
                for g in grid:
                    trial = psi.copy()
                    trial[k] = g
                    vals.append(score(trial))
                j = int(np.argmax(vals))
                if vals[j] > val:
                    psi[k], val = grid[j], vals[j]
                # fine pass around the winner
                span = (hi - lo) / 6.0
                fine = np.clip(np.linspace(psi[k] - span, psi[k] + span, 5), lo, hi)
                vals = []
                for g in fine:
                    trial = psi.copy()
                    trial[k] = g
                    vals.append(score(trial))
                j = int(np.argmax(vals))
                if vals[j] > val:
                    psi[k], val = fine[j], vals[j]
        if val > best_val:
            best_psi, best_val = psi, val
    return np.exp(best_psi[:d]), float(np.exp(best_psi[d])), float(np.exp(best_psi[d + 1]))


def _is_duplicate(u, unit_X):
    return bool(np.any(np.max(np.abs(unit_X - u), axis=1) < _DUPLICATE_TOL))


def propose_next(s: GpSurrogate, domain: Domain, kappa: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Approximate UCB argmax over the box.

    Scans a scrambled Sobol candidate set, then coordinate-refines the top
    candidates; proposals that collide with an existing observation fall
    back to the next-best scored point to keep the Gram matrix
    well-conditioned.
    """
    d = domain.dim
    sampler = qmc.Sobol(d, scramble=True, seed=rng)
    cand = sampler.random(_N_CANDIDATES)
    mu, sd = _posterior_from_unit(s, cand)
    acq = mu + kappa * sd

    def acq_at(u):
        m, v = _posterior_from_unit(s, u[None, :])
        return float(m[0] + kappa * v[0])

    evaluated = [(float(a), u) for a, u in zip(acq, cand)]
    top = np.argsort(acq)[::-1][:_N_REFINE_STARTS]
    for idx in top:
        u = cand[idx].copy()
        best = float(acq[idx])
        step = 0.05
        while step >= 1e-4:
            moved = False
            for k in range(d):
                for sign in (1.0, -1.0):
                    trial = u.copy()
                    trial[k] = min(1.0, max(0.0, trial[k] + sign * step))
                    val = acq_at(trial)
                    evaluated.append((val, trial))
                    if val > best:
                        u, best = trial, val
                        moved = True
            if not moved:
                step /= 3.0
    evaluated.sort(key=lambda pair: pair[0], reverse=True)
    for _, u in evaluated:
        if not _is_duplicate(u, s._unit_X):
            return domain.from_unit(u)
    # Every scored point collides with an observation; jitter uniformly.
    return domain.from_unit(rng.random(d))


@dataclass
class BoHistory:
    """Sequential evaluation log of one optimization run."""

    thetas: np.ndarray
    values: np.ndarray
    init_n: int

    @property
    def n_rounds(self) -> int:
        return self.values.shape[0]

    @property
    def best_index(self) -> int:
        return int(np.argmax(self.values))  # first occurrence of the maximum

    @property
    def best_round(self) -> int:
        return self.best_index + 1

    @property
    def best_theta(self) -> np.ndarray:
        return self.thetas[self.best_index]

    @property
    def best_value(self) -> float:
        return float(self.values[self.best_index])

    def running_best(self) -> np.ndarray:
        return np.maximum.accumulate(self.values)


def bo_run(objective, domain: Domain, init_n: int = 5, iters: int = 15,
           kappa: float = DEFAULT_KAPPA,
           rng: RngStream | np.random.Generator | None = None) -> BoHistory:
    """Optimize a noisy black-box objective with a GP surrogate and UCB.

    Starts from a quasi-random space-filling design of ``init_n`` points,
    then alternates kernel refitting (marginal likelihood), conditioning,
    and acquisition for ``iters`` rounds. Objective errors are wrapped in
    ObjectiveFailureError together with the offending point.
    """
    if init_n < 1 or iters < 0:
        raise InvalidConfigError("need init_n >= 1 and iters >= 0")
    if isinstance(rng, RngStream):
        gen = rng.generator(11)
    elif rng is None:
        gen = np.random.default_rng()
    else:
        gen = rng

    def evaluate(theta):
        try:
            return float(objective(theta))
        except Exception as exc:
            raise ObjectiveFailureError(theta, exc) from exc

    sampler = qmc.Sobol(domain.dim, scramble=True, seed=gen)
    # Draw a power-of-two block (Sobol balance) and keep the leading points.
    block = int(2 ** np.ceil(np.log2(max(init_n, 2))))
    thetas = [domain.from_unit(u) for u in sampler.random(block)[:init_n]]
    values = [evaluate(t) for t in thetas]

    for _ in range(iters):
        X = np.vstack(thetas)
        y = np.asarray(values)
        ell, var, noise = fit_gp_params(X, y, domain)
        surrogate = gp_condition(X, y, ell, var, noise, domain)
        theta = propose_next(surrogate, domain, kappa, gen)
        thetas.append(theta)
        values.append(evaluate(theta))

    return BoHistory(np.vstack(thetas), np.asarray(values), init_n)
