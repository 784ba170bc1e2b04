"""Fit the five models by penalized maximum likelihood, plus a MAP-EM fit.

The Bradley-Terry fit uses the classic minorization fixed point
``u_i <- a~_i / sum_j n~_ij / (u_i + u_j)``, which is monotone in the
penalized log-likelihood and reaches machine-precision stationarity. The
four extended models use a generic two-phase maximizer on their strictly
concave reparameterized objectives: gradient ascent with a backtracking
(Armijo) line search, then, if the gradient target is still unmet once the
objective stalls, a bounded quasi-Newton polish. Strict concavity makes the
optimum unique, so the method choice affects only how fast the same point
is reached.

Every fit re-verifies the existence condition for its model and
perturbation scheme before iterating, refusing with a witness rather than
diverging:

* Improved perturbation keeps existence equivalent to the raw-data
  conditions: the comparison graph must be connected (venue-free models),
  or the hosting digraph strongly connected (venue models).
* ConnerGrant perturbs every pair, so connectivity always holds.
* MatrixShift existence is checked on the shifted counts themselves (strong
  connectivity of the shifted win digraph, or of the shifted hosting
  digraph for venue models).

Models with a tie parameter additionally require at least one observed tie,
whatever the scheme, since tie counts are never perturbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .connectivity import (
    check_condition_a,
    check_condition_b,
    check_condition_c,
    strong_connectivity_witness,
)
from .errors import ConfigError, ExistenceError, NoTiesError, VenuelessDataError
from .likelihood import Objective
from .perturbation import perturb
from .types import (
    Array,
    ConnerGrant,
    Dataset,
    FitResult,
    Improved,
    MatrixShift,
    Model,
    ModelSpec,
    Normalization,
    PerturbedCounts,
)

_ARMIJO_C = 1e-4
_STEP_FLOOR = 1e-18
_POLISH_ROUNDS = 3


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls shared by all fits.

    Convergence is declared when the gradient sup-norm reaches ``grad_tol``
    or the relative objective change stays at or below ``rel_ll_tol`` on two
    successive iterations; both quantities are recorded on the FitResult.
    ``restarts`` adds that many random extra starts (seeded by ``seed``) on
    top of the deterministic one, keeping the best final objective.
    """

    grad_tol: float = 1e-8
    rel_ll_tol: float = 1e-10
    max_iters: int = 10000
    restarts: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.grad_tol <= 0 or self.rel_ll_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.restarts < 0:
            raise ConfigError("restarts must be nonnegative")


@dataclass(frozen=True)
class MapPriorSpec:
    """Independent Gamma(shape, rate) prior on every merit.

    ``rate=None`` resolves to ``shape * t - 1`` for a t-team dataset.
    ``shape == 1`` with ``rate == 0`` is the flat prior, making the MAP
    coincide with the unpenalized maximum likelihood estimate.
    """

    shape: float
    rate: float | None = None

    def __post_init__(self):
        if self.shape < 1.0:
            raise ConfigError(f"prior shape must be >= 1, got {self.shape}")
        if self.rate is not None and self.rate < 0.0:
            raise ConfigError(f"prior rate must be >= 0, got {self.rate}")

    @property
    def ml_equivalent(self) -> bool:
        return self.shape == 1.0 and self.rate == 0.0


@dataclass(frozen=True)
class _AscentResult:
    x: Array
    value: float
    trace: tuple[float, ...]
    iterations: int
    gradient_sup_norm: float
    converged: bool


def _ascend(objective, start: Array, config: SolverConfig) -> _AscentResult:
    """Armijo gradient ascent, alternated with quasi-Newton polish rounds.

    Convergence is declared on the gradient target, or when the ascent
    stalls (two successive relative objective changes at or below
    rel_ll_tol, or no acceptable step) and a polish round confirms that no
    meaningful objective improvement remains. A polish that does make
    progress sends control back to the ascent instead.
    """
    lower = getattr(objective, "lower_bounds", None)
    x = np.asarray(start, dtype=float).copy()
    f, g = objective.value_and_gradient(x)
    if not np.isfinite(f) or g is None:
        raise ConfigError("start point lies outside the objective's domain")
    value_only = getattr(objective, "value", None)
    if value_only is None:
        value_only = lambda z: objective.value_and_gradient(z)[0]  # noqa: E731

    trace = [float(f)]
    iterations = 0
    grad_norm = float(np.max(np.abs(g)))
    converged = grad_norm <= config.grad_tol

    for _ in range(3):
        if converged or iterations >= config.max_iters:
            break

        stall = 0
        phase_flat = False
        while iterations < config.max_iters and grad_norm > config.grad_tol:
            step = 1.0
            g_sq = float(g @ g)
            accepted = False
            while step >= _STEP_FLOOR:
                candidate = x + step * g
                if lower is not None and np.any(candidate < lower):
                    step *= 0.5
                    continue
                f_new = value_only(candidate)
                if np.isfinite(f_new) and f_new >= f + _ARMIJO_C * step * g_sq:
                    accepted = True
                    break
                step *= 0.5
            iterations += 1
            if not accepted:
                phase_flat = True
                break
            rel_change = abs(f_new - f) / max(1.0, abs(f_new))
            x = candidate
            f, g = objective.value_and_gradient(x)
            grad_norm = float(np.max(np.abs(g)))
            trace.append(float(f))
            if rel_change <= config.rel_ll_tol:
                stall += 1
                if stall >= 2:
                    phase_flat = True
                    break
            else:
                stall = 0

        if grad_norm <= config.grad_tol:
            converged = True
            break
        if iterations >= config.max_iters:
            break

        f_before = f
        x, f, g, grad_norm, polish_iters = _polish(
            objective, x, f, g, config, config.max_iters - iterations
        )
        iterations += polish_iters
        if f > trace[-1]:
            trace.append(float(f))
        if grad_norm <= config.grad_tol:
            converged = True
            break
        if phase_flat and abs(f - f_before) <= config.rel_ll_tol * max(1.0, abs(f)):
            # The ascent stalled and the polish found nothing further: the
            # objective is flat at working precision.
            converged = True
            break

    return _AscentResult(
        x=x,
        value=float(f),
        trace=tuple(trace),
        iterations=iterations,
        gradient_sup_norm=grad_norm,
        converged=converged,
    )


def _polish(objective, x, f, g, config: SolverConfig, budget: int):
    """Quasi-Newton rounds from the ascent's end point; keeps the best
    point seen and never returns a lower objective value."""
    lower = getattr(objective, "lower_bounds", None)
    bounds = None
    if lower is not None:
        bounds = [(lo if np.isfinite(lo) else None, None) for lo in lower]

    def negated(z):
        value, grad = objective.value_and_gradient(z)
        if grad is None or not np.isfinite(value):
            return np.inf, np.zeros_like(z)
        return -value, -grad

    grad_norm = float(np.max(np.abs(g)))
    used = 0
    for _ in range(_POLISH_ROUNDS):
        if grad_norm <= config.grad_tol or used >= budget:
            break
        result = minimize(
            negated,
            x,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={
                "maxiter": budget - used,
                "ftol": 1e-17,
                "gtol": config.grad_tol * 0.1,
                "maxcor": 30,
            },
        )
        used += max(result.nit, 1)
        f_new, g_new = objective.value_and_gradient(result.x)
        if g_new is None or not np.isfinite(f_new) or f_new < f:
            break
        improved_grad = float(np.max(np.abs(g_new))) < grad_norm
        x, f, g = result.x, f_new, g_new
        grad_norm = float(np.max(np.abs(g)))
        if not improved_grad:
            break
    return x, f, g, grad_norm, used


def maximize_concave(objective, start, config: SolverConfig | None = None):
    """Maximize a concave objective from ``start``.

    ``objective`` needs a ``value_and_gradient(x) -> (float, ndarray)``
    method; an optional ``value(x)`` is used for cheaper line-search
    evaluations, and an optional ``lower_bounds`` vector constrains the
    domain. Returns ``(point, trace)`` where ``trace`` lists the objective
    value at the start and after each accepted iteration (non-decreasing).
    """
    config = config or SolverConfig()
    result = _ascend(objective, np.asarray(start, dtype=float), config)
    return result.x, result.trace


def _verify_existence(
    spec: ModelSpec, dataset: Dataset, perturbed: PerturbedCounts
) -> None:
    model = spec.model
    if model.needs_venues and dataset.venueless:
        raise VenuelessDataError(
            f"{model.value} needs home/away structure and this dataset has none"
        )
    if model.needs_ties and dataset.totals.ties.sum() == 0:
        raise NoTiesError(
            f"{model.value} needs at least one tie and the data contain none"
        )

    scheme = spec.perturbation
    if isinstance(scheme, ConnerGrant):
        return  # every pair is perturbed, so connectivity always holds
    if isinstance(scheme, Improved):
        if model.needs_venues:
            witness = check_condition_c(dataset)
        else:
            witness = check_condition_b(dataset)
    elif isinstance(scheme, MatrixShift):
        if model.needs_venues:
            witness = strong_connectivity_witness(
                perturbed.n_host,
                condition="C",
                detail=(
                    "after the shift, no team in the second set hosts any team "
                    "in the first set"
                ),
            )
        else:
            witness = strong_connectivity_witness(
                perturbed.a_free,
                condition="A",
                detail=(
                    "after the shift, no team in the second set has positive "
                    "win weight over the first set"
                ),
            )
    else:
        raise TypeError(f"unknown perturbation spec {scheme!r}")

    if witness is not None:
        raise ExistenceError(
            f"the {model.value} estimate does not exist for these data: "
            + witness.describe(dataset.teams),
            witness=witness,
        )


def _bt_loglik(beta: Array, w: Array) -> float:
    d = np.logaddexp.outer(beta, beta)
    return float((w * (beta[:, None] - d)).sum())


def _mm_bradley_terry(w: Array, u0: Array, config: SolverConfig) -> _AscentResult:
    """Minorization fixed point for the Bradley-Terry objective."""
    n = w + w.T
    row = w.sum(axis=1)
    u = u0 / u0[0]
    beta = np.log(u)
    trace = [_bt_loglik(beta, w)]
    iterations = 0
    stall = 0
    converged = False
    grad_norm = np.inf
    while iterations < config.max_iters:
        denom = (n / np.add.outer(u, u)).sum(axis=1)
        u = row / denom
        u = u / u[0]
        beta = np.log(u)
        iterations += 1
        p = expit(np.subtract.outer(beta, beta))
        g = row - (n * p).sum(axis=1)
        grad_norm = float(np.max(np.abs(g[1:])))
        value = _bt_loglik(beta, w)
        rel_change = abs(value - trace[-1]) / max(1.0, abs(value))
        trace.append(value)
        if grad_norm <= config.grad_tol:
            converged = True
            break
        if rel_change <= config.rel_ll_tol:
            stall += 1
            if stall >= 2:
                converged = True
                break
        else:
            stall = 0
    x = beta[1:]
    return _AscentResult(
        x=x,
        value=trace[-1],
        trace=tuple(trace),
        iterations=iterations,
        gradient_sup_norm=grad_norm,
        converged=converged,
    )


def _normalized_merits(beta: Array, normalization: Normalization) -> Array:
    u = np.exp(beta - beta.max())  # guard against overflow for extreme merits
    if normalization is Normalization.SIMPLEX:
        return u / u.sum()
    return u / u[0]


def _run_starts(starts, runner) -> _AscentResult:
    best: _AscentResult | None = None
    for start in starts:
        result = runner(start)
        if best is None or result.value > best.value:
            best = result
    return best


def fit(model_spec: ModelSpec, dataset: Dataset, config: SolverConfig | None = None) -> FitResult:
    """Fit one model to a dataset by penalized maximum likelihood.

    Existence is re-verified here whatever the caller already checked;
    violations raise ExistenceError (with a witness), NoTiesError, or
    VenuelessDataError. A fit that exhausts its iteration budget is still
    returned, with ``converged=False``; use ``FitResult.ensure_converged``
    to turn that into an error. With restarts, the reported iterations and
    trace belong to the winning start.
    """
    config = config or SolverConfig()
    perturbed = perturb(dataset, model_spec.perturbation)
    _verify_existence(model_spec, dataset, perturbed)
    objective = Objective(model_spec.model, perturbed)

    rng = np.random.default_rng(config.seed)
    starts = [objective.initial_point()]
    for _ in range(config.restarts):
        starts.append(objective.random_point(rng))

    if model_spec.model is Model.BRADLEY_TERRY:
        w = perturbed.a_free

        def runner(start):
            u0 = np.exp(np.concatenate([[0.0], start]))
            return _mm_bradley_terry(w, u0, config)

    else:

        def runner(start):
            return _ascend(objective, start, config)

    best = _run_starts(starts, runner)
    point = objective.unpack(best.x)
    return FitResult(
        model=model_spec.model,
        teams=dataset.teams,
        merits_u=_normalized_merits(point.beta, model_spec.normalization),
        beta=point.beta,
        theta_hat=point.theta,
        gamma_hat=point.gamma,
        log_likelihood=best.value,
        iterations=best.iterations,
        converged=best.converged,
        gradient_sup_norm=best.gradient_sup_norm,
        trace=best.trace,
        scores=dataset.scores,
        normalization=model_spec.normalization,
        epsilon=perturbed.epsilon,
    )


def _log_posterior(u: Array, a: Array, n: Array, d: float, b: float) -> float:
    """Unnormalized log-posterior of the merits under the Gamma prior."""
    log_u = np.log(u)
    denom = np.log(np.add.outer(u, u))
    ll = float((a * (log_u[:, None] - denom)).sum())
    return ll + float(((d - 1.0) * log_u - b * u).sum())


def _posterior_gradient(u: Array, a_i: Array, n: Array, d: float, b: float) -> Array:
    """Gradient with respect to log-merits (scale-aware stationarity check)."""
    pairs = (n * (u[:, None] / np.add.outer(u, u))).sum(axis=1)
    return (d - 1.0) - b * u + a_i - pairs


def _em_iterate(dataset: Dataset, d: float, b: float, config: SolverConfig):
    """Raw EM fixed-point iteration; returns the unnormalized mode.

    For the flat prior (d=1, b=0) the posterior is scale-invariant, so the
    iterate is renormalized to the simplex each step purely for stability.
    """
    totals = dataset.totals
    a = totals.a
    n = a + a.T  # decisive games only; ties carry no information here
    a_i = a.sum(axis=1)
    t = dataset.num_teams
    flat_prior = d == 1.0 and b == 0.0

    u = np.full(t, 1.0 / t)
    trace = [_log_posterior(u, a, n, d, b)]
    iterations = 0
    stall = 0
    converged = False
    grad_norm = np.inf
    while iterations < config.max_iters:
        denom = b + (n / np.add.outer(u, u)).sum(axis=1)
        u = (d - 1.0 + a_i) / denom
        if flat_prior:
            u = u / u.sum()
        iterations += 1
        grad_norm = float(np.max(np.abs(_posterior_gradient(u, a_i, n, d, b))))
        value = _log_posterior(u, a, n, d, b)
        rel_change = abs(value - trace[-1]) / max(1.0, abs(value))
        trace.append(value)
        if grad_norm <= config.grad_tol:
            converged = True
            break
        if rel_change <= config.rel_ll_tol:
            stall += 1
            if stall >= 2:
                converged = True
                break
        else:
            stall = 0
    return u, tuple(trace), iterations, grad_norm, converged


def fit_map_em(
    dataset: Dataset,
    prior: MapPriorSpec,
    config: SolverConfig | None = None,
    normalization: Normalization = Normalization.SIMPLEX,
) -> FitResult:
    """Posterior mode of the Bradley-Terry merits under Gamma priors, by EM.

    The mode exists in the interior only for shape > 1 with rate > 0, or
    for the flat prior (shape 1, rate 0) when the win digraph is strongly
    connected; anything else is refused. Merits are reported on the simplex
    by default. ``log_likelihood`` on the result is the unnormalized
    log-posterior, and ``gradient_sup_norm`` is measured with respect to
    log-merits so it is scale-free.

    Ties in the data are ignored: the underlying outcome model is win/loss
    only.
    """
    config = config or SolverConfig()
    t = dataset.num_teams
    d = float(prior.shape)
    b = float(prior.rate) if prior.rate is not None else d * t - 1.0

    if d == 1.0 and b != 0.0:
        raise ConfigError(
            "with shape 1 the posterior is scale-invariant in the likelihood "
            "but decays with the rate, so no interior mode exists; use rate 0"
        )
    if d > 1.0 and b == 0.0:
        raise ConfigError(
            "with shape > 1 and rate 0 the log-posterior grows without bound "
            "along uniform rescaling, so no mode exists"
        )
    if d == 1.0:
        witness = check_condition_a(dataset)
        if witness is not None:
            raise ExistenceError(
                "the flat-prior mode is the maximum likelihood estimate, which "
                "does not exist here: " + witness.describe(dataset.teams),
                witness=witness,
            )

    u, trace, iterations, grad_norm, converged = _em_iterate(dataset, d, b, config)
    beta = np.log(u) - np.log(u[0])
    return FitResult(
        model=Model.BRADLEY_TERRY,
        teams=dataset.teams,
        merits_u=_normalized_merits(beta, normalization),
        beta=beta,
        theta_hat=None,
        gamma_hat=None,
        log_likelihood=trace[-1],
        iterations=iterations,
        converged=converged,
        gradient_sup_norm=grad_norm,
        trace=trace,
        scores=dataset.scores,
        normalization=normalization,
        epsilon=None,
    )
