"""Penalized log-likelihoods and gradients for the five models.

All models are evaluated in the reparameterized space: merits enter as
``beta_i = log u_i - log u_1`` (so ``beta[0] == 0``), the tie parameter as
``phi = log theta``, and the home advantage as ``log_gamma``. Every
evaluation runs in log space with log-sum-exp so that merits spanning many
orders of magnitude (small perturbations produce them) stay finite.

Free parameter vectors are laid out ``[beta_2 .. beta_t]`` plus ``phi`` for
models with a tie parameter, plus ``log_gamma`` for models with a home
parameter, in that order.

Pair terms for the venue-free models (per unordered pair i < j, with
perturbed wins ``w`` and raw ties ``tw``):

* Bradley-Terry: ``w_ij (beta_i - lse(beta_i, beta_j))`` summed over ordered
  pairs; ties do not enter.
* Rao-Kupper (theta > 1): wins ``w_ij (beta_i - lse(beta_i, phi + beta_j))``
  and ties ``tw (log(theta^2 - 1) + beta_i + beta_j - D_ij - D_ji)`` where
  ``D_ij = lse(beta_i, phi + beta_j)`` and ``log(theta^2 - 1)`` is computed
  as ``2 phi + log1p(-exp(-2 phi))``.
* Davidson (theta > 0): with ``mid = phi + (beta_i + beta_j) / 2`` and
  ``D = lse(beta_i, beta_j, mid)``, the pair contributes
  ``w_ij beta_i + w_ji beta_j + tw mid - (w_ij + w_ji + tw) D``.

The venue models sum over ordered hosting pairs (host i, visitor j) with
venue-split perturbed wins ``wh[i][j]`` (host win) and ``wv[i][j]``
(visitor win at i's venue), plus hosted ties ``wt[i][j]`` for the model
with both parameters:

* home-field: host denominator ``D = lse(log_gamma + beta_i, beta_j)``,
  contribution ``wh (log_gamma + beta_i) + wv beta_j - (wh + wv) D``.
* home-field with ties: adds ``wt mid`` and extends the denominator to
  ``lse(log_gamma + beta_i, beta_j, mid)``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .errors import (
    ConfigError,
    DimensionError,
    NoTiesError,
    ThetaDomainError,
    VenuelessDataError,
)
from .types import Array, Model, ParameterPoint, PerturbedCounts

#: Smallest phi admitted for the Rao-Kupper model (theta must exceed 1).
RK_PHI_MIN = 1e-10


def _lse3(x, y, z):
    return np.logaddexp(np.logaddexp(x, y), z)


def _check_point(model: Model, point: ParameterPoint, t: int) -> None:
    if len(point.beta) != t:
        raise DimensionError(
            f"point has {len(point.beta)} merits but the data have {t} teams"
        )
    if model.has_tie_parameter and point.phi is None:
        raise DimensionError(f"{model.value} needs a tie parameter (phi)")
    if not model.has_tie_parameter and point.phi is not None:
        raise DimensionError(f"{model.value} takes no tie parameter")
    if model.has_home_parameter and point.log_gamma is None:
        raise DimensionError(f"{model.value} needs a home parameter (log_gamma)")
    if not model.has_home_parameter and point.log_gamma is not None:
        raise DimensionError(f"{model.value} takes no home parameter")


def _require_ties(perturbed: PerturbedCounts, model: Model) -> None:
    if perturbed.ties.sum() == 0:
        raise NoTiesError(
            f"{model.value} models tie probabilities and the data contain no tie"
        )


def _require_venues(perturbed: PerturbedCounts, model: Model) -> None:
    if perturbed.venueless:
        raise VenuelessDataError(
            f"{model.value} needs home/away structure and this dataset has none"
        )


def _rk_terms(beta: Array, phi: float, w: Array, ties: Array):
    iu, ju = np.triu_indices(len(beta), 1)
    w_ij = w[iu, ju]
    w_ji = w[ju, iu]
    tw = ties[iu, ju]
    d_ij = np.logaddexp(beta[iu], phi + beta[ju])
    d_ji = np.logaddexp(beta[ju], phi + beta[iu])
    return iu, ju, w_ij, w_ji, tw, d_ij, d_ji


def loglik_bradley_terry(point: ParameterPoint, perturbed: PerturbedCounts) -> float:
    """Perturbed Bradley-Terry log-likelihood; ties are not modeled."""
    _check_point(Model.BRADLEY_TERRY, point, perturbed.num_teams)
    beta = point.beta
    w = perturbed.a_free
    # w has a zero diagonal, so the diagonal terms vanish exactly.
    d = np.logaddexp.outer(beta, beta)
    return float((w * (beta[:, None] - d)).sum())


def loglik_rao_kupper(point: ParameterPoint, perturbed: PerturbedCounts) -> float:
    _check_point(Model.RAO_KUPPER, point, perturbed.num_teams)
    _require_ties(perturbed, Model.RAO_KUPPER)
    if point.phi <= 0.0:
        raise ThetaDomainError(f"Rao-Kupper needs theta > 1, got phi={point.phi}")
    beta, phi = point.beta, point.phi
    _, _, w_ij, w_ji, tw, d_ij, d_ji = _rk_terms(
        beta, phi, perturbed.a_free, perturbed.ties
    )
    iu, ju = np.triu_indices(len(beta), 1)
    tie_c = 2.0 * phi + np.log1p(-np.exp(-2.0 * phi))
    value = (
        w_ij * (beta[iu] - d_ij)
        + w_ji * (beta[ju] - d_ji)
        + tw * (tie_c + beta[iu] + beta[ju] - d_ij - d_ji)
    )
    return float(value.sum())


def loglik_davidson(point: ParameterPoint, perturbed: PerturbedCounts) -> float:
    _check_point(Model.DAVIDSON, point, perturbed.num_teams)
    _require_ties(perturbed, Model.DAVIDSON)
    beta, phi = point.beta, point.phi
    w, ties = perturbed.a_free, perturbed.ties
    iu, ju = np.triu_indices(len(beta), 1)
    w_ij, w_ji, tw = w[iu, ju], w[ju, iu], ties[iu, ju]
    mid = phi + (beta[iu] + beta[ju]) / 2.0
    d = _lse3(beta[iu], beta[ju], mid)
    n = w_ij + w_ji + tw
    value = w_ij * beta[iu] + w_ji * beta[ju] + tw * mid - n * d
    return float(value.sum())


def loglik_home_field(point: ParameterPoint, perturbed: PerturbedCounts) -> float:
    _check_point(Model.HOME_FIELD, point, perturbed.num_teams)
    _require_venues(perturbed, Model.HOME_FIELD)
    beta, lg = point.beta, point.log_gamma
    wh = perturbed.a_home
    wv = perturbed.a_away.T  # wv[i][j]: visitor j's wins at i's venue
    # All weight matrices have zero diagonals, so no masking is needed.
    d = np.logaddexp(lg + beta[:, None], beta[None, :])
    value = wh * (lg + beta[:, None]) + wv * beta[None, :] - (wh + wv) * d
    return float(value.sum())


def loglik_david(point: ParameterPoint, perturbed: PerturbedCounts) -> float:
    """Home advantage and ties together (host i, visitor j per ordered pair)."""
    _check_point(Model.DAVID, point, perturbed.num_teams)
    _require_venues(perturbed, Model.DAVID)
    _require_ties(perturbed, Model.DAVID)
    beta, phi, lg = point.beta, point.phi, point.log_gamma
    wh = perturbed.a_home
    wv = perturbed.a_away.T
    wt = perturbed.t_home
    mid = phi + (beta[:, None] + beta[None, :]) / 2.0
    d = _lse3(lg + beta[:, None], beta[None, :], mid)
    n = wh + wv + wt
    value = wh * (lg + beta[:, None]) + wv * beta[None, :] + wt * mid - n * d
    return float(value.sum())


def log_likelihood(
    model: Model, point: ParameterPoint, perturbed: PerturbedCounts
) -> float:
    return _LOGLIK[model](point, perturbed)


def _gradient_bradley_terry(point, perturbed) -> Array:
    beta = point.beta
    w = perturbed.a_free
    n = w + w.T
    p = expit(np.subtract.outer(beta, beta))  # p[i][j] = P(i beats j)
    g = w.sum(axis=1) - (n * p).sum(axis=1)
    return g[1:]


def _gradient_rao_kupper(point, perturbed) -> Array:
    beta, phi = point.beta, point.phi
    t = len(beta)
    iu, ju, w_ij, w_ji, tw, _, _ = _rk_terms(
        beta, phi, perturbed.a_free, perturbed.ties
    )
    s_ij = expit(beta[iu] - phi - beta[ju])  # P(i beats j)
    s_ji = expit(beta[ju] - phi - beta[iu])
    gb = np.zeros(t)
    np.add.at(gb, iu, w_ij * (1 - s_ij) - w_ji * (1 - s_ji) + tw * (s_ji - s_ij))
    np.add.at(gb, ju, w_ji * (1 - s_ji) - w_ij * (1 - s_ij) + tw * (s_ij - s_ji))
    dtie = 2.0 / (1.0 - np.exp(-2.0 * phi))
    gphi = (
        -w_ij * (1 - s_ij)
        - w_ji * (1 - s_ji)
        + tw * (dtie - (1 - s_ij) - (1 - s_ji))
    ).sum()
    return np.concatenate([gb[1:], [gphi]])


def _gradient_davidson(point, perturbed) -> Array:
    beta, phi = point.beta, point.phi
    t = len(beta)
    w, ties = perturbed.a_free, perturbed.ties
    iu, ju = np.triu_indices(t, 1)
    w_ij, w_ji, tw = w[iu, ju], w[ju, iu], ties[iu, ju]
    mid = phi + (beta[iu] + beta[ju]) / 2.0
    d = _lse3(beta[iu], beta[ju], mid)
    n = w_ij + w_ji + tw
    p_i = np.exp(beta[iu] - d)
    p_j = np.exp(beta[ju] - d)
    p_t = np.exp(mid - d)
    gb = np.zeros(t)
    np.add.at(gb, iu, w_ij + tw / 2.0 - n * (p_i + p_t / 2.0))
    np.add.at(gb, ju, w_ji + tw / 2.0 - n * (p_j + p_t / 2.0))
    gphi = (tw - n * p_t).sum()
    return np.concatenate([gb[1:], [gphi]])


def _gradient_home_field(point, perturbed) -> Array:
    beta, lg = point.beta, point.log_gamma
    wh = perturbed.a_home
    wv = perturbed.a_away.T
    n = wh + wv
    q = expit(lg + np.subtract.outer(beta, beta))  # P(host i beats visitor j)
    # Diagonal terms vanish because every weight matrix has a zero diagonal.
    host_resid = wh - n * q
    visit_resid = wv - n * (1.0 - q)
    gb = host_resid.sum(axis=1) + visit_resid.sum(axis=0)
    glg = host_resid.sum()
    return np.concatenate([gb[1:], [glg]])


def _gradient_david(point, perturbed) -> Array:
    beta, phi, lg = point.beta, point.phi, point.log_gamma
    wh = perturbed.a_home
    wv = perturbed.a_away.T
    wt = perturbed.t_home
    n = wh + wv + wt
    mid = phi + (beta[:, None] + beta[None, :]) / 2.0
    d = _lse3(lg + beta[:, None], beta[None, :], mid)
    p_h = np.exp(lg + beta[:, None] - d)
    p_v = np.exp(beta[None, :] - d)
    p_t = np.exp(mid - d)
    gb = (wh + wt / 2.0 - n * (p_h + p_t / 2.0)).sum(axis=1)
    gb += (wv + wt / 2.0 - n * (p_v + p_t / 2.0)).sum(axis=0)
    gphi = (wt - n * p_t).sum()
    glg = (wh - n * p_h).sum()
    return np.concatenate([gb[1:], [gphi, glg]])


def gradient(
    model: Model, point: ParameterPoint, perturbed: PerturbedCounts
) -> Array:
    """Analytic gradient in the free layout ``[beta_2 .. beta_t, phi?, log_gamma?]``.

    Domains and data requirements are enforced exactly as for the matching
    log-likelihood.
    """
    # Reuse the loglik entry points for validation so both paths refuse
    # identically; the value itself is cheap next to the gradient.
    _LOGLIK[model](point, perturbed)
    return _GRAD[model](point, perturbed)


_LOGLIK = {
    Model.BRADLEY_TERRY: loglik_bradley_terry,
    Model.RAO_KUPPER: loglik_rao_kupper,
    Model.DAVIDSON: loglik_davidson,
    Model.HOME_FIELD: loglik_home_field,
    Model.DAVID: loglik_david,
}

_GRAD = {
    Model.BRADLEY_TERRY: _gradient_bradley_terry,
    Model.RAO_KUPPER: _gradient_rao_kupper,
    Model.DAVIDSON: _gradient_davidson,
    Model.HOME_FIELD: _gradient_home_field,
    Model.DAVID: _gradient_david,
}


def probabilities(
    model: Model,
    point: ParameterPoint,
    i: int,
    j: int,
    venue: int | None = None,
) -> tuple[float, float, float]:
    """Outcome probabilities (i wins, j wins, tie) for one pairing.

    The venue-free models ignore ``venue``. The venue models require
    ``venue`` to name the hosting team (either ``i`` or ``j``). Models
    without a tie probability return an exact 0.0 tie component.
    """
    t = len(point.beta)
    _check_point(model, point, t)
    if not (0 <= i < t and 0 <= j < t) or i == j:
        raise DimensionError(f"need two distinct team indices in [0, {t}), got {i}, {j}")
    beta = point.beta
    bi, bj = beta[i], beta[j]

    if model is Model.BRADLEY_TERRY:
        p_i = float(expit(bi - bj))
        return p_i, 1.0 - p_i, 0.0

    if model is Model.RAO_KUPPER:
        if point.phi <= 0.0:
            raise ThetaDomainError(f"Rao-Kupper needs theta > 1, got phi={point.phi}")
        phi = point.phi
        p_i = float(expit(bi - phi - bj))
        p_j = float(expit(bj - phi - bi))
        tie_c = 2.0 * phi + np.log1p(-np.exp(-2.0 * phi))
        d_ij = np.logaddexp(bi, phi + bj)
        d_ji = np.logaddexp(bj, phi + bi)
        p_tie = float(np.exp(tie_c + bi + bj - d_ij - d_ji))
        return p_i, p_j, p_tie

    if model is Model.DAVIDSON:
        mid = point.phi + (bi + bj) / 2.0
        d = _lse3(bi, bj, mid)
        return float(np.exp(bi - d)), float(np.exp(bj - d)), float(np.exp(mid - d))

    if venue not in (i, j):
        raise ConfigError(
            f"{model.value} probabilities need venue set to the hosting team "
            f"({i} or {j})"
        )
    host, guest = (i, j) if venue == i else (j, i)
    bh, bg = beta[host], beta[guest]

    if model is Model.HOME_FIELD:
        p_host = float(expit(point.log_gamma + bh - bg))
        p_i = p_host if host == i else 1.0 - p_host
        return p_i, 1.0 - p_i, 0.0

    # Model.DAVID
    mid = point.phi + (bh + bg) / 2.0
    d = _lse3(point.log_gamma + bh, bg, mid)
    p_host = float(np.exp(point.log_gamma + bh - d))
    p_guest = float(np.exp(bg - d))
    p_tie = float(np.exp(mid - d))
    if host == i:
        return p_host, p_guest, p_tie
    return p_guest, p_host, p_tie


class Objective:
    """One model's penalized log-likelihood as a function of a free vector.

    Bridges ParameterPoint to the flat layout the maximizer works in, and
    guards the Rao-Kupper tie domain by returning -inf (with no gradient)
    outside it so line searches back off instead of raising.
    """

    def __init__(self, model: Model, perturbed: PerturbedCounts):
        self.model = model
        self.perturbed = perturbed
        t = perturbed.num_teams
        if model.needs_venues:
            _require_venues(perturbed, model)
        if model.needs_ties:
            _require_ties(perturbed, model)
        self.num_teams = t
        self.dimension = (
            (t - 1) + int(model.has_tie_parameter) + int(model.has_home_parameter)
        )
        if model is Model.RAO_KUPPER:
            lower = np.full(self.dimension, -np.inf)
            lower[t - 1] = RK_PHI_MIN
            self.lower_bounds: Array | None = lower
        else:
            self.lower_bounds = None

    def unpack(self, x: Array) -> ParameterPoint:
        t = self.num_teams
        if len(x) != self.dimension:
            raise DimensionError(
                f"free vector has length {len(x)}, expected {self.dimension}"
            )
        beta = np.concatenate([[0.0], x[: t - 1]])
        phi = None
        log_gamma = None
        k = t - 1
        if self.model.has_tie_parameter:
            phi = float(x[k])
            k += 1
        if self.model.has_home_parameter:
            log_gamma = float(x[k])
        return ParameterPoint(beta=beta, phi=phi, log_gamma=log_gamma)

    def pack(self, point: ParameterPoint) -> Array:
        _check_point(self.model, point, self.num_teams)
        parts = [np.asarray(point.beta[1:], dtype=float)]
        if self.model.has_tie_parameter:
            parts.append(np.array([point.phi]))
        if self.model.has_home_parameter:
            parts.append(np.array([point.log_gamma]))
        return np.concatenate(parts)

    def initial_point(self) -> Array:
        """The deterministic start: flat merits, theta = 2 for Rao-Kupper
        (interior to its domain), theta = 1 and gamma = 1 elsewhere."""
        x = np.zeros(self.dimension)
        if self.model is Model.RAO_KUPPER:
            x[self.num_teams - 1] = np.log(2.0)
        return x

    def random_point(self, rng: np.random.Generator) -> Array:
        x = rng.uniform(-1.0, 1.0, self.dimension)
        if self.model is Model.RAO_KUPPER:
            x[self.num_teams - 1] = rng.uniform(0.05, 1.5)
        return x

    def in_domain(self, x: Array) -> bool:
        return self.lower_bounds is None or bool(np.all(x >= self.lower_bounds))

    def value(self, x: Array) -> float:
        if not self.in_domain(x):
            return -np.inf
        return _LOGLIK[self.model](self.unpack(x), self.perturbed)

    def value_and_gradient(self, x: Array) -> tuple[float, Array | None]:
        if not self.in_domain(x):
            return -np.inf, None
        point = self.unpack(x)
        value = _LOGLIK[self.model](point, self.perturbed)
        return value, _GRAD[self.model](point, self.perturbed)
