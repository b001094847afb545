"""Univariate monetary risk functionals on weighted empirical samples.

Sign convention: a risk value is the capital that must be added to make the
position acceptable, so risk(constant c) == -c.  Expected shortfall at level
``a`` is the negated average of the lower quantile function over (0, a]; the
fractional atom straddling ``a`` contributes proportionally.  Value at risk
is the negated lower a-quantile (left-continuous inverse of the cdf).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from .errors import ValidationError

# A weight-sum drift up to this value is accepted verbatim.
WEIGHT_SUM_NOISE = 1e-12
# Beyond the noise band but within this slack the weights are renormalized;
# a larger deviation is treated as an ingestion bug.
WEIGHT_SUM_SLACK = 1e-9

ES = "expected-shortfall"
VAR = "value-at-risk"
NEG_EXPECTATION = "neg-expectation"
NEG_ESSINF = "neg-essinf"

RISK_KINDS = (ES, VAR, NEG_EXPECTATION, NEG_ESSINF)
_LEVEL_KINDS = (ES, VAR)


def _as_float_vector(x, name):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class WeightedSample:
    """Finite scenario sample with probability weights summing to one."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = _as_float_vector(self.values, "values")
        weights = _as_float_vector(self.weights, "weights")
        if values.shape != weights.shape:
            raise ValidationError("values and weights must have equal length")
        if np.any(weights < 0):
            raise ValidationError("weights must be non-negative")
        total = float(np.sum(weights))
        drift = abs(total - 1.0)
        if drift > WEIGHT_SUM_SLACK:
            raise ValidationError(f"weights sum to {total!r}, expected 1")
        if drift > WEIGHT_SUM_NOISE:
            weights = weights / total
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        self.values.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def uniform(cls, values):
        values = _as_float_vector(values, "values")
        n = values.size
        return cls(values, np.full(n, 1.0 / n))

    @property
    def size(self):
        return self.values.size


@dataclass(frozen=True)
class RiskSpec:
    """Choice of risk functional; ``level`` is required for tail kinds."""

    kind: str
    level: float | None = None

    def __post_init__(self):
        if self.kind not in RISK_KINDS:
            raise ValidationError(f"unknown risk kind {self.kind!r}")
        if self.kind in _LEVEL_KINDS:
            if self.level is None or not (0.0 < float(self.level) < 1.0):
                raise ValidationError(f"{self.kind} needs a level in (0, 1)")
        elif self.level is not None:
            raise ValidationError(f"{self.kind} takes no level")


def _check_level(alpha):
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValidationError("level must lie strictly between 0 and 1")
    return alpha


def _sorted_pairs(sample):
    # Sorting by (value, weight) makes every downstream reduction invariant
    # under permutations of the scenario order, bit for bit.
    order = np.lexsort((sample.weights, sample.values))
    return sample.values[order], sample.weights[order]


def es_empirical(sample, alpha):
    """Expected shortfall of a weighted sample at tail level ``alpha``."""
    alpha = _check_level(alpha)
    v, w = _sorted_pairs(sample)
    cw = np.cumsum(w)
    taken = np.clip(alpha - (cw - w), 0.0, w)
    return float(-(v * taken).sum() / alpha)


def var_empirical(sample, alpha):
    """Value at risk: negated lower ``alpha``-quantile of the sample."""
    alpha = _check_level(alpha)
    v, w = _sorted_pairs(sample)
    cw = np.cumsum(w)
    idx = int(np.searchsorted(cw, alpha - 1e-12, side="left"))
    idx = min(idx, v.size - 1)
    return float(-v[idx])


def neg_expectation(sample):
    v, w = _sorted_pairs(sample)
    return float(-(v * w).sum())


def neg_essinf(sample):
    live = sample.values[sample.weights > 0]
    if live.size == 0:
        raise ValidationError("sample has no positive-weight scenario")
    return float(-np.min(live))


def risk_eval(spec, sample):
    """Evaluate the functional described by ``spec`` on ``sample``."""
    if spec.kind == ES:
        return es_empirical(sample, spec.level)
    if spec.kind == VAR:
        return var_empirical(sample, spec.level)
    if spec.kind == NEG_EXPECTATION:
        return neg_expectation(sample)
    return neg_essinf(sample)


def es_normal(mu, sigma, alpha):
    """Closed-form expected shortfall of N(mu, sigma^2)."""
    alpha = _check_level(alpha)
    sigma = float(sigma)
    if sigma < 0:
        raise ValidationError("sigma must be non-negative")
    z = norm.ppf(alpha)
    return float(-mu + sigma * norm.pdf(z) / alpha)


class LognormalTailStats(NamedTuple):
    """Tail statistics of a mean-one lognormal rate and its reciprocal."""

    es_rate: float
    es_inv_rate: float
    var_low: float
    var_high: float


def es_var_lognormal_mean_one(sigma, alpha):
    """Closed-form ES/VaR figures for rate = exp(-sigma^2/2 + sigma Z).

    Returns expected shortfall of the rate and of its reciprocal at level
    ``alpha``, plus the negated alpha- and (1-alpha)-quantiles of the rate.
    """
    alpha = _check_level(alpha)
    sigma = float(sigma)
    if sigma < 0:
        raise ValidationError("sigma must be non-negative")
    z_lo = norm.ppf(alpha)
    z_hi = norm.ppf(1.0 - alpha)
    es_rate = -norm.cdf(z_lo - sigma) / alpha
    es_inv_rate = -np.exp(sigma**2) * (1.0 - norm.cdf(z_hi + sigma)) / alpha
    var_low = -np.exp(-0.5 * sigma**2 + sigma * z_lo)
    var_high = -np.exp(-0.5 * sigma**2 + sigma * z_hi)
    return LognormalTailStats(
        float(es_rate), float(es_inv_rate), float(var_low), float(var_high)
    )
