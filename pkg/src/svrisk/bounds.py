"""Inner and outer approximations of set-valued portfolio risk.

The inner region is the convex hull of selection risk points plus a
recession cone that provably stays inside the true region; the outer
region intersects dual half-space bounds derived from scalar risk applied
to support values.  Between them sits the coordinatewise marginal bound.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, WholePlaneError
from .geom2d import (
    ConvexCone2D,
    HalfSpaceSet,
    RiskRegion2D,
    _unit,
    canonical_json,
    region_from_halfspaces,
    region_from_points_plus_cone,
)
from .markets import (
    CONE_DET,
    CONE_HALFPLANE_RANDOM,
    solvency_cone,
)
from .riskstats import (
    ES,
    RiskSpec,
    WeightedSample,
    es_empirical,
    es_var_lognormal_mean_one,
    neg_expectation,
    risk_eval,
    var_empirical,
)
from .selections import SelectionMatrix, audit_selection, build_family, default_strategy_configs

_THREAD_ENV = "SVRISK_THREADS"


def _map_ordered(fn, items):
    # order-preserving map so thread count never changes results
    raw = os.environ.get(_THREAD_ENV, "").strip()
    workers = int(raw) if raw else 1
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def risk_point(gains, weights, risk_spec):
    """Coordinatewise scalar risk of a payoff matrix."""
    gains = np.asarray(gains, dtype=float)
    return np.array(
        [risk_eval(risk_spec, WeightedSample(gains[:, j], weights)) for j in (0, 1)]
    )


def risk_of_selection(selection, weights, risk_spec):
    return risk_point(selection.gains, weights, risk_spec)


def regulator_region(point):
    """All deterministic deposits dominating a single risk point."""
    return region_from_points_plus_cone(
        np.asarray(point, dtype=float)[None, :], ConvexCone2D.nonneg_orthant()
    )


def direction_grid(n_dirs):
    """Unit directions spanning the closed first quadrant."""
    if int(n_dirs) < 2:
        raise ValidationError("need at least two directions")
    angles = np.linspace(0.0, np.pi / 2.0, int(n_dirs))
    return np.column_stack([np.cos(angles), np.sin(angles)])


def cone_risk_bounds(rate_sample, alpha):
    """Inner and outer cones for the risk of a zero position under a random
    frictionless exchange line.

    The inner cone is generated by the risk points of the two boundary
    trades (tail-expectation slopes); the outer cone replaces them with the
    corresponding quantile slopes.  Requires alpha <= 1/2.
    """
    if not 0.0 < alpha <= 0.5:
        raise ValidationError("cone bounds need a level in (0, 1/2]")
    es_rate = es_empirical(rate_sample, alpha)
    inv = WeightedSample(1.0 / rate_sample.values, rate_sample.weights)
    es_inv = es_empirical(inv, alpha)
    var_low = var_empirical(rate_sample, alpha)
    var_high = var_empirical(rate_sample, 1.0 - alpha)
    inner = ConvexCone2D(_unit((1.0, es_rate)), _unit((es_inv, 1.0)))
    outer = ConvexCone2D(_unit((1.0, var_low)), _unit((-1.0, -var_high)))
    return inner, outer


def cone_risk_bounds_lognormal(sigma, alpha, mean=1.0):
    """Closed-form version of ``cone_risk_bounds`` for lognormal rates."""
    stats = es_var_lognormal_mean_one(sigma, alpha)
    mean = float(mean)
    if not (math.isfinite(mean) and mean > 0):
        raise ValidationError("mean must be positive")
    inner = ConvexCone2D(
        _unit((1.0, mean * stats.es_rate)), _unit((stats.es_inv_rate / mean, 1.0))
    )
    outer = ConvexCone2D(
        _unit((1.0, mean * stats.var_low)), _unit((-1.0, -mean * stats.var_high))
    )
    return inner, outer


def _check_spec_for_kind(portfolio, risk_spec):
    if portfolio.kind == CONE_HALFPLANE_RANDOM:
        if risk_spec.kind != ES or risk_spec.level is None or risk_spec.level > 0.5:
            raise ValidationError(
                "random exchange-line portfolios need expected-shortfall "
                "risk at a level in (0, 1/2]"
            )


def inner_recession(portfolio, risk_spec):
    """Recession cone that the scenario structure lets us add for free."""
    if portfolio.kind == CONE_DET:
        return solvency_cone(portfolio.cone)
    if portfolio.kind == CONE_HALFPLANE_RANDOM:
        E = portfolio.ensemble
        rates = WeightedSample(E.require_rates(), E.weights)
        return cone_risk_bounds(rates, risk_spec.level)[0]
    return ConvexCone2D.nonneg_orthant()


def gather_selections(portfolio, risk_spec, strategies=None):
    """Expand strategy configs into selections; identity is always present."""
    configs = (
        default_strategy_configs(portfolio) if strategies is None else list(strategies)
    )
    selections = [SelectionMatrix(portfolio.ensemble.gains, "identity")]
    for cfg in configs:
        for sel in build_family(portfolio, cfg, risk_spec):
            if sel.label != "identity":
                selections.append(sel)
    return selections


def inner_region(portfolio, risk_spec, strategies=None, audit=False, audit_tol=1e-7):
    """Convex hull of selection risk points plus the provable recession."""
    _check_spec_for_kind(portfolio, risk_spec)
    selections = gather_selections(portfolio, risk_spec, strategies)
    if audit:
        for sel in selections:
            gap = audit_selection(portfolio, sel)
            if gap > audit_tol:
                raise ValidationError(
                    f"selection {sel.label!r} leaves the portfolio "
                    f"(support violation {gap:.3e})"
                )
    weights = portfolio.ensemble.weights
    points = _map_ordered(
        lambda sel: risk_of_selection(sel, weights, risk_spec), selections
    )
    return region_from_points_plus_cone(
        np.vstack(points), inner_recession(portfolio, risk_spec)
    )


def _support_halfspace(portfolio, risk_spec, u):
    h = portfolio.support_values(u)
    live = portfolio.ensemble.weights > 0
    if not np.all(np.isfinite(h[live])):
        return None
    return risk_eval(risk_spec, WeightedSample(h, portfolio.ensemble.weights))


def outer_region_det_cone(portfolio, risk_spec):
    """Exact pair of dual cuts along the exchange-cone dual generators."""
    cone = portfolio.cone
    dirs = np.array([cone.a1, cone.a2], dtype=float)
    offsets = []
    for u in dirs:
        c = _support_halfspace(portfolio, risk_spec, u)
        if c is None:
            raise WholePlaneError("support values are unbounded on the dual cone")
        offsets.append(c)
    return region_from_halfspaces(HalfSpaceSet(dirs, offsets))


def outer_region_support_grid(portfolio, risk_spec, n_dirs=181):
    """Dual cuts over a first-quadrant direction fan, skipping directions
    with unbounded support.  Exchange-cone portfolios also probe the exact
    dual generators, where the support stays finite."""
    candidates = list(direction_grid(n_dirs))
    if portfolio.cone is not None:
        candidates += [_unit(portfolio.cone.a1), _unit(portfolio.cone.a2)]
    dirs, offsets = [], []
    for u in candidates:
        c = _support_halfspace(portfolio, risk_spec, u)
        if c is not None:
            dirs.append(u)
            offsets.append(c)
    if not dirs:
        raise WholePlaneError("every probed direction has unbounded support")
    return region_from_halfspaces(HalfSpaceSet(np.asarray(dirs), offsets))


_CERTIFICATE_BUILDERS = (
    ("unit", lambda pi: np.ones_like(pi)),
    ("inv-rate", lambda pi: 1.0 / pi),
    ("rate", lambda pi: pi.copy()),
    ("inv-rate-sq", lambda pi: pi**-2),
)


def outer_region_random_halfplane(portfolio, risk_spec):
    """Dual cuts from admissible scenario reweightings.

    A non-negative weight zeta yields the cut <x, (E[zeta*pi], E[zeta])> >=
    -E[zeta*(pi*X1 + X2)] provided both zeta*pi and zeta, normalised to
    unit mean, stay below 1/level -- then each is a valid tail density and
    the bound follows from the scalar dual representation.  Inadmissible
    candidates are skipped; if none qualify the region is the whole plane.
    """
    _check_spec_for_kind(portfolio, risk_spec)
    E = portfolio.ensemble
    pi = E.require_rates()
    w = E.weights
    live = w > 0
    alpha = risk_spec.level
    exposure = pi * E.gains[:, 0] + E.gains[:, 1]

    dirs, offsets = [], []
    for _, build in _CERTIFICATE_BUILDERS:
        zeta = build(pi)
        mean_zpi = -neg_expectation(WeightedSample(zeta * pi, w))
        mean_z = -neg_expectation(WeightedSample(zeta, w))
        sup_zpi = float(np.max((zeta * pi)[live]))
        sup_z = float(np.max(zeta[live]))
        slack = 1.0 + 1e-9
        if sup_zpi <= mean_zpi / alpha * slack and sup_z <= mean_z / alpha * slack:
            dirs.append((mean_zpi, mean_z))
            offsets.append(neg_expectation(WeightedSample(zeta * exposure, w)))
    if not dirs:
        raise WholePlaneError(
            "no admissible dual certificate at this level; outer bound is the whole plane"
        )
    return region_from_halfspaces(HalfSpaceSet(np.asarray(dirs, dtype=float), offsets))


def outer_region(portfolio, risk_spec, n_dirs=181):
    _check_spec_for_kind(portfolio, risk_spec)
    if portfolio.kind == CONE_DET:
        return outer_region_det_cone(portfolio, risk_spec)
    if portfolio.kind == CONE_HALFPLANE_RANDOM:
        return outer_region_random_halfplane(portfolio, risk_spec)
    return outer_region_support_grid(portfolio, risk_spec, n_dirs)


def marginal_region(portfolio, risk_spec):
    """Risk point of the uncompensated position plus the free recession."""
    _check_spec_for_kind(portfolio, risk_spec)
    point = risk_point(portfolio.ensemble.gains, portfolio.ensemble.weights, risk_spec)
    return region_from_points_plus_cone(
        point[None, :], inner_recession(portfolio, risk_spec)
    )


@dataclass(frozen=True)
class RiskBundle:
    """Marginal / inner / outer sandwich for one portfolio and risk spec."""

    inner: RiskRegion2D
    outer: RiskRegion2D
    marginal: RiskRegion2D
    meta: dict

    def to_dict(self):
        return {
            "meta": self.meta,
            "marginal": self.marginal.to_dict(),
            "inner": self.inner.to_dict(),
            "outer": self.outer.to_dict(),
        }

    def to_json(self):
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        return cls(
            inner=RiskRegion2D.from_dict(data["inner"]),
            outer=RiskRegion2D.from_dict(data["outer"]),
            marginal=RiskRegion2D.from_dict(data["marginal"]),
            meta=dict(data.get("meta", {})),
        )


def compute_bundle(portfolio, risk_spec, strategies=None, n_dirs=181, audit=False):
    """Assemble the full sandwich for a portfolio."""
    _check_spec_for_kind(portfolio, risk_spec)
    selections = gather_selections(portfolio, risk_spec, strategies)
    if audit:
        for sel in selections:
            gap = audit_selection(portfolio, sel)
            if gap > 1e-7:
                raise ValidationError(
                    f"selection {sel.label!r} leaves the portfolio "
                    f"(support violation {gap:.3e})"
                )
    weights = portfolio.ensemble.weights
    points = _map_ordered(
        lambda sel: risk_of_selection(sel, weights, risk_spec), selections
    )
    inner = region_from_points_plus_cone(
        np.vstack(points), inner_recession(portfolio, risk_spec)
    )
    outer = outer_region(portfolio, risk_spec, n_dirs)
    marginal = marginal_region(portfolio, risk_spec)
    meta = {
        "portfolio": portfolio.kind,
        "risk": {"kind": risk_spec.kind, "level": risk_spec.level},
        "scenarios": portfolio.ensemble.n,
        "selections": len(selections),
        "directions": int(n_dirs),
    }
    return RiskBundle(inner=inner, outer=outer, marginal=marginal, meta=meta)


def scalarize_bundle(bundle, direction):
    u = np.asarray(direction, dtype=float)
    return {
        "direction": [float(u[0]), float(u[1])],
        "marginal": bundle.marginal.scalarize(u),
        "inner": bundle.inner.scalarize(u),
        "outer": bundle.outer.scalarize(u),
    }


def sandwich_violation(bundle):
    """Worst slack of marginal-in-inner and inner-in-outer (<= 0 is nested).

    Compares each region against every supporting half-space of the next
    one out, so the check is exact for the polyhedral representations.
    """
    worst = -math.inf
    for small, big in ((bundle.marginal, bundle.inner), (bundle.inner, bundle.outer)):
        hs = big.halfspaces()
        for u, c in zip(hs.directions, hs.offsets):
            s = small.scalarize(u)
            if not math.isfinite(s):
                return math.inf
            worst = max(worst, c - s)
    return worst
