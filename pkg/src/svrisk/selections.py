"""Selection strategies: scenario-wise compensated positions inside a portfolio.

Each strategy emits one or more selection matrices; the risk of a selection
is evaluated coordinatewise and its point enters the inner approximation
hull.  Every emitted row must stay inside the scenario's attainable set,
which ``audit_selection`` verifies through support-function inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geom2d import TOL, _unit
from .markets import (
    CONE_DET,
    CONE_HALFPLANE_RANDOM,
    LIQUIDITY_CAPPED,
    BALL,
    SEGMENT_HULL,
    dual_cone,
)
from .riskstats import WeightedSample, es_empirical, var_empirical


@dataclass(frozen=True)
class SelectionMatrix:
    """Per-scenario selected positions plus a provenance label."""

    gains: np.ndarray
    label: str

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 2 or g.shape[1] != 2 or g.shape[0] == 0:
            raise ValidationError("selection gains must be a non-empty (n, 2) array")
        if not np.all(np.isfinite(g)):
            raise ValidationError("selection gains contain non-finite entries")
        object.__setattr__(self, "gains", g)
        g.setflags(write=False)


def default_t_grid(scale, count=33, span=4.0):
    """Geometric sweep of scale factors, always including 0 and 1."""
    scale = max(float(scale), 1e-12)
    if count < 2 or span <= 0:
        raise ValidationError("grid needs count >= 2 and positive span")
    geo = np.geomspace(0.05 * scale, span * scale, int(count))
    return np.unique(np.concatenate([[0.0, 1.0], geo]))


def default_lambda_grid(count=21):
    return np.linspace(0.0, 1.0, int(count))


@dataclass(frozen=True)
class StrategyGrid:
    """Sweep parameters shared by the scaling strategies."""

    t_values: np.ndarray
    lambda_values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_values, dtype=float)
        lam = np.asarray(self.lambda_values, dtype=float)
        if t.ndim != 1 or t.size == 0 or np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValidationError("t grid must be non-negative and finite")
        if lam.ndim != 1 or np.any(lam < 0) or np.any(lam > 1):
            raise ValidationError("lambda grid must lie inside [0, 1]")
        object.__setattr__(self, "t_values", t)
        object.__setattr__(self, "lambda_values", lam)
        t.setflags(write=False)
        lam.setflags(write=False)

    @classmethod
    def for_direction(cls, eta, count=33, span=4.0, lambda_count=21):
        scale = float(np.max(np.hypot(eta[:, 0], eta[:, 1]), initial=0.0))
        return cls(default_t_grid(scale, count, span), default_lambda_grid(lambda_count))


def _essinf(values, weights):
    live = values[weights > 0]
    if live.size == 0:
        raise ValidationError("ensemble has no positive-weight scenario")
    return float(np.min(live))


def frictionless_direction(ensemble):
    """Scenario-wise step from the position toward the nearest point of the
    frictionless exchange boundary through the origin."""
    pi = ensemble.require_rates()
    x = ensemble.gains
    denom = 1.0 + pi**2
    r1 = (x[:, 0] - pi * x[:, 1]) / denom
    r2 = (pi**2 * x[:, 1] - pi * x[:, 0]) / denom
    return -np.column_stack([r1, r2])


def frictionless_projection(ensemble):
    """Projection of the origin onto the scenario exchange boundary."""
    xi = ensemble.gains + frictionless_direction(ensemble)
    return SelectionMatrix(xi, "frictionless-projection")


def axis_transfer_selections(ensemble):
    """Exchange everything into a single asset at the scenario rate."""
    pi = ensemble.require_rates()
    x = ensemble.gains
    to_first = np.column_stack([x[:, 0] + x[:, 1] / pi, np.zeros(ensemble.n)])
    to_second = np.column_stack([np.zeros(ensemble.n), pi * x[:, 0] + x[:, 1]])
    return (
        SelectionMatrix(to_first, "transfer-to-1"),
        SelectionMatrix(to_second, "transfer-to-2"),
    )


def quantile_shift_projection(ensemble, cone, alpha, side="both"):
    """Compensation direction from quantile-centred ray projection.

    Recentre the gains by their coordinatewise lower alpha-quantiles, then
    map each recentred point Y to a direction eta in the exchange cone:
    zero when -Y lies in the dual cone, otherwise the negated Euclidean
    projection of Y onto one of the two boundary rays of the solvency cone
    (the nearer one for side="both"; ties pick ray 1).

    Returns (eta, ray) where ray is 0, 1 or 2 per scenario.
    """
    if side not in ("both", "ray1", "ray2"):
        raise ValidationError("side must be 'both', 'ray1' or 'ray2'")
    x = ensemble.gains
    w = ensemble.weights
    q = np.array(
        [-var_empirical(WeightedSample(x[:, j], w), alpha) for j in range(2)]
    )
    y = x - q

    r1 = _unit(-cone.b1)
    r2 = _unit(-cone.b2)
    t1 = np.maximum(y @ r1, 0.0)
    t2 = np.maximum(y @ r2, 0.0)
    p1 = t1[:, None] * r1
    p2 = t2[:, None] * r2
    d1 = np.sum((y - p1) ** 2, axis=1)
    d2 = np.sum((y - p2) ** 2, axis=1)

    if side == "ray1":
        pick1 = np.ones(ensemble.n, dtype=bool)
    elif side == "ray2":
        pick1 = np.zeros(ensemble.n, dtype=bool)
    else:
        pick1 = d1 <= d2
    eta = np.where(pick1[:, None], -p1, -p2)
    ray = np.where(pick1, 1, 2)

    origin_bound = dual_cone(cone).contains_many(-y)
    eta[origin_bound] = 0.0
    ray = np.where(origin_bound, 0, ray)
    return eta, ray


def scaled_family(ensemble, eta, grid, ray=None, cone=None, label="shift"):
    """Selections X + t * eta over the grid; with a ray partition the two
    ray groups are scaled independently over the full (t, s) product."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != ensemble.gains.shape:
        raise ValidationError("eta must match the gains matrix")
    t_values = np.asarray(grid.t_values if isinstance(grid, StrategyGrid) else grid)
    if np.any(t_values < 0):
        raise ValidationError("scale grid must be non-negative")
    if cone is not None:
        bad = [i for i in range(ensemble.n) if not cone.contains(eta[i])]
        if bad:
            raise ValidationError(f"eta leaves the exchange cone at row {bad[0]}")
    x = ensemble.gains
    out = []
    if ray is not None:
        m1 = (np.asarray(ray) == 1)[:, None] * eta
        m2 = (np.asarray(ray) == 2)[:, None] * eta
        two_sided = np.any(m1 != 0.0) and np.any(m2 != 0.0)
        if two_sided:
            for t in t_values:
                for s in t_values:
                    out.append(
                        SelectionMatrix(
                            x + t * m1 + s * m2, f"{label}(t={t:.6g},s={s:.6g})"
                        )
                    )
            return out
    for t in t_values:
        out.append(SelectionMatrix(x + t * eta, f"{label}(t={t:.6g})"))
    return out


def liquidity_capped_projection(ensemble, cap=(1.0, 1.0)):
    """Best selection of the cap-restricted frictionless exchange set.

    Uses the full cap on the crowded side when the unrestricted projection
    would exceed it, otherwise the unrestricted projection itself.
    """
    cap = np.asarray(cap, dtype=float)
    if cap.shape != (2,) or np.any(cap <= 0):
        raise ValidationError("cap must be a positive 2-vector")
    pi = ensemble.require_rates()
    x = ensemble.gains
    denom = 1.0 + pi**2
    r1 = (x[:, 0] - pi * x[:, 1]) / denom
    r2 = (pi**2 * x[:, 1] - pi * x[:, 0]) / denom

    case1 = r1 <= -cap[0]
    case2 = r2 <= -cap[1]
    xi = x - np.column_stack([r1, r2])
    corner1 = x + np.column_stack([np.full_like(pi, cap[0]), -cap[0] * pi])
    corner2 = x + np.column_stack([-cap[1] / pi, np.full_like(pi, cap[1])])
    xi = np.where(case1[:, None], corner1, np.where(case2[:, None], corner2, xi))
    return SelectionMatrix(xi, "liquidity-projection")


def liquidity_corners(ensemble, cap=(1.0, 1.0)):
    """The two extreme exchanges allowed by the cap, applied uniformly."""
    cap = np.asarray(cap, dtype=float)
    if cap.shape != (2,) or np.any(cap <= 0):
        raise ValidationError("cap must be a positive 2-vector")
    pi = ensemble.require_rates()
    x = ensemble.gains
    c1 = x + np.column_stack([np.full_like(pi, cap[0]), -cap[0] * pi])
    c2 = x + np.column_stack([-cap[1] / pi, np.full_like(pi, cap[1])])
    return (
        SelectionMatrix(c1, "liquidity-corner-1"),
        SelectionMatrix(c2, "liquidity-corner-2"),
    )


def _require_finite_cone(cone):
    if not (math.isfinite(cone.pi12) and math.isfinite(cone.pi21)):
        raise ValidationError("corner constructions need finite exchange rates")


def comonotone_corner_points(ensemble, cone, alpha):
    """Corner points where the inner and outer boundaries touch.

    Each corner freezes one coordinate at its essential infimum by an
    exchange along one cone generator, which makes the scalar risk along
    the paired dual direction additive.
    """
    _require_finite_cone(cone)
    x = ensemble.gains
    w = ensemble.weights
    inf1 = _essinf(x[:, 0], w)
    inf2 = _essinf(x[:, 1], w)
    es_a2 = es_empirical(WeightedSample(x @ cone.a2, w), alpha)
    es_a1 = es_empirical(WeightedSample(x @ cone.a1, w), alpha)
    corner1 = np.array([-inf1, (es_a2 + inf1) / cone.pi12])
    corner2 = np.array([(es_a1 + inf2) / cone.pi21, -inf2])
    return corner1, corner2


def comonotone_corner_selections(ensemble, cone):
    """Selections realising the boundary corner points."""
    _require_finite_cone(cone)
    x = ensemble.gains
    w = ensemble.weights
    z2 = (x[:, 0] - _essinf(x[:, 0], w)) / cone.pi12
    z1 = (x[:, 1] - _essinf(x[:, 1], w)) / cone.pi21
    s1 = x + z2[:, None] * cone.b2
    s2 = x + z1[:, None] * cone.b1
    return (
        SelectionMatrix(s1, "corner-freeze-1"),
        SelectionMatrix(s2, "corner-freeze-2"),
    )


def boost_worst_coordinate(ensemble, radius):
    """Spend the whole ball radius on the currently smaller coordinate."""
    radius = float(radius)
    if radius <= 0:
        raise ValidationError("radius must be positive")
    x = ensemble.gains
    boost = np.zeros_like(x)
    boost[x[:, 0] < x[:, 1], 0] = radius
    boost[x[:, 0] > x[:, 1], 1] = radius
    return SelectionMatrix(x + boost, "boost-worst")


def convex_mix(first, second, lambda_values):
    """Convex combinations of two selections of the same convex portfolio."""
    if first.gains.shape != second.gains.shape:
        raise ValidationError("selections must share the scenario space")
    lam = np.asarray(lambda_values, dtype=float)
    if np.any(lam < 0) or np.any(lam > 1):
        raise ValidationError("lambda grid must lie inside [0, 1]")
    return [
        SelectionMatrix(
            l * first.gains + (1.0 - l) * second.gains,
            f"mix({first.label},{second.label},lam={l:.6g})",
        )
        for l in lam
    ]


def audit_selection(portfolio, selection, n_dirs=64, tol=TOL):
    """Largest support-function violation of the selection (<= 0 is valid).

    Probes a direction grid over the first quadrant (plus the exact dual
    rays for deterministic cones and the scenario rays for random ones).
    """
    E = portfolio.ensemble
    if selection.gains.shape != E.gains.shape:
        raise ValidationError("selection does not match the ensemble")
    angles = np.linspace(0.0, np.pi / 2.0, int(n_dirs))
    dirs = [np.array([np.cos(a), np.sin(a)]) for a in angles]
    if portfolio.kind == CONE_DET:
        dirs += [_unit(portfolio.cone.a1), _unit(portfolio.cone.a2)]
    worst = -math.inf
    for u in dirs:
        h = portfolio.support_values(u)
        s = selection.gains @ u
        finite = np.isfinite(h)
        if np.any(finite):
            worst = max(worst, float(np.max(s[finite] - h[finite])))
    if portfolio.kind in (CONE_HALFPLANE_RANDOM, LIQUIDITY_CAPPED):
        pi = E.rates
        norm = np.hypot(pi, 1.0)
        gap = ((selection.gains[:, 0] - E.gains[:, 0]) * pi
               + (selection.gains[:, 1] - E.gains[:, 1])) / norm
        worst = max(worst, float(np.max(gap)))
    return worst


def _grid_from_config(cfg, eta):
    t_cfg = cfg.get("t_grid", {})
    if "values" in t_cfg:
        t_values = np.asarray(t_cfg["values"], dtype=float)
    else:
        scale = float(np.max(np.hypot(eta[:, 0], eta[:, 1]), initial=0.0))
        t_values = default_t_grid(
            t_cfg.get("scale", scale),
            t_cfg.get("count", 33),
            t_cfg.get("span", 4.0),
        )
    return t_values


def _lambda_from_config(cfg):
    lam_cfg = cfg.get("lambda_grid", {})
    if "values" in lam_cfg:
        return np.asarray(lam_cfg["values"], dtype=float)
    return default_lambda_grid(lam_cfg.get("count", 21))


def build_family(portfolio, config, risk_spec):
    """Expand one strategy configuration into selection matrices."""
    cfg = dict(config)
    name = cfg.pop("strategy", None)
    E = portfolio.ensemble

    def need(kind):
        if portfolio.kind != kind:
            raise ValidationError(
                f"strategy {name!r} applies to {kind} portfolios, not {portfolio.kind}"
            )

    if name == "identity":
        return [SelectionMatrix(E.gains, "identity")]
    if name == "explicit":
        gains = np.asarray(cfg["gains"], dtype=float)
        return [SelectionMatrix(gains, str(cfg.get("label", "explicit")))]
    if name == "quantile-shift":
        need(CONE_DET)
        side = cfg.get("side", "both")
        level = cfg.get("level", risk_spec.level if risk_spec.level else 0.5)
        eta, ray = quantile_shift_projection(E, portfolio.cone, level, side=side)
        t_values = _grid_from_config(cfg, eta)
        return scaled_family(
            E, eta, t_values, ray=ray if side == "both" else None,
            cone=portfolio.cone, label=f"quantile-shift[{side}]",
        )
    if name == "corner-selections":
        need(CONE_DET)
        return list(comonotone_corner_selections(E, portfolio.cone))
    if name == "frictionless":
        need(CONE_HALFPLANE_RANDOM)
        eta = frictionless_direction(E)
        t_values = _grid_from_config(cfg, eta)
        return scaled_family(E, eta, t_values, label="frictionless")
    if name == "axis-transfer":
        need(CONE_HALFPLANE_RANDOM)
        return list(axis_transfer_selections(E))
    if name == "liquidity-family":
        need(LIQUIDITY_CAPPED)
        lam = _lambda_from_config(cfg)
        xi = liquidity_capped_projection(E, portfolio.cap)
        c1, c2 = liquidity_corners(E, portfolio.cap)
        out = [xi, c1, c2]
        out += convex_mix(xi, c1, lam)
        out += convex_mix(xi, c2, lam)
        return out
    if name == "ball-boost":
        need(BALL)
        return [boost_worst_coordinate(E, portfolio.radius)]
    if name == "segment-vertices":
        need(SEGMENT_HULL)
        lam = _lambda_from_config(cfg)
        base = SelectionMatrix(E.gains, "segment-vertex-0")
        out = [base]
        for k, g in enumerate(portfolio.extra_gains, start=1):
            other = SelectionMatrix(g, f"segment-vertex-{k}")
            out.append(other)
            out += convex_mix(base, other, lam)
        return out
    raise ValidationError(f"unknown strategy {name!r}")


def default_strategy_configs(portfolio):
    """Strategy set used when a run configuration does not name one."""
    if portfolio.kind == CONE_DET:
        return [
            {"strategy": "identity"},
            {"strategy": "quantile-shift", "side": "both"},
            {"strategy": "quantile-shift", "side": "ray1"},
            {"strategy": "quantile-shift", "side": "ray2"},
            {"strategy": "corner-selections"},
        ]
    if portfolio.kind == CONE_HALFPLANE_RANDOM:
        return [
            {"strategy": "identity"},
            {"strategy": "frictionless"},
            {"strategy": "axis-transfer"},
        ]
    if portfolio.kind == LIQUIDITY_CAPPED:
        return [{"strategy": "identity"}, {"strategy": "liquidity-family"}]
    if portfolio.kind == BALL:
        return [{"strategy": "identity"}, {"strategy": "ball-boost"}]
    return [{"strategy": "identity"}, {"strategy": "segment-vertices"}]
