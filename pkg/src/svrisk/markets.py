"""Market primitives: exchange cones, scenario ensembles, set-valued portfolios.

A two-asset exchange cone collects the positions reachable from zero by
exchanges at bid-ask rates; it contains the non-positive quadrant (free
disposal).  A set-valued portfolio couples a scenario ensemble with the
per-scenario set of attainable terminal positions, described here through
its support function on the non-negative quadrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .geom2d import TOL, ConvexCone2D, _cross, _unit
from .riskstats import WEIGHT_SUM_NOISE, WEIGHT_SUM_SLACK

CONE_DET = "cone-det"
CONE_HALFPLANE_RANDOM = "cone-halfplane-random"
LIQUIDITY_CAPPED = "liquidity-capped"
BALL = "ball"
SEGMENT_HULL = "segment-hull"

PORTFOLIO_KINDS = (
    CONE_DET,
    CONE_HALFPLANE_RANDOM,
    LIQUIDITY_CAPPED,
    BALL,
    SEGMENT_HULL,
)


@dataclass(frozen=True)
class BidAskMatrix:
    """Matrix of exchange rates; entry (i, j) is the units of asset i paid
    per unit of asset j received."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise ValidationError("bid-ask matrix must be square, d >= 2")
        if not np.all(m > 0):
            raise ValidationError("bid-ask entries must be positive")
        if np.any(np.abs(np.diag(m) - 1.0) > 1e-12):
            raise ValidationError("bid-ask diagonal must be one")
        d = m.shape[0]
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    if m[i, j] > m[i, k] * m[k, j] + TOL:
                        raise ValidationError(
                            "direct exchange may not beat a two-step exchange"
                        )
        object.__setattr__(self, "entries", m)
        m.setflags(write=False)

    @property
    def dim(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class ExchangeCone2D:
    """Exchange cone for two assets, generated by the bid-ask rates.

    ``pi12`` is the price of asset 2 in units of asset 1 and ``pi21`` the
    price of asset 1 in units of asset 2; pi12 * pi21 >= 1.  Infinite
    entries disable exchange and leave only free disposal.
    """

    pi12: float
    pi21: float

    def __post_init__(self):
        p12 = float(self.pi12)
        p21 = float(self.pi21)
        if not (p12 > 0 and p21 > 0):
            raise ValidationError("exchange rates must be positive")
        if math.isfinite(p12) and math.isfinite(p21) and p12 * p21 < 1.0 - 1e-12:
            raise ValidationError("round-trip exchange may not create value")
        object.__setattr__(self, "pi12", p12)
        object.__setattr__(self, "pi21", p21)

    @classmethod
    def from_bidask(cls, matrix):
        if matrix.dim != 2:
            raise ValidationError("expected a 2x2 bid-ask matrix")
        return cls(matrix.entries[0, 1], matrix.entries[1, 0])

    @classmethod
    def frictionless(cls, rate):
        rate = float(rate)
        if not (rate > 0 and math.isfinite(rate)):
            raise ValidationError("rate must be positive and finite")
        return cls(1.0 / rate, rate)

    @classmethod
    def no_exchange(cls):
        return cls(math.inf, math.inf)

    @property
    def is_halfplane(self):
        return (
            math.isfinite(self.pi12)
            and math.isfinite(self.pi21)
            and abs(self.pi12 * self.pi21 - 1.0) <= 1e-12
        )

    @property
    def b1(self):
        """Generator: sell one unit of asset 1 for asset 2."""
        if math.isinf(self.pi21):
            return np.array([0.0, -1.0])
        return np.array([1.0, -self.pi21])

    @property
    def b2(self):
        """Generator: buy one unit of asset 2 for pi12 units of asset 1."""
        if math.isinf(self.pi12):
            return np.array([-1.0, 0.0])
        return np.array([-self.pi12, 1.0])

    @property
    def a1(self):
        """Dual generator paired with b1: <a1, b1> = 0."""
        if math.isinf(self.pi21):
            return np.array([1.0, 0.0])
        return np.array([self.pi21, 1.0])

    @property
    def a2(self):
        """Dual generator paired with b2: <a2, b2> = 0."""
        if math.isinf(self.pi12):
            return np.array([0.0, 1.0])
        return np.array([1.0, self.pi12])

    def contains(self, x, tol=TOL):
        """Membership via sign tests against the dual generators."""
        x = np.asarray(x, dtype=float)
        eps = tol * max(1.0, float(np.max(np.abs(x))))
        return (
            float(_unit(self.a1) @ x) <= eps and float(_unit(self.a2) @ x) <= eps
        )


def dual_cone(cone):
    """Directions u with <u, x> <= 0 for every x in the exchange cone."""
    return ConvexCone2D.from_rays(_unit(cone.a1), _unit(cone.a2))


def solvency_cone(cone):
    """Central reflection of the exchange cone: positions exchangeable to >= 0."""
    lo = _unit(-cone.b2)
    hi = _unit(-cone.b1)
    if abs(_cross(lo, hi)) <= 1e-9 and float(lo @ hi) < 0:
        return ConvexCone2D.halfplane(lo)
    return ConvexCone2D.from_rays(lo, hi)


def cone_contains(cone, x, tol=TOL):
    if isinstance(cone, ExchangeCone2D):
        return cone.contains(x, tol)
    return cone.contains(x, tol)


@dataclass(frozen=True)
class ScenarioEnsemble:
    """Finite scenario model: gains matrix, optional exchange rate, weights."""

    gains: np.ndarray
    rates: np.ndarray | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.gains, dtype=float)
        if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] < 2:
            raise ValidationError("gains must be a non-empty (n, d) array, d >= 2")
        if not np.all(np.isfinite(x)):
            raise ValidationError("gains contain non-finite entries")
        n = x.shape[0]
        pi = self.rates
        if pi is not None:
            pi = np.asarray(pi, dtype=float)
            if pi.shape != (n,):
                raise ValidationError("rates must have one entry per scenario")
            if not np.all(np.isfinite(pi)) or np.any(pi <= 0):
                raise ValidationError("rates must be positive and finite")
            pi.setflags(write=False)
        w = self.weights
        if w is None:
            w = np.full(n, 1.0 / n)
        else:
            w = np.asarray(w, dtype=float)
            if w.shape != (n,):
                raise ValidationError("weights must have one entry per scenario")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValidationError("weights must be non-negative and finite")
            total = float(np.sum(w))
            drift = abs(total - 1.0)
            if drift > WEIGHT_SUM_SLACK:
                raise ValidationError(f"weights sum to {total!r}, expected 1")
            if drift > WEIGHT_SUM_NOISE:
                w = w / total
        object.__setattr__(self, "gains", x)
        object.__setattr__(self, "rates", pi)
        object.__setattr__(self, "weights", w)
        x.setflags(write=False)
        w.setflags(write=False)

    @property
    def n(self):
        return self.gains.shape[0]

    @property
    def dim(self):
        return self.gains.shape[1]

    def require_rates(self):
        if self.rates is None:
            raise ValidationError("this portfolio kind needs per-scenario rates")
        return self.rates


@dataclass(frozen=True)
class SetPortfolio:
    """Scenario ensemble plus the per-scenario attainable-set description."""

    kind: str
    ensemble: ScenarioEnsemble
    cone: ExchangeCone2D | None = None
    radius: float | None = None
    cap: np.ndarray | None = None
    extra_gains: tuple = ()

    def __post_init__(self):
        if self.kind not in PORTFOLIO_KINDS:
            raise ValidationError(f"unknown portfolio kind {self.kind!r}")
        if self.ensemble.dim != 2:
            raise ValidationError("set-valued portfolios are supported in the plane")
        if self.kind == CONE_DET and self.cone is None:
            raise ValidationError("cone-det portfolios need an exchange cone")
        if self.kind in (CONE_HALFPLANE_RANDOM, LIQUIDITY_CAPPED):
            self.ensemble.require_rates()
        if self.kind == BALL:
            if self.radius is None or not (float(self.radius) > 0):
                raise ValidationError("ball portfolios need a positive radius")
            object.__setattr__(self, "radius", float(self.radius))
        if self.kind == LIQUIDITY_CAPPED:
            cap = np.asarray(
                self.cap if self.cap is not None else (1.0, 1.0), dtype=float
            )
            if cap.shape != (2,) or np.any(cap <= 0):
                raise ValidationError("liquidity cap must be a positive 2-vector")
            object.__setattr__(self, "cap", cap)
            cap.setflags(write=False)
        if self.kind == SEGMENT_HULL:
            extras = tuple(np.asarray(g, dtype=float) for g in self.extra_gains)
            if not extras:
                raise ValidationError("segment-hull portfolios need extra vertices")
            for g in extras:
                if g.shape != self.ensemble.gains.shape:
                    raise ValidationError("extra gain matrices must match gains")
                g.setflags(write=False)
            object.__setattr__(self, "extra_gains", extras)

    @classmethod
    def cone_det(cls, ensemble, cone):
        return cls(CONE_DET, ensemble, cone=cone)

    @classmethod
    def random_halfplane(cls, ensemble):
        return cls(CONE_HALFPLANE_RANDOM, ensemble)

    @classmethod
    def liquidity_capped(cls, ensemble, cap=(1.0, 1.0)):
        return cls(LIQUIDITY_CAPPED, ensemble, cap=np.asarray(cap, dtype=float))

    @classmethod
    def ball(cls, ensemble, radius):
        return cls(BALL, ensemble, radius=radius)

    @classmethod
    def segment_hull(cls, ensemble, extra_gains):
        return cls(SEGMENT_HULL, ensemble, extra_gains=tuple(extra_gains))

    def support_values(self, u):
        """Per-scenario support function at direction u (may contain +inf)."""
        u = np.asarray(u, dtype=float)
        if u.shape != (2,):
            raise ValidationError("direction must be a 2-vector")
        if np.any(u < -TOL) or np.all(u == 0):
            raise ValidationError("direction must be non-zero with u >= 0")
        x = self.ensemble.gains
        base = x @ u
        if self.kind == CONE_DET:
            if dual_cone(self.cone).contains(_unit(u)):
                return base
            return np.full(self.ensemble.n, np.inf)
        if self.kind == CONE_HALFPLANE_RANDOM:
            pi = self.ensemble.rates
            # u must be parallel to the scenario's dual ray (pi, 1).
            misalign = np.abs(u[0] - pi * u[1])
            ok = misalign <= TOL * np.maximum(1.0, np.abs(pi)) * max(
                1.0, float(np.max(np.abs(u)))
            )
            out = np.where(ok, base, np.inf)
            return out
        if self.kind == BALL:
            return base + self.radius * float(np.hypot(u[0], u[1]))
        if self.kind == SEGMENT_HULL:
            cand = [base] + [g @ u for g in self.extra_gains]
            return np.max(np.stack(cand), axis=0)
        pi = self.ensemble.rates
        bonus = np.maximum(
            self.cap[0] * (u[0] - pi * u[1]), self.cap[1] * (u[1] - u[0] / pi)
        )
        return base + bonus


def support_function(portfolio, i, u):
    """Support function of scenario ``i`` of the portfolio at direction u."""
    vals = portfolio.support_values(u)
    if not (0 <= int(i) < portfolio.ensemble.n):
        raise ValidationError("scenario index out of range")
    return float(vals[int(i)])
