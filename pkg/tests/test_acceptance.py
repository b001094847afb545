"""Acceptance gate: one test per criterion, one printed pass/fail line each.

Run with ``pytest -v tests/test_acceptance.py`` (add ``-s`` to see the
ACCEPTANCE lines while passing; they always appear on failure).
"""

import time

import numpy as np
import pytest

from svrisk._repro import run_repro
from svrisk.bounds import (
    compute_bundle,
    cone_risk_bounds,
    inner_region,
    marginal_region,
    outer_region_det_cone,
    risk_of_selection,
    risk_point,
    sandwich_violation,
)
from svrisk.cli import entrypoint
from svrisk.errors import ValidationError
from svrisk.geom2d import _unit, hausdorff_on_window, region_from_points_plus_cone
from svrisk.markets import (
    ExchangeCone2D,
    ScenarioEnsemble,
    SetPortfolio,
    solvency_cone,
)
from svrisk.riskstats import (
    ES,
    RiskSpec,
    WeightedSample,
    es_empirical,
    es_normal,
    es_var_lognormal_mean_one,
)
from svrisk.selections import audit_selection, boost_worst_coordinate
from svrisk.bounds import gather_selections

ES05 = RiskSpec(ES, 0.05)


def _report(num, desc, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail and not ok else ""
    print(f"ACCEPTANCE {num}: {status} - {desc}{suffix}")
    assert ok, f"criterion {num} failed: {desc}{suffix}"


def test_criterion_1_exact_discrete_example():
    t0 = time.perf_counter()
    gains = np.array([[-2.0, 4.0], [4.0, -2.0]])
    cone = ExchangeCone2D(5.0, 5.0)
    spec = RiskSpec(ES, 0.75)
    e = ScenarioEnsemble(gains)
    w = e.weights

    r_x = risk_point(gains, w, spec)
    eta1 = np.array([[1.2, -6.0], [0.0, 0.0]])
    eta2 = np.array([[0.0, 0.0], [-6.0, 1.2]])
    r_1 = risk_point(gains + eta1, w, spec)
    r_2 = risk_point(gains + eta2, w, spec)
    outer = outer_region_det_cone(SetPortfolio.cone_det(e, cone), spec)
    elapsed = time.perf_counter() - t0

    checks = [
        np.allclose(r_x, [0.0, 0.0], atol=1e-9),
        np.allclose(r_1, [-0.8, 2.0], atol=1e-9),
        np.allclose(r_2, [2.0, -0.8], atol=1e-9),
        np.allclose(outer.vertices, [[-1.0 / 3.0, -1.0 / 3.0]], atol=1e-9),
        elapsed < 1.0,
    ]
    _report(
        1,
        "exact discrete example: compensated risk points and outer vertex",
        all(checks),
        f"r(X)={r_x}, r1={r_1}, r2={r_2}, vertex={outer.vertices}, {elapsed:.2f}s",
    )


def test_criterion_2_intro_reserves():
    t0 = time.perf_counter()
    rows, _ = run_repro("intro")
    elapsed = time.perf_counter() - t0
    bad = [r for r in rows if not r["ok"]]
    _report(
        2,
        "intro reserves: closed form 2.6045 and four MC compensations",
        not bad and elapsed < 60.0,
        "; ".join(
            f"{r['name']}: {r['computed']:.4f} vs {r['expected']:.4f}" for r in bad
        )
        or f"{elapsed:.1f}s",
    )


def test_criterion_3_lognormal_cone_sandwich():
    t0 = time.perf_counter()
    rows, _ = run_repro("frictionless")
    elapsed = time.perf_counter() - t0
    bad = [r for r in rows if not r["ok"]]
    _report(
        3,
        "lognormal exchange-line cone slopes, closed form and empirical",
        not bad and elapsed < 30.0,
        "; ".join(
            f"{r['name']}: {r['computed']:.5f} vs {r['expected']:.5f}" for r in bad
        )
        or f"{elapsed:.1f}s",
    )


def test_criterion_4_ball_example():
    closed = es_normal(0.0, 1.0, 0.05)
    rng = np.random.default_rng(77)
    e = ScenarioEnsemble(rng.standard_normal((1_000_000, 2)))
    sel = boost_worst_coordinate(e, radius=1.0)
    boosted = risk_of_selection(sel, e.weights, ES05)
    plain = risk_point(e.gains, e.weights, ES05)
    checks = [
        abs(closed - 2.0627) <= 1e-3,
        np.allclose(boosted, [1.22, 1.22], atol=2e-2),
        np.allclose(plain, [closed, closed], atol=2e-2),
    ]
    _report(
        4,
        "ball example: scalar shortfall pin and boosted selection risk",
        all(checks),
        f"closed={closed:.4f}, boosted={boosted}, plain={plain}",
    )


def _coherence_cases(failures):
    rng = np.random.default_rng(101)
    spec = RiskSpec(ES, 0.2)
    cases = 0
    for _ in range(15):
        n = 40
        gains = rng.standard_normal((n, 2)) * rng.uniform(0.5, 2.0)
        cone = ExchangeCone2D(rng.uniform(1.2, 3.0), rng.uniform(1.2, 3.0))
        e = ScenarioEnsemble(gains)

        def trades():
            s = rng.random(n)[:, None] * cone.b1
            t = rng.random(n)[:, None] * cone.b2
            return s + t

        pool = [trades() for _ in range(4)]

        def region_of(base):
            p = SetPortfolio.cone_det(ScenarioEnsemble(base), cone)
            cfgs = [
                {"strategy": "explicit", "gains": (base + h).tolist(), "label": f"p{i}"}
                for i, h in enumerate(pool)
            ]
            return inner_region(p, spec, strategies=cfgs)

        base_region = region_of(gains)

        c = rng.uniform(-3.0, 3.0, 2)
        shifted = region_of(gains + c)
        if not np.allclose(shifted.vertices, base_region.vertices - c, atol=1e-9):
            failures.append("cash invariance")
        cases += 1

        lam = rng.uniform(0.2, 3.0)
        scaled = region_of(lam * gains)
        if not np.allclose(scaled.vertices, lam * base_region.vertices, atol=1e-9):
            failures.append("positive homogeneity")
        cases += 1

        lift = rng.random((n, 2))
        bigger = region_of(gains + lift)
        if not all(bigger.contains(v, tol=1e-9) for v in base_region.vertices):
            failures.append("monotonicity")
        cases += 1

        other = rng.standard_normal((n, 2))
        other_region = region_of(other)
        p_sum = SetPortfolio.cone_det(ScenarioEnsemble(gains + other), cone)
        sum_cfgs = [
            {
                "strategy": "explicit",
                "gains": (gains + h1 + other + h2).tolist(),
                "label": f"s{i}-{j}",
            }
            for i, h1 in enumerate(pool)
            for j, h2 in enumerate(pool)
        ]
        sum_region = inner_region(p_sum, spec, strategies=sum_cfgs)
        ok = all(
            sum_region.contains(vx + vy, tol=1e-9)
            for vx in base_region.vertices
            for vy in other_region.vertices
        )
        if not ok:
            failures.append("subadditivity")
        cases += 1
    return cases


def _sandwich_cases(failures):
    rng = np.random.default_rng(102)
    cases = 0
    for seed in range(12):
        n = 40
        gains = rng.standard_normal((n, 2))
        rates = np.exp(0.3 * rng.standard_normal(n) - 0.045)
        e = ScenarioEnsemble(gains, rates=rates)
        portfolios = [
            SetPortfolio.cone_det(e, ExchangeCone2D(rng.uniform(1.2, 3), rng.uniform(1.2, 3))),
            SetPortfolio.random_halfplane(e),
            SetPortfolio.liquidity_capped(e, cap=(rng.uniform(0.5, 2), rng.uniform(0.5, 2))),
            SetPortfolio.ball(e, radius=rng.uniform(0.3, 1.5)),
            SetPortfolio.segment_hull(e, [gains + rng.uniform(-1, 1, 2)]),
        ]
        for p in portfolios:
            slack = sandwich_violation(compute_bundle(p, ES05))
            if not slack <= 1e-9:
                failures.append(f"sandwich {p.kind} ({slack:.2e})")
            cases += 1
    return cases


def _comonotone_cases(failures):
    rng = np.random.default_rng(103)
    cases = 0
    for _ in range(20):
        driver = np.sort(rng.standard_normal(60))
        gains = np.column_stack(
            [
                rng.uniform(0.5, 2.0) * driver + rng.uniform(-1, 1),
                np.exp(rng.uniform(0.2, 0.8) * driver),
            ]
        )
        e = ScenarioEnsemble(gains)
        cone = ExchangeCone2D(rng.uniform(1.1, 3.0), rng.uniform(1.1, 3.0))
        p = SetPortfolio.cone_det(e, cone)
        spec = RiskSpec(ES, rng.uniform(0.05, 0.45))
        outer = outer_region_det_cone(p, spec)
        marginal = marginal_region(p, spec)
        v = marginal.vertices[0]
        window = (v[0] - 4, v[1] - 4, v[0] + 4, v[1] + 4)
        d = hausdorff_on_window(outer, marginal, window)
        if not d <= 1e-9:
            failures.append(f"comonotone exactness ({d:.2e})")
        cases += 1
    return cases


def _corner_cases(failures):
    rng = np.random.default_rng(104)
    cases = 0
    for _ in range(20):
        e = ScenarioEnsemble(rng.standard_normal((50, 2)) * 1.5)
        cone = ExchangeCone2D(rng.uniform(1.2, 4.0), rng.uniform(1.2, 4.0))
        p = SetPortfolio.cone_det(e, cone)
        spec = RiskSpec(ES, rng.uniform(0.1, 0.45))
        bundle = compute_bundle(p, spec)
        for a in (cone.a1, cone.a2):
            u = _unit(a)
            gap = bundle.inner.scalarize(u) - bundle.outer.scalarize(u)
            if not abs(gap) <= 1e-9:
                failures.append(f"corner touch ({gap:.2e})")
        cases += 1
    return cases


def _law_invariance_cases(failures):
    rng = np.random.default_rng(105)
    cases = 0
    for seed in range(6):
        n = 40
        gains = rng.standard_normal((n, 2))
        rates = np.exp(0.3 * rng.standard_normal(n))
        w = rng.random(n)
        w /= w.sum()
        perm = rng.permutation(n)
        a = ScenarioEnsemble(gains, rates=rates, weights=w)
        b = ScenarioEnsemble(gains[perm], rates=rates[perm], weights=w[perm])
        pairs = [
            (SetPortfolio.cone_det(a, ExchangeCone2D(2.0, 3.0)),
             SetPortfolio.cone_det(b, ExchangeCone2D(2.0, 3.0))),
            (SetPortfolio.random_halfplane(a), SetPortfolio.random_halfplane(b)),
            (SetPortfolio.liquidity_capped(a), SetPortfolio.liquidity_capped(b)),
            (SetPortfolio.ball(a, radius=0.5), SetPortfolio.ball(b, radius=0.5)),
            (SetPortfolio.segment_hull(a, [gains * 0.5]),
             SetPortfolio.segment_hull(b, [gains[perm] * 0.5])),
        ]
        for pa, pb in pairs:
            if compute_bundle(pa, ES05).to_json() != compute_bundle(pb, ES05).to_json():
                failures.append(f"law invariance {pa.kind}")
            cases += 1
    return cases


def _es_convergence_cases(failures):
    rng = np.random.default_rng(106)
    n, batches = 1_000_000, 16
    cases = 0

    normal = 0.3 + 1.2 * rng.standard_normal(n)
    closed = es_normal(0.3, 1.2, 0.05)
    rates = np.exp(0.4 * rng.standard_normal(n) - 0.08)
    closed_rate = es_var_lognormal_mean_one(0.4, 0.05).es_rate
    for sample, target, name in (
        (normal, closed, "normal"),
        (rates, closed_rate, "lognormal"),
    ):
        full = es_empirical(WeightedSample.uniform(sample), 0.05)
        chunks = np.array_split(sample, batches)
        batch_es = [es_empirical(WeightedSample.uniform(c), 0.05) for c in chunks]
        se_full = float(np.std(batch_es, ddof=1)) / np.sqrt(batches)
        if not abs(full - target) <= 4.0 * se_full:
            failures.append(
                f"ES convergence {name} (|{full:.5f}-{target:.5f}| > 4*{se_full:.2e})"
            )
        cases += 1
    return cases


def _audit_cases(failures):
    rng = np.random.default_rng(107)
    cases = 0
    for seed in range(3):
        n = 30
        gains = rng.standard_normal((n, 2))
        rates = np.exp(0.3 * rng.standard_normal(n))
        e = ScenarioEnsemble(gains, rates=rates)
        portfolios = [
            SetPortfolio.cone_det(e, ExchangeCone2D(1.5, 2.5)),
            SetPortfolio.random_halfplane(e),
            SetPortfolio.liquidity_capped(e, cap=(0.9, 1.1)),
            SetPortfolio.ball(e, radius=0.8),
            SetPortfolio.segment_hull(e, [gains + np.array([0.3, -0.2])]),
        ]
        for p in portfolios:
            worst = max(
                audit_selection(p, sel) for sel in gather_selections(p, ES05)
            )
            if not worst <= 1e-9:
                failures.append(f"audit {p.kind} ({worst:.2e})")
            cases += 1
    return cases


def test_criterion_5_property_suites():
    t0 = time.perf_counter()
    failures = []
    cases = 0
    cases += _coherence_cases(failures)
    cases += _sandwich_cases(failures)
    cases += _comonotone_cases(failures)
    cases += _corner_cases(failures)
    cases += _law_invariance_cases(failures)
    cases += _es_convergence_cases(failures)
    cases += _audit_cases(failures)
    elapsed = time.perf_counter() - t0
    ok = not failures and cases >= 200 and elapsed < 60.0
    _report(
        5,
        f"property suites ({cases} randomized cases in {elapsed:.1f}s)",
        ok,
        "; ".join(failures[:5]) or f"cases={cases}, {elapsed:.1f}s",
    )


def test_criterion_6_determinism(tmp_path, monkeypatch):
    import json

    config = {
        "scenarios": {
            "generate": {
                "n": 400,
                "seed": 2024,
                "mean": [0.2, -0.1],
                "stdev": [1.0, 1.5],
                "correlation": 0.4,
                "rate": {"mean": 1.2, "vol": 0.3},
            }
        },
        "portfolio": {"kind": "cone-det", "pi12": 1.4, "pi21": 1.6},
        "risk": {"kind": "expected-shortfall", "level": 0.1},
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))

    blobs = set()
    for run in ("a", "b"):
        out = tmp_path / run
        code = entrypoint(["risk", "--config", str(cfg_path), "--out", str(out)])
        assert code == 0
        blobs.add((out / "bundle.json").read_bytes())

    from svrisk.scenarios import GenSpec, generate

    e = generate(GenSpec.from_dict(config["scenarios"]["generate"]))
    p = SetPortfolio.cone_det(e, ExchangeCone2D(1.4, 1.6))
    spec = RiskSpec(ES, 0.1)
    jsons = set()
    for threads in ("", "1", "2", "8"):
        if threads:
            monkeypatch.setenv("SVRISK_THREADS", threads)
        else:
            monkeypatch.delenv("SVRISK_THREADS", raising=False)
        jsons.add(compute_bundle(p, spec).to_json())

    ok = len(blobs) == 1 and len(jsons) == 1
    _report(
        6,
        "determinism: byte-identical bundles across runs and thread counts",
        ok,
        f"distinct files={len(blobs)}, distinct jsons={len(jsons)}",
    )
