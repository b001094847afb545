"""Command-line front end: scenario generation, risk bundles, scalarization
and pinned example reproduction.

Exit codes: 0 success, 1 reproduction mismatch, 2 configuration or IO
error, 3 modelling pathology (outer bound degenerates to the whole plane).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from ._repro import REPRO_IDS, run_repro
from .bounds import RiskBundle, compute_bundle, scalarize_bundle
from .errors import ValidationError, WholePlaneError
from .geom2d import _clip_to_window, canonical_json
from .markets import (
    BALL,
    CONE_DET,
    CONE_HALFPLANE_RANDOM,
    LIQUIDITY_CAPPED,
    PORTFOLIO_KINDS,
    SEGMENT_HULL,
    ExchangeCone2D,
    SetPortfolio,
)
from .riskstats import RiskSpec
from .scenarios import GenSpec, generate, read_csv, write_csv


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _risk_spec(config):
    block = config.get("risk")
    if not isinstance(block, dict) or "kind" not in block:
        raise ValidationError('config needs a "risk" block with a "kind"')
    return RiskSpec(block["kind"], block.get("level"))


def _ensemble(config, seed=None, n=None):
    block = config.get("scenarios")
    if not isinstance(block, dict) or ("generate" in block) == ("csv" in block):
        raise ValidationError(
            'config needs a "scenarios" block with exactly one of "generate" or "csv"'
        )
    if "csv" in block:
        if seed is not None or n is not None:
            raise ValidationError("--seed/--n only apply to generated scenarios")
        return read_csv(block["csv"])
    gen_cfg = dict(block["generate"])
    if seed is not None:
        gen_cfg["seed"] = seed
    if n is not None:
        gen_cfg["n"] = n
    return generate(GenSpec.from_dict(gen_cfg))


def _portfolio(config, ensemble):
    block = dict(config.get("portfolio") or {})
    kind = block.pop("kind", None)
    if kind not in PORTFOLIO_KINDS:
        raise ValidationError(f'portfolio "kind" must be one of {PORTFOLIO_KINDS}')
    try:
        if kind == CONE_DET:
            if "frictionless_rate" in block:
                cone = ExchangeCone2D.frictionless(block.pop("frictionless_rate"))
            elif block.pop("no_exchange", False):
                cone = ExchangeCone2D.no_exchange()
            else:
                cone = ExchangeCone2D(block.pop("pi12"), block.pop("pi21"))
            portfolio = SetPortfolio.cone_det(ensemble, cone)
        elif kind == CONE_HALFPLANE_RANDOM:
            portfolio = SetPortfolio.random_halfplane(ensemble)
        elif kind == LIQUIDITY_CAPPED:
            portfolio = SetPortfolio.liquidity_capped(
                ensemble, cap=block.pop("cap", (1.0, 1.0))
            )
        elif kind == BALL:
            portfolio = SetPortfolio.ball(ensemble, radius=block.pop("radius"))
        else:
            extra = block.pop("extra", None)
            if extra == "mirror":
                extra_gains = [ensemble.gains[:, ::-1]]
            else:
                extra_gains = [np.asarray(g, float) for g in block.pop("extra_gains")]
            portfolio = SetPortfolio.segment_hull(ensemble, extra_gains)
    except KeyError as exc:
        raise ValidationError(f"portfolio block is missing {exc}") from None
    if block:
        raise ValidationError(f"unknown portfolio keys: {sorted(block)}")
    return portfolio


def _parse_window(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise ValidationError("--window expects x0,y0,x1,y1")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ValidationError("--window expects four numbers") from None


def _write_boundary_csv(region, path, window=None):
    if window is not None:
        pts = _clip_to_window(region, window)
    else:
        pts = region.vertices
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for p in pts:
            fh.write(f"{p[0]:.12g},{p[1]:.12g}\n")


def _emit_bundle(bundle, out_dir, window=None):
    os.makedirs(out_dir, exist_ok=True)
    bundle_path = os.path.join(out_dir, "bundle.json")
    with open(bundle_path, "w") as fh:
        fh.write(bundle.to_json())
        fh.write("\n")
    for name, region in (
        ("marginal", bundle.marginal),
        ("inner", bundle.inner),
        ("outer", bundle.outer),
    ):
        _write_boundary_csv(
            region, os.path.join(out_dir, f"boundary_{name}.csv"), window
        )
    return bundle_path


def cmd_gen(args):
    config = _load_json(args.config)
    block = config.get("scenarios", {})
    if "generate" not in block:
        raise ValidationError('gen needs a "scenarios" block with "generate"')
    ensemble = _ensemble(config, seed=args.seed, n=args.n)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "scenarios.csv")
    write_csv(ensemble, path)
    mean = ensemble.gains.mean(axis=0)
    print(f"wrote {path}: n={ensemble.n}, mean=({mean[0]:.4g}, {mean[1]:.4g})"
          + (f", rate-mean={ensemble.rates.mean():.4g}" if ensemble.rates is not None else ""))
    return 0


def cmd_risk(args):
    config = _load_json(args.config)
    ensemble = _ensemble(config, seed=args.seed, n=args.n)
    portfolio = _portfolio(config, ensemble)
    spec = _risk_spec(config)
    window = _parse_window(args.window) if args.window else config.get("window")
    if window is not None:
        window = tuple(float(v) for v in window)
    bundle = compute_bundle(
        portfolio,
        spec,
        strategies=config.get("strategies"),
        n_dirs=config.get("directions", 181),
        audit=bool(config.get("audit", False)),
    )
    out_dir = args.out or "."
    path = _emit_bundle(bundle, out_dir, window)
    print(f"wrote {path}")
    print(f"inner vertices: {len(bundle.inner.vertices)}, "
          f"outer vertices: {len(bundle.outer.vertices)}")
    return 0


def cmd_scalarize(args):
    bundle = RiskBundle.from_dict(_load_json(args.bundle))
    parts = args.direction.split(",")
    if len(parts) != 2:
        raise ValidationError("--direction expects u1,u2")
    try:
        u = [float(parts[0]), float(parts[1])]
    except ValueError:
        raise ValidationError("--direction expects two numbers") from None
    result = scalarize_bundle(bundle, u)
    printable = {
        k: (None if isinstance(v, float) and not math.isfinite(v) else v)
        for k, v in result.items()
    }
    print(canonical_json(printable))
    return 0


def cmd_repro(args):
    rows, artifacts = run_repro(args.example)
    if args.out:
        out_dir = os.path.join(args.out, args.example)
        os.makedirs(out_dir, exist_ok=True)
        window = _parse_window(args.window) if args.window else None
        for bundle in artifacts.values():
            _emit_bundle(bundle, out_dir, window)
        report = [
            {k: row[k] for k in ("name", "computed", "expected", "tol", "ok")}
            for row in rows
        ]
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            fh.write(canonical_json(report))
            fh.write("\n")
    width = max(len(r["name"]) for r in rows)
    ok = True
    for r in rows:
        status = "pass" if r["ok"] else "FAIL"
        print(
            f"{r['name']:<{width}}  computed={r['computed']: .7g}  "
            f"expected={r['expected']: .7g}  tol={r['tol']:.1g}  {status}"
        )
        ok &= r["ok"]
    print(f"{args.example}: {'all checks passed' if ok else 'MISMATCH'}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="svrisk",
        description=(
            "Set-valued portfolio risk: inner approximations from selection "
            "strategies, outer approximations from dual half-space bounds."
        ),
        epilog="Set SVRISK_THREADS to evaluate selection risks in parallel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a scenario CSV from a config")
    p_gen.add_argument("--config", required=True, help="JSON run configuration")
    p_gen.add_argument("--out", help="output directory (default: cwd)")
    p_gen.add_argument("--seed", type=int, help="override the generator seed")
    p_gen.add_argument("--n", type=int, help="override the sample size")
    p_gen.set_defaults(func=cmd_gen)

    p_risk = sub.add_parser("risk", help="compute a marginal/inner/outer bundle")
    p_risk.add_argument("--config", required=True, help="JSON run configuration")
    p_risk.add_argument("--out", help="output directory (default: cwd)")
    p_risk.add_argument("--seed", type=int, help="override the generator seed")
    p_risk.add_argument("--n", type=int, help="override the sample size")
    p_risk.add_argument("--window", help="x0,y0,x1,y1 box for boundary CSVs")
    p_risk.set_defaults(func=cmd_risk)

    p_scal = sub.add_parser("scalarize", help="support values of a saved bundle")
    p_scal.add_argument("--bundle", required=True, help="bundle.json path")
    p_scal.add_argument("--direction", required=True, help="u1,u2 (non-negative)")
    p_scal.set_defaults(func=cmd_scalarize)

    p_repro = sub.add_parser("repro", help="re-run a pinned example and diff values")
    p_repro.add_argument("example", choices=REPRO_IDS)
    p_repro.add_argument("--out", help="write bundle/report artifacts here")
    p_repro.add_argument("--window", help="x0,y0,x1,y1 box for boundary CSVs")
    p_repro.set_defaults(func=cmd_repro)
    return parser


def entrypoint(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WholePlaneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(entrypoint())


if __name__ == "__main__":
    main()
