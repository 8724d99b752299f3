"""Command-line surface: curves, trade-offs, sweeps, regime diagnostics,
coupling experiments, and hybrid checks as machine-readable tables.

All commands are batch: read flags (optionally seeded from a flat
``key = value`` config file), compute, write CSV or JSON, exit.  Output is
byte-identical for identical command lines including the seed; numeric
cells carry 17 significant digits.  Exit codes: 0 success, 2 invalid
parameters, 3 failed ``--assert`` comparison.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bounds import poisson_sharp_lower, skellam_bounds, multivariate_bounds, poisson_bounds
from .channels import channel_from_intensities, parse_channel_spec
from .coupling import (
    couple_binom_poisson,
    couple_multinomial_poisson,
    couple_poisson_poisson,
)
from .curves import delta_np, tradeoff_generic
from .distcore import tv_distance
from .hybrid import hybrid_cf, hybrid_delta_gap, hybrid_setup
from .limits import (
    IntensitySpec,
    LimitParams,
    compound_poisson_limit,
    poisson_shift_pair,
    poisson_shift_tradeoff,
    skellam_shift_pair,
)
from .multivariate import exact_histogram_pair
from .regimes import (
    Scaling,
    canonical_scaling,
    classify_regime,
    explicit_scaling,
    power_scaling,
)
from .rr import canonical_pair, composition_pair, rr_config

SEED_ENV = "CRITSHUFFLE_SEED"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    if v is None:
        return ""
    return str(v)


def _emit(rows: List[Dict], columns: Sequence[str], args) -> None:
    if args.output == "json":
        payload = [{c: r.get(c) for c in columns} for r in rows]
        text = json.dumps(payload, indent=2, default=_fmt) + "\n"
    else:
        lines = [",".join(columns)]
        for r in rows:
            lines.append(",".join(_fmt(r.get(c)) for c in columns))
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _parse_ints(text: str) -> List[int]:
    return [int(round(float(v))) for v in text.split(",") if v.strip() != ""]


def _parse_scaling(text: str) -> Scaling:
    kind, _, rest = text.partition(":")
    if kind == "power":
        return power_scaling(float(rest))
    if kind == "canonical":
        return canonical_scaling(float(rest))
    if kind == "explicit":
        return explicit_scaling(_parse_floats(rest))
    raise ValueError(f"unknown scaling {text!r} (use power:A | canonical:C | explicit:V1,V2,...)")


def _load_channel(path: Optional[str], pi: Optional[float]):
    if not path:
        raise ValueError("this experiment needs --channel-spec FILE")
    with open(path) as fh:
        spec = parse_channel_spec(fh.read())
    if pi is not None:
        from dataclasses import replace
        spec = replace(spec, pi=pi)
    return spec


def _experiment_pair(args):
    """Resolve the experiment selector of curve/tradeoff commands."""
    exp = args.experiment
    if exp == "rr-canonical":
        cfg = rr_config(args.n, eps0=args.eps0, c=args.c, k=0)
        return canonical_pair(cfg)
    if exp == "rr-composition":
        cfg = rr_config(args.n, eps0=args.eps0, c=args.c, k=args.k)
        return composition_pair(cfg)
    if exp == "poisson-limit":
        if args.lam is None and args.c is None:
            raise ValueError("poisson-limit needs --lambda or --c")
        lam = args.lam if args.lam is not None else 1.0 / (args.c * args.c)
        return poisson_shift_pair(lam)
    if exp == "skellam-limit":
        if args.c is None:
            raise ValueError("skellam-limit needs --c")
        pi = args.pi if args.pi is not None else 0.5
        return skellam_shift_pair(LimitParams(c=args.c, pi=pi))
    if exp == "multivariate-limit":
        spec = _load_channel(args.channel_spec, args.pi)
        if not isinstance(spec, IntensitySpec):
            raise ValueError("multivariate-limit needs a single-dominant channel spec")
        return compound_poisson_limit(spec)
    if exp == "multivariate-finite":
        spec = _load_channel(args.channel_spec, args.pi)
        if not isinstance(spec, IntensitySpec):
            raise ValueError("multivariate-finite needs a single-dominant channel spec")
        channel = channel_from_intensities(spec, args.n)
        return exact_histogram_pair(channel, args.n, args.k, args.rare_cap)
    raise ValueError(f"unknown experiment {exp!r}")


def cmd_curve(args) -> int:
    P, Q = _experiment_pair(args)
    rows = []
    for eps in _parse_floats(args.eps):
        fwd = delta_np(P, Q, eps, "forward")
        rev = delta_np(P, Q, eps, "reverse")
        two = delta_np(P, Q, eps, "two_sided")
        rows.append({
            "eps": eps,
            "delta_forward": fwd.value,
            "delta_reverse": rev.value,
            "delta_two": two.value,
            "slack": two.slack,
        })
    _emit(rows, ["eps", "delta_forward", "delta_reverse", "delta_two", "slack"], args)
    return 0


def cmd_tradeoff(args) -> int:
    if args.experiment == "poisson-limit" and not args.generic:
        # the upper-tail knot formula is exact; the generic construction is
        # available for cross-checks
        if args.lam is None and args.c is None:
            raise ValueError("poisson-limit needs --lambda or --c")
        lam = args.lam if args.lam is not None else 1.0 / (args.c * args.c)
        curve = poisson_shift_tradeoff(lam)
    else:
        P, Q = _experiment_pair(args)
        curve = tradeoff_generic(P, Q)
    rows = [{"index": i, "alpha": a, "beta": b}
            for i, (a, b) in enumerate(curve.knots)]
    _emit(rows, ["index", "alpha", "beta"], args)
    return 0


def _sweep_row(regime: str, c: float, pi: float, n: int, eps: float,
               channel_text: Optional[str], rare_cap: int) -> Dict:
    """One sweep row; module-level so --jobs can fork it."""
    if regime == "poisson":
        cfg = rr_config(n, c=c, k=0)
        Pn, Qn = canonical_pair(cfg)
        Pl, Ql = poisson_shift_pair(1.0 / (c * c))
        rec = poisson_sharp_lower(c, n)
        paper_upper = 2.0 / (c ** 4 * n)
        paper_lower = rec.lower_bound
        composite = poisson_bounds(cfg, 1.0 / (c * c)).canonical_composite
    elif regime == "skellam":
        k = int(math.floor(pi * n))
        cfg = rr_config(n, c=c, k=k)
        Pn, Qn = composition_pair(cfg)
        params = LimitParams(c=c, pi=pi)
        Pl, Ql = skellam_shift_pair(params)
        sb = skellam_bounds(cfg, params, include_cf=True, pair=(Pn, Qn))
        paper_upper = sb.canonical_composite
        paper_lower = sb.cf_lower_proxy
        composite = sb.canonical_composite
    elif regime == "multivariate":
        spec = parse_channel_spec(channel_text)
        from dataclasses import replace
        spec = replace(spec, pi=pi)
        if not isinstance(spec, IntensitySpec):
            raise ValueError("multivariate sweep needs a single-dominant channel spec")
        k = int(math.floor(pi * n))
        channel = channel_from_intensities(spec, n)
        Pn, Qn = exact_histogram_pair(channel, n, k, rare_cap)
        Pl, Ql = compound_poisson_limit(spec)
        mb = multivariate_bounds(channel, n, k, spec)
        paper_upper = mb.tv_p_bound
        paper_lower = None
        composite = mb.tv_p_bound + mb.tv_q_bound
    else:
        raise ValueError(f"unknown sweep regime {regime!r}")
    tv = tv_distance(Pn, Pl)
    gap = abs(delta_np(Pn, Qn, eps).value - delta_np(Pl, Ql, eps).value)
    return {
        "n": n,
        "tv_lower": tv.lower,
        "tv_upper": tv.upper,
        "paper_upper": paper_upper,
        "paper_lower": paper_lower,
        "delta_gap": gap,
        "stability_bound": (1.0 + math.exp(eps)) * composite,
        "valid": n >= 100,
    }


def cmd_sweep(args) -> int:
    n_grid = _parse_ints(args.n_grid)
    if not n_grid:
        raise ValueError("empty n grid")
    channel_text = None
    if args.regime == "multivariate":
        if not args.channel_spec:
            raise ValueError("multivariate sweep needs --channel-spec")
        with open(args.channel_spec) as fh:
            channel_text = fh.read()
    work = [(args.regime, args.c, args.pi, n, args.eps, channel_text, args.rare_cap)
            for n in sorted(n_grid)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row_star, work))
    else:
        rows = [_sweep_row(*w) for w in work]
    fit = [(math.log(r["n"]), math.log(r["tv_lower"]))
           for r in rows if r["valid"] and r["tv_lower"] > 0]
    slope = float(np.polyfit([p[0] for p in fit], [p[1] for p in fit], 1)[0]) \
        if len(fit) >= 2 else None
    rows.append({"n": "slope", "tv_lower": slope})
    cols = ["n", "tv_lower", "tv_upper", "paper_upper", "paper_lower",
            "delta_gap", "stability_bound", "valid"]
    _emit(rows, cols, args)
    if args.assert_bounds:
        for r in rows[:-1]:
            if not r["valid"]:
                continue
            if r["tv_lower"] > r["paper_upper"]:
                print(f"ASSERT FAIL n={r['n']}: tv above the closed-form upper bound",
                      file=sys.stderr)
                return 3
            if r["paper_lower"] is not None and r["paper_lower"] > r["tv_upper"]:
                print(f"ASSERT FAIL n={r['n']}: closed-form lower bound above tv",
                      file=sys.stderr)
                return 3
            if r["delta_gap"] > r["stability_bound"]:
                print(f"ASSERT FAIL n={r['n']}: delta gap above stability bound",
                      file=sys.stderr)
                return 3
    return 0


def _sweep_row_star(w):
    return _sweep_row(*w)


def cmd_regime(args) -> int:
    scaling = _parse_scaling(args.scaling)
    verdict = classify_regime(scaling, _parse_ints(args.n_grid))
    rows = [{
        "regime": verdict.regime,
        "c": verdict.c,
        "a_n_trace": ";".join(f"{v:.17g}" for v in verdict.a_n_trace),
    }]
    _emit(rows, ["regime", "c", "a_n_trace"], args)
    return 0


def cmd_coupling(args) -> int:
    seed = args.seed
    samples = int(round(float(args.samples)))
    which = args.which.upper()
    if which == "A1":
        rep = couple_binom_poisson(args.m, args.p, seed, samples)
    elif which == "A2":
        rep = couple_poisson_poisson(args.lambda0, args.lambda1, seed, samples)
    elif which == "A3":
        probs = _parse_floats(args.probs)
        rare = _parse_ints(args.rare)
        rep = couple_multinomial_poisson(args.m, probs, rare, seed, samples)
    else:
        raise ValueError(f"unknown coupler {args.which!r} (use A1|A2|A3)")
    rows = [{
        "coupler": which,
        "seed": rep.seed,
        "n_samples": rep.n_samples,
        "mismatch_freq": rep.mismatch_freq,
        "bound": rep.bound,
        "three_sigma": rep.three_sigma,
        "ks_first": rep.marginal_ks[0],
        "ks_second": rep.marginal_ks[1],
        "within_bound": rep.within_bound,
    }]
    _emit(rows, ["coupler", "seed", "n_samples", "mismatch_freq", "bound",
                 "three_sigma", "ks_first", "ks_second", "within_bound"], args)
    if args.assert_bounds and not rep.within_bound:
        print("ASSERT FAIL: mismatch frequency above bound + 3 sigma", file=sys.stderr)
        return 3
    return 0


def cmd_hybrid(args) -> int:
    spec = _load_channel(args.channel_spec, args.pi)
    n_grid = sorted(_parse_ints(args.n_grid))
    if args.mode == "gap":
        rows_raw = hybrid_delta_gap(spec, args.eps, n_grid, args.rare_cap)
        rows = [{
            "n": r.n, "k": r.k, "delta_full": r.delta_full,
            "delta_proj": r.delta_proj, "gap": r.gap, "bound": r.bound,
            "cint": r.cint, "empirical_constant": r.empirical_constant,
            "delta_proj_limit": r.delta_proj_limit,
            "identity_gap": r.identity_gap,
        } for r in rows_raw]
        cols = ["n", "k", "delta_full", "delta_proj", "gap", "bound", "cint",
                "empirical_constant", "delta_proj_limit", "identity_gap"]
        _emit(rows, cols, args)
        if args.assert_bounds:
            for r in rows:
                if r["bound"] is not None and r["gap"] > r["bound"]:
                    print(f"ASSERT FAIL n={r['n']}: gap above interior bound",
                          file=sys.stderr)
                    return 3
        return 0
    if args.mode == "cf":
        model = hybrid_setup(spec)
        g0 = model.g0.astype(float)
        g1 = model.g1.astype(float)
        dim = len(spec.alphabet)
        s0 = np.abs(g0)
        s1 = np.abs(g1)
        ts = [-1.2, -0.5, 0.1, 0.7, 1.3]
        grid = [(t * (0.8 * g0 - 0.6 * g1), s * (0.9 * s0 + 0.4 * s1))
                for t in ts for s in ts]
        rows = []
        prev = None
        for n in n_grid:
            k = int(math.floor(model.pi * n))
            channel = channel_from_intensities(spec, n)
            cf = hybrid_cf(model, channel, n, k, grid)
            rows.append({"n": n, "k": k, "sup_null": cf.sup_null,
                         "sup_alt": cf.sup_alt})
        _emit(rows, ["n", "k", "sup_null", "sup_alt"], args)
        if args.assert_bounds:
            sups = [r["sup_null"] for r in rows]
            if any(b >= a for a, b in zip(sups, sups[1:])):
                print("ASSERT FAIL: CF distance not strictly decreasing",
                      file=sys.stderr)
                return 3
        return 0
    raise ValueError(f"unknown hybrid mode {args.mode!r}")


def _apply_config(argv: List[str]) -> List[str]:
    """Expand --config key=value pairs into leading flags (explicit flags win
    because argparse keeps the last occurrence)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ValueError("--config needs a path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    pre: List[str] = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            pre += [f"--{key.replace('_', '-')}", value]
    # config defaults go right after the subcommand
    if rest and not rest[0].startswith("-"):
        return [rest[0]] + pre + rest[1:]
    return pre + rest


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="critshuffle",
        description="Exact numerics for shuffled randomized response at the "
                    "critical scaling: privacy curves, limit experiments, "
                    "rate sweeps, couplings, and hybrid checks.",
        epilog="Channel spec files are plain text 'key: value' lines: "
               "alphabet (symbols), mode (single_dominant|two_dominant), "
               "dominant0/dominant1 (symbol or pair), split0/split1 "
               "(rationals, two-dominant only), alpha0/alpha1 "
               "(symbol=intensity pairs), optional pi. '#' starts a comment.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--seed", type=int,
                       default=int(os.environ.get(SEED_ENV, "0")))
        p.add_argument("--assert", dest="assert_bounds", action="store_true",
                       help="exit 3 when a bound comparison fails")
        p.add_argument("--jobs", type=int, default=1)

    def experiment_flags(p):
        p.add_argument("--experiment", required=True,
                       choices=("rr-canonical", "rr-composition", "poisson-limit",
                                "skellam-limit", "multivariate-limit",
                                "multivariate-finite"))
        p.add_argument("--n", type=int, default=100)
        p.add_argument("--k", type=int, default=0)
        p.add_argument("--c", type=float, default=None)
        p.add_argument("--eps0", type=float, default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--pi", type=float, default=None)
        p.add_argument("--channel-spec", default=None)
        p.add_argument("--rare-cap", type=int, default=12)

    p = sub.add_parser("curve", help="privacy-curve table over an eps grid")
    experiment_flags(p)
    p.add_argument("--eps", default="0,1,2", help="comma-separated eps grid")
    common(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("tradeoff", help="trade-off curve knot list")
    experiment_flags(p)
    p.add_argument("--generic", action="store_true",
                   help="force the generic likelihood-ratio construction "
                        "(poisson-limit defaults to the closed knot formula)")
    common(p)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("sweep", help="rate sweep against the limit experiment")
    p.add_argument("--regime", required=True,
                   choices=("poisson", "skellam", "multivariate"))
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--pi", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--channel-spec", default=None)
    p.add_argument("--rare-cap", type=int, default=12)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("regime", help="classify a local-privacy scaling")
    p.add_argument("--scaling", required=True,
                   help="power:A | canonical:C | explicit:V1,V2,...")
    p.add_argument("--n-grid", default="100,1000,10000,100000")
    common(p)
    p.set_defaults(func=cmd_regime)

    p = sub.add_parser("coupling", help="run a seeded coupling experiment")
    p.add_argument("--which", required=True, help="A1 | A2 | A3")
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--p", type=float, default=0.02)
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--lambda1", type=float, default=1.5)
    p.add_argument("--probs", default="0.005,0.005,0.99")
    p.add_argument("--rare", default="0,1")
    p.add_argument("--samples", default="1e6")
    common(p)
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("hybrid", help="two-dominant channel checks")
    p.add_argument("--channel-spec", required=True)
    p.add_argument("--mode", choices=("gap", "cf"), default="gap")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--pi", type=float, default=None)
    p.add_argument("--n-grid", default="8,16,32,64")
    p.add_argument("--rare-cap", type=int, default=12)
    common(p)
    p.set_defaults(func=cmd_hybrid)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
