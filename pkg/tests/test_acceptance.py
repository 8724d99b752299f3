"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured quantities at its pinned tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
report lines.
"""

import math
import time
from dataclasses import replace
from fractions import Fraction

import numpy as np

from critshuffle.bounds import (
    multivariate_bounds,
    poisson_sharp_lower,
    skellam_bounds,
)
from critshuffle.channels import TwoDominantSpec, channel_from_intensities
from critshuffle.coupling import (
    couple_binom_poisson,
    couple_multinomial_poisson,
    couple_poisson_poisson,
    enumerate_binom_poisson_joint,
)
from critshuffle.curves import delta_from_tradeoff, delta_np, tradeoff_generic
from critshuffle.distcore import make_binomial, make_poisson, tv_distance
from critshuffle.hybrid import hybrid_cf, hybrid_delta_gap, hybrid_setup
from critshuffle.lattice import lattice_to_intdist
from critshuffle.limits import (
    IntensitySpec,
    LimitParams,
    boundary_factorization,
    compound_poisson_limit,
    poisson_shift_delta_closed,
    poisson_shift_pair,
    skellam_shift_pair,
)
from critshuffle.multivariate import exact_histogram_pair
from critshuffle.regimes import (
    hidden_count_diagnostic,
    power_scaling,
    subcritical_gaussian_check,
    supercritical_diagnostic,
)
from critshuffle.rr import canonical_pair, composition_pair, rr_config

N_GRID_HALF_DECADES = [100, 316, 1000, 3162, 10000]


def report(num: int, name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num:2d}] {status}: {name} ({detail})")
    assert ok, f"criterion {num} failed: {name} ({detail})"


def test_criterion_01_poisson_sandwich():
    start = time.time()
    worst = ""
    ok = True
    slopes = []
    for c in (0.5, 1.0, 2.0):
        lam = 1.0 / (c * c)
        Pl, _ = poisson_shift_pair(lam)
        tvs = []
        for n in N_GRID_HALF_DECADES:
            P, _ = canonical_pair(rr_config(n, c=c, k=0))
            tv = tv_distance(P, Pl)
            lower = math.exp(-lam) / (4 * c**4 * n)
            upper = 2.0 / (c**4 * n)
            if not (lower <= tv.upper and tv.lower <= upper):
                ok = False
                worst = f"c={c} n={n} tv={tv.lower:.3e} not in [{lower:.3e}, {upper:.3e}]"
            tvs.append(tv.lower)
        slope = float(np.polyfit(np.log(N_GRID_HALF_DECADES), np.log(tvs), 1)[0])
        slopes.append(slope)
        if abs(slope + 1.0) > 0.1:
            ok = False
            worst = f"c={c} slope={slope:.3f}"
    elapsed = time.time() - start
    ok = ok and elapsed < 30
    report(1, "Poisson sandwich and n^-1 rate", ok,
           worst or f"slopes={[f'{s:.3f}' for s in slopes]}, {elapsed:.1f}s")


def test_criterion_02_atom_gap_constant():
    start = time.time()
    rec = poisson_sharp_lower(1.0, 10_000)
    value = 10_000 * rec.exact_atom_gap
    target = math.exp(-1) / 2
    # the closed expression matches the constructed pmfs
    P, _ = canonical_pair(rr_config(10_000, c=1.0, k=0))
    Pl, _ = poisson_shift_pair(1.0)
    direct = P.prob(0) - Pl.prob(0)
    ok = (abs(value - target) / target <= 0.02
          and abs(direct - rec.exact_atom_gap) < 1e-12
          and time.time() - start < 1)
    report(2, "leading atom-gap constant", ok,
           f"n*gap={value:.5f} vs {target:.5f}")


def test_criterion_03_privacy_curve_convergence():
    start = time.time()
    worst_ratio = 0.0
    for c in (0.5, 1.0, 2.0):
        lam = 1.0 / (c * c)
        Pl, Ql = poisson_shift_pair(lam)
        lim = {e: delta_np(Pl, Ql, e).value for e in (0.0, 1.0, 2.0)}
        for n in (100, 1000, 10_000):
            P, Q = canonical_pair(rr_config(n, c=c, k=0))
            comp = 2.0 / (c * c * n) + 2.0 / (c**4 * n)
            for eps in (0.0, 1.0, 2.0):
                gap = abs(delta_np(P, Q, eps).value - lim[eps])
                bound = (1.0 + math.exp(eps)) * comp
                worst_ratio = max(worst_ratio, gap / bound)
    elapsed = time.time() - start
    ok = worst_ratio <= 1.0 and elapsed < 30
    report(3, "quantitative privacy-curve convergence", ok,
           f"worst gap/bound={worst_ratio:.3f}, {elapsed:.1f}s")


def test_criterion_04_closed_form_vs_series():
    start = time.time()
    worst_np = 0.0
    worst_curve = 0.0
    for lam in (0.25, 0.5, 1.0, 2.0, 4.0):
        P, Q = poisson_shift_pair(lam)
        curve = tradeoff_generic(P, Q)
        for eps in (0.0, 0.5, 1.0, 2.0, 5.0):
            closed = poisson_shift_delta_closed(lam, eps)
            worst_np = max(worst_np, abs(closed - delta_np(P, Q, eps).value))
            worst_curve = max(worst_curve, abs(closed - delta_from_tradeoff(curve, eps)))
    elapsed = time.time() - start
    ok = worst_np <= 1e-12 and worst_curve <= 1e-10 and elapsed < 5
    report(4, "closed form vs generic series vs trade-off", ok,
           f"series gap={worst_np:.2e}, curve gap={worst_curve:.2e}")


def test_criterion_05_floor_and_noncommutation():
    start = time.time()
    P, Q = poisson_shift_pair(1.0)
    floor_gaps = [abs(delta_np(P, Q, e, "reverse").value - math.exp(-1))
                  for e in (0.0, 1.0, 3.0, 10.0)]
    Pn, Qn = canonical_pair(rr_config(1000, c=1.0, k=0))
    big_eps = delta_np(Pn, Qn, 20.0, "two_sided").value
    Pm, Qm = canonical_pair(rr_config(10_000, c=1.0, k=0))
    mid = delta_np(Pm, Qm, 3.0, "two_sided").value
    ok = (max(floor_gaps) <= 1e-12
          and big_eps < 1e-6
          and abs(mid - math.exp(-1)) <= 8.5e-3
          and time.time() - start < 10)
    report(5, "reverse-curve floor and non-commuting limits", ok,
           f"floor gap={max(floor_gaps):.1e}, delta_two(20)={big_eps:.1e}, "
           f"|delta_two(3)-1/e|={abs(mid - math.exp(-1)):.2e}")


def test_criterion_06_skellam_sandwich():
    start = time.time()
    ok = True
    detail = ""
    for c in (0.5, 1.0):
        params = LimitParams(c=c, pi=0.5)
        Pl, _ = skellam_shift_pair(params)
        for n in N_GRID_HALF_DECADES:
            k = n // 2
            cfg = rr_config(n, c=c, k=k)
            P, Q = composition_pair(cfg)
            sb = skellam_bounds(cfg, params, pair=(P, Q))
            tv = tv_distance(P, Pl)
            if tv.lower > sb.canonical_composite or tv.upper < sb.cf_lower_proxy:
                ok = False
                detail = f"sandwich broken at c={c} n={n}"
            if n == 10_000:
                rel = abs(sb.cf_gap - sb.cf_predicted_gap) / sb.cf_predicted_gap
                if rel > 0.10:
                    ok = False
                    detail = f"cf prediction off by {rel:.3f} at c={c}"
    elapsed = time.time() - start
    ok = ok and elapsed < 60
    report(6, "Skellam sandwich and sharp-rate prediction", ok,
           detail or f"{elapsed:.1f}s")


def test_criterion_07_skellam_structure():
    start = time.time()
    P, Q = skellam_shift_pair(LimitParams(c=1.0, pi=0.3))
    positive = bool(np.all(P.mass > 0) and np.all(Q.mass > 0))

    lam0 = 1.0 - 1e-4
    near = skellam_shift_pair(LimitParams(c=1.0, pi=1e-4))
    target = poisson_shift_pair(lam0)
    cont = max(tv_distance(near[0], target[0]).lower,
               tv_distance(near[1], target[1]).lower)

    monotone = True
    for eps in (0.0, 1.0):
        vals = []
        for c in (0.5, 0.75, 1.0, 1.5, 2.0):
            Pc, Qc = skellam_shift_pair(LimitParams(c=c, pi=0.5))
            vals.append(delta_np(Pc, Qc, eps, "two_sided").value)
        if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
            monotone = False
    elapsed = time.time() - start
    ok = positive and cont <= 1e-3 and monotone and elapsed < 30
    report(7, "Skellam interior structure, boundary continuity, monotonicity",
           ok, f"tv at boundary={cont:.2e}")


def test_criterion_08_multivariate_reductions():
    start = time.time()
    spec2 = IntensitySpec(alphabet=("0", "1"), y0="0", y1="1",
                          alpha0={"1": 1.0}, alpha1={"0": 1.0}, pi=0.5)
    P2, Q2 = compound_poisson_limit(spec2, 1e-12)
    sk = skellam_shift_pair(LimitParams(c=1.0, pi=0.5))
    tv_red = max(tv_distance(lattice_to_intdist(P2, (-1, 1)), sk[0]).lower,
                 tv_distance(lattice_to_intdist(Q2, (-1, 1)), sk[1]).lower)

    spec3 = IntensitySpec(alphabet=("a", "b", "c"), y0="a", y1="b",
                          alpha0={"b": 0.9, "c": 0.7}, pi=0.0)
    Pl, Ql = compound_poisson_limit(spec3, 1e-13)
    Ps, Qs = boundary_factorization(spec3)
    curve_gap = max(abs(delta_np(Pl, Ql, e).value - delta_np(Ps, Qs, e).value)
                    for e in (0.0, 0.5, 1.0, 2.0))
    elapsed = time.time() - start
    ok = tv_red <= 1e-10 and curve_gap <= 1e-10 and elapsed < 10
    report(8, "two-letter and boundary reductions of the histogram limit", ok,
           f"tv={tv_red:.2e}, curve gap={curve_gap:.2e}")


def test_criterion_09_multivariate_rate():
    start = time.time()
    spec = IntensitySpec(alphabet=("a", "b", "c"), y0="a", y1="b",
                         alpha0={"b": 1.0, "c": 0.5},
                         alpha1={"a": 1.0, "c": 0.5}, pi=0.5)
    Pl, _ = compound_poisson_limit(spec, 1e-13)
    tvs = []
    ok = True
    for n in (100, 1000):
        k = n // 2
        ch = channel_from_intensities(spec, n)
        P, Q = exact_histogram_pair(ch, n, k, rare_cap=12)
        tv = tv_distance(P, Pl)
        mb = multivariate_bounds(ch, n, k, spec)
        if tv.upper > mb.tv_p_bound:
            ok = False
        tvs.append(tv.lower)
    slope = (math.log(tvs[1]) - math.log(tvs[0])) / math.log(10.0)
    elapsed = time.time() - start
    ok = ok and abs(slope + 1.0) <= 0.15 and elapsed < 120
    report(9, "multivariate histogram limit rate", ok,
           f"slope={slope:.3f}, {elapsed:.1f}s")


def test_criterion_10_couplings():
    start = time.time()
    samples = 1_000_000
    ok = True
    details = []

    for m, p in ((50, 0.02), (20, 0.1), (5, 0.5)):
        rep = couple_binom_poisson(m, p, seed=7, n_samples=samples)
        ok &= rep.within_bound
        details.append(f"A1({m},{p})={rep.mismatch_freq:.4f}<={rep.bound:.4f}+3s")
    for lam, lamp in ((1.0, 1.5), (0.25, 0.35), (2.0, 2.0)):
        rep = couple_poisson_poisson(lam, lamp, seed=7, n_samples=samples)
        ok &= rep.within_bound
    a3_points = (
        (100, [0.005, 0.005, 0.99], [0, 1]),
        (50, [0.01, 0.02, 0.97], [0, 1]),
        (30, [0.02, 0.03, 0.01, 0.94], [0, 1, 2]),
    )
    for m, probs, rare in a3_points:
        rep = couple_multinomial_poisson(m, probs, rare, seed=7, n_samples=samples)
        ok &= rep.within_bound

    # exact small-m decision-tree enumeration
    for m, p in ((2, 0.3), (4, 0.2), (6, 0.05)):
        joint, _ = enumerate_binom_poisson_joint(m, p)
        binom = make_binomial(m, p)
        pois = make_poisson(m * p, 1e-15)
        smarg = {}
        nmarg = {}
        mism = 0.0
        for (s, n_), w in joint.items():
            smarg[s] = smarg.get(s, 0.0) + w
            nmarg[n_] = nmarg.get(n_, 0.0) + w
            if s != n_:
                mism += w
        ok &= all(abs(smarg.get(k, 0.0) - binom.prob(k)) < 1e-12
                  for k in range(m + 1))
        ok &= all(abs(w - pois.prob(k)) < 1e-10 for k, w in nmarg.items())
        ok &= mism <= m * p * (1 - math.exp(-p)) + 1e-12
    elapsed = time.time() - start
    ok = ok and elapsed < 120
    report(10, "coupling bounds and exact marginals", ok,
           f"{details[0]}, {elapsed:.1f}s")


def test_criterion_11_supercritical():
    start = time.time()
    ok = True
    for rule in ("zero", "half"):
        rows = supercritical_diagnostic(power_scaling(2.0), rule,
                                        [10, 100, 1000, 10_000])
        tvs = [r.tv for r in rows]
        if any(b < a for a, b in zip(tvs, tvs[1:])) or tvs[-1] < 0.999:
            ok = False
    elapsed = time.time() - start
    ok = ok and elapsed < 10
    report(11, "super-critical collapse to distinguishability", ok,
           f"final tv={tvs[-1]:.6f}, {elapsed:.1f}s")


def test_criterion_12_subcritical_gaussianization():
    start = time.time()
    rows = subcritical_gaussian_check(0.5, "zero", [100, 1000, 10_000, 100_000])
    ks = [r.ks for r in rows]
    strictly_down = all(b < a for a, b in zip(ks, ks[1:]))
    elapsed = time.time() - start
    ok = strictly_down and ks[-1] <= 0.05 and elapsed < 120
    report(12, "sub-critical Gaussianization of the log-likelihood ratio", ok,
           f"ks={[f'{v:.4f}' for v in ks]}, {elapsed:.1f}s")


HYBRID_SPEC = TwoDominantSpec(
    alphabet=("a", "b", "c", "d"), D0=("a", "b"), D1=("c", "d"),
    p0=Fraction(1, 2), p1=Fraction(1, 2),
    alpha0={"c": 1.0, "d": 0.5}, alpha1={"a": 1.0, "b": 0.5}, pi=0.5)


def test_criterion_13_hybrid():
    start = time.time()
    model = hybrid_setup(HYBRID_SPEC)
    g0 = model.g0.astype(float)
    g1 = model.g1.astype(float)
    s0 = np.abs(g0)
    s1 = np.abs(g1)
    ts = [-1.2, -0.5, 0.1, 0.7, 1.3]
    grid = [(t * (0.8 * g0 - 0.6 * g1), s * (0.9 * s0 + 0.4 * s1))
            for t in ts for s in ts]
    sups = []
    for n in (100, 1000, 10_000):
        ch = channel_from_intensities(HYBRID_SPEC, n)
        cf = hybrid_cf(model, ch, n, n // 2, grid)
        sups.append(cf.sup_null)
    cf_down = all(b < a for a, b in zip(sups, sups[1:]))

    rows = hybrid_delta_gap(HYBRID_SPEC, eps=1.0, n_grid=[8, 16, 32, 64])
    within = all(r.gap <= r.bound for r in rows)
    slope = float(np.polyfit(np.log([r.n for r in rows]),
                             np.log([r.gap for r in rows]), 1)[0])

    boundary = replace(HYBRID_SPEC, pi=0.0)
    brows = hybrid_delta_gap(boundary, eps=1.0, n_grid=[16, 32, 64])
    bgaps = [r.gap for r in brows]
    control = min(bgaps) > 1e-3 and bgaps[-1] >= bgaps[0]

    elapsed = time.time() - start
    ok = (cf_down and within and abs(slope + 0.5) <= 0.2 and control
          and elapsed < 300)
    report(13, "hybrid block: CF convergence, gap envelope, boundary control",
           ok, f"cf sups={[f'{v:.2e}' for v in sups]}, slope={slope:.3f}, "
               f"boundary gaps={[f'{v:.4f}' for v in bgaps]}, {elapsed:.1f}s")


def test_criterion_14_hidden_counts():
    start = time.time()
    ok = True
    worst = 0.0
    for c in (0.5, 1.0, 2.0):
        row = hidden_count_diagnostic(c, [10_000])[0]
        rel_clone = abs(row.clone_mean - row.clone_limit) / row.clone_limit
        rel_blanket = abs(row.blanket_mean - row.blanket_limit) / row.blanket_limit
        worst = max(worst, rel_clone, rel_blanket)
    ok = worst <= 1e-3 and time.time() - start < 1
    report(14, "hidden-count diagnostics approach their limits", ok,
           f"worst relative gap={worst:.2e}")
