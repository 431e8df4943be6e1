"""Acceptance criteria, one function per criterion.

Each ``criterion_N`` returns a :class:`CriterionResult` with a pass flag,
a one-line summary and the numbers behind it.  Tolerances are fixed here
and never relaxed.  :func:`run_all` evaluates every criterion (or a
subset) in order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import itertools
import math
import time

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from . import exact, green, renewal
from .asymptotics import baseline_asymptotic, responsive_asymptotic
from .model import (
    estimate_survival,
    sample_Z1_batch,
    transition_rates,
)
from .params import ModelParams, PairState

__all__ = ["CriterionResult", "CRITERIA", "run_all", "plain_killed_walk_survival"]

BASE = ModelParams(d=1, kappa=1.0, rho=1.0, gamma=1.0, s0=1.0, s1=1.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.title}: {self.summary}"


def _result(number, title, passed, summary, **details):
    return CriterionResult(number, title, bool(passed), summary, details)


# -- 1 ---------------------------------------------------------------------


def criterion_1(seed=101, n_paths=10**6):
    """Monte Carlo vs exact solver in d = 1 at t = 10, 20, 50."""
    times = [10.0, 20.0, 50.0]
    start = time.perf_counter()
    est = estimate_survival(BASE, times, n_paths, seed)
    mc_seconds = time.perf_counter() - start
    curve = exact.survival(BASE, 300, times)
    rows, ok = [], mc_seconds < 120.0
    for e, lo, up in zip(est, curve.lower, curve.upper):
        ref = 0.5 * (lo + up)
        gap = up - lo
        tol = 3 * e.stderr + gap
        good = abs(e.mean - ref) <= tol and gap < 1e-6
        ok &= good
        rows.append(dict(t=e.time, mc=e.mean, stderr=e.stderr, exact=ref, gap=gap,
                         diff=e.mean - ref, tol=tol, ok=good))
    worst = max(abs(r["diff"]) / r["tol"] for r in rows)
    return _result(1, "oracle agreement d=1", ok,
                   f"max |MC-exact|/(3se+gap) = {worst:.2f}, max gap = "
                   f"{max(r['gap'] for r in rows):.1e}, MC time {mc_seconds:.1f}s",
                   rows=rows, mc_seconds=mc_seconds)


# -- 2 ---------------------------------------------------------------------


def criterion_2(seed=202, n_paths=10**5):
    """Exposure-weight and hard-kill estimators agree within 3 combined standard errors."""
    times = [10.0, 20.0, 50.0]
    a = estimate_survival(BASE, times, n_paths, seed, "exposure")
    b = estimate_survival(BASE, times, n_paths, seed + 1, "hard_kill")
    rows, ok = [], True
    for x, y in zip(a, b):
        se = math.hypot(x.stderr, y.stderr)
        z = (x.mean - y.mean) / se
        ok &= abs(z) <= 3
        rows.append(dict(t=x.time, exposure=x.mean, hard_kill=y.mean, combined_se=se, z=z))
    zmax = max(abs(r["z"]) for r in rows)
    return _result(2, "estimator unbiasedness", ok, f"max |z| = {zmax:.2f} (limit 3)",
                   rows=rows)


# -- 3 ---------------------------------------------------------------------


def _radius_1d(params, t):
    # 8 standard deviations of Z at time t, never below the default radius
    return max(exact.DEFAULT_RADIUS[1], int(math.ceil(8 * math.sqrt(2 * params.nu * t))) + 10)


def criterion_3():
    """Tauberian ratio sqrt(pi t) <U(t)> gamma / prefactor in d = 1."""
    times = [1e2, 1e3, 1e4]
    curve = exact.survival(BASE, _radius_1d(BASE, times[-1]), times)
    report = responsive_asymptotic(BASE)
    ratios = {}
    for name in ("theorem", "proof"):
        pref = report.readings[name]
        ratios[name] = [math.sqrt(math.pi * t) * u * BASE.gamma / pref
                        for t, u in zip(times, curve.upper)]
    selected = min(ratios, key=lambda k: abs(ratios[k][-1] - 1))
    r = ratios[selected]
    dist = [abs(x - 1) for x in r]
    monotone = all(b < a for a, b in zip(dist, dist[1:]))
    ok = dist[-1] <= 0.15 and monotone and max(curve.gap) < 1e-6
    return _result(3, "d=1 Tauberian check", ok,
                   f"reading '{selected}' ratios " + ", ".join(f"{x:.4f}" for x in r)
                   + f" (monotone toward 1: {monotone})",
                   times=times, ratios=ratios, selected=selected,
                   survival=list(curve.upper), gap=list(curve.gap))


# -- 4 ---------------------------------------------------------------------


def criterion_4(radius=25):
    """d = 3 limit: exact solver at t = 200 vs the renewal-form value per reading."""
    p = BASE.replace(d=3)
    curve = exact.survival(p, radius, [100.0, 200.0])
    v200, v100 = float(curve.upper[1]), float(curve.upper[0])
    stab = abs(v200 - v100)
    report = responsive_asymptotic(p)
    candidates = {k: report.readings[f"proof_{k}"] for k in ("occupation", "discrete")}
    rel = {k: abs(v - v200) / v200 for k, v in candidates.items()}
    selected = min(rel, key=rel.get)
    ok = stab < 1e-3 and rel[selected] < 0.01
    derived = report.readings["derived"]
    return _result(4, "d=3 limit", ok,
                   f"exact v(200) = {v200:.5f} (|v200-v100| = {stab:.1e}); best reading "
                   f"'{selected}' = {candidates[selected]:.5f}, rel. error "
                   f"{rel[selected]:.2%} (limit 1%); derived renewal value {derived:.5f}",
                   exact=v200, exact_t100=v100, stabilization=stab, readings=candidates,
                   relative_error=rel, selected=selected, derived=derived,
                   derived_relative_error=abs(derived - v200) / v200,
                   theorem_forms={k: report.readings[f"theorem_{k}"]
                                  for k in ("occupation", "discrete")})


# -- 5 ---------------------------------------------------------------------


def criterion_5(radius=25):
    """s0 dependence in d = 3: small at t = 200, large at t = 5."""
    vals = {}
    for s0 in (0.5, 5.0):
        c = exact.survival(BASE.replace(d=3, s0=s0), radius, [5.0, 200.0])
        vals[s0] = (float(c.upper[0]), float(c.upper[1]))
    diff5 = abs(vals[0.5][0] - vals[5.0][0])
    diff200 = abs(vals[0.5][1] - vals[5.0][1])
    ok = diff200 < 5e-3 and diff5 > 1e-2
    derived = {s0: responsive_asymptotic(BASE.replace(d=3, s0=s0)).readings["derived"]
               for s0 in (0.5, 5.0)}
    return _result(5, "s0-independence", ok,
                   f"|diff| at t=200: {diff200:.2e} (need < 5e-3); at t=5: {diff5:.2e} "
                   f"(need > 1e-2)",
                   values={str(k): v for k, v in vals.items()}, diff_t5=diff5,
                   diff_t200=diff200, derived_limits={str(k): v for k, v in derived.items()})


# -- 6 ---------------------------------------------------------------------


def criterion_6(seed=606, n_trials=10**6):
    """Clock escape probabilities and the harmonic identity, by Monte Carlo."""
    checks, ok = [], True
    for d in (1, 2):
        p = BASE.replace(d=d)
        closed = renewal.clock_escape_probability(p)
        mc, se, _ = renewal.clock_escape_mc(p, n_trials, seed + d)
        z = (mc - closed) / se
        ok &= abs(z) <= 3
        checks.append(dict(check=f"P(G<tau0) d={d}", closed=closed, mc=mc, stderr=se, z=z))
    for i, h in enumerate(("abs_d1", "potential_d2", "green_d3")):
        rep = renewal.harmonic_identity_check(BASE, h, n_trials, seed + 10 + i)
        ok &= abs(rep.z_score) <= 3
        checks.append(dict(check=f"E[h(Y)] P = h(e1), h={h}", mean=rep.mean, stderr=rep.stderr,
                           predicted=rep.predicted, z=rep.z_score,
                           corrected=rep.corrected, z_corrected=rep.z_score_corrected))
    summary = "; ".join(f"{c['check']}: z={c['z']:.2f}" for c in checks)
    return _result(6, "clock/harmonic identities", ok, summary, checks=checks)


# -- 7 ---------------------------------------------------------------------


def criterion_7():
    """Logarithmic growth of the planar resolvent at the origin."""
    vals = {}
    for lam in (1e-6, 1e-8):
        g = green.green_resolvent(2, (0, 0), lam)
        vals[lam] = (math.pi * g.value - math.log(1 / lam), g.est_error / abs(g.value))
    diff = abs(vals[1e-6][0] - vals[1e-8][0])
    conv = max(v[1] for v in vals.values())
    ok = diff < 0.05 and conv < 1e-10
    return _result(7, "Green asymptotics", ok,
                   f"pi G2(0,lam) - log(1/lam): {vals[1e-6][0]:.6f} (1e-6), "
                   f"{vals[1e-8][0]:.6f} (1e-8), diff {diff:.1e}; self-convergence {conv:.1e}",
                   offsets={str(k): v[0] for k, v in vals.items()}, self_convergence=conv)


# -- 8 ---------------------------------------------------------------------


def criterion_8(seed=808, n=10**6, horizon=1e6):
    """Laplace transform of Z1 in d = 1 vs its small-lambda expansion."""
    batch = sample_Z1_batch(BASE, n, seed, horizon)
    rows, ok = [], True
    for lam in (1e-4, 1e-5):
        mc, se, _ = batch.laplace(lam)
        pred = renewal.z1_laplace_expansion(BASE, lam)
        tol = 3 * se + 5 * lam
        good = abs(mc - pred) <= tol
        ok &= good
        rows.append(dict(lam=lam, mc=mc, stderr=se, expansion=pred, diff=mc - pred, tol=tol))
    return _result(8, "Z1 expansion", ok,
                   "; ".join(f"lam={r['lam']:g}: |diff| {abs(r['diff']):.1e} <= {r['tol']:.1e}"
                             for r in rows)
                   + f"; censored fraction {batch.censored_fraction:.1e}", rows=rows)


# -- 9 ---------------------------------------------------------------------


def plain_killed_walk_survival(d, nu, gamma, radius, times):
    """Survival of a rate-``2d nu`` walk killed at rate ``gamma`` at 0, absorbing box.

    Built from Kronecker sums of one-dimensional Laplacians and evaluated
    with :func:`scipy.sparse.linalg.expm_multiply`.
    """
    w = 2 * radius + 1
    adj1 = sparse.diags([np.ones(w - 1), np.ones(w - 1)], [-1, 1], format="csr")
    eye = sparse.identity(w, format="csr")
    adj = sparse.csr_matrix((w ** d, w ** d))
    for j in range(d):
        term = None
        for k in range(d):
            m = adj1 if k == j else eye
            term = m if term is None else sparse.kron(term, m, format="csr")
        adj = adj + term
    gen = nu * adj - sparse.identity(w ** d) * (2 * d * nu)
    origin = np.ravel_multi_index((radius,) * d, (w,) * d)
    kill = np.zeros(w ** d)
    kill[origin] = gamma
    gen = (gen - sparse.diags(kill)).T.tocsr()
    p0 = np.zeros(w ** d)
    p0[origin] = 1.0
    out = []
    for t in times:
        out.append(1.0 if t == 0 else float(expm_multiply(gen * t, p0).sum()))
    return np.array(out)


def criterion_9():
    """Reductions at s1 = 0."""
    diffs = []
    for d, radius, times in ((1, 300, [1.0, 10.0, 50.0]), (2, 20, [1.0, 5.0, 10.0])):
        p = BASE.replace(d=d, s1=0.0)
        curve = exact.survival(p, radius, times)
        ref = plain_killed_walk_survival(d, p.nu, p.gamma, radius, times)
        diffs.append(float(np.max(np.abs(curve.lower - ref))))
    solver_ok = max(diffs) <= 1e-10
    identical, n = True, 0
    rng = np.random.default_rng(909)
    for d in (1, 2, 3):
        for _ in range(4):
            p = ModelParams(d=d, kappa=float(rng.uniform(0, 3)), rho=float(rng.uniform(0.1, 3)),
                            gamma=float(rng.uniform(0.1, 5)), s0=float(rng.uniform(0.1, 5)),
                            s1=0.0)
            identical &= (responsive_asymptotic(p).leading_value
                          == baseline_asymptotic(p, "none").leading_value)
            n += 1
    ok = solver_ok and identical
    return _result(9, "reductions", ok,
                   f"max |solver - plain walk| = {max(diffs):.1e} (limit 1e-10); "
                   f"asymptotics bit-identical on {n} grid points: {identical}",
                   solver_diffs=diffs, bitwise_identical=identical)


# -- 10 --------------------------------------------------------------------


def _path_count_avoiding(x, y, n_max):
    # sum_n s^n P_x(X_n = y, tau0 > n) coefficients, planar walk
    size = 2 * (n_max + max(map(abs, x + y))) + 3
    c = size // 2
    prob = np.zeros((size, size))
    prob[c + x[0], c + x[1]] = 1.0
    coeffs = [prob[c + y[0], c + y[1]]]
    for _ in range(n_max):
        nxt = 0.25 * (np.roll(prob, 1, 0) + np.roll(prob, -1, 0)
                      + np.roll(prob, 1, 1) + np.roll(prob, -1, 1))
        nxt[c, c] = 0.0
        prob = nxt
        coeffs.append(prob[c + y[0], c + y[1]])
    return np.array(coeffs)


def criterion_10(seed=1010):
    """Compact property suite."""
    rng = np.random.default_rng(seed)
    fails = []
    # rate conservation
    for _ in range(300):
        d = int(rng.integers(1, 6))
        p = ModelParams(d=d, kappa=float(rng.uniform(0, 3)), rho=float(rng.uniform(0.1, 3)),
                        gamma=float(rng.uniform(0, 3)), s0=float(rng.uniform(0.1, 3)),
                        s1=float(rng.uniform(0, 3)))
        z = tuple(int(v) for v in rng.integers(-2, 3, d) * (rng.random() < 0.7))
        s = PairState(z, int(rng.integers(0, 2)))
        total = sum(r for _, r in transition_rates(p, s))
        if not math.isclose(total, s.exit_rate(p), rel_tol=1e-12, abs_tol=1e-12):
            fails.append(f"rate conservation at {s}")
    # bounds, monotonicity in t and gamma, bracketing
    times = np.linspace(0, 20, 11)
    p = BASE.replace(d=2)
    c1 = exact.survival(p, 12, times)
    c2 = exact.survival(p.replace(gamma=2 * p.gamma), 12, times)
    refl_alive, _, _ = exact.evaluate_operator(exact.build_operator(p, 12, "reflecting"), times)
    if np.any(c1.lower < 0) or np.any(c1.upper > 1) or np.any(c1.lower > c1.upper):
        fails.append("survival bounds")
    if np.any(np.diff(c1.lower) > 1e-14) or np.any(np.diff(c1.upper) > 1e-14):
        fails.append("monotonicity in t")
    if np.any(c2.lower > c1.lower + 1e-14) or np.any(c2.upper > c1.upper + 1e-14):
        fails.append("monotonicity in gamma")
    if np.any(c1.lower > refl_alive + 1e-14) or np.any(refl_alive > 1 + 1e-14):
        fails.append("absorbing <= reflecting")
    # convention bridge
    bridge = 0.0
    for _ in range(6):
        d = int(rng.integers(1, 4))
        x = tuple(int(v) for v in rng.integers(-3, 4, d))
        s = float(rng.uniform(0.1, 0.9))
        gen = green.green_generating(d, x, s).value
        res = green.green_resolvent(d, x, (1 - s) / s, method="bessel").value / s
        brl = green.green_resolvent(d, x, (1 - s) / s, method="brillouin").value / s
        bridge = max(bridge, abs(gen - res) / abs(res), abs(brl - res) / abs(res))
    if bridge > 1e-10:
        fails.append(f"convention bridge {bridge:.1e}")
    # first-visit decomposition against path counting, planar walk, <= 16 steps
    s, n_max = 0.25, 16
    tail = s ** (n_max + 1) / (1 - s)
    fv = 0.0
    for x, y in itertools.product([(1, 0), (1, 1), (2, -1)], [(1, 0), (0, 2), (-1, 1)]):
        direct = float(np.polyval(_path_count_avoiding(x, y, n_max)[::-1], s))
        g = lambda v: green.green_generating(2, v, s).value  # noqa: E731
        formula = g((y[0] - x[0], y[1] - x[1])) - g(x) * g(y) / g((0, 0))
        err = abs(formula - direct)
        fv = max(fv, err - tail)
        if err > tail + 1e-10:
            fails.append(f"first-visit decomposition at x={x}, y={y}: {err:.1e}")
    ok = not fails
    return _result(10, "property suites", ok,
                   "all green" if ok else "; ".join(fails),
                   bridge_max_rel=bridge, first_visit_excess=fv)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_all(numbers=None, echo=None):
    """Evaluate the selected criteria (all by default) in order."""
    results = []
    for k in numbers or sorted(CRITERIA):
        start = time.perf_counter()
        res = CRITERIA[k]()
        res.seconds = time.perf_counter() - start
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
