"""Acceptance checks at full scale (10,000 agents, 10,000 iterations, 5 seeds).

Each criterion prints one PASS/FAIL line. Run directly for the report alone::

    python3 tests/test_acceptance.py
"""
import math
from functools import lru_cache

import numpy as np
import pytest

from glv_econ import distfit, dynamics, engine, metrics, sweep
from glv_econ.econ import PopulationState, derive_ratios
from glv_econ.policy import PolicySpec

SEEDS = (1, 2, 3, 4, 5)
T = 10_000
# ten stationary snapshots between T/2 and T, pooled for the density comparison
POOLED_SNAPSHOTS = tuple(range(T // 2 + T // 20, T + 1, T // 20))

# profit ratio -> (gini wealth, gini income, decile wealth, decile income, poverty wealth, poverty income)
PROFIT_RATIO_TABLE = {
    0.0: (0.06, 0.00, 1.43, 1.00, 0.00, 0.00),
    0.2: (0.07, 0.01, 1.57, 1.10, 0.00, 0.00),
    0.5: (0.12, 0.06, 2.09, 1.45, 0.00, 0.00),
    0.8: (0.63, 0.50, 22.68, 12.46, 0.76, 0.37),
    1.0: (1.00, 1.00, math.inf, math.inf, 1.00, 1.00),
}

REPORT = []


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT.append(line)
    print(line)
    return ok


@lru_cache(maxsize=None)
def run_model(name, seed, policy=False):
    overrides = {"policy": PolicySpec(wealth_threshold_frac=0.9, consumption_cut_frac=0.2)} if policy else {}
    if name == "1a":
        overrides["snapshot_iterations"] = POOLED_SNAPSHOTS
    return engine.run(engine.preset(name, seed=seed, **overrides))


def seed_stats(name, fn, policy=False):
    return np.array([fn(run_model(name, s, policy)) for s in SEEDS])


def within(value, target, tol):
    return abs(value - target) <= tol


def fmt(values):
    values = np.atleast_1d(values)
    return f"{values.mean():.4g} [{values.min():.4g}, {values.max():.4g}]"


# ---------------------------------------------------------------- 1-4: presets

def criterion_1():
    gw = seed_stats("1a", lambda r: metrics.gini(r.final_wealth))
    dw = seed_stats("1a", lambda r: metrics.decile_ratio(r.final_wealth))
    mm = seed_stats("1a", lambda r: metrics.max_min_ratio(r.final_wealth))
    ok = within(gw.mean(), 0.11, 0.02) and within(dw.mean(), 1.9, 0.2) and 3.0 <= mm.mean() <= 5.5
    return record(1, ok, f"1A wealth gini {fmt(gw)} (0.11+-0.02), decile {fmt(dw)} (1.9+-0.2), "
                         f"max/min {fmt(mm)} in [3, 5.5]")


def criterion_2():
    gaps, converged = [], []
    for s in SEEDS:
        r = run_model("1b", s)
        ge = metrics.gini(r.wages)
        gaps.append(max(abs(ge - metrics.gini(r.final_wealth)), abs(ge - metrics.gini(r.final_income))))
        converged.append(engine.detect_stationarity(r).converged)
    ok = max(gaps) < 1e-6 and all(converged)
    return record(2, ok, f"1B max |gini(earnings) - gini(wealth|income)| = {max(gaps):.2e} (< 1e-6), "
                         f"stationary in {sum(converged)}/{len(SEEDS)} seeds")


def criterion_3():
    gy = seed_stats("1c", lambda r: metrics.gini(r.final_income))
    gw = seed_stats("1c", lambda r: metrics.gini(r.final_wealth))
    mm = seed_stats("1c", lambda r: metrics.max_min_ratio(r.final_wealth))
    ok = within(gy.mean(), 0.06, 0.015) and within(gw.mean(), 0.12, 0.02) and mm.min() > 5
    return record(3, ok, f"1C income gini {fmt(gy)} (0.06+-0.015), wealth gini {fmt(gw)} (0.12+-0.02), "
                         f"max/min {fmt(mm)} (> 5 every seed)")


def criterion_4():
    gy = seed_stats("1d", lambda r: metrics.gini(r.final_income))
    gw = seed_stats("1d", lambda r: metrics.gini(r.final_wealth))
    ge = seed_stats("1d", lambda r: metrics.gini(r.wages))
    ok = within(gy.mean(), 0.082, 0.015) and within(gw.mean(), 0.131, 0.02) and within(ge.mean(), 0.056, 0.005)
    return record(4, ok, f"1D income gini {fmt(gy)} (0.082+-0.015), wealth gini {fmt(gw)} (0.131+-0.02), "
                         f"earnings gini {fmt(ge)} (0.056+-0.005)")


# ---------------------------------------------------------------- 5-6: sweeps

@lru_cache(maxsize=None)
def profit_ratio_sweep():
    spec = sweep.SweepSpec(base=engine.preset("1c", seed=SEEDS[0]), rho_values=tuple(PROFIT_RATIO_TABLE),
                           v_values=None, replicates=len(SEEDS))
    return sweep.run_sweep(spec)


def _decile_ok(got, want):
    if math.isinf(want):
        return got > 1e3
    return abs(got - want) <= 0.15 * want


def criterion_5():
    table = profit_ratio_sweep()
    misses = []
    for rho, (gw, gy, dw, dy, pw, py) in PROFIT_RATIO_TABLE.items():
        row = table.row(rho)
        checks = {
            "gini_wealth": within(row.gini_wealth, gw, 0.03), "gini_income": within(row.gini_income, gy, 0.03),
            "decile_wealth": _decile_ok(row.decile_wealth, dw), "decile_income": _decile_ok(row.decile_income, dy),
            "poverty_wealth": within(row.poverty_wealth, pw, 0.08),
            "poverty_income": within(row.poverty_income, py, 0.08),
        }
        misses += [f"rho={rho} {k}={getattr(row, k):.4g}" for k, good in checks.items() if not good]
    r08 = table.row(0.8)
    detail = (f"rho=0.8 gini {r08.gini_wealth:.3f}/{r08.gini_income:.3f}, decile {r08.decile_wealth:.2f}/"
              f"{r08.decile_income:.2f}, poverty {r08.poverty_wealth:.2f}/{r08.poverty_income:.2f}")
    return record(5, not misses, detail + ("; misses: " + ", ".join(misses) if misses else "; all 30 cells match"))


@lru_cache(maxsize=None)
def alpha_grid():
    rhos = tuple(round(0.1 + 0.05 * i, 2) for i in range(11))
    spec = sweep.SweepSpec(base=engine.preset("1c", seed=SEEDS[0]), rho_values=rhos,
                           v_values=(0.05, 0.10, 0.15, 0.20, 0.25), replicates=len(SEEDS))
    return sweep.run_sweep(spec)


def alpha_law_checks():
    table = alpha_grid()
    law = sweep.fit_alpha_law(table)
    decreasing = {}
    for v in sorted({r.v for r in table}):
        alphas = [r.alpha_wealth for r in sorted(table, key=lambda r: r.rho)
                  if r.v == v and r.alpha_defined and r.alpha_wealth is not None]
        decreasing[v] = all(a > b for a, b in zip(alphas, alphas[1:]))
    best_v, rms = sweep.match_reference_v(table)
    return law, decreasing, best_v, rms


def criterion_6():
    law, decreasing, best_v, rms = alpha_law_checks()
    c_ok = 1.1 <= law.c <= 1.6
    p_ok = 0.95 <= law.p <= 1.35
    r2_ok = law.r2_linear >= 0.99
    mono_ok = all(decreasing.values())
    ok = c_ok and p_ok and r2_ok and mono_ok
    parts = [f"c={law.c:.3f} ({'ok' if c_ok else 'outside'} [1.1, 1.6])",
             f"p={law.p:.3f} ({'ok' if p_ok else 'outside'} [0.95, 1.35])",
             f"min linear R2={law.r2_linear:.5f} ({'ok' if r2_ok else '< 0.99'})",
             f"alpha decreasing in rho for every v: {mono_ok}",
             f"reference slopes closest at v={best_v} (rms {rms:.2f})"]
    return record(6, ok, "; ".join(parts))


# ---------------------------------------------------------------- 7: policy

def criterion_7():
    def mean(fn, policy):
        return seed_stats("1d", fn, policy).mean()

    rows = {
        "wealth gini": (lambda r: metrics.gini(r.final_wealth), 0.131, 0.077, 0.02),
        "income gini": (lambda r: metrics.gini(r.final_income), 0.082, 0.058, 0.015),
        "wealth decile": (lambda r: metrics.decile_ratio(r.final_wealth), 2.268, 1.617, 0.15),
        "income decile": (lambda r: metrics.decile_ratio(r.final_income), 1.686, 1.451, 0.1),
    }
    ok = True
    parts = []
    for label, (fn, before, after, tol) in rows.items():
        b, a = mean(fn, False), mean(fn, True)
        good = within(b, before, tol) and within(a, after, tol)
        ok &= good
        parts.append(f"{label} {b:.3f}->{a:.3f} (want {before}->{after} +-{tol})")
    same = all(np.array_equal(run_model("1d", s).wages, run_model("1d", s, True).wages) for s in SEEDS)
    ok &= same
    parts.append(f"earnings unchanged: {same}")
    return record(7, ok, "; ".join(parts))


# ---------------------------------------------------------------- 8: densities

def criterion_8a():
    errors = []
    for alpha in (2.5, 3.0, 5.0):
        for s in SEEDS:
            x = distfit.sample_glv(100_000, L=200.0, alpha=alpha, seed=s)
            est = distfit.fit(distfit.histogram(x, n_bins=100), "glv").params.alpha
            errors.append(abs(est / alpha - 1.0))
    worst = max(errors)
    return record("8a", worst <= 0.05, f"GLV alpha recovered on 15 synthetic samples, worst relative error "
                                       f"{worst:.3%} (<= 5%)")


def _three_way(values):
    hist = distfit.histogram(values, n_bins=100)
    return {f: distfit.fit(hist, f).reduced_chi2 for f in ("glv", "lognormal", "maxwell-boltzmann")}


def criterion_8b():
    pooled_wins, final_wins = 0, 0
    ratios = []
    for s in SEEDS:
        r = run_model("1a", s)
        pooled = np.concatenate([r.wealth_snapshots[t] for t in POOLED_SNAPSHOTS])
        chi = _three_way(pooled)
        pooled_wins += chi["glv"] < chi["lognormal"] and chi["glv"] < chi["maxwell-boltzmann"]
        ratios.append(chi["lognormal"] / chi["glv"])
        single = _three_way(r.final_wealth)
        final_wins += single["glv"] < single["lognormal"] and single["glv"] < single["maxwell-boltzmann"]
    ok = pooled_wins == len(SEEDS)
    return record("8b", ok, f"1A stationary wealth (10 pooled snapshots): GLV best in {pooled_wins}/{len(SEEDS)} "
                            f"seeds, lognormal/GLV chi2 ratio {fmt(np.array(ratios))}; single final snapshot: "
                            f"GLV best in {final_wins}/{len(SEEDS)}")


# ---------------------------------------------------------------- 9: properties

def criterion_9():
    rng = np.random.default_rng(99)
    checks = {}

    scale_gap = 0.0
    for _ in range(200):
        x = rng.lognormal(0.0, rng.uniform(0.1, 2.0), rng.integers(2, 500))
        k = 10.0 ** rng.uniform(-6, 6)
        scale_gap = max(scale_gap, abs(metrics.gini(k * x) - metrics.gini(x)))
    checks["gini scale invariance"] = (scale_gap < 1e-12, f"{scale_gap:.1e}")

    hill_ok = 0
    for i, alpha in enumerate((1.5, 2.0, 3.0, 5.0, 8.0)):
        x = rng.random(100_000) ** (-1.0 / (alpha - 1.0))
        est = metrics.HillTailEstimator(n_tail=10_000).fit(x)
        hill_ok += abs(est.alpha_ - alpha) < 2 * est.alpha_stderr_
    checks["hill within 2 sigma"] = (hill_ok == 5, f"{hill_ok}/5")

    acc, eq, ratio_ok = 0.0, 0.0, True
    arith_gap = 0.0
    for name in ("1a", "1b", "1c", "1d"):
        for s in SEEDS:
            r = run_model(name, s)
            a = r.aggregate_series
            lhs = np.diff(a.total_wealth)
            rhs = a.total_income[:-1] - a.total_consumption[:-1]
            acc = max(acc, float(np.max(np.abs(lhs - rhs) / a.total_wealth[1:])))
            omega_bar = r.params.mean_consumption_rate
            if r.consumption_propensity is None:
                omega = omega_bar
            else:
                omega = float(np.average(r.consumption_propensity, weights=r.final_wealth))
            target = r.final_income.mean() / omega
            eq = max(eq, abs(r.final_wealth.mean() / target - 1.0))
            arith_gap = max(arith_gap, abs(r.final_wealth.mean() / (r.final_income.mean() / omega_bar) - 1.0))
            rep = derive_ratios(r.params, PopulationState(t=T, wealth=r.final_wealth, wages=r.wages))
            ratio_ok &= rep.bowley_ratio + rep.profit_ratio == 1.0
    checks["accounting identity"] = (acc < 1e-9, f"{acc:.1e}")
    checks["equilibrium mean wealth"] = (eq < 0.02, f"{eq:.2%} (arithmetic-mean rate {arith_gap:.2%})")
    checks["bowley + profit ratio = 1"] = (ratio_ok, str(ratio_ok))

    p = dynamics.LVParams(1.0, 1.0, 1.0, 1.0)
    drift = dynamics.lv_trajectory(2.0, 1.0, p, 1e-3, 100_000, record_every=10).max_relative_drift(p)
    checks["LV invariant drift"] = (drift < 1e-6, f"{drift:.1e}")

    rerun = engine.run(engine.preset("1a", seed=SEEDS[0], snapshot_iterations=POOLED_SNAPSHOTS))
    same_run = np.array_equal(rerun.final_wealth, run_model("1a", SEEDS[0]).final_wealth)
    small = sweep.SweepSpec(base=engine.preset("1c", seed=3, n_agents=500, n_iterations=2000),
                            rho_values=(0.3, 0.7), v_values=(0.1, 0.2), replicates=2)
    same_sweep = sweep.run_sweep(small, workers=1).to_csv() == sweep.run_sweep(small, workers=2).to_csv()
    checks["bit-identical reruns"] = (same_run and same_sweep, f"run {same_run}, sweep 1 vs 2 workers {same_sweep}")

    ok = all(good for good, _ in checks.values())
    return record(9, ok, "; ".join(f"{k}: {v}" for k, (_, v) in checks.items()))


# ---------------------------------------------------------------- 10: cities

def criterion_10():
    wins, pairs = 0, []
    for s in SEEDS:
        res = dynamics.run_city_model(dynamics.CityModelParams(seed=s))
        hist = distfit.histogram(res.populations, n_bins=100)
        g = distfit.fit(hist, "glv").reduced_chi2
        ln = distfit.fit(hist, "lognormal").reduced_chi2
        wins += g < ln
        pairs.append(f"{g:.4g}<{ln:.4g}" if g < ln else f"{g:.4g}>={ln:.4g}")
    return record(10, wins == len(SEEDS), f"city sizes: GLV beats lognormal in {wins}/{len(SEEDS)} seeds "
                                          f"(reduced chi2 {', '.join(pairs)})")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8a, criterion_8b, criterion_9, criterion_10)


@pytest.mark.slow
@pytest.mark.parametrize("check", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [check() for check in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
