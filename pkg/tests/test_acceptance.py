"""Acceptance criteria 1-9, one test each.

Every test records a pass/fail line that the terminal summary prints.
"""

import random
import time

import numpy as np
import pytest

from credence import PriceList, Scenario
from credence.envelopes import chi_lower, envelopes, pi_envelopes, qbar
from credence.equilibrium import (
    Experiment,
    Mode,
    SignallingStrategy,
    chi_star,
    equilibrium_profile,
    ev_star,
    optimal_experiment,
    optimal_p2,
    optimal_prices,
    p_eq_value,
    public_credibility_optimum,
    v_star,
)
from credence.model import Action
from credence.oracle import (
    indirect_utility_grid,
    quasiconcave_envelope,
    simulate,
    solve_program,
    upper_concave_hull,
    utility_crossings,
    verify_equilibrium,
)
from credence.welfare import client_u_star, discontinuity_gaps, eu_star, u_star
from gen import REF, random_p1, random_p2_side, random_params, random_pbar, random_strict_p2


def test_criterion_1_closed_form_vs_program(record):
    rng = random.Random(101)
    start = time.perf_counter()
    worst, failures = 0.0, 0
    for _ in range(500):
        params = random_params(rng)
        p = random_p2_side(rng, params)
        s = Scenario(params, rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99))
        err = abs(p_eq_value(s, p).value - solve_program(s, p, grid_n=401).value)
        tol = 0.05 * (params.l2 - params.c1) / 401
        worst = max(worst, err / tol)
        failures += err > tol
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 60
    record(1, ok, f"{failures} of 500 outside tolerance, worst error {worst:.2e} x tol, {elapsed:.1f}s")
    assert failures == 0
    assert elapsed < 60


def _numeric_envelopes(q0, p, params):
    xs = np.unique(np.concatenate([np.linspace(0, 1, 4001), utility_crossings(p, params), [q0]]))
    v = indirect_utility_grid(xs, p, params)
    hx, hy = upper_concave_hull(xs, v)
    i = int(np.searchsorted(xs, q0))
    return float(quasiconcave_envelope(v)[i]), float(np.interp(q0, hx, hy))


def _reference_goldens():
    """Independent recomputation of each reference value (grid oracle or enumeration)."""
    p47 = PriceList(4, 7)
    found = {}

    lo, hi = 0.0, 1.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if solve_program(Scenario(REF, 0.25, mid), p47, grid_n=201).value > 3.0 + 1e-9:
            hi = mid
        else:
            lo = mid
    found["chi_lower"] = (hi, 1e-6)
    found["v_persuade"] = (solve_program(Scenario(REF, 0.25, 0.8), p47, grid_n=401).value, 1e-9)
    found["v_cheap"] = (solve_program(Scenario(REF, 0.25, 0.5), p47, grid_n=401).value, 1e-9)

    # credibility where some price beats the equal-margin payoff, by enumeration of p2
    p2_grid = np.linspace(REF.l1 - REF.c1 + REF.c2, REF.l2, 40001)

    def best_over_p2(chi):
        return max(v_star(0.25, chi, PriceList(REF.l1, float(x)), REF).value for x in p2_grid[::8])

    lo, hi = 0.0, 1.0
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        if best_over_p2(mid) > REF.l1 - REF.c1 + 1e-9:
            hi = mid
        else:
            lo = mid
    found["chi_star"] = (hi, 2e-3)

    vals = [v_star(0.25, 0.5, PriceList(REF.l1, float(x)), REF).value for x in p2_grid]
    found["p2_star"] = (float(p2_grid[int(np.argmax(vals))]), 1e-3)
    found["ev_star"] = (solve_program(Scenario(REF, 0.25, 0.5), PriceList(4, 6.4), grid_n=401).value, 1e-9)

    # client value of full disclosure at equal margins: top of the split family
    full = ((1.0, 0.0), (0.0, 1.0))
    cert = verify_equilibrium(
        Scenario(REF, 0.25, 0.2), REF.equal_margin_prices(), Experiment(("m1", "m2"), full),
        SignallingStrategy(("m1", "m2"), full), {"m1": Action.A1, "m2": Action.A2},
    )
    found["eu_star"] = (cert.client_value, 1e-9)
    for key, q0, p in [("u_star_p2", 0.25, PriceList(3, 7)), ("u_star_p1", 0.5, PriceList(3, 4))]:
        s = Scenario(REF, q0, 0.5)
        prof = equilibrium_profile(s, p)
        found[key] = (verify_equilibrium(s, p, prof.xi, prof.sigma, prof.rho).client_value, 1e-9)

    best = -np.inf
    for x in np.linspace(6.0, 10.0, 81):
        qc, cv = _numeric_envelopes(0.25, PriceList(4.0, float(x)), REF)
        best = max(best, 0.5 * qc + 0.5 * cv)
    found["ev_pc"] = (best, 1e-9)
    return found


GOLDEN = {
    "chi_lower": 2 / 3,
    "v_persuade": 3.5,
    "v_cheap": 3.0,
    "chi_star": 1 / 3,
    "p2_star": 6.4,
    "ev_star": 3.25,
    "eu_star": 1.0,
    "u_star_p2": 0.5,
    "u_star_p1": 3.0,
    "ev_pc": 3.5,
}


def test_criterion_2_reference_instance(record):
    oracle_vals = _reference_goldens()
    closed = {
        "chi_lower": chi_lower(0.25, PriceList(4, 7), REF),
        "v_persuade": v_star(0.25, 0.8, PriceList(4, 7), REF).value,
        "v_cheap": v_star(0.25, 0.5, PriceList(4, 7), REF).value,
        "chi_star": chi_star(0.25, REF),
        "p2_star": optimal_p2(0.25, 0.5, REF),
        "ev_star": ev_star(0.25, 0.5, REF),
        "eu_star": eu_star(Scenario(REF, 0.25, 0.2)),
        "u_star_p2": u_star(0.25, PriceList(3, 7), REF),
        "u_star_p1": u_star(0.5, PriceList(3, 4), REF),
        "ev_pc": public_credibility_optimum(Scenario(REF, 0.25, 0.5)).value,
    }
    bad = []
    for key, golden in GOLDEN.items():
        got, oracle_tol = oracle_vals[key]
        if abs(got - golden) > oracle_tol:
            bad.append(f"{key} oracle {got}")
        if abs(closed[key] - golden) > 1e-9:
            bad.append(f"{key} closed form {closed[key]}")
    assert optimal_prices(Scenario(REF, 0.25, 0.5)).canonical == PriceList(4.0, pytest.approx(6.4))
    record(2, not bad, "all 10 goldens reproduced" if not bad else "; ".join(bad))
    assert not bad


def test_criterion_3_collapse_of_trust(record):
    rng = random.Random(103)
    bad = 0
    done = 0
    while done < 50:
        params = random_params(rng)
        p = random_strict_p2(rng, params)
        q0 = rng.uniform(0.0, qbar(p, params))
        if not 0.0 < q0 < 1.0:
            continue
        done += 1
        env = envelopes(p, params)
        low, high = env.qcav(q0), env.cav(q0)
        cl = chi_lower(q0, p, params)
        chis = np.unique(np.concatenate([np.linspace(0, 1, 1001), [cl]]))
        vals = np.array([v_star(q0, c, p, params).value for c in chis])
        below, above = vals[chis < cl], vals[chis >= cl]
        ok = (
            np.all(np.abs(below - low) <= 1e-9)
            and np.all(np.abs(above - high) <= 1e-9)
            and high - low > 1e-9
            and abs(v_star(q0, cl, p, params).value - v_star(q0, max(cl - 1e-7, 0.0), p, params).value - (high - low)) <= 1e-9
        )
        bad += not ok
    record(3, bad == 0, f"{bad} of 50 profiles deviate from the two-level step")
    assert bad == 0


def test_criterion_4_monotone_and_continuous(record):
    n = 1000
    qs = np.linspace(0.0, 1.0, n)
    cs = np.linspace(0.0, 1.0, n)
    grid = np.array([[ev_star(q, c, REF) for c in cs] for q in qs])
    step = 1.0 / (n - 1)
    lip = max(REF.loss_gap, REF.cost_gap)
    jump = max(np.abs(np.diff(grid, axis=0)).max(), np.abs(np.diff(grid, axis=1)).max())
    mono = np.all(np.diff(grid, axis=1) >= -1e-12)
    strict_ok = flat_ok = True
    cut = REF.prior_cutoff
    for i, q in enumerate(qs[1:-1], start=1):
        floor = max(chi_star(q, REF), 0.0)
        row = grid[i]
        up = cs > floor
        if up.sum() > 1 and not np.all(np.diff(row[up]) > 0):
            strict_ok = False
        if q < cut and not np.allclose(row[cs <= floor], REF.l1 - REF.c1, atol=1e-12):
            flat_ok = False
    cont_ok = jump <= 10 * lip * step
    ok = bool(mono and strict_ok and flat_ok and cont_ok)
    record(4, ok, f"monotone={mono}, strict={strict_ok}, flat={flat_ok}, max jump {jump:.2e} vs bound {10 * lip * step:.2e}")
    assert ok


def test_criterion_5_persuasion_certification(record):
    rng = random.Random(105)
    worst_regret, worst_z, done = 0.0, 0.0, 0
    while done < 100:
        params = random_params(rng)
        p = random_strict_p2(rng, params)
        s = Scenario(params, rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99))
        pv = p_eq_value(s, p)
        if pv.mode is not Mode.PERSUASION:
            continue
        xi, sigma = optimal_experiment(s, p)
        rho = {"m1": Action.A1, "m2": Action.A2}
        cert = verify_equilibrium(s, p, xi, sigma, rho, tol=1e-9)
        worst_regret = max(worst_regret, cert.bayes_deviation, cert.client_regret, cert.expert_regret)
        if not cert.is_equilibrium:
            worst_regret = np.inf
        rep = simulate(s, p, xi, sigma, rho, n=1_000_000, seed=5000 + done)
        cav = envelopes(p, params).cav(s.q0)
        worst_z = max(worst_z, abs(rep.mean_expert_payoff - cav) / rep.std_err)
        done += 1
    ok = worst_regret <= 1e-9 and worst_z <= 4
    record(5, ok, f"max regret {worst_regret:.1e}, max |z| {worst_z:.2f} over 100 scenarios")
    assert ok


def test_criterion_6_u_star_ignores_chi(record):
    rng = random.Random(106)
    bad = 0
    for _ in range(100):
        params = random_params(rng)
        p1 = rng.uniform(params.c1, params.l1)
        p = PriceList(p1, rng.uniform(max(p1, params.c2), params.l2))
        q0 = rng.uniform(0.01, 0.99)
        values = [client_u_star(Scenario(params, q0, c), p) for c in np.linspace(0, 1, 11)]
        bad += len(set(values)) != 1
    record(6, bad == 0, f"{bad} of 100 (q0, p) vary with chi")
    assert bad == 0


def _limit(f, eps):
    # Richardson extrapolation of f(eps) as eps -> 0
    return 2 * f(eps) - f(2 * eps)


def test_criterion_7_discontinuity_gaps(record):
    rng = random.Random(107)
    worst, off = 0.0, 0
    for _ in range(50):
        params = random_params(rng)
        pbar = random_pbar(rng, params, p1_max=params.l1 - 1e-2)
        while pbar.p1 - params.c1 < 1e-2:
            pbar = random_pbar(rng, params, p1_max=params.l1 - 1e-2)
        q0 = rng.uniform(0.01, 0.99)
        g = discontinuity_gaps(q0, pbar, params)
        base = u_star(q0, pbar, params)
        lim1 = _limit(lambda e: u_star(q0, PriceList(pbar.p1, pbar.p2 - e), params), 1e-5)
        lim2 = _limit(lambda e: u_star(q0, PriceList(pbar.p1 - e, pbar.p2), params), 1e-5)
        worst = max(worst, abs(g.gap1 - (base - lim1)), abs(g.gap2 - (base - lim2)))
        off += not (g.gap1 > 0 and g.gap2 > 0)
        off += min(abs(g.gap1 - c) for c in g.p1_candidates) > 1e-12
        off += min(abs(g.gap2 - c) for c in g.p2_candidates) > 1e-12
    ok = worst <= 1e-6 and off == 0
    record(7, ok, f"max mismatch {worst:.1e}, {off} gaps non-positive or off the closed forms")
    assert ok


def test_criterion_8_equal_margins_dominate_p1(record):
    rng = random.Random(108)
    bad = 0
    for _ in range(200):
        params = random_params(rng)
        p = random_p1(rng, params)
        s = Scenario(params, rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99))
        reference = p_eq_value(s, params.equal_margin_prices()).value
        bad += not p_eq_value(s, p).value < reference
    record(8, bad == 0, f"{bad} of 200 P1 lists not strictly dominated")
    assert bad == 0


def test_criterion_9_benchmark_limits(record):
    rng = random.Random(109)
    env = pi_envelopes(REF)
    worst = 0.0
    for _ in range(20):
        q0 = rng.uniform(0.0, 1.0)
        worst = max(
            worst,
            abs(ev_star(q0, 1 - 1e-6, REF) - env.cav(q0)),
            abs(ev_star(q0, 1e-6, REF) - env.qcav(q0)),
        )
    record(9, worst < 1e-4, f"max gap to benchmarks {worst:.1e}")
    assert worst < 1e-4
