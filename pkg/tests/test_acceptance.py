"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

Monte Carlo seeds are fixed per case (base + corpus index) and were chosen
before the first run.
"""

import math
import time
from fractions import Fraction as F

import numpy as np

from rentmatch.corpus import load_instances, load_traces
from rentmatch.factorlp import analytic_params, check_grid, check_refined, solve_factor_lp
from rentmatch.instance import gen_integrality_gap, gen_random
from rentmatch.offline import exact_opt, lp_upper_bound
from rentmatch.outer import matched_count_samples, plan_queries, run_greedy, run_primal_dual
from rentmatch.verify import check_ocr_guarantee, check_reversal, enumerate_exact_dmu, estimate_dmu

from oracles import brute_force_dmu

GAMMA = F(1, 32)
MC_TRIALS = 10**6
ENUM_LIMIT = 12


def test_integrality_gap(criterion):
    t0 = time.perf_counter()
    inst = gen_integrality_gap()
    opt = exact_opt(inst)
    lp = lp_upper_bound(inst, exact=True).value
    elapsed = time.perf_counter() - t0
    ok = opt == 3 and lp >= 3.5 - 1e-9 and lp / opt >= F(7, 6) - 1e-9 and elapsed < 1
    assert criterion(1, ok, f"opt={opt} lp={lp} gap={lp / opt} in {elapsed:.3f}s")


def test_analytic_factor_point(criterion):
    t0 = time.perf_counter()
    p = analytic_params(GAMMA)
    exact = (p.Gamma, p.beta1, p.beta2) == (F(50, 99), F(50, 99), F(16, 33))
    grid, fine = check_grid(p, 0.005), check_refined(p, 0.005)
    elapsed = time.perf_counter() - t0
    ok = exact and grid.min_residual >= -1e-9 and fine.min_residual >= -1e-9 and elapsed < 10
    assert criterion(2, ok, f"exact={exact} grid_min={grid.min_residual:.2e} refined_min={fine.min_residual:.2e} "
                            f"({fine.num_points} pts) in {elapsed:.2f}s")


def test_factor_lp(criterion):
    t0 = time.perf_counter()
    a = solve_factor_lp(GAMMA, 0.01)
    b = solve_factor_lp(0, 0.01)
    elapsed = time.perf_counter() - t0
    ok = a.Gamma >= 50 / 99 - 1e-6 and b.Gamma >= 0.5 - 1e-6 and elapsed < 30
    assert criterion(3, ok, f"Gamma*(1/32)={a.Gamma:.9f} Gamma*(0)={b.Gamma:.9f} in {elapsed:.2f}s")


def test_ocr_guarantee_exact(criterion):
    t0 = time.perf_counter()
    two = [(0, 1), (0, 1)]
    nine = enumerate_exact_dmu(two, 2).mean[1][0]
    oracle = brute_force_dmu(two, 2)[1][0]
    traces = load_traces()
    shape = (len(traces) >= 20 and all(c.randomized_rounds <= 10 for c in traces)
             and {c.d for c in traces} == {1, 2, 3, 5})
    failed = [c.name for c in traces
              if not check_ocr_guarantee(enumerate_exact_dmu(c.queries, c.d), GAMMA, z=0).passed]
    elapsed = time.perf_counter() - t0
    ok = nine == oracle == F(9, 32) and shape and not failed and elapsed < 60
    assert criterion(4, ok, f"dmu={nine} oracle={oracle}; {len(traces)} traces, failures={failed} "
                            f"in {elapsed:.2f}s")


def test_ocr_guarantee_monte_carlo(criterion):
    t0 = time.perf_counter()
    traces = load_traces(kind="long_traces")
    failures, cells = [], 0
    for k, c in enumerate(traces):
        rep = check_ocr_guarantee(estimate_dmu(c.queries, c.d, MC_TRIALS, seed=5000 + k), GAMMA, z=3)
        cells += sum(x.case != "absent" for x in rep.cells)
        failures += [f"{c.name}@round{x.round + 1}/v{x.vertex + 1}({x.case}, z={x.z:.2f})" for x in rep.failures]
    elapsed = time.perf_counter() - t0
    shape = len(traces) >= 20 and all(len(c.queries) <= 30 for c in traces)
    ok = shape and not failures and elapsed < 600
    assert criterion(5, ok, f"{len(traces)} traces, {cells} cells at 3 sigma, failures={failures} "
                            f"in {elapsed:.1f}s")


def test_competitiveness(criterion):
    t0 = time.perf_counter()
    params = analytic_params(GAMMA)
    cases = [c for c in load_instances() if c.name.startswith("random-")]
    below, greedy_bad, worst = [], [], math.inf
    for k, c in enumerate(cases):
        inst = c.instance
        opt = exact_opt(inst)
        s = matched_count_samples(inst, plan_queries(inst, params), "ocr", 10**5, seed=6000 + k)
        sigma = s.std(ddof=1) / math.sqrt(len(s))
        if s.mean() < 0.505 * opt - 3 * sigma:
            below.append(c.name)
        if opt:
            worst = min(worst, s.mean() / opt)
        if 2 * run_greedy(inst) < opt:
            greedy_bad.append(c.name)
    elapsed = time.perf_counter() - t0
    shape = len(cases) == 50 and all(c.instance.num_offline <= 6 and c.instance.num_online <= 20
                                     and c.instance.duration <= 4 for c in cases)
    ok = shape and not below and not greedy_bad and elapsed < 900
    assert criterion(6, ok, f"50 instances x 1e5 trials; worst mean/opt={worst:.4f}; below={below} "
                            f"greedy_below_half={greedy_bad} in {elapsed:.1f}s")


def test_dual_audit(criterion):
    params = analytic_params(GAMMA)
    worst, unbalanced, runs = math.inf, [], 0
    for c in load_instances():
        for seed in range(3):
            r = run_primal_dual(c.instance, params, seed=seed, exact=True)
            runs += 1
            worst = min(worst, r.audit)
            if not (isinstance(r.primal, F) and r.primal == r.dual):
                unbalanced.append(c.name)
    ok = worst >= -1e-9 and not unbalanced
    assert criterion(7, ok, f"{runs} runs, min audit residual={float(worst):.3g}, unbalanced={unbalanced}")


def test_reversal_symmetry(criterion):
    t0 = time.perf_counter()
    short, long = load_traces(), load_traces(kind="long_traces")
    enum_sized = [c for c in short + long if c.randomized_rounds <= ENUM_LIMIT]
    exact_bad = [c.name for c in enum_sized if not check_reversal(c.queries, c.d).passed]
    mc_bad = [c.name for k, c in enumerate(long)
              if not check_reversal(c.queries, c.d, "mc", MC_TRIALS, seed=8000 + k).passed]
    elapsed = time.perf_counter() - t0
    ok = not exact_bad and not mc_bad
    assert criterion(8, ok, f"exact on {len(enum_sized)} traces failures={exact_bad}; "
                            f"MC on {len(long)} traces failures={mc_bad} in {elapsed:.1f}s")


def test_full_duration_lp_integral(criterion):
    rng = np.random.default_rng(9000)
    gaps = []
    for k in range(20):
        u = int(rng.integers(2, 9))
        inst = gen_random(int(rng.integers(2, 6)), u, 0.5, u, seed=9100 + k)
        gaps.append(abs(float(lp_upper_bound(inst).value) - exact_opt(inst)))
    ok = max(gaps) <= 1e-9
    assert criterion(9, ok, f"20 instances with d=|U|, max |lp - opt| = {max(gaps):.2e}")
