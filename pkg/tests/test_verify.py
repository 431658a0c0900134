import random
from fractions import Fraction as F

import pytest

from rentmatch.corpus import load_traces
from rentmatch.verify import (CoinSpaceExceeded, check_ocr_guarantee, check_reversal, enumerate_exact_dmu,
                              estimate_dmu, window_mass_ok)

from oracles import brute_force_dmu

TWO_PAIRS = [(0, 1), (0, 1)]


def _random_trace(rnd, n_max=4, length=6):
    n = rnd.randint(2, n_max)
    out = []
    for _ in range(rnd.randint(1, length)):
        x = rnd.random()
        out.append(None if x < 0.1 else (rnd.randrange(n),) if x < 0.35 else tuple(rnd.sample(range(n), 2)))
    return out


def test_enumeration_examples():
    assert enumerate_exact_dmu(TWO_PAIRS, 2).mean[1][0] == F(9, 32)
    assert enumerate_exact_dmu([(0,)], 1).mean[0][0] == 1
    assert enumerate_exact_dmu([(0, 1)], 3).mean[0] == [F(1, 2), F(1, 2)]


def test_enumeration_against_brute_force():
    rnd = random.Random(7)
    for _ in range(60):
        qs = _random_trace(rnd)
        d = rnd.choice([1, 2, 3, 5])
        ours = enumerate_exact_dmu(qs, d)
        ref = brute_force_dmu(qs, d)
        n = len(ref[0]) if ref else 0
        assert [row[:n] for row in ours.mean] == ref


def test_coin_space_limit():
    with pytest.raises(CoinSpaceExceeded):
        enumerate_exact_dmu([(0, 1)] * 13, 2)
    assert enumerate_exact_dmu([(0, 1)] * 13, 2, max_randomized=13).exact


def test_guarantee_checker_examples():
    table = enumerate_exact_dmu(TWO_PAIRS, 2)
    rep = check_ocr_guarantee(table, F(1, 32))
    assert rep.passed
    cell = next(c for c in rep.cells if (c.vertex, c.round) == (0, 1))
    assert (cell.case, cell.bound) == ("correlated", F(17, 64))
    bad = check_ocr_guarantee(table, F(1, 2))
    assert {(c.vertex, c.round) for c in bad.failures} == {(0, 1), (1, 1)}
    assert "Singleton" in rep.notes


def test_singleton_after_recent_proposal_uses_deterministic_bound():
    rep = check_ocr_guarantee(enumerate_exact_dmu([(0, 1), (0,)], 3), F(1, 32))
    cell = next(c for c in rep.cells if (c.vertex, c.round) == (0, 1))
    assert cell.case == "deterministic" and cell.bound == F(1, 2) and cell.ok


def test_uniform_selector_is_zero_ocr():
    rnd = random.Random(3)
    for _ in range(30):
        qs = _random_trace(rnd)
        d = rnd.choice([1, 2, 3])
        assert check_ocr_guarantee(enumerate_exact_dmu(qs, d, "uniform"), 0).passed


def test_window_mass_bound():
    rnd = random.Random(9)
    for _ in range(30):
        assert window_mass_ok(enumerate_exact_dmu(_random_trace(rnd), rnd.choice([2, 3, 5])))


def test_estimates():
    est = estimate_dmu(TWO_PAIRS, 2, 10**6, seed=1)
    se = est.se[1][0]
    assert abs(float(est.mean[1][0]) - 9 / 32) <= 3 * se
    assert abs(se - (float(est.mean[1][0]) * (1 - float(est.mean[1][0])) / 10**6) ** 0.5) < 1e-15
    uni = estimate_dmu(TWO_PAIRS, 2, 10**5, seed=2, selector="uniform")
    assert abs(float(uni.mean[1][0]) - 0.25) <= 3 * uni.se[1][0]
    det = estimate_dmu([(0,), (0,), (1,), (0,)], 2, 1000, seed=0)
    assert [row[0] for row in det.mean] == [1, 0, 0, 1]
    assert estimate_dmu(TWO_PAIRS, 2, 5000, seed=4).mean == estimate_dmu(TWO_PAIRS, 2, 5000, seed=4).mean


def test_exact_and_monte_carlo_agree_on_corpus():
    # seeds fixed before the first run: 7000 + index
    disagreements = []
    for k, case in enumerate(load_traces()):
        ex = enumerate_exact_dmu(case.queries, case.d)
        mc = estimate_dmu(case.queries, case.d, 10**5, seed=7000 + k, num_offline=ex.num_offline)
        for j, row in enumerate(ex.mean):
            for v, m in enumerate(row):
                if abs(float(mc.mean[j][v] - m)) > 3 * mc.se[j][v]:
                    disagreements.append((case.name, j, v))
    assert not disagreements


def test_reversal_exact():
    assert check_reversal([(0, 1)], 2).passed
    rep = check_reversal(TWO_PAIRS, 2)
    assert rep.passed and rep.vertices[0].diff == 0
    rnd = random.Random(5)
    for _ in range(40):
        assert check_reversal(_random_trace(rnd, length=8), rnd.choice([1, 2, 3, 5])).passed


def test_reversal_monte_carlo_mixed_trace():
    trace = [(0, 1), (1, 2), (0,), (0, 2), (1, 2), (0, 1), (2,), (0, 1)]
    rep = check_reversal(trace, 3, mode="mc", trials=10**6, seed=5)
    assert rep.passed and len(rep.vertices) == 3


def test_reversal_unknown_mode():
    with pytest.raises(ValueError):
        check_reversal(TWO_PAIRS, 2, mode="bogus")


def test_long_traces_hold_exactly():
    # state merging keeps the exact distribution small even past the default coin limit
    for case in load_traces(kind="long_traces"):
        table = enumerate_exact_dmu(case.queries, case.d, max_randomized=64)
        assert check_ocr_guarantee(table, F(1, 32)).passed, case.name
    long10 = next(c for c in load_traces(kind="long_traces") if c.name == "long-10")
    table = enumerate_exact_dmu(long10.queries, long10.d, max_randomized=64)
    cell = next(c for c in check_ocr_guarantee(table, F(1, 32)).cells if (c.vertex, c.round) == (0, 8))
    assert cell.case == "fresh" and cell.dmu == cell.bound == F(1, 2)
