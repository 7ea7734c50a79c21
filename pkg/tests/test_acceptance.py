"""Acceptance criteria, one test per criterion.

Each test logs a single PASS/FAIL line (shown in the terminal summary) before
asserting, so a failing criterion still reports its measured values.
"""
import math
import time

import numpy as np
import pytest

from bootcheck import cli
from bootcheck.diagnostics import LIMIT, LadderSpec, check_assertion_a, check_assertion_c, check_assertion_d
from bootcheck.inference import inference_experiment
from bootcheck.metrics import bl_distance, bl_distance_oracle, kolmogorov_distance
from bootcheck.selftest import duality_failures, kolmogorov_bruteforce, random_pair, random_replicate_set
from bootcheck.statistics import mean_root, uniform_max

SEED = 2024


def verdict(log, k, ok, detail):
    log.append(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_bl_solver_matches_vertex_oracle(acceptance_log):
    rng = np.random.default_rng([SEED, 1])
    pairs = [random_pair(rng, 6, dim=1 if k % 3 else 2) for k in range(500)]
    start = time.perf_counter()
    worst = max(abs(bl_distance(p, q) - bl_distance_oracle(p, q)) for p, q in pairs)
    elapsed = time.perf_counter() - start
    verdict(
        acceptance_log, 1, worst <= 1e-9 and elapsed < 10.0,
        f"500 pairs, max |solver - oracle| = {worst:.3g} (<= 1e-9), {elapsed:.1f} s (< 10 s)",
    )


def test_criterion_02_adjacent_constraints_suffice_in_1d(acceptance_log):
    rng = np.random.default_rng([SEED, 2])
    pairs = [random_pair(rng, 50, dim=1) for _ in range(200)]
    start = time.perf_counter()
    worst = max(
        abs(bl_distance(p, q, constraints="adjacent") - bl_distance(p, q, constraints="all"))
        for p, q in pairs
    )
    elapsed = time.perf_counter() - start
    verdict(
        acceptance_log, 2, worst <= 1e-9 and elapsed < 30.0,
        f"200 instances, max |adjacent - all| = {worst:.3g} (<= 1e-9), {elapsed:.1f} s (< 30 s)",
    )


def test_criterion_03_kolmogorov_is_exact(acceptance_log):
    rng = np.random.default_rng([SEED, 3])
    mismatches = 0
    for k in range(500):
        p, q = random_pair(rng, 10, dim=1 if k % 2 else 2)
        mismatches += kolmogorov_distance(p, q) != kolmogorov_bruteforce(p, q)
    verdict(acceptance_log, 3, mismatches == 0, f"500 instances, {mismatches} bitwise mismatches (0)")


@pytest.mark.slow
def test_criterion_04_ladder_trend(acceptance_log):
    ladder = LadderSpec((50, 200, 800), (50, 200, 800), outer_reps=200, oracle_reps=4000)
    start = time.perf_counter()
    rep = check_assertion_d(mean_root(), "Multinomial", ladder, SEED)
    elapsed = time.perf_counter() - start
    meds = [rep.summary(n, m).median["d_k"] for n, m in ladder.diagonal]
    ok = meds[0] > meds[1] > meds[2] and meds[2] < 0.08 and elapsed < 300.0
    verdict(
        acceptance_log, 4, ok,
        "median d_K " + " > ".join(f"{v:.4f}" for v in meds)
        + f" (strict decrease, final < 0.08), {elapsed:.0f} s (< 300 s)",
    )


@pytest.mark.slow
def test_criterion_05_consistent_pair_gaps(acceptance_log):
    rep = check_assertion_a(mean_root(), "Multinomial", [800], 2000, SEED)[800]
    marg = max(rep.marginal_dk)
    lim = max(rep.limit_gaps.values())
    own = max(rep.independence_gaps.values())
    ok = marg < 0.05 and lim < 0.05 and own < 0.05
    verdict(
        acceptance_log, 5, ok,
        f"max marginal d_K {marg:.4f}, max gap to limit product {lim:.4f}, "
        f"max gap to own marginals {own:.4f} (all < 0.05)",
    )


@pytest.mark.slow
def test_criterion_06_negative_control(acceptance_log):
    rep = check_assertion_a(uniform_max(), "Multinomial", [500], 2000, SEED)[500]
    cond = check_assertion_c(
        uniform_max(), "Multinomial", 500, 1000, 2000, 4000, SEED, oracle=LIMIT, with_bl=False
    )
    zero_ok = abs(rep.zero_freq - 0.632) <= 0.03
    gap = rep.limit_gaps["S1,S2"]
    worst = float(cond.d_k.min())
    ok = zero_ok and gap > 0.10 and worst >= 0.55
    verdict(
        acceptance_log, 6, ok,
        f"atom frequency at 0 {rep.zero_freq:.4f} (0.632 +- 0.03), (S1, S2) gap {gap:.4f} (> 0.10), "
        f"min conditional d_K over {cond.d_k.size} datasets {worst:.4f} (>= 0.55)",
    )


@pytest.fixture(scope="module")
def normal_mean_inference():
    return inference_experiment(mean_root(), "Multinomial", 200, 500, 2000, 0.10, SEED)


@pytest.mark.slow
def test_criterion_07_coverage(acceptance_log, normal_mean_inference):
    cov = normal_mean_inference.coverage
    verdict(acceptance_log, 7, 0.88 <= cov <= 0.92, f"coverage {cov:.4f} in [0.88, 0.92] at N=2000")


@pytest.mark.slow
def test_criterion_08_pvalue_uniformity(acceptance_log, normal_mean_inference):
    d = normal_mean_inference.pvalue_dk
    verdict(acceptance_log, 8, d < 0.05, f"d_K(p-values, U(0,1)) {d:.4f} (< 0.05) at N=2000")


@pytest.mark.slow
def test_criterion_09_worker_count_determinism(acceptance_log, tmp_path, capsys):
    codes = []
    for workers in (1, 8):
        codes.append(cli.main(["run", "--out", str(tmp_path / f"w{workers}"), "--workers", str(workers)]))
    capsys.readouterr()
    a = (tmp_path / "w1" / "records.jsonl").read_bytes()
    b = (tmp_path / "w8" / "records.jsonl").read_bytes()
    lines = a.count(b"\n")
    verdict(
        acceptance_log, 9, a == b and codes == [0, 0],
        f"default experiment, {lines} records, workers 1 vs 8 byte-identical: {a == b}, exit codes {codes}",
    )


def test_criterion_10_inference_dualities(acceptance_log):
    rng = np.random.default_rng([SEED, 10])
    failures = []
    for k in range(10_000):
        bad = duality_failures(random_replicate_set(rng), rng)
        if bad:
            failures.append((k, bad))
    verdict(
        acceptance_log, 10, not failures,
        f"10000 tie-free replicate sets, {len(failures)} violations (0)"
        + (f"; first: {failures[0]}" if failures else ""),
    )
