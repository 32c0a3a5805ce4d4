"""Exit criteria. Each test reports one PASS/FAIL line (shown in the summary)."""
import filecmp
import math
import os
import subprocess
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from seqbell.core import (
    A_PRIME,
    B_PRIME,
    MeasurementBasis,
    correlator_exact,
    inject,
    make_bec_ancilla,
    make_custom_ancilla,
    next_pair_coherence,
    outcome_distribution,
    pair_density_matrix,
)
from seqbell.ensemble import SimulationConfig, run_ensemble
from seqbell.oracle import (
    build_full_state,
    exact_outcome_distribution,
    sequential_outcome_distribution,
    total_variation,
    wootters_concurrence,
)
from seqbell.protocol import make_schedule

TOL = 1e-12
THIRD = math.pi / 3
R = 10_000


@lru_cache(maxsize=None)
def ensemble(n, m, mode):
    return run_ensemble(SimulationConfig(n_ancilla=n, pairs=m, runs=R, mode=mode, master_seed=2026))


def test_1_exact_algebra(report):
    start = time.perf_counter()
    checks = {}
    checks["gamma(BEC N=1) = 1/2"] = abs(next_pair_coherence(make_bec_ancilla(1)) - 0.5)

    diag = MeasurementBasis("d", math.pi / 4)
    dist = outcome_distribution(inject(make_custom_ancilla([1, 1])), diag, diag)
    p_same = dist[(1, 1)][0] + dist[(-1, -1)][0]
    p_diff = dist[(1, -1)][0] + dist[(-1, 1)][0]
    g_same = [next_pair_coherence(dist[o][1]) for o in ((1, 1), (-1, -1))]
    g_diff = [next_pair_coherence(dist[o][1]) for o in ((1, -1), (-1, 1))]
    checks["P(same) = 3/4"] = abs(p_same - 0.75)
    checks["P(opposite) = 1/4"] = abs(p_diff - 0.25)
    checks["gamma after same = 2/3"] = max(abs(g - 2 / 3) for g in g_same)
    checks["gamma after opposite = 0"] = max(abs(g) for g in g_diff)
    mean_gamma = sum(dist[o][0] * next_pair_coherence(dist[o][1]) for o in dist)
    checks["(3/4)(2/3) + (1/4)(0) = 1/2"] = abs(mean_gamma - 0.5)

    s_ideal = (-correlator_exact(1, 0, 0) + correlator_exact(1, 0, THIRD)
               + correlator_exact(1, THIRD, 0) + correlator_exact(1, THIRD, THIRD))
    checks["S(gamma=1) = 5/2"] = abs(s_ideal - 2.5)
    gammas = np.linspace(-1, 1, 201)
    free = [-correlator_exact(g, 0, 0) + correlator_exact(g, 0, THIRD) + correlator_exact(g, THIRD, 0)
            for g in gammas]
    checks["-C_ab + C_ab' + C_a'b = 2"] = max(abs(f - 2) for f in free)
    agree = all((correlator_exact(g, THIRD, THIRD) > 0) == (g > 1 / 3)
                for g in gammas if abs(g - 1 / 3) > 1e-9)
    checks["violation iff gamma > 1/3"] = 0.0 if agree else 1.0
    checks["C_a'b' = 0 at gamma = 1/3"] = abs(correlator_exact(1 / 3, THIRD, THIRD))
    elapsed = time.perf_counter() - start

    worst = max(checks.values())
    ok = worst <= TOL and elapsed < 1
    report("1 exact algebra", ok, f"max error {worst:.2e} (tol 1e-12) over {len(checks)} checks, "
                                  f"{elapsed:.3f}s")
    for name, err in checks.items():
        assert err <= TOL, name
    assert elapsed < 1


def test_2_oracle_equivalence(report):
    start = time.perf_counter()
    rng = np.random.default_rng(20)
    worst = 0.0
    for n in (0, 1, 2):
        for m in range(1, 7):
            for _ in range(20):
                schedule = make_schedule(m, "uniform", rng)
                full = exact_outcome_distribution(build_full_state(n, m), schedule)
                seq = sequential_outcome_distribution(make_bec_ancilla(n), schedule)
                worst = max(worst, total_variation(full, seq))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 60
    report("2 oracle equivalence", ok, f"max TV {worst:.2e} (tol 1e-10), 360 schedules, {elapsed:.1f}s")
    assert worst <= 1e-10
    assert elapsed < 60


def test_3_concurrence(report):
    start = time.perf_counter()
    grid = np.linspace(0, 1, 21)
    worst = max(abs(wootters_concurrence(pair_density_matrix(g)) - g) for g in grid)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1
    report("3 concurrence = gamma", ok, f"max error {worst:.2e} (tol 1e-10), {elapsed:.3f}s")
    assert ok


@pytest.mark.slow
def test_4_fig4_reproduction(report):
    fresh400, fresh800 = ensemble(1, 400, "fresh"), ensemble(1, 800, "fresh")
    reused400, reused800 = ensemble(1, 400, "reused"), ensemble(1, 800, "reused")
    results = {
        "fresh mean 0.125 +- 0.005": abs(fresh400.mean_c - 0.125) <= 0.005,
        "fresh std 0.0995 +- 10%": abs(fresh400.std_c - 0.0995) <= 0.00995,
        "reused mean 0.125 +- 0.02": abs(reused400.mean_c - 0.125) <= 0.02,
        "reused std ratio in [0.85, 1.15]": 0.85 <= reused400.std_c / reused800.std_c <= 1.15,
        "fresh std ratio in [1.30, 1.53]": 1.30 <= fresh400.std_c / fresh800.std_c <= 1.53,
    }
    detail = (f"fresh mean {fresh400.mean_c:.4f} std {fresh400.std_c:.4f}; "
              f"reused mean {reused400.mean_c:.4f}; "
              f"reused std {reused400.std_c:.4f}/{reused800.std_c:.4f} = "
              f"{reused400.std_c / reused800.std_c:.3f}; "
              f"fresh std ratio {fresh400.std_c / fresh800.std_c:.3f}")
    ok = all(results.values())
    report("4 N=1 reused vs fresh", ok, detail)
    assert ok, {k: v for k, v in results.items() if not v}


@pytest.mark.slow
def test_5_fig5_reproduction(report):
    reused = ensemble(0, 400, "reused")
    fresh400, fresh800 = ensemble(0, 400, "fresh"), ensemble(0, 800, "fresh")
    results = {
        "reused P(violation) in [0.35, 0.45]": 0.35 <= reused.violation_probability <= 0.45,
        "fresh P(violation) decreasing in M": fresh400.violation_probability > fresh800.violation_probability,
        "fresh P(violation) < 0.05": max(fresh400.violation_probability,
                                         fresh800.violation_probability) < 0.05,
        "fresh mean -0.25 +- 0.005": abs(fresh400.mean_c + 0.25) <= 0.005,
    }
    detail = (f"reused P(violation) {reused.violation_probability:.4f} (mean {reused.mean_c:.4f}); "
              f"fresh P(violation) {fresh400.violation_probability:.4f} (M=400) "
              f"> {fresh800.violation_probability:.4f} (M=800); fresh mean {fresh400.mean_c:.4f}")
    ok = all(results.values())
    report("5 N=0 probabilistic violation", ok, detail)
    assert ok, {k: v for k, v in results.items() if not v}


def test_6_conditional_evolution(report):
    dist = outcome_distribution(inject(make_bec_ancilla(0)), A_PRIME, B_PRIME)
    p, post = dist[(1, 1)]
    gamma = next_pair_coherence(post)
    ok = abs(gamma - 0.5) <= TOL
    report("6 conditional evolution", ok, f"P(+,+) = {p:.6f}, next gamma = {gamma.real:.15f}")
    assert ok


def _cli(out, threads):
    env = dict(os.environ, SEQBELL_THREADS=str(threads))
    subprocess.run(
        [sys.executable, "-m", "seqbell", "--n-ancilla", "0", "--pairs", "400", "--runs", "600",
         "--seed", "17", "--out", str(out)],
        env=env, check=True, capture_output=True,
    )


def test_7_determinism(tmp_path, report):
    _cli(tmp_path / "a", 1)
    _cli(tmp_path / "b", 1)
    _cli(tmp_path / "c", 2)
    names = ["histogram.csv", "runs.csv", "summary.json"]
    same = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)[0]
    threads = filecmp.cmpfiles(tmp_path / "a", tmp_path / "c", names, shallow=False)[0]
    ok = same == names and threads == names
    report("7 determinism", ok, f"identical reruns {len(same)}/3 files, "
                                f"SEQBELL_THREADS 1 vs 2 {len(threads)}/3 files")
    assert ok
