"""Acceptance criteria 1 to 9, one test each.

Every test prints a single ``[criterion N] PASS|FAIL`` line (outside pytest's
capture) before asserting, so ``pytest -v`` output carries the verdicts.
Run standalone with ``python tests/test_acceptance.py``.
"""

import json
import math
import sys
import time

import numpy as np
import pytest

from isac_region import (
    FblQuery,
    brute_force_best,
    build_estimator,
    check_degraded,
    cli,
    delta_distortion,
    evaluate_point,
    expected_distortion,
    explicit_bounds,
    normal_approx_rates,
    q_func,
    q_inv,
    sweep_frontier,
)
from isac_region.fbl import default_gammas
from isac_region.fixtures import cascade, clean_legit_bsc_eav, uniform_x_aux, wiretap_bsc, x_bypass
from isac_region.io import dump_aux, dump_spec
from isac_region.osrb import SimConfig, rates_inside_sufficient, run

from conftest import random_aux, random_spec
from test_estimator import with_distortion
from test_fbl import enumerate_masses, mp_q_inv, two_point_dispersion


def hb(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_1_closed_form_recovery(capsys):
    target_sum, target_secure = 1.0 - 1e-3, hb(0.11) - 1e-3
    t0 = time.perf_counter()
    frontier = sweep_frontier(clean_legit_bsc_eav(0.11))
    elapsed = time.perf_counter() - t0
    best = max(frontier.points, key=lambda p: (p.r1_plus_r2_max >= target_sum, p.r2_max))
    ok = best.r1_plus_r2_max >= target_sum and best.r2_max >= target_secure and elapsed <= 60
    verdict(
        capsys, 1, ok,
        f"best point ({best.r1_plus_r2_max:.6f}, {best.r2_max:.6f}) vs "
        f"(>= {target_sum:.3f}, >= {target_secure:.6f}) in {elapsed:.1f}s",
    )


def test_criterion_2_degradedness(capsys):
    t0 = time.perf_counter()
    good = check_degraded(cascade())
    t1 = time.perf_counter()
    bad = check_degraded(x_bypass())
    t2 = time.perf_counter()
    ctx = bad.violating_context or {}
    ok = (
        good.is_degraded and good.residual <= 1e-12 and not bad.is_degraded
        and set(ctx) == {"A", "X", "S1", "Y1"} and t1 - t0 < 1 and t2 - t1 < 1
    )
    verdict(
        capsys, 2, ok,
        f"cascade residual {good.residual:.1e} ({t1 - t0:.3f}s); bypass violating context {ctx} ({t2 - t1:.3f}s)",
    )


def test_criterion_3_estimator_optimality(capsys):
    worst, count = 0.0, 0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        # (A, X, Y1, Y2) has 8 contexts; S1 and the estimate alphabet have 2 or 3 letters
        sizes = {"A": 2, "X": 2, "S1": int(rng.integers(2, 4)), "S2": 2, "Y1": 2, "Y2": 1}
        if seed % 2:
            sizes.update(A=1, Y2=2)
        spec = random_spec(rng, sizes, sparsity=0.2)
        spec = with_distortion(spec, 1, rng.random((sizes["S1"], int(rng.integers(2, 4)))))
        aux = random_aux(rng, spec, sparsity=0.2)
        for j in (1, 2):
            value = brute_force_best(spec, aux, j)[1]
            worst = max(worst, abs(expected_distortion(spec, aux, build_estimator(spec, aux, j)) - value))
            count += 1
    verdict(capsys, 3, worst <= 1e-12, f"100 instances x {count // 100} states, max |argmin table - brute force| = {worst:.1e}")


def test_criterion_4_fbl_convergence(capsys):
    spec = clean_legit_bsc_eav(0.1)
    aux = uniform_x_aux(spec)
    point = evaluate_point(spec, aux)
    q = FblQuery(n=100, delta_r=1e-3, delta_sec=1e-3, theta=0.5, third_order_c=0.0)
    grid = [10**k for k in range(2, 7)]
    rows = [normal_approx_rates(spec, aux, q.with_n(n)) for n in grid]
    gap_sum = point.r1_plus_r2_max - rows[-1].r1_plus_r2_max
    gap_secure = point.r2_max - rows[-1].r2_max
    monotone = all(
        a.r1_plus_r2_max <= b.r1_plus_r2_max and a.r2_max < b.r2_max for a, b in zip(rows, rows[1:])
    )
    # Independent figure for the secure-rate gap: q_inv(theta * delta_sec) * sqrt(V / n)
    predicted = mp_q_inv(5e-4) * math.sqrt(two_point_dispersion(0.1) / 1e6)
    parts = {
        "sum-rate gap <= 2e-3": gap_sum <= 2e-3,
        "secure-rate gap <= 2e-3": gap_secure <= 2e-3,
        "monotone in n": monotone,
    }
    detail = (
        f"n=1e6 gaps r1+r2 {gap_sum:.2e}, r2 {gap_secure:.2e} (dispersion penalty {predicted:.2e}); "
        + ", ".join(f"{k}: {'ok' if v else 'no'}" for k, v in parts.items())
    )
    verdict(capsys, 4, all(parts.values()), detail)


def test_criterion_5_explicit_bound_exactness(capsys):
    worst = 0.0
    cases = [(wiretap_bsc(0.05, 0.2), n) for n in (1, 2, 3, 4)] + [(cascade(), 2), (cascade(), 3)]
    rates, gammas = (0.13, 0.21, 0.37), (0.4, 0.3, 0.2)
    for spec, n in cases:
        aux = uniform_x_aux(spec)
        terms = explicit_bounds(spec, aux, n, rates, gammas)
        masses, union = enumerate_masses(spec, aux, n, rates, gammas)
        worst = max(worst, *np.abs(np.subtract(terms.atypical_masses, masses)), abs(terms.p_union - union))
    m1, m2, m3 = terms.atypical_masses
    g1, g2, g3 = gammas
    identities = (
        terms.eps_apx == m1 + 2.0 ** (-(g1 + 1) / 2)
        and terms.eps_dec == m2 + 2.0 ** (-g2)
        and terms.eps_sec == m3 + 2.0 ** (-(g3 + 1) / 2)
        and terms.eps_tot == 2 * terms.eps_apx + terms.eps_sec + 4 * terms.eps_dec
        and terms.eps_fixed_f == 2 * terms.eps_tot
    )
    verdict(
        capsys, 5, worst <= 1e-12 and identities,
        f"{len(cases)} fixtures with n <= 4, max mass error {worst:.1e}; epsilon identities exact: {identities}",
    )


def test_criterion_6_simulator_vs_theory(capsys):
    spec = wiretap_bsc(0.02, 0.2)
    aux = uniform_x_aux(spec)
    n, trials = 6, 10**4
    bins = rates_inside_sufficient(spec, aux, n, margin=0.2)
    rates = tuple(math.log2(b) / n for b in bins)
    # binning rates (R1, R2, R_tilde) map to the bound's (M1, M2, F) indices
    terms = explicit_bounds(spec, aux, n, rates, default_gammas(n))
    t0 = time.perf_counter()
    shared = run(SimConfig(spec, aux, n, bins, trials=trials, master_seed=0, f_mode="uniform"))
    fixed = run(SimConfig(spec, aux, n, bins, trials=trials, master_seed=0))
    elapsed = time.perf_counter() - t0
    sigma = math.sqrt(shared.error_rate * (1 - shared.error_rate) / trials)
    err_ok = shared.error_rate <= terms.reliability_bound + 3 * sigma
    sec_ok = fixed.secrecy_tv <= terms.secrecy_bound
    verdict(
        capsys, 6, err_ok and sec_ok and elapsed <= 300,
        f"bins {bins}: error {shared.error_rate:.4f} vs bound {terms.reliability_bound:.4f} + 3 sd; "
        f"secrecy TV at f* {fixed.secrecy_tv:.4f} vs bound {terms.secrecy_bound:.4f}; {elapsed:.1f}s",
    )


def test_criterion_7_delta_distortion(capsys):
    value = delta_distortion(n=100, epsilon_d=0.1, d_j=0.1, mu=0.05, n_states=2, n_estimates=2, d_max=1.0)
    oracle = 0.12 + 8 * math.exp(-0.1)
    verdict(capsys, 7, abs(value - oracle) <= 1e-12, f"{float(value)!r} vs {oracle!r}")


def test_criterion_8_q_inv_accuracy(capsys):
    grid = np.logspace(-9, math.log10(1 - 1e-9), 10**4)
    worst = max(abs(q_func(q_inv(p)) - p) for p in grid)
    verdict(capsys, 8, worst <= 1e-10, f"{grid.size} points in [1e-9, 1-1e-9], max |Q(q_inv(p)) - p| = {worst:.1e}")


def test_criterion_9_reproducibility(capsys, tmp_path):
    spec = cascade(p_noise=0.1)
    dump_spec(spec, tmp_path / "spec.json")
    dump_aux(uniform_x_aux(spec), tmp_path / "aux.json")
    (tmp_path / "sim.json").write_text(
        json.dumps({"spec": "spec.json", "aux": "aux.json", "n": 4, "bins": [2, 2, 2], "trials": 2000})
    )

    def payload(path):
        return json.dumps(json.loads(path.read_text())["result"], sort_keys=True).encode()

    outputs = {}
    for tag, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        cli.main(["--threads", threads, "region", str(tmp_path / "spec.json"), "--restarts", "3",
                  "--iters", "40", "--seed", "7", "--out", str(tmp_path / f"region_{tag}")])
        cli.main(["--threads", threads, "simulate", str(tmp_path / "sim.json"), "--seed", "7",
                  "--out", str(tmp_path / f"sim_{tag}.json")])
        outputs[tag] = (
            payload(tmp_path / f"region_{tag}.json"),
            (tmp_path / f"region_{tag}.csv").read_text().split("\n", 1)[1].encode(),
            payload(tmp_path / f"sim_{tag}.json"),
        )
    ok = outputs["a"] == outputs["b"] == outputs["c"]
    verdict(capsys, 9, ok, "region JSON/CSV and simulate JSON identical over 2 runs and 1 vs 4 threads")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
