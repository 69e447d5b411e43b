import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from isac_region import (
    AuxDist,
    SecrecyRegionSearch,
    UsageError,
    brute_force_best,
    evaluate_point,
    sweep_frontier,
    weighted_scalarization,
)
from isac_region.fixtures import bsc, build_spec, cascade, clean_legit_bsc_eav, uniform_x_aux, x_bypass
from isac_region.region import CSV_COLUMNS, RegionPoint, pareto_prune

from conftest import random_aux, random_degraded_spec, random_spec


def hb(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_constant_eavesdropper_gives_full_secrecy():
    spec = build_spec({"X": 2, "Y1": 2}, lambda *a: 1.0, lambda s1, s2, x, y1, y2: bsc(0.2)[x, y1])
    p = evaluate_point(spec, uniform_x_aux(spec))
    assert p.i_eav == 0.0
    assert p.r2_max == p.r1_plus_r2_max == pytest.approx(1 - hb(0.2), abs=1e-12)


def test_independent_aux_gives_zero_rates():
    spec = cascade()
    p = evaluate_point(spec, AuxDist.from_mass(spec, np.full((3, 2, 2), 1 / 12)))
    assert p.r1_plus_r2_max == 0.0 and p.r2_max == 0.0


def test_clean_legit_closed_form():
    p = evaluate_point(clean_legit_bsc_eav(0.11), uniform_x_aux(clean_legit_bsc_eav(0.11)))
    assert p.r1_plus_r2_max == pytest.approx(1.0, abs=1e-12)
    assert p.r2_max == pytest.approx(hb(0.11), abs=1e-12)
    assert p.r2_max == pytest.approx(0.499916, abs=1e-6)
    assert not p.inner_bound_only


def test_identical_outputs_zero_secure_rate():
    spec = build_spec(
        {"X": 2, "Y1": 2, "Y2": 2}, lambda *a: 1.0, lambda s1, s2, x, y1, y2: bsc(0.1)[x, y1] * (y1 == y2)
    )
    frontier = sweep_frontier(spec, restarts=2, iterations=40)
    assert all(p.r2_max == 0.0 for p in frontier.points)


def test_no_op_search_returns_initial_points():
    spec = cascade()
    search = SecrecyRegionSearch(restarts=1, iterations=0, seed=5, prune=False, weights=[(1, 0, 0, 0), (0, 1, 0, 0)])
    frontier = search.fit(spec).frontier_
    init = evaluate_point(spec, search.initial_point(spec, 0))
    assert len(frontier.points) == 2
    for p in frontier.points:
        np.testing.assert_array_equal(p.aux.mass, init.aux.mass)
        assert p.coords == init.coords


def test_sum_rate_weight_recovers_capacity():
    spec = clean_legit_bsc_eav(0.11)
    p = weighted_scalarization(spec, (1, 0, 0, 0), restarts=2, iterations=200)
    assert p.r1_plus_r2_max >= 1.0 - 1e-3


def test_distortion_weight_reaches_brute_force_minimum():
    rng = np.random.default_rng(3)
    spec = random_spec(rng, {"A": 2, "X": 2, "S1": 2, "S2": 2, "Y1": 2, "Y2": 2})
    # Bayes risk is linear in P(a, x) because the estimator sees (a, x), so the
    # minimum sits at a point-mass input; brute force each one.
    oracle = min(
        brute_force_best(spec, AuxDist.from_mass(spec, np.eye(4)[k].reshape(1, 2, 2)), 1)[1] for k in range(4)
    )
    p = weighted_scalarization(spec, (0, 0, 1, 0), restarts=2, iterations=800)
    assert p.d1 == pytest.approx(oracle, abs=1e-6)
    assert p.d1 >= oracle - 1e-12


def test_duplicate_calls_identical():
    spec = cascade()
    a = weighted_scalarization(spec, (1, 1, 0.5, 0.5), restarts=2, iterations=30, seed=9)
    b = weighted_scalarization(spec, (1, 1, 0.5, 0.5), restarts=2, iterations=30, seed=9)
    np.testing.assert_array_equal(a.aux.mass, b.aux.mass)
    assert a.as_dict() == b.as_dict()


def test_threads_do_not_change_results():
    spec = cascade()
    one = sweep_frontier(spec, restarts=3, iterations=20, n_jobs=1)
    many = sweep_frontier(spec, restarts=3, iterations=20, n_jobs=4)
    assert one.to_csv() == many.to_csv()


def test_bad_weights_rejected():
    with pytest.raises(UsageError):
        weighted_scalarization(cascade(), (0, 0, 0, 0))
    with pytest.raises(UsageError):
        weighted_scalarization(cascade(), (1, -1, 0, 0))


def test_non_degraded_points_tagged():
    p = evaluate_point(x_bypass(), uniform_x_aux(x_bypass()))
    assert p.inner_bound_only


def test_sklearn_interface():
    search = SecrecyRegionSearch(restarts=2, iterations=5)
    assert search.get_params()["restarts"] == 2
    twin = clone(search).set_params(iterations=0)
    assert twin.iterations == 0
    frontier = twin.fit(cascade()).frontier_
    assert "n_jobs" not in frontier.search_config


def test_csv_layout():
    frontier = sweep_frontier(cascade(), restarts=1, iterations=5)
    lines = frontier.to_csv().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == len(frontier.points) + 1
    assert "aux" in frontier.as_dict()["points"][0]


def test_pareto_prune_drops_dominated():
    aux = uniform_x_aux(cascade())
    mk = lambda r, s, d: RegionPoint(r, s, d, d, r, r - s, aux)  # noqa: E731
    kept = pareto_prune([mk(1, 0.5, 0.1), mk(0.9, 0.4, 0.2), mk(0.5, 0.5, 0.0)])
    assert [(p.r1_plus_r2_max, p.r2_max) for p in kept] == [(1, 0.5), (0.5, 0.5)]


@given(st.integers(0, 2**32 - 1))
def test_degraded_points_have_nonnegative_gap(seed):
    rng = np.random.default_rng(seed)
    spec = random_degraded_spec(rng, {"A": 2, "X": 2, "S1": 2, "S2": 2, "Y1": 2, "Y2": 2})
    p = evaluate_point(spec, random_aux(rng, spec, sparsity=0.2), degraded=True)
    assert p.i_legit >= p.i_eav - 1e-12
    assert 0.0 <= p.r2_max <= p.r1_plus_r2_max + 1e-15


@given(st.integers(0, 2**32 - 1))
def test_v_relabeling_invariance(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, {"A": 2, "X": 2, "S1": 2, "S2": 1, "Y1": 2, "Y2": 2})
    aux = random_aux(rng, spec)
    p = evaluate_point(spec, aux)
    q = evaluate_point(spec, aux.relabeled(rng.permutation(aux.V.size)))
    for a, b in zip(p.coords, q.coords):
        assert a == pytest.approx(b, abs=1e-12)


@settings(max_examples=10)
@given(st.integers(0, 1000), st.integers(1, 3))
def test_more_restarts_never_hurt(seed, extra):
    spec = cascade()
    w = (1.0, 1.0, 0.5, 0.5)
    few = weighted_scalarization(spec, w, restarts=1, iterations=10, seed=seed)
    more = weighted_scalarization(spec, w, restarts=1 + extra, iterations=10, seed=seed)
    assert more.objective(w) >= few.objective(w)
