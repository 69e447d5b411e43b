"""Asymptotic secrecy-distortion region for degraded ISAC channels with actions.

For an auxiliary law ``P(v, a, x)`` the region contains every
``(R1, R2, D1, D2)`` with

* ``R1 + R2 <= I(V; Y1, S1)``
* ``R2 <= I(V; Y1, S1) - I(V; Y2, S2)``
* ``Dj >= E[dj(Sj, Est_j(A, X, Y1, Y2))]`` with the optimal per-letter estimators.

The full region is the union over aux laws; :class:`SecrecyRegionSearch`
traces its Pareto frontier by multi-start local search on the simplex.
"""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
import io
import os
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import UsageError
from .channel import AuxDist, ChannelSpec, check_degraded, check_spec, joint_law
from .estimator import build_estimator, expected_distortion
from .prob import mutual_information

__all__ = [
    "RegionPoint",
    "FrontierSweep",
    "SecrecyRegionSearch",
    "evaluate_point",
    "weighted_scalarization",
    "sweep_frontier",
    "pareto_prune",
    "DEFAULT_WEIGHTS",
]

#: Scalarization weights (sum-rate, secure rate, D1, D2) tried by a default sweep.
DEFAULT_WEIGHTS = (
    (1.0, 0.0, 0.0, 0.0),
    (0.0, 1.0, 0.0, 0.0),
    (1.0, 1.0, 0.0, 0.0),
    (0.0, 0.0, 1.0, 0.0),
    (0.0, 0.0, 0.0, 1.0),
    (1.0, 1.0, 0.5, 0.5),
    (1.0, 1.0, 2.0, 2.0),
    (0.0, 1.0, 1.0, 1.0),
)

CSV_COLUMNS = ("r1_plus_r2", "r2", "d1", "d2", "i_legit", "i_eav", "restart", "seed")


@dataclass(eq=False)
class RegionPoint:
    """Corner point of the region contributed by one aux law."""

    r1_plus_r2_max: float
    r2_max: float
    d1: float
    d2: float
    i_legit: float
    i_eav: float
    aux: AuxDist
    inner_bound_only: bool = False
    restart: Optional[int] = None
    seed: Optional[int] = None

    def objective(self, weights):
        w_sum, w_sec, w_d1, w_d2 = weights
        return w_sum * self.r1_plus_r2_max + w_sec * self.r2_max - w_d1 * self.d1 - w_d2 * self.d2

    @property
    def coords(self):
        return (self.r1_plus_r2_max, self.r2_max, -self.d1, -self.d2)

    def as_dict(self, with_aux=True):
        out = {
            "r1_plus_r2": self.r1_plus_r2_max,
            "r2": self.r2_max,
            "d1": self.d1,
            "d2": self.d2,
            "i_legit": self.i_legit,
            "i_eav": self.i_eav,
            "inner_bound_only": self.inner_bound_only,
            "restart": self.restart,
            "seed": self.seed,
        }
        if with_aux:
            out["aux"] = {"V": list(self.aux.V.symbols), "p_vax": self.aux.mass.tolist()}
        return out


def evaluate_point(spec: ChannelSpec, aux: AuxDist, degraded: Optional[bool] = None) -> RegionPoint:
    """Rates and distortions attained by one aux law.

    On a channel that is not physically degraded the point is still
    achievable but the region may be larger; it is tagged
    ``inner_bound_only``. Pass ``degraded`` to skip the check.
    """
    if degraded is None:
        degraded = check_degraded(spec).is_degraded
    joint = joint_law(spec, aux)
    i_legit = mutual_information(joint, "V", ["Y1", "S1"])
    i_eav = mutual_information(joint, "V", ["Y2", "S2"])
    d = [expected_distortion(spec, aux, build_estimator(spec, aux, j, joint), joint) for j in (1, 2)]
    return RegionPoint(
        r1_plus_r2_max=i_legit,
        r2_max=max(0.0, i_legit - i_eav),
        d1=d[0],
        d2=d[1],
        i_legit=i_legit,
        i_eav=i_eav,
        aux=aux,
        inner_bound_only=not degraded,
    )


def _dominates(p, q):
    """True when coordinate tuple ``p`` Pareto-dominates ``q``."""
    return all(a >= b for a, b in zip(p, q)) and any(a > b for a, b in zip(p, q))


def pareto_prune(points):
    """Drop dominated and duplicate points, keeping first occurrences in order."""
    kept = []
    seen = set()
    for i, p in enumerate(points):
        key = tuple(round(c, 12) for c in p.coords)
        if key in seen:
            continue
        if any(_dominates(q.coords, p.coords) for j, q in enumerate(points) if j != i):
            continue
        seen.add(key)
        kept.append(p)
    return kept


@dataclass
class FrontierSweep:
    points: list
    search_config: dict
    dominated_pruned: bool = True
    weights: list = field(default_factory=list)

    def best(self, weights):
        return max(self.points, key=lambda p: p.objective(weights))

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in self.points:
            writer.writerow([
                repr(p.r1_plus_r2_max), repr(p.r2_max), repr(p.d1), repr(p.d2),
                repr(p.i_legit), repr(p.i_eav), p.restart, p.seed,
            ])
        return buf.getvalue()

    def as_dict(self):
        return {
            "search_config": self.search_config,
            "dominated_pruned": self.dominated_pruned,
            "points": [p.as_dict() for p in self.points],
        }


def _default_threads():
    env = os.environ.get("ISAC_REGION_THREADS")
    return int(env) if env else 1


class SecrecyRegionSearch(BaseEstimator):
    """Multi-start Dirichlet local search over aux laws ``P(v, a, x)``.

    Each restart starts from a point drawn from its own random stream
    ``(seed, restart)`` and proposes ``Dirichlet(kappa * P + alpha)``
    moves, accepting strict improvements of the scalarized objective. The
    concentration ``kappa`` grows geometrically, shrinking the step.

    Parameters
    ----------
    restarts : int
        Independent starts per weight vector. Restart 0 starts from the
        law where ``V`` names ``(a, x)`` and ``(A, X)`` is uniform.
    iterations : int
        Proposals per restart.
    kappa0, kappa_growth, kappa_max : float
        Step schedule: ``kappa_k = min(kappa0 * kappa_growth**k, kappa_max)``.
    alpha : float
        Floor added to the Dirichlet concentration so empty cells can revive.
    seed : int
        Master seed.
    weights : sequence of 4-tuples, optional
        Scalarizations used by :meth:`fit`; defaults to :data:`DEFAULT_WEIGHTS`.
    v_size : int, optional
        Aux alphabet size; defaults to the cardinality bound ``|X||A|+1``.
    n_jobs : int, optional
        Worker threads; defaults to ``$ISAC_REGION_THREADS`` or 1.
    prune : bool
        Remove Pareto-dominated points from the frontier.
    """

    def __init__(
        self,
        restarts=4,
        iterations=300,
        kappa0=20.0,
        kappa_growth=1.02,
        kappa_max=1e5,
        alpha=1e-3,
        seed=0,
        weights=None,
        v_size=None,
        n_jobs=None,
        prune=True,
    ):
        self.restarts = restarts
        self.iterations = iterations
        self.kappa0 = kappa0
        self.kappa_growth = kappa_growth
        self.kappa_max = kappa_max
        self.alpha = alpha
        self.seed = seed
        self.weights = weights
        self.v_size = v_size
        self.n_jobs = n_jobs
        self.prune = prune

    def _check_params(self):
        if self.restarts < 1 or self.iterations < 0:
            raise UsageError("restarts must be >= 1 and iterations >= 0")
        if not (self.kappa0 > 0 and self.kappa_growth >= 1 and self.alpha > 0):
            raise UsageError("step schedule parameters must be positive")

    def initial_point(self, spec, restart):
        """Starting aux law of ``restart``; depends only on ``(seed, restart)``."""
        v_size = self.v_size or spec.cardinality_bound
        if restart == 0 and v_size >= spec.A.size * spec.X.size:
            return AuxDist.identity(spec, v_size=v_size)
        rng = self._rng(restart, "init")
        mass = rng.dirichlet(np.ones(v_size * spec.A.size * spec.X.size))
        return AuxDist.from_mass(spec, mass.reshape(v_size, spec.A.size, spec.X.size))

    def _rng(self, restart, stream, salt=0):
        tag = {"init": 0, "move": 1}[stream]
        return np.random.default_rng([int(self.seed), int(restart), tag, int(salt)])

    def _local_search(self, spec, weights, restart, degraded, salt=0):
        aux = self.initial_point(spec, restart)
        best = evaluate_point(spec, aux, degraded)
        best_obj = best.objective(weights)
        rng = self._rng(restart, "move", salt)
        shape = aux.mass.shape
        for k in range(self.iterations):
            kappa = min(self.kappa0 * self.kappa_growth ** k, self.kappa_max)
            proposal = rng.dirichlet(kappa * best.aux.mass.reshape(-1) + self.alpha)
            cand_aux = AuxDist.from_mass(spec, proposal.reshape(shape), V=aux.V, tol=1e-6)
            cand = evaluate_point(spec, cand_aux, degraded)
            obj = cand.objective(weights)
            if obj > best_obj:
                best, best_obj = cand, obj
        best.restart = restart
        best.seed = int(self.seed)
        return best

    def _run_tasks(self, spec, tasks, degraded):
        threads = self.n_jobs or _default_threads()
        run = lambda t: self._local_search(spec, t[0], t[1], degraded, t[2])  # noqa: E731
        if threads <= 1 or len(tasks) == 1:
            return [run(t) for t in tasks]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, tasks))

    def maximize(self, spec: ChannelSpec, weights) -> RegionPoint:
        """Best point found for one scalarization ``(w_sum, w_sec, w_d1, w_d2)``."""
        self._check_params()
        weights = _check_weights(weights)
        check_spec(spec)
        degraded = check_degraded(spec).is_degraded
        tasks = [(weights, r, 0) for r in range(self.restarts)]
        results = self._run_tasks(spec, tasks, degraded)
        # max keeps the first maximal element, so ties resolve to the lowest restart.
        return max(results, key=lambda p: p.objective(weights))

    def fit(self, spec: ChannelSpec, y=None):
        self._check_params()
        check_spec(spec)
        degraded = check_degraded(spec).is_degraded
        weight_list = [_check_weights(w) for w in (self.weights or DEFAULT_WEIGHTS)]
        tasks = [(w, r, i) for i, w in enumerate(weight_list) for r in range(self.restarts)]
        points = self._run_tasks(spec, tasks, degraded)
        if self.prune:
            points = pareto_prune(points)
        self.frontier_ = FrontierSweep(
            points=points,
            search_config=self.search_config(),
            dominated_pruned=bool(self.prune),
            weights=[list(w) for w in weight_list],
        )
        return self

    def search_config(self):
        params = self.get_params()
        params.pop("n_jobs")  # execution detail, not part of the result
        params["weights"] = [list(w) for w in (self.weights or DEFAULT_WEIGHTS)]
        return params


def _check_weights(weights):
    w = tuple(float(v) for v in weights)
    if len(w) != 4:
        raise UsageError("weights are (w_sum, w_sec, w_d1, w_d2)")
    if any(v < 0 for v in w) or not any(v > 0 for v in w):
        raise UsageError("weights must be nonnegative and not all zero")
    return w


def weighted_scalarization(spec: ChannelSpec, weights, config=None, **params) -> RegionPoint:
    """Maximize ``w_sum (R1+R2) + w_sec R2 - w_d1 D1 - w_d2 D2`` over aux laws."""
    search = config if isinstance(config, SecrecyRegionSearch) else SecrecyRegionSearch(**{**(config or {}), **params})
    return search.maximize(spec, weights)


def sweep_frontier(spec: ChannelSpec, config=None, **params) -> FrontierSweep:
    """Trace the Pareto frontier by running the search for each scalarization."""
    search = config if isinstance(config, SecrecyRegionSearch) else SecrecyRegionSearch(**{**(config or {}), **params})
    return search.fit(spec).frontier_
