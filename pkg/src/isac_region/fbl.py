"""Finite-blocklength achievable rates and distortion slack.

Two evaluation modes are offered:

``normal``
    Gaussian (normal) approximation: the asymptotic rates minus
    ``Q^{-1}(budget) * sqrt(V / n)`` dispersion penalties and an optional
    ``c log2(n) / n`` third-order term.
``explicit``
    The non-asymptotic error terms of the random-binning argument, with the
    atypical-set masses computed exactly by n-fold convolution of the
    per-letter information values (a Berry-Esseen bound takes over when the
    exact support grows too large).
"""

from dataclasses import dataclass, field
import itertools
from math import comb
from typing import Optional

import numpy as np
from scipy.special import gammaln, ndtr, ndtri

from ._validation import DomainError, SizeError, UsageError, check_fraction, check_positive_int
from .channel import AuxDist, ChannelSpec, joint_law
from .estimator import EstimatorTable, build_estimator, context_state_law, expected_distortion
from .prob import info_density, marginalize, mutual_information

__all__ = [
    "q_func",
    "q_inv",
    "DispersionReport",
    "dispersions",
    "mu_min",
    "delta_distortion",
    "FblQuery",
    "FblResult",
    "ExplicitTerms",
    "normal_approx_rates",
    "explicit_bounds",
    "explicit_rates",
    "fbl_rates",
    "sensitivity_sweep",
    "letter_statistics",
    "SumDistribution",
    "BERRY_ESSEEN_C",
]

#: Berry-Esseen constant for sums of i.i.d. variables.
BERRY_ESSEEN_C = 0.5600
#: Per-letter information values are snapped to this grid before convolution.
GRID = 1e-12
#: Largest number of distinct sum values kept by exact convolution.
MAX_SUPPORT = 10**6


def q_func(x):
    """Standard normal tail probability ``Q(x) = P(N(0,1) > x)``."""
    return ndtr(-np.asarray(x, dtype=float))


def q_inv(p):
    """Inverse of :func:`q_func` on ``(0, 1)``."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"q_inv needs p in (0, 1), got {p!r}")
    return float(-ndtri(p))


@dataclass(frozen=True)
class DispersionReport:
    v_legit: float
    v_eav: float
    variant: str

    def as_dict(self):
        return {"v_legit": self.v_legit, "v_eav": self.v_eav, "variant": self.variant}


def _density_variance(law, variant):
    """Variance of ``i(V; O)`` for a law over ``(V, O...)``."""
    dens = info_density(law, [0], list(range(1, len(law.factors))))
    values = dens.filled(0.0)
    mass = law.mass
    if variant == "unconditional":
        mean = float((mass * values).sum())
        return max(float((mass * (values - mean) ** 2).sum()), 0.0)
    if variant != "conditional":
        raise UsageError(f"unknown dispersion variant {variant!r}")
    axes = tuple(range(1, mass.ndim))
    p_v = mass.sum(axis=axes)
    total = 0.0
    for v in np.nonzero(p_v > 0)[0]:
        w = mass[v] / p_v[v]
        mean = (w * values[v]).sum()
        total += p_v[v] * (w * (values[v] - mean) ** 2).sum()
    return max(float(total), 0.0)


def dispersions(spec: ChannelSpec, aux: AuxDist, variant="conditional", joint=None) -> DispersionReport:
    """Dispersions of the legitimate and eavesdropper observations.

    ``variant="conditional"`` averages ``Var[i(V; O) | V]`` over ``V``;
    ``variant="unconditional"`` is the plain variance of ``i(V; O)``.
    """
    joint = joint if joint is not None else joint_law(spec, aux)
    legit = marginalize(joint, ["V", "Y1", "S1"])
    eav = marginalize(joint, ["V", "Y2", "S2"])
    return DispersionReport(_density_variance(legit, variant), _density_variance(eav, variant), variant)


def mu_min(spec: ChannelSpec, aux: AuxDist, est: EstimatorTable, j: Optional[int] = None, joint=None) -> float:
    """Smallest positive mass of the joint law of ``(S_j, est)``."""
    j = est.which_state if j is None else j
    law = context_state_law(spec, aux, j, joint)
    n_s = law.shape[-1]
    n_hat = spec.distortion(j).estimate.size
    pair = np.zeros((n_s, n_hat))
    flat_law = law.reshape(-1, n_s)
    flat_est = est.estimates.reshape(-1)
    np.add.at(pair.T, flat_est, flat_law)
    positive = pair[pair > 0]
    return float(positive.min())


def delta_distortion(n, epsilon_d, d_j, mu, n_states, n_estimates, d_max):
    """Distortion slack ``eps (1 + D + eps) + 2 |S| |S_hat| exp(-2 n eps^2 mu) d_max``."""
    check_positive_int(n, "n")
    if min(epsilon_d, d_j, mu, d_max) < 0:
        raise DomainError("delta_distortion inputs must be nonnegative")
    return epsilon_d * (1.0 + d_j + epsilon_d) + 2.0 * n_states * n_estimates * np.exp(
        -2.0 * n * epsilon_d ** 2 * mu
    ) * d_max


@dataclass(frozen=True)
class FblQuery:
    """Blocklength, reliability/secrecy budgets and evaluation mode."""

    n: int
    delta_r: float
    delta_sec: float
    theta: float = 0.5
    epsilon_d: float = 0.0
    mode: str = "normal"
    third_order_c: float = 0.0
    variant: str = "conditional"
    gammas: Optional[tuple] = None

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_fraction(self.delta_r, "delta_r")
        check_fraction(self.delta_sec, "delta_sec", 0.0, 2.0)
        check_fraction(self.theta, "theta", closed=True)
        if self.epsilon_d < 0 or self.third_order_c < 0:
            raise DomainError("epsilon_d and third_order_c must be nonnegative")
        if self.mode not in ("normal", "explicit"):
            raise UsageError(f"mode must be 'normal' or 'explicit', got {self.mode!r}")

    @property
    def reliability_budget(self):
        return self.theta * self.delta_r

    @property
    def secrecy_budget(self):
        return (1.0 - self.theta) * self.delta_sec

    def with_n(self, n):
        return FblQuery(**{**self.__dict__, "n": n})


@dataclass
class ExplicitTerms:
    gamma1: float
    gamma2: float
    gamma3: float
    eps_apx: float
    eps_dec: float
    eps_sec: float
    eps_tot: float
    eps_fixed_f: float
    atypical_masses: tuple
    methods: tuple
    rates: tuple
    p_union: Optional[float] = None
    union_rhs: Optional[float] = None

    @property
    def reliability_bound(self):
        """Error bound with shared randomness: ``eps_apx + eps_dec``."""
        return self.eps_apx + self.eps_dec

    @property
    def secrecy_bound(self):
        """Secrecy bound with shared randomness: ``eps_apx + eps_sec``."""
        return self.eps_apx + self.eps_sec

    def as_dict(self):
        return {
            "gammas": [self.gamma1, self.gamma2, self.gamma3],
            "eps_apx": self.eps_apx,
            "eps_dec": self.eps_dec,
            "eps_sec": self.eps_sec,
            "eps_tot": self.eps_tot,
            "eps_fixed_f": self.eps_fixed_f,
            "atypical_masses": list(self.atypical_masses),
            "methods": list(self.methods),
            "rates": list(self.rates),
            "p_union": self.p_union,
            "union_rhs": self.union_rhs,
        }


@dataclass
class FblResult:
    n: int
    mode: str
    r1_plus_r2_max: float
    r2_max: float
    delta_D: tuple
    dispersions: DispersionReport
    mu_min: tuple
    distortions: tuple
    i_legit: float
    i_eav: float
    epsilon_terms: Optional[ExplicitTerms] = None
    feasible: bool = True
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {
            "n": self.n,
            "mode": self.mode,
            "r1_plus_r2_max": self.r1_plus_r2_max,
            "r2_max": self.r2_max,
            "delta_D": list(self.delta_D),
            "dispersions": self.dispersions.as_dict(),
            "mu_min": list(self.mu_min),
            "distortions": list(self.distortions),
            "i_legit": self.i_legit,
            "i_eav": self.i_eav,
            "feasible": self.feasible,
            "epsilon_terms": self.epsilon_terms.as_dict() if self.epsilon_terms else None,
            "notes": list(self.notes),
        }

    def as_row(self):
        return {
            "n": self.n,
            "mode": self.mode,
            "r1_plus_r2": self.r1_plus_r2_max,
            "r2": self.r2_max,
            "delta_D1": self.delta_D[0],
            "delta_D2": self.delta_D[1],
            "v_legit": self.dispersions.v_legit,
            "v_eav": self.dispersions.v_eav,
        }


def _distortion_terms(spec, aux, q, joint):
    dist, mus, deltas = [], [], []
    for j in (1, 2):
        est = build_estimator(spec, aux, j, joint)
        d = expected_distortion(spec, aux, est, joint)
        mu = mu_min(spec, aux, est, j, joint)
        spec_j = spec.distortion(j)
        deltas.append(float(delta_distortion(
            q.n, q.epsilon_d, d, mu, spec_j.state.size, spec_j.estimate.size, spec_j.d_max
        )))
        dist.append(d)
        mus.append(mu)
    return tuple(dist), tuple(mus), tuple(deltas)


def normal_approx_rates(spec: ChannelSpec, aux: AuxDist, q: FblQuery, joint=None) -> FblResult:
    """Normal-approximation achievable ``(R1 + R2, R2)`` at blocklength ``q.n``.

    The ``O(1/sqrt(n))`` corrections inside the ``Q^{-1}`` arguments are
    taken as zero; ``explicit`` mode accounts for finite-n terms fully.
    """
    budget_r = q.reliability_budget
    budget_s = q.secrecy_budget
    if not (0 < budget_r < 1 and 0 < budget_s < 1):
        raise DomainError(
            f"theta*delta_r={budget_r:g} and (1-theta)*delta_sec={budget_s:g} must lie in (0, 1)"
        )
    joint = joint if joint is not None else joint_law(spec, aux)
    i_legit = mutual_information(joint, "V", ["Y1", "S1"])
    i_eav = mutual_information(joint, "V", ["Y2", "S2"])
    disp = dispersions(spec, aux, q.variant, joint)
    n = q.n
    third = q.third_order_c * np.log2(n) / n
    pen_legit = q_inv(budget_r) * np.sqrt(disp.v_legit / n)
    pen_eav = q_inv(budget_s) * np.sqrt(disp.v_eav / n)
    r_sum = max(0.0, i_legit - third - pen_legit)
    r2 = max(0.0, i_legit - i_eav - third - pen_eav - pen_legit)
    dist, mus, deltas = _distortion_terms(spec, aux, q, joint)
    return FblResult(
        n=n,
        mode="normal",
        r1_plus_r2_max=float(r_sum),
        r2_max=float(r2),
        delta_D=deltas,
        dispersions=disp,
        mu_min=mus,
        distortions=dist,
        i_legit=i_legit,
        i_eav=i_eav,
    )


def letter_statistics(spec: ChannelSpec, aux: AuxDist, joint=None):
    """Per-letter information values driving the atypical sets.

    Returns ``(prob, values)`` over the support of ``P(v, y1, s1, y2, s2)``:
    ``values[:, 0] = -log2 P(v)``, ``values[:, 1] = -log2 P(v | y1, s1)``,
    ``values[:, 2] = -log2 P(v | y2, s2)``.
    """
    joint = joint if joint is not None else joint_law(spec, aux)
    law = marginalize(joint, ["V", "Y1", "S1", "Y2", "S2"]).mass
    p_v = law.sum(axis=(1, 2, 3, 4))
    p_vys1 = law.sum(axis=(3, 4))
    p_ys1 = p_vys1.sum(axis=0)
    p_vys2 = law.sum(axis=(1, 2))
    p_ys2 = p_vys2.sum(axis=0)
    idx = np.nonzero(law > 0)
    v, y1, s1, y2, s2 = idx
    prob = law[idx]
    values = np.column_stack([
        -np.log2(p_v[v]),
        -np.log2(p_vys1[v, y1, s1] / p_ys1[y1, s1]),
        -np.log2(p_vys2[v, y2, s2] / p_ys2[y2, s2]),
    ])
    return prob, np.maximum(values, 0.0)


def _quantize(values):
    return np.rint(np.asarray(values) / GRID).astype(np.int64)


def _merge(values, probs):
    """Combine repeated rows of an integer value table."""
    if values.ndim == 1:
        uniq, inv = np.unique(values, return_inverse=True)
    else:
        uniq, inv = np.unique(values, axis=0, return_inverse=True)
    return uniq, np.bincount(inv.reshape(-1), weights=probs, minlength=len(uniq))


def _compositions(n, k):
    """All ways to write ``n`` as an ordered sum of ``k`` nonnegative counts."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    bars = np.array(list(itertools.combinations(range(n + k - 1), k - 1)), dtype=np.int64).reshape(-1, k - 1)
    edges = np.column_stack([np.full(len(bars), -1), bars, np.full(len(bars), n + k - 1)])
    return np.diff(edges, axis=1) - 1


def convolve_power(values, probs, n, max_support=MAX_SUPPORT):
    """Exact law of the sum of ``n`` i.i.d. copies of an integer-valued variable.

    ``values`` is ``(m,)`` or ``(m, k)`` for a ``k``-dimensional variable.
    Returns ``(values, probs)`` of the sum, or ``None`` once the support
    exceeds ``max_support``. Uses multinomial counts over the distinct
    per-letter values when there are few enough of them, repeated
    convolution otherwise.
    """
    base_v, base_p = _merge(np.asarray(values), np.asarray(probs, dtype=float))
    m = len(base_v)
    if comb(n + m - 1, m - 1) <= 4 * max_support:
        counts = _compositions(n, m)
        logp = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1) + counts @ np.log(base_p)
        sums = counts @ base_v
        cur_v, cur_p = _merge(sums, np.exp(logp))
        return (cur_v, cur_p) if len(cur_v) <= max_support else None
    cur_v, cur_p = base_v, base_p
    for _ in range(n - 1):
        if len(cur_v) * m > 20 * max_support:
            return None
        if cur_v.ndim == 1:
            new_v = (cur_v[:, None] + base_v[None, :]).reshape(-1)
        else:
            new_v = (cur_v[:, None, :] + base_v[None, :, :]).reshape(-1, cur_v.shape[1])
        new_p = (cur_p[:, None] * base_p[None, :]).reshape(-1)
        cur_v, cur_p = _merge(new_v, new_p)
        if len(cur_v) > max_support:
            return None
    return cur_v, cur_p


class SumDistribution:
    """Tail probabilities of a sum of ``n`` i.i.d. per-letter values.

    Exact (by convolution on the snapped grid) when the support stays within
    ``max_support``, otherwise Berry-Esseen upper bounds on each tail.
    """

    def __init__(self, values, probs, n, max_support=MAX_SUPPORT, allow_fallback=True):
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        self.n = n
        exact = convolve_power(_quantize(values), probs, n, max_support)
        if exact is not None:
            self.method = "exact"
            self._values, p = exact
            self._cdf = np.cumsum(p)
            self._total = self._cdf[-1]
            return
        if not allow_fallback:
            raise SizeError(f"exact convolution at n={n} exceeds {max_support} support points")
        self.method = "berry-esseen"
        mean = float(probs @ values)
        centered = values - mean
        self._mean = mean
        self._sigma = float(np.sqrt(probs @ centered ** 2))
        self._rho = float(probs @ np.abs(centered) ** 3)

    def _be(self, t):
        if self._sigma == 0:
            return None, 0.0
        z = (t - self.n * self._mean) / (self._sigma * np.sqrt(self.n))
        slack = BERRY_ESSEEN_C * self._rho / (self._sigma ** 3 * np.sqrt(self.n))
        return z, slack

    def prob_le(self, t):
        """Upper bound (exact when ``method == "exact"``) on ``P(sum <= t)``."""
        if self.method == "exact":
            k = np.searchsorted(self._values, np.floor(t / GRID), side="right")
            return float(min(self._cdf[k - 1], 1.0)) if k > 0 else 0.0
        z, slack = self._be(t)
        if z is None:
            return 1.0 if self.n * self._mean <= t else 0.0
        return float(min(1.0, ndtr(z) + slack))

    def prob_ge(self, t):
        """Upper bound (exact when ``method == "exact"``) on ``P(sum >= t)``."""
        if self.method == "exact":
            k = np.searchsorted(self._values, np.ceil(t / GRID), side="left")
            below = self._cdf[k - 1] if k > 0 else 0.0
            return float(min(max(self._total - below, 0.0), 1.0))
        z, slack = self._be(t)
        if z is None:
            return 1.0 if self.n * self._mean >= t else 0.0
        return float(min(1.0, ndtr(-z) + slack))


def default_gammas(n):
    g = float(np.log2(n)) / 2.0 if n > 1 else 0.5
    return (g, g, g)


def _eps_from_masses(masses, gammas):
    g1, g2, g3 = gammas
    eps_apx = masses[0] + 2.0 ** (-(g1 + 1.0) / 2.0)
    eps_dec = masses[1] + 2.0 ** (-g2)
    eps_sec = masses[2] + 2.0 ** (-(g3 + 1.0) / 2.0)
    eps_tot = 2.0 * eps_apx + eps_sec + 4.0 * eps_dec
    return eps_apx, eps_dec, eps_sec, eps_tot


class _AtypicalMasses:
    """Cached tail laws of the three atypical-set statistics at blocklength ``n``."""

    def __init__(self, spec, aux, n, joint=None, max_support=MAX_SUPPORT, allow_fallback=True):
        self.n = n
        self.prob, self.values = letter_statistics(spec, aux, joint)
        self.dists = [
            SumDistribution(self.values[:, k], self.prob, n, max_support, allow_fallback) for k in range(3)
        ]

    def masses(self, rates, gammas):
        r1, r2, rt = rates
        n = self.n
        g1, g2, g3 = gammas
        return (
            self.dists[0].prob_le(n * (r1 + r2 + rt) + g1),
            self.dists[1].prob_ge(n * rt - g2),
            self.dists[2].prob_le(n * (r2 + rt) + g3),
        )

    def union_mass(self, rates, gammas, max_support=MAX_SUPPORT):
        """Exact ``P`` of the union of the three complements, or ``None`` past the guard."""
        r1, r2, rt = rates
        n = self.n
        g1, g2, g3 = gammas
        joint_sum = convolve_power(_quantize(self.values), self.prob, n, max_support)
        if joint_sum is None:
            return None
        vals, p = joint_sum
        bad = (
            (vals[:, 0] <= np.floor((n * (r1 + r2 + rt) + g1) / GRID))
            | (vals[:, 1] >= np.ceil((n * rt - g2) / GRID))
            | (vals[:, 2] <= np.floor((n * (r2 + rt) + g3) / GRID))
        )
        return float(min(p[bad].sum(), 1.0))


def explicit_bounds(
    spec: ChannelSpec,
    aux: AuxDist,
    n: int,
    rates,
    gammas=None,
    allow_fallback=True,
    max_support=MAX_SUPPORT,
    joint=None,
    with_union=True,
) -> ExplicitTerms:
    """Finite-n error terms for binning rates ``(R1, R2, R_tilde)``.

    The atypical masses are

    * ``P(h(V^n) <= n (R1 + R2 + R_tilde) + gamma1)``,
    * ``P(h_t(V^n | Y1^n, S1^n) >= n R_tilde - gamma2)`` with the product
      posterior as decoding metric ``t``,
    * ``P(h(V^n | Y2^n, S2^n) <= n (R2 + R_tilde) + gamma3)``,

    and ``eps_tot = 2 eps_apx + eps_sec + 4 eps_dec``. Fixing the shared
    randomness to a good realization doubles the total (``eps_fixed_f``).
    """
    n = check_positive_int(n, "n")
    gammas = tuple(float(g) for g in (gammas or default_gammas(n)))
    if any(g <= 0 for g in gammas):
        raise DomainError("gammas must be positive")
    rates = tuple(float(r) for r in rates)
    if len(rates) != 3 or any(r < 0 for r in rates):
        raise DomainError("rates are three nonnegative numbers (R1, R2, R_tilde)")
    atyp = _AtypicalMasses(spec, aux, n, joint, max_support, allow_fallback)
    masses = atyp.masses(rates, gammas)
    eps_apx, eps_dec, eps_sec, eps_tot = _eps_from_masses(masses, gammas)
    g1, g2, g3 = gammas
    p_union = union_rhs = None
    if with_union:
        p_union = atyp.union_mass(rates, gammas, max_support)
        if p_union is not None:
            union_rhs = 32.0 * p_union + 2.0 * (
                2.0 ** (-(g1 + 1) / 2) + 4.0 * 2.0 ** (-g2) + 2.0 ** (-(g3 + 1) / 2)
            )
    return ExplicitTerms(
        gamma1=g1,
        gamma2=g2,
        gamma3=g3,
        eps_apx=eps_apx,
        eps_dec=eps_dec,
        eps_sec=eps_sec,
        eps_tot=eps_tot,
        eps_fixed_f=2.0 * eps_tot,
        atypical_masses=masses,
        methods=tuple(d.method for d in atyp.dists),
        rates=rates,
        p_union=p_union,
        union_rhs=union_rhs,
    )


def _bisect_max(feasible, lo, hi, iters=60):
    """Largest ``x`` in ``[lo, hi]`` with ``feasible(x)``, assuming monotone feasibility."""
    if not feasible(lo):
        return None
    if feasible(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def explicit_rates(spec: ChannelSpec, aux: AuxDist, q: FblQuery, joint=None, grid=201):
    """Largest rates whose explicit error terms meet the budgets.

    The sum-rate bound is maximized with ``R2 = 0`` and the secure-rate
    bound with ``R1 = 0``; a grid over the binning rate ``R_tilde`` is
    searched for each. Returns ``(r_sum, r2, terms, feasible)``.
    """
    gammas = tuple(q.gammas or default_gammas(q.n))
    atyp = _AtypicalMasses(spec, aux, q.n, joint)
    budget_r, budget_s = q.reliability_budget, q.secrecy_budget

    def ok(r1, r2, rt):
        eps_apx, eps_dec, eps_sec, _ = _eps_from_masses(atyp.masses((r1, r2, rt), gammas), gammas)
        return eps_apx + eps_dec <= budget_r and eps_apx + eps_sec <= budget_s

    hi = float(atyp.values[:, 0].max()) + 1.0
    best_sum, best_sum_rt = None, None
    best_r2, best_r2_rt = None, None
    for rt in np.linspace(0.0, hi, grid):
        r_sum = _bisect_max(lambda r: ok(r, 0.0, rt), 0.0, hi)
        if r_sum is not None and (best_sum is None or r_sum > best_sum):
            best_sum, best_sum_rt = r_sum, rt
        r2 = _bisect_max(lambda r: ok(0.0, r, rt), 0.0, hi)
        if r2 is not None and (best_r2 is None or r2 > best_r2):
            best_r2, best_r2_rt = r2, rt
    feasible = best_sum is not None and best_r2 is not None
    terms = None
    if best_sum is not None:
        terms = explicit_bounds(spec, aux, q.n, (best_sum, 0.0, best_sum_rt), gammas, joint=joint, with_union=False)
    return (best_sum or 0.0), min(best_r2 or 0.0, best_sum or 0.0), terms, feasible


def fbl_rates(spec: ChannelSpec, aux: AuxDist, q: FblQuery) -> FblResult:
    """Evaluate ``q`` in its own mode."""
    if q.mode == "normal":
        return normal_approx_rates(spec, aux, q)
    joint = joint_law(spec, aux)
    r_sum, r2, terms, feasible = explicit_rates(spec, aux, q, joint)
    dist, mus, deltas = _distortion_terms(spec, aux, q, joint)
    result = FblResult(
        n=q.n,
        mode="explicit",
        r1_plus_r2_max=float(r_sum),
        r2_max=float(r2),
        delta_D=deltas,
        dispersions=dispersions(spec, aux, q.variant, joint),
        mu_min=mus,
        distortions=dist,
        i_legit=mutual_information(joint, "V", ["Y1", "S1"]),
        i_eav=mutual_information(joint, "V", ["Y2", "S2"]),
        epsilon_terms=terms,
        feasible=feasible,
    )
    if not feasible:
        result.notes.append("budgets unattainable at this blocklength and gamma choice")
    return result


def sensitivity_sweep(spec: ChannelSpec, aux: AuxDist, n_grid, q: FblQuery) -> list:
    """One :class:`FblResult` per blocklength in ``n_grid``."""
    n_grid = list(n_grid)
    if not n_grid:
        raise UsageError("n-grid must be nonempty")
    joint = joint_law(spec, aux)
    out = []
    for n in n_grid:
        qn = q.with_n(int(n))
        out.append(normal_approx_rates(spec, aux, qn, joint) if qn.mode == "normal" else fbl_rates(spec, aux, qn))
    return out
