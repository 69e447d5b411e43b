"""Optimal deterministic per-letter state estimators.

The transmitter sees the context ``(a, x, y1, y2)`` and picks the estimate
minimizing posterior expected distortion. :class:`PosteriorArgminEstimator`
is the reusable scikit-learn style building block: fit it on (context,
state) pairs with probability weights and it learns the argmin table.
Fitting it on the exact joint law yields the Bayes-optimal estimator.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, column_or_1d

from ._validation import SizeError, UsageError
from .channel import AuxDist, ChannelSpec, joint_law
from .prob import Alphabet

__all__ = [
    "PosteriorArgminEstimator",
    "EstimatorTable",
    "build_estimator",
    "expected_distortion",
    "brute_force_best",
    "context_state_law",
    "CONTEXT",
]

CONTEXT = ("A", "X", "Y1", "Y2")
BRUTE_FORCE_LIMIT = 10**6
_TIE_RTOL = 1e-12


def _argmin_lowest(cost, axis=-1):
    """Argmin with near-ties resolved to the lowest index."""
    best = cost.min(axis=axis, keepdims=True)
    slack = _TIE_RTOL * np.maximum(1.0, np.abs(best))
    return np.argmax(cost <= best + slack, axis=axis)


class PosteriorArgminEstimator(BaseEstimator):
    """Map each context to the estimate with least weighted expected distortion.

    Parameters
    ----------
    distortion : array_like of shape (n_states, n_estimates)
        ``distortion[s, s_hat]``.
    context_shape : tuple of int
        Sizes of the context factors. ``X`` passed to :meth:`fit` and
        :meth:`predict` is either flat context codes or one column per factor.

    Attributes
    ----------
    table_ : ndarray of shape (n_contexts,)
        Chosen estimate index per flat context code.
    cost_ : ndarray of shape (n_contexts, n_estimates)
        Accumulated weighted distortion of each candidate estimate.
    default_ : int
        Estimate used for contexts without weight: the unconditional optimum.
    """

    def __init__(self, distortion=None, context_shape=(1,)):
        self.distortion = distortion
        self.context_shape = context_shape

    def _codes(self, X):
        X = np.asarray(X)
        shape = tuple(self.context_shape)
        if X.ndim == 2:
            if X.shape[1] != len(shape):
                raise UsageError(f"expected {len(shape)} context columns, got {X.shape[1]}")
            return np.ravel_multi_index(tuple(X.T.astype(int)), shape)
        codes = column_or_1d(X).astype(int)
        if codes.size and (codes.min() < 0 or codes.max() >= int(np.prod(shape))):
            raise UsageError("context code out of range")
        return codes

    def fit(self, X, y, sample_weight=None):
        d = np.asarray(self.distortion, dtype=float)
        if d.ndim != 2:
            raise UsageError("distortion must be a 2-D matrix")
        codes = self._codes(X)
        states = column_or_1d(np.asarray(y)).astype(int)
        if sample_weight is None:
            sample_weight = np.ones(len(codes))
        w = np.asarray(sample_weight, dtype=float)
        n_ctx = int(np.prod(self.context_shape))
        n_est = d.shape[1]
        cost = np.zeros((n_ctx, n_est))
        np.add.at(cost, codes, w[:, None] * d[states])
        weight = np.bincount(codes, weights=w, minlength=n_ctx)
        self.default_ = int(_argmin_lowest(cost.sum(axis=0)))
        self.table_ = np.where(weight > 0, _argmin_lowest(cost, axis=1), self.default_)
        self.cost_ = cost
        self.context_weight_ = weight
        return self

    def predict(self, X):
        check_is_fitted(self, "table_")
        return self.table_[self._codes(X)]

    def score(self, X, y, sample_weight=None):
        """Negative weighted mean distortion of the predictions (higher is better)."""
        s_hat = self.predict(X)
        d = np.asarray(self.distortion, dtype=float)
        states = column_or_1d(np.asarray(y)).astype(int)
        return -float(np.average(d[states, s_hat], weights=sample_weight))


@dataclass(frozen=True, eq=False)
class EstimatorTable:
    """Total map from ``(a, x, y1, y2)`` to an estimate of ``S_j``."""

    which_state: int
    context: tuple
    estimate_alphabet: Alphabet
    estimates: np.ndarray

    def __call__(self, a, x, y1, y2):
        return self.estimates[a, x, y1, y2]

    def apply(self, a, x, y1, y2):
        """Vectorized lookup over equal-length index arrays."""
        return self.estimates[np.asarray(a), np.asarray(x), np.asarray(y1), np.asarray(y2)]

    def as_dict(self):
        mapping = {}
        for idx in np.ndindex(self.estimates.shape):
            key = ",".join(alph.symbols[i] for alph, i in zip(self.context, idx))
            mapping[key] = self.estimate_alphabet.symbols[self.estimates[idx]]
        return {
            "which_state": self.which_state,
            "context": [alph.name for alph in self.context],
            "estimates": mapping,
        }


def context_state_law(spec: ChannelSpec, aux: AuxDist, j: int, joint=None):
    """``P(a, x, y1, y2, s_j)`` as an ndarray with the state on the last axis."""
    spec.distortion(j)
    joint = joint if joint is not None else joint_law(spec, aux)
    return joint.table(list(CONTEXT) + [f"S{j}"])


def build_estimator(spec: ChannelSpec, aux: AuxDist, j: int, joint=None) -> EstimatorTable:
    """Bayes-optimal per-letter estimator of ``S_j`` under ``aux``'s joint law."""
    dist = spec.distortion(j)
    law = context_state_law(spec, aux, j, joint)
    ctx_shape = law.shape[:-1]
    n_ctx, n_s = int(np.prod(ctx_shape)), law.shape[-1]
    codes = np.repeat(np.arange(n_ctx), n_s)
    states = np.tile(np.arange(n_s), n_ctx)
    est = PosteriorArgminEstimator(distortion=dist.d, context_shape=ctx_shape)
    est.fit(codes, states, sample_weight=law.reshape(-1))
    return EstimatorTable(
        which_state=j,
        context=tuple(getattr(spec, r) for r in CONTEXT),
        estimate_alphabet=dist.estimate,
        estimates=est.table_.reshape(ctx_shape),
    )


def expected_distortion(spec: ChannelSpec, aux: AuxDist, est: EstimatorTable, joint=None) -> float:
    """``E[d_j(S_j, est(A, X, Y1, Y2))]`` under the exact joint law."""
    law = context_state_law(spec, aux, est.which_state, joint)
    if law.shape[:-1] != est.estimates.shape:
        raise UsageError("estimator context does not match the channel spec")
    d = spec.distortion(est.which_state).d
    # cost[ctx..., s] = d[s, est(ctx)]
    cost = d.T[est.estimates]
    return float(np.clip((law * cost).sum(), 0.0, None))


def brute_force_best(spec: ChannelSpec, aux: AuxDist, j: int, limit=BRUTE_FORCE_LIMIT):
    """Exhaustive search over every deterministic per-letter map.

    Returns ``(EstimatorTable, distortion)``; the first optimal map in
    lexicographic order wins.
    """
    dist = spec.distortion(j)
    law = context_state_law(spec, aux, j)
    ctx_shape = law.shape[:-1]
    n_ctx = int(np.prod(ctx_shape))
    n_est = dist.estimate.size
    n_maps = n_est ** n_ctx
    if n_maps > limit:
        raise SizeError(f"{n_est}^{n_ctx} = {n_maps} candidate maps exceed the limit {limit}")
    cost = law.reshape(n_ctx, -1) @ dist.d  # [ctx, s_hat]
    maps = np.arange(n_maps)
    total = np.zeros(n_maps)
    digits = np.empty((n_ctx, n_maps), dtype=np.int64)
    for c in range(n_ctx - 1, -1, -1):
        digits[c] = maps % n_est
        maps = maps // n_est
        total += cost[c, digits[c]]
    best = int(np.argmin(total))
    table = EstimatorTable(
        which_state=j,
        context=tuple(getattr(spec, r) for r in CONTEXT),
        estimate_alphabet=dist.estimate,
        estimates=digits[:, best].reshape(ctx_shape),
    )
    return table, float(total[best])
