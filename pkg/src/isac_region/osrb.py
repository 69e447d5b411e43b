"""Simulation of the random-binning (OSRB) coding scheme at tiny blocklengths.

Every ``v^n`` in ``V^n`` gets three independent uniform bin indices
``(m1, m2, f)``. The encoder draws ``v^n`` from the i.i.d. law restricted to
the bin of ``(m1, m2, f)``, maps it letter by letter to ``(a, x)``, and the
channel runs memorylessly. The receiver samples ``v^n`` from the
likelihood ``t(v^n | y1^n, s1^n)`` restricted to bin ``f`` and reads the
messages off its bins. All sequences are enumerated, so ``|V|^n`` must stay
small.

Sequences are indexed in mixed radix with the first letter most significant.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
import hashlib
import math
import os
from typing import Optional

import numpy as np
from scipy.stats import binomtest

from ._validation import SizeError, UsageError, check_positive_int
from .channel import AuxDist, ChannelSpec, check_spec, joint_law
from .estimator import build_estimator
from .prob import conditional, marginalize

__all__ = [
    "SimConfig",
    "BinningRealization",
    "SimReport",
    "draw_binning",
    "encode",
    "transmit",
    "decode",
    "run",
    "exact_secrecy",
    "rates_inside_sufficient",
    "sufficient_condition_margins",
]

SEQUENCE_GUARD = 2**20
SECRECY_GUARD = 2**22
_BINNING_STREAM = 0xB1
_TRIAL_STREAM = 0x7A


@dataclass
class SimConfig:
    """Simulation setup.

    ``bins`` holds the bin counts ``(|M1|, |M2|, |F|) = 2^{n (R1, R2, R_tilde)}``.
    ``f_mode="fixed"`` runs every trial with the realization ``f*`` that
    minimizes the exact secrecy leakage; ``"uniform"`` draws ``F`` afresh
    per trial as shared randomness.
    """

    spec: ChannelSpec
    aux: AuxDist
    n: int
    bins: tuple
    trials: int = 1000
    master_seed: int = 0
    exact_secrecy: bool = True
    f_mode: str = "fixed"
    n_jobs: Optional[int] = None
    t_kernel: Optional[np.ndarray] = None
    trace: bool = False

    def __post_init__(self):
        self.n = check_positive_int(self.n, "n")
        self.trials = check_positive_int(self.trials, "trials")
        self.bins = tuple(check_positive_int(b, "bin count") for b in self.bins)
        if len(self.bins) != 3:
            raise UsageError("bins are (|M1|, |M2|, |F|)")
        if self.f_mode not in ("fixed", "uniform"):
            raise UsageError("f_mode must be 'fixed' or 'uniform'")
        n_seq = self.aux.V.size ** self.n
        if n_seq > SEQUENCE_GUARD:
            raise SizeError(f"|V|^n = {n_seq} exceeds the enumeration guard {SEQUENCE_GUARD}")

    @classmethod
    def from_rates(cls, spec, aux, n, rates, **kwargs):
        """Convert ``(R1, R2, R_tilde)`` in bits/use into integral bin counts."""
        bins = []
        for r in rates:
            count = 2.0 ** (n * float(r))
            if abs(count - round(count)) > 1e-9 * max(1.0, count):
                raise UsageError(f"2^(n R) = {count:.6g} is not an integer bin count")
            bins.append(int(round(count)))
        return cls(spec, aux, n, tuple(bins), **kwargs)

    @property
    def rates(self):
        return tuple(math.log2(b) / self.n for b in self.bins)

    def summary(self):
        return {
            "n": self.n,
            "bins": list(self.bins),
            "rates": list(self.rates),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "exact_secrecy": self.exact_secrecy,
            "f_mode": self.f_mode,
        }


@dataclass(eq=False)
class BinningRealization:
    """Bin maps of every sequence plus the i.i.d. sequence prior."""

    n: int
    v_size: int
    bin_m1: np.ndarray
    bin_m2: np.ndarray
    bin_f: np.ndarray
    counts: tuple
    p_v: np.ndarray

    @cached_property
    def letters(self):
        """``letters[i, k]`` is the ``k``-th letter of sequence ``i``."""
        idx = np.arange(self.v_size ** self.n)
        return np.stack(np.unravel_index(idx, (self.v_size,) * self.n), axis=1)

    @cached_property
    def prior(self):
        """``P_V^n`` over all sequences."""
        return np.prod(self.p_v[self.letters], axis=1)

    @cached_property
    def _by_triple(self):
        key = (self.bin_m1 * self.counts[1] + self.bin_m2) * self.counts[2] + self.bin_f
        order = np.argsort(key, kind="stable")
        groups = {}
        bounds = np.flatnonzero(np.diff(key[order])) + 1
        for chunk in np.split(order, bounds):
            if chunk.size:
                groups[int(key[chunk[0]])] = chunk
        return groups

    @cached_property
    def _by_f(self):
        return {f: np.flatnonzero(self.bin_f == f) for f in range(self.counts[2])}

    def members(self, m1, m2, f):
        key = (m1 * self.counts[1] + m2) * self.counts[2] + f
        return self._by_triple.get(key, np.empty(0, dtype=np.int64))

    def f_members(self, f):
        return self._by_f[f]

    def as_dict(self):
        return {
            "n": self.n,
            "v_size": self.v_size,
            "counts": list(self.counts),
            "bin_m1": self.bin_m1.tolist(),
            "bin_m2": self.bin_m2.tolist(),
            "bin_f": self.bin_f.tolist(),
        }


def draw_binning(config: SimConfig) -> BinningRealization:
    """Uniform independent bin indices for all ``|V|^n`` sequences, seeded by ``master_seed``."""
    n_seq = config.aux.V.size ** config.n
    if n_seq > SEQUENCE_GUARD:
        raise SizeError(f"|V|^n = {n_seq} exceeds the enumeration guard")
    rng = np.random.default_rng([int(config.master_seed), _BINNING_STREAM])
    maps = [rng.integers(0, c, size=n_seq) for c in config.bins]
    p_v = config.aux.joint.table(["V"])
    return BinningRealization(config.n, config.aux.V.size, *maps, counts=tuple(config.bins), p_v=p_v)


def _sample_index(weights, rng):
    total = weights.sum()
    if not total > 0:
        return None
    cdf = np.cumsum(weights)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(k, len(weights) - 1)


def encode(binning: BinningRealization, m1, m2, f, rng):
    """Draw ``v^n`` from ``P_V^n`` restricted to the bin of ``(m1, m2, f)``.

    Returns the sequence index, or ``None`` when the bin is empty.
    """
    members = binning.members(m1, m2, f)
    if members.size == 0:
        return None
    k = _sample_index(binning.prior[members], rng)
    return None if k is None else int(members[k])


def _letter_tables(spec: ChannelSpec, aux: AuxDist):
    p_ax_v = conditional(aux.joint, ["A", "X"], ["V"]).table  # [v, a, x]
    return (
        p_ax_v.reshape(aux.V.size, -1),
        spec.state_cond.table.reshape(spec.A.size, -1),
        spec.main_cond.table.reshape(spec.S1.size * spec.S2.size * spec.X.size, -1),
    )


def _draw_rows(rows, u):
    cdf = np.cumsum(rows, axis=1)
    cdf[:, -1] = 1.0
    return (u[:, None] >= cdf).sum(axis=1)


def transmit(spec: ChannelSpec, aux: AuxDist, v_seq, rng, tables=None):
    """Run ``v^n`` through ``P(a, x | v)``, the state kernel and the channel.

    Returns a dict of index arrays ``A, X, S1, S2, Y1, Y2``.
    """
    v_seq = np.asarray(v_seq, dtype=int)
    t_ax, t_s, t_y = tables or _letter_tables(spec, aux)
    n = len(v_seq)
    u = rng.random((3, n))
    ax = _draw_rows(t_ax[v_seq], u[0])
    a, x = np.divmod(ax, spec.X.size)
    s = _draw_rows(t_s[a], u[1])
    s1, s2 = np.divmod(s, spec.S2.size)
    y = _draw_rows(t_y[(s1 * spec.S2.size + s2) * spec.X.size + x], u[2])
    y1, y2 = np.divmod(y, spec.Y2.size)
    return {"A": a, "X": x, "S1": s1, "S2": s2, "Y1": y1, "Y2": y2}


def posterior_kernel(spec: ChannelSpec, aux: AuxDist, joint=None):
    """Default decoding metric ``P(v | y1, s1)`` indexed ``[v, y1, s1]``."""
    joint = joint if joint is not None else joint_law(spec, aux)
    post = conditional(joint, ["V"], ["Y1", "S1"]).table  # [y1, s1, v]
    return np.transpose(post, (2, 0, 1))


def decode(binning: BinningRealization, t_kernel, y1_seq, s1_seq, f, rng):
    """Stochastic likelihood decoding within bin ``f``.

    Samples ``v^n`` with probability proportional to
    ``prod_i t_kernel[v_i, y1_i, s1_i]`` over sequences in bin ``f``.
    Returns the sequence index, or ``None`` when the restricted likelihood
    vanishes.
    """
    members = binning.f_members(f)
    if members.size == 0:
        return None
    letters = binning.letters[members]
    cols = np.arange(binning.n)
    weights = np.prod(np.asarray(t_kernel)[letters, np.asarray(y1_seq)[cols], np.asarray(s1_seq)[cols]], axis=1)
    k = _sample_index(weights, rng)
    return None if k is None else int(members[k])


def _eav_kernel(spec, aux, joint):
    """``P(y2, s2 | v)`` flattened to ``[v, o]``."""
    eav = conditional(marginalize(joint, ["V", "Y2", "S2"]), ["Y2", "S2"], ["V"]).table
    return eav.reshape(aux.V.size, -1)


def _push_through(q, kernel, n):
    """Apply the memoryless kernel ``kernel[v, o]`` to a law over ``V^n``."""
    t = q.reshape((kernel.shape[0],) * n)
    for axis in range(n):
        t = np.moveaxis(np.tensordot(t, kernel, axes=([axis], [0])), -1, axis)
    return t.reshape(-1)


def exact_secrecy(config: SimConfig, binning: BinningRealization, joint=None):
    """``|| P(m2, y2^n, s2^n | f) - Unif(m2) P^n(y2, s2) ||_1`` for every ``f``.

    Empty ``(m1, m2, f)`` bins fall back to an i.i.d. ``v^n``, which reveals
    nothing about ``m2``.
    """
    spec, aux, n = config.spec, config.aux, config.n
    joint = joint if joint is not None else joint_law(spec, aux)
    kernel = _eav_kernel(spec, aux, joint)
    n_m1, n_m2, n_f = binning.counts
    size = n_m2 * kernel.shape[1] ** n
    if size > SECRECY_GUARD:
        raise SizeError(f"|M2| |Y2 x S2|^n = {size} exceeds the exact secrecy guard {SECRECY_GUARD}")
    prior = binning.prior
    target = _push_through(prior, kernel, n)
    tv = np.zeros(n_f)
    for f in range(n_f):
        total = 0.0
        for m2 in range(n_m2):
            q = np.zeros_like(prior)
            for m1 in range(n_m1):
                members = binning.members(m1, m2, f)
                mass = prior[members].sum() if members.size else 0.0
                if mass > 0:
                    q[members] += prior[members] / mass / n_m1
                else:
                    q += prior / n_m1
            total += np.abs(_push_through(q, kernel, n) - target).sum()
        tv[f] = min(total / n_m2, 2.0)
    return tv


@dataclass
class SimReport:
    error_rate: float
    error_ci: tuple
    errors: int
    trials: int
    encode_failures: int
    decode_failures: int
    secrecy_tv: float
    secrecy_method: str
    secrecy_tv_median: Optional[float]
    secrecy_tv_mean: Optional[float]
    f_star: int
    distortion_1: float
    distortion_2: float
    per_trial_seedchain: str
    config: dict
    notes: list = field(default_factory=list)
    trace: Optional[list] = None

    def as_dict(self):
        out = {k: getattr(self, k) for k in (
            "error_rate", "errors", "trials", "encode_failures", "decode_failures",
            "secrecy_tv", "secrecy_method", "secrecy_tv_median", "secrecy_tv_mean", "f_star",
            "distortion_1", "distortion_2", "per_trial_seedchain", "config", "notes",
        )}
        out["error_ci"] = list(self.error_ci)
        return out


def _trial_rng(master_seed, trial):
    return np.random.default_rng([int(master_seed), _TRIAL_STREAM, int(trial)])


def _run_trial(ctx, trial):
    cfg, binning = ctx["config"], ctx["binning"]
    rng = _trial_rng(cfg.master_seed, trial)
    n_m1, n_m2, n_f = binning.counts
    m1 = int(rng.integers(n_m1))
    m2 = int(rng.integers(n_m2))
    f = ctx["f_star"] if cfg.f_mode == "fixed" else int(rng.integers(n_f))
    v_idx = encode(binning, m1, m2, f, rng)
    enc_fail = v_idx is None
    if enc_fail:
        v_idx = _sample_index(binning.prior, rng)
    traj = transmit(cfg.spec, cfg.aux, binning.letters[v_idx], rng, ctx["tables"])
    v_hat = decode(binning, ctx["t_kernel"], traj["Y1"], traj["S1"], f, rng)
    dec_fail = v_hat is None
    error = enc_fail or dec_fail or (binning.bin_m1[v_hat], binning.bin_m2[v_hat]) != (m1, m2)
    d = []
    for est, dist in zip(ctx["estimators"], ctx["distortions"]):
        s_hat = est.apply(traj["A"], traj["X"], traj["Y1"], traj["Y2"])
        s = traj["S1"] if est.which_state == 1 else traj["S2"]
        d.append(float(dist[s, s_hat].mean()))
    obs = np.ravel_multi_index((traj["Y2"], traj["S2"]), (cfg.spec.Y2.size, cfg.spec.S2.size))
    return {
        "trial": trial,
        "m1": m1,
        "m2": m2,
        "f": f,
        "error": bool(error),
        "encode_failure": enc_fail,
        "decode_failure": dec_fail,
        "d1": d[0],
        "d2": d[1],
        "obs": tuple(int(o) for o in obs),
    }


def _plug_in_secrecy(records, config, joint):
    """Histogram estimate of the leakage at the trials' shared ``f`` (biased upwards)."""
    p_o = marginalize(joint, ["Y2", "S2"]).mass.reshape(-1)
    n_m2 = config.bins[1]
    counts = {}
    for r in records:
        key = (r["m2"], r["obs"])
        counts[key] = counts.get(key, 0) + 1
    total = len(records)
    if total == 0:
        return float("nan")
    covered = 0.0
    tv = 0.0
    for (m2, obs), c in counts.items():
        target = float(np.prod(p_o[list(obs)])) / n_m2
        covered += target
        tv += abs(c / total - target)
    return float(min(tv + max(0.0, 1.0 - covered), 2.0))


def _threads(config):
    if config.n_jobs:
        return int(config.n_jobs)
    env = os.environ.get("ISAC_REGION_THREADS")
    return int(env) if env else 1


def run(config: SimConfig) -> SimReport:
    """Simulate ``config.trials`` transmissions and measure reliability, leakage and distortion."""
    spec, aux = check_spec(config.spec), config.aux
    aux.check_against(spec)
    joint = joint_law(spec, aux)
    binning = draw_binning(config)
    notes = []

    tv_all = None
    if config.exact_secrecy:
        tv_all = exact_secrecy(config, binning, joint)
        f_star = int(np.argmin(tv_all))
    else:
        f_star = 0
        notes.append("f* fixed to 0: exact secrecy disabled, no leakage ranking available")

    estimators = [build_estimator(spec, aux, j, joint) for j in (1, 2)]
    t_kernel = config.t_kernel if config.t_kernel is not None else posterior_kernel(spec, aux, joint)
    ctx = {
        "config": config,
        "binning": binning,
        "f_star": f_star,
        "tables": _letter_tables(spec, aux),
        "t_kernel": np.asarray(t_kernel, dtype=float),
        "estimators": estimators,
        "distortions": [spec.dist1.d, spec.dist2.d],
    }
    threads = _threads(config)
    if threads <= 1:
        records = [_run_trial(ctx, t) for t in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda t: _run_trial(ctx, t), range(config.trials)))

    errors = sum(r["error"] for r in records)
    ci = binomtest(errors, config.trials).proportion_ci(confidence_level=0.95, method="wilson")
    digest = hashlib.sha256()
    digest.update(f"{config.master_seed}:{config.trials}".encode())
    for r in records:
        digest.update(f"|{r['trial']},{r['m1']},{r['m2']},{r['f']},{int(r['error'])}".encode())

    if tv_all is not None:
        secrecy, method = float(tv_all[f_star]), "exact"
        median, mean = float(np.median(tv_all)), float(np.mean(tv_all))
    else:
        shared = [r for r in records if r["f"] == f_star]
        secrecy, method = _plug_in_secrecy(shared, config, joint), "plug-in (biased)"
        median = mean = None

    return SimReport(
        error_rate=errors / config.trials,
        error_ci=(float(ci.low), float(ci.high)),
        errors=int(errors),
        trials=config.trials,
        encode_failures=sum(r["encode_failure"] for r in records),
        decode_failures=sum(r["decode_failure"] for r in records),
        secrecy_tv=secrecy,
        secrecy_method=method,
        secrecy_tv_median=median,
        secrecy_tv_mean=mean,
        f_star=f_star,
        distortion_1=float(np.mean([r["d1"] for r in records])),
        distortion_2=float(np.mean([r["d2"] for r in records])),
        per_trial_seedchain=digest.hexdigest(),
        config=config.summary(),
        notes=notes,
        trace=records if config.trace else None,
    )


def sufficient_condition_margins(spec: ChannelSpec, aux: AuxDist, rates):
    """Slack of ``(R1, R2, R_tilde)`` in the three binning conditions (positive means satisfied).

    Returns ``(R_tilde - H(V|Y1,S1), H(V|Y2,S2) - R_tilde - R2, H(V) - R1 - R2 - R_tilde)``.
    """
    from .prob import conditional_entropy, entropy

    joint = joint_law(spec, aux)
    r1, r2, rt = rates
    return (
        rt - conditional_entropy(joint, "V", ["Y1", "S1"]),
        conditional_entropy(joint, "V", ["Y2", "S2"]) - rt - r2,
        entropy(marginalize(joint, ["V"])) - r1 - r2 - rt,
    )


def rates_inside_sufficient(spec: ChannelSpec, aux: AuxDist, n: int, margin=0.2):
    """Largest integral bin counts meeting the binning conditions with a relative margin.

    ``|F| >= 2^{n (1+margin) H(V|Y1,S1)}``, ``|M2| |F| <= 2^{n (1-margin) H(V|Y2,S2)}``
    and ``|M1| |M2| |F| <= 2^{n (1-margin) H(V)}``.
    """
    from .prob import conditional_entropy, entropy

    joint = joint_law(spec, aux)
    h_legit = conditional_entropy(joint, "V", ["Y1", "S1"])
    h_eav = conditional_entropy(joint, "V", ["Y2", "S2"])
    h_v = entropy(marginalize(joint, ["V"]))
    n_f = max(1, math.ceil(2.0 ** (n * (1 + margin) * h_legit) - 1e-9))
    n_m2 = math.floor(2.0 ** (n * (1 - margin) * h_eav) / n_f + 1e-9)
    if n_m2 < 1:
        raise UsageError("no secure bin count fits inside the secrecy condition")
    n_m1 = math.floor(2.0 ** (n * (1 - margin) * h_v) / (n_m2 * n_f) + 1e-9)
    if n_m1 < 1:
        raise UsageError("no message bin count fits inside the approximation condition")
    return (n_m1, n_m2, n_f)
