"""Small reference channels with known closed-form behaviour."""

import numpy as np

from .channel import AuxDist, ChannelSpec, DistortionSpec
from .prob import Alphabet

__all__ = [
    "bsc",
    "binary_entropy",
    "build_spec",
    "clean_legit_bsc_eav",
    "wiretap_bsc",
    "cascade",
    "x_bypass",
    "uniform_x_aux",
]


def bsc(p):
    """Crossover matrix of a binary symmetric channel."""
    return np.array([[1 - p, p], [p, 1 - p]])


def binary_entropy(p):
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def build_spec(sizes, state_fn, main_fn, dist1=None, dist2=None, name=""):
    """Assemble a spec from per-letter probability functions.

    ``state_fn(a, s1, s2)`` and ``main_fn(s1, s2, x, y1, y2)`` return
    probabilities for integer symbols. ``sizes`` maps role names to
    alphabet sizes. Distortions default to Hamming.
    """
    alph = {r: Alphabet.of_size(r, sizes.get(r, 1)) for r in ("A", "X", "S1", "S2", "Y1", "Y2")}
    sk = np.zeros((alph["A"].size, alph["S1"].size, alph["S2"].size))
    for idx in np.ndindex(sk.shape):
        sk[idx] = state_fn(*idx)
    mk = np.zeros((alph["S1"].size, alph["S2"].size, alph["X"].size, alph["Y1"].size, alph["Y2"].size))
    for idx in np.ndindex(mk.shape):
        mk[idx] = main_fn(*idx)
    return ChannelSpec(
        alph["A"], alph["X"], alph["S1"], alph["S2"], alph["Y1"], alph["Y2"],
        sk, mk,
        dist1 or DistortionSpec.hamming(alph["S1"]),
        dist2 or DistortionSpec.hamming(alph["S2"]),
        name=name,
    )


def clean_legit_bsc_eav(p=0.11):
    """No states or actions; ``Y1 = X`` and ``Y2`` is ``X`` through BSC(p)."""
    flip = bsc(p)
    return build_spec(
        {"X": 2, "Y1": 2, "Y2": 2},
        lambda a, s1, s2: 1.0,
        lambda s1, s2, x, y1, y2: float(y1 == x) * flip[x, y2],
        name=f"clean-legit/bsc({p})-eav",
    )


def wiretap_bsc(p_legit, p_eav):
    """Degraded BSC wiretap: ``Y1 = BSC(p_legit)(X)``, ``Y2 = BSC(p_eav)(Y1)``; no states."""
    f1, f2 = bsc(p_legit), bsc(p_eav)
    return build_spec(
        {"X": 2, "Y1": 2, "Y2": 2},
        lambda a, s1, s2: 1.0,
        lambda s1, s2, x, y1, y2: f1[x, y1] * f2[y1, y2],
        name=f"wiretap-bsc({p_legit},{p_eav})",
    )


def cascade(p_eav=0.2, p_state=(0.1, 0.4), p_noise=0.0):
    """Action-dependent binary state ``S1 = S2``, ``Y1 = X xor S1 xor N``, ``Y2 = BSC(p_eav)(Y1)``.

    ``p_state[a]`` is ``P(S1 = 1 | A = a)`` and ``N ~ Bern(p_noise)``.
    Physically degraded by construction.
    """
    f1, f2 = bsc(p_noise), bsc(p_eav)
    return build_spec(
        {"A": 2, "X": 2, "S1": 2, "S2": 2, "Y1": 2, "Y2": 2},
        lambda a, s1, s2: float(s1 == s2) * (p_state[a] if s1 else 1 - p_state[a]),
        lambda s1, s2, x, y1, y2: f1[x ^ s1, y1] * f2[y1, y2],
        name=f"cascade(bsc({p_eav}))" if not p_noise else f"cascade(bsc({p_eav}),noise={p_noise})",
    )


def x_bypass(p_noise=0.1, p_state=(0.1, 0.4)):
    """``Y1 = X xor N`` with ``N ~ Bern(p_noise)`` and ``Y2 = X``: the target sees more than the receiver."""
    return build_spec(
        {"A": 2, "X": 2, "S1": 2, "S2": 2, "Y1": 2, "Y2": 2},
        lambda a, s1, s2: float(s1 == s2) * (p_state[a] if s1 else 1 - p_state[a]),
        lambda s1, s2, x, y1, y2: float(y2 == x) * (p_noise if y1 != x else 1 - p_noise),
        name="x-bypass",
    )


def uniform_x_aux(spec):
    """``V = X`` with ``(A, X)`` uniform and independent; ``|V| = |X|``."""
    nA, nX = spec.A.size, spec.X.size
    mass = np.zeros((nX, nA, nX))
    for a in range(nA):
        for x in range(nX):
            mass[x, a, x] = 1.0 / (nA * nX)
    return AuxDist.from_mass(spec, mass)
