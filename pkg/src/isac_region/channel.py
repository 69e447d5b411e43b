"""ISAC channel with action-dependent states.

The transmitter picks an action ``A`` and input ``X``; nature draws states
``(S1, S2) ~ P(s1, s2 | a)``; the memoryless channel emits
``(Y1, Y2) ~ P(y1, y2 | s1, s2, x)``. The legitimate receiver sees
``(Y1, S1)``, the eavesdropping target sees ``(Y2, S2)``, and the
transmitter's feedback is noiseless, so its estimators see
``(A, X, Y1, Y2)``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional
import warnings

import numpy as np

from ._validation import INPUT_TOL, SpecError, UsageError
from .prob import Alphabet, CondPmf, JointPmf, compose, marginalize

__all__ = [
    "DistortionSpec",
    "ChannelSpec",
    "AuxDist",
    "Diagnostic",
    "DegradednessReport",
    "validate",
    "check_spec",
    "joint_law",
    "check_degraded",
    "eav_observation_law",
    "legit_observation_law",
    "JOINT_ORDER",
]

JOINT_ORDER = ("V", "A", "X", "S1", "S2", "Y1", "Y2")
ROLES = ("A", "X", "S1", "S2", "Y1", "Y2")
DEFAULT_DEGRADED_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DistortionSpec:
    """Per-letter distortion ``d(s, s_hat)`` between a state and its estimate."""

    state: Alphabet
    estimate: Alphabet
    d: np.ndarray
    d_max: float

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))
        object.__setattr__(self, "d_max", float(self.d_max))

    @classmethod
    def hamming(cls, state: Alphabet, estimate: Optional[Alphabet] = None):
        estimate = estimate or state.renamed(state.name + "_hat")
        d = 1.0 - np.eye(state.size, estimate.size)
        return cls(state, estimate, d, 1.0)


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Finite-alphabet ISAC channel with transmitter actions.

    ``state_kernel`` is indexed ``[a, s1, s2]`` and ``main_kernel``
    ``[s1, s2, x, y1, y2]``. Alphabets are renamed to their roles.
    """

    A: Alphabet
    X: Alphabet
    S1: Alphabet
    S2: Alphabet
    Y1: Alphabet
    Y2: Alphabet
    state_kernel: np.ndarray
    main_kernel: np.ndarray
    dist1: DistortionSpec
    dist2: DistortionSpec
    name: str = ""

    def __post_init__(self):
        for role in ("A", "X", "S1", "S2", "Y1", "Y2"):
            alph = getattr(self, role)
            if alph.name != role:
                object.__setattr__(self, role, alph.renamed(role))
        object.__setattr__(self, "state_kernel", np.asarray(self.state_kernel, dtype=float))
        object.__setattr__(self, "main_kernel", np.asarray(self.main_kernel, dtype=float))

    @property
    def d_max(self):
        return max(self.dist1.d_max, self.dist2.d_max)

    def distortion(self, j):
        if j not in (1, 2):
            raise UsageError(f"state index must be 1 or 2, got {j!r}")
        return self.dist1 if j == 1 else self.dist2

    def state_alphabet(self, j):
        return self.S1 if j == 1 else self.S2

    @cached_property
    def state_cond(self) -> CondPmf:
        return CondPmf([self.A], [self.S1, self.S2], self.state_kernel)

    @cached_property
    def main_cond(self) -> CondPmf:
        return CondPmf([self.S1, self.S2, self.X], [self.Y1, self.Y2], self.main_kernel)

    @property
    def cardinality_bound(self):
        """Largest auxiliary alphabet needed: ``|X| |A| + 1``."""
        return self.X.size * self.A.size + 1


@dataclass(frozen=True)
class Diagnostic:
    code: str
    location: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.location}: {self.message}"

    def as_dict(self):
        return {"code": self.code, "location": self.location, "message": self.message}


def _kernel_diagnostics(table, expected_shape, n_given, label):
    out = []
    if table.shape != expected_shape:
        out.append(Diagnostic("shape", label, f"shape {table.shape} != expected {expected_shape}"))
        return out
    if not np.all(np.isfinite(table)):
        out.append(Diagnostic("finite", label, "non-finite entries"))
        return out
    for idx in zip(*np.nonzero(table < 0)):
        out.append(Diagnostic("negative", f"{label}{list(map(int, idx))}", f"entry {table[idx]:.6g} < 0"))
    sums = table.reshape(int(np.prod(expected_shape[:n_given])), -1).sum(axis=1)
    for flat_row in np.nonzero(np.abs(sums - 1.0) > INPUT_TOL)[0]:
        row = np.unravel_index(flat_row, expected_shape[:n_given])
        out.append(Diagnostic(
            "stochasticity",
            f"{label}{list(map(int, row))}",
            f"row sums to {sums[flat_row]:.12g}",
        ))
    return out


def validate(spec: ChannelSpec) -> list:
    """Check every invariant of ``spec`` and return diagnostics (empty when valid). Never raises."""
    diags = []
    try:
        sk_shape = (spec.A.size, spec.S1.size, spec.S2.size)
        diags += _kernel_diagnostics(spec.state_kernel, sk_shape, 1, "state_kernel")
        mk_shape = (spec.S1.size, spec.S2.size, spec.X.size, spec.Y1.size, spec.Y2.size)
        diags += _kernel_diagnostics(spec.main_kernel, mk_shape, 3, "main_kernel")
        for j in (1, 2):
            dist = spec.distortion(j)
            label = f"dist{j}"
            if dist.state.symbols != spec.state_alphabet(j).symbols:
                diags.append(Diagnostic("alphabet", label, "state alphabet differs from the channel's S%d" % j))
            if dist.d.shape != (dist.state.size, dist.estimate.size):
                diags.append(Diagnostic(
                    "shape", label,
                    f"matrix shape {dist.d.shape} != ({dist.state.size}, {dist.estimate.size})",
                ))
                continue
            if not dist.d_max > 0:
                diags.append(Diagnostic("d_max", label, f"d_max={dist.d_max} must be positive"))
            for idx in zip(*np.nonzero(dist.d < 0)):
                diags.append(Diagnostic("distortion-negative", f"{label}{list(map(int, idx))}", "negative distortion"))
            for idx in zip(*np.nonzero(dist.d > dist.d_max)):
                diags.append(Diagnostic(
                    "distortion-bound",
                    f"{label}{list(map(int, idx))}",
                    f"d={dist.d[idx]:g} exceeds d_max={dist.d_max:g}",
                ))
    except Exception as exc:  # validate reports, it does not raise
        diags.append(Diagnostic("malformed", "spec", repr(exc)))
    return diags


def check_spec(spec: ChannelSpec) -> ChannelSpec:
    """Raise :class:`SpecError` unless ``spec`` is valid; return it unchanged."""
    diags = validate(spec)
    if diags:
        raise SpecError(diags)
    return spec


@dataclass(frozen=True, eq=False)
class AuxDist:
    """Auxiliary input law ``P(v, a, x)``, the optimization variable of the region.

    The auxiliary alphabet may not exceed ``|X| |A| + 1`` letters.
    """

    V: Alphabet
    joint: JointPmf

    def __post_init__(self):
        if self.joint.names != ("V", "A", "X"):
            raise UsageError(f"aux joint must be over (V, A, X), got {self.joint.names}")
        a, x = self.joint.factors[1], self.joint.factors[2]
        limit = a.size * x.size + 1
        if self.V.size > limit:
            raise UsageError(f"|V|={self.V.size} exceeds the cardinality bound |X||A|+1={limit}")

    @classmethod
    def from_mass(cls, spec: ChannelSpec, mass, v_size=None, V: Optional[Alphabet] = None, tol=INPUT_TOL):
        mass = np.asarray(mass, dtype=float)
        if V is None:
            V = Alphabet.of_size("V", v_size or mass.shape[0])
        V = V.renamed("V")
        return cls(V, JointPmf([V, spec.A, spec.X], mass, tol=tol))

    @classmethod
    def from_input(cls, spec: ChannelSpec, p_ax, p_v_given_ax, V: Optional[Alphabet] = None):
        """Build from ``P(a, x)`` and a kernel ``P(v | a, x)`` indexed ``[a, x, v]``."""
        p_ax = np.asarray(p_ax, dtype=float).reshape(spec.A.size, spec.X.size)
        kernel = np.asarray(p_v_given_ax, dtype=float)
        mass = np.einsum("ax,axv->vax", p_ax, kernel)
        return cls.from_mass(spec, mass, V=V)

    @classmethod
    def identity(cls, spec: ChannelSpec, p_ax=None, v_size=None):
        """``V`` labels the pair ``(a, x)``; surplus letters of ``V`` carry no mass."""
        n_ax = spec.A.size * spec.X.size
        v_size = v_size or n_ax
        if v_size < n_ax:
            raise UsageError("identity aux needs |V| >= |A||X|")
        if p_ax is None:
            p_ax = np.full((spec.A.size, spec.X.size), 1.0 / n_ax)
        p_ax = np.asarray(p_ax, dtype=float).reshape(-1)
        mass = np.zeros((v_size, n_ax))
        mass[np.arange(n_ax), np.arange(n_ax)] = p_ax
        return cls.from_mass(spec, mass.reshape(v_size, spec.A.size, spec.X.size))

    @property
    def mass(self):
        return self.joint.mass

    @property
    def p_ax(self):
        return self.joint.table(["A", "X"])

    def relabeled(self, perm):
        """Same law with ``V`` symbols permuted: new letter ``i`` is old letter ``perm[i]``."""
        perm = list(perm)
        V = Alphabet("V", [self.V.symbols[p] for p in perm])
        return AuxDist(V, JointPmf([V] + list(self.joint.factors[1:]), self.mass[perm]))

    def check_against(self, spec: ChannelSpec):
        a, x = self.joint.factors[1], self.joint.factors[2]
        if a != spec.A or x != spec.X:
            raise UsageError("aux alphabets for (A, X) do not match the channel spec")


def joint_law(spec: ChannelSpec, aux: AuxDist) -> JointPmf:
    """``P(v,a,x) P(s1,s2|a) P(y1,y2|s1,s2,x)`` over ``(V, A, X, S1, S2, Y1, Y2)``."""
    aux.check_against(spec)
    with_states = compose(aux.joint, spec.state_cond)
    return compose(with_states, spec.main_cond)


def eav_observation_law(spec: ChannelSpec, aux: AuxDist) -> JointPmf:
    """Marginal law of ``(V, Y2, S2)``."""
    return marginalize(joint_law(spec, aux), ["V", "Y2", "S2"])


def legit_observation_law(spec: ChannelSpec, aux: AuxDist) -> JointPmf:
    """Marginal law of ``(V, Y1, S1)``."""
    return marginalize(joint_law(spec, aux), ["V", "Y1", "S1"])


@dataclass
class DegradednessReport:
    is_degraded: bool
    residual: float
    tol: float
    witness_kernel: Optional[CondPmf] = None
    violating_context: Optional[dict] = None
    residual_y1: float = 0.0
    residual_eav: float = 0.0
    notes: list = field(default_factory=list)

    def as_dict(self):
        out = {
            "is_degraded": self.is_degraded,
            "residual": self.residual,
            "residual_y1": self.residual_y1,
            "residual_eav": self.residual_eav,
            "tol": self.tol,
            "violating_context": self.violating_context,
        }
        if self.witness_kernel is not None:
            out["witness_kernel"] = {
                "given": list(self.witness_kernel.given_names),
                "outcome": list(self.witness_kernel.outcome_names),
                "table": self.witness_kernel.table.tolist(),
            }
        return out


def check_degraded(spec: ChannelSpec, tol: float = DEFAULT_DEGRADED_TOL) -> DegradednessReport:
    """Decide physical degradedness of ``spec``.

    The channel is degraded when ``P(y1 | s1, s2, x)`` does not depend on
    ``s2`` over reachable states, and a single kernel ``Q(y2, s2 | s1, y1)``
    reproduces ``P(y2, s2 | a, x, s1, y1)`` in every context reachable under
    the uniform input law. Both conditions are measured as max-absolute
    residuals against ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    check_spec(spec)
    sk = spec.state_cond.table  # [a, s1, s2]
    mk = spec.main_cond.table  # [s1, s2, x, y1, y2]
    nA, nX = spec.A.size, spec.X.size

    # Condition 1: Y1 law independent of s2 among states reachable from some action.
    p_y1 = mk.sum(axis=4)  # [s1, s2, x, y1]
    reach_s = sk.sum(axis=0) > 0  # [s1, s2]
    res_y1, ctx_y1 = 0.0, None
    for s1 in range(spec.S1.size):
        s2s = np.nonzero(reach_s[s1])[0]
        if len(s2s) < 2:
            continue
        rows = p_y1[s1, s2s]  # [k, x, y1]
        spread = rows.max(axis=0) - rows.min(axis=0)  # [x, y1]
        worst = float(spread.max())
        if worst > res_y1:
            res_y1 = worst
            x, y1 = np.unravel_index(int(spread.argmax()), spread.shape)
            a = int(np.nonzero(sk[:, s1, s2s].sum(axis=1) > 0)[0][0])
            ctx_y1 = (a, int(x), s1, int(y1))

    # Condition 2: eavesdropper pair depends on (a, x, s1, y1) only through (s1, y1).
    p_ax = np.full((nA, nX), 1.0 / (nA * nX))
    joint = np.einsum("ax,aut,utxyz->axuytz", p_ax, sk, mk)  # [a, x, s1, y1, s2, y2]
    ctx_mass = joint.sum(axis=(4, 5))  # [a, x, s1, y1]
    reachable = ctx_mass > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = joint / np.where(reachable, ctx_mass, 1.0)[..., None, None]
    su_mass = joint.sum(axis=(0, 1))  # [s1, y1, s2, y2]
    su_norm = su_mass.sum(axis=(2, 3))
    n_out = spec.S2.size * spec.Y2.size
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(
            su_norm[..., None, None] > 0,
            su_mass / np.where(su_norm > 0, su_norm, 1.0)[..., None, None],
            1.0 / n_out,
        )
    diff = np.abs(cond - q[None, None]) * reachable[..., None, None]
    res_eav = float(diff.max())
    ctx_eav = None
    if res_eav > 0:
        a, x, s1, y1, _, _ = np.unravel_index(int(diff.argmax()), diff.shape)
        ctx_eav = (int(a), int(x), int(s1), int(y1))

    residual = max(res_y1, res_eav)
    degraded = residual <= tol
    report = DegradednessReport(
        is_degraded=degraded,
        residual=residual,
        tol=tol,
        residual_y1=res_y1,
        residual_eav=res_eav,
    )
    if degraded:
        witness = np.transpose(q, (0, 1, 3, 2))  # [s1, y1, y2, s2]
        report.witness_kernel = CondPmf([spec.S1, spec.Y1], [spec.Y2, spec.S2], witness, tol=1e-9)
    else:
        ctx = ctx_eav if res_eav >= res_y1 else ctx_y1
        a, x, s1, y1 = ctx
        report.violating_context = {
            "A": spec.A.symbols[a],
            "X": spec.X.symbols[x],
            "S1": spec.S1.symbols[s1],
            "Y1": spec.Y1.symbols[y1],
        }
        report.notes.append("y1-law depends on s2" if res_y1 > res_eav else "eavesdropper law not a function of (s1, y1)")
    return report


def warn_if_not_degraded(spec: ChannelSpec, tol: float = DEFAULT_DEGRADED_TOL) -> bool:
    report = check_degraded(spec, tol)
    if not report.is_degraded:
        warnings.warn(
            "channel is not physically degraded; region points are inner bounds only",
            stacklevel=3,
        )
    return report.is_degraded
