"""Exact finite-alphabet probability engine.

Distributions are dense numpy tables with one axis per named factor, so a
flat C-order view is the mixed-radix indexing of the factor tuple. All
information quantities are in bits.

Factors are referenced by alphabet name (``"Y1"``), by axis position, or by
a sequence of either. Off-support values of pointwise quantities are
reported with :data:`numpy.ma.masked` rather than infinities.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import entr

from ._validation import (
    INPUT_TOL,
    UsageError,
    check_probabilities,
    check_size,
)

__all__ = [
    "Alphabet",
    "JointPmf",
    "Pmf",
    "CondPmf",
    "OFF_SUPPORT",
    "marginalize",
    "compose",
    "conditional",
    "entropy",
    "conditional_entropy",
    "mutual_information",
    "info_density",
    "self_info",
    "variational_distance",
]

#: Marker returned for pointwise quantities evaluated off the support.
OFF_SUPPORT = np.ma.masked

_LN2 = np.log(2.0)


@dataclass(frozen=True)
class Alphabet:
    """Named finite alphabet with a canonical symbol order."""

    name: str
    symbols: tuple

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise ValueError(f"alphabet {self.name!r} is empty")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"alphabet {self.name!r} has repeated symbols")
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def of_size(cls, name, size):
        """Alphabet ``{"0", ..., str(size-1)}``."""
        if size < 1:
            raise ValueError("alphabet size must be positive")
        return cls(name, tuple(str(i) for i in range(size)))

    @property
    def size(self):
        return len(self.symbols)

    def index(self, symbol):
        """Position of ``symbol``; integers are taken as positions already."""
        if isinstance(symbol, (int, np.integer)):
            if not 0 <= symbol < self.size:
                raise UsageError(f"index {symbol} out of range for alphabet {self.name!r}")
            return int(symbol)
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise UsageError(f"symbol {symbol!r} not in alphabet {self.name!r}") from None

    def renamed(self, name):
        return Alphabet(name, self.symbols)

    def __len__(self):
        return self.size


def _axes_of(factors, refs):
    """Resolve factor references to a tuple of axis positions."""
    names = [f.name for f in factors]
    if isinstance(refs, (str, int, np.integer, Alphabet)):
        refs = [refs]
    axes = []
    for ref in refs:
        if isinstance(ref, Alphabet):
            ref = ref.name
        if isinstance(ref, str):
            if ref not in names:
                raise UsageError(f"no factor named {ref!r} (have {names})")
            axes.append(names.index(ref))
        else:
            ref = int(ref)
            if not 0 <= ref < len(factors):
                raise UsageError(f"factor index {ref} out of range")
            axes.append(ref)
    if len(set(axes)) != len(axes):
        raise UsageError("factor set lists a factor twice")
    return tuple(axes)


class JointPmf:
    """Joint distribution over an ordered tuple of named alphabets.

    Parameters
    ----------
    factors : sequence of Alphabet
        Component alphabets; names must be distinct.
    mass : array_like
        Either a table of shape ``(|F1|, ..., |Fk|)`` or its flat
        mixed-radix (C-order) vector.
    tol : float
        Accepted deviation of the total mass from one; within it the table
        is renormalized.
    """

    def __init__(self, factors: Sequence[Alphabet], mass, tol=INPUT_TOL):
        factors = tuple(factors)
        if not factors:
            raise UsageError("a joint pmf needs at least one factor")
        names = [f.name for f in factors]
        if len(set(names)) != len(names):
            raise UsageError(f"factor names must be distinct, got {names}")
        shape = tuple(f.size for f in factors)
        check_size(shape)
        mass = np.asarray(mass, dtype=float)
        if mass.size != int(np.prod(shape)):
            raise UsageError(f"mass has {mass.size} entries, factors need {shape}")
        mass = check_probabilities(mass.reshape(shape), tol=tol, what="joint pmf")
        mass.setflags(write=False)
        self.factors = factors
        self.mass = mass

    @classmethod
    def _trusted(cls, factors, mass):
        # Skips validation for tables produced by exact operations on valid inputs.
        obj = cls.__new__(cls)
        obj.factors = tuple(factors)
        mass = np.ascontiguousarray(mass, dtype=float)
        mass.setflags(write=False)
        obj.mass = mass
        return obj

    @property
    def names(self):
        return tuple(f.name for f in self.factors)

    @property
    def shape(self):
        return self.mass.shape

    @property
    def flat(self):
        """Mass as a flat vector in mixed-radix order."""
        return self.mass.reshape(-1)

    @property
    def support(self):
        return self.mass > 0

    def axes(self, refs):
        return _axes_of(self.factors, refs)

    def factor(self, ref):
        return self.factors[self.axes(ref)[0]]

    def table(self, refs):
        """Marginal mass over ``refs`` as an ndarray with axes in ``refs`` order."""
        return marginalize(self, refs).mass

    def prob(self, **symbols):
        """Probability of a full assignment given by factor name."""
        if set(symbols) != set(self.names):
            raise UsageError(f"need a symbol for every factor {self.names}")
        idx = tuple(f.index(symbols[f.name]) for f in self.factors)
        return float(self.mass[idx])

    def __repr__(self):
        dims = "x".join(f"{f.name}[{f.size}]" for f in self.factors)
        return f"{type(self).__name__}({dims})"


class Pmf(JointPmf):
    """Distribution over a single alphabet."""

    def __init__(self, alphabet: Alphabet, mass, tol=INPUT_TOL):
        super().__init__([alphabet], mass, tol=tol)

    @property
    def alphabet(self):
        return self.factors[0]

    @classmethod
    def uniform(cls, alphabet):
        return cls(alphabet, np.full(alphabet.size, 1.0 / alphabet.size))

    @classmethod
    def point(cls, alphabet, symbol):
        mass = np.zeros(alphabet.size)
        mass[alphabet.index(symbol)] = 1.0
        return cls(alphabet, mass)


class CondPmf:
    """Row-stochastic kernel from a product of ``given`` alphabets to a product of ``outcome`` alphabets.

    ``table`` has shape ``given_shape + outcome_shape``; every slice over the
    outcome axes is a pmf.
    """

    def __init__(self, given: Sequence[Alphabet], outcome: Sequence[Alphabet], table, tol=INPUT_TOL):
        given, outcome = tuple(given), tuple(outcome)
        names = [f.name for f in given + outcome]
        if len(set(names)) != len(names):
            raise UsageError(f"kernel factor names must be distinct, got {names}")
        shape = tuple(f.size for f in given + outcome)
        check_size(shape)
        table = np.asarray(table, dtype=float)
        if table.size != int(np.prod(shape)):
            raise UsageError(f"kernel table has {table.size} entries, factors need {shape}")
        out_axes = tuple(range(len(given), len(shape)))
        table = check_probabilities(table.reshape(shape), axis=out_axes, tol=tol, what="kernel rows")
        table.setflags(write=False)
        self.given = given
        self.outcome = outcome
        self.table = table

    @property
    def given_names(self):
        return tuple(f.name for f in self.given)

    @property
    def outcome_names(self):
        return tuple(f.name for f in self.outcome)

    def row(self, *given_symbols):
        """Outcome pmf for one conditioning assignment."""
        if len(given_symbols) != len(self.given):
            raise UsageError(f"need {len(self.given)} conditioning symbols")
        idx = tuple(f.index(s) for f, s in zip(self.given, given_symbols))
        return JointPmf._trusted(self.outcome, self.table[idx])

    @classmethod
    def identity(cls, given: Alphabet, outcome: Alphabet):
        if given.size != outcome.size:
            raise UsageError("identity kernel needs equal alphabet sizes")
        return cls([given], [outcome], np.eye(given.size))

    def __repr__(self):
        g = ",".join(self.given_names)
        o = ",".join(self.outcome_names)
        return f"CondPmf({o}|{g})"


def _letters(count):
    return "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"[:count]


def marginalize(j: JointPmf, keep) -> JointPmf:
    """Sum out every factor not in ``keep``; the result's factors follow ``keep`` order."""
    if isinstance(keep, (list, tuple)) and len(keep) == 0:
        raise UsageError("marginalize needs a nonempty keep set")
    axes = j.axes(keep)
    drop = tuple(i for i in range(len(j.factors)) if i not in axes)
    mass = j.mass.sum(axis=drop) if drop else j.mass
    # After summing, remaining axes are in ascending original order.
    remaining = sorted(axes)
    order = [remaining.index(a) for a in axes]
    mass = np.transpose(mass, order)
    return JointPmf._trusted([j.factors[a] for a in axes], mass)


def compose(prior: JointPmf, kernel: CondPmf) -> JointPmf:
    """Joint law ``prior(.) * kernel(outcome | given)``.

    The kernel's conditioning factors are matched by name to factors of the
    prior and must carry identical alphabets. Outcome factors are appended.
    """
    for g in kernel.given:
        if g.name not in prior.names:
            raise UsageError(f"kernel conditions on {g.name!r}, absent from prior {prior.names}")
        if prior.factor(g.name) != g:
            raise UsageError(f"alphabet mismatch for factor {g.name!r}")
    clash = set(kernel.outcome_names) & set(prior.names)
    if clash:
        raise UsageError(f"kernel outcomes {sorted(clash)} already present in prior")
    k = len(prior.factors)
    letters = _letters(k + len(kernel.outcome))
    prior_sub = letters[:k]
    given_sub = "".join(letters[prior.names.index(n)] for n in kernel.given_names)
    out_sub = letters[k:]
    mass = np.einsum(f"{prior_sub},{given_sub}{out_sub}->{prior_sub}{out_sub}", prior.mass, kernel.table)
    factors = prior.factors + kernel.outcome
    check_size(mass.shape)
    return JointPmf._trusted(factors, mass)


def conditional(j: JointPmf, target, given, fill="uniform") -> CondPmf:
    """Kernel ``P(target | given)`` derived from ``j``.

    Rows for zero-probability conditioning assignments are filled with the
    uniform law (``fill="uniform"``) or the target marginal (``fill="marginal"``).
    """
    t_axes, g_axes = j.axes(target), j.axes(given)
    if set(t_axes) & set(g_axes):
        raise UsageError("target and given factor sets overlap")
    joint = j.table(g_axes + t_axes)
    g_shape = joint.shape[: len(g_axes)]
    t_shape = joint.shape[len(g_axes):]
    flat = joint.reshape(int(np.prod(g_shape)), int(np.prod(t_shape)))
    norm = flat.sum(axis=1, keepdims=True)
    if fill == "marginal":
        default = flat.sum(axis=0)
    else:
        default = np.full(flat.shape[1], 1.0 / flat.shape[1])
    with np.errstate(invalid="ignore", divide="ignore"):
        rows = np.where(norm > 0, flat / np.where(norm > 0, norm, 1.0), default)
    return CondPmf(
        [j.factors[a] for a in g_axes],
        [j.factors[a] for a in t_axes],
        rows.reshape(g_shape + t_shape),
        tol=1e-9,
    )


def _entropy_of(mass):
    return float(entr(mass).sum() / _LN2)


def entropy(p: JointPmf) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    h = _entropy_of(p.mass)
    return min(max(h, 0.0), float(np.log2(p.mass.size)))


def _check_disjoint(j, a, b):
    a_axes, b_axes = j.axes(a), j.axes(b)
    if set(a_axes) & set(b_axes):
        raise UsageError("factor sets must be disjoint")
    return a_axes, b_axes


def conditional_entropy(j: JointPmf, target, given) -> float:
    """``H(target | given) = H(target, given) - H(given)`` in bits."""
    t_axes, g_axes = _check_disjoint(j, target, given)
    if not g_axes:
        return entropy(marginalize(j, t_axes))
    h = _entropy_of(j.table(t_axes + g_axes)) - _entropy_of(j.table(g_axes))
    return max(h, 0.0)


def mutual_information(j: JointPmf, a, b) -> float:
    """``I(a; b)`` in bits. Symmetric and nonnegative."""
    a_axes, b_axes = _check_disjoint(j, a, b)
    h = _entropy_of(j.table(a_axes)) + _entropy_of(j.table(b_axes)) - _entropy_of(j.table(a_axes + b_axes))
    return max(h, 0.0)


def info_density(j: JointPmf, a, b):
    """Pointwise ``log2 P(a,b) / (P(a) P(b))`` on the support of ``P(a,b)``.

    Returns a masked array with axes ``a + b``; off-support cells are masked.
    """
    a_axes, b_axes = _check_disjoint(j, a, b)
    joint = j.table(a_axes + b_axes)
    pa = j.table(a_axes)
    pb = j.table(b_axes)
    outer = np.multiply.outer(pa, pb)
    on = joint > 0
    values = np.zeros_like(joint)
    values[on] = np.log2(joint[on] / outer[on])
    return np.ma.MaskedArray(values, mask=~on)


def self_info(p: JointPmf, symbol):
    """``-log2 P(symbol)``, or :data:`OFF_SUPPORT` when the symbol has zero mass.

    For a multi-factor pmf pass a tuple with one symbol per factor.
    """
    if len(p.factors) == 1 and not isinstance(symbol, tuple):
        symbol = (symbol,)
    if len(symbol) != len(p.factors):
        raise UsageError("symbol must name one value per factor")
    idx = tuple(f.index(s) for f, s in zip(p.factors, symbol))
    mass = p.mass[idx]
    if mass <= 0:
        return OFF_SUPPORT
    return float(-np.log2(mass))


def variational_distance(p: JointPmf, q: JointPmf) -> float:
    """L1 distance ``sum |p - q|``, in ``[0, 2]``."""
    if p.factors != q.factors:
        raise UsageError("variational distance needs identical factor structure")
    return float(min(np.abs(p.mass - q.mass).sum(), 2.0))
