"""Input validation helpers and the package's exception types."""

import numpy as np

#: Accept user-supplied probabilities whose rows sum to 1 within this slack.
INPUT_TOL = 1e-9
#: Internal consistency tolerance for constructed distributions.
INTERNAL_TOL = 1e-12
#: Largest dense table the probability core will allocate.
MAX_DENSE_ENTRIES = 10**7


class UsageError(ValueError):
    """Raised when arguments are structurally inconsistent (bad factor sets, mismatched alphabets)."""


class DomainError(ValueError):
    """Raised when a numeric argument lies outside the domain of a function."""


class SizeError(ValueError):
    """Raised when an enumeration or dense allocation would exceed its guard."""


class SpecError(ValueError):
    """Raised when a channel specification violates one of its invariants.

    The offending diagnostics are kept on ``diagnostics``.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"invalid channel spec: {lines}")


def check_size(shape, limit=MAX_DENSE_ENTRIES, what="table"):
    total = int(np.prod(shape, dtype=object)) if len(shape) else 1
    if total > limit:
        raise SizeError(f"{what} would hold {total} entries (limit {limit})")
    return total


def check_probabilities(mass, axis=None, tol=INPUT_TOL, what="distribution"):
    """Validate nonnegative mass summing to one and return it renormalized.

    Parameters
    ----------
    mass : array_like
        Probability table.
    axis : int or tuple of int, optional
        Axes that must sum to one. ``None`` means the whole table.
    tol : float
        Allowed deviation of each sum from 1 before renormalizing.
    """
    mass = np.asarray(mass, dtype=float)
    if not np.all(np.isfinite(mass)):
        raise ValueError(f"{what} contains non-finite entries")
    if np.any(mass < 0):
        raise ValueError(f"{what} has negative entries (min {mass.min():.3g})")
    sums = mass.sum(axis=axis, keepdims=axis is not None)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > tol:
        raise ValueError(f"{what} does not sum to 1 (deviation {worst:.3g} > {tol:g})")
    return mass / sums


def check_fraction(value, name, low=0.0, high=1.0, closed=False):
    """Check ``low < value < high`` (or the closed interval) and return the value as float."""
    value = float(value)
    inside = (low <= value <= high) if closed else (low < value < high)
    if not inside:
        bracket = "[]" if closed else "()"
        raise DomainError(f"{name}={value!r} outside {bracket[0]}{low}, {high}{bracket[1]}")
    return value


def check_positive_int(value, name):
    if int(value) != value or value < 1:
        raise DomainError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
