"""Shared exceptions and floating-point comparison policy.

All threshold and grid comparisons in the package use a relative tolerance of
1e-9; coordinates within 1e-12 of 0 or 1 are snapped to the integral value;
budget feasibility allows a 1e-9 slack. Keeping the constants in one place
makes the policy auditable.
"""

from __future__ import annotations

REL_TOL = 1e-9    # threshold / grid comparisons
SNAP_TOL = 1e-12  # snap coordinates to {0, 1}
FEAS_TOL = 1e-9   # budget feasibility slack


class CapacityError(RuntimeError):
    """A request exceeds a hard size bound and is refused rather than degraded.

    Carries an optional ``count`` (e.g. the number of guess sequences that an
    enumeration would have produced) so callers can report it.
    """

    def __init__(self, message: str, count: int | None = None):
        super().__init__(message)
        self.count = count


class ProtocolError(RuntimeError):
    """A guess value was requested out of protocol order."""


def ge(a: float, b: float, tol: float = REL_TOL) -> bool:
    """a >= b up to relative tolerance (scale floor of 1.0)."""
    return a >= b - tol * max(1.0, abs(a), abs(b))


def le(a: float, b: float, tol: float = REL_TOL) -> bool:
    return ge(b, a, tol)
