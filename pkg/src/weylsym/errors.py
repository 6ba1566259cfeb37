"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`WeylError`,
so callers can catch the whole family with one clause.
"""


class WeylError(Exception):
    """Base class for all library errors."""


class ProviderError(WeylError):
    """A coefficient provider could not produce a value at index ``k``."""

    def __init__(self, k, msg=None):
        self.k = int(k)
        super().__init__(msg or f"coefficient provider failed at k={self.k}")


class StructureError(WeylError):
    """A matrix violates a required structural identity (symplecticity, Gamma...)."""


class PropagationError(WeylError):
    """Stepping the system failed."""


class PropagationOverflow(PropagationError, OverflowError):
    """Unscaled propagation left the floating point range."""

    def __init__(self, k):
        self.k = int(k)
        super().__init__(f"solution overflowed at k={self.k}")


class SingularBoundary(WeylError):
    """``beta Ztilde_N(lam)`` is singular: ``lam`` is a finite-section eigenvalue."""

    def __init__(self, lam, N):
        self.lam = lam
        self.N = int(N)
        super().__init__(f"boundary matrix singular at lambda={lam!r}, N={self.N}")


class DegenerateSystem(WeylError):
    """Every boundary probe stays singular; the system looks degenerate."""


class NotConverged(WeylError):
    """An adaptive approximation did not reach its tolerance."""


class BadInput(WeylError):
    """Input data outside the admissible class (e.g. non-summable right-hand side)."""


class PoleError(WeylError):
    """Evaluation requested exactly at a real pole."""


class PoleOfTransform(WeylError):
    """The boundary-change bracket is singular at this point."""


class NotIsolated(WeylError):
    """Contour data inconsistent with a single isolated simple pole."""


class InconsistentResidue(WeylError):
    """Residue and eigenfunction norm disagree."""


class BadModel(WeylError):
    """Difference-operator model coefficients are inadmissible."""

    def __init__(self, k, msg=None):
        self.k = int(k)
        super().__init__(msg or f"inadmissible model coefficient at k={self.k}")


class ConfigError(WeylError):
    """Configuration file violates the schema; message starts with the field path."""
