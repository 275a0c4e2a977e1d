"""Exception hierarchy.

Everything raised on bad input derives from ``ValueError`` so callers that
only care about "invalid input" can catch that.
"""


class CompdynError(Exception):
    """Base class for all package errors."""


class DegenerateMapError(CompdynError, ValueError):
    """Matrix with (numerically) vanishing determinant, or identity where a
    non-identity map is required."""


class InvalidAutomorphismError(CompdynError, ValueError):
    """Parameters do not describe an automorphism of the unit disk."""


class DomainError(CompdynError, ValueError):
    """Evaluation point or parameter outside the admissible region."""


class HypothesisError(CompdynError, ValueError):
    """The operator does not satisfy the hypothesis an operation needs
    (e.g. asking for Kitai data on an elliptic symbol)."""


class BudgetExhaustedError(CompdynError, RuntimeError):
    """A search did not converge within its configured budget."""


class NearParabolicWarning(UserWarning):
    """Two fixed points too close to separate at double precision."""


class QuadratureWarning(UserWarning):
    """Quadrature self-check (N vs 2N) disagrees by more than the threshold."""
