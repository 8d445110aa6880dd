"""Exception types shared across modules."""
from __future__ import annotations


class ParameterError(ValueError):
    """Code or construction parameters fall outside the supported box."""


class ShapeError(ValueError):
    """A message, codeword, or matrix has the wrong shape for its code."""


class InconsistentRowsError(ValueError):
    """No message encodes to the node contents being decoded."""


class SchemeError(ValueError):
    """A repair scheme fails one of the repair-matrix conditions.

    ``condition`` is one of ``not-dual``, ``support-violation``,
    ``rank-deficient-at-i*``, ``not-perfect-bandwidth``, ``illegal-column``
    or ``inflated-queries``.
    """

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        self.detail = detail
        super().__init__(f"{condition}: {detail}" if detail else condition)


class BudgetExceeded(RuntimeError):
    """A search or enumeration would exceed its configured budget."""


class BudgetExhausted(RuntimeError):
    """A randomized construction ran out of retries.

    ``best_coverage`` counts the (failed node, repair set) pairs handled by
    the best draw, out of ``total``.
    """

    def __init__(self, message: str, best_coverage: int = 0, total: int = 0):
        super().__init__(message)
        self.best_coverage = best_coverage
        self.total = total
