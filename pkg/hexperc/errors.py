"""errors.py

Exception Hierarchy Shared by the hexperc Modules

"""


class PercolationError(Exception):
    """Base Class for All hexperc Errors"""

    def __init__(self, message):
        super().__init__(message)


class GeometryError(PercolationError, ValueError):
    """Raised for Degenerate or Malformed Lattice Geometry"""


class SpecValidationError(PercolationError, ValueError):
    """Raised When an Experiment Spec Fails its Schema or Semantic Checks"""


class OracleSizeError(PercolationError, ValueError):
    """Raised When a Region is Too Large for Exhaustive Enumeration"""


class BudgetExhaustedError(PercolationError):
    """Raised When Rejection Sampling Runs Out of Attempts

    Parameters
    ----------
    message : str
        Human Readable Description
    attempts : int
        Number of Proposals Drawn
    accepted : int
        Number of Proposals Satisfying the Event
    """

    def __init__(self, message, attempts, accepted):
        self.attempts = attempts
        self.accepted = accepted
        self.acceptance_rate = accepted / attempts if attempts else 0.0
        super().__init__(
            f"{message} (accepted {accepted} of {attempts}, "
            f"acceptance rate {self.acceptance_rate:.3g})"
        )
