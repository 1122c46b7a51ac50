class InvariantViolation(RuntimeError):
    """A conserved or bounded quantity left its admissible range.

    ``dump`` carries whatever state is needed to reproduce the failing step.
    """

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


class NumericalFailure(RuntimeError):
    """A step was refused: CFL violation or nonpositive density."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}
