"""Exception types raised across the package."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class InvalidTrialError(ValueError):
    """A trial cannot produce a valid metric record (e.g. non-positive omega)."""


class NoSteadyStateError(ValueError):
    """Steady-state clipping left no samples."""


class TooFewObservationsError(ValueError):
    """Not enough observations to fit a media model."""


class DegenerateParametersError(ValueError):
    """Media parameters give a non-positive predicted torque."""


class MalformedInputError(ValueError):
    """An input file does not match its expected schema.

    ``line`` is the 1-based line number of the offending row when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
