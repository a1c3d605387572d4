"""Exception types shared across the package.

The CLI maps these onto its exit codes: parse/configuration problems exit
with 2, numerical failures with 3.
"""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain of the operation."""


class ConfigurationError(ValueError):
    """A run or system configuration is inconsistent or incomplete."""


class ParseError(ConfigurationError):
    """A data file could not be parsed.

    ``line`` is the 1-based line number of the offending line, or ``None``
    when the problem concerns the file as a whole.
    """

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = []
        if source is not None:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class NumericalError(ArithmeticError):
    """The discretized problem could not be solved."""


class ClassificationError(NumericalError):
    """No state of the requested class (e.g. a trap level) was found."""
