"""Custom exception classes for Markov chain inference."""


class MarkovInferenceError(Exception):
    """Base exception for all inference errors."""

    pass


# Data problems (CLI exit code 2)


class DataError(MarkovInferenceError):
    """Observed data cannot support the requested computation."""

    pass


class PathTooShort(DataError):
    """Chain path has fewer states than the requested window length."""

    pass


class ZeroProbabilityWithPositiveCount(DataError):
    """A cell with probability zero under the model was observed."""

    pass


class DataDegenerate(DataError):
    """Objective is flat or unbounded for the given counts."""

    pass


class SequenceParseError(DataError):
    """Malformed sequence file token."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class OrderMismatch(DataError):
    """Tuple counts are of too low an order for the objective."""

    pass


# Optimisation problems (exit code 3)


class ConvergenceError(MarkovInferenceError):
    """Numerical optimisation did not produce a usable answer."""

    pass


class NoConvergence(ConvergenceError):
    """Every optimiser start failed."""

    pass


class TooManyFailures(ConvergenceError):
    """Monte Carlo study exceeded its failure budget."""

    pass


# Configuration problems (exit code 4)


class ConfigError(MarkovInferenceError):
    """Invalid model specification or run configuration."""

    pass


class InvalidSpec(ConfigError):
    """Model specification or run configuration is invalid."""

    pass


class OutOfDomain(ConfigError):
    """Parameter vector lies outside the model domain."""

    pass


class NoClosedForm(ConfigError):
    """No closed-form estimator exists for the family and method."""

    pass


# Chain / linear algebra problems


class ChainError(MarkovInferenceError):
    """Structural property of a transition matrix prevents the computation."""

    pass


class NotIrreducible(ChainError):
    pass


class NotAperiodic(ChainError):
    pass


class Singular(ChainError):
    """A linear solve failed."""

    pass


class SingularInformation(ChainError):
    """Information matrix is not invertible (parameter not identified)."""

    pass


class SingularP(ChainError):
    """Transition matrix has non-positive determinant."""

    pass
