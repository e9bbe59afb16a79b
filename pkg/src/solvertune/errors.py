"""Exception hierarchy shared across the package."""


class TuningError(Exception):
    """Base class for all errors raised by this package."""


# -- search space ------------------------------------------------------------

class SchemaError(TuningError):
    """Search-space document does not conform to the expected schema."""


class DuplicateNameError(SchemaError):
    """Two parameters share the same name."""


class InvalidRangeError(SchemaError):
    """Parameter bounds are inconsistent (lo >= hi, log lo <= 0, <2 choices)."""


class DimensionMismatchError(TuningError):
    """Vector length does not match the search-space dimension."""


# -- DE engine / tuners ------------------------------------------------------

class PopulationTooSmallError(TuningError):
    """Population cannot support the requested mutation strategy."""


class UnevaluatedError(TuningError):
    """Operation requires fitness values that are not present."""


class LengthMismatchError(TuningError):
    """Parallel lists passed to an operation have different lengths."""


class BudgetExhaustedError(TuningError):
    """Tuner has no evaluation budget left."""


class UnknownProposalError(TuningError):
    """A result refers to a proposal id that was never asked."""


class DuplicateTellError(TuningError):
    """A proposal id was reported more than once."""


class NoEvaluationsError(TuningError):
    """No successful evaluation has been reported yet."""


# -- targets -----------------------------------------------------------------

class OutOfDomainError(TuningError):
    """Point lies outside the function's domain box."""


class UnknownPlaceholderError(TuningError):
    """Command template references a parameter not present in the space."""


class TrialTimeoutError(TuningError):
    """External command exceeded its time limit."""


class SpawnFailureError(TuningError):
    """External command could not be started."""


class ParseFailureError(TuningError):
    """Objective could not be extracted from command output."""


class NonFiniteObjectiveError(TuningError):
    """Target reported NaN or an infinite objective."""


# -- orchestrator / experiments ----------------------------------------------

class ValidationError(TuningError):
    """Experiment configuration failed validation."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class IdCollisionError(TuningError):
    """An experiment with this id already exists in the journal directory."""


class NotRunningError(TuningError):
    """Stop requested for an experiment that is not running."""


class UnknownExperimentError(TuningError):
    """No experiment with this id is known."""


# -- persistence ---------------------------------------------------------------

class SequenceGapError(TuningError):
    """Journal append skipped a sequence number."""


class CorruptRecordError(TuningError):
    """Journal contains an unreadable record before the final line."""


class NotResumableError(TuningError):
    """Journal does not describe an interrupted (running) experiment."""


class SeedMissingError(TuningError):
    """Resume requires a seeded experiment; this journal has no seed."""


# -- http --------------------------------------------------------------------

class BindFailureError(TuningError):
    """Server could not bind the requested port."""
