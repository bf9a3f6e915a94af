"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: input-side problems exit 1,
infeasibility and missing-policy conditions exit 2.
"""


class SeqFairError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(SeqFairError, ValueError):
    """A probability model or config violates its invariants."""


class EstimationError(SeqFairError, ValueError):
    """Samples cannot produce an estimate (e.g. an empty sample list)."""


class IngestError(SeqFairError, ValueError):
    """A data file failed schema or value validation.

    ``row`` is the 1-based line number in the source file when known.
    """

    def __init__(self, message, row=None, path=None):
        self.row = row
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class PreconditionError(SeqFairError):
    """A solver's mathematical precondition does not hold for the input."""

    exit_code = 2


class InfeasibleError(SeqFairError):
    """No policy satisfies the requested constraints.

    ``binding`` names the constraint that emptied the feasible set.
    """

    exit_code = 2

    def __init__(self, message, binding=None):
        self.binding = binding
        super().__init__(message)


class NoSelectionError(SeqFairError):
    """The per-step acceptance probability is zero: the process never halts."""

    exit_code = 2
