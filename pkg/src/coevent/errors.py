"""Exception hierarchy shared by every module."""


class CoEventError(Exception):
    """Base class for all engine errors."""


class StageMismatchError(CoEventError, ValueError):
    """Two objects from different stages were combined."""


class NoPredecessorError(CoEventError, ValueError):
    """A restriction was requested at stage 0."""


class InvalidLinkError(CoEventError, ValueError):
    """A parent map is not total or not surjective."""

    def __init__(self, message, orphans=()):
        super().__init__(message)
        self.orphans = tuple(orphans)


class ValidationError(CoEventError, ValueError):
    """A system or measure failed validation."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class BudgetExceededError(CoEventError, RuntimeError):
    """An exponential enumeration would exceed its configured budget."""


class InconsistentConstraintsError(CoEventError, ValueError):
    """Some event must be both affirmed and denied."""


class InvalidSupportError(CoEventError, ValueError):
    """Affirmed and denied traces collide on a proposed support."""


class SchemeMisuseError(CoEventError, ValueError):
    """A scheme was applied outside its preconditions."""


class OracleScaleError(CoEventError, ValueError):
    """The brute-force oracle was asked to run beyond its hard cap."""


class WalkTerminated(CoEventError, RuntimeError):
    """An expressible-sequence walk reached a co-event with no successors."""

    def __init__(self, stage, message=None):
        super().__init__(message or f"walk terminated: no allowed prolongation at stage {stage}")
        self.stage = stage
