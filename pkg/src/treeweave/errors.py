"""Exceptions raised across the package."""


class TreeweaveError(Exception):
    """Base class for algorithmic failures (not usage errors)."""


class CapExceeded(ValueError):
    """Exhaustive enumeration would exceed the configured set cap."""


class RetriesExhausted(TreeweaveError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DichotomyViolation(TreeweaveError):
    """Neither enough leaves nor enough bare paths. Should never happen."""


class EmbedFailed(TreeweaveError):
    def __init__(self, component, frontier, message="embedding failed"):
        super().__init__(f"{message} (component {component}, frontier guest {frontier})")
        self.component = component
        self.frontier = frontier


class MatchingInfeasible(TreeweaveError):
    """Generalized Hall condition fails; `certificate` is the deficient set."""

    def __init__(self, certificate, demand, neighbours):
        super().__init__(
            f"deficient set of size {len(certificate)}: demand {demand} > {neighbours} neighbours"
        )
        self.certificate = certificate
        self.demand = demand
        self.neighbours = neighbours


class NoMatching(MatchingInfeasible):
    """A resilient template failed to match."""


class NoPathFound(TreeweaveError):
    pass


class StageStalled(TreeweaveError):
    def __init__(self, alpha, survivors, message=""):
        super().__init__(f"stage {alpha} stalled with {survivors} surviving requests. {message}".strip())
        self.alpha = alpha
        self.survivors = survivors


class ResampleExhausted(TreeweaveError):
    pass


class AbsorberFailed(TreeweaveError):
    pass


class CoverFailed(TreeweaveError):
    def __init__(self, phase, message=""):
        super().__init__(f"cover failed in phase '{phase}'. {message}".strip())
        self.phase = phase


class HypothesisViolation(ValueError):
    """Strict mode: inputs violate the literal hypotheses."""
