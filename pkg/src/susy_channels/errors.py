"""Exception hierarchy shared by all modules."""


class SusyChannelsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SusyChannelsError, ValueError):
    """Argument outside the domain of a function (r = 0, pole of F, ...)."""


class ContractError(SusyChannelsError, ValueError):
    """A caller broke an input contract (missing derivative order, non-unitary S)."""


class ValidationError(SusyChannelsError, ValueError):
    """Parameters violate a construction constraint."""

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]


class SingularityError(SusyChannelsError):
    """The transformation function is singular at some finite radius."""

    def __init__(self, message, r=None):
        super().__init__(message)
        self.r = r


class InconsistencyError(SusyChannelsError):
    """A numerical self-check disagreed with a closed form."""


class IntegrationError(SusyChannelsError):
    """ODE integration failed (step underflow, non-finite state)."""

    def __init__(self, message, r=None):
        super().__init__(message)
        self.r = r


class MatchingError(SusyChannelsError):
    """Asymptotic matching system is ill-conditioned."""
