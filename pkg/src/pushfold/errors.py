"""Exception types shared across the pipeline, mapped to CLI exit codes."""


class ConfigError(Exception):
    """Bad or incomplete experiment configuration (exit code 2)."""


class DegenerateInputError(Exception):
    """Input carries no usable structure, e.g. a constant map or a
    density whose normalization constant is not positive (exit code 3)."""


class DivergenceError(Exception):
    """The integrator produced a non-finite state.

    Carries ``t``, the integration time at which the state first
    became non-finite.
    """

    def __init__(self, t: float, message: str | None = None):
        self.t = t
        super().__init__(message or f"state became non-finite at t={t:g}")


class RangeError(ValueError):
    """Query value outside the valid range of the queried object."""


class BranchError(ValueError):
    """Image value does not belong to the requested monotone branch."""


class TableConstructionError(Exception):
    """The critical-value table could not be built consistently."""


class UnfoldError(Exception):
    """The unfolded map is not strictly increasing (flat segment in the
    sampled data that survived the merge rules)."""
