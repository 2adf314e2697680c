"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """A parameter or input violates an operation's preconditions."""


class NoDataError(ValueError):
    """Not enough retained samples to compute the requested quantity."""


class IngestionError(ValueError):
    """An input file cannot be turned into a Recording."""
