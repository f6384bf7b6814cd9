"""Exception hierarchy.

Precondition-type failures (bad parameters, containment, topology) map to CLI
exit code 1; construction failures (an asserted inequality broke during a
build) map to exit code 2 and carry a witness.
"""


class HarnackLabError(Exception):
    """Base class for all library errors."""


class PreconditionError(HarnackLabError, ValueError):
    """An operation was called outside its admissible inputs."""


class ParameterError(PreconditionError):
    pass


class TopologyError(PreconditionError):
    """Domain has no boundary, graph is disconnected, or similar."""


class ContainmentError(PreconditionError):
    pass


class OverlapError(PreconditionError):
    pass


class ShellError(PreconditionError):
    """A distance band that should contain vertices is empty."""


class ConstructionError(HarnackLabError):
    """A constructive step violated an inequality it is supposed to guarantee."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness if witness is not None else {}
