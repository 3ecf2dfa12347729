"""Exception types shared across the package."""


class ConsensusError(Exception):
    """Base class for all package errors."""


class DimensionError(ConsensusError, ValueError):
    """Vectors, matrices or graphs disagree on the node count."""


class WeightViolation(ConsensusError, ValueError):
    """Weights or parameters break the admissibility rules for a digraph.

    ``report`` is the list of :class:`~surplus_consensus.protocol.Violation`
    found, ``k`` the time step at which they were detected (if known).
    """

    def __init__(self, report, k=None):
        self.report = list(report)
        self.k = k
        head = f"invalid weights at k={k}" if k is not None else "invalid weights"
        lines = "; ".join(str(v) for v in self.report[:5])
        more = f" (+{len(self.report) - 5} more)" if len(self.report) > 5 else ""
        super().__init__(f"{head}: {lines}{more}")


class ConfigError(ConsensusError, ValueError):
    """An experiment config is malformed. ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
