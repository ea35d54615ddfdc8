"""Exception types shared across the toolkit.

Two families matter to callers: configuration problems (bad inputs, bad
config keys) and infeasible designs (the physics says no). The CLI maps
them to exit codes 1 and 2 respectively; the service maps them to HTTP
400 and 409.
"""


class M2MError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(M2MError):
    """Bad configuration input; message names the offending key."""


class InvalidBandError(ConfigError):
    """Requested signal bandwidth is nonpositive or exceeds the system bandwidth."""


class InfeasibleError(M2MError):
    """No design/allocation satisfies the stated constraints."""


class InterferenceLimitedError(InfeasibleError):
    """CDMA target SINR unreachable at any transmit power (processing gain too small)."""


class BudgetError(InfeasibleError):
    """Failure-probability budget leaves no room for collision/outage events."""


class FloorViolationError(InfeasibleError):
    """An equal-share allocation falls below some device's feasibility floor."""


class ContractViolationError(M2MError):
    """Caller broke an input contract (e.g. unsorted gains where sorted required)."""


class UnsupportedError(M2MError):
    """Operation outside its supported domain (e.g. brute-force oracle above k=4)."""


class ConvergenceError(M2MError):
    """Iterative solver did not converge within its iteration cap."""
