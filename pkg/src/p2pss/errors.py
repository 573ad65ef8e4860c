"""Exception types raised by the simulator."""


class P2PSSError(Exception):
    """Base class for every error raised by this package."""


class DegenerateEstimate(P2PSSError):
    """The peer-count estimate is undefined because q~ is zero."""


class InsufficientRounds(P2PSSError):
    """eps* >= 1: too few rounds for the query threshold to carry guarantees."""


class InfeasibleRounds(P2PSSError):
    """No finite number of counters reaches the tolerance for this many rounds."""


class ConnectivityFailure(P2PSSError):
    """Random graph generation kept producing disconnected graphs."""


class IsolatedPeer(P2PSSError):
    """A peer has no neighbour to gossip with."""


class ConfigError(P2PSSError):
    """Invalid experiment or planner configuration."""
