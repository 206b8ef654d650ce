"""Exception types raised by the simulator and the MPI surface."""


class HorizonSimError(Exception):
    pass


class UnknownPset(HorizonSimError, KeyError):
    pass


class SessionClosed(HorizonSimError):
    pass


class DoubleInit(HorizonSimError):
    pass


class Revoked(HorizonSimError):
    """A blocking operation hit a revoked communicator."""

    def __init__(self, cid):
        super().__init__(f"communicator #{cid} is revoked")
        self.cid = cid


class EmptyAliveGroup(HorizonSimError):
    pass


class InvalidScenario(HorizonSimError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(InvalidScenario):
    pass


class NotQuiescent(HorizonSimError):
    pass
