"""Exception hierarchy shared across the package."""


class GnetError(Exception):
    """Base class for all library errors."""


class ParseError(GnetError):
    """Syntax error in a guard expression or composition expression."""

    def __init__(self, position, message):
        super().__init__(f"at {position}: {message}")
        self.position = position
        self.message = message


class UnboundVariable(GnetError):
    def __init__(self, name):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class TypeMismatch(GnetError):
    pass


class UnknownService(GnetError):
    def __init__(self, name):
        super().__init__(f"unknown service {name!r}")
        self.name = name


class DuplicateService(GnetError):
    def __init__(self, name):
        super().__init__(f"duplicate service {name!r}")
        self.name = name


class UnknownBlock(GnetError):
    def __init__(self, name):
        super().__init__(f"unknown block {name!r}")
        self.name = name


class UnknownMethod(GnetError):
    def __init__(self, service, method):
        super().__init__(f"service {service!r} has no method {method!r}")
        self.service = service
        self.method = method


class ArityMismatch(GnetError):
    pass


class EmptyBranchSet(GnetError):
    pass


class MissingReqMethod(GnetError):
    def __init__(self, service):
        super().__init__(f"service {service!r} declares no 'req' method")
        self.service = service


class MalformedBlock(GnetError):
    pass


class EmptyReplacement(GnetError):
    pass


class NotEnabled(GnetError):
    pass


class DepthLimitExceeded(GnetError):
    pass


class SubnetDeadlock(GnetError):
    pass


class UnboundFreeVariable(GnetError):
    def __init__(self, name):
        super().__init__(f"free variable {name!r} has no declared domain")
        self.name = name


class UnflattenableIsp(GnetError):
    pass


class UndeclaredPlaceReference(GnetError):
    pass
