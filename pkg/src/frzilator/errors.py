"""Exception hierarchy shared by all modules.

Every exception carries an ``exit_code`` used by the command-line front end.
"""


class FrzError(Exception):
    exit_code = 3


class PreconditionError(FrzError, ValueError):
    exit_code = 2


class DomainError(FrzError, ValueError):
    """Evaluation at a point where a formula is undefined."""


class OutsideDomain(DomainError):
    pass


class SingularLine(DomainError):
    pass


class DomainBoundary(DomainError):
    pass


class StateLeftDomain(FrzError):
    def __init__(self, msg, state=None, time=None):
        super().__init__(msg)
        self.state = state
        self.time = time


class StepBudgetExceeded(FrzError):
    pass


class NoEventBeforeBudget(FrzError):
    exit_code = 4


class LeftRectangle(FrzError):
    pass


class GrazingHit(FrzError):
    pass


class NoConvergence(FrzError):
    exit_code = 4


class FiberEscape(FrzError):
    pass


class NotClosed(FrzError):
    pass


class ParseError(FrzError):
    exit_code = 2

    def __init__(self, line_no, msg):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


class ValidationError(FrzError):
    exit_code = 2

    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason
