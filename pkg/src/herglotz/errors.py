"""Exception hierarchy shared by the expression engine, the solvers and the CLI."""


class HerglotzError(Exception):
    """Base class for every error raised by this package."""


class ExprSyntaxError(HerglotzError):
    """Malformed expression text.

    ``offset`` is the byte offset into the UTF-8 encoded source and
    ``expected`` the set of token descriptions that would have been accepted.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class UnknownIdentifier(HerglotzError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at byte {offset}")


class DomainError(HerglotzError, ArithmeticError):
    """Evaluation left the real domain (log of nonpositive, division by zero, ...)."""


class EvalOverflow(DomainError):
    """Floating point overflow during evaluation."""


class MissingDerivative(HerglotzError):
    def __init__(self, order, available):
        self.order = order
        self.available = available
        super().__init__(
            f"expression needs D{order}x but the jet only carries orders 0..{available}"
        )


class OrderMismatch(HerglotzError):
    pass


class SingularEL(HerglotzError):
    """The Euler-Lagrange residual does not depend on the highest derivative."""


class NoConvergence(HerglotzError):
    pass


class NoDescent(HerglotzError):
    pass


class BlowUp(HerglotzError):
    """|z| (or the state) escaped the admissible range before the end of the interval."""

    def __init__(self, t_star, value=None):
        self.t_star = t_star
        self.value = value
        super().__init__(f"solution blew up at t = {t_star:.6g}")


class IllPosedBoundary(HerglotzError):
    pass


class DegreeTooLow(HerglotzError):
    pass


class OutOfRange(HerglotzError):
    pass
