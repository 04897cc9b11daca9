"""Exception taxonomy shared by the library and the CLI exit codes."""


class NilflowError(Exception):
    exit_code = 1


class DomainError(NilflowError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 3


class PreconditionError(DomainError):
    pass


class IntegrityError(DomainError):
    """A value violates a structural invariant (e.g. non-Hermitian coefficients)."""


class ObstructionError(DomainError):
    """The cohomological equation has a non-vanishing invariant distribution."""

    def __init__(self, magnitude, m=None, n=None):
        self.magnitude = magnitude
        self.m, self.n = m, n
        super().__init__(f"obstruction |D_{{{m},{n}}}| = {magnitude:.3e} above tolerance")


class SmallDivisorError(DomainError):
    def __init__(self, a, divisor):
        self.a, self.divisor = a, divisor
        super().__init__(f"small divisor |exp(2 pi i a alpha) - 1| = {divisor:.3e} at a = {a}")


class DegeneratePairError(DomainError):
    pass


class BudgetExhausted(NilflowError):
    exit_code = 4
