"""Exception hierarchy.

``exit_code`` follows the CLI taxonomy: 1 domain, 2 numerical, 3 IO.
"""


class OPUCError(Exception):
    exit_code = 2


class DomainError(OPUCError, ValueError):
    exit_code = 1


class NumericalError(OPUCError, ArithmeticError):
    exit_code = 2


class ConfigError(OPUCError):
    exit_code = 3


class OutputError(OPUCError, OSError):
    exit_code = 3


# domain-side failures: the inputs are outside what the formulas cover
class ZeroLeadingCoefficient(DomainError):
    pass


class PoleInParameter(DomainError):
    pass


class InvalidReflectionData(DomainError):
    pass


class DegenerateReflection(DomainError):
    """An operation divides by phi_n(0) and phi_n(0) vanishes."""


class DegenerateParameters(DomainError):
    pass


class PoleAtUnimodularProduct(DomainError):
    pass


class GridTooCoarse(DomainError):
    pass


class CoincidentCharges(DomainError):
    pass


class NoLadderForOperator(DomainError):
    pass


# numerical failures: the inputs are fine but the computation broke down
class SingularMatrix(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    def __init__(self, order, msg=None):
        self.order = order
        super().__init__(msg or f"moment matrix not positive definite at order {order}")


class NumericalBreakdown(NumericalError):
    pass


class SingularityApproached(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, msg, worst_residual=float("nan")):
        self.worst_residual = worst_residual
        super().__init__(f"{msg} (worst residual {worst_residual:.3e})")


class PoleOfA(NumericalError):
    pass
