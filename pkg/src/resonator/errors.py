"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for bad input or configuration, 3 for numerical failures.
"""

from __future__ import annotations


class ResonatorError(Exception):
    exit_code = 3

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "exit_code": self.exit_code}


class InputError(ResonatorError, ValueError):
    exit_code = 2


class NumericError(ResonatorError, ArithmeticError):
    exit_code = 3


# graph_core
class GraphError(InputError):
    pass


class NotTrivalent(GraphError):
    pass


class NonPositiveLength(GraphError):
    pass


class Disconnected(GraphError):
    pass


class BadCyclicOrder(GraphError):
    pass


class NonPositiveScale(InputError):
    pass


# zeta_symbolic
class MatrixTooLarge(InputError):
    pass


class IrrationalRates(InputError):
    pass


# resonance_solver
class ZeroLeadingCoefficient(NumericError):
    pass


class ZeroOnBoundary(NumericError):
    pass


class QuadratureNotConverged(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class NoSignInformation(NumericError):
    pass


# hyperbolic_kernel
class PoleHit(NumericError, ZeroDivisionError):
    pass


class NotHyperbolic(InputError):
    pass


class PoleInsideDisk(InputError):
    pass


class DomainError(NumericError):
    pass


# flow_ifs
class DegenerateSpine(InputError):
    pass


class GluingMismatch(InputError):
    pass


class NotADiskMap(InputError):
    pass


class NumericalFailure(NumericError):
    pass


# surface_zeta
class NotClosed(InputError):
    pass


class NotPermissible(InputError):
    pass


class PoleTooClose(NumericError):
    pass


class BoundNotApplicable(NumericError):
    pass


class ConvergenceWarning(UserWarning):
    """Raised as a warning when a product or series is used outside its convergence region."""


# cli
class ConfigError(InputError):
    pass


class BoundaryResonance(InputError):
    pass
