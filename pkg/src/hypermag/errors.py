"""Exception hierarchy.

Everything raised on purpose by the package derives from `HypermagError`.
`NumericalFailure` marks solver-side failures (the CLI maps them to exit
code 2); `InputError` marks bad inputs and configuration (exit code 1).
"""


class HypermagError(Exception):
    pass


class InputError(HypermagError, ValueError):
    pass


class NumericalFailure(HypermagError, ArithmeticError):
    pass


# geometry inputs
class SpacelikeInput(InputError):
    pass


class WrongSheet(InputError):
    pass


class ZeroVelocity(InputError):
    pass


class ZeroSpeed(InputError):
    pass


class SubcriticalCurvature(InputError):
    pass


class NonpositiveEnergy(InputError):
    pass


class NonPeriodicField(InputError):
    pass


class ChartDomainError(InputError):
    pass


class MissingProvenance(InputError):
    pass


class NotStarShaped(InputError):
    pass


class RayDegenerate(InputError):
    pass


# numerical failures
class StepFailure(NumericalFailure):
    pass


class SingularSymbol(NumericalFailure):
    pass


class ResonantRadius(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class SingularJacobian(NumericalFailure):
    pass


class DegenerateJacobian(NumericalFailure):
    pass


class DegenerateFit(NumericalFailure):
    pass


class NotClosed(NumericalFailure):
    pass


# configuration and persistence
class ConfigError(InputError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class SchemaVersionMismatch(ConfigError):
    pass
