"""
Exception hierarchy shared by every module and the CLI.

Every error renders to a machine-readable dict so the CLI can print it
as JSON on stderr, the same shape as the ``{"error": ...}`` bodies the
rest of the tooling emits.
"""
import re


def _snake(name: str) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


class FlagPointsError(Exception):
    exit_code = 3

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.__class__.__name__)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": _snake(self.__class__.__name__), "message": str(self), **self.details}


# ======================================================
#               VALIDATION (exit 2)
# ======================================================

class ValidationError(FlagPointsError):
    exit_code = 2


class ConfigError(ValidationError):
    pass


class InvalidVariety(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class UnsupportedFamily(ValidationError):
    pass


# ======================================================
#               BUDGET / PRECISION / DATA (exit 3)
# ======================================================

class BudgetExceeded(FlagPointsError):
    pass


class PrecisionLoss(FlagPointsError):
    pass


class IncompleteEnumeration(FlagPointsError):
    pass


class InsufficientData(FlagPointsError):
    pass


class InsufficientMass(FlagPointsError):
    pass


# ======================================================
#               MATH
# ======================================================

class ZeroVector(FlagPointsError):
    pass


class DependentRows(FlagPointsError):
    pass


class NotInChart(FlagPointsError):
    pass
