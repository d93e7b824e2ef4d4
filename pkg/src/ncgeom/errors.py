"""Exception hierarchy; the CLI maps these onto exit codes 2, 3 and 4."""


class NCGeomError(Exception):
    pass


class ValidationError(NCGeomError, ValueError):
    """Bad input: shapes, ambients, symmetry, unparsable expressions (exit 2)."""


class NonUniqueError(NCGeomError):
    """An assembled linear system is rank deficient (exit 3)."""


class ToleranceError(NCGeomError):
    """A residual or truncation target was not met (exit 4)."""


class InversionError(ValidationError, ArithmeticError):
    """No certified inverse is available for the element."""


class InversionToleranceError(InversionError, ToleranceError):
    """The Neumann series needs more terms than allowed."""


class WindowOverflowError(ValidationError):
    """Data does not fit in the truncation window."""
