"""Exception hierarchy.

Two families matter to callers: :class:`InputError` (malformed or
inconsistent data, CLI exit code 1) and :class:`PreconditionError`
(well-formed data that violates a mathematical hypothesis, exit code 2).
"""


class VishikError(Exception):
    exit_code = 1


class InputError(VishikError, ValueError):
    exit_code = 1


class PreconditionError(VishikError, ArithmeticError):
    exit_code = 2


# series-core

class ShapeError(InputError):
    """Operands disagree in number of variables, truncation order or scalar mode."""


class CompositionDomainError(InputError):
    """Inner map of a composition does not fix the origin."""


class NonInvertibleError(PreconditionError):
    """Linear part of a map is singular."""


class BasePointError(PreconditionError):
    """A function that must vanish at the origin does not."""


class ImplicitSolveError(PreconditionError):
    """The partial derivative in the solved variable vanishes at the origin."""


class NotRegularError(PreconditionError):
    """Divisor is not regular of the declared order in the distinguished variable."""


class ContactOrderError(PreconditionError):
    """Declared contact/regularity order disagrees with the data."""


# contact / normal form

class UndecidableError(PreconditionError):
    """All Lie derivatives examined vanish; the jet order is too low to decide."""


class EquilibriumError(PreconditionError):
    """The vector field vanishes at the base point."""


class NotAContactError(PreconditionError):
    """The field is transversal to the surface (contact order 0)."""


class NotSimpleError(PreconditionError):
    """The contact is not simple."""


class DimensionError(PreconditionError):
    """Contact order exceeds m - 1."""


class OrderError(PreconditionError):
    """Truncation order too low for the requested computation."""


class DegenerateError(PreconditionError):
    """A constructed chart has singular Jacobian at the origin."""


class UnsupportedContactError(PreconditionError):
    """Half maps are only available at fold contacts."""


class SurfaceError(PreconditionError):
    """0 is not a regular value of the surface function (its gradient vanishes)."""


class ProblemError(InputError):
    """Problem file is malformed."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class BasePointNotOnSurfaceError(ProblemError):
    """Problem point does not lie on the surface h = 0."""
