"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Shapes, dimensions or context sets do not fit together."""


class DomainError(ValueError):
    """An argument lies outside the values an operation accepts."""


class NumericError(ArithmeticError):
    """A numerical sanity check failed (e.g. complex residue on a real quantity)."""


class DatasetError(ValueError):
    """The experiment dataset could not be parsed or validated."""
