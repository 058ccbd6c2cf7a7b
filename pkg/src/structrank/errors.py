"""Exception types shared across the package."""


class StructrankError(Exception):
    """Base class for all errors raised by this package."""


class StructureError(StructrankError):
    """A structure (pattern, graph, or derived-variable spec) is invalid."""


class UnsupportedOperationError(StructrankError):
    """The requested operation is not defined for the given input.

    Examples: knockout on a non-square pattern, combinatorial rank of a
    generalized structure (use the randomized estimator instead).
    """


class WrongDimensionError(StructrankError):
    """Curve tracing was requested at a point whose kernel is not 1-dimensional."""


class ParseError(StructrankError):
    """An input file could not be parsed.

    Carries enough position information to point at the offending spot:
    ``line`` is 1-based when known, ``where`` is a JSON-path-like locator
    for structured files.
    """

    def __init__(self, message, path=None, line=None, where=None):
        self.path = path
        self.line = line
        self.where = where
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}")
        if where is not None:
            loc.append(where)
        prefix = ": ".join(loc)
        super().__init__(f"{prefix}: {message}" if prefix else message)
