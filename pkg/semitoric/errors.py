class DimensionMismatch(ValueError):
    """Raised when vectors, lattices or maps of incompatible dimensions meet."""


class DependentRays(ValueError):
    """Raised when the rays of a simplicial cone are linearly dependent over Q."""


class NotInCone(ValueError):
    pass


class NotAFace(ValueError):
    pass


class NotAFan(ValueError):
    """Raised when two cones of a candidate fan meet outside a common face."""

    def __init__(self, message: str, pair: tuple | None = None):
        super().__init__(message)
        self.pair = pair


class ConeNotInFan(ValueError):
    pass


class UnsupportedRank(ValueError):
    pass


class ParseError(ValueError):
    pass


class SchemaError(ValueError):
    """Document does not match the schema; `path` is a JSON pointer to the offending node."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path


class CertificationFailure(RuntimeError):
    """Generators extracted from a membership oracle disagree with the oracle on the check box."""

    def __init__(self, message: str, witness: tuple | None = None):
        super().__init__(message)
        self.witness = witness


class RevalidationFailure(RuntimeError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
