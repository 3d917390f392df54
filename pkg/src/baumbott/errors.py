"""Domain errors.

Every error carries a stable ``code`` used by the CLI's structured error
objects.
"""


class BaumBottError(Exception):
    code = "Error"

    def to_dict(self):
        return {"code": self.code, "message": str(self)}


class ParseError(BaumBottError, ValueError):
    """Malformed polynomial / Φ text. ``offset`` is the byte offset of the fault."""

    code = "ParseError"

    def __init__(self, message, offset=None, text=None):
        self.offset = offset
        self.text = text
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)

    def to_dict(self):
        d = super().to_dict()
        d["offset"] = self.offset
        return d


class VariableCountMismatch(BaumBottError, ValueError):
    code = "VariableCountMismatch"


class InfiniteDimensional(BaumBottError):
    """The quotient algebra is infinite dimensional (common zero set is not isolated)."""

    code = "InfiniteDimensional"


class OriginNotOnlyZero(BaumBottError):
    """Some coordinate is not nilpotent modulo the ideal.

    The generators have affine common zeros other than the origin, so the
    purely global residue computation does not apply.
    """

    code = "OriginNotOnlyZero"


class NotSingular(BaumBottError):
    code = "NotSingular"


class DegreeMismatch(BaumBottError, ValueError):
    code = "DegreeMismatch"


class PoleClearingFailed(BaumBottError):
    code = "PoleClearingFailed"


class NotIsolatedOnP2(BaumBottError):
    code = "NotIsolatedOnP2"


class OnSingularity(BaumBottError):
    code = "OnSingularity"


class ShapeMismatch(BaumBottError, ValueError):
    code = "ShapeMismatch"


class JobError(BaumBottError, ValueError):
    """Invalid job specification (unknown keys, missing fields)."""

    code = "ParseError"
