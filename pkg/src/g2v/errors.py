"""Exception types shared across the package."""


class G2VError(Exception):
    """Base class for all package errors."""


class MalformedRow(G2VError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        super().__init__(f"malformed row at line {line_no}: {detail}")


class NonMonotonicTimestamp(G2VError):
    def __init__(self, line_no: int):
        self.line_no = line_no
        super().__init__(f"timestamp decreases at line {line_no} (pass sort=True to reorder)")


class InconsistentFeatureWidth(G2VError):
    def __init__(self, line_no: int, expected: int, got: int):
        self.line_no = line_no
        super().__init__(f"feature width {got} at line {line_no}, expected {expected}")


class TooFewEvents(G2VError):
    pass


class ShapeMismatch(G2VError):
    pass


class BadMagic(G2VError):
    pass


class DimMismatch(G2VError):
    pass


class TruncatedFile(G2VError):
    pass


class CorruptCacheEntry(G2VError):
    pass


class NegativeDelta(G2VError):
    pass


class NonFiniteLoss(G2VError):
    pass


class NoPositives(G2VError):
    pass


class SingleClass(G2VError):
    pass


class EmptyEvalSet(G2VError):
    pass


class UnknownKey(G2VError):
    def __init__(self, key: str, line_no: int):
        self.key = key
        self.line_no = line_no
        super().__init__(f"unknown config key {key!r} at line {line_no}")


class InvalidValue(G2VError):
    def __init__(self, key: str, detail: str = ""):
        self.key = key
        super().__init__(f"invalid value for {key!r}: {detail}")


class UsageError(G2VError):
    pass
