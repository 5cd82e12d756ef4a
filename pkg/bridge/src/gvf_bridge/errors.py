class BridgeError(Exception):
    """Base class for all bridge failures."""


class BadInputFile(BridgeError):
    """A .gvf input is missing, truncated, or malformed."""


class ModelLoadFailure(BridgeError):
    """The requested model identifier could not be instantiated."""


class DimProbeFailure(BridgeError):
    """The model's embedding width could not be determined."""
