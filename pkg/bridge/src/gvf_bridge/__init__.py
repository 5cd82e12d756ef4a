"""Bridge from rendered .gvf graph videos to .gve embedding files."""

from .errors import (BadInputFile, BridgeError, DimProbeFailure,
                     ModelLoadFailure)
from .formats import GvfFile, read_gvf, write_gve
from .job import BridgeJob, encode_directory
from .model import load_model, probe_width

__all__ = [
    "BadInputFile", "BridgeError", "DimProbeFailure", "ModelLoadFailure",
    "GvfFile", "read_gvf", "write_gve",
    "BridgeJob", "encode_directory",
    "load_model", "probe_width",
]

__version__ = "0.1.0"
