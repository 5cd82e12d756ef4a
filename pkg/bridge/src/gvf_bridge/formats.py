"""Binary `.gvf` / `.gve` readers and writers.

The bridge talks to the main toolkit only through these file formats, so the
layouts are implemented here independently rather than imported:

`.gvf`: little-endian header ``<4sIIIIQQQd`` = magic ``GVF1``, frame count F,
channels C, height H, width W, config hash, u, v, t*, followed by F*C*H*W
uint8 pixel bytes.

`.gve`: header ``<4sIQQ`` = magic ``GVE1``, d_vid, config hash, record count,
then per record ``<QQd`` (u, v, t*) followed by d_vid float32 values.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadInputFile

GVF_MAGIC = b"GVF1"
GVE_MAGIC = b"GVE1"

_GVF_HEADER = "<4sIIIIQQQd"
_GVE_HEADER = "<4sIQQ"
_GVE_RECORD = "<QQd"


@dataclass(frozen=True)
class GvfFile:
    key: tuple           # (u, v, t_star)
    config_hash: int
    pixels: np.ndarray   # (F, 3, H, W) uint8


def read_gvf(path) -> GvfFile:
    path = Path(path)
    data = path.read_bytes()
    hsize = struct.calcsize(_GVF_HEADER)
    if len(data) < hsize:
        raise BadInputFile(f"{path}: header truncated")
    magic, f, c, h, w, chash, u, v, t_star = struct.unpack_from(_GVF_HEADER,
                                                                data)
    if magic != GVF_MAGIC:
        raise BadInputFile(f"{path}: bad magic {magic!r}, expected GVF1")
    n = f * c * h * w
    if len(data) != hsize + n:
        raise BadInputFile(f"{path}: expected {n} pixel bytes, "
                           f"got {len(data) - hsize}")
    pixels = np.frombuffer(data, dtype=np.uint8, offset=hsize)
    return GvfFile((int(u), int(v), float(t_star)), int(chash),
                   pixels.reshape(f, c, h, w).copy())


def write_gve(path, d_vid: int, config_hash: int, records) -> None:
    """records: iterable of ((u, v, t_star), float32 vector of length d_vid)."""
    with open(path, "wb") as fh:
        records = list(records)
        fh.write(struct.pack(_GVE_HEADER, GVE_MAGIC, d_vid, config_hash,
                             len(records)))
        for (u, v, t_star), vec in records:
            vec = np.ascontiguousarray(vec, dtype=np.float32)
            if vec.shape != (d_vid,):
                raise ValueError(f"record ({u},{v},{t_star}): "
                                 f"shape {vec.shape} != ({d_vid},)")
            fh.write(struct.pack(_GVE_RECORD, u, v, t_star))
            fh.write(vec.tobytes())
