"""Binary interchange formats.

`.gvf` frame stacks: magic "GVF1", little-endian u32 F, C, H, W, u64
config-hash, u64 u, u64 v, f64 t*, then F*C*H*W raw uint8 in frame, channel,
row, column order.

`.gve` embedding files: magic "GVE1", little-endian u32 d_vid, u64
config-hash, u64 count, then per record u64 u, u64 v, f64 t*, d_vid * f32.

Model checkpoints: magic "G2VC", version u32, JSON metadata blob, named f64
arrays with shape headers, trailing CRC32 of everything after the magic.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import BadMagic, DimMismatch, TruncatedFile
from .video import GraphVideo

GVF_MAGIC = b"GVF1"
GVE_MAGIC = b"GVE1"
CKPT_MAGIC = b"G2VC"
CKPT_VERSION = 1


def write_gvf(path, video: GraphVideo) -> None:
    u, v, t_star, chash = video.key
    f, c, h, w = video.pixels.shape
    payload = struct.pack("<4sIIIIQQQd", GVF_MAGIC, f, c, h, w,
                          chash, u, v, t_star)
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(np.ascontiguousarray(video.pixels).tobytes())


def read_gvf(path) -> GraphVideo:
    data = Path(path).read_bytes()
    header_fmt = "<4sIIIIQQQd"
    hsize = struct.calcsize(header_fmt)
    if len(data) < hsize:
        raise TruncatedFile(f"{path}: header truncated")
    magic, f, c, h, w, chash, u, v, t_star = struct.unpack_from(header_fmt, data)
    if magic != GVF_MAGIC:
        raise BadMagic(f"{path}: expected GVF1")
    n = f * c * h * w
    if len(data) != hsize + n:
        raise TruncatedFile(f"{path}: expected {n} pixel bytes, got {len(data) - hsize}")
    pixels = np.frombuffer(data, dtype=np.uint8, offset=hsize).reshape(f, c, h, w)
    return GraphVideo((int(u), int(v), float(t_star), int(chash)), pixels.copy())


def _gve_record_size(d_vid: int) -> int:
    return 8 + 8 + 8 + 4 * d_vid


def write_gve(path, d_vid: int, config_hash: int, records) -> None:
    """records: iterable of ((u, v, t_star), vec[f32 d_vid])."""
    records = list(records)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIQQ", GVE_MAGIC, d_vid, config_hash, len(records)))
        for (u, v, t_star), vec in records:
            vec = np.asarray(vec, dtype=np.float32)
            if vec.shape != (d_vid,):
                raise DimMismatch(f"record ({u},{v},{t_star}): dim {vec.shape} != {d_vid}")
            fh.write(struct.pack("<QQd", u, v, t_star))
            fh.write(vec.tobytes())


def read_gve(path):
    """Returns (d_vid, config_hash, [((u, v, t_star), vec), ...])."""
    data = Path(path).read_bytes()
    header_fmt = "<4sIQQ"
    hsize = struct.calcsize(header_fmt)
    if len(data) < hsize:
        raise TruncatedFile(f"{path}: header truncated")
    magic, d_vid, chash, count = struct.unpack_from(header_fmt, data)
    if magic != GVE_MAGIC:
        raise BadMagic(f"{path}: expected GVE1")
    rec = _gve_record_size(d_vid)
    if len(data) != hsize + rec * count:
        raise TruncatedFile(
            f"{path}: declared {count} records, payload holds "
            f"{(len(data) - hsize) // rec}")
    out = []
    off = hsize
    for _ in range(count):
        u, v, t_star = struct.unpack_from("<QQd", data, off)
        off += 24
        vec = np.frombuffer(data, dtype=np.float32, count=d_vid, offset=off).copy()
        off += 4 * d_vid
        out.append(((int(u), int(v), float(t_star)), vec))
    return int(d_vid), int(chash), out


def save_checkpoint(path, arrays: dict, meta: dict) -> None:
    """arrays: name -> float64 ndarray; meta: JSON-serializable dict."""
    body = bytearray()
    body += struct.pack("<I", CKPT_VERSION)
    meta_b = json.dumps(meta, sort_keys=True).encode("utf-8")
    body += struct.pack("<I", len(meta_b)) + meta_b
    body += struct.pack("<I", len(arrays))
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype=np.float64)
        nb = name.encode("utf-8")
        body += struct.pack("<H", len(nb)) + nb
        body += struct.pack("<B", arr.ndim)
        body += struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b""
        body += arr.tobytes()
    crc = zlib.crc32(bytes(body)) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(body)
        fh.write(struct.pack("<I", crc))


def load_checkpoint(path):
    data = Path(path).read_bytes()
    if data[:4] != CKPT_MAGIC:
        raise BadMagic(f"{path}: expected G2VC")
    body, crc_b = data[4:-4], data[-4:]
    if zlib.crc32(body) & 0xFFFFFFFF != struct.unpack("<I", crc_b)[0]:
        raise TruncatedFile(f"{path}: checkpoint CRC mismatch")
    off = 0
    (version,) = struct.unpack_from("<I", body, off)
    off += 4
    if version != CKPT_VERSION:
        raise BadMagic(f"{path}: unsupported checkpoint version {version}")
    (mlen,) = struct.unpack_from("<I", body, off)
    off += 4
    meta = json.loads(body[off:off + mlen].decode("utf-8"))
    off += mlen
    (count,) = struct.unpack_from("<I", body, off)
    off += 4
    arrays = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", body, off)
        off += 2
        name = body[off:off + nlen].decode("utf-8")
        off += nlen
        (ndim,) = struct.unpack_from("<B", body, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}I", body, off) if ndim else ()
        off += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(body, dtype=np.float64, count=size, offset=off).copy()
        off += 8 * size
        arrays[name] = arr.reshape(shape)
    return arrays, meta
