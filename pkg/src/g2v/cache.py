"""Disk-backed cache of link embeddings.

Layout: a directory of `.gve` shards plus `manifest.json` mapping each key to
its shard, record index, and record CRC32. Entries whose checksum no longer
matches are dropped on load, which forces a recompute and overwrite.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .encoder import LinkEmbedding
from .errors import DimMismatch
from .formats import GVE_MAGIC, read_gve

SHARD_PREFIX = "shard-"
_HEADER_FMT = "<4sIQQ"
_HEADER_SIZE = struct.calcsize(_HEADER_FMT)
_COUNT_OFFSET = 4 + 4 + 8  # magic, d_vid, config_hash


def _key_str(key) -> str:
    u, v, t_star, chash = key
    return f"{u},{v},{float(t_star).hex()},{chash:016x}"


def _record_bytes(key, vec: np.ndarray) -> bytes:
    u, v, t_star, _ = key
    return struct.pack("<QQd", u, v, t_star) + np.asarray(vec, np.float32).tobytes()


class EmbeddingCache:
    """In-memory key -> embedding map with an optional on-disk shard store."""

    def __init__(self, d_vid: int, config_hash: int, path=None,
                 shard_capacity: int = 4096):
        self.d_vid = int(d_vid)
        self.config_hash = int(config_hash)
        self.path = Path(path) if path is not None else None
        self.shard_capacity = shard_capacity
        self.hits = 0
        self.misses = 0
        self._mem = {}
        self._manifest = {}
        self._cur_shard = None
        self._cur_count = 0
        if self.path is not None:
            self.path.mkdir(parents=True, exist_ok=True)
            self._load_disk()

    def _load_disk(self):
        mpath = self.path / "manifest.json"
        crcs = {}
        if mpath.exists():
            man = json.loads(mpath.read_text())
            crcs = {k: v["crc"] for k, v in man.get("entries", {}).items()}
        shards = sorted(self.path.glob(f"{SHARD_PREFIX}*.gve"))
        for shard in shards:
            d_vid, chash, records = read_gve(shard)
            if d_vid != self.d_vid:
                raise DimMismatch(f"{shard}: d_vid {d_vid} != cache {self.d_vid}")
            for i, ((u, v, t_star), vec) in enumerate(records):
                key = (u, v, t_star, chash)
                ks = _key_str(key)
                crc = zlib.crc32(_record_bytes(key, vec)) & 0xFFFFFFFF
                if ks in crcs and crcs[ks] != crc:
                    continue  # corrupt: drop so it gets recomputed
                self._mem[key] = vec
                self._manifest[ks] = {"shard": shard.name, "index": i, "crc": crc}
        if shards:
            last = shards[-1]
            with open(last, "rb") as fh:
                _, _, _, count = struct.unpack(_HEADER_FMT, fh.read(_HEADER_SIZE))
            if count < self.shard_capacity:
                self._cur_shard, self._cur_count = last, count

    def __len__(self):
        return len(self._mem)

    def keys(self):
        return self._mem.keys()

    def get(self, key) -> LinkEmbedding | None:
        vec = self._mem.get(key)
        return LinkEmbedding(key, vec) if vec is not None else None

    def put(self, emb: LinkEmbedding) -> None:
        vec = np.asarray(emb.vec, dtype=np.float32)
        if vec.shape != (self.d_vid,):
            raise DimMismatch(f"embedding dim {vec.shape} != {self.d_vid}")
        self._mem[emb.key] = vec
        if self.path is not None:
            self._append_record(emb.key, vec)

    def _append_record(self, key, vec):
        if self._cur_shard is None or self._cur_count >= self.shard_capacity:
            n = len(list(self.path.glob(f"{SHARD_PREFIX}*.gve")))
            self._cur_shard = self.path / f"{SHARD_PREFIX}{n:04d}.gve"
            with open(self._cur_shard, "wb") as fh:
                fh.write(struct.pack(_HEADER_FMT, GVE_MAGIC, self.d_vid,
                                     key[3], 0))
            self._cur_count = 0
        rec = _record_bytes(key, vec)
        with open(self._cur_shard, "r+b") as fh:
            fh.seek(0, 2)
            fh.write(rec)
            self._cur_count += 1
            fh.seek(_COUNT_OFFSET)
            fh.write(struct.pack("<Q", self._cur_count))
        self._manifest[_key_str(key)] = {
            "shard": self._cur_shard.name,
            "index": self._cur_count - 1,
            "crc": zlib.crc32(rec) & 0xFFFFFFFF,
        }

    def flush(self) -> None:
        if self.path is None:
            return
        mpath = self.path / "manifest.json"
        mpath.write_text(json.dumps(
            {"d_vid": self.d_vid, "entries": self._manifest},
            sort_keys=True, indent=0))

    def stats(self) -> dict:
        return {"entries": len(self._mem), "hits": self.hits,
                "misses": self.misses}


def cache_get_or_compute(key, cache: EmbeddingCache, compute) -> LinkEmbedding:
    """Return the cached embedding for key, computing and storing on miss."""
    hit = cache.get(key)
    if hit is not None:
        cache.hits += 1
        return hit
    emb = compute()
    if emb.key != key:
        raise ValueError(f"compute() returned key {emb.key}, expected {key}")
    cache.put(emb)
    cache.misses += 1
    return emb


def import_embeddings(path, expect_d_vid: int | None = None) -> EmbeddingCache:
    """Load a `.gve` file (e.g. from an external encoder) into a memory cache."""
    d_vid, chash, records = read_gve(path)
    if expect_d_vid is not None and d_vid != expect_d_vid:
        raise DimMismatch(f"{path}: d_vid {d_vid} != configured {expect_d_vid}")
    cache = EmbeddingCache(d_vid, chash)
    for (u, v, t_star), vec in records:
        cache._mem[(u, v, t_star, chash)] = vec
    return cache
