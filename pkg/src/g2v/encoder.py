"""Frozen video encoder: maps a graph video to a fixed link embedding.

A seeded toy transformer stands in for a large pretrained backbone at desk
scale; weights are generated once from a splitmix64 stream and never updated,
so the mapping is a pure function of (pixels, config). Real backbones plug in
through the `.gve` import path instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .video import GraphVideo, fnv1a64

# Bump when the frozen pipeline changes; golden-value tests pin against this.
ENCODER_VERSION = 1

_U64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 PRNG; trivially portable, used only for frozen weights."""

    def __init__(self, seed: int):
        self.state = seed & _U64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _U64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
        return (z ^ (z >> 31)) & _U64

    def next_unit(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, a: float, shape) -> np.ndarray:
        n = int(np.prod(shape))
        vals = np.empty(n, dtype=np.float64)
        for i in range(n):
            vals[i] = (2.0 * self.next_unit() - 1.0) * a
        return vals.reshape(shape).astype(np.float32)


@dataclass(frozen=True)
class EncoderConfig:
    d_vid: int = 128
    d_model: int = 128
    tube_t: int = 2
    patch: int = 8
    heads: int = 4
    mlp_hidden: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.d_model % self.heads:
            raise ValueError("d_model must be divisible by heads")

    def canonical(self) -> str:
        return (f"d_vid={self.d_vid},d_model={self.d_model},ft={self.tube_t},"
                f"p={self.patch},heads={self.heads},mlp_hidden={self.mlp_hidden},"
                f"seed={self.seed}")

    def config_hash(self) -> int:
        return fnv1a64(self.canonical())


@dataclass(frozen=True)
class LinkEmbedding:
    key: tuple  # (u, v, t_star, config_hash)
    vec: np.ndarray  # float32 [d_vid]


def _glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


class FrozenVideoEncoder:
    """Tubelet-patchify -> linear projection -> sinusoidal position codes ->
    one self-attention block -> feature norm -> MLP block -> mean pool ->
    output head. All weights frozen at construction.

    Weight generation order (one splitmix64 stream, row-major per array):
    proj W, proj b, Wq, Wk, Wv, Wo, mlp W1, mlp b1, mlp W2, mlp b2,
    head W, head b. Biases use their layer's glorot bound.
    """

    def __init__(self, cfg: EncoderConfig):
        self.cfg = cfg
        rng = SplitMix64(cfg.seed)
        d = cfg.d_model
        tok = cfg.tube_t * 3 * cfg.patch * cfg.patch
        self.token_dim = tok
        a = _glorot_bound(tok, d)
        self.proj_w = rng.uniform(a, (tok, d))
        self.proj_b = rng.uniform(a, (d,))
        a = _glorot_bound(d, d)
        self.wq = rng.uniform(a, (d, d))
        self.wk = rng.uniform(a, (d, d))
        self.wv = rng.uniform(a, (d, d))
        self.wo = rng.uniform(a, (d, d))
        a1 = _glorot_bound(d, cfg.mlp_hidden)
        self.mlp_w1 = rng.uniform(a1, (d, cfg.mlp_hidden))
        self.mlp_b1 = rng.uniform(a1, (cfg.mlp_hidden,))
        a2 = _glorot_bound(cfg.mlp_hidden, d)
        self.mlp_w2 = rng.uniform(a2, (cfg.mlp_hidden, d))
        self.mlp_b2 = rng.uniform(a2, (d,))
        ah = _glorot_bound(d, cfg.d_vid)
        self.head_w = rng.uniform(ah, (d, cfg.d_vid))
        self.head_b = rng.uniform(ah, (cfg.d_vid,))
        self._pos_cache = {}

    def _positions(self, n: int) -> np.ndarray:
        if n not in self._pos_cache:
            d = self.cfg.d_model
            pos = np.arange(n, dtype=np.float32)[:, None]
            i = np.arange(d, dtype=np.float32)[None, :]
            angle = pos / np.power(np.float32(10000.0), (2 * (i // 2)) / np.float32(d))
            pe = np.where(i % 2 == 0, np.sin(angle), np.cos(angle)).astype(np.float32)
            self._pos_cache[n] = pe
        return self._pos_cache[n]

    def _tokens(self, pixels: np.ndarray) -> np.ndarray:
        """(B, F, 3, H, W) uint8 -> (B, N, token_dim) float32, tokens ordered
        by flattened (t, h, w) tubelet index."""
        cfg = self.cfg
        b, f, c, h, w = pixels.shape
        if c != 3 or f % cfg.tube_t or h % cfg.patch or w % cfg.patch:
            raise ShapeMismatch(
                f"video {pixels.shape[1:]} incompatible with tube "
                f"({cfg.tube_t},{cfg.patch},{cfg.patch})")
        x = pixels.astype(np.float32) / np.float32(255.0)
        ft, p = cfg.tube_t, cfg.patch
        x = x.reshape(b, f // ft, ft, c, h // p, p, w // p, p)
        # -> (B, t, h, w, ft, c, p, p)
        x = x.transpose(0, 1, 4, 6, 2, 3, 5, 7)
        return np.ascontiguousarray(x).reshape(b, (f // ft) * (h // p) * (w // p),
                                               ft * c * p * p)

    def forward_batch(self, pixels: np.ndarray) -> np.ndarray:
        """(B, F, 3, H, W) uint8 -> (B, d_vid) float32."""
        cfg = self.cfg
        x = self._tokens(pixels) @ self.proj_w + self.proj_b
        n = x.shape[1]
        x = x + self._positions(n)[None]

        d, heads = cfg.d_model, cfg.heads
        dh = d // heads
        q = (x @ self.wq).reshape(-1, n, heads, dh).transpose(0, 2, 1, 3)
        k = (x @ self.wk).reshape(-1, n, heads, dh).transpose(0, 2, 1, 3)
        v = (x @ self.wv).reshape(-1, n, heads, dh).transpose(0, 2, 1, 3)
        scores = q @ k.transpose(0, 1, 3, 2) / np.float32(np.sqrt(dh))
        scores = scores - scores.max(axis=-1, keepdims=True)
        w = np.exp(scores, dtype=np.float32)
        w = w / w.sum(axis=-1, keepdims=True)
        att = (w @ v).transpose(0, 2, 1, 3).reshape(-1, n, d)
        x = x + att @ self.wo

        mu = x.mean(axis=-1, keepdims=True, dtype=np.float32)
        var = np.mean((x - mu) ** 2, axis=-1, keepdims=True, dtype=np.float32)
        x = (x - mu) / np.sqrt(var + np.float32(1e-5))

        h1 = np.maximum(x @ self.mlp_w1 + self.mlp_b1, np.float32(0))
        x = x + h1 @ self.mlp_w2 + self.mlp_b2

        pooled = x.mean(axis=1, dtype=np.float32)
        return (pooled @ self.head_w + self.head_b).astype(np.float32)


def encode_video(video: GraphVideo, cfg: EncoderConfig,
                 encoder: FrozenVideoEncoder = None) -> LinkEmbedding:
    """Embed one graph video; bitwise deterministic for a fixed config."""
    enc = encoder if encoder is not None else FrozenVideoEncoder(cfg)
    vec = enc.forward_batch(video.pixels[None])[0]
    u, v, t_star, frame_hash = video.key
    return LinkEmbedding((u, v, t_star, combined_hash(frame_hash, cfg)), vec)


def combined_hash(frame_config_hash: int, cfg: EncoderConfig) -> int:
    """Cache key hash covering both the rendering and encoder configs, so a
    change to either never serves a stale embedding."""
    return fnv1a64(f"{frame_config_hash:016x}|{cfg.canonical()}")
