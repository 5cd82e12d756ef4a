"""Fuse node states with the frozen video embedding and decode a link
probability. Three interchangeable strategies: gated cross-attention,
bilinear, and MLP-on-concatenation; 'none' bypasses the video signal."""

from __future__ import annotations

import math

import numpy as np

from .autodiff import Tensor, bilinear, concat
from .errors import ShapeMismatch
from .video import fnv1a64

STRATEGIES = ("attention", "bilinear", "mlp", "none")

PROB_EPS = 1e-7


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape):
    a = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)


def _param_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), fnv1a64(name) & 0x7FFFFFFF])


def _make(params: dict, seed: int, name: str, fan_in: int, fan_out: int, shape):
    params[name] = Tensor(_glorot(_param_rng(seed, name), fan_in, fan_out, shape),
                          trainable=True)


def _zeros(params: dict, name: str, shape):
    params[name] = Tensor(np.zeros(shape), trainable=True)


def init_fusion_params(strategy: str, d: int, d_vid: int, seed: int,
                       alpha: float = 0.01, gate_mode: str = "fixed",
                       attn_heads: int = 4) -> dict:
    """Trainable fusion parameters, seeded per parameter name so the same
    (seed, name) always yields the same initialization."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown fusion strategy {strategy!r}")
    p = {}
    _make(p, seed, "fusion.W_u", d, d, (d, d))
    _make(p, seed, "fusion.W_v", d, d, (d, d))
    if strategy == "none":
        return p
    _make(p, seed, "fusion.W_f", d_vid, d, (d_vid, d))
    if strategy == "attention":
        if d % attn_heads:
            raise ShapeMismatch(f"d={d} not divisible by heads={attn_heads}")
        for w in ("Wq", "Wk", "Wv", "Wo"):
            _make(p, seed, f"fusion.attn.{w}", d, d, (d, d))
        _make(p, seed, "fusion.ffn.W1", d, d, (d, d))
        _zeros(p, "fusion.ffn.b1", (d,))
        _make(p, seed, "fusion.ffn.W2", d, d, (d, d))
        _zeros(p, "fusion.ffn.b2", (d,))
        if gate_mode == "learnable":
            # theta initialized so sigmoid(theta) equals the configured alpha
            a = min(max(alpha, 1e-6), 1 - 1e-6)
            p["fusion.gate.theta"] = Tensor(np.array(math.log(a / (1 - a))),
                                            trainable=True)
    elif strategy == "bilinear":
        _make(p, seed, "fusion.bilinear.W", d, d, (d, d, d))
        _zeros(p, "fusion.bilinear.b", (d,))
    elif strategy == "mlp":
        _make(p, seed, "fusion.mlp.W1", 2 * d, d, (2 * d, d))
        _zeros(p, "fusion.mlp.b1", (d,))
        _make(p, seed, "fusion.mlp.W2", d, d, (d, d))
        _zeros(p, "fusion.mlp.b2", (d,))
    return p


def init_predictor_params(d: int, seed: int) -> dict:
    p = {}
    _make(p, seed, "pred.W1", 2 * d, d, (2 * d, d))
    _zeros(p, "pred.b1", (d,))
    _make(p, seed, "pred.W2", d, 1, (d, 1))
    _zeros(p, "pred.b2", (1,))
    return p


def init_backbone_params(d_msg: int, d_hidden: int, d: int, seed: int) -> dict:
    p = {}
    _make(p, seed, "backbone.W1", d_msg, d_hidden, (d_msg, d_hidden))
    _zeros(p, "backbone.b1", (d_hidden,))
    _make(p, seed, "backbone.W2", d_hidden, d, (d_hidden, d))
    _zeros(p, "backbone.b2", (d,))
    return p


def project_modalities(h_u, h_v, f, params: dict):
    """h~_u = W_u h_u, h~_v = W_v h_v, f~ = W_f f (batched, rows are items)."""
    h_u, h_v = _as_tensor(h_u), _as_tensor(h_v)
    hu = h_u @ params["fusion.W_u"]
    hv = h_v @ params["fusion.W_v"]
    if f is None or "fusion.W_f" not in params:
        return hu, hv, None
    f = _as_tensor(f)
    if f.shape[-1] != params["fusion.W_f"].shape[0]:
        raise ShapeMismatch(
            f"video dim {f.shape[-1]} != W_f input {params['fusion.W_f'].shape[0]}")
    return hu, hv, f @ params["fusion.W_f"]


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _attention_mix(h_t: Tensor, f_t: Tensor, params: dict) -> Tensor:
    # With a single key/value token the softmax weight is identically 1, so
    # the attended value reduces to the projected video token.
    att = (f_t @ params["fusion.attn.Wv"]) @ params["fusion.attn.Wo"]
    hid = (att @ params["fusion.ffn.W1"] + params["fusion.ffn.b1"]).relu()
    return hid @ params["fusion.ffn.W2"] + params["fusion.ffn.b2"]


def fuse(h_t: Tensor, f_t, params: dict, strategy: str,
         alpha: float = 0.01, gate_mode: str = "fixed") -> Tensor:
    """Vision-enhanced node embedding for one endpoint (batched)."""
    if strategy == "none":
        return h_t
    if f_t is None:
        raise ShapeMismatch("video embedding required for strategy " + strategy)
    if strategy == "attention":
        q = _attention_mix(h_t, f_t, params)
        if gate_mode == "learnable":
            a = params["fusion.gate.theta"].sigmoid()
            return h_t * (1.0 - a) + q * a
        return h_t * (1.0 - alpha) + q * alpha
    if strategy == "bilinear":
        return bilinear(h_t, params["fusion.bilinear.W"], f_t) \
            + params["fusion.bilinear.b"]
    if strategy == "mlp":
        z = concat([h_t, f_t], axis=1)
        hid = (z @ params["fusion.mlp.W1"] + params["fusion.mlp.b1"]).relu()
        return (hid @ params["fusion.mlp.W2"] + params["fusion.mlp.b2"]).relu()
    raise ValueError(f"unknown fusion strategy {strategy!r}")


def predict_link(y_u: Tensor, y_v: Tensor, params: dict) -> Tensor:
    """Link probability in (0,1), clamped for loss stability."""
    z = concat([y_u, y_v], axis=1)
    hid = (z @ params["pred.W1"] + params["pred.b1"]).relu()
    logit = hid @ params["pred.W2"] + params["pred.b2"]
    return logit.sigmoid().clamp(PROB_EPS, 1.0 - PROB_EPS)


def video_branch_param_names(params: dict) -> list:
    """Parameters stepped with video_lr and scaled by grad_scale: W_f and all
    fusion parameters."""
    return [n for n in params if n.startswith("fusion.")]
