"""End-to-end scoring pipeline: graph video -> frozen embedding -> fusion ->
link probability. Shared by the trainer, the evaluation harness, and the CLI.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .backbone import BackboneConfig, mean_message, node_state_batch
from .cache import EmbeddingCache
from .encoder import EncoderConfig, FrozenVideoEncoder, LinkEmbedding, combined_hash
from .fusion import fuse, predict_link, project_modalities
from .temporal import NeighborIndex, TemporalGraph
from .video import FrameSpec, build_graph_video


@dataclass
class Model:
    """Trainable parameters plus every config the forward pass needs."""
    params: dict
    strategy: str
    alpha: float
    gate_mode: str
    frame_spec: FrameSpec
    enc_cfg: EncoderConfig
    backbone_cfg: BackboneConfig
    encoder: FrozenVideoEncoder = field(default=None, repr=False)
    # set when embeddings come from an imported .gve, whose producer decided
    # the config hash
    key_hash_override: int = None

    @property
    def uses_video(self) -> bool:
        return self.strategy != "none"

    def get_encoder(self) -> FrozenVideoEncoder:
        if self.encoder is None:
            self.encoder = FrozenVideoEncoder(self.enc_cfg)
        return self.encoder

    def embedding_key(self, u: int, v: int, t: float) -> tuple:
        chash = (self.key_hash_override if self.key_hash_override is not None
                 else combined_hash(self.frame_spec.config_hash(), self.enc_cfg))
        return (int(u), int(v), float(t), chash)


def build_model(cfg, g: TemporalGraph) -> Model:
    """Assemble a Model (fresh trainable parameters) from a RunConfig."""
    from .backbone import TimeEncodingSpec, message_dim
    from .fusion import (init_backbone_params, init_fusion_params,
                         init_predictor_params)

    frame_spec = FrameSpec(F=cfg.frames, k=cfg.hops, s=cfg.recent_neighbors,
                           H=cfg.height, W=cfg.width)
    enc_cfg = EncoderConfig(d_vid=cfg.d_vid, d_model=cfg.d_model,
                            tube_t=cfg.tube_t, patch=cfg.patch,
                            heads=cfg.enc_heads, mlp_hidden=cfg.mlp_hidden,
                            seed=cfg.encoder_seed)
    bcfg = BackboneConfig(d=cfg.d, d_hidden=cfg.d_hidden, m_recent=cfg.m_recent,
                          time_spec=TimeEncodingSpec(cfg.time_dim))
    params = {}
    params.update(init_backbone_params(message_dim(g, bcfg), cfg.d_hidden,
                                       cfg.d, cfg.seed))
    params.update(init_fusion_params(cfg.fusion, cfg.d, cfg.d_vid, cfg.seed,
                                     alpha=cfg.alpha, gate_mode=cfg.gate_mode,
                                     attn_heads=cfg.fusion_heads))
    params.update(init_predictor_params(cfg.d, cfg.seed))
    return Model(params, cfg.fusion, cfg.alpha, cfg.gate_mode, frame_spec,
                 enc_cfg, bcfg)


def model_meta(model: Model) -> dict:
    """Checkpoint metadata sufficient to rebuild the Model around its arrays."""
    fs, ec, bc = model.frame_spec, model.enc_cfg, model.backbone_cfg
    return {
        "strategy": model.strategy,
        "alpha": model.alpha,
        "gate_mode": model.gate_mode,
        "frame_spec": {"F": fs.F, "k": fs.k, "s": fs.s, "H": fs.H, "W": fs.W},
        "enc_cfg": {"d_vid": ec.d_vid, "d_model": ec.d_model,
                    "tube_t": ec.tube_t, "patch": ec.patch, "heads": ec.heads,
                    "mlp_hidden": ec.mlp_hidden, "seed": ec.seed},
        "backbone": {"d": bc.d, "d_hidden": bc.d_hidden,
                     "m_recent": bc.m_recent, "dT": bc.time_spec.dT},
    }


def model_from_checkpoint(arrays: dict, meta: dict) -> Model:
    from .backbone import TimeEncodingSpec

    params = {n: Tensor(a, trainable=True) for n, a in arrays.items()}
    fs = meta["frame_spec"]
    ec = meta["enc_cfg"]
    bc = meta["backbone"]
    return Model(
        params, meta["strategy"], meta["alpha"], meta["gate_mode"],
        FrameSpec(F=fs["F"], k=fs["k"], s=fs["s"], H=fs["H"], W=fs["W"]),
        EncoderConfig(d_vid=ec["d_vid"], d_model=ec["d_model"],
                      tube_t=ec["tube_t"], patch=ec["patch"],
                      heads=ec["heads"], mlp_hidden=ec["mlp_hidden"],
                      seed=ec["seed"]),
        BackboneConfig(d=bc["d"], d_hidden=bc["d_hidden"],
                       m_recent=bc["m_recent"],
                       time_spec=TimeEncodingSpec(bc["dT"])))


def render_videos(pairs, spec: FrameSpec, idx: NeighborIndex, threads: int = 1):
    """Graph videos for a list of (u, v, t_star); order follows the input and
    is independent of the thread count."""
    if threads <= 1 or len(pairs) < 2:
        return [build_graph_video(u, v, t, spec, idx) for u, v, t in pairs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda p: build_graph_video(p[0], p[1], p[2], spec, idx),
                           pairs))


def get_embeddings(model: Model, pairs, idx: NeighborIndex,
                   cache: EmbeddingCache, threads: int = 1) -> np.ndarray:
    """(B, d_vid) float32 embeddings for pairs, computing cache misses in one
    batched encoder call."""
    keys = [model.embedding_key(u, v, t) for u, v, t in pairs]
    out = np.empty((len(pairs), model.enc_cfg.d_vid), dtype=np.float32)
    missing = []
    for i, key in enumerate(keys):
        hit = cache.get(key)
        if hit is not None:
            cache.hits += 1
            out[i] = hit.vec
        else:
            missing.append(i)
    if missing:
        if model.key_hash_override is not None:
            miss = pairs[missing[0]]
            raise KeyError(
                f"imported embedding file lacks an entry for {miss} "
                f"({len(missing)} missing in this batch)")
        videos = render_videos([pairs[i] for i in missing], model.frame_spec,
                               idx, threads)
        stack = np.stack([v.pixels for v in videos])
        vecs = model.get_encoder().forward_batch(stack)
        for j, i in enumerate(missing):
            out[i] = vecs[j]
            cache.put(LinkEmbedding(keys[i], vecs[j]))
            cache.misses += 1
    return out


def forward_pairs(model: Model, g: TemporalGraph, idx: NeighborIndex,
                  pairs, cache: EmbeddingCache, threads: int = 1) -> Tensor:
    """Probability tensor (B, 1) for a batch of (u, v, t) queries."""
    bcfg = model.backbone_cfg
    msgs_u = np.stack([mean_message(u, t, g, idx, bcfg) for u, _, t in pairs])
    msgs_v = np.stack([mean_message(v, t, g, idx, bcfg) for _, v, t in pairs])
    h_u = node_state_batch(msgs_u, model.params)
    h_v = node_state_batch(msgs_v, model.params)
    f = None
    if model.uses_video:
        f = get_embeddings(model, pairs, idx, cache, threads).astype(np.float64)
    hu_t, hv_t, f_t = project_modalities(h_u, h_v, f, model.params)
    y_u = fuse(hu_t, f_t, model.params, model.strategy, model.alpha,
               model.gate_mode)
    y_v = fuse(hv_t, f_t, model.params, model.strategy, model.alpha,
               model.gate_mode)
    return predict_link(y_u, y_v, model.params)


def score_pairs(model: Model, g: TemporalGraph, idx: NeighborIndex, pairs,
                cache: EmbeddingCache, threads: int = 1,
                batch_size: int = 200) -> np.ndarray:
    """Probabilities as a plain array (no gradient use)."""
    probs = np.empty(len(pairs), dtype=np.float64)
    for lo in range(0, len(pairs), batch_size):
        chunk = pairs[lo:lo + batch_size]
        probs[lo:lo + len(chunk)] = forward_pairs(
            model, g, idx, chunk, cache, threads).data[:, 0]
    return probs
