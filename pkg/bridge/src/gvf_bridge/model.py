"""Frozen video backbones for the bridge.

Real deployments would load pretrained checkpoints (VideoMAE-style models via
`transformers`, torchvision video models, ...). This package ships the
`standin/*` family: small video transformers whose weights are generated from
a seed derived deterministically from the model identifier, so the bridge's
plumbing — resizing, batching, pooling, serialization — can be exercised and
tested without downloading checkpoints. Swapping in a real backbone only
requires registering another loader in `_LOADERS`.
"""

import hashlib

import torch
from torch import nn

from .errors import DimProbeFailure, ModelLoadFailure

# native input geometry for the stand-in family
NATIVE_SIZE = 224
TUBELET_T = 2
PATCH = 16


class StandInVideoViT(nn.Module):
    """Tubelet-patch video transformer with a CLS token."""

    def __init__(self, d_model: int, layers: int, heads: int, seed: int):
        super().__init__()
        torch.manual_seed(seed)
        self.patch = nn.Conv3d(3, d_model,
                               kernel_size=(TUBELET_T, PATCH, PATCH),
                               stride=(TUBELET_T, PATCH, PATCH))
        self.cls = nn.Parameter(torch.randn(1, 1, d_model) * 0.02)
        block = nn.TransformerEncoderLayer(
            d_model, heads, dim_feedforward=2 * d_model,
            batch_first=True, norm_first=True)
        self.encoder = nn.TransformerEncoder(block, layers,
                                             enable_nested_tensor=False)
        self.norm = nn.LayerNorm(d_model)

    def forward(self, x: torch.Tensor, pooling: str) -> torch.Tensor:
        # x: (B, F, 3, H, W) float in [0, 1]
        x = x.permute(0, 2, 1, 3, 4)              # (B, 3, F, H, W)
        tok = self.patch(x).flatten(2).transpose(1, 2)   # (B, N, d)
        cls = self.cls.expand(tok.shape[0], -1, -1)
        tok = torch.cat([cls, tok], dim=1)
        out = self.norm(self.encoder(tok))
        if pooling == "cls":
            return out[:, 0]
        return out[:, 1:].mean(dim=1)


def _standin(name: str) -> StandInVideoViT:
    sizes = {"standin/vit-tiny": (192, 2, 3), "standin/vit-small": (384, 4, 6)}
    if name not in sizes:
        raise ModelLoadFailure(
            f"unknown model {name!r}; available: {sorted(sizes)}")
    d_model, layers, heads = sizes[name]
    seed = int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "little")
    model = StandInVideoViT(d_model, layers, heads, seed)
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return model


_LOADERS = {"standin": _standin}


def load_model(name: str, device: str = "cpu") -> nn.Module:
    family = name.split("/", 1)[0]
    loader = _LOADERS.get(family)
    if loader is None:
        raise ModelLoadFailure(
            f"no loader for model family {family!r} (from {name!r})")
    try:
        model = loader(name)
    except ModelLoadFailure:
        raise
    except Exception as exc:  # loader internals (torch, IO) can fail too
        raise ModelLoadFailure(f"{name}: {exc}") from exc
    return model.to(device)


@torch.no_grad()
def probe_width(model: nn.Module, frames: int, pooling: str,
                device: str = "cpu") -> int:
    """Run one dummy clip through the model to learn its embedding width."""
    dummy = torch.zeros(1, frames, 3, NATIVE_SIZE, NATIVE_SIZE, device=device)
    try:
        out = model(dummy, pooling)
    except Exception as exc:
        raise DimProbeFailure(f"probe forward failed: {exc}") from exc
    if out.ndim != 2 or out.shape[0] != 1:
        raise DimProbeFailure(f"probe returned shape {tuple(out.shape)}")
    return int(out.shape[1])
