"""Directory encoding: .gvf inputs -> one .gve output plus a manifest."""

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .errors import BadInputFile
from .formats import read_gvf, write_gve
from .model import NATIVE_SIZE, load_model, probe_width

RESIZE_METHOD = "bilinear"


@dataclass
class BridgeJob:
    input_dir: str
    output_path: str
    model: str = "standin/vit-tiny"
    pooling: str = "mean"          # "mean" or "cls"
    batch_size: int = 8
    device: str = "cpu"

    def validate(self) -> None:
        if self.pooling not in ("mean", "cls"):
            raise ValueError(f"pooling must be mean or cls, got {self.pooling!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_inputs(input_dir: str):
    paths = sorted(Path(input_dir).glob("*.gvf"))
    if not paths:
        raise BadInputFile(f"no .gvf files in {input_dir}")
    videos = [read_gvf(p) for p in paths]  # raises before any output exists
    shapes = {v.pixels.shape for v in videos}
    if len(shapes) > 1:
        raise BadInputFile(
            f"inputs disagree on (F, C, H, W): {sorted(shapes)}")
    hashes = {v.config_hash for v in videos}
    if len(hashes) > 1:
        raise BadInputFile(
            f"inputs carry different config hashes: {sorted(hashes)}")
    return paths, videos


def _resize_batch(pixels: np.ndarray, device: str) -> torch.Tensor:
    """(B, F, 3, H, W) uint8 -> float clips at the model's native size."""
    x = torch.from_numpy(pixels).to(device).float() / 255.0
    b, f, c, h, w = x.shape
    if (h, w) != (NATIVE_SIZE, NATIVE_SIZE):
        x = F.interpolate(x.reshape(b * f, c, h, w),
                          size=(NATIVE_SIZE, NATIVE_SIZE),
                          mode=RESIZE_METHOD, align_corners=False)
        x = x.reshape(b, f, c, NATIVE_SIZE, NATIVE_SIZE)
    return x


def encode_directory(job: BridgeJob) -> dict:
    """Encode every .gvf in job.input_dir into job.output_path (.gve).

    All inputs are read and validated before anything is written; the .gve is
    assembled in a temp file and renamed into place, so a failing job never
    leaves partial output. Returns the manifest (also written alongside the
    output as <output>.manifest.json).
    """
    job.validate()
    paths, videos = _load_inputs(job.input_dir)
    frames = videos[0].pixels.shape[0]

    model = load_model(job.model, job.device)
    d_vid = probe_width(model, frames, job.pooling, job.device)

    records = []
    with torch.no_grad():
        for lo in range(0, len(videos), job.batch_size):
            chunk = videos[lo:lo + job.batch_size]
            clips = _resize_batch(np.stack([v.pixels for v in chunk]),
                                  job.device)
            out = model(clips, job.pooling).cpu().numpy().astype(np.float32)
            records.extend((v.key, out[i]) for i, v in enumerate(chunk))

    out_path = Path(job.output_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = out_path.with_name(out_path.name + ".tmp")
    write_gve(tmp, d_vid, videos[0].config_hash, records)
    os.replace(tmp, out_path)

    manifest = {
        "model": job.model,
        "pooling": job.pooling,
        "d_vid": d_vid,
        "frames": frames,
        "native_size": NATIVE_SIZE,
        "resize_method": RESIZE_METHOD,
        "device": job.device,
        "inputs": {p.name: _sha256(p) for p in paths},
        "output_sha256": _sha256(out_path),
        "count": len(records),
    }
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    tmp_manifest = manifest_path.with_name(manifest_path.name + ".tmp")
    tmp_manifest.write_text(json.dumps(manifest, indent=2))
    os.replace(tmp_manifest, manifest_path)
    return manifest
