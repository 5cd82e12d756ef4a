"""Plain `key=value` run configuration with validated defaults."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .errors import InvalidValue, UnknownKey


def _parse_seeds(text: str):
    out = []
    for part in text.split(";"):
        part = part.strip()
        if "-" in part and not part.startswith("-"):
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


@dataclass
class RunConfig:
    # graph video
    frames: int = 16
    hops: int = 1
    recent_neighbors: int = 16
    height: int = 64
    width: int = 64
    # encoder
    d_vid: int = 128
    d_model: int = 128
    tube_t: int = 2
    patch: int = 8
    enc_heads: int = 4
    mlp_hidden: int = 256
    encoder_seed: int = 0
    # backbone
    d: int = 172
    d_hidden: int = 172
    m_recent: int = 20
    time_dim: int = 100
    # fusion
    fusion: str = "attention"
    alpha: float = 0.01
    gate_mode: str = "fixed"
    fusion_heads: int = 4
    # training
    lr: float = 1e-4
    video_lr: float = 1e-4
    grad_scale: float = 1.0
    batch_size: int = 200
    max_epochs: int = 100
    patience: int = 20
    seed: int = 0
    # evaluation
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    setting: str = "transductive"
    strategy: str = "rnd"
    holdout_frac: float = 0.10
    split_seed: int = 0
    # runtime
    threads: int = 1
    cache_dir: str = ""

    def validate(self) -> None:
        if self.frames < 1:
            raise InvalidValue("frames", "must be >= 1")
        if self.hops != 1:
            raise InvalidValue("hops", "only 1-hop neighborhoods are supported")
        if self.recent_neighbors < 1:
            raise InvalidValue("recent_neighbors", "must be >= 1")
        if self.height < 32 or self.width < 32:
            raise InvalidValue("height", "canvas must be at least 32x32")
        if self.batch_size < 1:
            raise InvalidValue("batch_size", "must be >= 1")
        if self.lr <= 0 or self.video_lr <= 0:
            raise InvalidValue("lr", "learning rates must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidValue("alpha", "must be in [0,1]")
        if self.fusion not in ("attention", "bilinear", "mlp", "none"):
            raise InvalidValue("fusion", f"unknown strategy {self.fusion!r}")
        if self.gate_mode not in ("fixed", "learnable"):
            raise InvalidValue("gate_mode", "must be fixed or learnable")
        if self.setting not in ("transductive", "inductive"):
            raise InvalidValue("setting", "transductive or inductive")
        if self.strategy not in ("rnd", "hist", "ind"):
            raise InvalidValue("strategy", "rnd, hist, or ind")
        if self.d % self.fusion_heads:
            raise InvalidValue("fusion_heads", "must divide d")
        if self.d_model % self.enc_heads:
            raise InvalidValue("enc_heads", "must divide d_model")
        if self.patience < 1 or self.max_epochs < 1:
            raise InvalidValue("patience", "patience/max_epochs must be >= 1")
        if self.threads < 1:
            raise InvalidValue("threads", "must be >= 1")
        if not 0.0 <= self.holdout_frac < 1.0:
            raise InvalidValue("holdout_frac", "must be in [0,1)")


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_config(text: str) -> RunConfig:
    """Parse `key=value` lines (# comments) into a validated RunConfig."""
    cfg = RunConfig()
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UnknownKey(line, line_no)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise UnknownKey(key, line_no)
        try:
            if key == "seeds":
                setattr(cfg, key, _parse_seeds(value))
            elif _FIELD_TYPES[key] in ("int", int):
                setattr(cfg, key, int(value))
            elif _FIELD_TYPES[key] in ("float", float):
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, value)
        except ValueError as exc:
            raise InvalidValue(key, str(exc)) from None
    cfg.validate()
    return cfg
