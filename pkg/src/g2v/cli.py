"""Command-line surface: ingest, render, encode, train, eval, gradcheck, and
cache inspection."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .cache import EmbeddingCache, import_embeddings
from .config import RunConfig, parse_config
from .encoder import FrozenVideoEncoder, combined_hash
from .errors import G2VError, UsageError
from .evaluation import evaluate
from .formats import load_checkpoint, read_gvf, save_checkpoint, write_gvf
from .pipeline import (Model, build_model, get_embeddings, model_from_checkpoint,
                       model_meta, render_videos)
from .report import write_reports, write_training_curve
from .temporal import NeighborIndex, chronological_split, ingest_events
from .trainer import TrainConfig, finite_diff_check, fit, planned_pairs
from .video import fnv1a64


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_run_record(out_dir, cfg: RunConfig, inputs: dict, extra=None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record = {
        "version": __version__,
        "argv": sys.argv[1:],
        "config": asdict(cfg),
        "config_hash": f"{fnv1a64(json.dumps(asdict(cfg), sort_keys=True)):016x}",
        "seeds": cfg.seeds,
        "inputs": {name: _sha256(p) for name, p in inputs.items()},
    }
    if extra:
        record.update(extra)
    (out / "run.json").write_text(json.dumps(record, indent=2))


def _load_config(path) -> RunConfig:
    if path is None:
        cfg = RunConfig()
        cfg.validate()
        return cfg
    return parse_config(Path(path).read_text())


def _load_graph(path, sort=False):
    with open(path, "rb") as fh:
        return ingest_events(fh, sort=sort)


def _read_pairs(path):
    pairs = []
    lines = Path(path).read_text().strip().split("\n")
    start = 1 if lines and lines[0].replace(" ", "").startswith("u,v") else 0
    for line in lines[start:]:
        if not line.strip():
            continue
        u, v, t = line.split(",")[:3]
        pairs.append((int(u), int(v), float(t)))
    return pairs


def _cache_for(cfg: RunConfig, model: Model):
    cache_dir = os.environ.get("G2V_CACHE_DIR") or cfg.cache_dir or None
    chash = combined_hash(model.frame_spec.config_hash(), model.enc_cfg)
    return EmbeddingCache(cfg.d_vid, chash, path=cache_dir)


def cmd_ingest(args) -> int:
    g = _load_graph(args.events, sort=args.sort)
    print(f"events={len(g)} nodes={g.num_nodes} d_E={g.d_E} "
          f"t_range=[{g.t[0] if len(g) else 0},{g.t[-1] if len(g) else 0}]")
    return 0


def cmd_pairs(args) -> int:
    cfg = _load_config(args.config)
    g = _load_graph(args.events)
    split = chronological_split(g, seed=cfg.split_seed,
                                holdout_frac=cfg.holdout_frac)
    tcfg = TrainConfig(lr=cfg.lr, video_lr=cfg.video_lr,
                       grad_scale=cfg.grad_scale, batch_size=cfg.batch_size,
                       max_epochs=cfg.max_epochs, patience=cfg.patience,
                       seed=cfg.seed, threads=cfg.threads)
    pairs = planned_pairs(g, split, tcfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # repr() round-trips t exactly, so rendered keys match the training keys
    out.write_text("u,v,t\n" + "\n".join(
        f"{u},{v},{t!r}" for u, v, t in pairs) + "\n")
    print(f"{len(pairs)} planned pairs -> {out}")
    return 0


def cmd_render(args) -> int:
    cfg = _load_config(args.config)
    g = _load_graph(args.events)
    idx = NeighborIndex(g)
    pairs = _read_pairs(args.pairs)
    model = build_model(cfg, g)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    videos = render_videos(pairs, model.frame_spec, idx, threads=cfg.threads)
    for (u, v, t), video in zip(pairs, videos):
        name = f"u{u}_v{v}_t{t:.6g}.gvf"
        write_gvf(out / name, video)
        if args.png_dump:
            _dump_pngs(video, out / f"u{u}_v{v}_t{t:.6g}")
    _write_run_record(out, cfg, {"events": args.events, "pairs": args.pairs},
                      {"rendered": len(videos)})
    print(f"rendered {len(videos)} videos -> {out}")
    return 0


def _dump_pngs(video, stem: Path) -> None:
    from PIL import Image
    stem.mkdir(parents=True, exist_ok=True)
    for i in range(video.pixels.shape[0]):
        Image.fromarray(video.pixels[i].transpose(1, 2, 0)).save(
            stem / f"frame{i:03d}.png")


def cmd_encode(args) -> int:
    from .formats import write_gve
    cfg = _load_config(args.config)
    if args.videos:
        paths = sorted(Path(args.videos).glob("*.gvf"))
        if not paths:
            raise UsageError(f"no .gvf files in {args.videos}")
        videos = [read_gvf(p) for p in paths]
        enc = FrozenVideoEncoder(build_model(cfg, _empty_graph()).enc_cfg)
        stack = np.stack([v.pixels for v in videos])
        vecs = enc.forward_batch(stack)
        chash = combined_hash(videos[0].key[3], enc.cfg)
        records = [((v.key[0], v.key[1], v.key[2]), vecs[i])
                   for i, v in enumerate(videos)]
        inputs = {"videos": str(paths[0])}
    else:
        if not (args.events and args.pairs):
            raise UsageError("encode needs --videos or --events + --pairs")
        g = _load_graph(args.events)
        idx = NeighborIndex(g)
        pairs = _read_pairs(args.pairs)
        model = build_model(cfg, g)
        cache = EmbeddingCache(cfg.d_vid, 0)
        vecs = get_embeddings(model, pairs, idx, cache, threads=cfg.threads)
        chash = combined_hash(model.frame_spec.config_hash(), model.enc_cfg)
        records = [((u, v, t), vecs[i]) for i, (u, v, t) in enumerate(pairs)]
        inputs = {"events": args.events, "pairs": args.pairs}
    write_gve(args.out, cfg.d_vid, chash, records)
    outdir = Path(args.out).parent
    _write_run_record(outdir, cfg, inputs, {"encoded": len(records)})
    print(f"encoded {len(records)} embeddings -> {args.out}")
    return 0


def _empty_graph():
    from .temporal import TemporalGraph
    return TemporalGraph([], [], [])


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    g = _load_graph(args.events)
    idx = NeighborIndex(g)
    split = chronological_split(g, seed=cfg.split_seed,
                                holdout_frac=cfg.holdout_frac)
    model = build_model(cfg, g)
    if args.emb:
        cache = import_embeddings(args.emb, expect_d_vid=cfg.d_vid)
        # imported caches carry the producer's config hash; adopt it for lookups
        model = _adopt_import_hash(model, cache)
    else:
        cache = _cache_for(cfg, model)
    tcfg = TrainConfig(lr=cfg.lr, video_lr=cfg.video_lr,
                       grad_scale=cfg.grad_scale, batch_size=cfg.batch_size,
                       max_epochs=cfg.max_epochs, patience=cfg.patience,
                       seed=cfg.seed, threads=cfg.threads)
    model, log = fit(g, idx, split, model, cache, tcfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out / "model.ckpt",
                    {n: p.data for n, p in model.params.items()},
                    model_meta(model))
    (out / "training_log.csv").write_text(
        "epoch,train_loss,val_ap,elapsed_ms\n"
        + "\n".join(r.csv() for r in log) + "\n")
    write_training_curve(log, out)
    cache.flush()
    _write_run_record(out, cfg, {"events": args.events},
                      {"epochs_run": len(log),
                       "best_val_ap": max(r.val_ap for r in log)})
    print(f"trained {len(log)} epochs, best val AP "
          f"{max(r.val_ap for r in log):.4f} -> {out/'model.ckpt'}")
    return 0


def _adopt_import_hash(model: Model, cache: EmbeddingCache) -> Model:
    model.key_hash_override = cache.config_hash
    return model


def cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    g = _load_graph(args.events)
    idx = NeighborIndex(g)
    split = chronological_split(g, seed=cfg.split_seed,
                                holdout_frac=cfg.holdout_frac)
    arrays, meta = load_checkpoint(args.checkpoint)
    model = model_from_checkpoint(arrays, meta)
    if args.emb:
        cache = import_embeddings(args.emb, expect_d_vid=model.enc_cfg.d_vid)
        model = _adopt_import_hash(model, cache)
    else:
        cache = _cache_for(cfg, model)
    settings = ([cfg.setting] if not args.all_settings
                else ["transductive", "inductive"])
    strategies = [cfg.strategy] if not args.all_strategies else ["rnd", "hist", "ind"]
    reports = []
    for setting in settings:
        for strategy in strategies:
            reports.append(evaluate(model, g, idx, split, setting, strategy,
                                    seeds=cfg.seeds, cache=cache,
                                    batch_size=cfg.batch_size,
                                    threads=cfg.threads))
    paths = write_reports(reports, args.out)
    cache.flush()
    _write_run_record(args.out, cfg,
                      {"events": args.events, "checkpoint": args.checkpoint})
    for r in reports:
        print(f"{r.setting}/{r.strategy}: AP {r.ap_mean:.4f}±{r.ap_std:.4f} "
              f"AUC {r.auc_mean:.4f}±{r.auc_std:.4f}")
    print(f"reports -> {paths['json']}, {paths['csv']}, {paths['figure']}")
    return 0


def cmd_gradcheck(args) -> int:
    from .datagen import random_log
    cfg = _load_config(args.config)
    # small deterministic instance keeps the check under a second
    small = RunConfig(frames=4, height=32, width=32, recent_neighbors=4,
                      d=16, d_hidden=16, d_vid=16, d_model=32, time_dim=8,
                      m_recent=5, fusion=cfg.fusion, alpha=cfg.alpha,
                      gate_mode=cfg.gate_mode, fusion_heads=4, seed=cfg.seed)
    small.validate()
    g = random_log(120, 30, seed=3)
    idx = NeighborIndex(g)
    model = build_model(small, g)
    cache = EmbeddingCache(small.d_vid, 0)
    batch = [(int(g.src[i]), int(g.dst[i]), float(g.t[i]))
             for i in range(60, 70)]
    err = finite_diff_check(model, g, idx, batch, cache)
    print(f"max_rel_err={err:.3e}")
    return 0 if err <= 1e-4 else 1


def cmd_cache(args) -> int:
    cache_dir = args.dir or os.environ.get("G2V_CACHE_DIR")
    if not cache_dir:
        raise UsageError("cache: provide --dir or set G2V_CACHE_DIR")
    p = Path(cache_dir)
    manifest = p / "manifest.json"
    if not manifest.exists():
        print(f"cache at {p}: no manifest (empty or unflushed)")
        return 0
    man = json.loads(manifest.read_text())
    entries = man.get("entries", {})
    shards = sorted({e["shard"] for e in entries.values()})
    print(f"cache at {p}: {len(entries)} entries, {len(shards)} shards, "
          f"d_vid={man.get('d_vid')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="g2v",
                                description="graph-video link prediction toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command")

    sp = sub.add_parser("ingest", help="validate an event CSV")
    sp.add_argument("--events", required=True)
    sp.add_argument("--sort", action="store_true")
    sp.set_defaults(fn=cmd_ingest)

    sp = sub.add_parser(
        "pairs", help="list every (u,v,t) query a training run will issue")
    sp.add_argument("--events", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--config")
    sp.set_defaults(fn=cmd_pairs)

    sp = sub.add_parser("render", help="render graph videos to .gvf files")
    sp.add_argument("--events", required=True)
    sp.add_argument("--pairs", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--config")
    sp.add_argument("--png-dump", action="store_true")
    sp.set_defaults(fn=cmd_render)

    sp = sub.add_parser("encode", help="embed graph videos into a .gve file")
    sp.add_argument("--events")
    sp.add_argument("--pairs")
    sp.add_argument("--videos", help="directory of .gvf files")
    sp.add_argument("--out", required=True)
    sp.add_argument("--config")
    sp.set_defaults(fn=cmd_encode)

    sp = sub.add_parser("train", help="train backbone + fusion + predictor")
    sp.add_argument("--events", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--config")
    sp.add_argument("--emb", help="imported .gve embeddings")
    sp.set_defaults(fn=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a checkpoint")
    sp.add_argument("--events", required=True)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--config")
    sp.add_argument("--emb")
    sp.add_argument("--all-settings", action="store_true")
    sp.add_argument("--all-strategies", action="store_true")
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("gradcheck", help="finite-difference gradient check")
    sp.add_argument("--config")
    sp.set_defaults(fn=cmd_gradcheck)

    sp = sub.add_parser("cache", help="inspect an embedding cache directory")
    sp.add_argument("--dir")
    sp.set_defaults(fn=cmd_cache)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "fn", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error:usage:{exc}", file=sys.stderr)
        return 2
    except G2VError as exc:
        print(f"error:{type(exc).__name__}:{exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
