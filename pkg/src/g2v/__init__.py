"""Graph-video link prediction toolkit: deterministic graph videos, frozen
video embeddings, multimodal fusion, and a temporal-graph evaluation harness."""

__version__ = "0.1.0"

from .temporal import (Event, NeighborIndex, SplitSpec, TemporalGraph,
                       chronological_split, ingest_events)
from .video import (ColorSpec, FrameSpec, GraphVideo, SubgraphFrame,
                    build_graph_video, induce_frame, render_frame,
                    slice_window)
from .encoder import EncoderConfig, FrozenVideoEncoder, LinkEmbedding, encode_video
from .cache import EmbeddingCache, cache_get_or_compute, import_embeddings
from .config import RunConfig, parse_config
from .evaluation import EvalReport, average_precision, auc_roc, evaluate
from .pipeline import Model, build_model
from .trainer import (TrainConfig, bce_loss, finite_diff_check, fit,
                      planned_pairs)

__all__ = [
    "Event", "NeighborIndex", "SplitSpec", "TemporalGraph",
    "chronological_split", "ingest_events",
    "ColorSpec", "FrameSpec", "GraphVideo", "SubgraphFrame",
    "build_graph_video", "induce_frame", "render_frame", "slice_window",
    "EncoderConfig", "FrozenVideoEncoder", "LinkEmbedding", "encode_video",
    "EmbeddingCache", "cache_get_or_compute", "import_embeddings",
    "RunConfig", "parse_config",
    "EvalReport", "average_precision", "auc_roc", "evaluate",
    "Model", "build_model",
    "TrainConfig", "bce_loss", "finite_diff_check", "fit", "planned_pairs",
]
