"""Floor-plan representation, tokenization, post-processing, and evaluation."""

from .core import (
    FloorPlan,
    Position,
    Room,
    RoomCategory,
    derive_geometry,
    emit_canonical_json,
    parse_canonical_json,
    validate,
)
from .graph import (
    AdjacencyGraph,
    classify_position,
    classify_relation,
    edge_overlap,
    extract_adjacency,
    graph_edit_distance,
    node_f1,
)
from .metrics import (
    FeatureSet,
    editing_score,
    frechet_distance,
    macro_iou,
    match_rooms,
    micro_iou,
    pearson_r,
    psnr,
    ssim,
    understanding_score,
)
from .postproc import PipelineConfig, run_pipeline, standardize_colors
from .raster import classify_pixels, extract_room_masks, render, resize_nearest
from .tokenizer import (
    Codebook,
    SequenceCodec,
    TokenSequence,
    decode,
    extract_features,
    quantize,
    train_codebook,
)

__version__ = "0.1.0"
