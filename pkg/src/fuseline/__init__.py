"""fuseline: multimodal video annotation timeline fusion.

Ingests per-modality annotation event streams for a video, assigns
persistent object-track identities, aligns everything on a frame-anchored
timeline, applies deterministic cross-modal correction rules, and renders
a sequential narrative document with full per-line provenance.
"""

from .events import (
    Box,
    COCO_CLASSES,
    EmptyLabelError,
    Modality,
    ModalityEvent,
    TagVocabulary,
    TimeSpan,
    Track,
    TrackStatus,
    VideoMeta,
    Violation,
    normalize_label,
    normalize_text,
    validate_event,
)
from .protocol import (
    DEFAULT_SAMPLE_FPS,
    EventStream,
    FrameGrid,
    IngestResult,
    NonpositiveRateError,
    ProtocolError,
    Rejection,
    ingest_stream,
    parse_event_line,
    sample_frame_grid,
    serialize_event_line,
)
from .tracker import (
    Detection,
    ObjectTracker,
    TrackerConfig,
    associate_frame,
    iou,
    track_stream,
    tracks_to_events,
)
from .timeline import (
    Segment,
    Timeline,
    build_timeline,
    dedupe_segment_events,
    dedupe_timeline,
)
from .enhance import (
    EnhanceConfig,
    EnhancePass,
    EnhanceReport,
    enhance,
    levenshtein,
    normalized_similarity,
    replay_report,
)
from .compose import (
    AblationFlags,
    ComposedDocument,
    DocKind,
    DocLine,
    MalformedDocumentError,
    apply_ablation,
    compose,
    export_structured,
    import_structured,
    render_text,
)

__version__ = "0.1.0"

__all__ = [
    "AblationFlags",
    "Box",
    "COCO_CLASSES",
    "ComposedDocument",
    "DEFAULT_SAMPLE_FPS",
    "Detection",
    "DocKind",
    "DocLine",
    "EmptyLabelError",
    "EnhanceConfig",
    "EnhancePass",
    "EnhanceReport",
    "EventStream",
    "FrameGrid",
    "IngestResult",
    "MalformedDocumentError",
    "Modality",
    "ModalityEvent",
    "NonpositiveRateError",
    "ObjectTracker",
    "ProtocolError",
    "Rejection",
    "Segment",
    "TagVocabulary",
    "TimeSpan",
    "Timeline",
    "Track",
    "TrackStatus",
    "TrackerConfig",
    "VideoMeta",
    "Violation",
    "apply_ablation",
    "associate_frame",
    "build_timeline",
    "compose",
    "dedupe_segment_events",
    "dedupe_timeline",
    "enhance",
    "export_structured",
    "import_structured",
    "ingest_stream",
    "iou",
    "levenshtein",
    "normalize_label",
    "normalize_text",
    "normalized_similarity",
    "parse_event_line",
    "render_text",
    "replay_report",
    "sample_frame_grid",
    "serialize_event_line",
    "track_stream",
    "tracks_to_events",
    "validate_event",
]
