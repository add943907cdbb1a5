"""Unified domain types for multimodal video annotation events.

Every downstream stage (ingest, tracking, alignment, enhancement,
composition) consumes the types defined here. All types are immutable
value objects: construction never fails on semantic grounds, and
``validate_event`` reports violations as data instead of raising, so a
single bad record can never abort a stream.

Thread-safety: everything here is frozen after construction and safe to
share across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union


class Modality(str, Enum):
    """One input channel of video understanding."""

    CAPTION = "CAPTION"
    DENSE_CAPTION = "DENSE_CAPTION"
    OCR = "OCR"
    ASR = "ASR"
    TAG = "TAG"
    DETECTION = "DETECTION"


# Tie-break order used when sealing streams and ordering segment events:
# scene-level context first, then object-level, then on-screen/spoken text.
MODALITY_ORDER = {
    Modality.CAPTION: 0,
    Modality.DENSE_CAPTION: 1,
    Modality.DETECTION: 2,
    Modality.TAG: 3,
    Modality.OCR: 4,
    Modality.ASR: 5,
}

TAG_CATEGORIES = frozenset({"object", "color", "scene", "activity"})

# Default detector class list (the standard 80-class COCO vocabulary).
COCO_CLASSES = (
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
    "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella", "handbag",
    "tie", "suitcase", "frisbee", "skis", "snowboard", "sports ball", "kite",
    "baseball bat", "baseball glove", "skateboard", "surfboard",
    "tennis racket", "bottle", "wine glass", "cup", "fork", "knife", "spoon",
    "bowl", "banana", "apple", "sandwich", "orange", "broccoli", "carrot",
    "hot dog", "pizza", "donut", "cake", "chair", "couch", "potted plant",
    "bed", "dining table", "toilet", "tv", "laptop", "mouse", "remote",
    "keyboard", "cell phone", "microwave", "oven", "toaster", "sink",
    "refrigerator", "book", "clock", "vase", "scissors", "teddy bear",
    "hair drier", "toothbrush",
)


_WS_RUN = re.compile(r"\s+")


class EmptyLabelError(ValueError):
    """Raised when a label normalizes to the empty string (EMPTY_LABEL)."""


def normalize_text(raw: str) -> str:
    """Lowercase, strip, and collapse internal whitespace runs to one space."""
    return _WS_RUN.sub(" ", raw.strip()).lower()


def normalize_label(raw: str) -> str:
    """Normalize a tag/class label; empty results are an error.

    Idempotent: ``normalize_label(normalize_label(x)) == normalize_label(x)``.
    """
    label = normalize_text(raw)
    if not label:
        raise EmptyLabelError(f"EMPTY_LABEL: {raw!r} normalizes to nothing")
    return label


@dataclass(frozen=True)
class TimeSpan:
    """A [start, end] interval in seconds. start == end is an instant."""

    start: float
    end: float

    def length(self) -> float:
        return self.end - self.start

    def is_instant(self) -> bool:
        return self.start == self.end

    def _covers(self, t: float) -> bool:
        # Half-open on the right, except an instant covers its own point.
        return (self.start <= t < self.end) or (self.start == self.end == t)

    def overlaps(self, other: "TimeSpan") -> bool:
        """True when the spans share positive-length time, or when one is an
        instant lying inside the other's half-open interval (or both are the
        same instant)."""
        lo = max(self.start, other.start)
        hi = min(self.end, other.end)
        if lo < hi:
            return True
        if lo > hi:
            return False
        return self._covers(lo) and other._covers(lo)


@dataclass(frozen=True)
class Box:
    """Axis-aligned pixel rectangle, top-left origin."""

    x: float
    y: float
    w: float
    h: float

    def area(self) -> float:
        return self.w * self.h

    def right(self) -> float:
        return self.x + self.w

    def bottom(self) -> float:
        return self.y + self.h

    def is_well_formed(self) -> bool:
        return (
            all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h))
            and self.w >= 0
            and self.h >= 0
        )

    def within_frame(self, width: float, height: float) -> bool:
        return (
            self.x >= 0
            and self.y >= 0
            and self.right() <= width
            and self.bottom() <= height
        )


@dataclass(frozen=True)
class VideoMeta:
    """Metadata of the video an event stream is bound to."""

    duration: float
    fps: float
    width: int
    height: int
    title: Optional[str] = None
    source_uri: str = ""

    def problems(self) -> list[str]:
        out = []
        if not (math.isfinite(self.duration) and self.duration >= 0):
            out.append("duration must be finite and >= 0")
        if not (math.isfinite(self.fps) and self.fps > 0):
            out.append("fps must be finite and > 0")
        if self.width <= 0 or self.height <= 0:
            out.append("width and height must be > 0")
        return out


@dataclass(frozen=True)
class CaptionPayload:
    text: str


@dataclass(frozen=True)
class DenseCaptionPayload:
    text: str
    box: Box


@dataclass(frozen=True)
class OcrPayload:
    text: str
    box: Box
    lang: str


@dataclass(frozen=True)
class AsrPayload:
    text: str
    audio_tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class TagPayload:
    label: str


@dataclass(frozen=True)
class DetectionPayload:
    label: str
    box: Box
    score: float
    track_id: Optional[int] = None


Payload = Union[
    CaptionPayload,
    DenseCaptionPayload,
    OcrPayload,
    AsrPayload,
    TagPayload,
    DetectionPayload,
]

PAYLOAD_TYPES = {
    Modality.CAPTION: CaptionPayload,
    Modality.DENSE_CAPTION: DenseCaptionPayload,
    Modality.OCR: OcrPayload,
    Modality.ASR: AsrPayload,
    Modality.TAG: TagPayload,
    Modality.DETECTION: DetectionPayload,
}


@dataclass(frozen=True)
class ModalityEvent:
    """One annotation from one modality, with a time span and source id."""

    id: str
    modality: Modality
    span: TimeSpan
    payload: Payload
    source: str
    confidence: float

    def text(self) -> Optional[str]:
        """Payload text for text-bearing modalities, else None."""
        return getattr(self.payload, "text", None)


def sort_key(event: ModalityEvent) -> tuple[float, int, str]:
    """Sealed-stream ordering: (span start, modality order, id)."""
    return (event.span.start, MODALITY_ORDER[event.modality], event.id)


def segment_sort_key(event: ModalityEvent) -> tuple[int, float, str]:
    """In-segment ordering: (modality order, span start, id)."""
    return (MODALITY_ORDER[event.modality], event.span.start, event.id)


# Violation codes emitted by validate_event.
SPAN_OUT_OF_RANGE = "SPAN_OUT_OF_RANGE"
BAD_CONFIDENCE = "BAD_CONFIDENCE"
BOX_OUT_OF_FRAME = "BOX_OUT_OF_FRAME"
PAYLOAD_MISMATCH = "PAYLOAD_MISMATCH"


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str


def _payload_problems(event: ModalityEvent) -> list[Violation]:
    expected = PAYLOAD_TYPES[event.modality]
    if type(event.payload) is not expected:
        return [
            Violation(
                PAYLOAD_MISMATCH,
                f"{event.modality.value} event carries "
                f"{type(event.payload).__name__}",
            )
        ]
    out: list[Violation] = []
    box = getattr(event.payload, "box", None)
    if box is not None and not box.is_well_formed():
        out.append(Violation(PAYLOAD_MISMATCH, f"malformed box {box}"))
    if isinstance(event.payload, TagPayload):
        if not normalize_text(event.payload.label):
            out.append(Violation(PAYLOAD_MISMATCH, "empty tag label"))
    if isinstance(event.payload, AsrPayload):
        if any(not normalize_text(t) for t in event.payload.audio_tags):
            out.append(Violation(PAYLOAD_MISMATCH, "blank audio tag label"))
    if isinstance(event.payload, DetectionPayload):
        if not normalize_text(event.payload.label):
            out.append(Violation(PAYLOAD_MISMATCH, "empty detection label"))
    return out


def validate_event(
    event: ModalityEvent, meta: Optional[VideoMeta] = None
) -> list[Violation]:
    """Check every type invariant; empty result means the event is ok.

    ``meta=None`` performs unbound validation: the span-fits-duration and
    box-fits-frame checks only apply when the event is video-bound.
    """
    violations: list[Violation] = []

    span = event.span
    span_ok = (
        math.isfinite(span.start)
        and math.isfinite(span.end)
        and 0 <= span.start <= span.end
    )
    if span_ok and meta is not None and span.end > meta.duration:
        span_ok = False
    if not span_ok:
        violations.append(
            Violation(SPAN_OUT_OF_RANGE, f"span [{span.start}, {span.end}]")
        )

    if not (math.isfinite(event.confidence) and 0 <= event.confidence <= 1):
        violations.append(
            Violation(BAD_CONFIDENCE, f"confidence {event.confidence}")
        )
    if isinstance(event.payload, DetectionPayload):
        score = event.payload.score
        if not (math.isfinite(score) and 0 <= score <= 1):
            violations.append(Violation(BAD_CONFIDENCE, f"detector score {score}"))

    payload_violations = _payload_problems(event)
    violations.extend(payload_violations)

    # Frame-bound box check for region-anchored text only; skipped when the
    # box geometry is already reported as malformed.
    if (
        meta is not None
        and not payload_violations
        and isinstance(event.payload, (OcrPayload, DenseCaptionPayload))
        and not event.payload.box.within_frame(meta.width, meta.height)
    ):
        violations.append(
            Violation(BOX_OUT_OF_FRAME, f"box {event.payload.box} outside frame")
        )

    return violations


@dataclass(frozen=True)
class TagVocabulary:
    """Normalized tag labels with their categories (object/color/scene/activity).

    Duplicate labels collapse to the first occurrence. Built once, then
    immutable; lookups are by normalized label.
    """

    entries: dict[str, str] = field(default_factory=dict)

    @classmethod
    def build(cls, pairs) -> "TagVocabulary":
        """Build from (label, category) pairs; unknown categories are rejected."""
        entries: dict[str, str] = {}
        for label, category in pairs:
            if category not in TAG_CATEGORIES:
                raise ValueError(f"unknown tag category {category!r}")
            norm = normalize_label(label)
            entries.setdefault(norm, category)
        return cls(entries)

    @classmethod
    def from_lines(cls, lines) -> "TagVocabulary":
        """Parse ``label`` or ``label,category`` lines; blank lines skipped."""
        pairs = []
        for line in lines:
            line = line.strip()
            if not line:
                continue
            label, _, category = line.partition(",")
            pairs.append((label, category.strip() or "object"))
        return cls.build(pairs)

    def __contains__(self, label: str) -> bool:
        return normalize_text(label) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def category(self, label: str) -> Optional[str]:
        return self.entries.get(normalize_text(label))

    def extended(self, labels, category: str = "object") -> "TagVocabulary":
        """A new vocabulary with extra labels merged in (existing ones win)."""
        merged = dict(self.entries)
        for label in labels:
            norm = normalize_text(label)
            if norm:
                merged.setdefault(norm, category)
        return TagVocabulary(merged)


class TrackStatus(str, Enum):
    TENTATIVE = "TENTATIVE"
    ACTIVE = "ACTIVE"
    LOST = "LOST"
    REMOVED = "REMOVED"


@dataclass(frozen=True)
class TrackObservation:
    """One per-frame state of a track.

    ``active`` records whether the track was ACTIVE when the state was
    appended; only active observations surface as document events.
    ``event_id``/``source``/``confidence`` link back to the detection event
    that produced the state.
    """

    frame_index: int
    box: Box
    score: float
    event_id: Optional[str] = None
    source: str = ""
    confidence: float = 1.0
    active: bool = False


@dataclass(frozen=True)
class Track:
    """A persistent object identity across frames."""

    track_id: int
    class_label: str
    states: tuple[TrackObservation, ...]
    status: TrackStatus

    def active_states(self) -> tuple[TrackObservation, ...]:
        return tuple(s for s in self.states if s.active)
