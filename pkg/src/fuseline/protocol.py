"""Line-oriented wire protocol for extractor output streams.

One UTF-8 JSON object per line with required keys
``id, modality, span, payload, source, confidence``; unknown keys are
ignored, blank lines are skipped. The exact format is documented in
docs/protocol.md. Parsing a single line is pure; ``ingest_stream`` is the
single sealing point after which a stream is immutable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .events import (
    AsrPayload,
    Box,
    CaptionPayload,
    DenseCaptionPayload,
    DetectionPayload,
    Modality,
    ModalityEvent,
    OcrPayload,
    TagPayload,
    TimeSpan,
    VideoMeta,
    sort_key,
    validate_event,
)

# Default frame sampling rate (frames/second) when a config does not set one.
DEFAULT_SAMPLE_FPS = 20.0

MALFORMED_RECORD = "MALFORMED_RECORD"
UNKNOWN_MODALITY = "UNKNOWN_MODALITY"
MISSING_FIELD = "MISSING_FIELD"
DUPLICATE_ID = "DUPLICATE_ID"
NONPOSITIVE_RATE = "NONPOSITIVE_RATE"


class ProtocolError(ValueError):
    """A single wire record could not be turned into an event."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


class NonpositiveRateError(ValueError):
    def __init__(self, rate):
        super().__init__(f"{NONPOSITIVE_RATE}: sample rate {rate!r}")
        self.code = NONPOSITIVE_RATE


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _require(record: dict, key: str):
    if key not in record:
        raise ProtocolError(MISSING_FIELD, key)
    return record[key]


def _require_payload(payload: dict, key: str):
    if key not in payload:
        raise ProtocolError(MISSING_FIELD, f"payload.{key}")
    return payload[key]


def _text(value, where: str) -> str:
    if not isinstance(value, str):
        raise ProtocolError(MALFORMED_RECORD, f"{where} must be a string")
    return value


def _number(value, where: str) -> float:
    if not _is_number(value):
        raise ProtocolError(MALFORMED_RECORD, f"{where} must be a number")
    return float(value)


def _box(value, where: str) -> Box:
    if (
        not isinstance(value, list)
        or len(value) != 4
        or not all(_is_number(v) for v in value)
    ):
        raise ProtocolError(
            MALFORMED_RECORD, f"{where} must be [x, y, w, h] numbers"
        )
    return Box(*(float(v) for v in value))


def _parse_payload(modality: Modality, payload: dict):
    if modality is Modality.CAPTION:
        return CaptionPayload(text=_text(_require_payload(payload, "text"), "payload.text"))
    if modality is Modality.DENSE_CAPTION:
        return DenseCaptionPayload(
            text=_text(_require_payload(payload, "text"), "payload.text"),
            box=_box(_require_payload(payload, "box"), "payload.box"),
        )
    if modality is Modality.OCR:
        return OcrPayload(
            text=_text(_require_payload(payload, "text"), "payload.text"),
            box=_box(_require_payload(payload, "box"), "payload.box"),
            lang=_text(_require_payload(payload, "lang"), "payload.lang"),
        )
    if modality is Modality.ASR:
        tags = _require_payload(payload, "audio_tags")
        if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
            raise ProtocolError(
                MALFORMED_RECORD, "payload.audio_tags must be a string array"
            )
        return AsrPayload(
            text=_text(_require_payload(payload, "text"), "payload.text"),
            audio_tags=tuple(tags),
        )
    if modality is Modality.TAG:
        return TagPayload(label=_text(_require_payload(payload, "label"), "payload.label"))
    track_id = payload.get("track_id")
    if track_id is not None and (isinstance(track_id, bool) or not isinstance(track_id, int)):
        raise ProtocolError(MALFORMED_RECORD, "payload.track_id must be an integer")
    return DetectionPayload(
        label=_text(_require_payload(payload, "label"), "payload.label"),
        box=_box(_require_payload(payload, "box"), "payload.box"),
        score=_number(_require_payload(payload, "score"), "payload.score"),
        track_id=track_id,
    )


def parse_event_line(line: str) -> ModalityEvent:
    """Parse one wire record into a ModalityEvent.

    Raises ProtocolError with code MALFORMED_RECORD, UNKNOWN_MODALITY,
    or MISSING_FIELD(name). Range/semantic checks are validate_event's job.
    """
    try:
        record = json.loads(line)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise ProtocolError(MALFORMED_RECORD, str(exc)) from None
    if not isinstance(record, dict):
        raise ProtocolError(MALFORMED_RECORD, "record is not an object")

    raw_modality = _require(record, "modality")
    if not isinstance(raw_modality, str):
        raise ProtocolError(MALFORMED_RECORD, "modality must be a string")
    try:
        modality = Modality(raw_modality)
    except ValueError:
        raise ProtocolError(UNKNOWN_MODALITY, raw_modality) from None

    event_id = _text(_require(record, "id"), "id")
    if not event_id:
        raise ProtocolError(MALFORMED_RECORD, "id must be nonempty")

    raw_span = _require(record, "span")
    if (
        not isinstance(raw_span, list)
        or len(raw_span) != 2
        or not all(_is_number(v) for v in raw_span)
    ):
        raise ProtocolError(MALFORMED_RECORD, "span must be [start, end] numbers")

    raw_payload = _require(record, "payload")
    if not isinstance(raw_payload, dict):
        raise ProtocolError(MALFORMED_RECORD, "payload must be an object")

    source = _text(_require(record, "source"), "source")
    confidence = _number(_require(record, "confidence"), "confidence")

    return ModalityEvent(
        id=event_id,
        modality=modality,
        span=TimeSpan(float(raw_span[0]), float(raw_span[1])),
        payload=_parse_payload(modality, raw_payload),
        source=source,
        confidence=confidence,
    )


def _box_record(box: Box) -> list[float]:
    return [float(box.x), float(box.y), float(box.w), float(box.h)]


def _payload_record(event: ModalityEvent) -> dict:
    p = event.payload
    if isinstance(p, CaptionPayload):
        return {"text": p.text}
    if isinstance(p, DenseCaptionPayload):
        return {"text": p.text, "box": _box_record(p.box)}
    if isinstance(p, OcrPayload):
        return {"text": p.text, "box": _box_record(p.box), "lang": p.lang}
    if isinstance(p, AsrPayload):
        return {"text": p.text, "audio_tags": list(p.audio_tags)}
    if isinstance(p, TagPayload):
        return {"label": p.label}
    record = {
        "label": p.label,
        "box": _box_record(p.box),
        "score": float(p.score),
    }
    if p.track_id is not None:
        record["track_id"] = p.track_id
    return record


def serialize_event_line(event: ModalityEvent) -> str:
    """Canonical one-line wire encoding (no trailing newline).

    parse_event_line(serialize_event_line(e)) == e for every valid event.
    """
    record = {
        "id": event.id,
        "modality": event.modality.value,
        "span": [float(event.span.start), float(event.span.end)],
        "payload": _payload_record(event),
        "source": event.source,
        "confidence": float(event.confidence),
    }
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class Rejection:
    """One dropped input line: its 1-based line number and the reason."""

    line_no: int
    code: str
    detail: str


@dataclass(frozen=True)
class EventStream:
    """A sealed, sorted, id-deduplicated event collection for one video.

    ``meta`` is None for streams ingested unbound (structure-only
    validation); such streams cannot be aligned onto a timeline.
    """

    meta: Optional[VideoMeta]
    events: tuple[ModalityEvent, ...]
    sealed: bool = True


@dataclass(frozen=True)
class IngestResult:
    stream: EventStream
    rejections: tuple[Rejection, ...]


def ingest_stream(
    lines: Iterable[str], meta: Optional[VideoMeta] = None
) -> IngestResult:
    """Parse, validate, deduplicate, and seal an event stream.

    Never raises on bad input: every dropped nonempty line produces exactly
    one rejection entry, so ``len(events) + len(rejections)`` equals the
    number of nonempty input lines. Duplicate ids keep the first occurrence.
    The sealed ordering (span start, modality order, id) is insensitive to
    input permutation when ids are unique.
    """
    accepted: dict[str, ModalityEvent] = {}
    rejections: list[Rejection] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            event = parse_event_line(line)
        except ProtocolError as exc:
            rejections.append(Rejection(line_no, exc.code, exc.detail))
            continue
        violations = validate_event(event, meta)
        if violations:
            first = violations[0]
            detail = first.detail
            if len(violations) > 1:
                detail += f" (+{len(violations) - 1} more)"
            rejections.append(Rejection(line_no, first.code, detail))
            continue
        if event.id in accepted:
            rejections.append(
                Rejection(line_no, DUPLICATE_ID, f"id {event.id!r} already seen")
            )
            continue
        accepted[event.id] = event

    events = tuple(sorted(accepted.values(), key=sort_key))
    return IngestResult(EventStream(meta, events), tuple(rejections))


@dataclass(frozen=True)
class FrameGrid:
    """The frame sampling grid: strictly increasing timestamps, fixed interval."""

    timestamps: tuple[float, ...]
    interval: float


def sample_frame_grid(
    meta: VideoMeta, sample_fps: Optional[float] = None
) -> FrameGrid:
    """Timestamps k/sample_fps for k = 0, 1, ... strictly below the duration.

    ``sample_fps=None`` uses DEFAULT_SAMPLE_FPS (20). Raises
    NonpositiveRateError for rates that are not finite and positive.
    """
    rate = DEFAULT_SAMPLE_FPS if sample_fps is None else sample_fps
    if not (isinstance(rate, (int, float)) and math.isfinite(rate) and rate > 0):
        raise NonpositiveRateError(rate)
    rate = float(rate)
    timestamps = []
    k = 0
    while k / rate < meta.duration:
        timestamps.append(k / rate)
        k += 1
    return FrameGrid(tuple(timestamps), 1.0 / rate)
