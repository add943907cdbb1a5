"""Frame-grid bucketing of a sealed event stream.

Segments partition [0, duration) half-open; an event lands in every segment
its span overlaps with positive length, and instant events land in the one
segment containing their timestamp (the last segment when the timestamp
equals the duration). Segments hold event ids; the events themselves live
in a single id-keyed map so enhancement can rewrite payloads in one place.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Mapping, Optional

from .events import (
    Modality,
    ModalityEvent,
    TimeSpan,
    VideoMeta,
    segment_sort_key,
)
from .protocol import EventStream, FrameGrid

if TYPE_CHECKING:
    from .enhance import EnhanceReport

GRID_META_MISMATCH = "GRID_META_MISMATCH"

TEXT_BEARING = frozenset(
    {Modality.CAPTION, Modality.DENSE_CAPTION, Modality.OCR, Modality.ASR}
)


class GridMetaError(ValueError):
    def __init__(self, detail: str):
        super().__init__(f"{GRID_META_MISMATCH}: {detail}")
        self.code = GRID_META_MISMATCH


@dataclass(frozen=True)
class Segment:
    """One grid interval and the ids of the events overlapping it."""

    index: int
    span: TimeSpan
    event_ids: tuple[str, ...]


@dataclass(frozen=True)
class EventMark:
    """Enhancement state of one stored event.

    absorbed/suppressed events stay in storage but are excluded from
    rendering; ``support`` lists (modality, event id) pairs of events whose
    agreement changed or preserved this event's rendering.
    """

    absorbed: bool = False
    suppressed: bool = False
    merged: bool = False
    support: frozenset[tuple[str, str]] = frozenset()


BLANK_MARK = EventMark()


@dataclass(frozen=True)
class Timeline:
    """Ordered frame-anchored segments over one video's events."""

    meta: VideoMeta
    grid: FrameGrid
    segments: tuple[Segment, ...]
    events: dict[str, ModalityEvent]
    marks: dict[str, EventMark] = field(default_factory=dict)
    report: Optional["EnhanceReport"] = None

    def mark(self, event_id: str) -> EventMark:
        return self.marks.get(event_id, BLANK_MARK)

    def visible(self, event_id: str) -> bool:
        mark = self.mark(event_id)
        return not (mark.absorbed or mark.suppressed)

    def stripped(self) -> "Timeline":
        """This timeline without its attached report (for content equality)."""
        return replace(self, report=None)


def _segment_bounds(grid: FrameGrid, duration: float) -> list[TimeSpan]:
    starts = grid.timestamps
    spans = []
    for k, start in enumerate(starts):
        end = starts[k + 1] if k + 1 < len(starts) else duration
        spans.append(TimeSpan(start, end))
    return spans


def segment_range(
    span: TimeSpan, grid: FrameGrid, duration: float
) -> range:
    """Indices of the segments a span belongs to (empty for an empty grid)."""
    starts = grid.timestamps
    if not starts:
        return range(0)
    if span.is_instant():
        if span.start == duration:
            return range(len(starts) - 1, len(starts))
        k = max(bisect.bisect_right(starts, span.start) - 1, 0)
        return range(k, k + 1)
    first = max(bisect.bisect_right(starts, span.start) - 1, 0)
    last = min(bisect.bisect_left(starts, span.end) - 1, len(starts) - 1)
    return range(first, last + 1)


def build_timeline(stream: EventStream, grid: FrameGrid) -> Timeline:
    """Bucket a sealed stream onto the grid. Pure and deterministic."""
    meta = stream.meta
    if grid.timestamps:
        if grid.timestamps[0] != 0.0 or grid.timestamps[-1] >= meta.duration:
            raise GridMetaError("grid does not cover [0, duration)")
    elif meta.duration > 0:
        raise GridMetaError("empty grid for a video of positive duration")

    bounds = _segment_bounds(grid, meta.duration)
    members: list[list[ModalityEvent]] = [[] for _ in bounds]
    for event in stream.events:
        for k in segment_range(event.span, grid, meta.duration):
            members[k].append(event)

    segments = tuple(
        Segment(
            index=k,
            span=bounds[k],
            event_ids=tuple(e.id for e in sorted(members[k], key=segment_sort_key)),
        )
        for k in range(len(bounds))
    )
    return Timeline(
        meta=meta,
        grid=grid,
        segments=segments,
        events={e.id: e for e in stream.events},
    )


def dedupe_segment_events(
    segment: Segment,
    events: Mapping[str, ModalityEvent],
    similarity_threshold: float,
) -> Segment:
    """Drop same-modality text repeats within one segment.

    An event whose normalized text similarity to an earlier kept event of
    the same modality reaches the threshold is removed from the segment
    (first occurrence kept). Cross-modality pairs are never compared.
    Idempotent for any threshold in [0, 1].
    """
    from .enhance import normalized_similarity

    kept: list[str] = []
    kept_texts: dict[Modality, list[str]] = {}
    for event_id in segment.event_ids:
        event = events[event_id]
        text = event.text()
        if event.modality not in TEXT_BEARING or text is None:
            kept.append(event_id)
            continue
        earlier = kept_texts.setdefault(event.modality, [])
        if any(
            normalized_similarity(text, other) >= similarity_threshold
            for other in earlier
        ):
            continue
        kept.append(event_id)
        earlier.append(text)
    return replace(segment, event_ids=tuple(kept))


def dedupe_timeline(timeline: Timeline, similarity_threshold: float) -> Timeline:
    """Apply dedupe_segment_events to every segment."""
    segments = tuple(
        dedupe_segment_events(seg, timeline.events, similarity_threshold)
        for seg in timeline.segments
    )
    return replace(timeline, segments=segments)


def first_segment_of(timeline: Timeline, event_id: str) -> Optional[int]:
    """Index of the first segment still containing the event, if any."""
    for segment in timeline.segments:
        if event_id in segment.event_ids:
            return segment.index
    return None
