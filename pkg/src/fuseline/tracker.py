"""Two-stage score-partitioned IoU association with deterministic lifecycle.

Detections at each frame are split by score: high-score detections are
matched first (and are the only ones allowed to spawn new tracks), the
leftovers of the track set are then matched against low-score detections.
Matching is greedy by descending IoU with (track id, detection index)
tie-breaks, gated by class-label equality, so identical inputs always
produce identical track ids and states. There is no motion model: a track
sits at its last box.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .events import (
    Box,
    DetectionPayload,
    Modality,
    ModalityEvent,
    TimeSpan,
    Track,
    TrackObservation,
    TrackStatus,
)
from .protocol import EventStream, FrameGrid

FRAME_ORDER_VIOLATION = "FRAME_ORDER_VIOLATION"


class FrameOrderError(ValueError):
    def __init__(self, frame: int, last: int):
        super().__init__(
            f"{FRAME_ORDER_VIOLATION}: frame {frame} after frame {last}"
        )
        self.code = FRAME_ORDER_VIOLATION


@dataclass(frozen=True)
class TrackerConfig:
    tau_high: float = 0.6
    tau_low: float = 0.1
    iou_match: float = 0.3
    patience: int = 3
    min_hits: int = 2

    def problems(self) -> list[str]:
        out = []
        if not (0 <= self.tau_low <= self.tau_high <= 1):
            out.append("thresholds must satisfy 0 <= tau_low <= tau_high <= 1")
        if not (0 < self.iou_match <= 1):
            out.append("iou_match must be in (0, 1]")
        if self.patience < 0:
            out.append("patience must be >= 0")
        if self.min_hits < 1:
            out.append("min_hits must be >= 1")
        return out


@dataclass(frozen=True)
class Detection:
    """A per-frame detection, optionally linked to its wire event."""

    label: str
    box: Box
    score: float
    event_id: Optional[str] = None
    source: str = ""
    confidence: float = 1.0

    @classmethod
    def from_event(cls, event: ModalityEvent) -> "Detection":
        payload = event.payload
        assert isinstance(payload, DetectionPayload)
        return cls(
            label=payload.label,
            box=payload.box,
            score=payload.score,
            event_id=event.id,
            source=event.source,
            confidence=event.confidence,
        )


def iou(a: Box, b: Box) -> float:
    """Intersection over union; 0.0 when the union has zero area."""
    iw = min(a.right(), b.right()) - max(a.x, b.x)
    ih = min(a.bottom(), b.bottom()) - max(a.y, b.y)
    inter = max(0.0, iw) * max(0.0, ih)
    union = a.area() + b.area() - inter
    if union <= 0:
        return 0.0
    return inter / union


@dataclass(frozen=True)
class Association:
    matches: tuple[tuple[int, int], ...]  # (track_id, detection index)
    unmatched_track_ids: tuple[int, ...]
    unmatched_detections: tuple[int, ...]


def _greedy(
    tracks: Sequence[Track],
    positions: dict[int, Box],
    detections: Sequence[Detection],
    candidate_dets: Sequence[int],
    free_tracks: set[int],
    free_dets: set[int],
    cfg: TrackerConfig,
) -> list[tuple[int, int]]:
    pairs = []
    for track in tracks:
        if track.track_id not in free_tracks:
            continue
        for di in candidate_dets:
            if di not in free_dets:
                continue
            det = detections[di]
            if det.label != track.class_label:
                continue
            overlap = iou(positions[track.track_id], det.box)
            if overlap >= cfg.iou_match:
                pairs.append((-overlap, track.track_id, di))
    pairs.sort()
    matches = []
    for neg_overlap, track_id, di in pairs:
        if track_id in free_tracks and di in free_dets:
            matches.append((track_id, di))
            free_tracks.discard(track_id)
            free_dets.discard(di)
    return matches


def associate_frame(
    active_tracks: Sequence[Track],
    detections: Sequence[Detection],
    cfg: TrackerConfig = TrackerConfig(),
) -> Association:
    """Match one frame's detections to the given (non-REMOVED) tracks.

    Stage 1: detections with score >= tau_high, greedy by descending IoU,
    pairs accepted at IoU >= iou_match, ties broken by (lower track id,
    lower detection index). Stage 2: the remaining tracks against
    detections with tau_low <= score < tau_high, same rule. Class labels
    must match for a pair to be considered at all.
    """
    positions = {t.track_id: t.states[-1].box for t in active_tracks}
    free_tracks = {t.track_id for t in active_tracks}
    free_dets = set(range(len(detections)))

    stage1 = [i for i, d in enumerate(detections) if d.score >= cfg.tau_high]
    stage2 = [
        i
        for i, d in enumerate(detections)
        if cfg.tau_low <= d.score < cfg.tau_high
    ]

    matches = _greedy(
        active_tracks, positions, detections, stage1, free_tracks, free_dets, cfg
    )
    matches += _greedy(
        active_tracks, positions, detections, stage2, free_tracks, free_dets, cfg
    )

    matches.sort()
    return Association(
        matches=tuple(matches),
        unmatched_track_ids=tuple(sorted(free_tracks)),
        unmatched_detections=tuple(sorted(free_dets)),
    )


@dataclass
class _TrackState:
    track_id: int
    class_label: str
    states: list[TrackObservation] = field(default_factory=list)
    status: TrackStatus = TrackStatus.TENTATIVE
    hits: int = 1
    misses: int = 0

    def snapshot(self) -> Track:
        return Track(
            track_id=self.track_id,
            class_label=self.class_label,
            states=tuple(self.states),
            status=self.status,
        )


class ObjectTracker:
    """Single-owner tracker state, advanced strictly frame by frame."""

    def __init__(self, cfg: TrackerConfig = TrackerConfig()):
        problems = cfg.problems()
        if problems:
            raise ValueError("; ".join(problems))
        self.cfg = cfg
        self._tracks: list[_TrackState] = []
        self._next_id = 1
        self._last_frame: Optional[int] = None

    def step(self, frame_index: int, detections: Sequence[Detection]) -> None:
        """Advance lifecycle with one frame's detections (possibly empty)."""
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise FrameOrderError(frame_index, self._last_frame)
        self._last_frame = frame_index
        cfg = self.cfg

        candidates = [t for t in self._tracks if t.status is not TrackStatus.REMOVED]
        assoc = associate_frame(
            [t.snapshot() for t in candidates], detections, cfg
        )
        by_id = {t.track_id: t for t in candidates}

        for track_id, di in assoc.matches:
            track = by_id[track_id]
            det = detections[di]
            track.misses = 0
            track.hits += 1
            if track.status is TrackStatus.TENTATIVE:
                if track.hits >= cfg.min_hits:
                    track.status = TrackStatus.ACTIVE
            else:
                track.status = TrackStatus.ACTIVE
            track.states.append(
                TrackObservation(
                    frame_index=frame_index,
                    box=det.box,
                    score=det.score,
                    event_id=det.event_id,
                    source=det.source,
                    confidence=det.confidence,
                    active=track.status is TrackStatus.ACTIVE,
                )
            )

        for track_id in assoc.unmatched_track_ids:
            track = by_id[track_id]
            if track.status is TrackStatus.TENTATIVE:
                track.status = TrackStatus.REMOVED
            elif track.status is TrackStatus.ACTIVE:
                track.status = TrackStatus.LOST
                track.misses = 1
            elif track.status is TrackStatus.LOST:
                track.misses += 1
                if track.misses > cfg.patience:
                    track.status = TrackStatus.REMOVED

        for di in assoc.unmatched_detections:
            det = detections[di]
            if det.score < cfg.tau_high:
                continue
            track = _TrackState(track_id=self._next_id, class_label=det.label)
            self._next_id += 1
            track.states.append(
                TrackObservation(
                    frame_index=frame_index,
                    box=det.box,
                    score=det.score,
                    event_id=det.event_id,
                    source=det.source,
                    confidence=det.confidence,
                    active=cfg.min_hits <= 1,
                )
            )
            if cfg.min_hits <= 1:
                track.status = TrackStatus.ACTIVE
            self._tracks.append(track)

    def tracks(self) -> tuple[Track, ...]:
        return tuple(t.snapshot() for t in self._tracks)


def step_tracks(
    tracker: ObjectTracker, frame_index: int, detections: Sequence[Detection]
) -> tuple[Track, ...]:
    """Functional wrapper over ObjectTracker.step; returns the updated tracks."""
    tracker.step(frame_index, detections)
    return tracker.tracks()


def _frame_of(t: float, grid: FrameGrid) -> int:
    idx = bisect.bisect_right(grid.timestamps, t) - 1
    return max(idx, 0)


def detections_by_frame(
    stream: EventStream, grid: FrameGrid
) -> dict[int, list[Detection]]:
    """Group the stream's DETECTION events onto grid frames (by span start)."""
    frames: dict[int, list[Detection]] = {}
    if not grid.timestamps:
        return frames
    for event in stream.events:
        if event.modality is not Modality.DETECTION:
            continue
        frames.setdefault(_frame_of(event.span.start, grid), []).append(
            Detection.from_event(event)
        )
    return frames


def track_stream(
    stream: EventStream,
    grid: FrameGrid,
    cfg: TrackerConfig = TrackerConfig(),
) -> tuple[Track, ...]:
    """Run the tracker over every grid frame of a sealed stream."""
    frames = detections_by_frame(stream, grid)
    tracker = ObjectTracker(cfg)
    for frame_index in range(len(grid.timestamps)):
        tracker.step(frame_index, frames.get(frame_index, []))
    return tracker.tracks()


def tracks_to_events(
    tracks: Sequence[Track], grid: FrameGrid
) -> list[ModalityEvent]:
    """One DETECTION event per active-lifetime track state.

    Spans are the instant of the state's frame; payloads carry the track id.
    Source event ids are reused so document provenance points back at the
    wire records that produced each state.
    """
    out: list[ModalityEvent] = []
    for track in sorted(tracks, key=lambda t: t.track_id):
        for obs in track.active_states():
            t = grid.timestamps[obs.frame_index]
            event_id = obs.event_id or f"trk{track.track_id}f{obs.frame_index}"
            out.append(
                ModalityEvent(
                    id=event_id,
                    modality=Modality.DETECTION,
                    span=TimeSpan(t, t),
                    payload=DetectionPayload(
                        label=track.class_label,
                        box=obs.box,
                        score=obs.score,
                        track_id=track.track_id,
                    ),
                    source=obs.source,
                    confidence=obs.confidence,
                )
            )
    return out
