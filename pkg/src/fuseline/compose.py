"""Render an enhanced timeline into a sequential narrative document.

Consecutive runs of ``group_n`` segments form one block; every render-
visible event contributes to exactly one block (the block of the first
segment still containing it). Each rendered line carries its provenance,
the set of (modality, event id) pairs that produced or preserved it.
Ablation flags remove a modality's events both here and, when applied
before enhancement via ``apply_ablation``, from the correction passes.

The text rendering and the structured export are byte-deterministic; their
formats are documented in docs/document-format.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

from .events import (
    Box,
    Modality,
    ModalityEvent,
    TimeSpan,
    VideoMeta,
    normalize_text,
)
from .timeline import Timeline

GROUP_SIZE_NONPOSITIVE = "GROUP_SIZE_NONPOSITIVE"
MALFORMED_DOCUMENT = "MALFORMED_DOCUMENT"

DEFAULT_GROUP_N = 20

EXPORT_FORMAT = "fuseline-doc/1"


class GroupSizeError(ValueError):
    def __init__(self, group_n):
        super().__init__(f"{GROUP_SIZE_NONPOSITIVE}: group_n {group_n!r}")
        self.code = GROUP_SIZE_NONPOSITIVE


class MalformedDocumentError(ValueError):
    def __init__(self, detail: str):
        super().__init__(f"{MALFORMED_DOCUMENT}: {detail}")
        self.code = MALFORMED_DOCUMENT


@dataclass(frozen=True)
class AblationFlags:
    """Per-modality rendering switches; tracking only hides track ids."""

    asr: bool = True
    ocr: bool = True
    tags: bool = True
    captions: bool = True
    tracking: bool = True


class DocKind(str, Enum):
    SCENE_CAPTION = "SCENE_CAPTION"
    TAGS = "TAGS"
    OBJECT = "OBJECT"
    REGION = "REGION"
    ONSCREEN_TEXT = "ONSCREEN_TEXT"
    TRANSCRIPT = "TRANSCRIPT"


KIND_ORDER = {
    DocKind.SCENE_CAPTION: 0,
    DocKind.TAGS: 1,
    DocKind.OBJECT: 2,
    DocKind.REGION: 3,
    DocKind.ONSCREEN_TEXT: 4,
    DocKind.TRANSCRIPT: 5,
}

# The modality whose event ids anchor a line's deterministic ordering.
KIND_PRIMARY_MODALITY = {
    DocKind.SCENE_CAPTION: Modality.CAPTION,
    DocKind.TAGS: Modality.TAG,
    DocKind.OBJECT: Modality.DETECTION,
    DocKind.REGION: Modality.DENSE_CAPTION,
    DocKind.ONSCREEN_TEXT: Modality.OCR,
    DocKind.TRANSCRIPT: Modality.ASR,
}


@dataclass(frozen=True)
class DocLine:
    kind: DocKind
    text: str
    provenance: frozenset[tuple[str, str]]

    def anchor(self) -> str:
        primary = KIND_PRIMARY_MODALITY[self.kind].value
        return min(eid for mod, eid in self.provenance if mod == primary)


@dataclass(frozen=True)
class DocBlock:
    span: TimeSpan
    lines: tuple[DocLine, ...]


@dataclass(frozen=True)
class FooterCounts:
    events_stored: int = 0
    events_visible: int = 0
    merges: int = 0
    corrections: int = 0
    flags: int = 0
    suppressions: int = 0


@dataclass(frozen=True)
class ComposedDocument:
    meta: VideoMeta
    blocks: tuple[DocBlock, ...]
    footer: FooterCounts


def modality_enabled(modality: Modality, flags: AblationFlags) -> bool:
    if modality in (Modality.CAPTION, Modality.DENSE_CAPTION):
        return flags.captions
    if modality is Modality.OCR:
        return flags.ocr
    if modality is Modality.ASR:
        return flags.asr
    if modality is Modality.TAG:
        return flags.tags
    return True  # detections have no ablation flag of their own


def apply_ablation(timeline: Timeline, flags: AblationFlags) -> Timeline:
    """Remove disabled modalities from every segment (storage untouched).

    Run before enhancement so ablated events are invisible to the
    correction passes, matching how the component-removal studies work.
    """
    segments = tuple(
        replace(
            seg,
            event_ids=tuple(
                eid
                for eid in seg.event_ids
                if modality_enabled(timeline.events[eid].modality, flags)
            ),
        )
        for seg in timeline.segments
    )
    return replace(timeline, segments=segments)


def _fmt_coord(value: float) -> str:
    return f"{value:.1f}"


def _fmt_box_at(box: Box) -> str:
    return (
        f"({_fmt_coord(box.x)},{_fmt_coord(box.y)}) "
        f"{_fmt_coord(box.w)}x{_fmt_coord(box.h)}"
    )


def format_timestamp(seconds: float) -> str:
    """HH:MM:SS.mmm with millisecond rounding."""
    total_ms = int(round(seconds * 1000))
    ms = total_ms % 1000
    s = (total_ms // 1000) % 60
    m = (total_ms // 60000) % 60
    h = total_ms // 3600000
    return f"{h:02d}:{m:02d}:{s:02d}.{ms:03d}"


def _transcript_text(event: ModalityEvent, merged: bool) -> str:
    payload = event.payload
    marker = "[ASR+OCR]" if merged else "[ASR]"
    parts = [marker]
    if payload.text:
        parts.append(payload.text)
    tags = sorted({normalize_text(t) for t in payload.audio_tags})
    if tags:
        parts.append(f"(audio: {', '.join(tags)})")
    return " ".join(parts)


def _provenance(event: ModalityEvent, support) -> frozenset[tuple[str, str]]:
    return frozenset({(event.modality.value, event.id)} | set(support))


def compose(
    timeline: Timeline,
    flags: AblationFlags = AblationFlags(),
    group_n: int = DEFAULT_GROUP_N,
) -> ComposedDocument:
    """Group segments into blocks and render one line set per block."""
    if group_n <= 0:
        raise GroupSizeError(group_n)

    # Each render-visible event contributes exactly once, at the block of
    # the first segment that still contains it.
    assigned: dict[str, int] = {}
    for segment in timeline.segments:
        block_index = segment.index // group_n
        for eid in segment.event_ids:
            if eid in assigned:
                continue
            event = timeline.events[eid]
            if not modality_enabled(event.modality, flags):
                continue
            if not timeline.visible(eid):
                continue
            assigned[eid] = block_index

    by_block: dict[int, list[str]] = {}
    for eid, block_index in assigned.items():
        by_block.setdefault(block_index, []).append(eid)

    n_segments = len(timeline.segments)
    blocks: list[DocBlock] = []
    for block_index in sorted(by_block):
        first = timeline.segments[block_index * group_n]
        last = timeline.segments[min((block_index + 1) * group_n, n_segments) - 1]
        span = TimeSpan(first.span.start, last.span.end)

        lines: list[DocLine] = []
        tag_events: list[ModalityEvent] = []
        det_groups: dict[object, list[ModalityEvent]] = {}

        for eid in sorted(by_block[block_index]):
            event = timeline.events[eid]
            support = timeline.mark(eid).support
            payload = event.payload
            if event.modality is Modality.CAPTION:
                lines.append(
                    DocLine(
                        DocKind.SCENE_CAPTION,
                        f"[SCENE] {payload.text}",
                        _provenance(event, support),
                    )
                )
            elif event.modality is Modality.DENSE_CAPTION:
                lines.append(
                    DocLine(
                        DocKind.REGION,
                        f"[REGION {_fmt_box_at(payload.box)}] {payload.text}",
                        _provenance(event, support),
                    )
                )
            elif event.modality is Modality.OCR:
                lines.append(
                    DocLine(
                        DocKind.ONSCREEN_TEXT,
                        f'[TEXT {payload.lang}] "{payload.text}" '
                        f"@ ({_fmt_coord(payload.box.x)},{_fmt_coord(payload.box.y)})",
                        _provenance(event, support),
                    )
                )
            elif event.modality is Modality.ASR:
                lines.append(
                    DocLine(
                        DocKind.TRANSCRIPT,
                        _transcript_text(event, timeline.mark(eid).merged),
                        _provenance(event, support),
                    )
                )
            elif event.modality is Modality.TAG:
                tag_events.append(event)
            else:
                key: object = (
                    payload.track_id
                    if flags.tracking and payload.track_id is not None
                    else event.id
                )
                det_groups.setdefault(key, []).append(event)

        if tag_events:
            labels = sorted({normalize_text(e.payload.label) for e in tag_events})
            provenance = frozenset(
                (Modality.TAG.value, e.id) for e in tag_events
            )
            lines.append(
                DocLine(DocKind.TAGS, f"[TAGS] {', '.join(labels)}", provenance)
            )

        for key in det_groups:
            group = sorted(det_groups[key], key=lambda e: (e.span.start, e.id))
            head = group[0]
            track_id = head.payload.track_id
            if flags.tracking and track_id is not None:
                marker = f"[OBJ#{track_id}]"
            else:
                marker = "[OBJ]"
            provenance: frozenset[tuple[str, str]] = frozenset()
            for event in group:
                provenance |= _provenance(event, timeline.mark(event.id).support)
            lines.append(
                DocLine(
                    DocKind.OBJECT,
                    f"{marker} {head.payload.label} @ {_fmt_box_at(head.payload.box)}",
                    provenance,
                )
            )

        lines.sort(key=lambda l: (KIND_ORDER[l.kind], l.anchor()))
        blocks.append(DocBlock(span=span, lines=tuple(lines)))

    report = timeline.report
    footer = FooterCounts(
        events_stored=len(timeline.events),
        events_visible=len(assigned),
        merges=len(report.merges) if report else 0,
        corrections=len(report.corrections) if report else 0,
        flags=len(report.flags) if report else 0,
        suppressions=len(report.suppressions) if report else 0,
    )
    return ComposedDocument(meta=timeline.meta, blocks=tuple(blocks), footer=footer)


def render_text(doc: ComposedDocument) -> str:
    """Deterministic UTF-8 narrative rendering; byte-identical across runs."""
    meta = doc.meta
    out = [
        f"# {meta.title or meta.source_uri or 'untitled video'}",
        f"source: {meta.source_uri or '-'}",
        f"duration: {format_timestamp(meta.duration)} | fps: {meta.fps:g} "
        f"| frame: {meta.width}x{meta.height}",
    ]
    for block in doc.blocks:
        out.append("")
        out.append(
            f"## [{format_timestamp(block.span.start)} - "
            f"{format_timestamp(block.span.end)}]"
        )
        for line in block.lines:
            out.append(line.text)
    f = doc.footer
    out.append("")
    out.append("--")
    out.append(
        f"events: {f.events_visible}/{f.events_stored} visible"
        f" | merges: {f.merges} | corrections: {f.corrections}"
        f" | flags: {f.flags} | suppressions: {f.suppressions}"
    )
    return "\n".join(out) + "\n"


def export_structured(doc: ComposedDocument) -> str:
    """Lossless canonical JSON export; import(export(doc)) == doc."""
    meta = doc.meta
    record = {
        "format": EXPORT_FORMAT,
        "meta": {
            "duration": meta.duration,
            "fps": meta.fps,
            "width": meta.width,
            "height": meta.height,
            "title": meta.title,
            "source_uri": meta.source_uri,
        },
        "blocks": [
            {
                "span": [block.span.start, block.span.end],
                "lines": [
                    {
                        "kind": line.kind.value,
                        "text": line.text,
                        "provenance": sorted(
                            [mod, eid] for mod, eid in line.provenance
                        ),
                    }
                    for line in block.lines
                ],
            }
            for block in doc.blocks
        ],
        "footer": {
            "events_stored": doc.footer.events_stored,
            "events_visible": doc.footer.events_visible,
            "merges": doc.footer.merges,
            "corrections": doc.footer.corrections,
            "flags": doc.footer.flags,
            "suppressions": doc.footer.suppressions,
        },
    }
    return json.dumps(record, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":")) + "\n"


def import_structured(text: str) -> ComposedDocument:
    """Parse an export back into a ComposedDocument.

    Raises MalformedDocumentError on anything that is not a complete,
    well-formed export.
    """
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(str(exc)) from None
    try:
        if record["format"] != EXPORT_FORMAT:
            raise MalformedDocumentError(
                f"unsupported format {record.get('format')!r}"
            )
        meta = VideoMeta(
            duration=float(record["meta"]["duration"]),
            fps=float(record["meta"]["fps"]),
            width=int(record["meta"]["width"]),
            height=int(record["meta"]["height"]),
            title=record["meta"]["title"],
            source_uri=record["meta"]["source_uri"],
        )
        blocks = []
        for raw_block in record["blocks"]:
            lines = tuple(
                DocLine(
                    kind=DocKind(raw_line["kind"]),
                    text=raw_line["text"],
                    provenance=frozenset(
                        (mod, eid) for mod, eid in raw_line["provenance"]
                    ),
                )
                for raw_line in raw_block["lines"]
            )
            span = TimeSpan(float(raw_block["span"][0]), float(raw_block["span"][1]))
            blocks.append(DocBlock(span=span, lines=lines))
        footer = FooterCounts(
            events_stored=int(record["footer"]["events_stored"]),
            events_visible=int(record["footer"]["events_visible"]),
            merges=int(record["footer"]["merges"]),
            corrections=int(record["footer"]["corrections"]),
            flags=int(record["footer"]["flags"]),
            suppressions=int(record["footer"]["suppressions"]),
        )
    except MalformedDocumentError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MalformedDocumentError(f"{type(exc).__name__}: {exc}") from None
    return ComposedDocument(meta=meta, blocks=tuple(blocks), footer=footer)


def provenance_pairs(doc: ComposedDocument) -> frozenset[tuple[str, str]]:
    """All (modality, event id) pairs referenced anywhere in the document."""
    out: set[tuple[str, str]] = set()
    for block in doc.blocks:
        for line in block.lines:
            out |= line.provenance
    return frozenset(out)


def line_keys(doc: ComposedDocument) -> frozenset:
    """Identity keys (kind, provenance) of every line, for ablation diffs."""
    return frozenset(
        (line.kind.value, line.provenance)
        for block in doc.blocks
        for line in block.lines
    )
