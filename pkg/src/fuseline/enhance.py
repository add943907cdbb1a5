"""Deterministic cross-modal correction passes over a timeline.

Three rule passes run in a fixed order:

  OCR_ASR      on-screen text and speech that agree within a segment are
               merged into one transcript carried on the ASR event; the
               OCR event is absorbed (hidden, retained for provenance).
  CAPTION_FIX  out-of-vocabulary caption tokens are corrected against tag
               and track labels when exactly one supported label is within
               the edit-distance budget; ambiguous or near-miss tokens are
               flagged without change.
  DET_FILTER   detections that no same-segment tag supports and whose
               score is below the suppression threshold are hidden.

Nothing is ever deleted: passes only hide events, rewrite payload text, and
attach support provenance, and every change is logged in an EnhanceReport
that can be replayed against the input to reproduce the output exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping

from .events import (
    Modality,
    ModalityEvent,
    TagVocabulary,
    normalize_text,
)
from .timeline import EventMark, Segment, Timeline, first_segment_of


class EnhancePass(str, Enum):
    OCR_ASR = "OCR_ASR"
    CAPTION_FIX = "CAPTION_FIX"
    DET_FILTER = "DET_FILTER"


ALL_PASSES = frozenset(EnhancePass)

# Tokens shorter than this never get corrected or flagged; stopwords would
# otherwise match short labels within the edit budget.
MIN_CORRECTABLE_TOKEN = 3


@dataclass(frozen=True)
class EnhanceConfig:
    ocr_asr_sim: float = 0.8
    token_edit_max: int = 1
    tag_conf_min: float = 0.5
    det_suppress_conf: float = 0.5
    enabled_passes: frozenset[EnhancePass] = ALL_PASSES

    def problems(self) -> list[str]:
        out = []
        for name in ("ocr_asr_sim", "tag_conf_min", "det_suppress_conf"):
            value = getattr(self, name)
            if not (0 <= value <= 1):
                out.append(f"{name} must be in [0, 1]")
        if self.token_edit_max < 0:
            out.append("token_edit_max must be >= 0")
        return out


@dataclass(frozen=True)
class MergeRecord:
    ocr_id: str
    asr_id: str
    merged_text: str


@dataclass(frozen=True)
class CorrectionRecord:
    event_id: str
    original: str
    replacement: str


@dataclass(frozen=True)
class FlagRecord:
    event_id: str
    token: str
    candidates: tuple[str, ...]


@dataclass(frozen=True)
class SuppressionRecord:
    event_id: str
    reason: str


@dataclass(frozen=True)
class EnhanceReport:
    merges: tuple[MergeRecord, ...] = ()
    corrections: tuple[CorrectionRecord, ...] = ()
    flags: tuple[FlagRecord, ...] = ()
    suppressions: tuple[SuppressionRecord, ...] = ()

    def counts(self) -> dict[str, int]:
        return {
            "merges": len(self.merges),
            "corrections": len(self.corrections),
            "flags": len(self.flags),
            "suppressions": len(self.suppressions),
        }

    def to_lines(self) -> list[str]:
        """Wire-style one-record-per-line serialization (audit output)."""
        lines = []
        for m in self.merges:
            lines.append(
                json.dumps(
                    {"kind": "merge", "ocr_id": m.ocr_id, "asr_id": m.asr_id,
                     "merged_text": m.merged_text},
                    ensure_ascii=False, separators=(",", ":"),
                )
            )
        for c in self.corrections:
            lines.append(
                json.dumps(
                    {"kind": "correction", "event_id": c.event_id,
                     "original": c.original, "replacement": c.replacement},
                    ensure_ascii=False, separators=(",", ":"),
                )
            )
        for f in self.flags:
            lines.append(
                json.dumps(
                    {"kind": "flag", "event_id": f.event_id, "token": f.token,
                     "candidates": list(f.candidates)},
                    ensure_ascii=False, separators=(",", ":"),
                )
            )
        for s in self.suppressions:
            lines.append(
                json.dumps(
                    {"kind": "suppression", "event_id": s.event_id,
                     "reason": s.reason},
                    ensure_ascii=False, separators=(",", ":"),
                )
            )
        return lines

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "EnhanceReport":
        merges, corrections, flags, suppressions = [], [], [], []
        for line in lines:
            if not line.strip():
                continue
            record = json.loads(line)
            kind = record.get("kind")
            if kind == "merge":
                merges.append(MergeRecord(record["ocr_id"], record["asr_id"],
                                          record["merged_text"]))
            elif kind == "correction":
                corrections.append(CorrectionRecord(record["event_id"],
                                                    record["original"],
                                                    record["replacement"]))
            elif kind == "flag":
                flags.append(FlagRecord(record["event_id"], record["token"],
                                        tuple(record["candidates"])))
            elif kind == "suppression":
                suppressions.append(SuppressionRecord(record["event_id"],
                                                      record["reason"]))
            else:
                raise ValueError(f"unknown report record kind {kind!r}")
        return cls(tuple(merges), tuple(corrections), tuple(flags),
                   tuple(suppressions))

    def merge_with(self, other: "EnhanceReport") -> "EnhanceReport":
        return EnhanceReport(
            self.merges + other.merges,
            self.corrections + other.corrections,
            self.flags + other.flags,
            self.suppressions + other.suppressions,
        )


def levenshtein(a: str, b: str) -> int:
    """Plain edit distance (insert/delete/substitute), two-row DP."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a):
        current = [i + 1]
        for j, cb in enumerate(b):
            current.append(
                min(previous[j + 1] + 1, current[j] + 1, previous[j] + (ca != cb))
            )
        previous = current
    return previous[-1]


def normalized_similarity(a: str, b: str) -> float:
    """1 - distance/max-length over normalized text; 1.0 for two empties."""
    na, nb = normalize_text(a), normalize_text(b)
    longest = max(len(na), len(nb))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(na, nb) / longest


def _set_mark(marks: dict[str, EventMark], event_id: str, **changes) -> None:
    current = marks.get(event_id, EventMark())
    marks[event_id] = replace(current, **changes)


def _add_support(
    marks: dict[str, EventMark], event_id: str, extra: Iterable[tuple[str, str]]
) -> None:
    current = marks.get(event_id, EventMark())
    marks[event_id] = replace(current, support=current.support | frozenset(extra))


def _segment_events(
    segment: Segment, events: Mapping[str, ModalityEvent], marks, modality
):
    for event_id in segment.event_ids:
        event = events[event_id]
        if event.modality is modality:
            mark = marks.get(event_id, EventMark())
            if not (mark.absorbed or mark.suppressed):
                yield event


def _supporting_tags(
    segment: Segment,
    events: Mapping[str, ModalityEvent],
    marks: dict[str, EventMark],
    label: str,
    tag_conf_min: float,
) -> list[str]:
    """Ids of the segment's visible TAG events matching a normalized label."""
    out = []
    for tag in _segment_events(segment, events, marks, Modality.TAG):
        if tag.confidence >= tag_conf_min and (
            normalize_text(tag.payload.label) == label
        ):
            out.append(tag.id)
    return out


def merge_ocr_asr(
    timeline: Timeline, cfg: EnhanceConfig = EnhanceConfig()
) -> tuple[Timeline, EnhanceReport]:
    """Merge agreeing, overlapping (OCR, ASR) pairs segment by segment.

    The longer text survives on the ASR event (ties keep the ASR text),
    confidence becomes the pair maximum, and the OCR event is absorbed.
    Each event participates in at most one merge, ever: events already
    merged or absorbed are skipped, which makes the pass idempotent.
    """
    events = dict(timeline.events)
    marks = dict(timeline.marks)
    merges: list[MergeRecord] = []

    for segment in timeline.segments:
        ocr_events = sorted(
            _segment_events(segment, events, marks, Modality.OCR),
            key=lambda e: e.id,
        )
        asr_events = sorted(
            _segment_events(segment, events, marks, Modality.ASR),
            key=lambda e: e.id,
        )
        for ocr in ocr_events:
            for asr in asr_events:
                ocr_mark = marks.get(ocr.id, EventMark())
                asr_mark = marks.get(asr.id, EventMark())
                if ocr_mark.absorbed or ocr_mark.merged:
                    break
                if asr_mark.absorbed or asr_mark.merged:
                    continue
                if not ocr.span.overlaps(asr.span):
                    continue
                asr_text = events[asr.id].payload.text
                ocr_text = ocr.payload.text
                if normalized_similarity(ocr_text, asr_text) < cfg.ocr_asr_sim:
                    continue
                merged_text = ocr_text if len(ocr_text) > len(asr_text) else asr_text
                payload = events[asr.id].payload
                events[asr.id] = replace(
                    events[asr.id],
                    payload=replace(payload, text=merged_text),
                    confidence=max(asr.confidence, ocr.confidence),
                )
                _set_mark(marks, asr.id, merged=True)
                _add_support(marks, asr.id, [(Modality.OCR.value, ocr.id)])
                _set_mark(marks, ocr.id, absorbed=True)
                merges.append(MergeRecord(ocr.id, asr.id, merged_text))

    out = replace(timeline, events=events, marks=marks)
    return out, EnhanceReport(merges=tuple(merges))


def _token_candidates(
    token: str, labels: Iterable[str], budget: int
) -> list[str]:
    return sorted(l for l in labels if levenshtein(token, l) <= budget)


def _corrected_text(text: str, replacements: Mapping[str, str]) -> str:
    tokens = normalize_text(text).split()
    return " ".join(replacements.get(tok, tok) for tok in tokens)


def correct_caption_tokens(
    timeline: Timeline,
    vocabulary: TagVocabulary,
    cfg: EnhanceConfig = EnhanceConfig(),
) -> tuple[Timeline, EnhanceReport]:
    """Correct out-of-vocabulary caption tokens against supported labels.

    A token (length >= 3, whitespace tokenization of the normalized text)
    not present in the vocabulary is replaced when exactly one vocabulary
    label within edit distance token_edit_max has a supporting same-segment
    TAG event at or above tag_conf_min. Multiple candidates in range, or a
    single candidate one step beyond the budget, flag the token unchanged.
    Each caption is evaluated at the first segment that still contains it.
    Corrected events get the supporting tag ids attached as provenance and
    their text rewritten in normalized form.
    """
    events = dict(timeline.events)
    marks = dict(timeline.marks)
    corrections: list[CorrectionRecord] = []
    flags: list[FlagRecord] = []
    processed: set[str] = set()

    for segment in timeline.segments:
        supported: dict[str, float] = {}
        for tag in _segment_events(segment, events, marks, Modality.TAG):
            if tag.confidence >= cfg.tag_conf_min:
                label = normalize_text(tag.payload.label)
                supported[label] = max(supported.get(label, 0.0), tag.confidence)
        supported_in_vocab = [l for l in supported if l in vocabulary]

        for modality in (Modality.CAPTION, Modality.DENSE_CAPTION):
            for event in _segment_events(segment, events, marks, modality):
                if event.id in processed:
                    continue
                processed.add(event.id)
                tokens = normalize_text(event.payload.text).split()
                replacements: dict[str, str] = {}
                support_ids: list[str] = []
                seen: set[str] = set()
                for token in tokens:
                    if token in seen or len(token) < MIN_CORRECTABLE_TOKEN:
                        continue
                    seen.add(token)
                    if token in vocabulary:
                        continue
                    in_range = _token_candidates(
                        token, supported_in_vocab, cfg.token_edit_max
                    )
                    if len(in_range) == 1:
                        label = in_range[0]
                        replacements[token] = label
                        corrections.append(
                            CorrectionRecord(event.id, token, label)
                        )
                        support_ids.extend(
                            _supporting_tags(
                                segment, events, marks, label, cfg.tag_conf_min
                            )
                        )
                    elif len(in_range) > 1:
                        flags.append(FlagRecord(event.id, token, tuple(in_range)))
                    else:
                        near = _token_candidates(
                            token, supported_in_vocab, cfg.token_edit_max + 1
                        )
                        if near:
                            flags.append(FlagRecord(event.id, token, tuple(near)))
                if replacements:
                    payload = events[event.id].payload
                    events[event.id] = replace(
                        events[event.id],
                        payload=replace(
                            payload,
                            text=_corrected_text(payload.text, replacements),
                        ),
                    )
                    _add_support(
                        marks,
                        event.id,
                        [(Modality.TAG.value, tid) for tid in support_ids],
                    )

    out = replace(timeline, events=events, marks=marks)
    return out, EnhanceReport(corrections=tuple(corrections), flags=tuple(flags))


def filter_detections(
    timeline: Timeline, cfg: EnhanceConfig = EnhanceConfig()
) -> tuple[Timeline, EnhanceReport]:
    """Suppress low-score detections that no same-segment tag supports.

    Each detection event is judged once, at the first segment that still
    contains it; track states are separate events and are judged
    independently. A detection kept *because* of tag support (score below
    the threshold) gets the matching tag ids attached as provenance.
    """
    events = timeline.events
    marks = dict(timeline.marks)
    suppressions: list[SuppressionRecord] = []
    processed: set[str] = set()

    for segment in timeline.segments:
        for event in _segment_events(segment, events, marks, Modality.DETECTION):
            if event.id in processed:
                continue
            processed.add(event.id)
            payload = event.payload
            if payload.score >= cfg.det_suppress_conf:
                continue
            label = normalize_text(payload.label)
            tag_ids = _supporting_tags(
                segment, events, marks, label, cfg.tag_conf_min
            )
            if tag_ids:
                _add_support(
                    marks, event.id, [(Modality.TAG.value, t) for t in tag_ids]
                )
            else:
                _set_mark(marks, event.id, suppressed=True)
                suppressions.append(
                    SuppressionRecord(
                        event.id,
                        f"no supporting tag for {label!r}; "
                        f"score {payload.score:.2f} < {cfg.det_suppress_conf:.2f}",
                    )
                )

    out = replace(timeline, marks=marks)
    return out, EnhanceReport(suppressions=tuple(suppressions))


_PASS_FUNCS = {
    EnhancePass.OCR_ASR: lambda t, vocab, cfg: merge_ocr_asr(t, cfg),
    EnhancePass.CAPTION_FIX: lambda t, vocab, cfg: correct_caption_tokens(t, vocab, cfg),
    EnhancePass.DET_FILTER: lambda t, vocab, cfg: filter_detections(t, cfg),
}

PASS_ORDER = (EnhancePass.OCR_ASR, EnhancePass.CAPTION_FIX, EnhancePass.DET_FILTER)


def enhance(
    timeline: Timeline,
    vocabulary: TagVocabulary,
    cfg: EnhanceConfig = EnhanceConfig(),
) -> tuple[Timeline, EnhanceReport]:
    """Run the enabled passes in fixed order and attach the merged report."""
    report = EnhanceReport()
    current = timeline
    for pass_name in PASS_ORDER:
        if pass_name not in cfg.enabled_passes:
            continue
        current, delta = _PASS_FUNCS[pass_name](current, vocabulary, cfg)
        report = report.merge_with(delta)
    current = replace(current, report=report)
    return current, report


def replay_report(
    timeline: Timeline, report: EnhanceReport, cfg: EnhanceConfig = EnhanceConfig()
) -> Timeline:
    """Reapply a report to the timeline it was produced from.

    Reproduces the enhanced timeline exactly (marks, rewritten payloads,
    support provenance) without re-running any decision logic beyond
    recomputing the deterministic side facts (pair confidences, supporting
    tag ids, tag-vote keeps) from the input.
    """
    events = dict(timeline.events)
    marks = dict(timeline.marks)

    for m in report.merges:
        asr = events[m.asr_id]
        ocr = events[m.ocr_id]
        events[m.asr_id] = replace(
            asr,
            payload=replace(asr.payload, text=m.merged_text),
            confidence=max(asr.confidence, ocr.confidence),
        )
        _set_mark(marks, m.asr_id, merged=True)
        _add_support(marks, m.asr_id, [(Modality.OCR.value, m.ocr_id)])
        _set_mark(marks, m.ocr_id, absorbed=True)

    by_event: dict[str, dict[str, str]] = {}
    for c in report.corrections:
        by_event.setdefault(c.event_id, {})[c.original] = c.replacement
    for event_id, replacements in by_event.items():
        event = events[event_id]
        seg_index = first_segment_of(timeline, event_id)
        support: list[str] = []
        if seg_index is not None:
            segment = timeline.segments[seg_index]
            for label in replacements.values():
                support.extend(
                    _supporting_tags(segment, events, marks, label, cfg.tag_conf_min)
                )
        events[event_id] = replace(
            event,
            payload=replace(
                event.payload, text=_corrected_text(event.payload.text, replacements)
            ),
        )
        _add_support(
            marks, event_id, [(Modality.TAG.value, t) for t in support]
        )

    for s in report.suppressions:
        _set_mark(marks, s.event_id, suppressed=True)

    if EnhancePass.DET_FILTER in cfg.enabled_passes:
        seen: set[str] = set()
        for segment in timeline.segments:
            for event in _segment_events(segment, events, marks, Modality.DETECTION):
                if event.id in seen:
                    continue
                seen.add(event.id)
                if event.payload.score >= cfg.det_suppress_conf:
                    continue
                tag_ids = _supporting_tags(
                    segment, events, marks,
                    normalize_text(event.payload.label), cfg.tag_conf_min,
                )
                if tag_ids:
                    _add_support(
                        marks, event.id, [(Modality.TAG.value, t) for t in tag_ids]
                    )

    return replace(timeline, events=events, marks=marks, report=report)
