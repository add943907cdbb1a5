from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fuseline.events import (
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
)

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def meta() -> VideoMeta:
    return VideoMeta(duration=10.0, fps=20.0, width=1280, height=720)


def make_event(
    event_id: str,
    modality: Modality,
    start: float,
    end: float,
    *,
    text: str = "",
    box: Box | None = None,
    lang: str = "en",
    label: str = "",
    score: float = 0.9,
    track_id: int | None = None,
    audio_tags: tuple[str, ...] = (),
    source: str = "test",
    confidence: float = 0.9,
) -> ModalityEvent:
    box = box or Box(0, 0, 10, 10)
    if modality is Modality.CAPTION:
        payload = CaptionPayload(text=text)
    elif modality is Modality.DENSE_CAPTION:
        payload = DenseCaptionPayload(text=text, box=box)
    elif modality is Modality.OCR:
        payload = OcrPayload(text=text, box=box, lang=lang)
    elif modality is Modality.ASR:
        payload = AsrPayload(text=text, audio_tags=audio_tags)
    elif modality is Modality.TAG:
        payload = TagPayload(label=label)
    else:
        payload = DetectionPayload(label=label, box=box, score=score,
                                   track_id=track_id)
    return ModalityEvent(
        id=event_id,
        modality=modality,
        span=TimeSpan(start, end),
        payload=payload,
        source=source,
        confidence=confidence,
    )
