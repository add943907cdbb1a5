"""One-off generator for the frozen seed-0 fixture stream.

Ran once to produce seed0.events; the output was hand-audited and frozen.
Kept only so the scenario stays reconstructible when the wire format
changes on purpose. Regenerating silently defeats the golden tests.
"""

from __future__ import annotations

import json
from pathlib import Path


def line(eid, modality, span, payload, source, confidence):
    return json.dumps(
        {
            "id": eid,
            "modality": modality,
            "span": [float(span[0]), float(span[1])],
            "payload": payload,
            "source": source,
            "confidence": confidence,
        },
        ensure_ascii=False,
        separators=(",", ":"),
    )


def main() -> None:
    lines = []

    captions = [
        ("e010", (0.0, 0.5), "a man standing at a stove", 0.92),
        ("e011", (0.0, 0.5), "a man standing at a stove", 0.9),
        ("e012", (0.5, 1.0), "a man cooking a meal", 0.91),
        ("e013", (1.0, 1.6), "a persn stirring a pot", 0.88),
        ("e014", (1.4, 2.0), "a cot sleeping on the floor", 0.9),
        ("e015", (1.0, 1.5), "a dgo running by", 0.85),
    ]
    for eid, span, text, conf in captions:
        lines.append(line(eid, "CAPTION", span, {"text": text}, "captioner", conf))

    dense = [
        ("e020", (0.2, 0.2), "a man wearing a blue apron",
         [100.0, 80.0, 120.0, 160.0], 0.9),
        ("e021", (1.2, 1.2), "a red pot on the stove",
         [300.0, 120.0, 80.0, 60.0], 0.85),
    ]
    for eid, span, text, box, conf in dense:
        lines.append(
            line(eid, "DENSE_CAPTION", span, {"text": text, "box": box},
                 "regioncap", conf)
        )

    ocr = [
        ("e030", (0.3, 0.7), "FRESH PASTA EVERY DAY",
         [20.0, 20.0, 200.0, 40.0], "en", 0.8),
        ("e031", (1.1, 1.5), "now add the egs",
         [400.0, 300.0, 180.0, 30.0], "en", 0.7),
        ("e032", (0.8, 1.2), "新鲜面条", [500.0, 40.0, 100.0, 50.0], "zh", 0.9),
    ]
    for eid, span, text, box, lang, conf in ocr:
        lines.append(
            line(eid, "OCR", span, {"text": text, "box": box, "lang": lang},
                 "textreader", conf)
        )

    asr = [
        ("e040", (0.0, 0.9), "today we are making fresh pasta", ["speech"], 0.95),
        ("e041", (1.1, 1.5), "now add the eggs", ["speech"], 0.9),
        ("e042", (1.0, 1.4), "", ["animal"], 0.6),
    ]
    for eid, span, text, tags, conf in asr:
        lines.append(
            line(eid, "ASR", span, {"text": text, "audio_tags": tags},
                 "speech", conf)
        )

    tags = [
        ("e050", (0.0, 2.0), "person", 0.95),
        ("e051", (0.0, 1.0), "stove", 0.8),
        ("e052", (0.0, 1.0), "cooking", 0.9),
        ("e053", (1.0, 2.0), "dog", 0.85),
        ("e054", (1.0, 2.0), "cat", 0.9),
        ("e055", (0.0, 1.0), "pasta", 0.7),
        ("e056", (0.0, 1.0), "kitchen", 0.8),
    ]
    for eid, span, label, conf in tags:
        lines.append(line(eid, "TAG", span, {"label": label}, "tagger", conf))

    def detection(eid, t, label, box, score):
        return line(
            eid, "DETECTION", (t, t),
            {"label": label, "box": [float(v) for v in box], "score": score},
            "detector", 1.0,
        )

    # person: constant velocity, frames 0..19
    for k in range(20):
        lines.append(
            detection(f"e1{k:02d}", k / 10, "person",
                      (200 + 3 * k, 100, 80, 200), 0.9)
        )
    # dog: enters at frame 10; scores drop below the suppression
    # threshold from frame 12 but the dog tag keeps the states visible
    for k in range(10, 20):
        score = 0.9 if k < 12 else 0.45
        lines.append(
            detection(f"e13{k - 10}", k / 10, "dog",
                      (400 - 4 * (k - 10), 250, 60, 40), score)
        )
    # bird: brief spurious appearance, no supporting tag; trailing
    # low-score states get suppressed
    for i, (k, score) in enumerate([(14, 0.65), (15, 0.65), (16, 0.4), (17, 0.4)]):
        lines.append(
            detection(f"e15{i}", k / 10, "bird", (500, 50, 30, 30), score)
        )

    out = Path(__file__).parent / "seed0.events"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} lines to {out}")


if __name__ == "__main__":
    main()
