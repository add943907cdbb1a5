"""The three cross-modal correction passes on a hand-built timeline.

OCR and speech that agree get merged, a misspelled caption token is
corrected by a tag vote, and an unsupported low-confidence detection is
suppressed, all recorded in a replayable report.
"""

from fuseline import (
    EventStream,
    Modality,
    TagVocabulary,
    VideoMeta,
    build_timeline,
    enhance,
    parse_event_line,
    replay_report,
    sample_frame_grid,
)
from fuseline.events import sort_key

LINES = [
    '{"id":"c1","modality":"CAPTION","span":[0.0,0.4],"payload":{"text":"a cot sleeping on a rug"},"source":"captioner","confidence":0.9}',
    '{"id":"o1","modality":"OCR","span":[0.1,0.5],"payload":{"text":"helo world","box":[10.0,10.0,100.0,30.0],"lang":"en"},"source":"textreader","confidence":0.7}',
    '{"id":"a1","modality":"ASR","span":[0.2,0.6],"payload":{"text":"hello world","audio_tags":["speech"]},"source":"speech","confidence":0.9}',
    '{"id":"t1","modality":"TAG","span":[0.0,1.0],"payload":{"label":"cat"},"source":"tagger","confidence":0.9}',
    '{"id":"d1","modality":"DETECTION","span":[0.3,0.3],"payload":{"label":"zebra","box":[50.0,50.0,40.0,40.0],"score":0.3},"source":"detector","confidence":1.0}',
]

meta = VideoMeta(duration=1.0, fps=10.0, width=640, height=360)
events = tuple(sorted((parse_event_line(l) for l in LINES), key=sort_key))
timeline = build_timeline(EventStream(meta, events), sample_frame_grid(meta, 10))

vocab = TagVocabulary.from_lines(["cat", "dog", "rug", "sleeping,activity"])
enhanced, report = enhance(timeline, vocab)

print("merges:")
for m in report.merges:
    print(f"  {m.ocr_id} absorbed into {m.asr_id}: {m.merged_text!r}")
print("corrections:")
for c in report.corrections:
    print(f"  {c.event_id}: {c.original!r} -> {c.replacement!r}")
print("suppressions:")
for s in report.suppressions:
    print(f"  {s.event_id}: {s.reason}")

print("\ncaption after enhancement:",
      repr(enhanced.events["c1"].payload.text))
print("ocr event hidden:", not enhanced.visible("o1"))
print("zebra detection hidden:", not enhanced.visible("d1"))

replayed = replay_report(timeline, report)
print("\nreplaying the report reproduces the output:", replayed == enhanced)
