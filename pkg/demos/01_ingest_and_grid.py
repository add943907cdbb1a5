"""Ingest a small wire-protocol stream and sample the frame grid.

Shows the line format, how bad lines turn into rejections instead of
crashes, and how the frame sampling grid is derived from the metadata.
"""

from fuseline import VideoMeta, ingest_stream, sample_frame_grid

LINES = """\
{"id":"e1","modality":"CAPTION","span":[0.0,0.5],"payload":{"text":"a man cooking"},"source":"captioner","confidence":0.9}
{"id":"e2","modality":"TAG","span":[0.0,1.0],"payload":{"label":"Person"},"source":"tagger","confidence":0.95}
{"id":"e3","modality":"SMELL","span":[0.0,0.1],"payload":{},"source":"nose","confidence":0.5}
{"id":"e4","modality":"ASR","span":[0.2,0.9],"payload":{"text":"let us cook","audio_tags":["speech"]},"source":"speech","confidence":0.8}
{"id":"e4","modality":"ASR","span":[0.2,0.9],"payload":{"text":"duplicate id","audio_tags":[]},"source":"speech","confidence":0.8}
this line is not json
""".splitlines()

meta = VideoMeta(duration=1.0, fps=20.0, width=640, height=360)
result = ingest_stream(LINES, meta)

print(f"accepted {len(result.stream.events)} events:")
for event in result.stream.events:
    print(f"  {event.id}  {event.modality.value:<8}"
          f" [{event.span.start:.2f},{event.span.end:.2f}]")

print(f"\nrejected {len(result.rejections)} lines:")
for rejection in result.rejections:
    print(f"  line {rejection.line_no}: {rejection.code} ({rejection.detail})")

grid = sample_frame_grid(meta)  # default 20 fps sampling
print(f"\nframe grid at default rate: {len(grid.timestamps)} frames,"
      f" interval {grid.interval:.3f}s")
print(f"  first 5 timestamps: {grid.timestamps[:5]}")
