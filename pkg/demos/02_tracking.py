"""Track two objects through spawn, confirmation, dropout, and recovery.

The dog detection disappears for two frames mid-scene; with the default
patience the track goes LOST and resumes under the same identity.
"""

from fuseline import Box, Detection, ObjectTracker, TrackerConfig

tracker = ObjectTracker(TrackerConfig(patience=3, min_hits=2))

for frame in range(12):
    detections = [
        Detection("person", Box(100 + 3 * frame, 50, 40, 90), 0.9),
    ]
    if frame not in (5, 6):  # the dog detector blinks for two frames
        detections.append(Detection("dog", Box(300 - 4 * frame, 200, 60, 40), 0.8))
    tracker.step(frame, detections)

    statuses = ", ".join(
        f"#{t.track_id} {t.class_label}:{t.status.value}"
        for t in tracker.tracks()
    )
    print(f"frame {frame:2d}  {statuses}")

print()
for track in tracker.tracks():
    frames = [s.frame_index for s in track.active_states()]
    print(f"track #{track.track_id} ({track.class_label}): "
          f"{len(frames)} active states, frames {frames[0]}..{frames[-1]}"
          f" (gap preserved: {sorted(set(range(frames[0], frames[-1] + 1)) - set(frames))})")
