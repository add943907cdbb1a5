from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuseline.events import Box, Modality, TimeSpan, TrackStatus, VideoMeta
from fuseline.protocol import EventStream, FrameGrid, sample_frame_grid
from fuseline.tracker import (
    Detection,
    FrameOrderError,
    ObjectTracker,
    TrackerConfig,
    associate_frame,
    iou,
    track_stream,
    tracks_to_events,
)

from conftest import make_event
from oracles import greedy_reference, iou_rasterized

BOXES = st.builds(
    Box,
    x=st.integers(0, 50).map(float),
    y=st.integers(0, 50).map(float),
    w=st.integers(0, 30).map(float),
    h=st.integers(0, 30).map(float),
)


class TestIou:
    def test_identical_box(self):
        assert iou(Box(0, 0, 10, 10), Box(0, 0, 10, 10)) == 1.0

    def test_disjoint(self):
        assert iou(Box(0, 0, 10, 10), Box(20, 20, 5, 5)) == 0.0

    def test_quarter_offset_matches_rasterization(self):
        a, b = Box(0, 0, 10, 10), Box(5, 5, 10, 10)
        analytic = iou(a, b)
        assert abs(analytic - 1 / 7) < 1e-9
        assert abs(analytic - iou_rasterized(a, b)) < 1e-9

    def test_zero_area_union(self):
        assert iou(Box(0, 0, 0, 0), Box(0, 0, 0, 0)) == 0.0

    @given(BOXES, BOXES)
    @settings(max_examples=300)
    def test_symmetry_and_bounds(self, a, b):
        ab, ba = iou(a, b), iou(b, a)
        assert ab == ba
        assert 0.0 <= ab <= 1.0

    @given(BOXES)
    def test_self_iou(self, a):
        expected = 1.0 if a.area() > 0 else 0.0
        assert iou(a, a) == expected

    @given(BOXES, BOXES)
    @settings(max_examples=200)
    def test_matches_integer_rasterization(self, a, b):
        assert abs(iou(a, b) - iou_rasterized(a, b)) < 1e-9


def _track(track_id, label, box, status=TrackStatus.ACTIVE):
    from fuseline.events import Track, TrackObservation

    return Track(
        track_id=track_id,
        class_label=label,
        states=(TrackObservation(frame_index=0, box=box, score=0.9, active=True),),
        status=status,
    )


class TestAssociateFrame:
    def test_perfect_overlap_high_score(self):
        tracks = [_track(1, "dog", Box(0, 0, 10, 10))]
        dets = [Detection("dog", Box(0, 0, 10, 10), 0.9)]
        assoc = associate_frame(tracks, dets)
        assert assoc.matches == ((1, 0),)
        assert assoc.unmatched_track_ids == ()
        assert assoc.unmatched_detections == ()

    def test_below_iou_gate(self):
        tracks = [_track(1, "dog", Box(0, 0, 10, 10))]
        dets = [Detection("dog", Box(9, 9, 10, 10), 0.9)]
        cfg = TrackerConfig(iou_match=0.3)
        assoc = associate_frame(tracks, dets, cfg)
        assert assoc.matches == ()
        assert assoc.unmatched_track_ids == (1,)
        assert assoc.unmatched_detections == (0,)

    def test_class_labels_must_match(self):
        tracks = [_track(1, "car", Box(0, 0, 10, 10))]
        dets = [Detection("dog", Box(0, 0, 10, 10), 0.9)]
        assoc = associate_frame(tracks, dets)
        assert assoc.matches == ()

    def test_low_score_detection_used_in_stage_two(self):
        tracks = [_track(1, "dog", Box(0, 0, 10, 10))]
        dets = [Detection("dog", Box(1, 1, 10, 10), 0.3)]
        assoc = associate_frame(tracks, dets)
        assert assoc.matches == ((1, 0),)

    def test_stage_one_priority_over_stage_two(self):
        # High-score detection wins the track even though the low-score
        # detection overlaps more.
        tracks = [_track(1, "dog", Box(0, 0, 10, 10))]
        dets = [
            Detection("dog", Box(0, 0, 10, 10), 0.3),
            Detection("dog", Box(2, 2, 10, 10), 0.9),
        ]
        assoc = associate_frame(tracks, dets)
        assert assoc.matches == ((1, 1),)
        assert assoc.unmatched_detections == (0,)

    def test_partial_matching_no_double_assignment(self):
        tracks = [
            _track(1, "dog", Box(0, 0, 10, 10)),
            _track(2, "dog", Box(3, 0, 10, 10)),
        ]
        dets = [Detection("dog", Box(1, 0, 10, 10), 0.9)]
        assoc = associate_frame(tracks, dets)
        assert len(assoc.matches) == 1
        matched_tracks = [m[0] for m in assoc.matches]
        assert len(set(matched_tracks)) == len(matched_tracks)

    def test_matches_brute_force_oracle_on_random_instances(self):
        rng = random.Random(2024)
        cfg = TrackerConfig()
        labels = ["dog", "cat", "person"]
        for _ in range(300):
            n_tracks = rng.randint(0, 4)
            n_dets = rng.randint(0, 5)
            track_boxes = [
                (rng.randint(0, 40), rng.randint(0, 40),
                 rng.randint(5, 25), rng.randint(5, 25))
                for _ in range(n_tracks)
            ]
            track_labels = [rng.choice(labels) for _ in range(n_tracks)]
            det_boxes = [
                (rng.randint(0, 40), rng.randint(0, 40),
                 rng.randint(5, 25), rng.randint(5, 25))
                for _ in range(n_dets)
            ]
            det_labels = [rng.choice(labels) for _ in range(n_dets)]
            det_scores = [round(rng.random(), 3) for _ in range(n_dets)]

            tracks = [
                _track(i + 1, track_labels[i], Box(*track_boxes[i]))
                for i in range(n_tracks)
            ]
            dets = [
                Detection(det_labels[i], Box(*det_boxes[i]), det_scores[i])
                for i in range(n_dets)
            ]
            assoc = associate_frame(tracks, dets, cfg)
            expected = greedy_reference(
                track_boxes, [t.track_id for t in tracks], det_boxes,
                det_scores, det_labels, track_labels, cfg,
            )
            assert (
                sorted(assoc.matches),
                list(assoc.unmatched_track_ids),
                list(assoc.unmatched_detections),
            ) == expected


def _constant_detections(box, frames, score=0.9, label="dog", dx=0.0, dy=0.0):
    out = {}
    for f in frames:
        moved = Box(box.x + dx * f, box.y + dy * f, box.w, box.h)
        out.setdefault(f, []).append(Detection(label, moved, score))
    return out


def _run(frames_dets, n_frames, cfg=TrackerConfig()):
    tracker = ObjectTracker(cfg)
    for f in range(n_frames):
        tracker.step(f, frames_dets.get(f, []))
    return tracker.tracks()


class TestLifecycle:
    def test_single_object_five_frames(self):
        # Hand-simulated: spawn at frame 0 (tentative), confirmed at frame 1
        # with min_hits=2, five states total, active states from frame 1.
        tracks = _run(_constant_detections(Box(0, 0, 10, 10), range(5)), 5)
        assert len(tracks) == 1
        track = tracks[0]
        assert track.status is TrackStatus.ACTIVE
        assert len(track.states) == 5
        assert [s.active for s in track.states] == [False, True, True, True, True]
        assert [s.frame_index for s in track.states] == list(range(5))

    def test_dropout_and_resume_within_patience(self):
        frames = _constant_detections(Box(0, 0, 10, 10), [0, 1, 2, 5, 6])
        tracks = _run(frames, 7, TrackerConfig(patience=3))
        assert len(tracks) == 1
        track = tracks[0]
        assert track.status is TrackStatus.ACTIVE
        assert [s.frame_index for s in track.states] == [0, 1, 2, 5, 6]

    def test_removed_after_patience_exceeded(self):
        frames = _constant_detections(Box(0, 0, 10, 10), [0, 1, 2])
        tracks = _run(frames, 8, TrackerConfig(patience=3))
        assert len(tracks) == 1
        assert tracks[0].status is TrackStatus.REMOVED

    def test_reappearance_after_removal_spawns_new_id(self):
        frames = _constant_detections(Box(0, 0, 10, 10), [0, 1, 8, 9])
        tracks = _run(frames, 10, TrackerConfig(patience=2))
        assert [t.track_id for t in tracks] == [1, 2]

    def test_tentative_unmatched_once_removed(self):
        frames = _constant_detections(Box(0, 0, 10, 10), [0])
        tracks = _run(frames, 3)
        assert len(tracks) == 1
        assert tracks[0].status is TrackStatus.REMOVED
        assert tracks[0].active_states() == ()

    def test_no_detections_no_tracks(self):
        assert _run({}, 10) == ()

    def test_low_score_never_spawns(self):
        frames = _constant_detections(Box(0, 0, 10, 10), range(5), score=0.3)
        assert _run(frames, 5) == ()

    def test_frame_order_violation(self):
        tracker = ObjectTracker()
        tracker.step(0, [])
        with pytest.raises(FrameOrderError):
            tracker.step(0, [])

    def test_three_constant_velocity_objects_no_switches(self):
        frames = {}
        specs = [
            (Box(0, 0, 40, 40), 2.0, 0.0, "dog"),
            (Box(200, 0, 40, 40), -2.0, 0.0, "person"),
            (Box(0, 200, 40, 40), 0.0, 2.0, "cat"),
        ]
        for f in range(100):
            frames[f] = [
                Detection(label, Box(b.x + vx * f, b.y + vy * f, b.w, b.h), 0.9)
                for b, vx, vy, label in specs
            ]
        tracks = _run(frames, 100)
        assert len(tracks) == 3
        # 0 identity switches: each object keeps one id for all 100 frames.
        for track in tracks:
            assert len(track.states) == 100
            assert track.status is TrackStatus.ACTIVE

    def test_determinism_across_runs(self):
        rng = random.Random(99)
        frames = {}
        for f in range(50):
            frames[f] = [
                Detection(
                    "dog",
                    Box(rng.randint(0, 50), rng.randint(0, 50), 20, 20),
                    round(rng.random(), 3),
                )
                for _ in range(rng.randint(0, 4))
            ]
        assert _run(frames, 50) == _run(frames, 50)


class TestTracksToEvents:
    def _grid(self, duration=1.0, rate=10.0):
        return sample_frame_grid(VideoMeta(duration, 30.0, 100, 100), rate)

    def test_five_active_states_five_events(self):
        frames = _constant_detections(Box(0, 0, 10, 10), range(6))
        tracks = _run(frames, 6)
        events = tracks_to_events(tracks, self._grid())
        # frame 0 is tentative, frames 1..5 are active
        assert len(events) == 5
        assert {e.payload.track_id for e in events} == {1}
        assert all(e.span.is_instant() for e in events)
        assert [e.span.start for e in events] == [0.1, 0.2, 0.3, 0.4, 0.5]

    def test_tentative_removed_yields_no_events(self):
        frames = _constant_detections(Box(0, 0, 10, 10), [0])
        tracks = _run(frames, 2)
        assert tracks_to_events(tracks, self._grid()) == []

    def test_two_tracks_distinct_ids(self):
        frames = {}
        for f in range(4):
            frames[f] = [
                Detection("dog", Box(0, 0, 10, 10), 0.9),
                Detection("cat", Box(50, 50, 10, 10), 0.9),
            ]
        tracks = _run(frames, 4)
        events = tracks_to_events(tracks, self._grid())
        assert {e.payload.track_id for e in events} == {1, 2}

    def test_source_event_ids_are_reused(self, meta):
        stream_events = []
        for f in range(4):
            stream_events.append(
                make_event(
                    f"det{f}", Modality.DETECTION, f * 0.1, f * 0.1,
                    label="dog", box=Box(0, 0, 10, 10), score=0.9,
                )
            )
        stream = EventStream(meta, tuple(stream_events))
        grid = self._grid(duration=1.0, rate=10.0)
        tracks = track_stream(stream, grid)
        events = tracks_to_events(tracks, grid)
        assert [e.id for e in events] == ["det1", "det2", "det3"]
