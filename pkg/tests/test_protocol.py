from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuseline.events import Box, Modality, VideoMeta
from fuseline.protocol import (
    DEFAULT_SAMPLE_FPS,
    DUPLICATE_ID,
    MALFORMED_RECORD,
    MISSING_FIELD,
    NonpositiveRateError,
    ProtocolError,
    UNKNOWN_MODALITY,
    ingest_stream,
    parse_event_line,
    sample_frame_grid,
    serialize_event_line,
)

from conftest import make_event
from oracles import grid_enumerate

CAPTION_LINE = (
    '{"id":"e1","modality":"CAPTION","span":[0.0,0.5],'
    '"payload":{"text":"a man cooking"},"source":"blip2","confidence":0.9}'
)


class TestParseEventLine:
    def test_caption_example(self):
        event = parse_event_line(CAPTION_LINE)
        assert event.modality is Modality.CAPTION
        assert event.payload.text == "a man cooking"
        assert event.span.start == 0.0 and event.span.end == 0.5
        assert event.source == "blip2"
        assert event.confidence == 0.9

    def test_unknown_modality(self):
        line = CAPTION_LINE.replace("CAPTION", "SMELL")
        with pytest.raises(ProtocolError) as exc:
            parse_event_line(line)
        assert exc.value.code == UNKNOWN_MODALITY

    def test_truncated_line(self):
        with pytest.raises(ProtocolError) as exc:
            parse_event_line('{"id":"e3"')
        assert exc.value.code == MALFORMED_RECORD

    def test_missing_field_names_the_field(self):
        record = json.loads(CAPTION_LINE)
        del record["span"]
        with pytest.raises(ProtocolError) as exc:
            parse_event_line(json.dumps(record))
        assert exc.value.code == MISSING_FIELD
        assert exc.value.detail == "span"

    def test_missing_payload_field(self):
        record = json.loads(CAPTION_LINE)
        record["payload"] = {}
        with pytest.raises(ProtocolError) as exc:
            parse_event_line(json.dumps(record))
        assert exc.value.code == MISSING_FIELD
        assert exc.value.detail == "payload.text"

    def test_unknown_fields_ignored(self):
        record = json.loads(CAPTION_LINE)
        record["extra"] = {"anything": 1}
        record["payload"]["bonus"] = True
        event = parse_event_line(json.dumps(record))
        assert event == parse_event_line(CAPTION_LINE)

    def test_non_object_record(self):
        with pytest.raises(ProtocolError) as exc:
            parse_event_line('[1, 2, 3]')
        assert exc.value.code == MALFORMED_RECORD

    def test_bad_span_shape(self):
        record = json.loads(CAPTION_LINE)
        record["span"] = [0.0]
        with pytest.raises(ProtocolError) as exc:
            parse_event_line(json.dumps(record))
        assert exc.value.code == MALFORMED_RECORD

    def test_detection_with_track_id(self):
        line = (
            '{"id":"d1","modality":"DETECTION","span":[0.1,0.1],'
            '"payload":{"label":"dog","box":[1,2,3,4],"score":0.8,'
            '"track_id":7},"source":"det","confidence":1.0}'
        )
        event = parse_event_line(line)
        assert event.payload.track_id == 7
        assert event.payload.box == Box(1, 2, 3, 4)


EVENTS = st.builds(
    make_event,
    event_id=st.text(
        alphabet=st.characters(min_codepoint=33, max_codepoint=126),
        min_size=1, max_size=8,
    ),
    modality=st.sampled_from(list(Modality)),
    start=st.floats(0, 5, allow_nan=False).map(lambda v: round(v, 3)),
    end=st.just(0.0),
    text=st.text(max_size=20),
    label=st.text(min_size=1, max_size=10).filter(lambda s: s.strip()),
    score=st.floats(0, 1, allow_nan=False),
    audio_tags=st.lists(
        st.text(min_size=1, max_size=6).filter(lambda s: s.strip()),
        max_size=3,
    ).map(tuple),
    confidence=st.floats(0, 1, allow_nan=False),
).map(
    lambda e: type(e)(
        id=e.id, modality=e.modality,
        span=type(e.span)(e.span.start, e.span.start + 0.5),
        payload=e.payload, source=e.source, confidence=e.confidence,
    )
)


class TestRoundTrip:
    @given(EVENTS)
    @settings(max_examples=200)
    def test_parse_serialize_parse_identity(self, event):
        line = serialize_event_line(event)
        assert parse_event_line(line) == event
        assert serialize_event_line(parse_event_line(line)) == line


class TestIngestStream:
    def test_three_valid_lines(self, meta):
        lines = [
            serialize_event_line(make_event(f"e{i}", Modality.CAPTION, i, i + 0.5,
                                            text=f"t{i}"))
            for i in range(3)
        ]
        result = ingest_stream(lines, meta)
        assert len(result.stream.events) == 3
        assert result.rejections == ()
        assert result.stream.sealed

    def test_malformed_line_rejected_not_fatal(self, meta):
        lines = [
            serialize_event_line(make_event("e1", Modality.CAPTION, 0, 1, text="a")),
            '{"id":"broken"',
            serialize_event_line(make_event("e2", Modality.CAPTION, 1, 2, text="b")),
        ]
        result = ingest_stream(lines, meta)
        assert len(result.stream.events) == 2
        assert len(result.rejections) == 1
        assert result.rejections[0].line_no == 2
        assert result.rejections[0].code == MALFORMED_RECORD

    def test_blank_lines_skipped(self, meta):
        lines = ["", "   ", serialize_event_line(
            make_event("e1", Modality.CAPTION, 0, 1, text="a")), "\t"]
        result = ingest_stream(lines, meta)
        assert len(result.stream.events) == 1
        assert result.rejections == ()

    def test_duplicate_ids_keep_first(self, meta):
        first = make_event("e1", Modality.CAPTION, 0, 1, text="first")
        second = make_event("e1", Modality.CAPTION, 2, 3, text="second")
        result = ingest_stream(
            [serialize_event_line(first), serialize_event_line(second)], meta
        )
        assert len(result.stream.events) == 1
        assert result.stream.events[0].payload.text == "first"
        assert [r.code for r in result.rejections] == [DUPLICATE_ID]

    def test_invalid_event_rejected_with_violation_code(self, meta):
        event = make_event("e1", Modality.ASR, 9.0, 12.0, text="late")
        result = ingest_stream([serialize_event_line(event)], meta)
        assert len(result.stream.events) == 0
        assert result.rejections[0].code == "SPAN_OUT_OF_RANGE"

    def test_empty_stream_is_legal(self, meta):
        result = ingest_stream([], meta)
        assert result.stream.events == ()
        assert result.rejections == ()

    def test_sealed_order_matches_reference_sort(self, meta):
        rng = random.Random(42)
        events = []
        for i in range(10_000):
            modality = rng.choice(list(Modality))
            start = round(rng.uniform(0, 9), 3)
            events.append(
                make_event(
                    f"e{i:05d}", modality, start, min(start + 0.2, 10.0),
                    text="x", label="dog", score=0.5,
                )
            )
        lines = [serialize_event_line(e) for e in events]
        rng.shuffle(lines)
        result = ingest_stream(lines, meta)
        assert len(result.stream.events) == 10_000

        from fuseline.events import MODALITY_ORDER

        reference = sorted(
            result.stream.events,
            key=lambda e: (e.span.start, MODALITY_ORDER[e.modality], e.id),
        )
        assert list(result.stream.events) == reference

    @given(st.permutations(list(range(6))))
    @settings(max_examples=30)
    def test_permutation_insensitive(self, order):
        meta = VideoMeta(duration=10.0, fps=20.0, width=1280, height=720)
        events = [
            make_event(f"e{i}", list(Modality)[i], 1.0, 1.5, text="x",
                       label="dog", score=0.5)
            for i in range(6)
        ]
        lines = [serialize_event_line(e) for e in events]
        baseline = ingest_stream(lines, meta).stream
        shuffled = ingest_stream([lines[i] for i in order], meta).stream
        assert shuffled == baseline

    def test_count_conservation_with_mixed_garbage(self, meta):
        rng = random.Random(7)
        lines = []
        nonempty = 0
        for i in range(500):
            roll = rng.random()
            if roll < 0.2:
                lines.append("   " if rng.random() < 0.5 else "")
            elif roll < 0.5:
                lines.append(rng.choice(['{"bad"', "garbage", "[1,2]", "{}"]))
                nonempty += 1
            else:
                lines.append(
                    serialize_event_line(
                        make_event(f"e{i}", Modality.TAG, 0, 1, label="dog")
                    )
                )
                nonempty += 1
        result = ingest_stream(lines, meta)
        assert len(result.stream.events) + len(result.rejections) == nonempty


class TestSampleFrameGrid:
    def test_default_rate_one_second(self, meta):
        grid = sample_frame_grid(VideoMeta(1.0, 30.0, 100, 100))
        assert len(grid.timestamps) == 20
        assert grid.timestamps[0] == 0.0
        assert grid.timestamps[1] == 0.05
        assert grid.timestamps[-1] == 0.95
        assert grid.interval == 1 / DEFAULT_SAMPLE_FPS

    def test_zero_duration(self):
        grid = sample_frame_grid(VideoMeta(0.0, 20.0, 100, 100))
        assert grid.timestamps == ()

    def test_half_second_at_4fps(self):
        grid = sample_frame_grid(VideoMeta(0.5, 20.0, 100, 100), 4)
        assert grid.timestamps == (0.0, 0.25)

    def test_nonpositive_rate(self):
        with pytest.raises(NonpositiveRateError):
            sample_frame_grid(VideoMeta(1.0, 20.0, 100, 100), 0)
        with pytest.raises(NonpositiveRateError):
            sample_frame_grid(VideoMeta(1.0, 20.0, 100, 100), -5)

    @given(
        st.floats(0, 20, allow_nan=False),
        st.floats(0.5, 60, allow_nan=False),
    )
    @settings(max_examples=200)
    def test_matches_enumeration_oracle(self, duration, rate):
        grid = sample_frame_grid(VideoMeta(duration, 30.0, 100, 100), rate)
        assert list(grid.timestamps) == grid_enumerate(duration, rate)

    @given(st.integers(1, 400), st.integers(1, 60))
    def test_length_formula_on_exact_grids(self, n_frames, rate):
        duration = n_frames / rate
        grid = sample_frame_grid(VideoMeta(duration, 30.0, 100, 100), rate)
        product = duration * rate
        expected = n_frames if product == int(product) else None
        if expected is not None:
            assert len(grid.timestamps) == expected
