"""Command-line entry point: validate, compose, ablate, stats, extract.

Wires ingest -> track -> align -> ablate -> dedupe -> enhance -> compose.
Every command is deterministic given its inputs. Exit codes: 0 success,
1 input rejections, 2 config or input errors, 3 pipeline errors (the
failing stage is named). Verbs and flags are documented in docs/cli.md.
"""

from __future__ import annotations

import argparse
import subprocess
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from .compose import (
    AblationFlags,
    ComposedDocument,
    apply_ablation,
    compose,
    export_structured,
    line_keys,
    render_text,
)
from .config import ConfigError, RunConfig, load_config
from .enhance import EnhanceReport, enhance
from .events import Modality, TagVocabulary, VideoMeta, sort_key
from .protocol import (
    EventStream,
    IngestResult,
    ingest_stream,
    sample_frame_grid,
)
from .timeline import Timeline, build_timeline, dedupe_timeline
from .tracker import track_stream, tracks_to_events


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"pipeline error at stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineResult:
    ingest: IngestResult
    timeline: Timeline
    report: EnhanceReport
    document: ComposedDocument
    text: str
    export: str


def _read_stream_lines(paths: Sequence[Path]) -> list[str]:
    lines: list[str] = []
    for path in paths:
        lines.extend(
            path.read_text(encoding="utf-8", errors="replace").splitlines()
        )
    return lines


def _build_vocabulary(cfg: RunConfig, timeline: Timeline, track_labels) -> TagVocabulary:
    if cfg.vocab is not None:
        vocab = TagVocabulary.from_lines(
            cfg.vocab.read_text(encoding="utf-8").splitlines()
        )
    else:
        vocab = TagVocabulary()
    observed = [
        timeline.events[eid].payload.label
        for segment in timeline.segments
        for eid in segment.event_ids
        if timeline.events[eid].modality is Modality.TAG
    ]
    return vocab.extended(observed).extended(track_labels)


def run_pipeline(
    cfg: RunConfig, flags: Optional[AblationFlags] = None
) -> PipelineResult:
    """Run the full composition pipeline under the given ablation flags."""
    flags = cfg.flags if flags is None else flags
    stage = "ingest"
    try:
        result = ingest_stream(_read_stream_lines(cfg.streams), cfg.meta)

        stage = "grid"
        grid = sample_frame_grid(cfg.meta, cfg.sample_fps)

        stage = "track"
        tracks = track_stream(result.stream, grid, cfg.tracker)
        track_events = tracks_to_events(tracks, grid)
        merged = tuple(
            sorted(
                [
                    e
                    for e in result.stream.events
                    if e.modality is not Modality.DETECTION
                ]
                + track_events,
                key=sort_key,
            )
        )
        stream = EventStream(cfg.meta, merged)

        stage = "align"
        timeline = build_timeline(stream, grid)

        stage = "ablate"
        timeline = apply_ablation(timeline, flags)

        stage = "dedupe"
        if cfg.dedupe_sim is not None:
            timeline = dedupe_timeline(timeline, cfg.dedupe_sim)

        stage = "enhance"
        track_labels = [
            t.class_label for t in tracks if any(s.active for s in t.states)
        ]
        vocabulary = _build_vocabulary(cfg, timeline, track_labels)
        timeline, report = enhance(timeline, vocabulary, cfg.enhance)

        stage = "compose"
        document = compose(timeline, flags, cfg.group_n)

        stage = "render"
        text = render_text(document)
        export = export_structured(document)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    return PipelineResult(
        ingest=result,
        timeline=timeline,
        report=report,
        document=document,
        text=text,
        export=export,
    )


def _meta_from_args(args) -> Optional[VideoMeta]:
    if args.duration is None:
        return None
    return VideoMeta(
        duration=args.duration,
        fps=args.fps,
        width=args.width,
        height=args.height,
    )


def cmd_validate(args) -> int:
    try:
        if args.stream == "-":
            lines = sys.stdin.read().splitlines()
        else:
            lines = _read_stream_lines([Path(args.stream)])
    except OSError as exc:
        print(f"cannot read {args.stream}: {exc}", file=sys.stderr)
        return 2
    result = ingest_stream(lines, _meta_from_args(args))
    for rejection in result.rejections:
        print(f"line {rejection.line_no}: {rejection.code} {rejection.detail}")
    print(
        f"{len(result.stream.events)} events,"
        f" {len(result.rejections)} rejections"
    )
    return 0 if not result.rejections else 1


def _write_outputs(cfg: RunConfig, result: PipelineResult) -> None:
    report_text = "".join(line + "\n" for line in result.report.to_lines())
    cfg.out_document.write_text(result.text, encoding="utf-8")
    cfg.out_export.write_text(result.export, encoding="utf-8")
    cfg.out_report.write_text(report_text, encoding="utf-8")


def cmd_compose(args) -> int:
    try:
        cfg = load_config(args.config)
        missing = [
            key
            for key in ("out_document", "out_export", "out_report")
            if getattr(cfg, key) is None
        ]
        if missing:
            raise ConfigError(f"missing output paths: {', '.join(missing)}")
        if not cfg.streams:
            raise ConfigError("streams must list at least one input file")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_pipeline(cfg)
        _write_outputs(cfg, result)
    except PipelineError as exc:
        print(exc, file=sys.stderr)
        return 3
    print(
        f"composed {len(result.document.blocks)} blocks from"
        f" {len(result.timeline.events)} events"
        f" ({len(result.ingest.rejections)} rejected lines)"
    )
    return 0


ABLATABLE = ("asr", "ocr", "tags", "captions")


def cmd_ablate(args) -> int:
    try:
        cfg = load_config(args.config)
        if not cfg.streams:
            raise ConfigError("streams must list at least one input file")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    full_flags = replace(cfg.flags, asr=True, ocr=True, tags=True, captions=True)
    try:
        full = run_pipeline(cfg, full_flags)
        full_keys = line_keys(full.document)
        summary = [f"full: {sum(len(b.lines) for b in full.document.blocks)} lines"]
        for name in ABLATABLE:
            ablated = run_pipeline(cfg, replace(full_flags, **{name: False}))
            removed = len(full_keys - line_keys(ablated.document))
            summary.append(f"{name}: -{removed} lines")
    except PipelineError as exc:
        print(exc, file=sys.stderr)
        return 3

    text = "\n".join(summary) + "\n"
    if cfg.out_ablation is not None:
        cfg.out_ablation.write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


_HISTOGRAM_EDGES = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


def cmd_stats(args) -> int:
    try:
        lines = _read_stream_lines([Path(args.stream)])
    except OSError as exc:
        print(f"cannot read {args.stream}: {exc}", file=sys.stderr)
        return 2
    result = ingest_stream(lines, _meta_from_args(args))
    events = result.stream.events

    print(f"events: {len(events)}")
    for modality in Modality:
        count = sum(1 for e in events if e.modality is modality)
        print(f"  {modality.value.lower()}: {count}")
    print(f"rejected: {len(result.rejections)}")

    buckets = [0] * (len(_HISTOGRAM_EDGES) + 1)
    for event in events:
        length = event.span.length()
        for i, edge in enumerate(_HISTOGRAM_EDGES):
            if length <= edge:
                buckets[i] += 1
                break
        else:
            buckets[-1] += 1
    print("span seconds histogram:")
    low = 0.0
    for i, edge in enumerate(_HISTOGRAM_EDGES):
        print(f"  {low:g}-{edge:g}: {buckets[i]}")
        low = edge
    print(f"  >{_HISTOGRAM_EDGES[-1]:g}: {buckets[-1]}")

    tag_labels = {
        e.payload.label.strip().lower()
        for e in events
        if e.modality is Modality.TAG
    }
    if args.vocab is None or not tag_labels:
        print("vocabulary coverage: n/a")
    else:
        try:
            vocab = TagVocabulary.from_lines(
                Path(args.vocab).read_text(encoding="utf-8").splitlines()
            )
        except OSError as exc:
            print(f"cannot read {args.vocab}: {exc}", file=sys.stderr)
            return 2
        hits = sum(1 for label in tag_labels if label in vocab)
        pct = 100.0 * hits / len(tag_labels)
        print(f"vocabulary coverage: {hits}/{len(tag_labels)} ({pct:.1f}%)")
    return 0


def cmd_extract(args) -> int:
    try:
        cfg = load_config(args.config)
        if not cfg.sidecar_cmd:
            raise ConfigError("sidecar_cmd must name the extractor command")
        if cfg.out_stream is None:
            raise ConfigError("out_stream must name the captured stream path")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    cmd = list(cfg.sidecar_cmd)
    if cfg.seed is not None:
        cmd += ["--seed", str(cfg.seed)]
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True)
    except OSError as exc:
        print(f"cannot spawn sidecar: {exc}", file=sys.stderr)
        return 2
    if proc.returncode != 0:
        print(
            f"sidecar exited with {proc.returncode}: {proc.stderr.strip()}",
            file=sys.stderr,
        )
        return 2

    cfg.out_stream.write_text(proc.stdout, encoding="utf-8")
    result = ingest_stream(proc.stdout.splitlines(), cfg.meta)
    for rejection in result.rejections:
        print(f"line {rejection.line_no}: {rejection.code} {rejection.detail}")
    print(
        f"captured {len(result.stream.events)} events,"
        f" {len(result.rejections)} rejections -> {cfg.out_stream}"
    )
    return 0 if not result.rejections else 1


def _add_meta_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--duration", type=float, default=None,
                        help="bind validation to a video duration (seconds)")
    parser.add_argument("--fps", type=float, default=20.0)
    parser.add_argument("--width", type=int, default=1920)
    parser.add_argument("--height", type=int, default=1080)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuseline",
        description="Fuse multimodal video annotation streams into a "
        "sequential narrative document.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a stream file")
    p.add_argument("stream", help="stream file path, or - for stdin")
    _add_meta_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compose", help="run the full pipeline from a config")
    p.add_argument("config")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser(
        "ablate", help="compose full + each single-modality ablation"
    )
    p.add_argument("config")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("stats", help="per-modality counts and span histogram")
    p.add_argument("stream")
    p.add_argument("--vocab", default=None, help="vocabulary file for coverage")
    _add_meta_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("extract", help="spawn the extractor sidecar and ingest")
    p.add_argument("config")
    p.set_defaults(func=cmd_extract)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
