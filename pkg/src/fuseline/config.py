"""Run configuration: a single flat JSON file, explicit-only.

Every key is documented in docs/config.md; unknown keys are rejected so a
typo can never silently fall back to a default. Relative paths are
resolved against the config file's directory. Environment variables
override nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .compose import AblationFlags, DEFAULT_GROUP_N
from .enhance import ALL_PASSES, EnhanceConfig, EnhancePass
from .events import VideoMeta
from .protocol import DEFAULT_SAMPLE_FPS
from .tracker import TrackerConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    meta: VideoMeta
    streams: tuple[Path, ...]
    vocab: Optional[Path]
    sample_fps: float
    group_n: int
    dedupe_sim: Optional[float]
    tracker: TrackerConfig
    enhance: EnhanceConfig
    flags: AblationFlags
    out_document: Optional[Path]
    out_export: Optional[Path]
    out_report: Optional[Path]
    out_ablation: Optional[Path]
    seed: Optional[int]
    sidecar_cmd: tuple[str, ...] = ()
    out_stream: Optional[Path] = None


_KNOWN_KEYS = {
    "title", "source_uri", "duration", "fps", "width", "height",
    "streams", "vocab", "sample_fps", "group_n", "dedupe_sim",
    "tau_high", "tau_low", "iou_match", "patience", "min_hits",
    "ocr_asr_sim", "token_edit_max", "tag_conf_min", "det_suppress_conf",
    "passes", "asr", "ocr", "tags", "captions", "tracking",
    "out_document", "out_export", "out_report", "out_ablation",
    "seed", "sidecar_cmd", "out_stream",
}


def _number(raw: dict, key: str, default):
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    return float(value)


def _integer(raw: dict, key: str, default):
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer")
    return value


def _boolean(raw: dict, key: str, default: bool) -> bool:
    value = raw.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{key} must be a boolean")
    return value


def _string_list(raw: dict, key: str) -> list[str]:
    value = raw.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{key} must be a list of strings")
    return value


def _optional_path(raw: dict, key: str, base: Path) -> Optional[Path]:
    value = raw.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a path string")
    return (base / value).resolve()


def load_config(path: str | Path) -> RunConfig:
    """Load and fully validate a flat JSON config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a flat JSON object")

    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    base = path.parent

    title = raw.get("title")
    if title is not None and not isinstance(title, str):
        raise ConfigError("title must be a string or null")
    source_uri = raw.get("source_uri", "")
    if not isinstance(source_uri, str):
        raise ConfigError("source_uri must be a string")

    meta = VideoMeta(
        duration=_number(raw, "duration", 0.0),
        fps=_number(raw, "fps", DEFAULT_SAMPLE_FPS),
        width=_integer(raw, "width", 0),
        height=_integer(raw, "height", 0),
        title=title,
        source_uri=source_uri,
    )
    problems = meta.problems()

    sample_fps = _number(raw, "sample_fps", DEFAULT_SAMPLE_FPS)
    if sample_fps <= 0:
        problems.append("NONPOSITIVE_RATE: sample_fps must be > 0")

    group_n = _integer(raw, "group_n", DEFAULT_GROUP_N)
    if group_n <= 0:
        problems.append("group_n must be > 0")

    dedupe_sim: Optional[float]
    if raw.get("dedupe_sim") is None and "dedupe_sim" in raw:
        dedupe_sim = None
    else:
        dedupe_sim = _number(raw, "dedupe_sim", 0.9)
        if not (0 <= dedupe_sim <= 1):
            problems.append("dedupe_sim must be in [0, 1] or null")

    tracker = TrackerConfig(
        tau_high=_number(raw, "tau_high", 0.6),
        tau_low=_number(raw, "tau_low", 0.1),
        iou_match=_number(raw, "iou_match", 0.3),
        patience=_integer(raw, "patience", 3),
        min_hits=_integer(raw, "min_hits", 2),
    )
    problems.extend(tracker.problems())

    pass_names = raw.get("passes")
    if pass_names is None:
        enabled = ALL_PASSES
    else:
        if not isinstance(pass_names, list):
            raise ConfigError("passes must be a list of pass names")
        enabled_list = []
        for name in pass_names:
            try:
                enabled_list.append(EnhancePass(name))
            except ValueError:
                raise ConfigError(f"unknown enhancement pass {name!r}") from None
        enabled = frozenset(enabled_list)

    enhance_cfg = EnhanceConfig(
        ocr_asr_sim=_number(raw, "ocr_asr_sim", 0.8),
        token_edit_max=_integer(raw, "token_edit_max", 1),
        tag_conf_min=_number(raw, "tag_conf_min", 0.5),
        det_suppress_conf=_number(raw, "det_suppress_conf", 0.5),
        enabled_passes=enabled,
    )
    problems.extend(enhance_cfg.problems())

    flags = AblationFlags(
        asr=_boolean(raw, "asr", True),
        ocr=_boolean(raw, "ocr", True),
        tags=_boolean(raw, "tags", True),
        captions=_boolean(raw, "captions", True),
        tracking=_boolean(raw, "tracking", True),
    )

    seed = raw.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError("seed must be an integer or null")

    if problems:
        raise ConfigError("; ".join(problems))

    return RunConfig(
        meta=meta,
        streams=tuple((base / s).resolve() for s in _string_list(raw, "streams")),
        vocab=_optional_path(raw, "vocab", base),
        sample_fps=sample_fps,
        group_n=group_n,
        dedupe_sim=dedupe_sim,
        tracker=tracker,
        enhance=enhance_cfg,
        flags=flags,
        out_document=_optional_path(raw, "out_document", base),
        out_export=_optional_path(raw, "out_export", base),
        out_report=_optional_path(raw, "out_report", base),
        out_ablation=_optional_path(raw, "out_ablation", base),
        seed=seed,
        sidecar_cmd=tuple(_string_list(raw, "sidecar_cmd")),
        out_stream=_optional_path(raw, "out_stream", base),
    )
