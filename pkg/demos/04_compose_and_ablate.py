"""Full pipeline on the committed seed-0 fixture, plus an ablation sweep.

Equivalent to `fuseline compose` / `fuseline ablate` but through the
library API, printing the narrative document and the per-modality line
contributions.
"""

from dataclasses import replace
from pathlib import Path

from fuseline import AblationFlags, render_text
from fuseline.cli import run_pipeline
from fuseline.config import load_config

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"

cfg = load_config(GOLDEN / "golden.config.json")
full = run_pipeline(cfg)

print(render_text(full.document))

print("ablation sweep (lines whose provenance mentions the modality):")
full_lines = {
    (line.kind.value, line.provenance)
    for block in full.document.blocks
    for line in block.lines
}
for name in ("asr", "ocr", "tags", "captions"):
    ablated = run_pipeline(cfg, replace(AblationFlags(), **{name: False}))
    ablated_lines = {
        (line.kind.value, line.provenance)
        for block in ablated.document.blocks
        for line in block.lines
    }
    print(f"  without {name:<8} -{len(full_lines - ablated_lines)} lines")
