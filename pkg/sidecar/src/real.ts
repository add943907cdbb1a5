/**
 * Real extraction mode: orchestrates configured extractor commands, one
 * per modality role, and merges their wire-protocol output. Model choices
 * are configuration, not code: any command that prints protocol lines for
 * a video can fill a role.
 *
 * Best effort by design: a failing command skips its modality with a
 * stderr note, and structurally broken lines are dropped, so the merged
 * stream is never corrupt. No determinism promise.
 */

import { spawnSync } from "node:child_process";
import { existsSync } from "node:fs";
import { looksLikeValidLine } from "./protocol.js";

export interface ModalityCommand {
  /** argv; occurrences of "{video}" are replaced by the video path */
  cmd: string[];
}

export interface RealConfig {
  modalities: Record<string, ModalityCommand>;
}

export interface RealRunResult {
  lines: string[];
  skipped: string[];
  dropped: number;
}

export function runRealExtraction(
  videoPath: string,
  config: RealConfig,
  warn: (message: string) => void = (m) => console.error(m),
): RealRunResult {
  if (!existsSync(videoPath)) {
    throw new Error(`video not readable: ${videoPath}`);
  }
  const lines: string[] = [];
  const skipped: string[] = [];
  let dropped = 0;

  for (const [role, spec] of Object.entries(config.modalities)) {
    if (!Array.isArray(spec.cmd) || spec.cmd.length === 0) {
      skipped.push(role);
      warn(`skipping ${role}: empty command`);
      continue;
    }
    const argv = spec.cmd.map((a) => a.replaceAll("{video}", videoPath));
    const proc = spawnSync(argv[0], argv.slice(1), {
      encoding: "utf-8",
      maxBuffer: 64 * 1024 * 1024,
    });
    if (proc.error || proc.status !== 0) {
      skipped.push(role);
      const reason = proc.error ? proc.error.message : `exit ${proc.status}`;
      warn(`skipping ${role}: ${reason}`);
      continue;
    }
    for (const line of proc.stdout.split("\n")) {
      if (!line.trim()) continue;
      if (looksLikeValidLine(line)) {
        lines.push(line);
      } else {
        dropped += 1;
      }
    }
  }
  if (dropped > 0) {
    warn(`dropped ${dropped} structurally invalid lines`);
  }
  return { lines, skipped, dropped };
}
