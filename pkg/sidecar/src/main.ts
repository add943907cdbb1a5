/**
 * Sidecar CLI. Emits the wire protocol on stdout (or --out file).
 *
 *   main.js mock --seed 0 --duration 4 --objects 2 [--fps 20]
 *                [--vocab-size 6400] [--width 640] [--height 360] [--out f]
 *   main.js real --video path.mp4 --models models.json [--out f]
 *
 * The fusion engine's `extract` verb spawns this process and appends
 * `--seed N` from its config.
 */

import { parseArgs } from "node:util";
import { readFileSync, writeFileSync } from "node:fs";
import { DEFAULT_SCENARIO, MockScenario, mockStream } from "./mock.js";
import { RealConfig, runRealExtraction } from "./real.js";

function writeOut(lines: string[], out: string | undefined): void {
  const text = lines.length > 0 ? lines.join("\n") + "\n" : "";
  if (out) {
    writeFileSync(out, text, "utf-8");
  } else {
    process.stdout.write(text);
  }
}

function mockMain(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      seed: { type: "string", default: "0" },
      duration: { type: "string", default: String(DEFAULT_SCENARIO.duration) },
      objects: { type: "string", default: String(DEFAULT_SCENARIO.nObjects) },
      fps: { type: "string", default: String(DEFAULT_SCENARIO.fps) },
      "vocab-size": { type: "string", default: String(DEFAULT_SCENARIO.vocabSize) },
      width: { type: "string", default: String(DEFAULT_SCENARIO.width) },
      height: { type: "string", default: String(DEFAULT_SCENARIO.height) },
      out: { type: "string" },
    },
  });
  const scenario: MockScenario = {
    seed: Number(values.seed),
    duration: Number(values.duration),
    nObjects: Number(values.objects),
    fps: Number(values.fps),
    vocabSize: Number(values["vocab-size"]),
    width: Number(values.width),
    height: Number(values.height),
    rates: DEFAULT_SCENARIO.rates,
    asrSegment: DEFAULT_SCENARIO.asrSegment,
  };
  let lines: string[];
  try {
    lines = mockStream(scenario);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  writeOut(lines, values.out);
  return 0;
}

function realMain(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      video: { type: "string" },
      models: { type: "string" },
      out: { type: "string" },
    },
  });
  if (!values.video || !values.models) {
    console.error("real mode requires --video and --models");
    return 1;
  }
  let config: RealConfig;
  try {
    config = JSON.parse(readFileSync(values.models, "utf-8")) as RealConfig;
  } catch (err) {
    console.error(`cannot read models config: ${String(err)}`);
    return 1;
  }
  try {
    const result = runRealExtraction(values.video, config);
    writeOut(result.lines, values.out);
    if (result.skipped.length > 0) {
      console.error(`skipped modalities: ${result.skipped.join(", ")}`);
    }
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

function main(): number {
  const [, , command, ...rest] = process.argv;
  if (command === "mock") return mockMain(rest);
  if (command === "real") return realMain(rest);
  console.error("usage: main.js <mock|real> [options]");
  return 1;
}

process.exit(main());
