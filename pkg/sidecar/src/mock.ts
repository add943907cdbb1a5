/**
 * Deterministic mock extractor: synthesizes a plausible annotation stream
 * for all six modalities from a seed. Identical scenarios produce
 * byte-identical output, and every emitted line parses and validates in
 * the fusion engine, which is the conformance oracle for this package.
 *
 * Detections follow piecewise-linear motion (one velocity change at the
 * scenario midpoint) so tracker test scenes are generatable from seeds.
 */

import { makeSeededRandom, pick, randInt } from "./rng.js";
import { BoxTuple, EventRecord, encodeLine, round3 } from "./protocol.js";

export interface MockScenario {
  seed: number;
  duration: number;
  nObjects: number;
  fps: number;
  vocabSize: number;
  width: number;
  height: number;
  /** events per second for caption/dense/ocr/tag channels */
  rates: { caption: number; dense: number; ocr: number; tag: number };
  /** approximate ASR segment length in seconds */
  asrSegment: number;
}

export const DEFAULT_SCENARIO: Omit<MockScenario, "seed"> = {
  duration: 4,
  nObjects: 2,
  fps: 20,
  vocabSize: 6400,
  width: 640,
  height: 360,
  rates: { caption: 2, dense: 1, ocr: 0.5, tag: 3 },
  asrSegment: 2,
};

export function scenarioProblems(s: MockScenario): string[] {
  const problems: string[] = [];
  if (!Number.isFinite(s.duration) || s.duration < 0) {
    problems.push("duration must be >= 0");
  }
  if (!Number.isFinite(s.fps) || s.fps <= 0) problems.push("fps must be > 0");
  if (!Number.isInteger(s.nObjects) || s.nObjects < 0) {
    problems.push("objects must be a non-negative integer");
  }
  if (!Number.isInteger(s.vocabSize) || s.vocabSize < 1 || s.vocabSize > 6400) {
    problems.push("vocab-size must be in 1..6400");
  }
  if (s.width <= 0 || s.height <= 0) problems.push("frame must be positive");
  return problems;
}

const ADJECTIVES = [
  "red", "blue", "green", "yellow", "black", "white", "small", "large",
  "old", "young", "bright", "dark", "shiny", "wooden", "metal", "plastic",
  "round", "square", "striped", "spotted",
];

const NOUNS = [
  "dog", "cat", "car", "bicycle", "chair", "table", "bottle",
  "cup", "bowl", "plate", "stove", "pot", "pan", "window", "door", "tree",
  "plant", "book", "phone", "screen", "sign", "street", "room", "kitchen",
  "garden", "wall", "floor", "shelf", "lamp", "bag", "box", "ball", "bird",
  "horse", "truck", "bus", "couch", "bed", "clock",
];

// people are described without adjectives; colors qualify objects only
const SUBJECTS = ["a man", "a woman", "a person", "a child"];

const ACTIVITIES = [
  "walking", "running", "standing", "sitting", "cooking", "eating",
  "drinking", "reading", "talking", "playing", "jumping", "sleeping",
];

const SCENES = ["kitchen", "street", "garden", "office", "park", "room"];

const DETECTION_CLASSES = [
  "person", "dog", "cat", "car", "bird", "bicycle", "chair", "bottle",
  "cup", "tv",
];

const OCR_PHRASES = [
  "open daily", "fresh pasta every day", "no parking", "welcome",
  "sale today", "exit", "push", "pull", "menu", "special offer",
];

const OCR_PHRASES_ZH = ["新鲜面条", "欢迎光临", "出口", "今日特价"];

const AUDIO_TAGS = ["speech", "music", "noise", "animal"];

/**
 * Deterministic vocabulary of up to 6400 normalized labels. The first
 * entries are single words and adjective+noun pairs; the tail is indexed
 * composites, all unique.
 */
export function buildVocabulary(size: number): string[] {
  const labels: string[] = [];
  const seen = new Set<string>();
  const push = (label: string) => {
    if (labels.length < size && !seen.has(label)) {
      seen.add(label);
      labels.push(label);
    }
  };
  push("person");
  for (const w of [...NOUNS, ...ACTIVITIES, ...SCENES, ...ADJECTIVES]) push(w);
  for (const adj of ADJECTIVES) {
    for (const noun of NOUNS) push(`${adj} ${noun}`);
  }
  let i = 0;
  while (labels.length < size) {
    push(`${NOUNS[i % NOUNS.length]} variant ${i}`);
    i += 1;
  }
  return labels;
}

interface MovingObject {
  label: string;
  x0: number;
  y0: number;
  w: number;
  h: number;
  v1: [number, number];
  v2: [number, number];
}

function positionAt(obj: MovingObject, t: number, mid: number): [number, number] {
  const leg1 = Math.min(t, mid);
  const leg2 = Math.max(0, t - mid);
  return [
    obj.x0 + obj.v1[0] * leg1 + obj.v2[0] * leg2,
    obj.y0 + obj.v1[1] * leg1 + obj.v2[1] * leg2,
  ];
}

function innerBox(
  random: () => number,
  width: number,
  height: number,
): BoxTuple {
  const w = randInt(random, 40, Math.max(41, Math.floor(width / 4)));
  const h = randInt(random, 20, Math.max(21, Math.floor(height / 4)));
  const x = randInt(random, 0, Math.max(0, width - w));
  const y = randInt(random, 0, Math.max(0, height - h));
  return [x, y, w, h];
}

export function mockStream(scenario: MockScenario): string[] {
  const problems = scenarioProblems(scenario);
  if (problems.length > 0) {
    throw new Error(`invalid scenario: ${problems.join("; ")}`);
  }
  const { duration, width, height } = scenario;
  const random = makeSeededRandom(scenario.seed);
  const vocab = buildVocabulary(scenario.vocabSize);
  const lines: string[] = [];
  const emit = (record: EventRecord) => lines.push(encodeLine(record));

  const conf = (lo: number) => round3(lo + random() * (1 - lo));
  const spanAt = (start: number, length: number): [number, number] => {
    const s = round3(Math.min(start, duration));
    const e = round3(Math.min(start + length, duration));
    return [s, e >= s ? e : s];
  };

  // scene captions
  const captionStep = 1 / scenario.rates.caption;
  let n = 0;
  for (let t = 0; t < duration; t += captionStep) {
    const subject =
      random() < 0.4
        ? pick(random, SUBJECTS)
        : `a ${pick(random, ADJECTIVES)} ${pick(random, NOUNS)}`;
    const text = `${subject} ${pick(random, ACTIVITIES)} in the ${pick(random, SCENES)}`;
    emit({
      id: `cap-${String(n).padStart(4, "0")}`,
      modality: "CAPTION",
      span: spanAt(t, captionStep),
      payload: { text },
      source: "mock-captioner",
      confidence: conf(0.7),
    });
    n += 1;
  }

  // region captions, one object described per event
  const denseStep = 1 / scenario.rates.dense;
  n = 0;
  for (let t = 0; t < duration; t += denseStep) {
    const text = `a ${pick(random, ADJECTIVES)} ${pick(random, NOUNS)}`;
    emit({
      id: `reg-${String(n).padStart(4, "0")}`,
      modality: "DENSE_CAPTION",
      span: spanAt(t, 0),
      payload: { text, box: innerBox(random, width, height) },
      source: "mock-regioncap",
      confidence: conf(0.6),
    });
    n += 1;
  }

  // on-screen text
  const ocrStep = 1 / scenario.rates.ocr;
  n = 0;
  for (let t = 0; t < duration; t += ocrStep) {
    const zh = random() < 0.25;
    emit({
      id: `ocr-${String(n).padStart(4, "0")}`,
      modality: "OCR",
      span: spanAt(t, ocrStep / 2),
      payload: {
        text: zh ? pick(random, OCR_PHRASES_ZH) : pick(random, OCR_PHRASES),
        box: innerBox(random, width, height),
        lang: zh ? "zh" : "en",
      },
      source: "mock-textreader",
      confidence: conf(0.55),
    });
    n += 1;
  }

  // speech segments with audio tags; occasionally tag-only background noise
  n = 0;
  for (let t = 0; t < duration; t += scenario.asrSegment) {
    const tagOnly = random() < 0.2;
    const words = Array.from(
      { length: randInt(random, 3, 8) },
      () => pick(random, [...NOUNS, ...ACTIVITIES, "the", "a", "and", "now"]),
    );
    const audioTags = tagOnly
      ? [pick(random, AUDIO_TAGS.slice(1))]
      : ["speech", ...(random() < 0.3 ? [pick(random, AUDIO_TAGS.slice(1))] : [])];
    emit({
      id: `asr-${String(n).padStart(4, "0")}`,
      modality: "ASR",
      span: spanAt(t, scenario.asrSegment * 0.9),
      payload: { text: tagOnly ? "" : words.join(" "), audio_tags: audioTags },
      source: "mock-speech",
      confidence: conf(0.6),
    });
    n += 1;
  }

  // open-vocabulary tags
  const tagStep = 1 / scenario.rates.tag;
  n = 0;
  for (let t = 0; t < duration; t += tagStep) {
    emit({
      id: `tag-${String(n).padStart(4, "0")}`,
      modality: "TAG",
      span: spanAt(t, tagStep * 2),
      payload: { label: vocab[Math.floor(random() * vocab.length)] },
      source: "mock-tagger",
      confidence: conf(0.5),
    });
    n += 1;
  }

  // detections along piecewise-linear trajectories
  const mid = duration / 2;
  const objects: MovingObject[] = [];
  for (let k = 0; k < scenario.nObjects; k += 1) {
    const w = randInt(random, 40, 90);
    const h = randInt(random, 40, 90);
    objects.push({
      label: DETECTION_CLASSES[k % DETECTION_CLASSES.length],
      x0: randInt(random, 20, Math.max(21, width - w - 20)),
      y0: randInt(random, 20, Math.max(21, height - h - 20)),
      w,
      h,
      v1: [round3((random() - 0.5) * 40), round3((random() - 0.5) * 20)],
      v2: [round3((random() - 0.5) * 40), round3((random() - 0.5) * 20)],
    });
  }
  const nFrames = Math.ceil(duration * scenario.fps - 1e-9);
  for (let k = 0; k < objects.length; k += 1) {
    const obj = objects[k];
    for (let f = 0; f < nFrames; f += 1) {
      const t = round3(f / scenario.fps);
      if (t >= duration) break;
      const [x, y] = positionAt(obj, f / scenario.fps, mid);
      emit({
        id: `det-${k}-${String(f).padStart(4, "0")}`,
        modality: "DETECTION",
        span: [t, t],
        payload: {
          label: obj.label,
          box: [round3(x), round3(y), obj.w, obj.h],
          score: round3(0.65 + random() * 0.35),
        },
        source: "mock-detector",
        confidence: 1,
      });
    }
  }

  return lines;
}
