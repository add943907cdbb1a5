/**
 * Wire-protocol record types and the canonical one-line JSON encoding
 * consumed by the fusion engine (see docs/protocol.md at the repo root).
 */

export type Modality =
  | "CAPTION"
  | "DENSE_CAPTION"
  | "OCR"
  | "ASR"
  | "TAG"
  | "DETECTION";

export type BoxTuple = [number, number, number, number];

export interface EventRecord {
  id: string;
  modality: Modality;
  span: [number, number];
  payload: Record<string, unknown>;
  source: string;
  confidence: number;
}

export const REQUIRED_KEYS = [
  "id",
  "modality",
  "span",
  "payload",
  "source",
  "confidence",
] as const;

export const MODALITIES: readonly Modality[] = [
  "CAPTION",
  "DENSE_CAPTION",
  "OCR",
  "ASR",
  "TAG",
  "DETECTION",
];

/** Round to 3 decimals so emitted numbers are short and stable. */
export function round3(value: number): number {
  return Math.round(value * 1000) / 1000;
}

/** Fixed key order: id, modality, span, payload, source, confidence. */
export function encodeLine(record: EventRecord): string {
  return JSON.stringify({
    id: record.id,
    modality: record.modality,
    span: record.span,
    payload: record.payload,
    source: record.source,
    confidence: record.confidence,
  });
}

/**
 * Structural check used by real mode before passing a line through:
 * parses as an object carrying every required key with a known modality,
 * a two-number span, and an in-range confidence. Semantic validation is
 * the engine's job.
 */
export function looksLikeValidLine(line: string): boolean {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    return false;
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    return false;
  }
  const record = parsed as Record<string, unknown>;
  for (const key of REQUIRED_KEYS) {
    if (!(key in record)) return false;
  }
  if (typeof record.id !== "string" || record.id.length === 0) return false;
  if (!MODALITIES.includes(record.modality as Modality)) return false;
  const span = record.span;
  if (
    !Array.isArray(span) ||
    span.length !== 2 ||
    typeof span[0] !== "number" ||
    typeof span[1] !== "number"
  ) {
    return false;
  }
  if (typeof record.payload !== "object" || record.payload === null) {
    return false;
  }
  if (typeof record.source !== "string") return false;
  const confidence = record.confidence;
  if (typeof confidence !== "number" || confidence < 0 || confidence > 1) {
    return false;
  }
  return true;
}
