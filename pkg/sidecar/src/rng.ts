/**
 * Seeded random number generator for deterministic stream generation.
 * Mulberry32: tiny, fast, good distribution; identical sequences for
 * identical seeds on every platform.
 */
export function makeSeededRandom(seed = 0): () => number {
  let s = seed >>> 0;
  return function random(): number {
    s += 0x6d2b79f5;
    let t = Math.imul(s ^ (s >>> 15), 1 | s);
    t ^= t + Math.imul(t ^ (t >>> 7), 61 | t);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randInt(random: () => number, lo: number, hi: number): number {
  return lo + Math.floor(random() * (hi - lo + 1));
}

export function pick<T>(random: () => number, items: readonly T[]): T {
  return items[Math.floor(random() * items.length)];
}
