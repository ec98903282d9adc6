import { routerId, type TopologyDoc } from './types';

export interface Point {
  x: number;
  y: number;
}

/** Small deterministic PRNG (mulberry32) so layouts are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const ITERATIONS = 300;
const SPRING_LENGTH = 0.35;
const SPRING_K = 0.02;
const REPULSION = 0.004;
const DEFAULT_SEED = 7;

/**
 * Deterministic force-directed layout: seeded initial positions, fixed
 * iteration count, no randomness during relaxation. Coordinates are
 * normalized into [margin, 1 - margin] on both axes.
 */
export function layoutTopology(
  topology: TopologyDoc,
  seed: number = DEFAULT_SEED,
): Map<number, Point> {
  const routers = topology.routers.map(routerId).sort((a, b) => a - b);
  const rand = mulberry32(seed);
  const pos = new Map<number, Point>();
  for (const r of routers) {
    pos.set(r, { x: rand(), y: rand() });
  }

  // Undirected neighbor pairs (the reverse direction of a link adds
  // nothing to the geometry).
  const pairs = new Set<string>();
  for (const l of topology.links) {
    const [a, b] = l.src < l.dst ? [l.src, l.dst] : [l.dst, l.src];
    if (a !== b) pairs.add(`${a}:${b}`);
  }
  const edges = [...pairs].sort().map((key) => {
    const [a, b] = key.split(':').map(Number);
    return [a, b] as const;
  });

  for (let it = 0; it < ITERATIONS; it += 1) {
    const force = new Map<number, Point>(routers.map((r) => [r, { x: 0, y: 0 }]));
    for (let i = 0; i < routers.length; i += 1) {
      for (let j = i + 1; j < routers.length; j += 1) {
        const a = pos.get(routers[i])!;
        const b = pos.get(routers[j])!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const d2 = Math.max(dx * dx + dy * dy, 1e-6);
        const f = REPULSION / d2;
        const fa = force.get(routers[i])!;
        const fb = force.get(routers[j])!;
        fa.x += dx * f;
        fa.y += dy * f;
        fb.x -= dx * f;
        fb.y -= dy * f;
      }
    }
    for (const [a, b] of edges) {
      const pa = pos.get(a)!;
      const pb = pos.get(b)!;
      const dx = pb.x - pa.x;
      const dy = pb.y - pa.y;
      const d = Math.max(Math.hypot(dx, dy), 1e-6);
      const f = SPRING_K * (d - SPRING_LENGTH);
      const fa = force.get(a)!;
      const fb = force.get(b)!;
      fa.x += (dx / d) * f;
      fa.y += (dy / d) * f;
      fb.x -= (dx / d) * f;
      fb.y -= (dy / d) * f;
    }
    const cooling = 1 - it / ITERATIONS;
    for (const r of routers) {
      const p = pos.get(r)!;
      const f = force.get(r)!;
      p.x += f.x * cooling;
      p.y += f.y * cooling;
    }
  }

  // Normalize into the unit square with a margin.
  const xs = routers.map((r) => pos.get(r)!.x);
  const ys = routers.map((r) => pos.get(r)!.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const margin = 0.08;
  const scale = 1 - 2 * margin;
  for (const r of routers) {
    const p = pos.get(r)!;
    p.x = margin + ((p.x - minX) / spanX) * scale;
    p.y = margin + ((p.y - minY) / spanY) * scale;
  }
  return pos;
}
