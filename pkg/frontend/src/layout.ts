import { SubgraphEdge, SubgraphVertex } from "./types.js";

export interface PlacedVertex extends SubgraphVertex {
  x: number;
  y: number;
}

/**
 * Deterministic ring-constrained force layout.
 *
 * Each vertex is pinned to a ring whose radius encodes its hop distance
 * from the target (distance 0 sits at the center).  A fixed number of
 * relaxation steps spreads same-ring vertices apart and pulls connected
 * vertices toward each other's angle, so the result is reproducible
 * without a random seed.
 */
export function layoutSubgraph(
  vertices: SubgraphVertex[],
  edges: SubgraphEdge[],
  width: number,
  height: number,
  iterations = 60,
): PlacedVertex[] {
  const cx = width / 2;
  const cy = height / 2;
  const maxDistance = Math.max(1, ...vertices.map((v) => v.distance));
  const ringGap = (Math.min(width, height) / 2 - 30) / maxDistance;

  const order = [...vertices].sort((a, b) => a.id.localeCompare(b.id));
  const angle = new Map<string, number>();
  const byRing = new Map<number, string[]>();
  for (const vertex of order) {
    const ring = byRing.get(vertex.distance) ?? [];
    ring.push(vertex.id);
    byRing.set(vertex.distance, ring);
  }
  for (const ring of byRing.values()) {
    ring.forEach((id, i) => {
      angle.set(id, (2 * Math.PI * i) / ring.length);
    });
  }

  const neighbors = new Map<string, string[]>();
  for (const edge of edges) {
    (neighbors.get(edge.src) ?? neighbors.set(edge.src, []).get(edge.src)!)
      .push(edge.dst);
    (neighbors.get(edge.dst) ?? neighbors.set(edge.dst, []).get(edge.dst)!)
      .push(edge.src);
  }

  const wrap = (a: number) => Math.atan2(Math.sin(a), Math.cos(a));
  for (let step = 0; step < iterations; step += 1) {
    const next = new Map<string, number>();
    for (const [ringDistance, ring] of byRing) {
      for (const id of ring) {
        let force = 0;
        // angular repulsion within the ring
        for (const other of ring) {
          if (other === id) continue;
          const delta = wrap(angle.get(id)! - angle.get(other)!);
          const magnitude = Math.abs(delta) < 1e-6 ? 1e-6 : delta;
          force += 0.15 / magnitude;
        }
        // attraction toward connected vertices' angles
        for (const other of neighbors.get(id) ?? []) {
          if (!angle.has(other)) continue;
          force += 0.1 * wrap(angle.get(other)! - angle.get(id)!);
        }
        // the center vertex needs no angle adjustment
        next.set(id, ringDistance === 0 ? angle.get(id)!
          : angle.get(id)! + Math.max(-0.3, Math.min(0.3, force)));
      }
    }
    for (const [id, a] of next) {
      angle.set(id, wrap(a));
    }
  }

  return order.map((vertex) => ({
    ...vertex,
    x: vertex.distance === 0
      ? cx
      : cx + ringGap * vertex.distance * Math.cos(angle.get(vertex.id)!),
    y: vertex.distance === 0
      ? cy
      : cy + ringGap * vertex.distance * Math.sin(angle.get(vertex.id)!),
  }));
}
