import { sfc32, shuffle } from "./prng.js";
import { RawGraph } from "./types.js";

/**
 * Random fraction split (e.g. "10/10/80" for train/val/test), seeded and
 * deterministic: for a fixed seed the emitted index lists are identical
 * byte-for-byte across runs.
 */
export function randomSplit(graph: RawGraph, fractions: string, seed: number): void {
  const parts = fractions.split("/").map(Number);
  if (parts.length !== 3 || parts.some((x) => !(x > 0)) ) {
    throw new Error(`bad split spec '${fractions}', expected like 10/10/80`);
  }
  const total = parts[0] + parts[1] + parts[2];
  const order = shuffle([...Array(graph.numNodes).keys()], sfc32(seed));
  const nTrain = Math.round((parts[0] / total) * graph.numNodes);
  const nVal = Math.round((parts[1] / total) * graph.numNodes);
  const sortNums = (xs: number[]) => xs.sort((a, b) => a - b);
  graph.splits = {
    train: sortNums(order.slice(0, nTrain)),
    val: sortNums(order.slice(nTrain, nTrain + nVal)),
    test: sortNums(order.slice(nTrain + nVal)),
  };
}

/**
 * BFS from a seeded random start until `target` nodes are collected (jumping
 * to a new random component if the frontier empties), then relabel the
 * induced subgraph. Changes dataset statistics; meant for desk-scale runs.
 */
export function bfsSubsample(graph: RawGraph, target: number, seed: number): RawGraph {
  if (target >= graph.numNodes) return graph;
  const adj: number[][] = Array.from({ length: graph.numNodes }, () => []);
  for (const [u, v] of graph.edges) {
    adj[u].push(v);
    adj[v].push(u);
  }
  const rng = sfc32(seed ^ 0x5eed);
  const keep = new Set<number>();
  const queue: number[] = [];
  while (keep.size < target) {
    if (queue.length === 0) {
      let start = Math.floor(rng() * graph.numNodes);
      while (keep.has(start)) start = Math.floor(rng() * graph.numNodes);
      keep.add(start);
      queue.push(start);
      if (keep.size >= target) break;
    }
    const node = queue.shift()!;
    for (const nbr of adj[node]) {
      if (keep.size >= target) break;
      if (!keep.has(nbr)) {
        keep.add(nbr);
        queue.push(nbr);
      }
    }
  }
  const kept = Array.from(keep).sort((a, b) => a - b);
  const remap = new Map<number, number>();
  kept.forEach((old, idx) => remap.set(old, idx));

  const edges: Array<[number, number]> = [];
  for (const [u, v] of graph.edges) {
    if (remap.has(u) && remap.has(v)) edges.push([remap.get(u)!, remap.get(v)!]);
  }
  const features = new Float32Array(kept.length * graph.dim);
  kept.forEach((old, idx) => {
    features.set(graph.features.subarray(old * graph.dim, (old + 1) * graph.dim),
                 idx * graph.dim);
  });
  const labels = graph.labels
    ? Int32Array.from(kept.map((old) => graph.labels![old]))
    : null;
  const splits = graph.splits
    ? {
        train: graph.splits.train.filter((i) => remap.has(i)).map((i) => remap.get(i)!),
        val: graph.splits.val.filter((i) => remap.has(i)).map((i) => remap.get(i)!),
        test: graph.splits.test.filter((i) => remap.has(i)).map((i) => remap.get(i)!),
      }
    : null;
  return {
    numNodes: kept.length,
    edges,
    features,
    dim: graph.dim,
    labels,
    numClasses: graph.numClasses,
    splits,
  };
}
