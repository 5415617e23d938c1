import * as fs from "node:fs";
import * as path from "node:path";

import { RawGraph } from "./types.js";

/**
 * Write the engine's bundle directory layout:
 *   meta.json, edges.tsv (both directions), features.bin (LE f32 row-major),
 *   labels.tsv (optional), splits.json (optional).
 */
export function writeBundle(graph: RawGraph, outDir: string): void {
  fs.mkdirSync(outDir, { recursive: true });

  const meta = {
    num_nodes: graph.numNodes,
    feature_dim: graph.dim,
    num_classes: graph.numClasses,
    dtype: "f32",
  };
  fs.writeFileSync(path.join(outDir, "meta.json"), JSON.stringify(meta, null, 1) + "\n");

  const directed: Array<[number, number]> = [];
  for (const [u, v] of graph.edges) {
    directed.push([u, v], [v, u]);
  }
  directed.sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  const lines = directed.map(([u, v]) => `${u}\t${v}`).join("\n");
  fs.writeFileSync(path.join(outDir, "edges.tsv"), lines + (directed.length ? "\n" : ""));

  // Float32Array is little-endian on every platform Node targets; write raw.
  const buf = Buffer.from(graph.features.buffer, graph.features.byteOffset,
                          graph.features.byteLength);
  fs.writeFileSync(path.join(outDir, "features.bin"), buf);

  if (graph.labels) {
    fs.writeFileSync(
      path.join(outDir, "labels.tsv"),
      Array.from(graph.labels).join("\n") + "\n");
  }
  if (graph.splits) {
    fs.writeFileSync(
      path.join(outDir, "splits.json"),
      JSON.stringify(graph.splits) + "\n");
  }
}
