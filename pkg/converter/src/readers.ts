import * as fs from "node:fs";
import * as path from "node:path";

import { RawGraph } from "./types.js";

function dedupeUndirected(pairs: Array<[number, number]>): Array<[number, number]> {
  const seen = new Set<string>();
  const out: Array<[number, number]> = [];
  for (const [a, b] of pairs) {
    if (a === b) continue;
    const u = Math.min(a, b);
    const v = Math.max(a, b);
    const key = `${u},${v}`;
    if (seen.has(key)) continue;
    seen.add(key);
    out.push([u, v]);
  }
  out.sort((x, y) => x[0] - y[0] || x[1] - y[1]);
  return out;
}

function readLines(file: string): string[] {
  return fs
    .readFileSync(file, "utf8")
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0);
}

/**
 * Planetoid-style text distribution: a `<name>.content` file with
 * `<paper_id> <w1> ... <wd> <class_label>` rows and a `<name>.cites` file
 * with `<cited> <citing>` pairs. Paper ids are arbitrary strings; class
 * labels are mapped to dense indices in first-seen order. Citations whose
 * endpoints are missing from the content file are dropped (they reference
 * papers outside the released subset).
 */
export function readPlanetoid(sourcePath: string): RawGraph {
  const base = path.basename(sourcePath);
  const content = path.join(sourcePath, `${base}.content`);
  const cites = path.join(sourcePath, `${base}.cites`);
  for (const f of [content, cites]) {
    if (!fs.existsSync(f)) throw new Error(`missing source file: ${f}`);
  }
  const idToIndex = new Map<string, number>();
  const classToIndex = new Map<string, number>();
  const featRows: number[][] = [];
  const labelList: number[] = [];
  for (const line of readLines(content)) {
    const parts = line.split(/\s+/);
    if (parts.length < 3) throw new Error(`malformed content row: ${line}`);
    const id = parts[0];
    const cls = parts[parts.length - 1];
    const feats = parts.slice(1, -1).map(Number);
    if (feats.some((x) => !Number.isFinite(x))) {
      throw new Error(`non-finite feature in row for ${id}`);
    }
    if (!classToIndex.has(cls)) classToIndex.set(cls, classToIndex.size);
    idToIndex.set(id, idToIndex.size);
    featRows.push(feats);
    labelList.push(classToIndex.get(cls)!);
  }
  const dim = featRows[0]?.length ?? 0;
  if (featRows.some((r) => r.length !== dim)) {
    throw new Error("inconsistent feature width in content file");
  }
  const pairs: Array<[number, number]> = [];
  for (const line of readLines(cites)) {
    const [a, b] = line.split(/\s+/);
    const ia = idToIndex.get(a);
    const ib = idToIndex.get(b);
    if (ia === undefined || ib === undefined) continue;
    pairs.push([ia, ib]);
  }
  const n = featRows.length;
  const features = new Float32Array(n * dim);
  featRows.forEach((row, i) => features.set(row, i * dim));
  return {
    numNodes: n,
    edges: dedupeUndirected(pairs),
    features,
    dim,
    labels: Int32Array.from(labelList),
    numClasses: classToIndex.size,
    splits: null,
  };
}

/**
 * OGB-style CSV directory: `edge.csv` (src,dst), `node-feat.csv` (one float
 * row per node), optional `node-label.csv`, optional `split/{train,valid,test}.csv`
 * holding node indices one per line.
 */
export function readOgb(sourcePath: string): RawGraph {
  const edgeFile = path.join(sourcePath, "edge.csv");
  const featFile = path.join(sourcePath, "node-feat.csv");
  for (const f of [edgeFile, featFile]) {
    if (!fs.existsSync(f)) throw new Error(`missing source file: ${f}`);
  }
  const featRows = readLines(featFile).map((line) => line.split(",").map(Number));
  const dim = featRows[0]?.length ?? 0;
  if (featRows.some((r) => r.length !== dim || r.some((x) => !Number.isFinite(x)))) {
    throw new Error("malformed node-feat.csv");
  }
  const n = featRows.length;
  const pairs: Array<[number, number]> = [];
  for (const line of readLines(edgeFile)) {
    const [a, b] = line.split(",").map(Number);
    if (!Number.isInteger(a) || !Number.isInteger(b)) {
      throw new Error(`malformed edge row: ${line}`);
    }
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw new Error(`edge index out of range: ${line}`);
    }
    pairs.push([a, b]);
  }
  let labels: Int32Array | null = null;
  let numClasses: number | null = null;
  const labelFile = path.join(sourcePath, "node-label.csv");
  if (fs.existsSync(labelFile)) {
    const vals = readLines(labelFile).map(Number);
    if (vals.length !== n) throw new Error("node-label.csv row count mismatch");
    labels = Int32Array.from(vals);
    numClasses = Math.max(...vals) + 1;
  }
  let splits: RawGraph["splits"] = null;
  const splitDir = path.join(sourcePath, "split");
  if (fs.existsSync(splitDir)) {
    const read = (name: string) => {
      const f = path.join(splitDir, `${name}.csv`);
      return fs.existsSync(f) ? readLines(f).map(Number) : [];
    };
    splits = { train: read("train"), val: read("valid"), test: read("test") };
  }
  const features = new Float32Array(n * dim);
  featRows.forEach((row, i) => features.set(row, i * dim));
  return {
    numNodes: n,
    edges: dedupeUndirected(pairs),
    features,
    dim,
    labels,
    numClasses,
    splits,
  };
}

/**
 * Bare edge-list CSV: `src,dst` per line, nodes inferred from the indices.
 * With no feature file, identity-style features are synthesized as a single
 * constant column plus normalized degree, which keeps the bundle valid for
 * smoke runs.
 */
export function readEdgeCsv(sourcePath: string): RawGraph {
  if (!fs.existsSync(sourcePath)) {
    throw new Error(`missing source file: ${sourcePath}`);
  }
  const pairs: Array<[number, number]> = [];
  let maxIdx = -1;
  for (const line of readLines(sourcePath)) {
    const [a, b] = line.split(",").map(Number);
    if (!Number.isInteger(a) || !Number.isInteger(b) || a < 0 || b < 0) {
      throw new Error(`malformed edge row: ${line}`);
    }
    maxIdx = Math.max(maxIdx, a, b);
    pairs.push([a, b]);
  }
  const n = maxIdx + 1;
  if (n === 0) throw new Error("edge list is empty");
  const edges = dedupeUndirected(pairs);
  const degree = new Float64Array(n);
  for (const [u, v] of edges) {
    degree[u] += 1;
    degree[v] += 1;
  }
  const maxDeg = Math.max(1, ...degree);
  const dim = 2;
  const features = new Float32Array(n * dim);
  for (let i = 0; i < n; i++) {
    features[i * dim] = 1.0;
    features[i * dim + 1] = degree[i] / maxDeg;
  }
  return { numNodes: n, edges, features, dim, labels: null, numClasses: null, splits: null };
}
