export type SourceKind = "planetoid" | "ogb" | "edge-csv";

export interface SourceSpec {
  kind: SourceKind;
  sourcePath: string;
  outDir: string;
  /** BFS-induced subgraph size for desk-scale variants; 0 keeps everything. */
  subsample?: number;
  /** Seed for random splits and subsample start node. */
  seed?: number;
  /** Generate random train/val/test fractions (e.g. "10/10/80") when the
   *  source defines no splits. */
  randomSplit?: string;
}

export interface RawGraph {
  numNodes: number;
  /** undirected unique pairs, u < v */
  edges: Array<[number, number]>;
  /** row-major numNodes x dim */
  features: Float32Array;
  dim: number;
  labels: Int32Array | null;
  numClasses: number | null;
  splits: { train: number[]; val: number[]; test: number[] } | null;
}
