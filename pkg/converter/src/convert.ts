import { writeBundle } from "./bundle.js";
import { readEdgeCsv, readOgb, readPlanetoid } from "./readers.js";
import { bfsSubsample, randomSplit } from "./transform.js";
import { RawGraph, SourceSpec } from "./types.js";

export function loadSource(spec: SourceSpec): RawGraph {
  switch (spec.kind) {
    case "planetoid":
      return readPlanetoid(spec.sourcePath);
    case "ogb":
      return readOgb(spec.sourcePath);
    case "edge-csv":
      return readEdgeCsv(spec.sourcePath);
    default:
      throw new Error(`unknown source kind '${spec.kind}'`);
  }
}

export function convert(spec: SourceSpec): RawGraph {
  let graph = loadSource(spec);
  if (spec.subsample && spec.subsample > 0) {
    graph = bfsSubsample(graph, spec.subsample, spec.seed ?? 0);
  }
  if (spec.randomSplit) {
    randomSplit(graph, spec.randomSplit, spec.seed ?? 0);
  }
  writeBundle(graph, spec.outDir);
  return graph;
}
