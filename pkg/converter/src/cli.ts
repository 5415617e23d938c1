import { parseArgs } from "node:util";

import { convert } from "./convert.js";
import { SourceKind, SourceSpec } from "./types.js";

const HELP = `usage: convert --kind <planetoid|ogb|edge-csv> --source <path> --out <dir>
               [--subsample N] [--seed S] [--random-split 10/10/80]

Converts a public graph dataset distribution into the engine's bundle
directory layout (meta.json, edges.tsv, features.bin, labels.tsv,
splits.json). The output is validated by running 'hopgd ingest' on it.`;

export function main(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      kind: { type: "string" },
      source: { type: "string" },
      out: { type: "string" },
      subsample: { type: "string" },
      seed: { type: "string" },
      "random-split": { type: "string" },
      help: { type: "boolean" },
    },
  });
  if (values.help || !values.kind || !values.source || !values.out) {
    console.log(HELP);
    return values.help ? 0 : 2;
  }
  const spec: SourceSpec = {
    kind: values.kind as SourceKind,
    sourcePath: values.source,
    outDir: values.out,
    subsample: values.subsample ? parseInt(values.subsample, 10) : 0,
    seed: values.seed ? parseInt(values.seed, 10) : 0,
    randomSplit: values["random-split"],
  };
  const graph = convert(spec);
  console.log(
    `wrote bundle to ${spec.outDir}: ${graph.numNodes} nodes, ` +
      `${graph.edges.length} undirected edges, d=${graph.dim}, ` +
      `classes=${graph.numClasses ?? "none"}`);
  return 0;
}

process.exit(main(process.argv.slice(2)));
