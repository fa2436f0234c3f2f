#!/usr/bin/env node
/**
 * plot <kind> --in a.csv [b.csv ...] --labels A B --out fig.svg
 *             [--log-y | --linear-y]
 *
 * kind: convergence | eigenspectrum | walltime
 *
 * Figures are written as SVG (deterministic bytes for identical
 * inputs). Schema violations in the input CSVs exit nonzero with a
 * message.
 */

import { writeFileSync } from "node:fs";

import { SchemaError } from "./csv.js";
import { FigureKind, FigureRequest, render } from "./figures.js";

const KINDS: FigureKind[] = ["convergence", "eigenspectrum", "walltime"];

export function parseArgs(argv: string[]): FigureRequest {
  if (argv.length === 0) {
    throw new SchemaError(`usage: plot <${KINDS.join("|")}> --in <csv...> --out <file.svg>`);
  }
  const kind = argv[0] as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new SchemaError(`unknown figure kind '${argv[0]}'; expected one of ${KINDS.join(", ")}`);
  }
  const inputs: string[] = [];
  const labels: string[] = [];
  let out: string | undefined;
  let logY: boolean | undefined;
  let collector: string[] | null = null;
  for (let i = 1; i < argv.length; i += 1) {
    const arg = argv[i];
    if (arg === "--in") collector = inputs;
    else if (arg === "--labels") collector = labels;
    else if (arg === "--out") {
      collector = null;
      out = argv[++i];
    } else if (arg === "--log-y") {
      collector = null;
      logY = true;
    } else if (arg === "--linear-y") {
      collector = null;
      logY = false;
    } else if (arg.startsWith("--")) {
      throw new SchemaError(`unknown flag ${arg}`);
    } else if (collector !== null) {
      collector.push(arg);
    } else {
      throw new SchemaError(`unexpected argument ${arg}`);
    }
  }
  if (inputs.length === 0) throw new SchemaError("no input files (--in)");
  if (!out) throw new SchemaError("no output path (--out)");
  return { kind, inputs, labels: labels.length > 0 ? labels : undefined, out, logY };
}

export function main(argv: string[]): number {
  let request: FigureRequest;
  try {
    request = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const svg = render(request);
    writeFileSync(request.out, svg);
    console.log(`wrote ${request.out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
