/**
 * Parsers for the solver-trace and eigenspectrum CSV artifacts.
 *
 * Both schemas are strict: a wrong header or a malformed row is a hard
 * error (the plotting layer never guesses at numerical data).
 */

export interface TraceRow {
  iter: number;
  fValue: number;
  gradNorm: number;
  stepSize: number;
  elapsedNs: number;
}

export interface EigRow {
  kind: string;
  index: number;
  value: number;
}

export class SchemaError extends Error {}

const TRACE_HEADER = "iter,f_value,grad_norm,step_size,elapsed_ns";
const EIGS_HEADER = "kind,index,value";

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.length > 0);
}

function parseFloatStrict(raw: string, where: string): number {
  if (raw.length === 0) throw new SchemaError(`empty numeric field in ${where}`);
  const value = Number(raw);
  if (Number.isNaN(value)) throw new SchemaError(`non-numeric field ${raw!} in ${where}`);
  return value;
}

function parseIntStrict(raw: string, where: string): number {
  const value = parseFloatStrict(raw, where);
  if (!Number.isInteger(value)) throw new SchemaError(`expected integer, got ${raw} in ${where}`);
  return value;
}

export function parseTraceCsv(text: string, source = "trace csv"): TraceRow[] {
  const lines = splitLines(text);
  if (lines.length === 0 || lines[0] !== TRACE_HEADER) {
    throw new SchemaError(`${source}: expected header '${TRACE_HEADER}'`);
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    if (parts.length !== 5) {
      throw new SchemaError(`${source}: row ${i + 1} has ${parts.length} fields, expected 5`);
    }
    const where = `${source} row ${i + 1}`;
    return {
      iter: parseIntStrict(parts[0], where),
      fValue: parseFloatStrict(parts[1], where),
      gradNorm: parseFloatStrict(parts[2], where),
      stepSize: parseFloatStrict(parts[3], where),
      elapsedNs: parseIntStrict(parts[4], where),
    };
  });
}

export function parseEigsCsv(text: string, source = "eigs csv"): EigRow[] {
  const lines = splitLines(text);
  if (lines.length === 0 || lines[0] !== EIGS_HEADER) {
    throw new SchemaError(`${source}: expected header '${EIGS_HEADER}'`);
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    if (parts.length !== 3) {
      throw new SchemaError(`${source}: row ${i + 1} has ${parts.length} fields, expected 3`);
    }
    const where = `${source} row ${i + 1}`;
    if (parts[0].length === 0) throw new SchemaError(`empty kind in ${where}`);
    return {
      kind: parts[0],
      index: parseIntStrict(parts[1], where),
      value: parseFloatStrict(parts[2], where),
    };
  });
}
