/**
 * The three figure kinds produced from solver artifacts:
 *
 * - convergence: objective value against iteration per method (log y by
 *   default; nonpositive values are dropped from log plots);
 * - eigenspectrum: sorted eigenvalues per spectrum kind;
 * - walltime: total elapsed time per method as bars.
 *
 * This layer only rearranges parsed artifact data into charts; it never
 * recomputes any of the mathematics.
 */

import { readFileSync } from "node:fs";
import { basename } from "node:path";

import { parseEigsCsv, parseTraceCsv, SchemaError } from "./csv.js";
import { barChart, lineChart, Series } from "./svg.js";

export type FigureKind = "convergence" | "eigenspectrum" | "walltime";

export interface FigureRequest {
  kind: FigureKind;
  inputs: string[];
  labels?: string[];
  out: string;
  logY?: boolean;
}

function labelsFor(req: FigureRequest): string[] {
  if (req.labels && req.labels.length > 0) {
    if (req.labels.length !== req.inputs.length) {
      throw new SchemaError(
        `got ${req.labels.length} labels for ${req.inputs.length} inputs`,
      );
    }
    return req.labels;
  }
  return req.inputs.map((p) => basename(p).replace(/\.csv$/, ""));
}

export function renderConvergence(req: FigureRequest): string {
  const labels = labelsFor(req);
  const series: Series[] = req.inputs.map((path, i) => {
    const rows = parseTraceCsv(readFileSync(path, "utf8"), basename(path));
    return { label: labels[i], points: rows.map((r) => [r.iter, r.fValue] as [number, number]) };
  });
  return lineChart({
    title: "Convergence",
    xLabel: "iteration",
    yLabel: "objective value",
    series,
    logY: req.logY ?? true,
  });
}

export function renderEigenspectrum(req: FigureRequest): string {
  const labels = labelsFor(req);
  const series: Series[] = [];
  req.inputs.forEach((path, i) => {
    const rows = parseEigsCsv(readFileSync(path, "utf8"), basename(path));
    const kinds = [...new Set(rows.map((r) => r.kind))];
    for (const kind of kinds) {
      const points = rows
        .filter((r) => r.kind === kind)
        .sort((a, b) => a.index - b.index)
        .map((r) => [r.index, r.value] as [number, number]);
      const label = req.inputs.length > 1 ? `${labels[i]}:${kind}` : kind;
      series.push({ label, points });
    }
  });
  return lineChart({
    title: "Hessian eigenspectrum",
    xLabel: "index",
    yLabel: "eigenvalue",
    series,
    logY: req.logY ?? false,
  });
}

export function renderWalltime(req: FigureRequest): string {
  const labels = labelsFor(req);
  const bars = req.inputs.map((path, i) => {
    const rows = parseTraceCsv(readFileSync(path, "utf8"), basename(path));
    const total = rows.length > 0 ? rows[rows.length - 1].elapsedNs : 0;
    return { label: labels[i], value: total / 1e6 };
  });
  return barChart({ title: "Wall-clock time to finish", yLabel: "elapsed (ms)", bars });
}

export function render(req: FigureRequest): string {
  switch (req.kind) {
    case "convergence":
      return renderConvergence(req);
    case "eigenspectrum":
      return renderEigenspectrum(req);
    case "walltime":
      return renderWalltime(req);
  }
}
