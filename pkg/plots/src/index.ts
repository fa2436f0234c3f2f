export { parseEigsCsv, parseTraceCsv, SchemaError } from "./csv.js";
export type { EigRow, TraceRow } from "./csv.js";
export { render, renderConvergence, renderEigenspectrum, renderWalltime } from "./figures.js";
export type { FigureKind, FigureRequest } from "./figures.js";
export { barChart, lineChart } from "./svg.js";
