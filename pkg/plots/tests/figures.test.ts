import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { beforeAll, describe, expect, it } from "vitest";

import { render, renderConvergence, renderEigenspectrum, renderWalltime } from "../dist/index.js";
import { parseArgs, main } from "../dist/cli.js";

let dir: string;
let traceA: string;
let traceB: string;
let eigs: string;
let emptyTrace: string;

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), "plots-"));
  traceA = join(dir, "a.csv");
  traceB = join(dir, "b.csv");
  eigs = join(dir, "eigs.csv");
  emptyTrace = join(dir, "empty.csv");
  writeFileSync(
    traceA,
    [
      "iter,f_value,grad_norm,step_size,elapsed_ns",
      "0,100.0,10.0,0.0,0",
      "1,10.0,3.0,1.0,500",
      "2,1.0,1.0,1.0,900",
      "3,0.0,0.0,1.0,1400",
      "",
    ].join("\n"),
  );
  writeFileSync(
    traceB,
    [
      "iter,f_value,grad_norm,step_size,elapsed_ns",
      "0,100.0,10.0,0.0,0",
      "1,0.001,0.01,1.0,300",
      "",
    ].join("\n"),
  );
  writeFileSync(
    eigs,
    [
      "kind,index,value",
      "full,0,0.5",
      "full,1,40.0",
      "reduced_eucl,0,2.0",
      "reduced_pencil,0,1.0",
      "",
    ].join("\n"),
  );
  writeFileSync(emptyTrace, "iter,f_value,grad_norm,step_size,elapsed_ns\n");
});

describe("renderConvergence", () => {
  it("draws one labeled path per input", () => {
    const svg = renderConvergence({
      kind: "convergence",
      inputs: [traceA, traceB],
      labels: ["slow", "fast"],
      out: "unused.svg",
    });
    expect(svg).toContain("<svg");
    expect((svg.match(/<path /g) ?? []).length).toBe(2);
    expect(svg).toContain(">slow<");
    expect(svg).toContain(">fast<");
  });

  it("is deterministic for identical inputs", () => {
    const req = { kind: "convergence" as const, inputs: [traceA, traceB], out: "unused.svg" };
    expect(renderConvergence(req)).toBe(renderConvergence(req));
  });

  it("drops nonpositive values on the default log scale", () => {
    const svg = renderConvergence({ kind: "convergence", inputs: [traceA], out: "u.svg" });
    // four rows, one of them 0.0: the path keeps three points
    const path = svg.match(/<path d="([^"]+)"/)![1];
    expect(path.split("L").length).toBe(3);
  });

  it("renders empty axes for a header-only trace", () => {
    const svg = renderConvergence({ kind: "convergence", inputs: [emptyTrace], out: "u.svg" });
    expect(svg).toContain("<svg");
    expect(svg).not.toContain("<path");
  });

  it("supports a linear axis", () => {
    const svg = renderConvergence({
      kind: "convergence",
      inputs: [traceA],
      out: "u.svg",
      logY: false,
    });
    const path = svg.match(/<path d="([^"]+)"/)![1];
    expect(path.split("L").length).toBe(4); // zero survives on linear axes
  });

  it("rejects mismatched label counts", () => {
    expect(() =>
      renderConvergence({
        kind: "convergence",
        inputs: [traceA, traceB],
        labels: ["only-one"],
        out: "u.svg",
      }),
    ).toThrow(/labels/);
  });
});

describe("renderEigenspectrum", () => {
  it("draws one series per spectrum kind", () => {
    const svg = renderEigenspectrum({ kind: "eigenspectrum", inputs: [eigs], out: "u.svg" });
    expect((svg.match(/<path /g) ?? []).length).toBe(3);
    expect(svg).toContain(">full<");
    expect(svg).toContain(">reduced_eucl<");
    expect(svg).toContain(">reduced_pencil<");
  });
});

describe("renderWalltime", () => {
  it("draws one bar per method with totals", () => {
    const svg = renderWalltime({
      kind: "walltime",
      inputs: [traceA, traceB],
      labels: ["m1", "m2"],
      out: "u.svg",
    });
    expect((svg.match(/<rect /g) ?? []).length).toBe(2 + 1); // background + 2 bars
    expect(svg).toContain(">m1<");
  });
});

describe("cli", () => {
  it("parses a full command line", () => {
    const req = parseArgs([
      "convergence",
      "--in",
      "a.csv",
      "b.csv",
      "--labels",
      "A",
      "B",
      "--out",
      "fig.svg",
      "--linear-y",
    ]);
    expect(req.kind).toBe("convergence");
    expect(req.inputs).toEqual(["a.csv", "b.csv"]);
    expect(req.labels).toEqual(["A", "B"]);
    expect(req.logY).toBe(false);
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(() => parseArgs(["scatter", "--in", "a", "--out", "b"])).toThrow(/unknown figure kind/);
    expect(() => parseArgs(["convergence", "--out", "b"])).toThrow(/no input files/);
    expect(() => parseArgs(["convergence", "--in", "a.csv"])).toThrow(/no output/);
  });

  it("writes the figure and reports success", () => {
    const out = join(dir, "cli-out.svg");
    const code = main(["convergence", "--in", traceA, "--out", out]);
    expect(code).toBe(0);
  });

  it("exits nonzero on schema violations", () => {
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "wrong,header\n1,2\n");
    const code = main(["convergence", "--in", bad, "--out", join(dir, "x.svg")]);
    expect(code).toBe(1);
  });

  it("exits 2 on usage errors", () => {
    expect(main([])).toBe(2);
  });
});

describe("render dispatch", () => {
  it("covers all three kinds", () => {
    for (const kind of ["convergence", "walltime"] as const) {
      const svg = render({ kind, inputs: [traceA], out: "u.svg" });
      expect(svg).toContain("</svg>");
    }
    const svg = render({ kind: "eigenspectrum", inputs: [eigs], out: "u.svg" });
    expect(svg).toContain("</svg>");
  });
});
