import { mkdtempSync, readFileSync, writeFileSync, mkdirSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseCsv, CsvError } from "../src/csv.js";
import { parseManifest, renderSweep } from "../src/plots.js";
import { plotAll } from "../src/plot_all.js";

function goldenBundle(): string {
  const dir = mkdtempSync(join(tmpdir(), "rdlab-bundle-"));
  writeFileSync(join(dir, "security_prac.csv"),
    "mechanism,a_both,n_bo_r,n_bo_a,worst_r1,max_hammer,secure_min_nrh\n" +
    "prac-4,1,4,4,44017,19,20\n" +
    "prac-4,2,4,4,44017,20,21\n" +
    "prac-2,1,2,2,9973,24,25\n");
  writeFileSync(join(dir, "perf.csv"),
    "mechanism,n_rh,workload,seed,weighted_speedup,max_slowdown,energy_total\n" +
    "none,1000,HHHH,0,3.1,0.0,125000\n" +
    "chronus,1000,HHHH,0,3.1,0.01,132000\n" +
    "prac,1000,HHHH,0,2.5,0.2,145000\n" +
    "chronus,20,HHHH,0,3.0,0.05,140000\n" +
    "prac,20,HHHH,0,0.4,0.9,220000\n");
  writeFileSync(join(dir, "storage.csv"),
    "mechanism,n_rh,cpu_bytes,dram_bytes\n" +
    "chronus,1000,0,8388608\n" +
    "chronus,20,0,8388608\n" +
    "graphene,1000,90000,0\n" +
    "graphene,20,4500000,0\n");
  writeFileSync(join(dir, "manifest.json"), JSON.stringify({
    schema_version: 1,
    sweeps: [
      { name: "security_prac", csv: "security_prac.csv", kind: "security_sweep" },
      { name: "perf", csv: "perf.csv", kind: "perf_by_nrh" },
      { name: "storage", csv: "storage.csv", kind: "storage_by_nrh" },
    ],
  }));
  return dir;
}

describe("csv", () => {
  it("parses and validates", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n", "t.csv");
    expect(t.columns).toEqual(["a", "b"]);
    expect(t.rows[1].b).toBe("4");
  });

  it("rejects ragged rows with the file name", () => {
    expect(() => parseCsv("a,b\n1\n", "bad.csv")).toThrowError(/bad\.csv.*row 2/);
  });
});

describe("manifest", () => {
  it("rejects wrong schema version", () => {
    expect(() => parseManifest(JSON.stringify({ schema_version: 9, sweeps: [] })))
      .toThrowError(/schema_version/);
  });
});

describe("renderSweep", () => {
  it("renders grouped bars for a security sweep", () => {
    const svg = renderSweep(
      { name: "s", csv: "s.csv", kind: "security_sweep" },
      "mechanism,a_both,n_bo_r,max_hammer\nprac-4,1,4,19\nprac-4,2,4,20\n");
    expect(svg).toContain("<svg");
    expect(svg).toContain("max activation count");
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThan(2);
  });

  it("rejects a malformed csv naming the file", () => {
    expect(() => renderSweep(
      { name: "s", csv: "s.csv", kind: "security_sweep" },
      "mechanism,a_both,max_hammer\nprac,1,banana\n")).toThrowError(CsvError);
  });
});

describe("plotAll", () => {
  it("produces one figure per sweep from a golden bundle", () => {
    const bundle = goldenBundle();
    const out = mkdtempSync(join(tmpdir(), "rdlab-figs-"));
    const files = plotAll(bundle, out);
    expect(files.length).toBe(3);
    expect(readdirSync(out).sort()).toEqual(
      ["perf.svg", "security_prac.svg", "storage.svg"]);
    for (const f of files) {
      expect(readFileSync(f, "utf8")).toContain("</svg>");
    }
  });

  it("reruns byte-identically and leaves the bundle untouched", () => {
    const bundle = goldenBundle();
    const before = readdirSync(bundle).sort();
    const out = mkdtempSync(join(tmpdir(), "rdlab-figs-"));
    plotAll(bundle, out);
    const first = Object.fromEntries(readdirSync(out).map(
      (f) => [f, readFileSync(join(out, f), "utf8")]));
    plotAll(bundle, out);
    for (const [f, content] of Object.entries(first)) {
      expect(readFileSync(join(out, f), "utf8")).toBe(content);
    }
    expect(readdirSync(bundle).sort()).toEqual(before);
  });

  it("warns and writes nothing for an empty bundle", () => {
    const bundle = mkdtempSync(join(tmpdir(), "rdlab-empty-"));
    writeFileSync(join(bundle, "manifest.json"),
      JSON.stringify({ schema_version: 1, sweeps: [] }));
    const out = join(bundle, "figs");
    expect(plotAll(bundle, out)).toEqual([]);
    expect(() => readdirSync(out)).toThrow(); // out dir never created
  });

  it("fails naming the file on a malformed csv", () => {
    const bundle = goldenBundle();
    writeFileSync(join(bundle, "perf.csv"), "mechanism,n_rh\nonly,partial,extra\n");
    const out = mkdtempSync(join(tmpdir(), "rdlab-figs-"));
    expect(() => plotAll(bundle, out)).toThrowError(/perf\.csv/);
  });
});
