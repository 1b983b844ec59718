/** Map bundle sweep kinds onto figures. Reads only the documented CSV
 * schemas; no simulation logic lives here. */

import { CsvError, numeric, parseCsv, Table } from "./csv.js";
import { BarGroup, groupedBars, lineChart, LineSeries } from "./svg.js";

export interface SweepEntry {
  name: string;
  csv: string;
  kind: string;
}

export interface Manifest {
  schema_version: number;
  sweeps: SweepEntry[];
}

export const MANIFEST_SCHEMA_VERSION = 1;

export function parseManifest(text: string): Manifest {
  const data = JSON.parse(text) as Partial<Manifest>;
  if (data.schema_version !== MANIFEST_SCHEMA_VERSION) {
    throw new Error(`manifest schema_version ${data.schema_version} != ${MANIFEST_SCHEMA_VERSION}`);
  }
  if (!Array.isArray(data.sweeps)) {
    throw new Error("manifest: sweeps must be an array");
  }
  for (const s of data.sweeps) {
    if (typeof s.name !== "string" || typeof s.csv !== "string" || typeof s.kind !== "string") {
      throw new Error(`manifest: bad sweep entry ${JSON.stringify(s)}`);
    }
  }
  return data as Manifest;
}

function pickKey(table: Table, candidates: string[]): string | undefined {
  return candidates.find((c) => table.columns.includes(c));
}

function securitySweep(name: string, table: Table, file: string): string {
  const xKey = pickKey(table, ["a_both", "rfm_th", "n_bo"]);
  if (!xKey) throw new CsvError(file, "no threshold column (a_both/rfm_th/n_bo)");
  const hueKey = pickKey(table, ["n_bo_r"]) ?? pickKey(table, ["mechanism"]);
  numeric(table, "max_hammer", file);
  const groups = new Map<string, BarGroup>();
  for (const row of table.rows) {
    const label = row[xKey];
    if (!groups.has(label)) groups.set(label, { label, values: [] });
    groups.get(label)!.values.push({
      series: hueKey ? row[hueKey] : "max_hammer",
      value: Number(row.max_hammer),
    });
  }
  return groupedBars(`${name}: maximum activations to a row`,
    [...groups.values()], { xLabel: xKey, yLabel: "max activation count", logY: true });
}

function perfByNrh(name: string, table: Table, file: string): string {
  const yKey = pickKey(table, ["weighted_speedup", "energy_total"]);
  if (!yKey || !table.columns.includes("n_rh") || !table.columns.includes("mechanism")) {
    throw new CsvError(file, "expected columns mechanism, n_rh, weighted_speedup|energy_total");
  }
  numeric(table, yKey, file);
  const order = [...new Set(table.rows.map((r) => Number(r.n_rh)))].sort((a, b) => b - a);
  const groups: BarGroup[] = order.map((n) => ({ label: String(n), values: [] }));
  for (const row of table.rows) {
    const g = groups[order.indexOf(Number(row.n_rh))];
    g.values.push({ series: row.mechanism, value: Number(row[yKey]) });
  }
  return groupedBars(`${name}: ${yKey} by threshold`, groups,
    { xLabel: "rowhammer threshold", yLabel: yKey });
}

function storageByNrh(name: string, table: Table, file: string): string {
  for (const col of ["mechanism", "n_rh", "cpu_bytes", "dram_bytes"]) {
    if (!table.columns.includes(col)) throw new CsvError(file, `missing column ${col}`);
  }
  numeric(table, "cpu_bytes", file);
  numeric(table, "dram_bytes", file);
  const byMech = new Map<string, LineSeries>();
  for (const row of table.rows) {
    const total = Number(row.cpu_bytes) + Number(row.dram_bytes);
    const key = row.mechanism;
    if (!byMech.has(key)) byMech.set(key, { name: key, points: [] });
    byMech.get(key)!.points.push({ x: Number(row.n_rh), y: Math.max(total, 1) });
  }
  return lineChart(`${name}: mitigation storage vs threshold`,
    [...byMech.values()], { xLabel: "rowhammer threshold", yLabel: "bytes", logY: true });
}

function genericTable(name: string, table: Table, file: string): string {
  const xKey = table.columns[0];
  const yKey = table.columns.find((c) => table.rows.length > 0 &&
    table.rows.every((r) => Number.isFinite(Number(r[c]))) && c !== xKey);
  if (!yKey) throw new CsvError(file, "no numeric column to plot");
  const groups: BarGroup[] = table.rows.map((r) => ({
    label: r[xKey], values: [{ series: yKey, value: Number(r[yKey]) }],
  }));
  return groupedBars(`${name}`, groups, { xLabel: xKey, yLabel: yKey });
}

export function renderSweep(entry: SweepEntry, csvText: string): string {
  const table = parseCsv(csvText, entry.csv);
  if (table.rows.length === 0) {
    throw new CsvError(entry.csv, "empty table");
  }
  switch (entry.kind) {
    case "security_sweep":
      return securitySweep(entry.name, table, entry.csv);
    case "perf_by_nrh":
      return perfByNrh(entry.name, table, entry.csv);
    case "storage_by_nrh":
      return storageByNrh(entry.name, table, entry.csv);
    default:
      return genericTable(entry.name, table, entry.csv);
  }
}
