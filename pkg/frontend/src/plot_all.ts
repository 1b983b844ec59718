/** Regenerate every figure for a bundle directory.
 *
 * Usage: node dist/plot_all.js <bundle-dir> <out-dir>
 *
 * One SVG per manifest sweep; rerunning over the same bundle is
 * byte-idempotent. The bundle is never written to. Exits non-zero naming
 * the offending file on a malformed CSV or manifest.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { parseManifest, renderSweep } from "./plots.js";

export function plotAll(bundleDir: string, outDir: string): string[] {
  let manifestText: string;
  try {
    manifestText = readFileSync(join(bundleDir, "manifest.json"), "utf8");
  } catch {
    throw new Error(`${bundleDir}: no manifest.json (run: rdlab report --bundle ${bundleDir})`);
  }
  const manifest = parseManifest(manifestText);
  if (manifest.sweeps.length === 0) {
    console.warn(`warning: ${bundleDir}: manifest lists no sweeps; nothing to plot`);
    return [];
  }
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const sweep of manifest.sweeps) {
    const csvText = readFileSync(join(bundleDir, sweep.csv), "utf8");
    const svg = renderSweep(sweep, csvText);
    const outPath = join(outDir, `${sweep.name}.svg`);
    writeFileSync(outPath, svg);
    written.push(outPath);
  }
  return written;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("plot_all.js") || entry.endsWith("plot_all.ts")) {
  const [bundleDir, outDir] = process.argv.slice(2);
  if (!bundleDir || !outDir) {
    console.error("usage: plot_all <bundle-dir> <out-dir>");
    process.exit(2);
  }
  try {
    const files = plotAll(bundleDir, outDir);
    for (const f of files) console.log(f);
    console.log(`${files.length} figures written to ${outDir}`);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }
}
