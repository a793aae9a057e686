#!/usr/bin/env node
/**
 * report-gen --manifest <path> --out <dir> [--format png|svg]
 *
 * Turns a helix-visc sweep output (manifest.json + per-run CSVs) into the
 * acceptance figures and a markdown summary, re-verifying the swirl-scaling
 * fit from the raw CSV on the way.
 */

import { render } from "./render.js";

function parseArgs(argv: string[]) {
  const out: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--manifest" || a === "--out" || a === "--format") {
      out[a.slice(2)] = argv[++i];
    } else {
      throw new Error(`unknown argument ${a}`);
    }
  }
  if (!out.manifest || !out.out) {
    throw new Error("usage: report-gen --manifest <path> --out <dir> [--format png|svg]");
  }
  const format = out.format ?? "svg";
  if (format !== "png" && format !== "svg") {
    throw new Error(`format must be png or svg, got ${format}`);
  }
  return { manifestPath: out.manifest, outDir: out.out, format: format as "png" | "svg" };
}

async function main() {
  try {
    const bundle = parseArgs(process.argv.slice(2));
    const result = await render(bundle);
    console.log(`wrote ${result.summaryPath}`);
    for (const f of result.figures) console.log(`wrote ${f}`);
    if (result.refitSlope !== null) {
      console.log(`slope refit: ${result.refitSlope} ` +
                  `(|delta| vs manifest: ${result.slopeAgreement})`);
    }
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }
}

main();
