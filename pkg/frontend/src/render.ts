/**
 * End-to-end report generation.
 *
 * Reads manifest.json + per-run CSVs, refits the swirl-scaling slope from the
 * raw CSV data (independently of the producer), verifies it against the
 * manifest to 1e-9, renders one figure per acceptance quantity, and writes a
 * markdown summary. Inputs are read-only; sha256 checksums taken before and
 * after rendering guarantee it.
 */

import { createHash } from "crypto";
import { mkdir, readFile, writeFile } from "fs/promises";
import path from "path";

import { CSV_COLUMNS, RunTable, SchemaError, parseRunCsv, supColumn } from "./csv.js";
import { fitLogLog } from "./fit.js";
import { ChartSpec, layoutChart, paletteColor } from "./geometry.js";
import { Manifest, RunEntry, csvPathFor, loadManifest } from "./manifest.js";
import { renderPng } from "./raster.js";
import { renderSvg } from "./svg.js";

export interface Bundle {
  manifestPath: string;
  outDir: string;
  format: "png" | "svg";
}

export interface ReportResult {
  figures: string[];
  summaryPath: string;
  refitSlope: number | null;
  slopeAgreement: number | null;
  checksumsUnchanged: boolean;
}

const SLOPE_TOL = 1e-9;

async function sha256(file: string): Promise<string> {
  return createHash("sha256").update(await readFile(file)).digest("hex");
}

async function writeChart(spec: ChartSpec, file: string, format: "png" | "svg") {
  const { width, height, prims } = layoutChart(spec);
  if (format === "svg") {
    await writeFile(file, renderSvg(width, height, prims));
  } else {
    await writeFile(file, renderPng(width, height, prims));
  }
}

export async function render(bundle: Bundle): Promise<ReportResult> {
  const manifest = await loadManifest(bundle.manifestPath);
  const inputs = [bundle.manifestPath];
  const runs = manifest.runs.filter((r) => !r.failed);
  const tables = new Map<number, RunTable>();
  for (const run of runs) {
    const p = csvPathFor(bundle.manifestPath, run);
    inputs.push(p);
    tables.set(run.nu, parseRunCsv(await readFile(p, "utf8"), run.csv));
  }
  const eulerPath = csvPathFor(bundle.manifestPath, manifest.euler);
  inputs.push(eulerPath);
  const eulerTable = parseRunCsv(await readFile(eulerPath, "utf8"), manifest.euler.csv);

  const before = await Promise.all(inputs.map(sha256));
  await mkdir(bundle.outDir, { recursive: true });

  const figures: string[] = [];
  let refitSlope: number | null = null;
  let agreement: number | null = null;

  if (runs.length === 0) {
    const summaryPath = path.join(bundle.outDir, "summary.md");
    await writeFile(summaryPath, "# Sweep report\n\nno runs\n");
    const after = await Promise.all(inputs.map(sha256));
    return {
      figures,
      summaryPath,
      refitSlope,
      slopeAgreement: agreement,
      checksumsUnchanged: before.every((h, i) => h === after[i]),
    };
  }

  // independent refit of sup_t ||eta|| against nu from the raw CSV rows
  const points: Array<[number, number]> = runs.map((r) => [
    r.nu,
    supColumn(tables.get(r.nu)!, "eta_l2"),
  ]);
  if (points.length >= 3) {
    const fit = fitLogLog(points);
    refitSlope = fit.slope;
    const reported = manifest.fit_sup_eta_vs_nu;
    if (reported === null) {
      throw new SchemaError("manifest has >= 3 runs but no fit to verify");
    }
    agreement = Math.abs(fit.slope - reported.slope);
    if (agreement > SLOPE_TOL) {
      throw new Error(
        `slope refit disagrees with manifest: |${fit.slope} - ${reported.slope}|` +
        ` = ${agreement} > ${SLOPE_TOL}`,
      );
    }
  }

  const ext = bundle.format;
  const nus = runs.map((r) => r.nu);

  // 1. swirl scaling, log-log, with the fitted line
  {
    const sup = points.map(([, v]) => v);
    const series = [
      { x: nus, y: sup, color: paletteColor(0), label: "sup eta_l2" },
    ];
    if (refitSlope !== null) {
      const fit = fitLogLog(points);
      series.push({
        x: nus,
        y: nus.map((nu) => Math.exp(fit.intercept + fit.slope * Math.log(nu))),
        color: paletteColor(1),
        label: `fit slope ${fit.slope.toFixed(3)}`,
        markers: false,
        dash: true,
      } as (typeof series)[number]);
    }
    const f = path.join(bundle.outDir, `swirl_scaling.${ext}`);
    await writeChart({
      title: "swirl scaling: sup_t |eta|_2 vs nu (slope 1 expected)",
      xLabel: "nu", yLabel: "sup eta", xLog: true, yLog: true, series,
    }, f, bundle.format);
    figures.push(f);
  }

  // 2. Omega3 uniformity bars
  {
    const f = path.join(bundle.outDir, `omega3_uniformity.${ext}`);
    await writeChart({
      title: "sup_t |Omega3|_2 across the sweep (uniform in nu)",
      xLabel: "nu", yLabel: "sup Omega3", xLog: true, bars: true,
      series: [{
        x: nus,
        y: runs.map((r) => r.sup_omega3_l2),
        color: paletteColor(2),
        label: "sup Omega3_l2",
      }],
    }, f, bundle.format);
    figures.push(f);
  }

  // 3. convergence to the Euler reference
  {
    const f = path.join(bundle.outDir, `convergence.${ext}`);
    await writeChart({
      title: "distance to the Euler flow, L2(0,T; L2(U))",
      xLabel: "nu", yLabel: "err", xLog: true, yLog: true,
      series: [{
        x: nus,
        y: runs.map((r) => r.err_to_euler),
        color: paletteColor(3),
        label: "err_to_euler",
      }],
    }, f, bundle.format);
    figures.push(f);
  }

  // 4. energy budget per run: ||u||^2 + 2 integral of dissipation vs t
  {
    const series = runs.map((r, i) => {
      const t = tables.get(r.nu)!;
      const budget: number[] = [];
      let acc = 0;
      for (let k = 0; k < t.t.length; k++) {
        if (k > 0) {
          acc += 0.5 * (t.dissipation[k] + t.dissipation[k - 1]) * (t.t[k] - t.t[k - 1]);
        }
        budget.push(2 * t.energy[k] + 2 * acc);
      }
      return {
        x: t.t, y: budget, color: paletteColor(i),
        label: `nu=${r.nu}`, markers: false,
      };
    });
    series.push({
      x: eulerTable.t, y: eulerTable.energy.map((e) => 2 * e),
      color: "#555555", label: "euler", markers: false,
    });
    const f = path.join(bundle.outDir, `energy_budget.${ext}`);
    await writeChart({
      title: "energy budget |u|^2 + 2 int dissipation",
      xLabel: "t", yLabel: "budget", series,
    }, f, bundle.format);
    figures.push(f);
  }

  // summary table
  const lines = [
    "# Sweep report",
    "",
    `- tool: ${manifest.tool_version}`,
    `- runs: ${runs.length}, euler reference included`,
    refitSlope !== null
      ? `- swirl-scaling slope (refit from CSV): ${refitSlope}`
      : "- swirl-scaling slope: not enough runs to fit",
    manifest.fit_sup_eta_vs_nu
      ? `- manifest slope: ${manifest.fit_sup_eta_vs_nu.slope} ` +
        `(ci halfwidth ${manifest.fit_sup_eta_vs_nu.ci_halfwidth}); ` +
        `agreement ${agreement}`
      : "- manifest slope: none",
    "",
    "| nu | sup eta_l2 | sup Omega3_l2 | err_to_euler | sqrt(nu)|grad eta| |",
    "|---:|-----------:|--------------:|-------------:|-------------------:|",
    ...runs.map((r) =>
      `| ${r.nu} | ${r.sup_eta_l2} | ${r.sup_omega3_l2} | ${r.err_to_euler} | ` +
      `${r.sqrt_nu_grad_eta_l2l2} |`),
    "",
    `figures: ${figures.map((f) => path.basename(f)).join(", ")}`,
    "",
  ];
  if (manifest.flags.length > 0) {
    lines.push("flags:", ...manifest.flags.map((x) => `- ${x}`), "");
  }
  const summaryPath = path.join(bundle.outDir, "summary.md");
  await writeFile(summaryPath, lines.join("\n"));

  const after = await Promise.all(inputs.map(sha256));
  const unchanged = before.every((h, i) => h === after[i]);
  if (!unchanged) {
    throw new Error("input files changed during rendering");
  }
  return {
    figures,
    summaryPath,
    refitSlope,
    slopeAgreement: agreement,
    checksumsUnchanged: unchanged,
  };
}
