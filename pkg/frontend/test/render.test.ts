import { createHash } from "crypto";
import { mkdtemp, readFile, readdir, writeFile, mkdir, cp } from "fs/promises";
import os from "os";
import path from "path";
import { beforeAll, describe, expect, it } from "vitest";

import { parseRunCsv, supColumn } from "../src/csv.js";
import { fitLogLog } from "../src/fit.js";
import { loadManifest } from "../src/manifest.js";
import { render } from "../src/render.js";

const FIXTURE = path.join(__dirname, "..", "fixtures", "sweep");

async function hashAll(dir: string): Promise<Map<string, string>> {
  const out = new Map<string, string>();
  for (const f of await readdir(dir)) {
    const p = path.join(dir, f);
    out.set(f, createHash("sha256").update(await readFile(p)).digest("hex"));
  }
  return out;
}

describe("slope refit against the producer", () => {
  it("matches the manifest slope to 1e-9", async () => {
    const manifest = await loadManifest(path.join(FIXTURE, "manifest.json"));
    const points: Array<[number, number]> = [];
    for (const run of manifest.runs) {
      const table = parseRunCsv(
        await readFile(path.join(FIXTURE, run.csv), "utf8"), run.csv);
      points.push([run.nu, supColumn(table, "eta_l2")]);
    }
    const fit = fitLogLog(points);
    expect(manifest.fit_sup_eta_vs_nu).not.toBeNull();
    expect(Math.abs(fit.slope - manifest.fit_sup_eta_vs_nu!.slope))
      .toBeLessThanOrEqual(1e-9);
  });
});

describe("render", () => {
  for (const format of ["svg", "png"] as const) {
    it(`produces figures and an intact input set (${format})`, async () => {
      const out = await mkdtemp(path.join(os.tmpdir(), "report-"));
      const before = await hashAll(FIXTURE);
      const result = await render({
        manifestPath: path.join(FIXTURE, "manifest.json"),
        outDir: out,
        format,
      });
      const after = await hashAll(FIXTURE);
      expect(result.checksumsUnchanged).toBe(true);
      expect(after).toEqual(before);

      const names = result.figures.map((f) => path.basename(f));
      expect(names).toEqual([
        `swirl_scaling.${format}`,
        `omega3_uniformity.${format}`,
        `convergence.${format}`,
        `energy_budget.${format}`,
      ]);
      for (const f of result.figures) {
        const buf = await readFile(f);
        expect(buf.length).toBeGreaterThan(500);
        if (format === "png") {
          expect(buf.subarray(1, 4).toString()).toBe("PNG");
        } else {
          expect(buf.toString("utf8")).toContain("<svg");
        }
      }
      const summary = await readFile(result.summaryPath, "utf8");
      expect(summary).toContain("swirl-scaling slope (refit from CSV)");
      expect(summary).toContain(String(result.refitSlope));
    });
  }

  it("hard-errors when the manifest slope disagrees", async () => {
    const out = await mkdtemp(path.join(os.tmpdir(), "report-"));
    const bundleDir = await mkdtemp(path.join(os.tmpdir(), "bundle-"));
    await cp(FIXTURE, bundleDir, { recursive: true });
    const mpath = path.join(bundleDir, "manifest.json");
    const manifest = JSON.parse(await readFile(mpath, "utf8"));
    manifest.fit_sup_eta_vs_nu.slope += 1e-6;
    await writeFile(mpath, JSON.stringify(manifest));
    await expect(render({ manifestPath: mpath, outDir: out, format: "svg" }))
      .rejects.toThrow(/slope refit disagrees/);
  });

  it("handles an empty sweep with a no-runs summary and zero figures", async () => {
    const out = await mkdtemp(path.join(os.tmpdir(), "report-"));
    const bundleDir = await mkdtemp(path.join(os.tmpdir(), "bundle-"));
    await cp(FIXTURE, bundleDir, { recursive: true });
    const mpath = path.join(bundleDir, "manifest.json");
    const manifest = JSON.parse(await readFile(mpath, "utf8"));
    manifest.runs = [];
    manifest.fit_sup_eta_vs_nu = null;
    await writeFile(mpath, JSON.stringify(manifest));
    const result = await render({ manifestPath: mpath, outDir: out, format: "svg" });
    expect(result.figures).toEqual([]);
    const summary = await readFile(result.summaryPath, "utf8");
    expect(summary).toContain("no runs");
  });

  it("rejects a wrong manifest schema", async () => {
    const out = await mkdtemp(path.join(os.tmpdir(), "report-"));
    const bundleDir = await mkdtemp(path.join(os.tmpdir(), "bundle-"));
    await cp(FIXTURE, bundleDir, { recursive: true });
    const mpath = path.join(bundleDir, "manifest.json");
    const manifest = JSON.parse(await readFile(mpath, "utf8"));
    manifest.schema = 99;
    await writeFile(mpath, JSON.stringify(manifest));
    await expect(render({ manifestPath: mpath, outDir: out, format: "svg" }))
      .rejects.toThrow(/schema 99 unsupported/);
  });

  it("names a missing CSV column in its error", async () => {
    const out = await mkdtemp(path.join(os.tmpdir(), "report-"));
    const bundleDir = await mkdtemp(path.join(os.tmpdir(), "bundle-"));
    await cp(FIXTURE, bundleDir, { recursive: true });
    const victim = path.join(bundleDir, "run_nu_0.05.csv");
    const text = await readFile(victim, "utf8");
    const lines = text.split("\n");
    lines[0] = lines[0].replace(",eta_l2", "");
    await writeFile(victim, lines.join("\n"));
    await expect(render({
      manifestPath: path.join(bundleDir, "manifest.json"),
      outDir: out, format: "svg",
    })).rejects.toThrow(/missing column 'eta_l2'/);
  });
});
