/**
 * Manifest loading and schema checks for sweep outputs.
 */

import { readFile } from "fs/promises";
import path from "path";
import { SchemaError } from "./csv.js";

export interface RunEntry {
  nu: number;
  sup_eta_l2: number;
  sqrt_nu_grad_eta_l2l2: number;
  sup_omega3_l2: number;
  err_to_euler: number;
  y_final: number;
  eta0_l2: number;
  csv: string;
  failed: boolean;
}

export interface Fit {
  slope: number;
  intercept: number;
  ci_halfwidth: number;
  stderr: number;
  n_points: number;
}

export interface Manifest {
  schema: number;
  tool_version: string;
  config: { nu_list: number[]; [k: string]: unknown };
  local_box: unknown;
  euler: RunEntry;
  runs: RunEntry[];
  fit_sup_eta_vs_nu: Fit | null;
  flags: string[];
}

export const SUPPORTED_SCHEMA = 1;

export async function loadManifest(manifestPath: string): Promise<Manifest> {
  const raw = JSON.parse(await readFile(manifestPath, "utf8"));
  if (raw.schema !== SUPPORTED_SCHEMA) {
    throw new SchemaError(
      `manifest schema ${raw.schema} unsupported (expected ${SUPPORTED_SCHEMA})`,
    );
  }
  for (const key of ["config", "euler", "runs", "fit_sup_eta_vs_nu"]) {
    if (!(key in raw)) {
      throw new SchemaError(`manifest: missing key '${key}'`);
    }
  }
  return raw as Manifest;
}

export function csvPathFor(manifestPath: string, entry: RunEntry): string {
  return path.join(path.dirname(manifestPath), entry.csv);
}
