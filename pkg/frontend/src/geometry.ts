/**
 * Backend-independent plot construction: a chart is laid out into a list of
 * drawing primitives (lines, rectangles, discs, text) in pixel coordinates,
 * which the SVG and PNG backends render identically.
 */

export type Primitive =
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; color: string; width: number; dash?: boolean }
  | { kind: "rect"; x: number; y: number; w: number; h: number; color: string }
  | { kind: "disc"; x: number; y: number; r: number; color: string }
  | { kind: "text"; x: number; y: number; s: string; color: string; size: number };

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label: string;
  markers?: boolean;
  dash?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  yLog?: boolean;
  bars?: boolean;
  series: Series[];
  width?: number;
  height?: number;
}

const MARGIN = { left: 70, right: 20, top: 28, bottom: 42 };
const PALETTE = ["#1666b0", "#c23b21", "#2e8b3c", "#8146b4", "#b8860b", "#13808a"];

export function paletteColor(i: number): string {
  return PALETTE[i % PALETTE.length];
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => span / c <= n + 1) ?? candidates[3];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) out.push(v);
  return out;
}

function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(lo); e <= Math.floor(hi) + 1e-9; e++) out.push(e);
  if (out.length === 0) out.push(Math.floor(lo), Math.ceil(hi));
  return out;
}

export function fmtTick(v: number, log: boolean): string {
  if (log) return `1e${v}`;
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return String(Math.round(v * 1e6) / 1e6);
  }
  return v.toExponential(1).replace("+", "");
}

export function layoutChart(spec: ChartSpec): { width: number; height: number; prims: Primitive[] } {
  const W = spec.width ?? 640;
  const H = spec.height ?? 420;
  const x0 = MARGIN.left;
  const x1 = W - MARGIN.right;
  const y0 = MARGIN.top;
  const y1 = H - MARGIN.bottom;
  const prims: Primitive[] = [];

  const tx = (v: number) => (spec.xLog ? Math.log10(v) : v);
  const ty = (v: number) => (spec.yLog ? Math.log10(v) : v);
  const xs = spec.series.flatMap((s) => s.x.filter((v) => Number.isFinite(tx(v)))).map(tx);
  const ys = spec.series.flatMap((s) => s.y.filter((v) => Number.isFinite(ty(v)))).map(ty);
  let xlo = Math.min(...xs), xhi = Math.max(...xs);
  let ylo = Math.min(...ys), yhi = Math.max(...ys);
  if (!Number.isFinite(xlo)) { xlo = 0; xhi = 1; }
  if (!Number.isFinite(ylo)) { ylo = 0; yhi = 1; }
  if (xhi === xlo) { xhi = xlo + 1; }
  if (yhi === ylo) { yhi = ylo + (ylo === 0 ? 1 : Math.abs(ylo) * 0.1); }
  if (spec.bars && !spec.yLog) { ylo = Math.min(ylo, 0); }
  const padx = 0.06 * (xhi - xlo);
  const pady = 0.08 * (yhi - ylo);
  xlo -= padx; xhi += padx; ylo -= pady; yhi += pady;

  const px = (v: number) => x0 + ((tx(v) - xlo) / (xhi - xlo)) * (x1 - x0);
  const py = (v: number) => y1 - ((ty(v) - ylo) / (yhi - ylo)) * (y1 - y0);

  // frame
  prims.push({ kind: "rect", x: x0, y: y0, w: x1 - x0, h: y1 - y0, color: "#fcfcfc" });
  for (const [a, b, c, d] of [[x0, y0, x1, y0], [x0, y1, x1, y1], [x0, y0, x0, y1], [x1, y0, x1, y1]] as const) {
    prims.push({ kind: "line", x1: a, y1: b, x2: c, y2: d, color: "#222222", width: 1 });
  }

  // ticks and grid
  const xticks = spec.xLog ? logTicks(xlo, xhi) : niceTicks(xlo, xhi);
  const yticks = spec.yLog ? logTicks(ylo, yhi) : niceTicks(ylo, yhi);
  for (const v of xticks) {
    const p = x0 + ((v - xlo) / (xhi - xlo)) * (x1 - x0);
    if (p < x0 - 0.5 || p > x1 + 0.5) continue;
    prims.push({ kind: "line", x1: p, y1: y0, x2: p, y2: y1, color: "#dddddd", width: 1 });
    prims.push({ kind: "line", x1: p, y1: y1, x2: p, y2: y1 + 4, color: "#222222", width: 1 });
    const label = fmtTick(v, !!spec.xLog);
    prims.push({ kind: "text", x: p - 3 * label.length, y: y1 + 14, s: label, color: "#222222", size: 1 });
  }
  for (const v of yticks) {
    const p = y1 - ((v - ylo) / (yhi - ylo)) * (y1 - y0);
    if (p < y0 - 0.5 || p > y1 + 0.5) continue;
    prims.push({ kind: "line", x1: x0, y1: p, x2: x1, y2: p, color: "#dddddd", width: 1 });
    prims.push({ kind: "line", x1: x0 - 4, y1: p, x2: x0, y2: p, color: "#222222", width: 1 });
    const label = fmtTick(v, !!spec.yLog);
    prims.push({ kind: "text", x: x0 - 8 - 6 * label.length, y: p - 3, s: label, color: "#222222", size: 1 });
  }

  // series
  spec.series.forEach((s, si) => {
    const pts: Array<[number, number]> = [];
    for (let i = 0; i < s.x.length; i++) {
      const vx = s.x[i], vy = s.y[i];
      if (!Number.isFinite(tx(vx)) || !Number.isFinite(ty(vy))) continue;
      pts.push([px(vx), py(vy)]);
    }
    if (spec.bars) {
      const bw = Math.max(6, (x1 - x0) / Math.max(1, s.x.length) / 3);
      const base = py(Math.max(ylo, 0) === 0 ? 0 : Math.pow(10, ylo));
      for (const [bx, by] of pts) {
        prims.push({ kind: "rect", x: bx - bw / 2, y: by, w: bw, h: Math.max(1, (spec.yLog ? y1 : base) - by), color: s.color });
      }
    } else {
      for (let i = 1; i < pts.length; i++) {
        prims.push({ kind: "line", x1: pts[i - 1][0], y1: pts[i - 1][1], x2: pts[i][0], y2: pts[i][1], color: s.color, width: 2, dash: s.dash });
      }
      if (s.markers ?? true) {
        for (const [mx, my] of pts) prims.push({ kind: "disc", x: mx, y: my, r: 3, color: s.color });
      }
    }
    // legend
    const ly = y0 + 14 + 13 * si;
    prims.push({ kind: "line", x1: x1 - 150, y1: ly - 3, x2: x1 - 132, y2: ly - 3, color: s.color, width: 3 });
    prims.push({ kind: "text", x: x1 - 128, y: ly - 7, s: s.label, color: "#222222", size: 1 });
  });

  prims.push({ kind: "text", x: x0, y: 10, s: spec.title, color: "#000000", size: 1 });
  prims.push({ kind: "text", x: (x0 + x1) / 2 - 3 * spec.xLabel.length, y: H - 14, s: spec.xLabel, color: "#000000", size: 1 });
  prims.push({ kind: "text", x: 6, y: y0 - 14, s: spec.yLabel, color: "#000000", size: 1 });
  return { width: W, height: H, prims };
}
