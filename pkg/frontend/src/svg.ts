/**
 * SVG backend: primitives to a standalone .svg document.
 */

import { Primitive } from "./geometry.js";

export function renderSvg(width: number, height: number, prims: Primitive[]): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="monospace" font-size="11">`,
  );
  parts.push(`<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>`);
  for (const p of prims) {
    switch (p.kind) {
      case "rect":
        parts.push(`<rect x="${f(p.x)}" y="${f(p.y)}" width="${f(p.w)}" height="${f(p.h)}" fill="${p.color}"/>`);
        break;
      case "line": {
        const dash = p.dash ? ` stroke-dasharray="6 4"` : "";
        parts.push(
          `<line x1="${f(p.x1)}" y1="${f(p.y1)}" x2="${f(p.x2)}" y2="${f(p.y2)}" ` +
          `stroke="${p.color}" stroke-width="${p.width}"${dash}/>`,
        );
        break;
      }
      case "disc":
        parts.push(`<circle cx="${f(p.x)}" cy="${f(p.y)}" r="${p.r}" fill="${p.color}"/>`);
        break;
      case "text":
        parts.push(`<text x="${f(p.x)}" y="${f(p.y + 8)}" fill="${p.color}">${esc(p.s)}</text>`);
        break;
    }
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function f(v: number): string {
  return String(Math.round(v * 100) / 100);
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
