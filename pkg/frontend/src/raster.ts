/**
 * PNG backend: a tiny software rasterizer plus a minimal PNG encoder
 * (zlib deflate comes with node, so no imaging dependency is needed).
 * Text uses a 5x7 bitmap font covering digits, ascii letters, and the
 * punctuation that appears in axis labels; anything else prints as space.
 */

import { deflateSync } from "zlib";
import { Primitive } from "./geometry.js";

// 5x7 glyphs, one byte per column, LSB = top row.
const FONT: Record<string, number[]> = {
  "0": [0x3e, 0x51, 0x49, 0x45, 0x3e], "1": [0x00, 0x42, 0x7f, 0x40, 0x00],
  "2": [0x42, 0x61, 0x51, 0x49, 0x46], "3": [0x21, 0x41, 0x45, 0x4b, 0x31],
  "4": [0x18, 0x14, 0x12, 0x7f, 0x10], "5": [0x27, 0x45, 0x45, 0x45, 0x39],
  "6": [0x3c, 0x4a, 0x49, 0x49, 0x30], "7": [0x01, 0x71, 0x09, 0x05, 0x03],
  "8": [0x36, 0x49, 0x49, 0x49, 0x36], "9": [0x06, 0x49, 0x49, 0x29, 0x1e],
  ".": [0x00, 0x60, 0x60, 0x00, 0x00], "-": [0x08, 0x08, 0x08, 0x08, 0x08],
  "+": [0x08, 0x08, 0x3e, 0x08, 0x08], "/": [0x20, 0x10, 0x08, 0x04, 0x02],
  "=": [0x14, 0x14, 0x14, 0x14, 0x14], "(": [0x00, 0x1c, 0x22, 0x41, 0x00],
  ")": [0x00, 0x41, 0x22, 0x1c, 0x00], ",": [0x00, 0x50, 0x30, 0x00, 0x00],
  "_": [0x40, 0x40, 0x40, 0x40, 0x40], "|": [0x00, 0x00, 0x7f, 0x00, 0x00],
  "^": [0x04, 0x02, 0x01, 0x02, 0x04], " ": [0x00, 0x00, 0x00, 0x00, 0x00],
  a: [0x20, 0x54, 0x54, 0x54, 0x78], b: [0x7f, 0x48, 0x44, 0x44, 0x38],
  c: [0x38, 0x44, 0x44, 0x44, 0x20], d: [0x38, 0x44, 0x44, 0x48, 0x7f],
  e: [0x38, 0x54, 0x54, 0x54, 0x18], f: [0x08, 0x7e, 0x09, 0x01, 0x02],
  g: [0x0c, 0x52, 0x52, 0x52, 0x3e], h: [0x7f, 0x08, 0x04, 0x04, 0x78],
  i: [0x00, 0x44, 0x7d, 0x40, 0x00], j: [0x20, 0x40, 0x44, 0x3d, 0x00],
  k: [0x7f, 0x10, 0x28, 0x44, 0x00], l: [0x00, 0x41, 0x7f, 0x40, 0x00],
  m: [0x7c, 0x04, 0x18, 0x04, 0x78], n: [0x7c, 0x08, 0x04, 0x04, 0x78],
  o: [0x38, 0x44, 0x44, 0x44, 0x38], p: [0x7c, 0x14, 0x14, 0x14, 0x08],
  q: [0x08, 0x14, 0x14, 0x18, 0x7c], r: [0x7c, 0x08, 0x04, 0x04, 0x08],
  s: [0x48, 0x54, 0x54, 0x54, 0x20], t: [0x04, 0x3f, 0x44, 0x40, 0x20],
  u: [0x3c, 0x40, 0x40, 0x20, 0x7c], v: [0x1c, 0x20, 0x40, 0x20, 0x1c],
  w: [0x3c, 0x40, 0x30, 0x40, 0x3c], x: [0x44, 0x28, 0x10, 0x28, 0x44],
  y: [0x0c, 0x50, 0x50, 0x50, 0x3c], z: [0x44, 0x64, 0x54, 0x4c, 0x44],
  E: [0x7f, 0x49, 0x49, 0x49, 0x41], O: [0x3e, 0x41, 0x41, 0x41, 0x3e],
  L: [0x7f, 0x40, 0x40, 0x40, 0x40], T: [0x01, 0x01, 0x7f, 0x01, 0x01],
  "3'": [0x21, 0x41, 0x45, 0x4b, 0x31],
};

function hexColor(c: string): [number, number, number] {
  const h = c.startsWith("#") ? c.slice(1) : c;
  return [parseInt(h.slice(0, 2), 16), parseInt(h.slice(2, 4), 16),
          parseInt(h.slice(4, 6), 16)];
}

class Canvas {
  data: Uint8Array;

  constructor(public width: number, public height: number) {
    this.data = new Uint8Array(width * height * 3).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]) {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    const o = (yi * this.width + xi) * 3;
    this.data[o] = rgb[0];
    this.data[o + 1] = rgb[1];
    this.data[o + 2] = rgb[2];
  }

  line(x1: number, y1: number, x2: number, y2: number, rgb: [number, number, number],
       width: number, dash = false) {
    const steps = Math.max(Math.abs(x2 - x1), Math.abs(y2 - y1), 1) * 2;
    for (let i = 0; i <= steps; i++) {
      if (dash && Math.floor(i / 10) % 2 === 1) continue;
      const t = i / steps;
      const x = x1 + t * (x2 - x1);
      const y = y1 + t * (y2 - y1);
      for (let dx = 0; dx < width; dx++) {
        for (let dy = 0; dy < width; dy++) {
          this.set(x + dx - (width - 1) / 2, y + dy - (width - 1) / 2, rgb);
        }
      }
    }
  }

  rect(x: number, y: number, w: number, h: number, rgb: [number, number, number]) {
    for (let yy = Math.max(0, Math.round(y)); yy < Math.min(this.height, Math.round(y + h)); yy++) {
      for (let xx = Math.max(0, Math.round(x)); xx < Math.min(this.width, Math.round(x + w)); xx++) {
        this.set(xx, yy, rgb);
      }
    }
  }

  disc(x: number, y: number, r: number, rgb: [number, number, number]) {
    for (let yy = -r; yy <= r; yy++) {
      for (let xx = -r; xx <= r; xx++) {
        if (xx * xx + yy * yy <= r * r) this.set(x + xx, y + yy, rgb);
      }
    }
  }

  text(x: number, y: number, s: string, rgb: [number, number, number]) {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const ch of s) {
      const glyph = FONT[ch] ?? FONT[ch.toLowerCase()] ?? FONT[" "];
      for (let col = 0; col < 5; col++) {
        for (let row = 0; row < 7; row++) {
          if ((glyph[col] >> row) & 1) this.set(cx + col, cy + row, rgb);
        }
      }
      cx += 6;
    }
  }
}

function crc32(buf: Uint8Array): number {
  let crc = ~0;
  for (let i = 0; i < buf.length; i++) {
    crc ^= buf[i];
    for (let k = 0; k < 8; k++) {
      crc = (crc >>> 1) ^ (0xedb88320 & -(crc & 1));
    }
  }
  return ~crc >>> 0;
}

function chunk(type: string, body: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + body.length);
  const dv = new DataView(out.buffer);
  dv.setUint32(0, body.length);
  out.set([...type].map((c) => c.charCodeAt(0)), 4);
  out.set(body, 8);
  const crced = new Uint8Array(4 + body.length);
  crced.set(out.subarray(4, 8), 0);
  crced.set(body, 4);
  dv.setUint32(8 + body.length, crc32(crced));
  return out;
}

export function encodePng(canvas: Canvas): Buffer {
  const { width, height, data } = canvas;
  const ihdr = new Uint8Array(13);
  const dv = new DataView(ihdr.buffer);
  dv.setUint32(0, width);
  dv.setUint32(4, height);
  ihdr[8] = 8;    // bit depth
  ihdr[9] = 2;    // truecolor
  const raw = new Uint8Array(height * (1 + width * 3));
  for (let y = 0; y < height; y++) {
    raw[y * (1 + width * 3)] = 0;   // filter: none
    raw.set(data.subarray(y * width * 3, (y + 1) * width * 3), y * (1 + width * 3) + 1);
  }
  const sig = Uint8Array.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
  return Buffer.concat([
    sig,
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

export function renderPng(width: number, height: number, prims: Primitive[]): Buffer {
  const canvas = new Canvas(width, height);
  for (const p of prims) {
    switch (p.kind) {
      case "rect":
        canvas.rect(p.x, p.y, p.w, p.h, hexColor(p.color));
        break;
      case "line":
        canvas.line(p.x1, p.y1, p.x2, p.y2, hexColor(p.color), p.width, p.dash);
        break;
      case "disc":
        canvas.disc(Math.round(p.x), Math.round(p.y), p.r, hexColor(p.color));
        break;
      case "text":
        canvas.text(p.x, p.y + 2, p.s, hexColor(p.color));
        break;
    }
  }
  return encodePng(canvas);
}
