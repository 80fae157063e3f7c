/** Self-contained SVG line-plot renderer (no DOM, no external renderer). */

import { missingColumns, Table } from "./csv.js";
import { PlotSpec } from "./plotspec.js";

export class PlotDataError extends Error {}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { left: 64, right: 16, top: 34, bottom: 46 };

interface Axis {
  toPixel(value: number): number;
  ticks: number[];
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function linearAxis(min: number, max: number, p0: number, p1: number): Axis {
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const step = niceStep(max - min, 5);
  const ticks: number[] = [];
  for (let t = Math.ceil(min / step) * step; t <= max + 1e-12 * step; t += step) {
    ticks.push(Math.abs(t) < 1e-12 * step ? 0 : t);
  }
  return {
    toPixel: (v) => p0 + ((v - min) / (max - min)) * (p1 - p0),
    ticks,
  };
}

function logAxis(min: number, max: number, p0: number, p1: number): Axis {
  let lo = Math.floor(Math.log10(min));
  let hi = Math.ceil(Math.log10(max));
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) ticks.push(Math.pow(10, e));
  return {
    toPixel: (v) =>
      p0 + ((Math.log10(v) - lo) / (hi - lo)) * (p1 - p0),
    ticks,
  };
}

function tickLabel(value: number): string {
  if (value === 0) return "0";
  const exp = Math.floor(Math.log10(Math.abs(value)));
  if (exp < -3 || exp >= 5) return value.toExponential(0).replace("+", "");
  const digits = Math.max(0, 3 - exp);
  return Number(value.toFixed(digits)).toString();
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const px = (v: number) => v.toFixed(2);

/** Render a validated spec against a parsed table. */
export function renderPlot(table: Table, spec: PlotSpec, source = "<table>"): string {
  const wanted = [spec.x.column, ...spec.series.map((s) => s.column)];
  const missing = missingColumns(table, wanted);
  if (missing.length > 0) {
    throw new PlotDataError(
      `${source}: missing columns ${missing.join(", ")} ` +
        `(available: ${table.names.join(", ")})`,
    );
  }
  const xs = table.columns.get(spec.x.column)!;
  const seriesValues = spec.series.map((s) => table.columns.get(s.column)!);
  const ys = seriesValues.flat();
  if (spec.y.scale === "log") {
    for (const s of spec.series) {
      const bad = table.columns.get(s.column)!.findIndex((v) => v <= 0);
      if (bad >= 0) {
        throw new PlotDataError(
          `${source}: column ${s.column} has non-positive value at row ${bad}; ` +
            `a log axis needs positive data`,
        );
      }
    }
  }
  const W = spec.width;
  const H = spec.height;
  const xAxis = linearAxis(Math.min(...xs), Math.max(...xs), MARGIN.left, W - MARGIN.right);
  const yRange: [number, number] = [H - MARGIN.bottom, MARGIN.top];
  const yAxis =
    spec.y.scale === "log"
      ? logAxis(Math.min(...ys), Math.max(...ys), ...yRange)
      : linearAxis(Math.min(...ys), Math.max(...ys), ...yRange);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" ` +
      `viewBox="0 0 ${W} ${H}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  if (spec.title) {
    parts.push(
      `<text x="${px(W / 2)}" y="20" text-anchor="middle" font-size="14">` +
        `${esc(spec.title)}</text>`,
    );
  }
  // gridlines + tick labels
  for (const t of xAxis.ticks) {
    const x = px(xAxis.toPixel(t));
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${H - MARGIN.bottom}" ` +
        `stroke="#ddd"/>`,
      `<text x="${x}" y="${H - MARGIN.bottom + 16}" text-anchor="middle">` +
        `${tickLabel(t)}</text>`,
    );
  }
  for (const t of yAxis.ticks) {
    const y = px(yAxis.toPixel(t));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${W - MARGIN.right}" y2="${y}" ` +
        `stroke="#ddd"/>`,
      `<text x="${MARGIN.left - 6}" y="${y}" dy="4" text-anchor="end">` +
        `${tickLabel(t)}</text>`,
    );
  }
  // frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" ` +
      `width="${W - MARGIN.left - MARGIN.right}" ` +
      `height="${H - MARGIN.top - MARGIN.bottom}" fill="none" stroke="#333"/>`,
  );
  // series
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = xs
      .map((x, r) => `${px(xAxis.toPixel(x))},${px(yAxis.toPixel(seriesValues[i][r]))}`)
      .join(" ");
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
    );
    const ly = MARGIN.top + 14 + 16 * i;
    const lx = W - MARGIN.right - 130;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 20}" y2="${ly - 4}" ` +
        `stroke="${color}" stroke-width="1.5"/>`,
      `<text x="${lx + 26}" y="${ly}">${esc(s.label ?? s.column)}</text>`,
    );
  });
  // axis labels
  if (spec.x.label) {
    parts.push(
      `<text x="${px((MARGIN.left + W - MARGIN.right) / 2)}" y="${H - 10}" ` +
        `text-anchor="middle">${esc(spec.x.label)}</text>`,
    );
  }
  if (spec.y.label) {
    const cy = (MARGIN.top + H - MARGIN.bottom) / 2;
    parts.push(
      `<text x="16" y="${px(cy)}" text-anchor="middle" ` +
        `transform="rotate(-90 16 ${px(cy)})">${esc(spec.y.label)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
