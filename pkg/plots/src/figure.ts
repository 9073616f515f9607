/**
 * Pure figure model: turns validated result rows into plottable series plus
 * the axis scales.  Rendering (svg.ts) only applies these scales, so tests
 * can invert any plotted geometry back to the data.
 */

import { ResultRow, SchemaError } from "./csv";

export type Panel = "a" | "b" | "c";

export interface MethodStyle {
  label: string;
  color: string;
}

/** Fixed method ordering and styling for every figure. */
export const METHOD_STYLES: ReadonlyArray<[string, MethodStyle]> = [
  ["ig", { label: "single-intervention recombination", color: "#1b9e77" }],
  ["topline", { label: "joint-trained topline", color: "#377eb8" }],
  ["pooled", { label: "pooled (no regime labels)", color: "#e7298a" }],
  ["obs_only", { label: "observational only", color: "#e6ab02" }],
];

export interface SeriesPoint {
  x: number | null;
  mean: number;
  sem: number | null;
}

export interface Series {
  method: string;
  label: string;
  color: string;
  points: SeriesPoint[];
}

export interface LinearScale {
  domainMin: number;
  domainMax: number;
  rangeMin: number;
  rangeMax: number;
  log: boolean;
}

export function applyScale(scale: LinearScale, value: number): number {
  const v = scale.log ? Math.log10(value) : value;
  const lo = scale.log ? Math.log10(scale.domainMin) : scale.domainMin;
  const hi = scale.log ? Math.log10(scale.domainMax) : scale.domainMax;
  const t = hi === lo ? 0.5 : (v - lo) / (hi - lo);
  return scale.rangeMin + t * (scale.rangeMax - scale.rangeMin);
}

export function invertScale(scale: LinearScale, coord: number): number {
  const lo = scale.log ? Math.log10(scale.domainMin) : scale.domainMin;
  const hi = scale.log ? Math.log10(scale.domainMax) : scale.domainMax;
  const t = (coord - scale.rangeMin) / (scale.rangeMax - scale.rangeMin);
  const v = lo + t * (hi - lo);
  return scale.log ? Math.pow(10, v) : v;
}

export interface FigureModel {
  panel: Panel;
  series: Series[];
  xScale: LinearScale | null; // null for the categorical bar panel
  yScale: LinearScale;
  width: number;
  height: number;
  margin: { left: number; right: number; top: number; bottom: number };
}

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { left: 70, right: 20, top: 30, bottom: 70 };

export function buildFigure(panel: Panel, rows: ResultRow[]): FigureModel {
  const relevant = rows.filter((r) => r.panel === panel);
  if (relevant.length === 0) {
    const present = [...new Set(rows.map((r) => r.panel))].join(", ");
    throw new SchemaError(`no rows for panel '${panel}' (file contains: ${present})`);
  }
  if (panel !== "a" && relevant.some((r) => r.sweepValue === null)) {
    throw new SchemaError(`panel '${panel}' rows must carry a sweep_value`);
  }

  const series: Series[] = [];
  for (const [method, style] of METHOD_STYLES) {
    const points = relevant
      .filter((r) => r.method === method)
      .map((r) => ({ x: r.sweepValue, mean: r.meanRmse, sem: r.sem }))
      .sort((p, q) => (p.x ?? 0) - (q.x ?? 0));
    if (points.length > 0) {
      series.push({ method, label: style.label, color: style.color, points });
    }
  }
  const known = new Set(METHOD_STYLES.map(([m]) => m));
  const unknown = [...new Set(relevant.map((r) => r.method).filter((m) => !known.has(m)))];
  if (unknown.length > 0) {
    throw new SchemaError(`unknown methods in CSV: ${unknown.join(", ")}`);
  }

  const highs = series.flatMap((s) => s.points.map((p) => p.mean + (p.sem ?? 0)));
  const yMax = Math.max(...highs) * 1.08;
  const yScale: LinearScale = {
    domainMin: 0,
    domainMax: yMax > 0 ? yMax : 1,
    rangeMin: HEIGHT - MARGIN.bottom,
    rangeMax: MARGIN.top,
    log: false,
  };

  let xScale: LinearScale | null = null;
  if (panel !== "a") {
    const xs = series.flatMap((s) => s.points.map((p) => p.x as number));
    const xMin = Math.min(...xs);
    const xMax = Math.max(...xs);
    xScale = {
      domainMin: xMin,
      domainMax: xMax > xMin ? xMax : xMin + 1,
      rangeMin: MARGIN.left,
      rangeMax: WIDTH - MARGIN.right,
      log: panel === "c", // sample-size sweeps read best on a log axis
    };
    if (panel === "c" && xMin <= 0) {
      throw new SchemaError("panel 'c' sweep values must be positive for the log axis");
    }
  }

  return { panel, series, xScale, yScale, width: WIDTH, height: HEIGHT, margin: MARGIN };
}

/** Plotted series of a figure, exactly as they will appear in the geometry. */
export function extractSeries(model: FigureModel): Record<string, SeriesPoint[]> {
  const out: Record<string, SeriesPoint[]> = {};
  for (const s of model.series) {
    out[s.method] = s.points.map((p) => ({ ...p }));
  }
  return out;
}
