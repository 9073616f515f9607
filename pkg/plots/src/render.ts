/** End-to-end rendering: CSV text -> validated rows -> figure model -> SVG. */

import { readFileSync, writeFileSync } from "node:fs";

import { parseResultsCsv } from "./csv";
import { FigureModel, Panel, buildFigure } from "./figure";
import { renderSvg } from "./svg";

export interface FigureSpec {
  panel: Panel;
  inputCsv: string;
  outputSvg: string;
}

export interface RenderResult {
  model: FigureModel;
  svg: string;
}

export function renderFromText(panel: Panel, csvText: string): RenderResult {
  const rows = parseResultsCsv(csvText);
  const model = buildFigure(panel, rows);
  return { model, svg: renderSvg(model) };
}

export function render(spec: FigureSpec): RenderResult {
  const text = readFileSync(spec.inputCsv, "utf8");
  const result = renderFromText(spec.panel, text);
  writeFileSync(spec.outputSvg, result.svg, "utf8");
  return result;
}
