import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { test } from "node:test";

import { parseResultsCsv } from "../src/csv";
import { buildFigure, extractSeries, invertScale } from "../src/figure";
import { renderFromText } from "../src/render";

const FIXTURES = join(__dirname, "..", "..", "test", "fixtures");

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

/** Pull every bar's (method, mean, sem) back out of the rendered SVG geometry. */
function extractBarsFromSvg(svg: string, model: ReturnType<typeof buildFigure>) {
  const bars = new Map<string, { mean: number; sem: number | null }>();
  const rects = svg.match(/<rect class="bar"[^>]*>/g) ?? [];
  for (const rect of rects) {
    const method = /data-method="([^"]+)"/.exec(rect)![1]!;
    const y = Number(/ y="([-\d.]+)"/.exec(rect)![1]);
    const mean = invertScale(model.yScale, y);
    bars.set(method, { mean, sem: null });
  }
  const errors = svg.match(/<line class="errorbar"[^>]*>/g) ?? [];
  for (const line of errors) {
    const method = /data-method="([^"]+)"/.exec(line)![1]!;
    const y1 = Number(/y1="([-\d.]+)"/.exec(line)![1]);
    const y2 = Number(/y2="([-\d.]+)"/.exec(line)![1]);
    const lo = invertScale(model.yScale, y1);
    const hi = invertScale(model.yScale, y2);
    const entry = bars.get(method)!;
    entry.sem = Math.abs(hi - lo) / 2;
  }
  return bars;
}

test("panel-a bars reproduce the CSV means and SEMs (data-extraction check)", () => {
  const text = fixture("panel_a.csv");
  const rows = parseResultsCsv(text);
  const { model, svg } = renderFromText("a", text);
  const bars = extractBarsFromSvg(svg, model);
  assert.equal(bars.size, 4);
  for (const row of rows) {
    const bar = bars.get(row.method)!;
    // geometry coordinates carry 4 decimals; invert within that tolerance
    const coordTol = (model.yScale.domainMax / (model.yScale.rangeMin - model.yScale.rangeMax)) * 1e-3;
    assert.ok(Math.abs(bar.mean - row.meanRmse) < Math.abs(coordTol), `${row.method} mean`);
    assert.ok(Math.abs((bar.sem ?? 0) - (row.sem ?? 0)) < Math.abs(coordTol), `${row.method} sem`);
  }
});

test("figure model passes the CSV values through untouched", () => {
  for (const [panel, name] of [["a", "panel_a.csv"], ["b", "panel_b.csv"], ["c", "panel_c.csv"]] as const) {
    const rows = parseResultsCsv(fixture(name));
    const series = extractSeries(buildFigure(panel, rows));
    for (const row of rows) {
      const points = series[row.method]!;
      const point = points.find((p) => p.x === row.sweepValue || (p.x === null && row.sweepValue === null))!;
      assert.equal(point.mean, row.meanRmse);
      assert.equal(point.sem, row.sem);
    }
  }
});

test("panel-c monotone means plot as monotone pixel positions", () => {
  const text = [
    "panel,sweep_value,method,mean_rmse,sem,runs,seed0",
    "c,1000,ig,0.4,0.01,5,1",
    "c,10000,ig,0.2,0.01,5,1",
    "c,100000,ig,0.1,0.01,5,1",
    "c,1000,topline,0.05,0.01,5,1",
    "c,10000,topline,0.04,0.01,5,1",
    "c,100000,topline,0.03,0.01,5,1",
  ].join("\n");
  const { svg } = renderFromText("c", text);
  const line = /<polyline class="series" data-method="ig" points="([^"]+)"/.exec(svg)![1]!;
  const ys = line.split(" ").map((pair) => Number(pair.split(",")[1]));
  assert.equal(ys.length, 3);
  // the y axis points downward: decreasing rmse means increasing pixel y
  assert.ok(ys[0]! < ys[1]! && ys[1]! < ys[2]!, `not monotone: ${ys}`);
});

test("panel-b renders one line per method and a flat baseline stays flat", () => {
  const { model, svg } = renderFromText("b", fixture("panel_b.csv"));
  const series = extractSeries(model);
  assert.ok(series["ig"]!.length >= 3);
  const toplineLine = /<polyline class="series" data-method="topline" points="([^"]+)"/.exec(svg)![1]!;
  const ys = new Set(toplineLine.split(" ").map((pair) => pair.split(",")[1]));
  assert.equal(ys.size, 1); // constant across ratios by construction
});

test("rendering is a pure function of the CSV", () => {
  const text = fixture("panel_a.csv");
  assert.equal(renderFromText("a", text).svg, renderFromText("a", text).svg);
});

test("requesting a panel that is not in the file is an error", () => {
  assert.throws(() => renderFromText("b", fixture("panel_a.csv")), /no rows for panel 'b'/);
});
