/**
 * SVG rendering of a FigureModel.  Panel a becomes a bar chart with SEM
 * error bars; panels b and c become per-method lines with shaded SEM bands.
 *
 * Every plotted element carries data-* attributes naming its method and x
 * coordinate so the geometry is unambiguous to parse back; the numeric
 * positions themselves are pure functions of the scales in the model.
 */

import { FigureModel, SeriesPoint, applyScale } from "./figure";

const FMT = (v: number): string => {
  if (!Number.isFinite(v)) {
    throw new Error(`non-finite coordinate ${v}`);
  }
  return v.toFixed(4).replace(/\.?0+$/, (m) => (m.startsWith(".") ? "" : m));
};

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function yTicks(model: FigureModel): number[] {
  const max = model.yScale.domainMax;
  const step = Math.pow(10, Math.floor(Math.log10(max))) / 2;
  const ticks: number[] = [];
  for (let v = 0; v <= max + 1e-12; v += step) {
    ticks.push(Number(v.toFixed(12)));
  }
  return ticks.length > 12 ? ticks.filter((_, i) => i % 2 === 0) : ticks;
}

function axisLines(model: FigureModel, xLabel: string): string[] {
  const { margin, width, height } = model;
  const parts: string[] = [];
  const x0 = margin.left;
  const y0 = height - margin.bottom;
  parts.push(`<line class="axis" x1="${x0}" y1="${margin.top}" x2="${x0}" y2="${y0}" stroke="#333"/>`);
  parts.push(`<line class="axis" x1="${x0}" y1="${y0}" x2="${width - margin.right}" y2="${y0}" stroke="#333"/>`);
  for (const tick of yTicks(model)) {
    const y = applyScale(model.yScale, tick);
    parts.push(`<line x1="${x0 - 4}" y1="${FMT(y)}" x2="${x0}" y2="${FMT(y)}" stroke="#333"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${FMT(y + 4)}" text-anchor="end" font-size="11">${FMT(tick)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + width - margin.right) / 2}" y="${height - 14}" text-anchor="middle" font-size="13">${esc(xLabel)}</text>`,
  );
  parts.push(
    `<text transform="rotate(-90 16 ${height / 2})" x="16" y="${height / 2}" text-anchor="middle" font-size="13">mean RMSE of the joint-effect prediction</text>`,
  );
  return parts;
}

function errorBar(x: number, mean: number, sem: number | null, model: FigureModel, method: string): string[] {
  if (sem === null) {
    return [];
  }
  const yLo = applyScale(model.yScale, mean - sem);
  const yHi = applyScale(model.yScale, mean + sem);
  const cap = 5;
  return [
    `<line class="errorbar" data-method="${esc(method)}" x1="${FMT(x)}" y1="${FMT(yLo)}" x2="${FMT(x)}" y2="${FMT(yHi)}" stroke="#222" stroke-width="1.2"/>`,
    `<line x1="${FMT(x - cap)}" y1="${FMT(yLo)}" x2="${FMT(x + cap)}" y2="${FMT(yLo)}" stroke="#222" stroke-width="1.2"/>`,
    `<line x1="${FMT(x - cap)}" y1="${FMT(yHi)}" x2="${FMT(x + cap)}" y2="${FMT(yHi)}" stroke="#222" stroke-width="1.2"/>`,
  ];
}

function renderBars(model: FigureModel): string[] {
  const { margin, width } = model;
  const innerWidth = width - margin.left - margin.right;
  const n = model.series.length;
  const slot = innerWidth / n;
  const barWidth = slot * 0.55;
  const baseline = applyScale(model.yScale, 0);
  const parts: string[] = [];
  model.series.forEach((s, i) => {
    const point = s.points[0];
    if (!point) {
      return;
    }
    const cx = margin.left + slot * (i + 0.5);
    const top = applyScale(model.yScale, point.mean);
    parts.push(
      `<rect class="bar" data-method="${esc(s.method)}" data-mean="${point.mean}" ` +
        `x="${FMT(cx - barWidth / 2)}" y="${FMT(top)}" width="${FMT(barWidth)}" ` +
        `height="${FMT(baseline - top)}" fill="${s.color}"/>`,
    );
    parts.push(...errorBar(cx, point.mean, point.sem, model, s.method));
    parts.push(
      `<text x="${FMT(cx)}" y="${FMT(baseline + 16)}" text-anchor="middle" font-size="11">${esc(s.label)}</text>`,
    );
  });
  return parts;
}

function renderLines(model: FigureModel): string[] {
  const xScale = model.xScale;
  if (!xScale) {
    throw new Error("line panels need an x scale");
  }
  const parts: string[] = [];
  for (const s of model.series) {
    const coords = s.points.map((p: SeriesPoint) => ({
      x: applyScale(xScale, p.x as number),
      y: applyScale(model.yScale, p.mean),
      yLo: applyScale(model.yScale, p.mean - (p.sem ?? 0)),
      yHi: applyScale(model.yScale, p.mean + (p.sem ?? 0)),
    }));
    if (s.points.some((p) => p.sem !== null)) {
      const upper = coords.map((c) => `${FMT(c.x)},${FMT(c.yHi)}`);
      const lower = [...coords].reverse().map((c) => `${FMT(c.x)},${FMT(c.yLo)}`);
      parts.push(
        `<polygon class="band" data-method="${esc(s.method)}" points="${upper.join(" ")} ${lower.join(" ")}" ` +
          `fill="${s.color}" opacity="0.18"/>`,
      );
    }
    parts.push(
      `<polyline class="series" data-method="${esc(s.method)}" points="${coords
        .map((c) => `${FMT(c.x)},${FMT(c.y)}`)
        .join(" ")}" fill="none" stroke="${s.color}" stroke-width="2"/>`,
    );
    for (const c of coords) {
      parts.push(
        `<circle data-method="${esc(s.method)}" cx="${FMT(c.x)}" cy="${FMT(c.y)}" r="2.6" fill="${s.color}"/>`,
      );
    }
  }
  // x tick labels at the plotted points of the first series
  const first = model.series[0];
  if (first) {
    for (const p of first.points) {
      const x = applyScale(xScale, p.x as number);
      const y = model.height - model.margin.bottom;
      parts.push(`<line x1="${FMT(x)}" y1="${y}" x2="${FMT(x)}" y2="${y + 4}" stroke="#333"/>`);
      parts.push(
        `<text x="${FMT(x)}" y="${y + 18}" text-anchor="middle" font-size="11">${p.x}</text>`,
      );
    }
  }
  return parts;
}

function legend(model: FigureModel): string[] {
  const parts: string[] = [];
  model.series.forEach((s, i) => {
    const y = model.margin.top + 16 * i;
    const x = model.width - model.margin.right - 230;
    parts.push(`<rect x="${x}" y="${y - 9}" width="12" height="12" fill="${s.color}"/>`);
    parts.push(`<text x="${x + 18}" y="${y + 1}" font-size="11">${esc(s.label)}</text>`);
  });
  return parts;
}

const X_LABELS: Record<string, string> = {
  a: "method",
  b: "single-intervention share (N_sint / N_obs)",
  c: "total training samples N_tot",
};

export function renderSvg(model: FigureModel): string {
  const body =
    model.panel === "a"
      ? renderBars(model)
      : [...renderLines(model), ...legend(model)];
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${model.width}" height="${model.height}" viewBox="0 0 ${model.width} ${model.height}">`,
    `<rect width="${model.width}" height="${model.height}" fill="white"/>`,
    ...axisLines(model, X_LABELS[model.panel] ?? ""),
    ...body,
    "</svg>",
  ];
  return parts.join("\n") + "\n";
}
