/** Deterministic SVG figure builders: no DOM, no timestamps, stable
 * number formatting, so reruns are byte-identical. */

const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

export interface BarGroup {
  label: string;              // x-axis group label
  values: { series: string; value: number }[];
}

export interface LineSeries {
  name: string;
  points: { x: number; y: number }[];
}

const W = 720;
const H = 420;
const MARGIN = { top: 40, right: 160, bottom: 56, left: 72 };

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toPrecision(6).replace(/\.?0+$/, "");
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function open(title: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="sans-serif">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
    `<text x="${W / 2}" y="22" text-anchor="middle" font-size="15">${esc(title)}</text>`,
  ];
}

function yTicks(maxY: number, log: boolean): number[] {
  if (log) {
    const ticks: number[] = [];
    for (let p = 0; Math.pow(10, p) <= maxY * 1.01; p++) ticks.push(Math.pow(10, p));
    return ticks.length ? ticks : [1];
  }
  const step = Math.pow(10, Math.floor(Math.log10(maxY || 1)));
  const scaled = maxY / step;
  const unit = scaled <= 2 ? step / 2 : scaled <= 5 ? step : 2 * step;
  const ticks: number[] = [];
  for (let v = 0; v <= maxY * 1.001; v += unit) ticks.push(v);
  return ticks;
}

function axes(out: string[], maxY: number, yLabel: string, log: boolean): (v: number) => number {
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const y = (v: number): number => {
    if (log) {
      const lmax = Math.log10(Math.max(maxY, 1.0001));
      const lv = Math.log10(Math.max(v, 1));
      return H - MARGIN.bottom - (lv / lmax) * plotH;
    }
    return H - MARGIN.bottom - (v / (maxY || 1)) * plotH;
  };
  for (const tv of yTicks(maxY, log)) {
    const ty = y(tv);
    out.push(`<line x1="${MARGIN.left}" y1="${fmt(ty)}" x2="${W - MARGIN.right}" y2="${fmt(ty)}" stroke="#ddd"/>`);
    out.push(`<text x="${MARGIN.left - 6}" y="${fmt(ty + 4)}" text-anchor="end" font-size="11">${fmt(tv)}</text>`);
  }
  out.push(`<line x1="${MARGIN.left}" y1="${H - MARGIN.bottom}" x2="${W - MARGIN.right}" y2="${H - MARGIN.bottom}" stroke="#333"/>`);
  out.push(`<text transform="rotate(-90 16 ${H / 2})" x="16" y="${H / 2}" text-anchor="middle" font-size="12">${esc(yLabel)}</text>`);
  return y;
}

function legend(out: string[], names: string[]): void {
  names.forEach((name, i) => {
    const ly = MARGIN.top + i * 18;
    const lx = W - MARGIN.right + 12;
    out.push(`<rect x="${lx}" y="${ly}" width="12" height="12" fill="${PALETTE[i % PALETTE.length]}"/>`);
    out.push(`<text x="${lx + 17}" y="${ly + 10}" font-size="11">${esc(name)}</text>`);
  });
}

export function groupedBars(title: string, groups: BarGroup[], opts: {
  xLabel: string; yLabel: string; logY?: boolean;
}): string {
  const series = Array.from(new Set(groups.flatMap((g) => g.values.map((v) => v.series))));
  const maxY = Math.max(1e-9, ...groups.flatMap((g) => g.values.map((v) => v.value)));
  const out = open(title);
  const y = axes(out, maxY, opts.yLabel, opts.logY ?? false);
  const plotW = W - MARGIN.left - MARGIN.right;
  const groupW = plotW / Math.max(groups.length, 1);
  const barW = (groupW * 0.8) / Math.max(series.length, 1);
  groups.forEach((g, gi) => {
    const gx = MARGIN.left + gi * groupW + groupW * 0.1;
    g.values.forEach((v) => {
      const si = series.indexOf(v.series);
      const x = gx + si * barW;
      const top = y(v.value);
      out.push(`<rect x="${fmt(x)}" y="${fmt(top)}" width="${fmt(barW * 0.92)}" ` +
        `height="${fmt(Math.max(H - MARGIN.bottom - top, 0))}" fill="${PALETTE[si % PALETTE.length]}"/>`);
    });
    out.push(`<text x="${fmt(gx + groupW * 0.4)}" y="${H - MARGIN.bottom + 16}" text-anchor="middle" font-size="11">${esc(g.label)}</text>`);
  });
  out.push(`<text x="${MARGIN.left + plotW / 2}" y="${H - 12}" text-anchor="middle" font-size="12">${esc(opts.xLabel)}</text>`);
  legend(out, series);
  out.push("</svg>");
  return out.join("\n") + "\n";
}

export function lineChart(title: string, series: LineSeries[], opts: {
  xLabel: string; yLabel: string; logY?: boolean;
}): string {
  const maxY = Math.max(1e-9, ...series.flatMap((s) => s.points.map((p) => p.y)));
  const xs = Array.from(new Set(series.flatMap((s) => s.points.map((p) => p.x)))).sort((a, b) => a - b);
  const out = open(title);
  const y = axes(out, maxY, opts.yLabel, opts.logY ?? false);
  const plotW = W - MARGIN.left - MARGIN.right;
  const x = (v: number): number => {
    const i = xs.indexOf(v);
    return MARGIN.left + (xs.length <= 1 ? plotW / 2 : (i / (xs.length - 1)) * plotW);
  };
  series.forEach((s, si) => {
    const pts = [...s.points].sort((a, b) => a.x - b.x);
    const d = pts.map((p, i) => `${i ? "L" : "M"}${fmt(x(p.x))},${fmt(y(p.y))}`).join(" ");
    out.push(`<path d="${d}" fill="none" stroke="${PALETTE[si % PALETTE.length]}" stroke-width="2"/>`);
    for (const p of pts) {
      out.push(`<circle cx="${fmt(x(p.x))}" cy="${fmt(y(p.y))}" r="3" fill="${PALETTE[si % PALETTE.length]}"/>`);
    }
  });
  for (const v of xs) {
    out.push(`<text x="${fmt(x(v))}" y="${H - MARGIN.bottom + 16}" text-anchor="middle" font-size="11">${fmt(v)}</text>`);
  }
  out.push(`<text x="${MARGIN.left + plotW / 2}" y="${H - 12}" text-anchor="middle" font-size="12">${esc(opts.xLabel)}</text>`);
  legend(out, series.map((s) => s.name));
  out.push("</svg>");
  return out.join("\n") + "\n";
}
