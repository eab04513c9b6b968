// Minimal SVG assembly: linear scales, axes, and shape builders that return
// markup strings. Output is deterministic; coordinates are fixed to two
// decimals so rerendering the same data gives identical bytes.

export interface Extent {
  min: number;
  max: number;
}

export function extentOf(values: number[], pad = 0.05): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (!Number.isFinite(min) || !Number.isFinite(max)) {
    min = 0;
    max = 1;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const margin = (max - min) * pad;
  return { min: min - margin, max: max + margin };
}

/** Linear world-to-pixel map; flip = true points the world axis up. */
export class Scale {
  constructor(
    private domain: Extent,
    private range: [number, number],
    private flip = false,
  ) {}

  apply(v: number): number {
    const t = (v - this.domain.min) / (this.domain.max - this.domain.min);
    const u = this.flip ? 1 - t : t;
    return this.range[0] + u * (this.range[1] - this.range[0]);
  }

  /** Tick positions at a round step, covering the domain. */
  ticks(target = 6): number[] {
    const span = this.domain.max - this.domain.min;
    const raw = span / target;
    const mag = Math.pow(10, Math.floor(Math.log10(raw)));
    let step = mag;
    for (const m of [1, 2, 5, 10]) {
      if (mag * m >= raw) {
        step = mag * m;
        break;
      }
    }
    const out: number[] = [];
    for (let v = Math.ceil(this.domain.min / step) * step; v <= this.domain.max + 1e-9; v += step) {
      out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
    }
    return out;
  }
}

const fix = (v: number) => v.toFixed(2);

export function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function polyline(points: Array<[number, number]>, attrs: string): string {
  const pts = points.map(([x, y]) => `${fix(x)},${fix(y)}`).join(" ");
  return `<polyline points="${pts}" fill="none" ${attrs}/>`;
}

export function circle(x: number, y: number, r: number, attrs: string): string {
  return `<circle cx="${fix(x)}" cy="${fix(y)}" r="${r}" ${attrs}/>`;
}

export function line(x1: number, y1: number, x2: number, y2: number, attrs: string): string {
  return `<line x1="${fix(x1)}" y1="${fix(y1)}" x2="${fix(x2)}" y2="${fix(y2)}" ${attrs}/>`;
}

export function text(x: number, y: number, content: string, attrs = ""): string {
  return `<text x="${fix(x)}" y="${fix(y)}" font-family="sans-serif" ${attrs}>${esc(content)}</text>`;
}

/** Arrow as a single path: shaft plus a two-stroke head. */
export function arrow(
  x1: number, y1: number, x2: number, y2: number,
  cls: string, color: string, width = 1,
): string {
  const dx = x2 - x1;
  const dy = y2 - y1;
  const len = Math.hypot(dx, dy);
  let head = "";
  if (len > 1e-9) {
    const ux = dx / len;
    const uy = dy / len;
    const size = Math.min(4, len * 0.4);
    const [lx, ly] = [x2 - size * (ux + uy * 0.5), y2 - size * (uy - ux * 0.5)];
    const [rx, ry] = [x2 - size * (ux - uy * 0.5), y2 - size * (uy + ux * 0.5)];
    head = ` M ${fix(lx)} ${fix(ly)} L ${fix(x2)} ${fix(y2)} L ${fix(rx)} ${fix(ry)}`;
  }
  return `<path class="${cls}" d="M ${fix(x1)} ${fix(y1)} L ${fix(x2)} ${fix(y2)}${head}" ` +
    `stroke="${color}" stroke-width="${width}" fill="none"/>`;
}

export interface AxisOptions {
  xLabel: string;
  yLabel: string;
  plotBox: [number, number, number, number]; // left, top, right, bottom in px
}

/** Frame, tick marks, and labels around a plot area. */
export function axes(x: Scale, y: Scale, opts: AxisOptions): string {
  const [left, top, right, bottom] = opts.plotBox;
  const parts: string[] = [];
  parts.push(
    `<rect x="${left}" y="${top}" width="${right - left}" height="${bottom - top}" ` +
    `fill="none" stroke="#444" stroke-width="1"/>`,
  );
  for (const v of x.ticks()) {
    const px = x.apply(v);
    if (px < left - 1e-6 || px > right + 1e-6) continue;
    parts.push(line(px, bottom, px, bottom + 4, 'stroke="#444"'));
    parts.push(text(px, bottom + 16, trimTick(v), 'font-size="10" text-anchor="middle" fill="#222"'));
  }
  for (const v of y.ticks()) {
    const py = y.apply(v);
    if (py < top - 1e-6 || py > bottom + 1e-6) continue;
    parts.push(line(left - 4, py, left, py, 'stroke="#444"'));
    parts.push(text(left - 7, py + 3, trimTick(v), 'font-size="10" text-anchor="end" fill="#222"'));
  }
  parts.push(text((left + right) / 2, bottom + 32, opts.xLabel,
    'font-size="11" text-anchor="middle" fill="#222"'));
  parts.push(
    `<text x="${fix(left - 36)}" y="${fix((top + bottom) / 2)}" font-family="sans-serif" ` +
    `font-size="11" text-anchor="middle" fill="#222" ` +
    `transform="rotate(-90 ${fix(left - 36)} ${fix((top + bottom) / 2)})">${esc(opts.yLabel)}</text>`,
  );
  return parts.join("\n");
}

function trimTick(v: number): string {
  const s = v.toFixed(3);
  return s.replace(/\.?0+$/, "") || "0";
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export function legend(x: number, y: number, entries: LegendEntry[]): string {
  const parts: string[] = [];
  entries.forEach((entry, i) => {
    const py = y + i * 14;
    const dash = entry.dash ? ` stroke-dasharray="${entry.dash}"` : "";
    parts.push(line(x, py, x + 18, py, `stroke="${entry.color}" stroke-width="2"${dash}`));
    parts.push(text(x + 23, py + 3.5, entry.label, 'font-size="10" fill="#222"'));
  });
  return parts.join("\n");
}

export function document(width: number, height: number, title: string, body: string): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    text(width / 2, 18, title, 'font-size="13" text-anchor="middle" fill="#111"') + "\n" +
    body +
    "\n</svg>\n";
}
