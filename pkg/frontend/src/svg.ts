/**
 * Small SVG assembly kit shared by the figure renderers: element strings,
 * linear scales, tick generation, axes, and the log colour ramp used by the
 * pulse maps. No drawing library; every figure is a plain SVG string.
 */

// ------------------------------------------------------------ elements

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, body = ''): string {
  const parts = Object.entries(attrs).map(([k, v]) => `${k}="${v}"`);
  const head = parts.length > 0 ? `<${tag} ${parts.join(' ')}` : `<${tag}`;
  return body === '' ? `${head}/>` : `${head}>${body}</${tag}>`;
}

export function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export function svgDoc(width: number, height: number, body: string): string {
  return el(
    'svg',
    {
      xmlns: 'http://www.w3.org/2000/svg',
      width,
      height,
      viewBox: `0 0 ${width} ${height}`,
      'font-family': 'sans-serif',
    },
    body,
  );
}

// ------------------------------------------------------------ scales

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1; // degenerate domain: park everything at r0
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Pad a data extent by a fraction on both sides. */
export function padded(lo: number, hi: number, frac = 0.08): [number, number] {
  const span = hi - lo || Math.max(Math.abs(hi), 1);
  return [lo - frac * span, hi + frac * span];
}

// ------------------------------------------------------------ ticks

export interface TickSpec {
  v: number;
  label: string;
}

/** Round-valued ticks covering [lo, hi] with a 1/2/5 step. */
export function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const raw = span / Math.max(count, 2);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function fmtTick(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(parseFloat(v.toPrecision(8)));
}

export function defaultTicks(domain: [number, number], count = 6): TickSpec[] {
  return ticks(domain[0], domain[1], count).map((v) => ({ v, label: fmtTick(v) }));
}

// ------------------------------------------------------------ axes

export interface PlotBox {
  left: number;
  top: number;
  width: number;
  height: number;
}

/**
 * Bottom and left axes with tick marks and centred labels. The scales must
 * already map data values into the pixel box.
 */
export function axesGroup(
  xs: Scale,
  ys: Scale,
  box: PlotBox,
  xTicks: TickSpec[],
  yTicks: TickSpec[],
  xLabel: string,
  yLabel: string,
): string {
  const bottom = box.top + box.height;
  const right = box.left + box.width;
  const parts: string[] = [
    el('path', {
      d: `M ${box.left} ${box.top} V ${bottom} H ${right}`,
      fill: 'none',
      stroke: '#222',
      'stroke-width': 1,
    }),
  ];
  for (const t of xTicks) {
    const x = xs(t.v).toFixed(2);
    parts.push(el('line', { x1: x, x2: x, y1: bottom, y2: bottom + 5, stroke: '#222' }));
    parts.push(
      el(
        'text',
        { x, y: bottom + 18, 'text-anchor': 'middle', 'font-size': 11 },
        esc(t.label),
      ),
    );
  }
  for (const t of yTicks) {
    const y = ys(t.v).toFixed(2);
    parts.push(el('line', { x1: box.left - 5, x2: box.left, y1: y, y2: y, stroke: '#222' }));
    parts.push(
      el(
        'text',
        { x: box.left - 8, y: Number(y) + 4, 'text-anchor': 'end', 'font-size': 11 },
        esc(t.label),
      ),
    );
  }
  parts.push(
    el(
      'text',
      {
        x: box.left + box.width / 2,
        y: bottom + 36,
        'text-anchor': 'middle',
        'font-size': 13,
      },
      esc(xLabel),
    ),
  );
  const yl = box.top + box.height / 2;
  parts.push(
    el(
      'text',
      {
        x: 16,
        y: yl,
        'text-anchor': 'middle',
        'font-size': 13,
        transform: `rotate(-90 16 ${yl})`,
      },
      esc(yLabel),
    ),
  );
  return el('g', { class: 'axes' }, parts.join(''));
}

// ------------------------------------------------------------ colour

// Piecewise-linear ramp, dark blue -> teal -> green -> yellow, roughly
// perceptual; anchors picked by eye, not lifted from any colormap table.
const RAMP: [number, number, number][] = [
  [13, 8, 65],
  [49, 54, 149],
  [33, 113, 181],
  [26, 152, 122],
  [127, 188, 65],
  [253, 231, 37],
];

export function rampColor(t: number): string {
  const u = Math.min(1, Math.max(0, t)) * (RAMP.length - 1);
  const i = Math.min(RAMP.length - 2, Math.floor(u));
  const f = u - i;
  const c = RAMP[i].map((a, k) => Math.round(a + f * (RAMP[i + 1][k] - a)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

/**
 * Logarithmic colour mapping with a fixed number of decades below the
 * maximum. Values at or below the floor (including zero) clamp to the
 * bottom of the ramp.
 */
export function logColorScale(vmax: number, decades = 6): (v: number) => string {
  const top = Math.log10(vmax);
  return (v: number) => {
    if (!(v > 0)) return rampColor(0);
    const t = 1 + (Math.log10(v) - top) / decades;
    return rampColor(t);
  };
}

// ------------------------------------------------------------ misc

export function polyline(pts: [number, number][], attrs: Attrs): string {
  const d = pts
    .map(([x, y], i) => `${i === 0 ? 'M' : 'L'} ${x.toFixed(2)} ${y.toFixed(2)}`)
    .join(' ');
  return el('path', { d, fill: 'none', ...attrs });
}

export const SERIES_COLORS = ['#d95f02', '#1b6ca8', '#2ca02c', '#9467bd', '#8c564b'];
