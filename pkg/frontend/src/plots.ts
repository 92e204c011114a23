/**
 * The four figure renderers. Each takes parsed CLI output and returns a
 * complete SVG document string; nothing here recomputes physics, only axis
 * transforms (complex modulus, log colour, pixel scales).
 */
import type { CutSeries, PulseGrid, SweepRow } from './csv.js';
import type { SpectrumDoc } from './schema.js';
import {
  axesGroup,
  defaultTicks,
  el,
  esc,
  linearScale,
  logColorScale,
  padded,
  polyline,
  rampColor,
  SERIES_COLORS,
  svgDoc,
  type PlotBox,
  type TickSpec,
} from './svg.js';

const WIDTH = 640;
const HEIGHT = 480;

function box(marginRight = 20): PlotBox {
  return { left: 64, top: 20, width: WIDTH - 64 - marginRight, height: HEIGHT - 20 - 52 };
}

function hypot2(re: number, im: number): number {
  return Math.hypot(re, im);
}

// ------------------------------------------------------------ spectrum

/**
 * Complex-plane scatter of the collective mode energies. Single-excitation
 * poles are filled circles, two-excitation poles are crosses, so the two
 * families stay distinguishable in print.
 */
export function plotSpectrum(doc: SpectrumDoc): string {
  const b = box();
  const re = [...doc.omega.map((c) => c.re), ...doc.epsilon.map((c) => c.re)];
  const im = [...doc.omega.map((c) => c.im), ...doc.epsilon.map((c) => c.im)];
  const xs = linearScale(padded(Math.min(...re), Math.max(...re)), [b.left, b.left + b.width]);
  const ys = linearScale(padded(Math.min(...im), Math.max(...im)), [b.top + b.height, b.top]);

  const singles = doc.omega
    .map((c) =>
      el('circle', {
        class: 'mode-single',
        cx: xs(c.re).toFixed(2),
        cy: ys(c.im).toFixed(2),
        r: 5,
        fill: SERIES_COLORS[0],
      }),
    )
    .join('');
  const doubles = doc.epsilon
    .map((c) => {
      const x = xs(c.re);
      const y = ys(c.im);
      const d = `M ${(x - 4).toFixed(2)} ${(y - 4).toFixed(2)} L ${(x + 4).toFixed(2)} ${(y + 4).toFixed(2)} M ${(x - 4).toFixed(2)} ${(y + 4).toFixed(2)} L ${(x + 4).toFixed(2)} ${(y - 4).toFixed(2)}`;
      return el('path', {
        class: 'mode-double',
        d,
        stroke: SERIES_COLORS[1],
        'stroke-width': 2,
        fill: 'none',
      });
    })
    .join('');

  const legend = el(
    'g',
    { class: 'legend', 'font-size': 12 },
    el('circle', { cx: b.left + 14, cy: b.top + 14, r: 5, fill: SERIES_COLORS[0] }) +
      el('text', { x: b.left + 26, y: b.top + 18 }, 'single-excitation poles') +
      el('path', {
        d: `M ${b.left + 10} ${b.top + 28} L ${b.left + 18} ${b.top + 36} M ${b.left + 10} ${b.top + 36} L ${b.left + 18} ${b.top + 28}`,
        stroke: SERIES_COLORS[1],
        'stroke-width': 2,
      }) +
      el('text', { x: b.left + 26, y: b.top + 36 }, 'two-excitation poles'),
  );

  const body =
    axesGroup(
      xs,
      ys,
      b,
      defaultTicks(xs.domain),
      defaultTicks(ys.domain),
      'Re E / γ',
      'Im E / γ',
    ) +
    singles +
    doubles +
    legend +
    title(`mode energies, N=${doc.nAtoms}, φ=${fmt(doc.phi)}`);
  return wrap(body);
}

// ------------------------------------------------------------ pulse map

/**
 * Colour map of the correlated-part magnitude |psi_incoh| over the photon
 * arrival times (t1, t2). The colour scale is logarithmic with a fixed
 * decade range because the field spans superradiant-to-subradiant decades.
 */
export function plotPulseMap(grid: PulseGrid, decades = 6): string {
  const b = box(96); // leave room for the colour bar
  const t1s = uniqSorted(grid.rows.map((r) => r.t1));
  const t2s = uniqSorted(grid.rows.map((r) => r.t2));
  const d1 = t1s.length > 1 ? t1s[1] - t1s[0] : 1;
  const d2 = t2s.length > 1 ? t2s[1] - t2s[0] : 1;
  const xs = linearScale([t1s[0] - d1 / 2, t1s[t1s.length - 1] + d1 / 2], [b.left, b.left + b.width]);
  const ys = linearScale([t2s[0] - d2 / 2, t2s[t2s.length - 1] + d2 / 2], [b.top + b.height, b.top]);

  let vmax = 0;
  for (const r of grid.rows) {
    const v = hypot2(r.re_incoh, r.im_incoh);
    if (v > vmax) vmax = v;
  }
  const color = logColorScale(vmax, decades);

  const cells = grid.rows
    .map((r) => {
      const x0 = xs(r.t1 - d1 / 2);
      const y0 = ys(r.t2 + d2 / 2);
      return el('rect', {
        class: 'cell',
        x: x0.toFixed(2),
        y: y0.toFixed(2),
        // slight overdraw hides antialiasing seams between cells
        width: (xs(r.t1 + d1 / 2) - x0 + 0.5).toFixed(2),
        height: (ys(r.t2 - d2 / 2) - y0 + 0.5).toFixed(2),
        fill: color(hypot2(r.re_incoh, r.im_incoh)),
      });
    })
    .join('');

  const body =
    cells +
    axesGroup(
      xs,
      ys,
      b,
      defaultTicks(xs.domain),
      defaultTicks(ys.domain),
      't₁ (1/γ)',
      't₂ (1/γ)',
    ) +
    colorBar(b, vmax, decades) +
    title(metaTitle('|ψ_incoh|', grid.meta));
  return wrap(body);
}

function colorBar(b: PlotBox, vmax: number, decades: number): string {
  const x = b.left + b.width + 16;
  const h = b.height * 0.7;
  const y0 = b.top + (b.height - h) / 2;
  const n = 48;
  const swatches: string[] = [];
  for (let i = 0; i < n; i++) {
    swatches.push(
      el('rect', {
        class: 'colorbar',
        x,
        y: (y0 + (h * (n - 1 - i)) / n).toFixed(2),
        width: 14,
        height: (h / n + 0.5).toFixed(2),
        fill: rampColor(i / (n - 1)),
      }),
    );
  }
  const label = (frac: number, text: string) =>
    el('text', { x: x + 18, y: (y0 + h * frac + 4).toFixed(2), 'font-size': 10 }, esc(text));
  return el(
    'g',
    {},
    swatches.join('') +
      label(0, vmax.toExponential(1)) +
      label(1, vmax > 0 ? (vmax * Math.pow(10, -decades)).toExponential(1) : '0'),
  );
}

// ------------------------------------------------------------ cuts

/**
 * Overlay of one-dimensional cuts of the correlated part, typically the
 * full field against a mode-masked reconstruction. One curve per input
 * file, labelled from its mask metadata.
 */
export function plotCuts(cuts: CutSeries[], logY = false): string {
  const b = box();
  const allS = cuts.flatMap((c) => c.rows.map((r) => r.s));
  const allV = cuts.flatMap((c) => c.rows.map((r) => hypot2(r.re_incoh, r.im_incoh)));
  const xs = linearScale(padded(Math.min(...allS), Math.max(...allS), 0.02), [
    b.left,
    b.left + b.width,
  ]);

  let ys: (v: number) => number;
  let yTicks: TickSpec[];
  let yDomain: [number, number];
  if (logY) {
    const vmax = Math.max(...allV);
    const lo = Math.log10(vmax) - 8; // fixed window; zeros clamp to the floor
    const sc = linearScale([lo, Math.log10(vmax)], [b.top + b.height, b.top]);
    ys = (v) => sc(v > 0 ? Math.max(lo, Math.log10(v)) : lo);
    yDomain = sc.domain;
    yTicks = ticksLog(lo, Math.log10(vmax)).map((k) => ({ v: k, label: `1e${k}` }));
  } else {
    const sc = linearScale(padded(0, Math.max(...allV), 0.05), [b.top + b.height, b.top]);
    ys = sc;
    yDomain = sc.domain;
    yTicks = defaultTicks(sc.domain);
  }
  const yScale = linearScale(yDomain, [b.top + b.height, b.top]);

  const curves = cuts
    .map((c, i) =>
      polyline(
        c.rows.map((r) => [xs(r.s), ys(hypot2(r.re_incoh, r.im_incoh))] as [number, number]),
        {
          class: `cut-curve cut-${i}`,
          stroke: SERIES_COLORS[i % SERIES_COLORS.length],
          'stroke-width': 1.8,
        },
      ),
    )
    .join('');

  const legend = el(
    'g',
    { class: 'legend', 'font-size': 12 },
    cuts
      .map(
        (c, i) =>
          el('line', {
            x1: b.left + 10,
            x2: b.left + 30,
            y1: b.top + 14 + 16 * i,
            y2: b.top + 14 + 16 * i,
            stroke: SERIES_COLORS[i % SERIES_COLORS.length],
            'stroke-width': 2,
          }) + el('text', { x: b.left + 36, y: b.top + 18 + 16 * i }, esc(c.label)),
      )
      .join(''),
  );

  const meta = cuts[0]?.meta ?? null;
  const body =
    axesGroup(xs, yScale, b, defaultTicks(xs.domain), yTicks, cutAxisLabel(meta), '|ψ_incoh|') +
    curves +
    legend +
    title(metaTitle('cut', meta));
  return wrap(body);
}

function ticksLog(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let k = Math.ceil(lo); k <= Math.floor(hi); k += 2) out.push(k);
  return out;
}

function cutAxisLabel(meta: Record<string, unknown> | null): string {
  const kind = meta?.kind;
  if (kind === 'antidiagonal') return 's = t₁ - t₂ (1/γ)';
  if (kind === 'diagonal') return 's = t₁ = t₂ (1/γ)';
  if (kind === 'edge') return 't₁ (1/γ)';
  return 's (1/γ)';
}

// ------------------------------------------------------------ sweep

const PI = Math.PI;

/**
 * Inverse transmitted-pulse duration against lattice phase, one curve per
 * atom number. Rows whose duration failed to converge to a number are
 * skipped; everything else is drawn exactly as tabulated.
 */
export function plotSweep(rows: SweepRow[]): string {
  const b = box();
  const ns = uniqSorted(rows.map((r) => r.N));
  const finite = rows.filter((r) => Number.isFinite(r.inv_T));
  const xs = linearScale(
    padded(Math.min(...finite.map((r) => r.phi)), Math.max(...finite.map((r) => r.phi)), 0.03),
    [b.left, b.left + b.width],
  );
  const ys = linearScale(padded(0, Math.max(...finite.map((r) => r.inv_T)), 0.05), [
    b.top + b.height,
    b.top,
  ]);

  const curves = ns
    .map((n, i) => {
      const pts = finite
        .filter((r) => r.N === n)
        .sort((a, b2) => a.phi - b2.phi)
        .map((r) => [xs(r.phi), ys(r.inv_T)] as [number, number]);
      const color = SERIES_COLORS[i % SERIES_COLORS.length];
      const dots = pts
        .map(([x, y]) =>
          el('circle', { cx: x.toFixed(2), cy: y.toFixed(2), r: 2.5, fill: color }),
        )
        .join('');
      return (
        polyline(pts, { class: 'sweep-curve', 'data-n': n, stroke: color, 'stroke-width': 1.8 }) +
        dots
      );
    })
    .join('');

  const legend = el(
    'g',
    { class: 'legend', 'font-size': 12 },
    ns
      .map(
        (n, i) =>
          el('line', {
            x1: b.left + 10,
            x2: b.left + 30,
            y1: b.top + 14 + 16 * i,
            y2: b.top + 14 + 16 * i,
            stroke: SERIES_COLORS[i % SERIES_COLORS.length],
            'stroke-width': 2,
          }) + el('text', { x: b.left + 36, y: b.top + 18 + 16 * i }, `N=${n}`),
      )
      .join(''),
  );

  const body =
    axesGroup(xs, ys, b, piTicks(xs.domain), defaultTicks(ys.domain), 'φ', '1/T (γ)') +
    curves +
    legend;
  return wrap(body);
}

/** Ticks at quarter-pi multiples inside the domain. */
function piTicks(domain: [number, number]): TickSpec[] {
  const names = ['0', 'π/4', 'π/2', '3π/4', 'π'];
  const out: TickSpec[] = [];
  for (let k = Math.ceil(domain[0] / (PI / 4)); k * (PI / 4) <= domain[1]; k++) {
    out.push({ v: (k * PI) / 4, label: names[k] ?? `${k}π/4` });
  }
  return out;
}

// ------------------------------------------------------------ shared

function wrap(body: string): string {
  const bg = el('rect', { x: 0, y: 0, width: WIDTH, height: HEIGHT, fill: 'white' });
  return svgDoc(WIDTH, HEIGHT, bg + body) + '\n';
}

function title(text: string): string {
  return el(
    'text',
    { x: WIDTH / 2, y: 14, 'text-anchor': 'middle', 'font-size': 12, fill: '#444' },
    esc(text),
  );
}

function metaTitle(what: string, meta: Record<string, unknown> | null): string {
  if (!meta) return what;
  const n = meta.n_atoms;
  const phi = meta.phi;
  return `${what}, N=${n}, φ=${fmt(Number(phi))}`;
}

function fmt(v: number): string {
  return String(parseFloat(v.toPrecision(6)));
}

function uniqSorted(vals: number[]): number[] {
  return [...new Set(vals)].sort((a, b) => a - b);
}
