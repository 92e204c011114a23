/**
 * CSV readers for the simulation CLI's grid, cut, and sweep files.
 *
 * Grid and cut files begin with a "# {json}" metadata line; sweep files do
 * not. Every reader checks the header for the columns it needs and refuses
 * files with no data rows, so a truncated export fails loudly instead of
 * turning into an empty image.
 */
import Papa from 'papaparse';

export type Meta = Record<string, unknown>;

export interface PulseRow {
  t1: number;
  t2: number;
  re_coh: number;
  im_coh: number;
  re_incoh: number;
  im_incoh: number;
}

export interface CutRow extends PulseRow {
  s: number;
}

export interface SweepRow {
  N: number;
  phi: number;
  T: number;
  inv_T: number;
  t_max: number;
  converged: boolean;
  tail_est: number;
}

export interface PulseGrid {
  meta: Meta | null;
  rows: PulseRow[];
}

export interface CutSeries {
  meta: Meta | null;
  rows: CutRow[];
  /** Legend text derived from the mask metadata ("full" or "masked: ..."). */
  label: string;
}

const PULSE_COLUMNS = ['t1', 't2', 're_coh', 'im_coh', 're_incoh', 'im_incoh'];
const CUT_COLUMNS = ['s', ...PULSE_COLUMNS];
const SWEEP_COLUMNS = ['N', 'phi', 'T', 'inv_T', 't_max', 'converged', 'tail_est'];

interface RawTable {
  meta: Meta | null;
  rows: Record<string, unknown>[];
}

function parseTable(text: string, name: string, required: string[]): RawTable {
  if (text.trim().length === 0) {
    throw new Error(`${name}: empty file`);
  }
  let meta: Meta | null = null;
  if (text.startsWith('# ')) {
    const eol = text.indexOf('\n');
    meta = JSON.parse(text.slice(2, eol < 0 ? text.length : eol)) as Meta;
  }
  const parsed = Papa.parse<Record<string, unknown>>(text, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
    comments: '#',
  });
  const fields = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!fields.includes(col)) {
      throw new Error(`${name}: missing column "${col}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new Error(`${name}: no data rows`);
  }
  return { meta, rows: parsed.data };
}

// dynamicTyping leaves non-numeric cells (e.g. "nan" in failed sweep rows)
// as strings; Number() turns those into NaN, which the plots then skip.
function num(v: unknown): number {
  return typeof v === 'number' ? v : Number(v);
}

/** Read a (t1, t2) field grid file written by the `pulse` subcommand. */
export function parsePulseGrid(text: string, name: string): PulseGrid {
  const { meta, rows } = parseTable(text, name, PULSE_COLUMNS);
  return {
    meta,
    rows: rows.map((r) => ({
      t1: num(r.t1),
      t2: num(r.t2),
      re_coh: num(r.re_coh),
      im_coh: num(r.im_coh),
      re_incoh: num(r.re_incoh),
      im_incoh: num(r.im_incoh),
    })),
  };
}

/** Read a one-dimensional cut file written by the `cut` subcommand. */
export function parseCut(text: string, name: string): CutSeries {
  const { meta, rows } = parseTable(text, name, CUT_COLUMNS);
  return {
    meta,
    label: maskLabel(meta),
    rows: rows.map((r) => ({
      s: num(r.s),
      t1: num(r.t1),
      t2: num(r.t2),
      re_coh: num(r.re_coh),
      im_coh: num(r.im_coh),
      re_incoh: num(r.re_incoh),
      im_incoh: num(r.im_incoh),
    })),
  };
}

/** Read a duration sweep table written by the `sweep` subcommand. */
export function parseSweep(text: string, name: string): SweepRow[] {
  const { rows } = parseTable(text, name, SWEEP_COLUMNS);
  return rows.map((r) => ({
    N: num(r.N),
    phi: num(r.phi),
    T: num(r.T),
    inv_T: num(r.inv_T),
    t_max: num(r.t_max),
    converged: r.converged === true || r.converged === 'true',
    tail_est: num(r.tail_est),
  }));
}

/** Legend text for a cut, from its mode-mask metadata. */
export function maskLabel(meta: Meta | null): string {
  const mask = (meta?.mask ?? null) as
    | { included_single?: unknown; included_double?: unknown }
    | null;
  if (!mask || (mask.included_single == null && mask.included_double == null)) {
    return 'full';
  }
  const parts: string[] = [];
  if (mask.included_single != null) {
    parts.push(`single ${JSON.stringify(mask.included_single)}`);
  }
  if (mask.included_double != null) {
    parts.push(`double ${JSON.stringify(mask.included_double)}`);
  }
  return `masked: ${parts.join(', ')}`;
}
