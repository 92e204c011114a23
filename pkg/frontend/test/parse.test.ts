import { readFileSync } from 'fs';
import { join } from 'path';
import { fileURLToPath } from 'url';
import { describe, expect, it } from 'vitest';
import { maskLabel, parseCut, parsePulseGrid, parseSweep } from '../src/csv.js';
import { parseSpectrum } from '../src/schema.js';

const FIX = fileURLToPath(new URL('./fixtures', import.meta.url));
const read = (name: string) => readFileSync(join(FIX, name), 'utf8');

describe('spectrum JSON', () => {
  it('reads counts and config from a four-atom run', () => {
    const doc = parseSpectrum(read('spectrum.json'), 'spectrum.json');
    expect(doc.nAtoms).toBe(4);
    expect(doc.phi).toBeCloseTo(0.1, 12);
    expect(doc.omega).toHaveLength(4);
    expect(doc.epsilon).toHaveLength(6);
    // every single-excitation pole decays
    for (const w of doc.omega) expect(w.im).toBeLessThan(0);
  });

  it('names the missing key on schema mismatch', () => {
    const doc = JSON.parse(read('spectrum.json'));
    delete doc.single.omega;
    expect(() => parseSpectrum(JSON.stringify(doc), 'spectrum.json')).toThrow(/single\.omega/);
  });

  it('rejects empty and non-JSON input', () => {
    expect(() => parseSpectrum('', 'x.json')).toThrow(/empty file/);
    expect(() => parseSpectrum('also not json', 'x.json')).toThrow(/not valid JSON/);
  });
});

describe('pulse grid CSV', () => {
  it('parses rows and metadata', () => {
    const grid = parsePulseGrid(read('pulse.csv'), 'pulse.csv');
    expect(grid.rows).toHaveLength(75 * 75);
    expect(grid.meta?.n_atoms).toBe(2);
    const r = grid.rows[0];
    expect(Number.isFinite(r.t1 + r.t2 + r.re_incoh + r.im_incoh)).toBe(true);
  });

  it('names the missing column', () => {
    const text = read('pulse.csv').replace('re_incoh', 're_other');
    expect(() => parsePulseGrid(text, 'pulse.csv')).toThrow('pulse.csv: missing column "re_incoh"');
  });

  it('rejects an empty file', () => {
    expect(() => parsePulseGrid(read('empty.csv'), 'empty.csv')).toThrow(/empty file/);
  });

  it('rejects a header with no data rows', () => {
    expect(() => parsePulseGrid(read('header_only.csv'), 'header_only.csv')).toThrow(
      /no data rows/,
    );
  });
});

describe('cut CSV', () => {
  it('labels full and masked files from their metadata', () => {
    const full = parseCut(read('cut_full.csv'), 'cut_full.csv');
    const bright = parseCut(read('cut_bright.csv'), 'cut_bright.csv');
    expect(full.label).toBe('full');
    expect(bright.label).toMatch(/^masked: single \[\d+\]$/);
    expect(full.rows).toHaveLength(bright.rows.length);
    // antidiagonal cut at t1+t2 = 10: abscissa is the arrival-time difference
    for (const r of full.rows.slice(0, 10)) {
      expect(r.t1 + r.t2).toBeCloseTo(10, 9);
      expect(r.t1 - r.t2).toBeCloseTo(r.s, 9);
    }
  });

  it('names the missing column', () => {
    const text = read('cut_full.csv').replace(/^s,/m, 'q,');
    expect(() => parseCut(text, 'cut_full.csv')).toThrow('cut_full.csv: missing column "s"');
  });

  it('maskLabel spells out double-mode masks too', () => {
    expect(maskLabel({ mask: { included_single: null, included_double: [0, 2] } })).toBe(
      'masked: double [0,2]',
    );
    expect(maskLabel(null)).toBe('full');
  });
});

describe('sweep CSV', () => {
  it('parses rows with boolean convergence flags', () => {
    const rows = parseSweep(read('sweep.csv'), 'sweep.csv');
    expect(rows.length).toBe(4 * 21);
    const ns = [...new Set(rows.map((r) => r.N))].sort();
    expect(ns).toEqual([2, 3, 4, 5]);
    for (const r of rows) {
      expect(typeof r.converged).toBe('boolean');
      expect(r.inv_T).toBeCloseTo(1 / r.T, 6);
    }
  });

  it('turns a nan duration cell into NaN, not a crash', () => {
    const text = read('sweep.csv');
    const line = text.split('\n')[1].split(',');
    line[2] = 'nan';
    line[3] = 'nan';
    const rows = parseSweep(text + line.join(',') + '\n', 'sweep.csv');
    const last = rows[rows.length - 1];
    expect(Number.isNaN(last.T)).toBe(true);
    expect(Number.isNaN(last.inv_T)).toBe(true);
  });

  it('names the missing column', () => {
    const text = read('sweep.csv').replace('inv_T', 'invT');
    expect(() => parseSweep(text, 'sweep.csv')).toThrow('sweep.csv: missing column "inv_T"');
  });
});
