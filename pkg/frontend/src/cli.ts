#!/usr/bin/env node
/**
 * Figure-rendering command line. Reads files produced by the simulation CLI
 * and writes standalone SVG images to paths given by flags.
 */
import { readFileSync, writeFileSync } from 'fs';
import { basename } from 'path';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { parseCut, parsePulseGrid, parseSweep } from './csv.js';
import { plotCuts, plotPulseMap, plotSpectrum, plotSweep } from './plots.js';
import { parseSpectrum } from './schema.js';

function readInput(path: string): string {
  try {
    return readFileSync(path, 'utf8');
  } catch {
    throw new Error(`cannot read ${path}`);
  }
}

function writeImage(svg: string, out: string) {
  if (!out.toLowerCase().endsWith('.svg')) {
    throw new Error(`unsupported output format "${out}": give an .svg path`);
  }
  writeFileSync(out, svg);
  console.log(`wrote ${out}`);
}

// one-line message and exit 1 on any data error, no stack trace
function act(fn: () => void): void {
  try {
    fn();
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    process.exit(1);
  }
}

const inOpt = { type: 'string', demandOption: true, describe: 'input file from the simulation CLI' } as const;
const outOpt = { type: 'string', demandOption: true, describe: 'output SVG path' } as const;

yargs(hideBin(process.argv))
  .scriptName('wqpulse-figures')
  .command(
    'spectrum',
    'complex-plane scatter of collective mode energies',
    (y) => y.option('in', inOpt).option('out', outOpt),
    (argv) =>
      act(() => {
        const doc = parseSpectrum(readInput(argv.in), basename(argv.in));
        writeImage(plotSpectrum(doc), argv.out);
      }),
  )
  .command(
    'pulse-map',
    'log-scale colour map of the correlated field over (t1, t2)',
    (y) =>
      y
        .option('in', inOpt)
        .option('out', outOpt)
        .option('decades', { type: 'number', default: 6, describe: 'colour range below the maximum' }),
    (argv) =>
      act(() => {
        const grid = parsePulseGrid(readInput(argv.in), basename(argv.in));
        writeImage(plotPulseMap(grid, argv.decades), argv.out);
      }),
  )
  .command(
    'cuts',
    'overlay one or more field cuts (e.g. full vs mode-masked)',
    (y) =>
      y
        .option('in', { type: 'string', array: true, demandOption: true, describe: 'cut files, overlaid in order' })
        .option('out', outOpt)
        .option('log-y', { type: 'boolean', default: false }),
    (argv) =>
      act(() => {
        const cuts = argv.in.map((p) => parseCut(readInput(p), basename(p)));
        writeImage(plotCuts(cuts, argv.logY), argv.out);
      }),
  )
  .command(
    'sweep',
    'inverse pulse duration versus lattice phase, one curve per N',
    (y) => y.option('in', inOpt).option('out', outOpt),
    (argv) =>
      act(() => {
        const rows = parseSweep(readInput(argv.in), basename(argv.in));
        writeImage(plotSweep(rows), argv.out);
      }),
  )
  .demandCommand(1, 'pick a figure subcommand')
  .strict()
  .fail((msg, err) => {
    console.error(err ? err.message : msg);
    process.exit(1);
  })
  .parse();
