/**
 * Input-file schema for the spectrum figure.
 *
 * The simulation CLI writes complex numbers as [re, im] pairs. Only the
 * fields the scatter actually draws are validated; extra keys pass through.
 */
import { z } from 'zod';

const pair = z.tuple([z.number(), z.number()]);

const spectrumSchema = z.object({
  config: z.object({ n_atoms: z.number().int().min(1), phi: z.number() }),
  single: z.object({ omega: z.array(pair) }),
  double: z.object({ epsilon: z.array(pair) }).nullable(),
});

export interface Complex {
  re: number;
  im: number;
}

export interface SpectrumDoc {
  nAtoms: number;
  phi: number;
  omega: Complex[];
  /** Empty for a single-atom run (the CLI writes "double": null). */
  epsilon: Complex[];
}

function toComplex(pairs: [number, number][]): Complex[] {
  return pairs.map(([re, im]) => ({ re, im }));
}

/** Parse and validate a spectrum JSON document written by the CLI. */
export function parseSpectrum(text: string, name: string): SpectrumDoc {
  if (text.trim().length === 0) {
    throw new Error(`${name}: empty file`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error(`${name}: not valid JSON`);
  }
  const res = spectrumSchema.safeParse(raw);
  if (!res.success) {
    const issue = res.error.issues[0];
    const where = issue.path.length > 0 ? issue.path.join('.') : 'document';
    throw new Error(`${name}: schema mismatch at "${where}" (${issue.message})`);
  }
  const doc = res.data;
  return {
    nAtoms: doc.config.n_atoms,
    phi: doc.config.phi,
    omega: toComplex(doc.single.omega),
    epsilon: doc.double === null ? [] : toComplex(doc.double.epsilon),
  };
}
