"""File-emitting command-line interface.

Every command is deterministic: identical arguments (plus identical seed
where randomness is involved) produce byte-identical output.  Floats are
printed as 17-significant-digit scientific notation so files round-trip
losslessly through text.
"""

import argparse
import json
import os
import sys

import numpy as np

from .config import ArrayConfig
from .double import diagonalize_double
from .errors import (DegenerateField, QuadratureNotConverged, WqpulseError)
from .observables import duration_sweep, pulse_duration
from .oracle import PsiIncoherentOracle
from .pulse import ModeMask, cut_field, incoherent_wavefunction, \
    two_photon_field
from .single import diagonalize_single

__all__ = ["main"]


def _fmt_json(obj) -> str:
    """JSON text with every float in %.16e form, keys sorted."""
    if isinstance(obj, dict):
        items = ("%s:%s" % (json.dumps(str(k)), _fmt_json(obj[k]))
                 for k in sorted(obj))
        return "{" + ",".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_fmt_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (float, np.floating)):
        return "%.16e" % obj
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if obj is None:
        return "null"
    return json.dumps(obj)


def _write_out(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_mask(cfg: ArrayConfig, single_spec, double_spec) -> ModeMask:
    if single_spec in (None, "all"):
        inc_s = None
    elif single_spec == "bright":
        inc_s = (diagonalize_single(cfg).superradiant_index(),)
    else:
        inc_s = tuple(int(x) for x in single_spec.split(","))
    if double_spec in (None, "all"):
        inc_d = None
    else:
        inc_d = tuple(int(x) for x in double_spec.split(","))
    return ModeMask(included_single=inc_s, included_double=inc_d)


def _add_system_args(p):
    p.add_argument("--n", type=int, required=True, help="number of atoms")
    p.add_argument("--phi", type=float, required=True,
                   help="inter-atomic propagation phase, in [0, pi]")


def _add_mask_args(p):
    p.add_argument("--mask-single", default=None, metavar="LIST|bright|all",
                   help="single-excitation modes kept (comma indices, "
                        "'bright' for the fastest mode, default all)")
    p.add_argument("--mask-double", default=None, metavar="LIST|all",
                   help="two-excitation modes kept (comma indices, "
                        "default all)")


def cmd_spectrum(args) -> int:
    cfg = ArrayConfig(n_atoms=args.n, phi=args.phi)
    payload = {
        "config": {"n_atoms": cfg.n_atoms, "phi": cfg.phi},
        "single": diagonalize_single(cfg).to_json_dict(),
        "double": (diagonalize_double(cfg).to_json_dict()
                   if cfg.n_atoms > 1 else None),
    }
    _write_out(_fmt_json(payload) + "\n", args.out)
    return 0


def cmd_pulse(args) -> int:
    cfg = ArrayConfig(n_atoms=args.n, phi=args.phi)
    mask = _parse_mask(cfg, args.mask_single, args.mask_double)
    field = two_photon_field(cfg, t_max=args.tmax, n_points=args.steps,
                             mask=mask)
    with open(args.out, "w") as fh:
        field.write_csv(fh)
    return 0


def cmd_cut(args) -> int:
    cfg = ArrayConfig(n_atoms=args.n, phi=args.phi)
    mask = _parse_mask(cfg, args.mask_single, args.mask_double)
    cut = cut_field(cfg, kind=args.kind, parameter=args.value,
                    extent=args.extent, n_points=args.steps, mask=mask)
    meta = {
        "n_atoms": cfg.n_atoms, "phi": cfg.phi, "kind": args.kind,
        "parameter": args.value, "extent": args.extent,
        "mask": mask.describe(),
    }
    with open(args.out, "w") as fh:
        cut.write_csv(fh, meta)
    return 0


def cmd_duration(args) -> int:
    cfg = ArrayConfig(n_atoms=args.n, phi=args.phi)
    try:
        res = pulse_duration(cfg)
    except DegenerateField:
        print(f"degenerate field: T undefined for N={args.n}",
              file=sys.stderr)
        return 1
    lines = [
        "T=%.16e" % res.duration,
        "inv_T=%.16e" % res.inverse,
        "t_max=%.16e" % res.t_max_used,
        "converged=%s" % ("true" if res.converged else "false"),
        "tail_est=%.16e" % res.relative_tail_estimate,
    ]
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    n_list = [int(x) for x in args.n_list.split(",")]
    phi_grid = np.linspace(args.phi_min, args.phi_max, args.phi_steps)
    jobs = args.jobs
    if jobs is None:
        jobs = int(os.environ.get("WQED_JOBS", 0)) or None
    result = duration_sweep(n_list, phi_grid, jobs=jobs,
                            max_doublings=args.max_doublings)
    with open(args.out, "w") as fh:
        result.write_csv(fh)
    failed = [r for r in result.rows if r.error is not None]
    if failed:
        for r in failed:
            print(f"row N={r.n_atoms} phi={r.phi:.6g}: {r.error}",
                  file=sys.stderr)
        print(f"{len(failed)} of {len(result.rows)} rows failed; "
              "partial output retained", file=sys.stderr)
        return 2
    return 0


def cmd_oracle_check(args) -> int:
    cfg = ArrayConfig(n_atoms=args.n, phi=args.phi)
    rng = np.random.default_rng(args.seed)
    pts = 0.2 + rng.random((args.samples, 2)) * (args.tspan - 0.2)
    oracle = PsiIncoherentOracle(cfg, t_max=float(args.tspan) + 0.5)
    samples = []
    worst = 0.0
    for t1, t2 in pts:
        analytic = complex(incoherent_wavefunction(cfg, t1, t2))
        numeric, quad_err = oracle.evaluate(t1, t2)
        abs_err = abs(analytic - numeric)
        rel_err = abs_err / max(abs(numeric), 1e-300)
        worst = max(worst, rel_err)
        samples.append({
            "point": [float(t1), float(t2)],
            "analytic": [analytic.real, analytic.imag],
            "numeric": [numeric.real, numeric.imag],
            "abs_err": abs_err,
            "rel_err": rel_err,
            "quadrature_err": float(quad_err),
        })
    payload = {
        "config": {"n_atoms": cfg.n_atoms, "phi": cfg.phi},
        "seed": args.seed,
        "samples": samples,
        "worst_rel_err": worst,
    }
    _write_out(_fmt_json(payload) + "\n", args.out)
    return 0


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation failures: single line, exit 1.

    Exit 2 is reserved for convergence failures so scripted callers can
    tell the two apart.
    """

    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="wqpulse",
        description="Two-photon pulse scattering on a waveguide-coupled "
                    "atom array: spectra, wavefunction grids, cuts, "
                    "duration sweeps, oracle checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum",
                       help="single+double complex eigenfrequency spectra")
    _add_system_args(p)
    p.add_argument("--out", default=None, help="JSON path (default stdout)")
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("pulse", help="two-photon field on a square grid")
    _add_system_args(p)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, required=True,
                   help="grid points per axis")
    _add_mask_args(p)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(fn=cmd_pulse)

    p = sub.add_parser("cut", help="1d section of the two-photon field")
    _add_system_args(p)
    p.add_argument("--kind", required=True,
                   choices=["diagonal", "antidiagonal", "edge"])
    p.add_argument("--value", type=float, default=0.0,
                   help="t1+t2 for antidiagonal, fixed t2 for edge")
    p.add_argument("--extent", type=float, required=True,
                   help="half-width (antidiagonal) or maximum time")
    p.add_argument("--steps", type=int, default=400)
    _add_mask_args(p)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(fn=cmd_cut)

    p = sub.add_parser("duration", help="transmitted-pulse duration T")
    _add_system_args(p)
    p.add_argument("--out", default=None, help="path (default stdout)")
    p.set_defaults(fn=cmd_duration)

    p = sub.add_parser("sweep", help="duration table over (N, phi)")
    p.add_argument("--n-list", required=True, help="comma list, e.g. 2,3,4")
    p.add_argument("--phi-min", type=float, required=True)
    p.add_argument("--phi-max", type=float, required=True)
    p.add_argument("--phi-steps", type=int, required=True)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default WQED_JOBS or all cores)")
    p.add_argument("--max-doublings", type=int, default=14)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("oracle-check",
                       help="analytic field vs quadrature oracle")
    _add_system_args(p)
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tspan", type=float, default=5.0,
                   help="sample times drawn from (0.2, tspan]")
    p.add_argument("--out", default=None, help="JSON path (default stdout)")
    p.set_defaults(fn=cmd_oracle_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except QuadratureNotConverged as exc:
        print(f"convergence failure: {str(exc).splitlines()[0]}",
              file=sys.stderr)
        return 2
    except (WqpulseError, ValueError) as exc:
        print(f"error: {str(exc).splitlines()[0]}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
