"""Command-line front end.

Machine-readable results go to stdout (or ``--out``); diagnostics go to
stderr.  Exit codes: 0 success, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import BACKEND
from .depth import MinSearchConfig, TruncationArtifactError, bochner_check, depth
from .entanglement import (
    DEFAULT_TAU_SIGMAS,
    SeparabilityError,
    ncde,
    ncde_sweep,
    negativity,
    sweep_csv,
    werner_state,
)
from .fock import TruncationError, to_json
from .quasiprob import dump_poly, q_function, regularize
from .scaling import WitnessSpec, detect, lambda_map, witness, witness_expectation
from .states import parse_complex, parse_state

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(ValueError):
    pass


def _positive(text):
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _dims(text):
    try:
        dims = tuple(int(d) for d in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --dims {text!r}") from None
    if any(d < 2 for d in dims):
        raise argparse.ArgumentTypeError("each truncation must be >= 2")
    return dims


def _point(text):
    try:
        return tuple(parse_complex(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_grid(text: str) -> tuple:
    """``start:stop:step`` (stop included) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step))
            return tuple(round(start + i * step, 10) for i in range(n + 1))
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r} (expected start:stop:step)") from None


def _common_parser():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--dims", type=_dims, help="per-mode truncation, e.g. 24 or 12,12")
    g.add_argument("--tol", type=_positive, default=MinSearchConfig.abs_tol, help="positivity tolerance")
    g.add_argument("--tau-max", type=_positive, default=4.0, help="upper end of the depth search")
    g.add_argument("--seed", type=int, default=0xB0C4, help="seed for sampled diagnostics")
    g.add_argument("--out", help="write the result here instead of stdout")
    g.add_argument("--dump-poly", metavar="PATH", help="write the regularized polynomial to PATH")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="nonclassical", description="Non-classicality depth toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s (kernels: {BACKEND})")
    sub = parser.add_subparsers(dest="verb", required=True)

    def verb(name, help_, state=True):
        sp = sub.add_parser(name, help=help_, parents=[common])
        if state:
            sp.add_argument("--state", required=True, help="builtin:<name>[:arg] or operator JSON path")
        return sp

    verb("depth", "non-classicality depth of a state")
    sp = verb("scale", "apply the phase-space dilation map")
    sp.add_argument("-a", type=_positive, required=True)
    sp = verb("detect", "search for a negative dilated Q value")
    sp.add_argument("-a", type=_positive, action="append", help="fixed dilation(s) to try instead of a scan")
    sp.add_argument("--a-max", type=_positive, default=2.0)
    sp = verb("witness", "write the witness operator for (a, beta)", state=False)
    sp.add_argument("-a", type=_positive, required=True)
    sp.add_argument("--beta", type=_point, required=True, help="coherent amplitude(s), e.g. 0+0i or 1+0i,0-1i")
    sp.add_argument("--expect", metavar="STATE", help="report Tr[rho W] for this state instead")
    sp = verb("ncde", "entanglement depth of a two-mode state", state=False)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--state")
    src.add_argument("--p", type=float, help="Werner parameter")
    sp.add_argument("--tau-sigma", type=parse_grid, default=DEFAULT_TAU_SIGMAS)
    sp = verb("ncde-sweep", "entanglement depth over the Werner family (CSV)", state=False)
    sp.add_argument("--p", type=parse_grid, default=parse_grid("0:1:0.05"))
    sp.add_argument("--tau-sigma", type=parse_grid, default=DEFAULT_TAU_SIGMAS)
    sp.add_argument("--workers", type=int, default=1)
    verb("negativity", "partial-transpose negativity")
    sp = verb("qfunc", "Husimi function (or a regularized distribution) at points")
    sp.add_argument("--z", type=_point, action="append", required=True, help="point; repeat for several")
    sp.add_argument("--tau", type=_positive, default=1.0, help="regularization width (1 gives Q)")
    return parser


def _cfg(args):
    return MinSearchConfig(abs_tol=args.tol)


def _state(args, spec=None):
    try:
        return parse_state(spec or args.state, args.dims)
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _emit(args, text):
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(args, pg):
    if args.dump_poly:
        with open(args.dump_poly, "w") as fh:
            fh.write(dump_poly(pg))


def cmd_depth(args):
    rho = _state(args)
    res = depth(rho, args.tau_max, _cfg(args))
    out = res.to_dict()
    if math.isfinite(res.bracket[1]) and res.bracket[1] > 0:
        out["bochner_ok"] = bochner_check(rho, res.bracket[1], seed=args.seed)
    _dump(args, regularize(rho, res.bracket[1] if math.isfinite(res.bracket[1]) else args.tau_max))
    _emit(args, json.dumps(out))


def cmd_scale(args):
    rho = _state(args)
    mapped = lambda_map(rho, args.a)
    _dump(args, regularize(mapped, 1.0))
    _emit(args, to_json(mapped))


def cmd_detect(args):
    rho = _state(args)
    rep = detect(rho, _cfg(args), a_values=args.a, tau_max=args.tau_max, a_max=args.a_max)
    if not rep.reliable:
        print("warning: truncation tail exceeds the reliability bound", file=sys.stderr)
    _emit(args, json.dumps(rep.to_dict()))


def cmd_witness(args):
    if args.expect:
        rho = _state(args, args.expect)
        spec = WitnessSpec(args.a, args.beta, rho.dims)
        val = witness_expectation(rho, spec)
        _emit(args, json.dumps({"a": args.a, "beta": [[b.real, b.imag] for b in spec.beta], "expectation": val}))
        return
    dims = args.dims or (24,) * len(args.beta)
    if len(dims) == 1 and len(args.beta) > 1:
        dims = dims * len(args.beta)
    _emit(args, to_json(witness(WitnessSpec(args.a, args.beta, dims))))


def cmd_ncde(args):
    if args.state:
        rho, p = _state(args), None
    else:
        if not 0 <= args.p <= 1:
            raise InputError("p must lie in [0, 1]")
        rho, p = werner_state(args.p, (args.dims * 2 if args.dims and len(args.dims) == 1 else args.dims) or (8, 8)), args.p
    res = ncde(rho, args.tau_sigma, _cfg(args), p=p, tau_max=args.tau_max)
    if res.discrepancy:
        print("warning: closed-form admixture differs from the PPT bisection by more than 5%", file=sys.stderr)
    _emit(args, json.dumps(res.to_dict()))


def cmd_ncde_sweep(args):
    if any(not 0 <= p <= 1 for p in args.p):
        raise InputError("p grid must lie in [0, 1]")
    dims = (args.dims * 2 if args.dims and len(args.dims) == 1 else args.dims) or (8, 8)
    results = ncde_sweep(args.p, args.tau_sigma, _cfg(args), workers=args.workers, dims=dims)
    for r in results:
        if r.discrepancy:
            print(f"warning: admixture discrepancy at p={r.p:g}", file=sys.stderr)
    _emit(args, sweep_csv(results))


def cmd_negativity(args):
    _emit(args, json.dumps({"negativity": negativity(_state(args))}))


def cmd_qfunc(args):
    rho = _state(args)
    pts = np.array(args.z, dtype=complex)
    if pts.shape[1] != rho.modes:
        raise InputError(f"points need {rho.modes} amplitude(s)")
    if args.tau == 1.0:
        vals = [q_function(rho, z) for z in pts]
    else:
        pg = regularize(rho, args.tau)
        _dump(args, pg)
        vals = [float(v) for v in pg(pts).real]
    out = [{"z": [[c.real, c.imag] for c in z], "value": float(v)} for z, v in zip(pts, vals)]
    _emit(args, json.dumps({"tau": args.tau, "points": out}))


COMMANDS = {
    "depth": cmd_depth,
    "scale": cmd_scale,
    "detect": cmd_detect,
    "witness": cmd_witness,
    "ncde": cmd_ncde,
    "ncde-sweep": cmd_ncde_sweep,
    "negativity": cmd_negativity,
    "qfunc": cmd_qfunc,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.verb](args)
    except (TruncationError, InputError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, SeparabilityError, TruncationArtifactError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
