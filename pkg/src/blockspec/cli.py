"""Command-line interface.

Every artifact carries the tool version and the full argument set.  Output
is deterministic for a fixed configuration: block work is reduced in index
order and BLAS is pinned to one thread, so ``BLOCKSPEC_THREADS`` only
changes speed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .anharmonic import AnharmonicSpec, anharmonic_decay_check, anharmonic_galerkin_spectrum
from .dixmier import SeparableSymbol, dixmier_estimate, geometric_grid, hypothesis_check
from .errors import BlockSpecError, InvalidParameterError
from .generators import beta_family, map_diagonal, so3_schrodinger_symbol, su2_tensor_norm
from .io import csv_text, load_symbol, load_tensor, make_generator
from .sampling import random_explicit_symbol
from .series import TruncationPolicy
from .spectral import decay_exponent_fit, operator_norm, schatten_norm, singular_values_block, trace
from .tensor import (
    TensorSymbol,
    direct_schatten_norm,
    direct_trace,
    tensor_operator_norm,
    tensor_schatten_norm,
    tensor_trace,
)


class UsageError(Exception):
    pass


def _p_value(text):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _p_list(text):
    return [_p_value(t) for t in text.split(",") if t.strip()]


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "handler"}


def _policy(args):
    return TruncationPolicy(l_max=args.l_max, tail_tol=args.tail_tol,
                            min_blocks=args.min_blocks, extrapolate=not args.no_extrapolate)


class Artifact:
    def __init__(self, result, header=None, rows=None):
        self.result = result
        self.header = header
        self.rows = rows

    def render(self, args):
        if args.format == "json":
            doc = {"tool": "blockspec", "version": __version__,
                   "config": _clean(_config(args)), "result": _clean(self.result)}
            return json.dumps(doc, indent=2) + "\n"
        if self.header is None:
            header, row = _flat_row(self.result)
            header_rows = (header, [row])
        else:
            header_rows = (self.header, self.rows)
        pre = [f"blockspec {__version__} config={json.dumps(_clean(_config(args)), sort_keys=True)}"]
        return csv_text(header_rows[0], header_rows[1], pre)


def _flat_row(result):
    keys = [k for k, v in result.items() if not isinstance(v, (dict, list, tuple))]
    return keys, [result[k] for k in keys]


# subcommands -------------------------------------------------------------

def cmd_norm(args):
    if (args.symbol is None) == (args.generator is None):
        raise UsageError("give exactly one of --symbol or --generator")
    if args.symbol is not None:
        with open(args.symbol) as fh:
            doc = json.load(fh)
        obj = load_tensor(args.symbol) if isinstance(doc, list) else load_symbol(args.symbol)
    else:
        obj = make_generator(args.generator, json.loads(args.params))
    t = _policy(args)
    tensor = isinstance(obj, TensorSymbol)
    if args.trace:
        est = tensor_trace(obj, t) if tensor else trace(obj, t)
    elif math.isinf(args.p):
        est = tensor_operator_norm(obj, t) if tensor else operator_norm(obj, t)
    else:
        est = tensor_schatten_norm(obj, args.p, t) if tensor else schatten_norm(obj, args.p, t)
    return Artifact(est.to_dict())


def _rel(a, b):
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def _sv_multiset_error(a, b):
    sa, sb = singular_values_block(a), singular_values_block(b)
    expected = np.sort(np.outer(sa, sb).ravel())[::-1]
    got = singular_values_block(np.kron(a, b))
    return float(np.max(np.abs(got - expected)) / max(expected[0], 1e-300))


def cmd_tensor_check(args):
    rng = np.random.default_rng(args.seed)
    policy = TruncationPolicy(l_max=max(args.max_blocks, 4))
    worst = {}

    def record(name, err):
        worst[name] = max(worst.get(name, 0.0), err)

    for _ in range(args.pairs):
        a = random_explicit_symbol(rng, args.max_blocks, args.max_dim)
        b = random_explicit_symbol(rng, args.max_blocks, args.max_dim)
        ts = TensorSymbol([a, b])
        for p in args.p:
            if math.isinf(p):
                continue
            prod = tensor_schatten_norm(ts, p, policy).value
            factors = schatten_norm(a, p, policy).value * schatten_norm(b, p, policy).value
            direct = direct_schatten_norm(ts, p, args.max_blocks)
            record(f"multiplicativity p={p:g}", _rel(prod, factors))
            record(f"direct-oracle p={p:g}", _rel(prod, direct))
        l_a = int(rng.integers(a.partition.size))
        l_b = int(rng.integers(b.partition.size))
        record("kron-singular-values", _sv_multiset_error(a.block(l_a), b.block(l_b)))
    for _ in range(args.triples):
        ts = TensorSymbol([random_explicit_symbol(rng, args.max_blocks, args.max_dim)
                           for _ in range(3)])
        prod = tensor_trace(ts, policy).value
        record("trace-product", _rel(prod, direct_trace(ts, args.max_blocks)))

    checks = [{"check": k, "max_rel_error": v, "pass": v <= args.tol}
              for k, v in worst.items()]
    ok = all(c["pass"] for c in checks)
    result = {"pass": ok, "tolerance": args.tol, "checks": checks}
    rows = [(c["check"], c["max_rel_error"], c["pass"]) for c in checks]
    return Artifact(result, ["check", "max_rel_error", "pass"], rows), (0 if ok else 1)


def _norm_column(partial_sums, n, p):
    col = np.full(n, partial_sums[-1])
    col[:len(partial_sums)] = partial_sums
    return col ** (1.0 / p)


def cmd_su2_table(args):
    est = su2_tensor_norm(args.alpha, args.beta, args.p, _policy(args))
    a, b = est.factors
    n = max(a.blocks_used, b.blocks_used)
    ca = _norm_column(a.partial_sums, n, args.p)
    cb = _norm_column(b.partial_sums, n, args.p)
    rows = [(t, f"{t}/2" if t % 2 else str(t // 2), ca[t], cb[t], ca[t] * cb[t])
            for t in range(n)]
    rows.append(("final", "", a.value, b.value, est.value))
    header = ["t", "spin", "norm_alpha", "norm_beta", "product"]
    return Artifact(est.to_dict(), header, rows)


def cmd_so3_symbol(args):
    s = so3_schrodinger_symbol(args.gamma)
    if args.power is not None:
        s = map_diagonal(s, lambda d: d ** args.power)
    rows, blocks = [], []
    for l in range(args.l_max + 1):
        d = s.diag(l).real
        blocks.append({"l": l, "diagonal": d.tolist()})
        rows.extend((l, m, v) for m, v in zip(range(-l, l + 1), d))
    return Artifact({"gamma": args.gamma, "power": args.power, "blocks": blocks},
                    ["l", "m", "value"], rows)


def cmd_anharmonic(args):
    spec = AnharmonicSpec(k=args.k, l=args.l, mu=args.mu, points=args.points,
                          extent=args.extent)
    spectrum = anharmonic_galerkin_spectrum(spec, args.count)
    result = {"eigenvalues": spectrum.eigenvalues.tolist(), "spacing": spectrum.spacing,
              "hermitian_residual": spectrum.hermitian_residual,
              "turning_point": spectrum.turning_point,
              "boundary_warning": spectrum.boundary_warning}
    if args.decay_p is not None:
        result["decay_check"] = anharmonic_decay_check(spec, args.decay_p, args.count).to_dict()
    return Artifact(result, ["m", "E_m"], spectrum.rows())


def _read_values(path):
    fh = sys.stdin if path == "-" else open(path)
    try:
        text = fh.read()
    finally:
        if fh is not sys.stdin:
            fh.close()
    values = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        cells = [c for c in line.replace(",", " ").split() if c]
        try:
            values.append(float(cells[-1]))
        except ValueError:
            continue            # header line
    return values


def cmd_decay_fit(args):
    return Artifact(decay_exponent_fit(_read_values(args.input)).to_dict())


def _a_hat(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"--a-hat is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidParameterError("--a-hat must be a JSON object {frequency: coefficient}")
    out = {}
    for k, v in raw.items():
        out[int(k)] = complex(v[0], v[1]) if isinstance(v, list) else complex(v)
    return out


def cmd_dixmier(args):
    if args.grid_length < 3:
        raise UsageError("--grid-length must be at least 3")
    beta = beta_family(args.beta)
    sym = SeparableSymbol(beta, _a_hat(args.a_hat), name=args.beta)
    symbols = [sym] * args.factors
    grid = geometric_grid(args.p0, args.grid_length - 1)
    est = dixmier_estimate(symbols, grid, args.J)
    hyp = hypothesis_check(symbols, grid, args.J)
    result = est.to_dict()
    result["hypothesis"] = hyp.to_dict()
    header = ["p", "g", "h"]
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text(header, est.rows()))
    return Artifact(result, header, est.rows())


# parser ------------------------------------------------------------------

def _common(parser, policy=True):
    parser.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--seed", type=int, default=0)
    if policy:
        parser.add_argument("--l-max", "--lmax", dest="l_max", type=int, default=400)
        parser.add_argument("--tail-tol", type=float, default=1e-8)
        parser.add_argument("--min-blocks", type=int, default=4)
        parser.add_argument("--no-extrapolate", action="store_true",
                            help="report plain partial sums without a fitted tail")


def build_parser():
    parser = argparse.ArgumentParser(prog="blockspec",
                                     description="Matrix-symbol calculus for invariant operators.")
    parser.add_argument("--version", action="version", version=f"blockspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="Schatten norm, trace or operator norm of a symbol")
    _common(p)
    p.add_argument("--symbol", help="symbol JSON file (a list of documents is a tensor)")
    p.add_argument("--generator", choices=("su2-laplacian", "so3-schrodinger",
                                           "torus-multiplier", "anharmonic"))
    p.add_argument("--params", default="{}", help="generator parameters as JSON")
    p.add_argument("--p", type=_p_value, default=2.0)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(handler=cmd_norm)

    p = sub.add_parser("tensor-check", help="random self-check of tensor identities")
    _common(p, policy=False)
    p.add_argument("--p", type=_p_list, default=[0.5, 1.0, 2.0, 3.0])
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--triples", type=int, default=25)
    p.add_argument("--max-blocks", type=int, default=8)
    p.add_argument("--max-dim", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(handler=cmd_tensor_check)

    p = sub.add_parser("su2-table", help="partial norms of SU(2) x SU(2) Bessel potentials")
    _common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.set_defaults(handler=cmd_su2_table, format="csv")

    p = sub.add_parser("so3-symbol", help="diagonal of the SO(3) Schroedinger symbol")
    _common(p, policy=False)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--l-max", "--lmax", dest="l_max", type=int, default=10)
    p.add_argument("--power", type=float, help="raise the diagonal to this power")
    p.set_defaults(handler=cmd_so3_symbol)

    p = sub.add_parser("anharmonic", help="anharmonic oscillator levels and decay check")
    _common(p, policy=False)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--extent", type=float, default=12.0)
    p.add_argument("--count", type=int, default=40)
    p.add_argument("--decay-p", type=float, help="run the S_p decay check for this p")
    p.set_defaults(handler=cmd_anharmonic)

    p = sub.add_parser("decay-fit", help="log-log decay slope of a descending sequence")
    _common(p, policy=False)
    p.add_argument("--input", required=True, help="file with one value per line, '-' for stdin")
    p.set_defaults(handler=cmd_decay_fit)

    p = sub.add_parser("dixmier", help="Dixmier-trace estimate on the torus")
    _common(p, policy=False)
    p.add_argument("--beta", default="inv-sqrt-quadratic",
                   help="inv-sqrt-quadratic, inv-power:s or delta:c")
    p.add_argument("--a-hat", default='{"0": 1}',
                   help='Fourier coefficients of a, e.g. {"0": 2, "1": 0.5, "-1": 0.5}')
    p.add_argument("--factors", type=int, default=1, help="number of tensor copies")
    p.add_argument("--p0", type=float, default=1.5)
    p.add_argument("--grid-length", type=int, default=7)
    p.add_argument("--J", type=int, default=1024)
    p.add_argument("--csv", help="also write the (p, g, h) table here")
    p.set_defaults(handler=cmd_dixmier)
    return parser


def _write(text, path):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _fail(exc, code):
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with threadpool_limits(limits=1):
            out = args.handler(args)
        artifact, code = out if isinstance(out, tuple) else (out, 0)
        _write(artifact.render(args), args.output)
        if code:
            sys.stderr.write(json.dumps({"error": "CheckFailed", "message":
                                         "one or more identities exceeded the tolerance",
                                         "exit_code": code}) + "\n")
        return code
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(exc, 2)
    except (BlockSpecError, ValueError, OSError, KeyError) as exc:
        return _fail(exc, 1)


if __name__ == "__main__":
    sys.exit(main())
