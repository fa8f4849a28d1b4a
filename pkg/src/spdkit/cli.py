"""Command-line interface.

Subcommands: ``div``, ``sweep``, ``bounds``, ``gaussian``, ``multiway`` and
``gram``.  Exit codes: 0 success, 1 usage error, 2 invalid input,
3 infinite divergence, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import gaussian as gs
from . import multiway as mw
from .abld import AbParams, BoundKind, ab_logdet, ab_logdet_spectrum, domain_bound
from .errors import InputError, InvalidParams, NumericalFailure, SpdKitError
from .io import (
    ResultRecord,
    file_digest,
    fmt,
    format_matrix,
    read_gaussian,
    read_kronecker,
    read_matrix,
    thread_count,
)
from .named import Named, ab_kernel, named_divergence
from .spd import relative_spectrum
from .spectral_gamma import (
    SubspaceTruncate,
    ThresholdShrink,
    apply_shrinkage,
    hilbert_metric,
    retained,
)
from .symmetrization import sym_ab_logdet

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INFINITE, EXIT_NUMERIC = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise InvalidParams("steps must be at least 1")
    if lo > hi:
        raise InvalidParams("range minimum exceeds maximum")
    return np.array([lo]) if steps == 1 else np.linspace(lo, hi, steps)


def _parse_shrink(text):
    if text is None:
        return None
    kind, _, rest = text.partition(":")
    args = [float(x) for x in rest.split(":") if x]
    if kind == "threshold" and len(args) in (1, 2):
        return ThresholdShrink(*args)
    if kind == "truncate" and len(args) == 1:
        return SubspaceTruncate(args[0])
    raise InvalidParams(f"bad shrinkage rule {text!r}; use threshold:TAU[:GAMMA] or truncate:TAU")


def _emit(args, record: ResultRecord, lines):
    if args.json:
        print(record.to_json())
    else:
        for line in lines:
            print(line)
    return EXIT_OK if record.finite else EXIT_INFINITE


# -- div ---------------------------------------------------------------------


def cmd_div(args) -> int:
    t0 = time.perf_counter()
    p, q = read_matrix(args.p), read_matrix(args.q)
    terms = None
    regime = None
    if args.named:
        value = named_divergence(args.named, p, q, args.param)
        params = {"named": args.named, "param": args.param}
    else:
        if args.alpha is None or args.beta is None:
            raise _UsageError("div needs --alpha and --beta, or --named")
        params = {"alpha": args.alpha, "beta": args.beta, "sym": args.sym}
        regime = AbParams(args.alpha, args.beta).regime.value
        if args.sym:
            res = sym_ab_logdet(p, q, args.alpha, args.beta, args.sym)
        else:
            res = ab_logdet(p, q, args.alpha, args.beta, return_terms=args.terms)
            if res.terms is not None:
                terms = [float(t) for t in res.terms]
        value = res.value
    finite = math.isfinite(value)
    record = ResultRecord(
        digest=file_digest(args.p, args.q),
        params=params,
        value=value,
        finite=finite,
        terms=terms,
        regime=regime,
        timing=time.perf_counter() - t0,
    )
    lines = [f"value {fmt(value)}"]
    if regime is not None:
        lines.append(f"regime {regime}")
    if terms is not None:
        lines.append("terms " + " ".join(fmt(t) for t in terms))
    return _emit(args, record, lines)


# -- sweep / bounds ------------------------------------------------------------


def _sweep_rows(args):
    alphas = _grid(*args.alpha_range)
    betas = _grid(*args.beta_range)
    # Row order: beta varies fastest.
    return [(float(a), float(b)) for a in alphas for b in betas]


def _sweep_cell(lam, p, q, sym, a, b):
    if sym:
        return sym_ab_logdet(p, q, a, b, sym)
    return ab_logdet_spectrum(lam, a, b)


def cmd_sweep(args) -> int:
    cells = _sweep_rows(args)
    if args.emit == "bounds":
        return _write_bounds(args, cells)
    if args.p is None or args.q is None:
        raise _UsageError("sweep needs two matrix files (or --emit bounds)")
    p, q = read_matrix(args.p), read_matrix(args.q)
    shrink = _parse_shrink(args.shrink)
    if shrink is not None and args.sym:
        raise _UsageError("--shrink cannot be combined with --sym")
    lam = retained(apply_shrinkage(relative_spectrum(p, q).lambdas, shrink))
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda ab: _sweep_cell(lam, p, q, args.sym, *ab), cells))
    lines = ["alpha,beta,value,finite"]
    for (a, b), r in zip(cells, results):
        lines.append(f"{fmt(a)},{fmt(b)},{fmt(r.value)},{str(r.finite).lower()}")
    _write_lines(args.output, lines)
    return EXIT_OK


def _bound_row(a, b):
    if AbParams(a, b).regime.name == "BOTH_ZERO":
        return f"{fmt(a)},{fmt(b)},undefined,"
    bound = domain_bound(a, b)
    value = "" if bound.kind is BoundKind.NONE else fmt(bound.value)
    return f"{fmt(a)},{fmt(b)},{bound.kind.value},{value}"


def _write_bounds(args, cells) -> int:
    lines = ["alpha,beta,kind,value"] + [_bound_row(a, b) for a, b in cells]
    _write_lines(args.output, lines)
    return EXIT_OK


def cmd_bounds(args) -> int:
    args.emit = "bounds"
    return _write_bounds(args, _sweep_rows(args))


def _write_lines(output, lines):
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# -- gaussian ----------------------------------------------------------------


def _gaussian_params(args):
    fam = args.family
    if fam == "gamma":
        if args.alpha is None or args.beta is None:
            raise _UsageError("--family gamma needs --alpha and --beta")
        return args.alpha, args.beta
    if fam == "renyi":
        if args.alpha is None:
            raise _UsageError("--family renyi needs --alpha")
        return args.alpha, 1.0 - args.alpha
    return {"kl": (1.0, 0.0), "bhatt": (0.5, 0.5), "cs": (1.0, 1.0)}[fam]


def cmd_gaussian(args) -> int:
    t0 = time.perf_counter()
    p, q = read_gaussian(args.p), read_gaussian(args.q)
    a, b = _gaussian_params(args)
    if args.family == "kl":
        total = gs.gaussian_kl(p, q)
        d = p.mean - q.mean
        maha = 0.5 * float(d @ q.cov.solve(d))
        logdet = total - maha
    else:
        if args.family == "renyi" and not 0 < args.alpha < 1:
            raise InvalidParams("Renyi order must lie in (0, 1)")
        res = gs.gaussian_gamma(p, q, a, b)
        total, logdet, maha = res.total, res.logdet_term, res.mahalanobis_term
    extra = {"logdet_term": logdet, "mahalanobis_term": maha}
    lines = [f"total {fmt(total)}", f"logdet_term {fmt(logdet)}", f"mahalanobis_term {fmt(maha)}"]
    if args.verify:
        method = "montecarlo" if args.verify == "mc" else "quadrature"
        est = gs.numeric_divergence_oracle(p, q, a, b, method=method, budget=args.budget, seed=args.seed)
        diff = abs(est.estimate - total)
        extra.update(oracle=est.estimate, oracle_error=est.error, difference=diff,
                     method=method, seed=args.seed if method == "montecarlo" else None)
        lines += [f"oracle {fmt(est.estimate)}", f"oracle_error {fmt(est.error)}", f"difference {fmt(diff)}"]
    record = ResultRecord(
        digest=file_digest(args.p, args.q),
        params={"family": args.family, "alpha": a, "beta": b},
        value=total,
        finite=True,
        timing=time.perf_counter() - t0,
        extra=extra,
    )
    return _emit(args, record, lines)


# -- multiway ----------------------------------------------------------------


def _expanded_value(metric, p, q):
    ep, eq = mw.expand_kronecker(p), mw.expand_kronecker(q)
    lam = relative_spectrum(ep, eq).lambdas
    if metric == "hilbert":
        return hilbert_metric(ep, eq)
    if metric == "stein":
        return float(np.sum(lam - np.log(lam) - 1.0))
    return float(np.sum(np.log(lam) ** 2))


def cmd_multiway(args) -> int:
    t0 = time.perf_counter()
    p, q = read_kronecker(args.p), read_kronecker(args.q)
    if args.normalize:
        p, q = mw.normalize_factors(p), mw.normalize_factors(q)
    if args.metric == "hilbert":
        value = mw.multiway_hilbert(p, q)
    elif args.metric == "stein":
        value = mw.multiway_stein(q, p)
    else:
        value = mw.multiway_riemannian_sq(p, q)
    lines = [f"value {fmt(value)}"]
    extra = {}
    if args.check_expand:
        ev = _expanded_value(args.metric, p, q)
        extra = {"expanded": ev, "difference": abs(ev - value)}
        lines += [f"expanded {fmt(ev)}", f"difference {fmt(abs(ev - value))}"]
    record = ResultRecord(
        digest=file_digest(args.p, args.q),
        params={"metric": args.metric, "normalize": args.normalize},
        value=value,
        finite=True,
        timing=time.perf_counter() - t0,
        extra=extra,
    )
    return _emit(args, record, lines)


# -- gram --------------------------------------------------------------------


def cmd_gram(args) -> int:
    t0 = time.perf_counter()
    files = sorted(Path(args.directory).glob("*.csv"))
    if not files:
        raise InputError(f"no .csv matrices found in {args.directory}")
    mats = [read_matrix(f) for f in files]
    gram = ab_kernel(mats, args.alpha, args.beta, args.gamma)
    text = format_matrix(gram.matrix)
    print(f"min_eigenvalue {fmt(gram.min_eigenvalue)}", file=sys.stderr)
    if args.output:
        Path(args.output).write_text(text)
    if args.json:
        record = ResultRecord(
            digest=file_digest(*files),
            params={"alpha": args.alpha, "beta": args.beta, "gamma": args.gamma},
            value=gram.min_eigenvalue,
            finite=True,
            timing=time.perf_counter() - t0,
            extra={"files": [f.name for f in files], "symmetrization": gram.symmetrization,
                   "gram": gram.matrix.tolist()},
        )
        print(record.to_json())
    elif not args.output:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


class _UsageError(Exception):
    pass


def _range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected MIN:MAX:STEPS")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError("expected MIN:MAX:STEPS") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spdkit", description="AB log-det divergences between SPD matrices.")
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a single-line JSON record")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("div", parents=[common], help="divergence between two matrix files")
    d.add_argument("p")
    d.add_argument("q")
    d.add_argument("--alpha", type=float)
    d.add_argument("--beta", type=float)
    d.add_argument("--named", choices=[n.value for n in Named])
    d.add_argument("--param", type=float, help="parameter of a named divergence")
    d.add_argument("--sym", choices=["type1", "type2"])
    d.add_argument("--terms", action="store_true", help="print per-eigenvalue terms")
    d.set_defaults(func=cmd_div)

    for name in ("sweep", "bounds"):
        s = sub.add_parser(name, parents=[common], help="(alpha, beta) grid as CSV" if name == "sweep" else "domain bounds grid")
        if name == "sweep":
            s.add_argument("p", nargs="?")
            s.add_argument("q", nargs="?")
            s.add_argument("--sym", choices=["type1", "type2"])
            s.add_argument("--shrink", help="threshold:TAU[:GAMMA] or truncate:TAU")
            s.add_argument("--emit", choices=["values", "bounds"], default="values")
        s.add_argument("--alpha-range", type=_range, required=True, metavar="MIN:MAX:STEPS")
        s.add_argument("--beta-range", type=_range, required=True, metavar="MIN:MAX:STEPS")
        s.add_argument("-o", "--output")
        s.set_defaults(func=cmd_sweep if name == "sweep" else cmd_bounds)

    g = sub.add_parser("gaussian", parents=[common], help="divergence between two Gaussian model files")
    g.add_argument("p")
    g.add_argument("q")
    g.add_argument("--family", choices=["gamma", "kl", "bhatt", "renyi", "cs"], default="gamma")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--verify", choices=["quadrature", "mc"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--budget", type=int)
    g.set_defaults(func=cmd_gaussian)

    m = sub.add_parser("multiway", parents=[common], help="divergence between Kronecker model files")
    m.add_argument("p")
    m.add_argument("q")
    m.add_argument("--metric", choices=["hilbert", "stein", "riemannian"], default="hilbert")
    m.add_argument("--normalize", action="store_true")
    m.add_argument("--check-expand", action="store_true")
    m.set_defaults(func=cmd_multiway)

    k = sub.add_parser("gram", parents=[common], help="kernel Gram matrix of a directory of matrices")
    k.add_argument("directory")
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--beta", type=float, required=True)
    k.add_argument("--gamma", type=float, required=True)
    k.add_argument("-o", "--output")
    k.set_defaults(func=cmd_gram)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"spdkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"spdkit: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"spdkit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SpdKitError as exc:
        print(f"spdkit: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
