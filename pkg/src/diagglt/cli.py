"""Command-line front end: ``diagglt <subcommand> [options]``.

Reports go to stdout as JSON (default) or CSV.  With ``--out DIR`` (or the
``DIAGGLT_OUT`` environment variable) they are also written to files.  Exit
codes: 0 success/PASS, 1 FAIL verdict or failed hypothesis, 2 usage or
configuration error.  Errors are always reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from diagglt import config
from diagglt.acs import d_acs_estimate, diagonal_extraction, p_value
from diagglt.distribution import verify_symbol, zero_distribution_test
from diagglt.errors import (ConstructionError, DiagGLTError, ExtractionError,
                            PreconditionError)
from diagglt.expr import evaluate, parse_symbol, to_symbol, to_text
from diagglt.glt_theorem import construct_glt_permutation
from diagglt.piecewise import piecewise_convergence_check
from diagglt.reports import csv_text, dumps, jsonable, read_diagonal_table
from diagglt.sequences import DiagonalSequence, geometric_schedule
from diagglt.symbols import Symbol, decreasing_rearrangement, nodes

OUT_ENV = "DIAGGLT_OUT"


class UsageError(DiagGLTError, ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    sizes: tuple
    tail_window: int
    threshold: float | None
    resolution: int
    seed: int
    out: str | None
    format: str
    options: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


# argument parsing ----------------------------------------------------------

def parse_sizes(text: str) -> tuple:
    """``a..b`` (doubling from ``a`` up to ``b``) or ``a,b,c``."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return geometric_schedule(int(a), int(b))
        sizes = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as e:
        raise UsageError(f"bad --sizes {text!r}: {e}") from None
    if not sizes or min(sizes) < 1:
        raise UsageError(f"bad --sizes {text!r}: sizes must be positive")
    return sizes


def parse_sequence(text: str, seed: int) -> DiagonalSequence:
    """Sequence descriptors: ``diag:<expr>``, ``shuffle:<expr>``, ``diag:1/i``,
    ``entry:<expr in i, n>`` and ``file:<path>`` (CSV with columns ``n,i,re,im``)."""
    kind, _, body = text.partition(":")
    body = body.strip()
    if not body:
        raise UsageError(f"bad sequence descriptor {text!r}: expected kind:body")
    if kind == "diag" and body.replace(" ", "") == "1/i":
        return DiagonalSequence.harmonic()
    if kind == "diag":
        return DiagonalSequence.sampled(to_symbol(body))
    if kind == "shuffle":
        return DiagonalSequence.shuffled(to_symbol(body), seed)
    if kind == "entry":
        node = parse_symbol(body, variables=("i", "n"))

        def gen(n):
            i = np.arange(1, n + 1, dtype=float)
            return np.broadcast_to(np.asarray(evaluate(node, {"i": i, "n": float(n)}),
                                              dtype=float), (n,)).copy()

        return DiagonalSequence(gen, f"entry:{to_text(node)}")
    if kind == "file":
        return DiagonalSequence.from_table(read_diagonal_table(body), f"file:{body}")
    raise UsageError(f"unknown sequence kind {kind!r} (use diag, shuffle, entry or file)")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--sizes", default=None, help="a..b (doubling) or a,b,c")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tail-window", type=int, default=config.DEFAULT_TAIL_WINDOW)
    common.add_argument("--threshold", type=float, default=None)
    common.add_argument("--resolution", type=int, default=config.DEFAULT_RESOLUTION)
    common.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV})")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = _Parser(prog="diagglt", description="Spectral symbols of diagonal matrix sequences.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("p-value", parents=[common], help="p(A_n) over the schedule")
    s.add_argument("--seq", required=True)

    s = sub.add_parser("acs-dist", parents=[common], help="d_acs estimate between two sequences")
    s.add_argument("--seq", required=True)
    s.add_argument("--against", required=True)

    s = sub.add_parser("zero-test", parents=[common], help="zero-distribution test")
    s.add_argument("--seq", required=True)
    s.add_argument("--eps", default=",".join(repr(e) for e in config.DEFAULT_EPSILONS))

    s = sub.add_parser("verify", parents=[common], help="check seq ~ symbol")
    s.add_argument("--seq", required=True)
    s.add_argument("--symbol", required=True)
    s.add_argument("--mode", choices=("eigen", "singular"), default="eigen")

    s = sub.add_parser("piecewise", parents=[common], help="piecewise convergence to a symbol")
    s.add_argument("--seq", required=True)
    s.add_argument("--symbol", required=True)

    s = sub.add_parser("rearrange", parents=[common], help="decreasing rearrangement of a symbol")
    s.add_argument("--symbol", required=True)
    s.add_argument("--m", type=int, default=1000, help="grid size")

    s = sub.add_parser("extract", parents=[common], help="diagonal extraction from a family")
    s.add_argument("--family", required=True,
                   help="expression in x and m; column m is diag sampling of it")
    s.add_argument("--k-max", type=int, default=3)
    s.add_argument("--m-max", type=int, default=64)

    s = sub.add_parser("theorem-demo", parents=[common],
                       help="permute a sequence into one converging piecewise to its symbol")
    s.add_argument("--symbol", required=True)
    s.add_argument("--seq", default=None, help="default: shuffle:<symbol> with --seed")
    s.add_argument("--k-max", type=int, default=7)
    return p


# running -------------------------------------------------------------------

def _config(args) -> RunConfig:
    sizes = parse_sizes(args.sizes) if args.sizes else tuple(config.DEFAULT_SCHEDULE)
    if args.tail_window < 1:
        raise UsageError("--tail-window must be at least 1")
    skip = {"command", "sizes", "seed", "tail_window", "threshold", "resolution", "out", "format"}
    opts = {k: v for k, v in vars(args).items() if k not in skip}
    out = args.out or os.environ.get(OUT_ENV) or None
    return RunConfig(args.command, sizes, args.tail_window, args.threshold, args.resolution,
                     args.seed, out, args.format, opts)


def _kw_threshold(cfg):
    return {} if cfg.threshold is None else {"threshold": cfg.threshold}


def _p_table(cfg):
    seq = parse_sequence(cfg.options["seq"], cfg.seed)
    rows = [(n, p_value(seq(n))) for n in cfg.sizes]
    body = {"report": "p_value", "sequence": seq.descriptor,
            "rows": [{"n": n, "p": p} for n, p in rows]}
    return body, lambda h: csv_text(["n", "p"], rows, h), 0, {}


def _acs(cfg):
    a = parse_sequence(cfg.options["seq"], cfg.seed)
    b = parse_sequence(cfg.options["against"], cfg.seed)
    r = d_acs_estimate(a, b, cfg.sizes, cfg.tail_window)
    return r.to_dict(), r.to_csv, 0, {}


def _zero(cfg):
    seq = parse_sequence(cfg.options["seq"], cfg.seed)
    eps = [float(e) for e in str(cfg.options["eps"]).split(",") if e.strip()]
    r = zero_distribution_test(seq, eps, cfg.sizes, tail_window=cfg.tail_window,
                               **_kw_threshold(cfg))
    return r.to_dict(), r.to_csv, 0 if r.verdict else 1, {}


def _verify(cfg):
    seq = parse_sequence(cfg.options["seq"], cfg.seed)
    r = verify_symbol(seq, to_symbol(cfg.options["symbol"]), None, cfg.sizes,
                      mode=cfg.options["mode"], tail_window=cfg.tail_window,
                      resolution=cfg.resolution, **_kw_threshold(cfg))
    return r.to_dict(), r.to_csv, 0 if r.verdict else 1, {}


def _piecewise(cfg):
    seq = parse_sequence(cfg.options["seq"], cfg.seed)
    r = piecewise_convergence_check(seq, to_symbol(cfg.options["symbol"]), cfg.sizes,
                                    tail_window=cfg.tail_window, resolution=cfg.resolution,
                                    **_kw_threshold(cfg))
    return r.to_dict(), r.to_csv, 0 if r.verdict else 1, {}


def _rearrange(cfg):
    f = to_symbol(cfg.options["symbol"])
    m = int(cfg.options["m"])
    g = decreasing_rearrangement(f, m)
    x = nodes(m)
    rows = list(zip(x, f(x), g.values))
    body = {"report": "rearrangement", "symbol": f.descriptor, "m": m,
            "rows": [{"x": a, "f": b, "rearranged": c} for a, b, c in rows]}
    return body, lambda h: csv_text(["x", "f", "rearranged"], rows, h), 0, {}


def _extract(cfg):
    node = parse_symbol(cfg.options["family"], variables=("x", "m"))

    def family(m):
        sym = Symbol.from_callable(lambda x: np.broadcast_to(
            np.asarray(evaluate(node, {"x": x, "m": float(m)}), dtype=float), np.shape(x)),
            descriptor=f"{to_text(node)}|m={m}")
        return DiagonalSequence.sampled(sym)

    r = diagonal_extraction(family, cfg.sizes, k_max=cfg.options["k_max"],
                            m_max=cfg.options["m_max"], tail_window=cfg.tail_window)
    ok = r.reaches_top and r.verification_decreasing
    extra = {"extract_verification.csv": r.verification_csv()}
    return r.to_dict(), r.to_csv, 0 if ok else 1, extra


def _theorem(cfg):
    f = to_symbol(cfg.options["symbol"])
    seq_text = cfg.options["seq"] or f"shuffle:{cfg.options['symbol']}"
    seq = parse_sequence(seq_text, cfg.seed)
    r = construct_glt_permutation(seq, f, None, cfg.sizes, k_max=cfg.options["k_max"],
                                  tail_window=cfg.tail_window, resolution=cfg.resolution)
    rows = [(n, a, c) for n, a, c in zip(cfg.sizes, r.sorted_check.distances,
                                         r.permuted_check.distances)]
    extra = {f"permutation_n{n}.csv": r.plan.to_csv(n) for n in cfg.sizes}
    table = lambda h: csv_text(["n", "d_M_sorted_vs_rearrangement", "d_M_permuted_vs_symbol"],
                               rows, h)
    return r.to_dict(), table, 0 if r.verdict else 1, extra


COMMANDS = {"p-value": _p_table, "acs-dist": _acs, "zero-test": _zero, "verify": _verify,
            "piecewise": _piecewise, "rearrange": _rearrange, "extract": _extract,
            "theorem-demo": _theorem}


def run_experiment(cfg: RunConfig, stdout=None) -> int:
    """Run one subcommand, print its report and write files; returns the exit code."""
    stdout = stdout or sys.stdout
    body, to_csv, code, extra = COMMANDS[cfg.command](cfg)
    header = {"config": cfg.to_dict()}
    if cfg.format == "json":
        text = dumps({"config": cfg.to_dict(), "result": body}) + "\n"
    else:
        text = to_csv(header)
    stdout.write(text)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{cfg.command}.{cfg.format}").write_text(text)
        for name, content in extra.items():
            if name.endswith(".csv") and content.startswith("# "):
                first, rest = content.split("\n", 1)
                meta = json.loads(first[2:])
                content ="# " + json.dumps(jsonable({**meta, **header}), sort_keys=True) + "\n" + rest
            (out / name).write_text(content)
    return code


def _fail(kind, exc, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc), "exit_code": code},
                                sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
    except UsageError as e:
        return _fail("usage", e, 2)
    try:
        return run_experiment(cfg)
    except PreconditionError as e:
        return _fail("precondition", e, 1)
    except (ExtractionError, ConstructionError) as e:
        return _fail(type(e).__name__, e, 1)
    except (DiagGLTError, ValueError, OSError) as e:
        return _fail(type(e).__name__, e, 2)


if __name__ == "__main__":
    sys.exit(main())
