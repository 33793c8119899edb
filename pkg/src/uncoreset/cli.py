"""Command-line front end: build, verify and bench coresets.

Exit codes: 0 success, 1 unreadable input or corrupted coreset, 2 unsupported
family or dimension, 3 parameter out of range, 4 guarantee violated.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .artifact import CoresetArtifact
from .coresets import (
    MergeReduceParams,
    SampleParams,
    UnsupportedFamilyError,
    build_rc_disc,
    build_rc_sample,
    build_re_disc,
    build_re_sample,
    build_rq,
    rq_alpha,
)
from .io import (
    FormatError,
    detect_format,
    dumps_report,
    format_coord,
    parse_coord,
    read_points,
    write_points,
)
from .model import UncertainPointSet
from .queries import expected_fraction, location_counts
from .ranges import FAMILIES, FamilyDescriptor, HalfLine, Interval, Range, Rect
from .verify import measure_rc_error, measure_re_error, quantization_check, variance_report

EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_RANGE, EXIT_VIOLATION = 0, 1, 2, 3, 4
SEED_ENV = "UNCORESET_SEED"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_PARSE, message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: FamilyDescriptor
    kind: str
    method: str
    eps: float
    delta: float
    eps_prime: float
    c_samp: float
    c_size: float
    c_disc: float
    c_part: float | None
    beta: float
    seed: int
    budget: int
    threads: int

    def merge_reduce_params(self) -> MergeReduceParams:
        return MergeReduceParams(
            beta=self.beta,
            c_part=self.c_part,
            c_size=self.c_size,
            c_disc=self.c_disc,
            seed=self.seed,
            verify_budget=self.budget,
            threads=self.threads,
        )

    def sample_params(self) -> SampleParams:
        return SampleParams(delta=self.delta, c_samp=self.c_samp)


def check_eps(kind: str, eps: float, eps_prime: float) -> None:
    upper = 0.5 if kind == "rq" else 1.0
    if not 0 < eps < upper:
        raise CliError(EXIT_RANGE, f"eps={eps} outside (0, {upper})")
    if kind == "rq" and not 0 < eps_prime < 0.5:
        raise CliError(EXIT_RANGE, f"eps'={eps_prime} outside (0, 0.5)")


def _family(name: str, dim: int) -> FamilyDescriptor:
    if name not in FAMILIES:
        raise CliError(EXIT_UNSUPPORTED, f"unknown range family {name!r}; choose from {FAMILIES}")
    try:
        return FamilyDescriptor(name, dim)
    except ValueError as e:
        raise CliError(EXIT_UNSUPPORTED, str(e)) from None


def make_config(args: argparse.Namespace, eps: float | None = None) -> RunConfig:
    seed = args.seed
    if os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise CliError(EXIT_RANGE, f"{SEED_ENV} must be an integer") from None
    eps = args.eps if eps is None else eps
    check_eps(args.kind, eps, args.eps_prime)
    try:
        cfg = RunConfig(
            args.command, _family(args.family, args.dim), args.kind, args.method, eps,
            args.delta, args.eps_prime, args.c_samp, args.c_size, args.c_disc, args.c_part,
            args.beta, seed, args.budget, args.threads,
        )
        # constructing the params validates them up front
        cfg.merge_reduce_params()
        cfg.sample_params()
    except ValueError as e:
        raise CliError(EXIT_RANGE, str(e)) from None
    return cfg


def _load(path: str, fmt: str | None) -> UncertainPointSet:
    try:
        return read_points(path, fmt)
    except FormatError as e:
        raise CliError(EXIT_PARSE, str(e)) from None


def _check_dims(P: UncertainPointSet, f: FamilyDescriptor) -> None:
    if P.d != f.d:
        raise CliError(EXIT_UNSUPPORTED, f"family dimension {f.d} != data dimension {P.d}")


def build(P: UncertainPointSet, cfg: RunConfig) -> CoresetArtifact:
    f = cfg.family
    _check_dims(P, f)
    try:
        if cfg.kind == "rq":
            params = cfg.merge_reduce_params() if cfg.method == "discrepancy" else cfg.sample_params()
            return build_rq(P, f, cfg.eps, cfg.eps_prime, cfg.method, params, cfg.seed)
        if cfg.method == "sample":
            builder = build_re_sample if cfg.kind == "re" else build_rc_sample
            return builder(P, f, cfg.eps, cfg.sample_params(), cfg.seed)
        builder = build_re_disc if cfg.kind == "re" else build_rc_disc
        return builder(P, f, cfg.eps, cfg.merge_reduce_params())
    except UnsupportedFamilyError as e:
        raise CliError(EXIT_UNSUPPORTED, str(e)) from None


def artifact_meta(P: UncertainPointSet, art: CoresetArtifact, cfg: RunConfig) -> dict:
    stats = dict(art.stats)
    if "rq" in stats:
        rq = stats.pop("rq")
        stats["rq"] = {"eps": rq.eps, "eps_prime": rq.eps_prime, "alpha": rq.alpha, "valid": rq.valid}
    ledger = [
        {
            "step": r.step,
            "stage": r.stage,
            "halved": r.halved,
            "set_size": r.set_size,
            "sets": r.sets,
            "pair_discs": list(r.pair_discs),
            "disc_bound": r.disc_bound,
            "step_error": r.step_error,
        }
        for r in art.ledger
    ]
    return {
        "kind": art.kind,
        "method": art.method,
        "family": {"kind": cfg.family.kind, "d": cfg.family.d, "vc_dim": cfg.family.vc_dim},
        "params": art.params,
        "seed": cfg.seed,
        "ledger": ledger,
        "ledger_sum": art.ledger_sum,
        "disc_sum": art.disc_sum,
        "sizes": {"n": P.n, "k": P.k, "d": P.d, "coreset": art.size},
        "stats": stats,
    }


def cmd_build(args) -> int:
    cfg = make_config(args)
    P = _load(args.input, args.format)
    art = build(P, cfg)
    out = Path(args.output)
    write_points(art.T, out, args.format or detect_format(args.input))
    Path(f"{out}.meta.json").write_text(dumps_report(artifact_meta(P, art, cfg)))
    print(f"wrote {art.size} of {P.n} points to {out}", file=sys.stderr)
    return EXIT_OK


def _sidecar(path: str) -> dict:
    meta = Path(f"{path}.meta.json")
    if not meta.exists():
        return {}
    try:
        return json.loads(meta.read_text())
    except json.JSONDecodeError as e:
        raise CliError(EXIT_PARSE, f"{meta}: {e.msg}") from None


def parse_range(text: str, f: FamilyDescriptor) -> Range:
    """'x' for a half-line, 'a,b' for an interval, 'a1,b1,..,ad,bd' for a rectangle."""
    try:
        v = [parse_coord(c) for c in text.split(",")]
    except FormatError as e:
        raise CliError(EXIT_PARSE, f"--range: {e}") from None
    want = {"halfline": 1, "interval": 2, "rect": 2 * f.d}[f.kind]
    if len(v) != want:
        raise CliError(EXIT_PARSE, f"--range needs {want} values for {f.kind} in d={f.d}")
    try:
        if f.kind == "halfline":
            return HalfLine(v[0])
        if f.kind == "interval":
            return Interval(v[0], v[1])
        return Rect(tuple(zip(v[::2], v[1::2])))
    except ValueError as e:
        raise CliError(EXIT_PARSE, f"--range: {e}") from None


def probe_report(P, T, f: FamilyDescriptor, r: Range, eps_prime: float, alpha: float | None) -> dict:
    """Errors at one given range: RE, RC per threshold and optionally quantization."""
    cp, ct = location_counts(P, r), location_counts(T, r)
    k = P.k
    rc = {}
    for i in range(1, k + 1):
        gp = Fraction(sum(c >= i for c in cp), P.n)
        gt = Fraction(sum(c >= i for c in ct), T.n)
        rc[format_coord(Fraction(i, k))] = {"P": gp, "T": gt, "error": abs(gp - gt)}
    out = {
        "range": repr(r),
        "re": {"P": expected_fraction(P, r), "T": expected_fraction(T, r)},
        "rc": rc,
    }
    out["re"]["error"] = abs(out["re"]["P"] - out["re"]["T"])
    if alpha is not None:
        q = quantization_check(P, T, f, eps_prime, alpha, r=r)
        out["quantization"] = q.as_dict()
    return out


def verify_report(P: UncertainPointSet, T: UncertainPointSet, cfg: RunConfig) -> tuple[dict, bool]:
    f = cfg.family
    _check_dims(P, f)
    if T.k != P.k or T.d != P.d:
        raise CliError(EXIT_PARSE, f"coreset has k={T.k}, d={T.d}; input has k={P.k}, d={P.d}")
    try:
        re = measure_re_error(P, T, f, budget=cfg.budget, seed=cfg.seed)
        rc = measure_rc_error(P, T, f, seed=cfg.seed)
    except ValueError as e:
        raise CliError(EXIT_PARSE, str(e)) from None
    r, _ = rc.rc_witness
    var = variance_report(T, r, rc.rc_error, P)
    variance = {
        "range": repr(r),
        "variance": var.variance,
        "group_sum": var.group_sum,
        "bound": var.bound,
        "holds": var.holds,
        "groups": [
            {"i": g.i, "size": len(g.members), "w_T": g.w_T, "w_P": g.w_P, "variance": g.variance}
            for g in var.groups
        ],
    }
    report = {
        "kind": cfg.kind,
        "eps": cfg.eps,
        "sizes": {"n": P.n, "k": P.k, "d": P.d, "coreset": T.n},
        "re": re.as_dict(),
        "rc": rc.as_dict(),
        "variance": variance,
    }
    measured = re.re_error if cfg.kind in ("re", "rq") else rc.rc_error
    ok = measured <= cfg.eps
    if cfg.kind == "rq":
        alpha = rq_alpha(float(re.re_error), cfg.eps_prime, T.n)
        q = quantization_check(P, T, f, cfg.eps_prime, alpha, budget=cfg.budget, seed=cfg.seed)
        report["quantization"] = q.as_dict()
        ok = ok and q.passed
    report["passed"] = bool(ok)
    return report, bool(ok)


def _add_probe(report: dict, P, T, args, cfg: RunConfig) -> None:
    if args.range is not None:
        r = parse_range(args.range, cfg.family)
        report["probe"] = probe_report(P, T, cfg.family, r, cfg.eps_prime, args.alpha)


def cmd_verify(args) -> int:
    meta = _sidecar(args.coreset)
    for name in ("kind", "eps"):
        if getattr(args, name) is None:
            setattr(args, name, meta.get(name) if name == "kind" else meta.get("params", {}).get(name))
    if args.kind is None:
        args.kind = "re"
    if args.eps is None:
        raise CliError(EXIT_RANGE, "no --eps given and no metadata sidecar to read it from")
    if args.kind == "rq" and meta and "eps_prime" in meta.get("params", {}):
        args.eps_prime = meta["params"]["eps_prime"]
    cfg = make_config(args)
    P = _load(args.input, args.format)
    T = _load(args.coreset, args.format)
    report, ok = verify_report(P, T, cfg)
    _add_probe(report, P, T, args, cfg)
    text = dumps_report(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_VIOLATION


BENCH_COLUMNS = (
    "n", "k", "d", "family", "kind", "method", "eps_nominal", "coreset_size",
    "eps_measured", "wall_time", "ledger_sum",
)


def _bench_rows(P: UncertainPointSet, cfg: RunConfig, eps_list, methods):
    for method in methods:
        for eps in eps_list:
            run = RunConfig(**{**cfg.__dict__, "method": method, "eps": eps})
            start = time.perf_counter()
            art = build(P, run)
            wall = time.perf_counter() - start
            if cfg.kind == "rc":
                measured = measure_rc_error(P, art.T, cfg.family, seed=cfg.seed).rc_error
            else:
                measured = measure_re_error(P, art.T, cfg.family, cfg.budget, cfg.seed).re_error
            yield (
                P.n, P.k, P.d, cfg.family.kind, cfg.kind, method, eps, art.size,
                f"{float(measured):.6f}", f"{wall:.3f}", f"{float(art.ledger_sum):.6f}",
            )


def cmd_bench(args) -> int:
    eps_list = [float(e) for e in args.eps_list.split(",") if e.strip()] if args.eps_list else []
    if not eps_list:
        raise CliError(EXIT_RANGE, "empty eps sweep")
    methods = [m for m in args.methods.split(",") if m]
    for m in methods:
        if m not in ("sample", "discrepancy"):
            raise CliError(EXIT_RANGE, f"unknown method {m!r}")
    for e in eps_list:
        check_eps(args.kind, e, args.eps_prime)
    args.eps = eps_list[0]
    cfg = make_config(args)
    if args.input:
        P = _load(args.input, args.format)
    else:
        rng = np.random.default_rng(cfg.seed)
        P = UncertainPointSet.from_array(rng.random((args.n, args.k, cfg.family.d)))
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for row in _bench_rows(P, cfg, sorted(eps_list, reverse=True), methods):
            w.writerow(row)
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _common(p: argparse.ArgumentParser, eps_required: bool = True) -> None:
    p.add_argument("--family", default="halfline", help="halfline, interval or rect")
    p.add_argument("--dim", type=int, default=1, help="dimension of the range family")
    p.add_argument("--kind", choices=("re", "rc", "rq"), default=None if not eps_required else "re")
    p.add_argument("--method", choices=("sample", "discrepancy"), default="discrepancy")
    if eps_required:
        p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1, help="failure probability for sampling")
    p.add_argument("--eps-prime", dest="eps_prime", type=float, default=0.1)
    p.add_argument("--c-samp", dest="c_samp", type=float, default=1.0)
    p.add_argument("--c-size", dest="c_size", type=float, default=1.0)
    p.add_argument("--c-disc", dest="c_disc", type=float, default=4.0)
    p.add_argument("--c-part", dest="c_part", type=float, default=None)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0, help=f"overridden by ${SEED_ENV}")
    p.add_argument("--budget", type=int, default=100_000, help="verification range budget")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uncoreset", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="build a coreset")
    b.add_argument("input")
    b.add_argument("-o", "--output", required=True)
    _common(b)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="measure a coreset against its input")
    v.add_argument("input")
    v.add_argument("coreset")
    v.add_argument("-o", "--output", help="report path (stdout if omitted)")
    _common(v, eps_required=False)
    v.add_argument("--eps", type=float, default=None, help="defaults to the sidecar value")
    v.add_argument("--range", default=None, help="also report errors at this one range")
    v.add_argument("--alpha", type=float, default=None, help="quantization shift for --range")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", help="sweep eps and emit a CSV table")
    s.add_argument("input", nargs="?", help="input set; a uniform random set if omitted")
    s.add_argument("--eps-list", dest="eps_list", default="0.4,0.2,0.1")
    s.add_argument("--methods", default="sample,discrepancy")
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("-o", "--output", help="CSV path (stdout if omitted)")
    _common(s, eps_required=False)
    s.set_defaults(func=cmd_bench, kind="re")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = make_parser().parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise CliError(EXIT_RANGE, "--threads must be at least 1")
        return args.func(args)
    except CliError as e:
        print(f"uncoreset: error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
