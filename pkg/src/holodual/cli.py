"""Command-line front end: ``holodual {transform|norm|kernel-sweep|verify|counterexample}``.

Exit status is 0 on success or when every selected check passes, 1 when a
check fails or is inconclusive, and 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import kernels, transforms, verify
from .geometry import DomainSpec, GeometryError
from .quadrature import QuadratureSpec
from .report import _clean, reports_to_csv, reports_to_jsonl
from .series import CoefficientSeries, SeriesFormatError, Space, norm2

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_point(text: str) -> np.ndarray:
    """``"re,im;re,im"`` -> complex pair."""
    try:
        parts = [p.split(",") for p in text.split(";")]
        if len(parts) != 2 or any(len(p) != 2 for p in parts):
            raise ValueError
        return np.array([complex(float(a), float(b)) for a, b in parts])
    except ValueError:
        raise UsageError(f"--z expects 're,im;re,im', got {text!r}") from None


def parse_orders(text: str) -> tuple[int, int, int, int]:
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"--gauss-order expects N or N,N,N,N, got {text!r}") from None
    if len(vals) == 1:
        vals *= 4
    if len(vals) != 4:
        raise UsageError("--gauss-order expects one or four integers")
    return tuple(vals)


def _domain(text: str) -> DomainSpec:
    try:
        return DomainSpec.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _quad(args, mode="gauss") -> QuadratureSpec:
    try:
        return QuadratureSpec(mode=mode, gauss_orders=parse_orders(args.gauss_order),
                              mc_samples=args.mc_samples, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read_series(path: str) -> CoefficientSeries:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return CoefficientSeries.from_json(text)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- subcommands


def cmd_transform(args) -> int:
    s = _read_series(args.input)
    d = _domain(args.domain)
    out = {"kind": args.kind, "path": args.path, "domain": d.to_dict()}
    if args.z is None:
        if args.path != "coeff":
            raise UsageError("--z is required for --path quad")
        img = {"fantappie": transforms.fantappie_coeff, "laplace": transforms.laplace_coeff}.get(args.kind)
        img = img(s) if img else transforms.borel_coeff(s, args.order)
        out["series"] = img.to_dict()
        _emit(args, _dump(out))
        return EXIT_OK
    z = parse_point(args.z)
    out["z"] = [[p.real, p.imag] for p in z]
    if args.path == "coeff":
        if args.kind != "borel" and d.variant != "diamond":
            raise UsageError("coefficient path is defined for --domain diamond only")
        val = transforms.evaluate_coeff_path(args.kind, s, z, args.order)
    elif args.kind == "fantappie":
        val = transforms.fantappie_quad(d, s, z, args.k, _quad(args), args.tol)
    elif args.kind == "laplace":
        val = transforms.laplace_quad(d, s, z, _quad(args), args.tol)
    else:
        res = transforms.borel_quad(s, z, args.order, tol=args.tol)
        out.update({"T": res.T, "tail_bound": res.tail_bound, "nodes": res.nodes})
        val = res.value
    out["value"] = {"re": val.real, "im": val.imag}
    _emit(args, _dump(out))
    return EXIT_OK


def cmd_norm(args) -> int:
    s = _read_series(args.input)
    lv = norm2(Space(args.space), s)
    _emit(args, _dump({"space": args.space, "log_norm2": lv, "norm2": math.exp(lv) if lv < 700 else math.inf,
                       "terms": len(s.support())}))
    return EXIT_OK


def cmd_kernel_sweep(args) -> int:
    d = _domain(args.domain)
    if not d.is_smooth:
        raise UsageError("kernel-sweep needs a smooth domain (ball or ellipsoid)")
    rep = kernels.ratio_sweep(d, args.which, args.count, args.seed)
    _emit(args, rep.to_csv() if args.format == "csv" else rep.to_json() + "\n")
    return EXIT_OK


def _emit_reports(args, reports) -> int:
    if args.format == "csv":
        text = reports_to_csv(reports)
    elif len(reports) == 1 and args.out:
        text = reports[0].to_json() + "\n"
    else:
        text = reports_to_jsonl(reports)
    _emit(args, text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        reports = verify.run_suite(args.test, kmax=args.kmax, seed=args.seed, mc_samples=args.mc_samples,
                                   q=_quad(args))
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    return _emit_reports(args, reports)


def cmd_counterexample(args) -> int:
    if args.kmax < 10_000:
        raise UsageError("--kmax must be >= 10000")
    fn = verify.counterexample_fantappie if args.which == "fantappie" else verify.counterexample_laplace
    return _emit_reports(args, [fn(args.kmax)])


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holodual", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")

    quad = argparse.ArgumentParser(add_help=False)
    quad.add_argument("--gauss-order", default="24", help="N or N,N,N,N node counts (default 24)")
    quad.add_argument("--mc-samples", type=int, default=1_000_000, help="Monte Carlo samples (default 1e6)")

    t = sub.add_parser("transform", parents=[common, quad], help="evaluate a transform")
    t.add_argument("--kind", choices=("fantappie", "laplace", "borel"), required=True)
    t.add_argument("--path", choices=("coeff", "quad"), default="quad")
    t.add_argument("--in", dest="input", required=True, help="series JSON file")
    t.add_argument("--z", help="evaluation point 're,im;re,im'; omit with --path coeff to get the image series")
    t.add_argument("--domain", default="diamond", help="ball | ellipsoid:a1,a2 | diamond | polydisc")
    t.add_argument("--k", type=int, default=3, help="Fantappie exponent (default 3)")
    t.add_argument("--order", type=int, default=2, help="Borel order n (default 2)")
    t.add_argument("--tol", type=float, default=1e-12, help="truncation tolerance (default 1e-12)")
    t.set_defaults(func=cmd_transform)

    n = sub.add_parser("norm", parents=[common], help="coefficient-space squared norm (log)")
    n.add_argument("--space", choices=[s.value for s in Space], required=True)
    n.add_argument("--in", dest="input", required=True)
    n.set_defaults(func=cmd_norm)

    k = sub.add_parser("kernel-sweep", parents=[common], help="sample a kernel ratio")
    k.add_argument("--domain", default="ball")
    k.add_argument("--which", choices=kernels.RATIOS, default="B_vs_RHS")
    k.add_argument("--count", type=int, default=2000)
    k.add_argument("--format", choices=("json", "csv"), default="json")
    k.set_defaults(func=cmd_kernel_sweep)

    v = sub.add_parser("verify", parents=[common, quad], help="run verification experiments")
    v.add_argument("--test", action="append", help=f"test id (repeatable; default all): {', '.join(verify.TEST_IDS)}")
    v.add_argument("--kmax", type=int, default=1_000_000)
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("counterexample", parents=[common], help="coefficient-space non-surjectivity experiment")
    c.add_argument("--which", choices=("fantappie", "laplace"), required=True)
    c.add_argument("--kmax", type=int, default=1_000_000)
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(func=cmd_counterexample)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except SeriesFormatError as exc:
        print(f"holodual: malformed series: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, GeometryError, transforms.TransformDomainError, ValueError) as exc:
        print(f"holodual: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
