"""Command-line entry point: ``martylab <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 internal or numerical error. Failures also print a one-line JSON summary
to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import gmpy2
from gmpy2 import mpfr

from martylab.construct import (
    ConstructedFamily,
    ConstructionError,
    VerificationError,
    check_vanishing,
    construct_family,
    domain_region,
)
from martylab.expcalc import build_registry
from martylab.hermite import HermiteData, SingularSystemError, hermite_interpolate, hermite_oracle
from martylab.numerics import (
    MIN_PRECISION,
    precision_from_env,
    real_to_str,
    set_precision,
)
from martylab.verify import Region, grid_sup, heat_map, member_evaluator, remark3_family

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

log = logging.getLogger("martylab")


class UsageError(ValueError):
    pass


def parse_n_list(text: str) -> list[int]:
    """``"1..6"``, ``"2,4,8"`` or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            ns = list(range(int(lo), int(hi) + 1))
        else:
            ns = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse n list {text!r}") from exc
    if not ns or any(n < 1 for n in ns):
        raise UsageError(f"n list {text!r} must be nonempty with positive entries")
    return ns


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def write_csv(path: str, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def _emit(out: str | None, text: str) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _positive_real(text: str) -> mpfr:
    try:
        value = mpfr(text)
    except ValueError as exc:
        raise UsageError(f"not a number: {text!r}") from exc
    if gmpy2.is_nan(value) or gmpy2.is_infinite(value):
        raise UsageError(f"not a finite number: {text!r}")
    return value


# -- subcommands ------------------------------------------------------------

def cmd_construct(args) -> int:
    alpha = _positive_real(args.alpha)
    c = _positive_real(args.C)
    if args.k0 < 2:
        raise UsageError("--k0 must be at least 2")
    if not alpha > 1:
        raise UsageError("--alpha must exceed 1")
    if not c > 0:
        raise UsageError("--C must be positive")
    if args.grid < 3:
        raise UsageError("--grid must be at least 3")
    ns = parse_n_list(args.n)
    family = construct_family(args.k0, alpha, c, ns, precision_bits=args.precision,
                              resolution=args.grid, workers=args.workers, strict=False)
    _emit(args.out, dump_json(family.to_json()))
    for m in family.members:
        log.info("n=%d pass=%s max log quotient=%s", m.n, m.verification["pass"],
                 m.verification["max_log_quotient"])
    if not family.passed:
        failed = [m.n for m in family.members if not m.verification["pass"]]
        return _fail(EXIT_FAILED, "verification_failed", "members failed verification",
                     members=failed)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.grid < 3:
        raise UsageError("--grid must be at least 3")
    scale = _positive_real(args.threshold_scale)
    if not scale > 0:
        raise UsageError("--threshold-scale must be positive")
    data = json.loads(Path(args.file).read_text(encoding="utf-8"))
    if args.precision is None:
        set_precision(int(data["spec"]["precision_bits"]))
    family = ConstructedFamily.from_json(data)
    spec = family.spec
    threshold = gmpy2.log(spec.C * scale)
    rows, failed = [], []
    for member in family.members:
        report = grid_sup(member_evaluator(member), domain_region(), spec.k0, spec.alpha,
                          args.grid, threshold)
        vanishing = check_vanishing(member, spec.k0)
        ok = report.passed and vanishing.passed
        if not ok:
            failed.append(member.n)
        rows.append([member.n, args.grid, real_to_str(report.max_log_quotient),
                     real_to_str(report.argmax_z.real), real_to_str(report.argmax_z.imag),
                     ok])
    header = ["n", "resolution", "max_log_quotient", "argmax_re", "argmax_im", "pass"]
    if args.report:
        write_csv(args.report, header, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    if failed:
        return _fail(EXIT_FAILED, "verification_failed", "members failed verification",
                     members=failed)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    if args.example != "remark3":
        raise UsageError(f"unknown example {args.example!r}")
    if args.k < 2 or args.n < 1:
        raise UsageError("need --k >= 2 and --n >= 1")
    if args.grid < 3:
        raise UsageError("--grid must be at least 3")
    f = remark3_family(args.k, args.n)
    region = Region.strip(1 - f.zeta, 1, _positive_real(args.radius))
    rows = [[real_to_str(z.real), real_to_str(z.imag), real_to_str(q), real_to_str(s)]
            for z, q, s in heat_map(f, region, args.k, 1, args.grid)]
    write_csv(args.out, ["re", "im", "log_quotient", "log_spherical"], rows)
    return EXIT_OK


def cmd_phipsi(args) -> int:
    if args.k < 2:
        raise UsageError("--k must be at least 2")
    _emit(args.out, dump_json(build_registry(args.k).to_json()))
    return EXIT_OK


def cmd_hermite(args) -> int:
    try:
        data = HermiteData.from_json(json.loads(Path(args.file).read_text(encoding="utf-8")))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid HermiteData: {exc}") from exc
    poly = hermite_oracle(data) if args.oracle else hermite_interpolate(data)
    _emit(args.out, dump_json(poly.to_json()))
    return EXIT_OK


# -- plumbing ---------------------------------------------------------------

def _fail(code: int, status: str, message: str, **details) -> int:
    sys.stderr.write(json.dumps({"status": status, "exit_code": code, "message": message,
                                 **details}) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help="working precision in bits (default: $MARTYLAB_PRECISION or 256)")
    common.add_argument("--workers", type=int, default=1, help="worker processes (0 = auto)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="martylab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="build and verify a family")
    p.add_argument("--k0", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--C", required=True)
    p.add_argument("--n", required=True, help="A..B or comma-separated list")
    p.add_argument("--grid", type=int, default=101, help="verification grid per axis")
    p.add_argument("--out", help="output JSON (default: stdout)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="re-verify a family JSON on a grid")
    p.add_argument("file")
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--threshold-scale", default="1")
    p.add_argument("--report", help="CSV report path (default: stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diagnose", parents=[common], help="quotient heat map of an example")
    p.add_argument("--example", default="remark3")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--radius", default="3", help="clip the strip to |z| <= radius")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("phipsi", parents=[common], help="dump the phi/psi registry")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_phipsi)

    p = sub.add_parser("hermite", parents=[common], help="interpolate HermiteData JSON")
    p.add_argument("file")
    p.add_argument("--oracle", action="store_true", help="use the linear-solve oracle")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hermite)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        try:
            bits = args.precision if args.precision is not None else precision_from_env()
        except ValueError as exc:
            raise UsageError(f"bad precision setting: {exc}") from exc
        if bits < MIN_PRECISION:
            raise UsageError(f"precision must be at least {MIN_PRECISION} bits")
        if args.workers < 0:
            raise UsageError("--workers must be non-negative")
        set_precision(bits)
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage_error", str(exc))
    except VerificationError as exc:
        return _fail(EXIT_FAILED, "verification_failed", str(exc), stage=exc.stage, n=exc.n)
    except (ConstructionError, SingularSystemError, ArithmeticError) as exc:
        return _fail(EXIT_INTERNAL, "numerical_error", str(exc))
    except (OSError, KeyError, ValueError) as exc:
        return _fail(EXIT_INTERNAL, "internal_error", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
