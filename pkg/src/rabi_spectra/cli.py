"""``rabi-spectra`` command line: spectrum, trace, figure, verify.

Exit codes: 0 success, 2 numerical failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import acceptance, report
from .errors import NotConverged, RabiSpectraError
from .figures import FIGURES
from .solver import Condition, ScanConfig, attach_oracle, scan_spectrum, trace_level_set

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 64

log = logging.getLogger("rabi_spectra")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclasses.dataclass
class RunConfig:
    scan: ScanConfig
    out: Path | None
    outdir: Path
    fmt: str
    plot: bool


def _range(text: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None
    if not a < b:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b


def _window(text: str):
    try:
        lam, mu = text.lower().split("x")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected L0:L1xM0:M1, got {text!r}") from None
    return _range(lam), _range(mu)


def read_config(path: Path) -> dict:
    """``key = value`` lines overriding ScanConfig fields; ``#`` starts a comment."""
    fields = {f.name: f.type for f in dataclasses.fields(ScanConfig)}
    cast = {"float": float, "int": int, "str": str}
    out = {}
    for i, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (t.strip() for t in line.partition("="))
        if not sep or key not in fields:
            raise UsageError(f"{path}:{i}: unknown setting {line!r}")
        try:
            out[key] = cast[fields[key]](value)
        except ValueError:
            raise UsageError(f"{path}:{i}: bad value for {key}: {value!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file overriding scan settings")
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    common.add_argument("--out", type=Path, help="data file (default stdout)")
    common.add_argument("--outdir", type=Path, default=Path("."), help="directory for curve files")
    common.add_argument("--plot", action="store_true", help="also render PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="rabi-spectra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", parents=[common], help="spectral points for fixed lambda, mu")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--x", dest="x_range", type=_range, required=True, metavar="A:B")
    s.add_argument("--no-oracle", action="store_true", help="skip the diagonalization cross-check")

    t = sub.add_parser("trace", parents=[common], help="zero curves of a condition in the (lambda, mu) plane")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--judd", type=int, metavar="N")
    g.add_argument("--f", type=int, metavar="N")
    g.add_argument("--wronskian", type=float, metavar="X")
    t.add_argument("--window", type=_window, required=True, metavar="L0:L1xM0:M1")
    t.add_argument("--resolution", type=int, default=241)

    f = sub.add_parser("figure", parents=[common], help="reproduce a canned figure")
    f.add_argument("name", choices=sorted(FIGURES))

    v = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    v.add_argument("suite", choices=["quick", "full"])
    return p


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def cmd_spectrum(args, rc: RunConfig) -> int:
    lam, mu = args.lam, args.mu
    points = scan_spectrum(lam, mu, *args.x_range, rc.scan)
    failed = False
    if not args.no_oracle:
        try:
            points = attach_oracle(points, lam, mu)
        except NotConverged as e:
            log.error("oracle did not converge: %s", e)
            failed = True
    _emit(report.write_rows(report.spectrum_rows(points), report.SPECTRUM_COLUMNS, rc.fmt), rc.out)
    return EXIT_NUMERIC if failed else EXIT_OK


def _clip(window):
    # conditions are singular on the axes; step just inside
    (l0, l1), (m0, m1) = window
    return (max(l0, 1e-3), l1), (max(m0, 1e-3), m1)


def cmd_trace(args, rc: RunConfig) -> int:
    if args.judd is not None:
        if args.judd < 1:
            raise UsageError("--judd needs N >= 1")
        cond, style, prefix = Condition.judd(args.judd), "dashed", f"J{args.judd}"
    elif args.f is not None:
        if args.f < 0:
            raise UsageError("--f needs N >= 0")
        cond, style, prefix = Condition.f(args.f), "solid", f"F{args.f}"
    else:
        try:
            cond = Condition.wronskian(args.wronskian)
        except ValueError as e:
            raise UsageError(str(e)) from None
        style, prefix = "solid", "S"
    lw, mw = _clip(args.window)
    cs = trace_level_set(cond, lw, mw, (args.resolution, args.resolution))
    files = report.write_curves(cs, rc.outdir, prefix)
    script = rc.outdir / f"{prefix}.gp"
    script.write_text(
        report.gnuplot_script([(files, style, cs.label)], "lambda", "mu", cs.label, f"{prefix}.png", (lw, mw))
    )
    if rc.plot:
        from .plotting import plot_level_sets

        plot_level_sets([(cs, style)], rc.outdir / f"{prefix}.png", title=cs.label)
    rows = [{"condition": cs.label, "curves": len(cs), "masked_cells": cs.masked_cells}]
    _emit(report.write_rows(rows, ["condition", "curves", "masked_cells"], rc.fmt), rc.out)
    return EXIT_OK


def cmd_figure(args, rc: RunConfig) -> int:
    bundle = FIGURES[args.name](rc.outdir, plot=rc.plot, cfg=rc.scan)
    rows = [{"key": k, "value": v} for k, v in sorted(bundle.summary.items())]
    rows.append({"key": "files", "value": len(bundle.files)})
    _emit(report.write_rows(rows, ["key", "value"], rc.fmt), rc.out)
    return EXIT_OK


def cmd_verify(args, rc: RunConfig) -> int:
    results = acceptance.run(args.suite)
    for r in results:
        print(r.line(), flush=True)
    bad = [r for r in results if not r.passed]
    print(f"{len(results) - len(bad)}/{len(results)} checks passed")
    return EXIT_OK if not bad else EXIT_NUMERIC


COMMANDS = {"spectrum": cmd_spectrum, "trace": cmd_trace, "figure": cmd_figure, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        overrides = read_config(args.config) if args.config else {}
        try:
            scan = ScanConfig(**overrides)
        except ValueError as e:
            raise UsageError(f"config: {e}") from None
        rc = RunConfig(scan, args.out, args.outdir, args.fmt, args.plot)
        rc.outdir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, rc)
    except (UsageError, ValueError) as e:
        print(f"rabi-spectra: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RabiSpectraError, ArithmeticError) as e:
        print(f"rabi-spectra: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
