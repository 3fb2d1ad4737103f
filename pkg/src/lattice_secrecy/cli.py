"""Command-line interface.

Exit codes: 0 success, 2 validation error or failed fit, 3 inconclusive
verdict, 4 failing verdict (or an uncertified verification record).
Errors are reported on stderr as a JSON object with ``error`` and ``message``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import Sequence

from .errors import LatticeSecrecyError, NoExactFit, ValidationError
from .lattice import LatticeSpec, ThetaData, c_ell, theta_series
from .polynomize import (
    SUPPORTED_LEVELS,
    check_conjecture,
    fit_polynomial,
    reconstruct,
    x_star,
)
from .qseries import QExpansion
from .ratequiv import rationally_equivalent
from .rigor import (
    convolution_identity_residual,
    to_jsonl,
    verify_eta_derivative_properties,
    verify_fourth_derivative_sweep,
    verify_third_derivative_negativity,
    widened_fourth_derivative_check,
)
from .secrecy import GridSpec, c_ell_scan, theta_quotient, unimodality_scan
from .special import lo, hi, precision_scope

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_FAILS = 0, 2, 3, 4
MODE_NAMES = {"exact": "exact_iff", "sufficient": "sufficient"}


def _load_json(source: str):
    """``source`` is a path to a UTF-8 JSON file or an inline JSON document."""
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"input is neither a file nor valid JSON: {exc}") from None


def _theta_input(data, order: int | None) -> QExpansion:
    """Theta series from ``{"q_coeffs": [...]}`` or from a lattice spec."""
    if isinstance(data, dict) and "q_coeffs" in data:
        return QExpansion.from_q_coeffs([int(c) for c in data["q_coeffs"]])
    if isinstance(data, list):
        return QExpansion.from_q_coeffs([int(c) for c in data])
    if isinstance(data, dict) and "type" in data:
        return theta_series(LatticeSpec.from_json(data), order or 16)
    raise ValidationError("expected {'q_coeffs': [...]} or a lattice specification")


def _ints(series: QExpansion) -> list:
    return [int(c) if c.denominator == 1 else str(c) for c in series.q_coeffs()]


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _write_csv(rows: Sequence[Sequence], header: Sequence[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    sys.stdout.write(buf.getvalue())


# -- subcommands ------------------------------------------------------------------


def cmd_theta(args) -> int:
    L = LatticeSpec.from_json(_load_json(args.input))
    series = theta_series(L, args.order)
    if args.format == "csv":
        _write_csv([[m, c] for m, c in enumerate(_ints(series))], ["power", "count"])
    else:
        _emit({"q_coeffs": _ints(series), "dim": L.dim})
    return EXIT_OK


def _fit(args):
    theta = _theta_input(_load_json(args.input), args.order)
    P = fit_polynomial(theta, args.ell, args.k, args.max_degree)
    rebuilt = reconstruct(P, theta.q_order)
    return theta, P, rebuilt == theta.truncate(rebuilt.order)


def cmd_fit(args) -> int:
    _, P, exact = _fit(args)
    _emit({**P.to_json(), "reconstruction_exact": exact})
    return EXIT_OK


def cmd_check(args) -> int:
    _, P, exact = _fit(args)
    mode = MODE_NAMES[args.mode] if args.mode else None
    verdict = check_conjecture(P, mode, args.precision)
    _emit({**P.to_json(), "reconstruction_exact": exact, **verdict.to_json()})
    return {"Holds": EXIT_OK, "Inconclusive": EXIT_INCONCLUSIVE, "Fails": EXIT_FAILS}[verdict.outcome]


def cmd_table(args) -> int:
    levels = [int(s) for s in args.levels.split(",")] if args.levels else list(SUPPORTED_LEVELS)
    rows = []
    for ell in levels:
        v = x_star(ell, args.precision)
        mid = (lo(v) + hi(v)) / 2
        rows.append([ell, repr(lo(v)), repr(hi(v)), f"{mid:.6g}"])
    if args.format == "json":
        _emit([{"ell": r[0], "lo": float(r[1]), "hi": float(r[2]), "value": r[3]} for r in rows])
    else:
        _write_csv(rows, ["ell", "lo", "hi", "value"])
    return EXIT_OK


def cmd_scan(args) -> int:
    grid = GridSpec(args.ratio, args.half_width)
    if args.quotient:
        kappa, lam = (Fraction(s) for s in args.quotient.split(","))
        fn = lambda y: theta_quotient(kappa, lam, y, args.precision)  # noqa: E731
        report = unimodality_scan(fn, 1, grid)
    else:
        if args.ell is None:
            raise ValidationError("scan needs --ell or --quotient")
        report = c_ell_scan(args.ell, args.kind, grid, args.precision)
    if args.format == "csv":
        verdicts = [c.verdict for c in report.cells] + [""]
        _write_csv([[repr(y), repr(lo(v)), repr(hi(v)), verdicts[i]]
                    for i, (y, v) in enumerate(report.samples)],
                   ["y", "lo", "hi", "cell_to_next"])
    else:
        _emit(report.to_json())
    return EXIT_FAILS if report.contradictions else EXIT_OK


def cmd_verify(args) -> int:
    if args.lemma == "fourth-derivative":
        records = [widened_fourth_derivative_check()] if args.widen else verify_fourth_derivative_sweep()
    elif args.lemma == "third-derivative":
        grid = [Fraction(s) for s in args.grid.split(",")] if args.grid else None
        records = verify_third_derivative_negativity(grid) if grid else verify_third_derivative_negativity()
    elif args.lemma == "eta":
        grid = [Fraction(s) for s in args.grid.split(",")] if args.grid else None
        records = verify_eta_derivative_properties(grid)
    else:
        rows = []
        for x, k, h in [(0.3, math.log(2), math.log(5)), (0.0, 0.5, 1.0), (-0.3, 0.0, 0.7)]:
            rows.append({"x": x, "k": k, "h": h, "residual": convolution_identity_residual(k, h, x)})
        sys.stdout.write("".join(json.dumps(r) + "\n" for r in rows))
        return EXIT_OK if all(r["residual"] < 1e-8 for r in rows) else EXIT_FAILS
    sys.stdout.write(to_jsonl(records))
    return EXIT_OK if all(r.certified for r in records) else EXIT_FAILS


def cmd_equiv(args) -> int:
    L = LatticeSpec.from_json(_load_json(args.input))
    _emit(rationally_equivalent(L, args.ell, args.k).to_json())
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lattice-secrecy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def positive_float(s):
        v = float(s)
        if not v > 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v

    def common(sp, fmt="json"):
        sp.add_argument("--precision", type=positive_float, default=1e-12)
        sp.add_argument("--format", choices=("json", "csv"), default=fmt)

    sp = sub.add_parser("theta", help="theta series coefficients of a lattice")
    sp.add_argument("input", help="lattice JSON file or inline JSON")
    sp.add_argument("--order", type=int, default=16, help="number of coefficients q^0..q^(order-1)")
    common(sp)
    sp.set_defaults(func=cmd_theta)

    for name, func in (("fit", cmd_fit), ("check", cmd_check)):
        sp = sub.add_parser(name, help="fit Theta = Theta_C^k P(g_ell)" + (" and decide" if name == "check" else ""))
        sp.add_argument("input", help="theta JSON ({'q_coeffs': [...]}) or lattice JSON")
        sp.add_argument("--ell", type=int, required=True)
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--max-degree", type=int, default=None)
        sp.add_argument("--order", type=int, default=None, help="series length when the input is a lattice")
        sp.add_argument("--mode", choices=tuple(MODE_NAMES), default=None)
        common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("table", help="g_ell(1/sqrt(ell)) for the supported levels")
    sp.add_argument("--levels", default=None, help="comma separated, default all supported")
    common(sp, "csv")
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("scan", help="certified monotonicity scan around the symmetry point")
    sp.add_argument("--ell", type=int)
    sp.add_argument("--kind", choices=("original", "modified"), default="original")
    sp.add_argument("--quotient", default=None, help="kappa,lambda for the theta_3 quotient")
    sp.add_argument("--ratio", type=float, default=1.1)
    sp.add_argument("--half-width", type=int, default=10)
    common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("verify", help="interval checks of the technical lemmas (JSON lines)")
    sp.add_argument("--lemma", choices=("fourth-derivative", "third-derivative", "eta", "convolution"),
                    required=True)
    sp.add_argument("--widen", action="store_true", help="single wide interval [1, 2] instead of the sweep")
    sp.add_argument("--grid", default=None, help="comma separated rationals")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("equiv", help="rational equivalence with (C^ell)^k")
    sp.add_argument("input", help="lattice JSON file or inline JSON")
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_equiv)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "order", None) is not None and args.order < 1:
            raise ValidationError("order must be positive")
        if args.command in ("fit", "check") and args.order is not None and args.order < 4:
            raise ValidationError("fit commands need order >= 4")
        precision = getattr(args, "precision", None)
        if precision is not None:
            with precision_scope(precision):
                return args.func(args)
        return args.func(args)
    except LatticeSecrecyError as exc:
        err = {"error": exc.code, "message": str(exc)}
        if isinstance(exc, NoExactFit):
            err["first_failing_power"] = exc.first_failing_power
        sys.stderr.write(json.dumps(err) + "\n")
        return EXIT_INVALID
    except (KeyError, TypeError) as exc:
        sys.stderr.write(json.dumps({"error": "ValidationError", "message": f"malformed input: {exc}"}) + "\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
