"""Command-line front end: ``rank1horn {sample,density,verify,hciz}``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure,
4 verification failure.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import densities, oracle, sampling, stats
from .errors import NumericalError
from .randsrc import RngState
from .spectra import AngularSpectrum, SpectrumSpec

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
SEED_ENV = "RANK1HORN_SEED"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument helpers

def _load_json(text: str):
    text = text.strip()
    if not text.startswith(("{", "[")):
        path = Path(text)
        if not path.is_file():
            raise UsageError(f"--spectrum is neither inline JSON nor a readable file: {text!r}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid spectrum JSON: {exc}") from exc


def parse_spectrum(text: str, case: str):
    """Spectrum for ``case``: SpectrumSpec, AngularSpectrum, or an array of ``B``'s eigenvalues."""
    data = _load_json(text)
    if case in ("quadform", "diag", "heckman", "hciz"):
        vals = data.get("values") if isinstance(data, dict) else data
        return np.asarray(vals, dtype=float)
    if isinstance(data, list):
        data = {"values": data}
    if case == "multiplicative":
        return AngularSpectrum.from_dict(data)
    return SpectrumSpec.from_dict(data)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV} must be an integer") from exc


def _column_prefix(case: str) -> str:
    if case == "multiplicative":
        return "angle"
    if case in ("quadform", "diag"):
        return "x"
    return "eig"


def format_csv(case: str, rows: np.ndarray) -> str:
    buf = io.StringIO()
    k = rows.shape[1] if rows.ndim == 2 else 0
    prefix = _column_prefix(case)
    buf.write(",".join(["sample_index"] + [f"{prefix}_{j + 1}" for j in range(k)]) + "\n")
    for i, row in enumerate(rows):
        buf.write(",".join([str(i)] + [format(float(v), ".17g") for v in row]) + "\n")
    return buf.getvalue()


def read_csv(path) -> np.ndarray:
    """Numeric columns (without ``sample_index``) of a CSV written by ``sample``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 1:]


def _check_case_params(args):
    if args.case == "additive" and args.b is None:
        raise UsageError("--b is required for the additive case")
    if args.case == "multiplicative" and args.phi is None:
        raise UsageError("--phi is required for the multiplicative case")


# ---------------------------------------------------------------------------
# commands

def _draw(args, method=None):
    spec = parse_spectrum(args.spectrum, args.case)
    _check_case_params(args)
    samples = sampling.draw_samples(
        args.case, spec, args.n, method=method or args.method, field=args.field, b=args.b,
        phi=args.phi, p=getattr(args, "p", None), seed=_seed(args), stream_id=args.streams,
        threads=args.threads)
    return spec, samples


def cmd_sample(args) -> int:
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    _, samples = _draw(args)
    if samples:
        rows = np.vstack([np.asarray(s.eigenvalues, dtype=float).reshape(1, -1) for s in samples])
    else:
        rows = np.empty((0, 0))
    text = format_csv(args.case, rows)
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_density(args) -> int:
    at = _floats(args.at)
    case = args.case
    if case == "spacing":
        if args.b is None:
            raise UsageError("--b is required")
        spec = parse_spectrum(args.spectrum, "additive")
        if spec.n != 2:
            raise UsageError("spacing density needs n = 2")
        val = densities.pdf_spacing_n2(spec.values[0], spec.values[1], args.b, at[0])
    elif case == "quadform":
        val = densities.pdf_quadratic_form(parse_spectrum(args.spectrum, case), at[0])
    elif case == "heckman":
        val = densities.pdf_heckman_n3(parse_spectrum(args.spectrum, case), at)
    elif case == "multiplicative":
        _check_case_params(args)
        val = densities.pdf_multiplicative(parse_spectrum(args.spectrum, case), args.phi, at)
    else:
        _check_case_params(args)
        spec = parse_spectrum(args.spectrum, case)
        if args.field == "real":
            if any(m != 1 for m in spec.multiplicities):
                raise UsageError("real-field densities take simple spectra")
            if case == "additive":
                val = densities.pdf_additive_real(spec.values, args.b, at)
            else:
                val = densities.pdf_projection_real(spec.values, at)
        elif case == "additive":
            val = densities.pdf_additive_degenerate(spec, args.b, at)
        else:
            val = densities.pdf_projection_degenerate(spec, at)
    print(format(val, ".15g"))
    return EXIT_OK


def _verify_ks(args):
    if args.files:
        xs, ys = read_csv(args.files[0]), read_csv(args.files[1])
    else:
        _, s1 = _draw(args, "secular")
        _, s2 = _draw(args, "oracle")
        xs = np.vstack([s.eigenvalues for s in s1])
        ys = np.vstack([s.eigenvalues for s in s2])
    if xs.shape[1] != ys.shape[1]:
        raise UsageError("the two samples have different numbers of columns")
    return [stats.ks_two_sample(xs[:, k], ys[:, k], args.level, name=f"ks_{args.case}_col{k + 1}")
            for k in range(xs.shape[1])]


def _verify_normalization(args):
    spec = parse_spectrum(args.spectrum, args.case)
    _check_case_params(args)
    if args.case == "additive":
        support = stats.additive_support(spec.values, args.b)
        if spec.n == 2:
            f = lambda x: densities.pdf_additive_degenerate(spec, args.b, [x])
        else:
            f = stats.swap_args(lambda l1, l2: densities.pdf_additive_degenerate(spec, args.b, [l1, l2]))
    elif args.case == "projection":
        support = stats.projection_support(spec.values)
        if spec.n == 2:
            f = lambda x: densities.pdf_projection_degenerate(spec, [x])
        else:
            f = lambda l1, l2: densities.pdf_projection_degenerate(spec, [l1, l2])
    elif args.case == "multiplicative":
        if spec.n != 2:
            raise UsageError("multiplicative normalization is implemented for n = 2")
        support = stats.multiplicative_support_n2(spec.angles, args.phi)
        f = lambda x: densities.pdf_multiplicative(spec, args.phi, [x])
    else:
        raise UsageError(f"no normalization check for case {args.case!r}")
    val = stats.normalization_integral(f, support, tol=1e-8)
    return [stats.make_report(f"normalization_{args.case}_n{spec.n}", abs(val - 1.0), 1e-6, 0, integral=val)]


def _verify_roundtrip(args):
    spec = parse_spectrum(args.spectrum, args.case)
    _check_case_params(args)
    rng = RngState(_seed(args), args.streams).generator()
    return [stats.roundtrip_report(args.case, spec, {"b": args.b, "phi": args.phi}, args.n, rng)]


def _verify_jacobian(args):
    spec = parse_spectrum(args.spectrum, "additive")
    if args.b is None:
        raise UsageError("--b is required")
    rng = RngState(_seed(args), args.streams).generator()
    return [stats.change_of_variables_check(spec, args.b, args.n, rng)]


def _verify_constraints(args):
    out = []
    for method in ("secular", "oracle"):
        spec, samples = _draw(args, method)
        out.append(stats.constraint_report(samples, spec, b=args.b, phi=args.phi,
                                           name=f"constraints_{args.case}_{method}"))
    return out


VERIFIERS = {"ks": _verify_ks, "normalization": _verify_normalization, "roundtrip": _verify_roundtrip,
             "jacobian": _verify_jacobian, "constraints": _verify_constraints}


def cmd_verify(args) -> int:
    if args.test != "ks" or not args.files:
        if not args.spectrum:
            raise UsageError("--spectrum is required")
    reports = VERIFIERS[args.test](args)
    for rep in reports:
        print(rep.to_json())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_hciz(args) -> int:
    x, y = _floats(args.x), _floats(args.y)
    if len(x) != len(y) or not x:
        raise UsageError("--x and --y need the same positive length")
    print(format(densities.hciz(x, y), ".15g"))
    if args.mc:
        mean, se = oracle.hciz_monte_carlo(x, y, args.mc, RngState(_seed(args), args.streams).generator())
        print(f"mc {format(mean, '.15g')} stderr {format(se, '.6g')}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_case_args(p, cases, need_spectrum=True, default_case=None):
    p.add_argument("--case", required=default_case is None, choices=cases, default=default_case)
    p.add_argument("--spectrum", required=need_spectrum,
                   help="inline JSON {\"values\": [...], \"multiplicities\": [...]} or a file path")
    p.add_argument("--b", type=float, help="rank-one shift (additive)")
    p.add_argument("--phi", type=float, help="rank-one phase in radians (multiplicative)")
    p.add_argument("--field", choices=("complex", "real"), default="complex")


def _add_rng_args(p):
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--streams", type=int, default=0, help="RNG stream id")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rank1horn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw eigenvalue samples as CSV")
    _add_case_args(p, sampling.CASES)
    p.add_argument("--method", choices=sampling.METHODS, default="secular")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--p", type=int, default=None, help="number of diagonal entries (diag case)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="-")
    _add_rng_args(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("density", help="evaluate a closed-form density")
    _add_case_args(p, ("additive", "projection", "multiplicative", "spacing", "quadform", "heckman"))
    p.add_argument("--at", required=True, help="comma-separated free coordinates")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("verify", help="run a verification test, JSON lines out")
    p.add_argument("--test", required=True, choices=tuple(VERIFIERS))
    _add_case_args(p, sampling.CASES, need_spectrum=False, default_case="additive")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--level", type=float, default=0.01)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--files", nargs=2, metavar="CSV", help="two sample CSVs for --test ks")
    _add_rng_args(p)
    p.set_defaults(func=cmd_verify, method="secular", p=None)

    p = sub.add_parser("hciz", help="HCIZ integral, optionally with a Haar Monte Carlo estimate")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--mc", type=int, default=0)
    _add_rng_args(p)
    p.set_defaults(func=cmd_hciz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"rank1horn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"rank1horn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
