"""``fockbench`` command-line front end.

Exit codes: 0 success, 2 usage error, 3 validation error (bad model, bad
range), 4 a check failed (CCR deviation, sampled violations, or a
non-compliant verdict under ``--strict``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import scipy.io

from . import __version__, qop, verify
from .fock import BASIS_ORDER_TAG, FockSpace, sector_dimension
from .modelspec import ModelSpec
from .models import PRESETS, preset
from .opdsl import ModelError, ParseError, compile_model, dumps_model, load_model_json, model_hash

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_CHECK = 0, 2, 3, 4
CCR_TOL = 1e-10


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------- helpers

def workers() -> int:
    """Worker cap from ``FOCKBENCH_THREADS`` (0 or unset: one per CPU)."""
    raw = os.environ.get("FOCKBENCH_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ModelError("FOCKBENCH_THREADS", f"not an integer: {raw!r}") from exc
    return n if n > 0 else (os.cpu_count() or 1)


def atomic_write(path: str | Path, data: str | bytes) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data.encode() if isinstance(data, str) else data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def matrix_market_bytes(op: qop.BlockOperator, comment: str = "") -> bytes:
    """Coordinate complex Matrix Market text with 17 significant digits.

    The ``hermitian`` symmetry (lower triangle only) is used when the matrix
    is exactly Hermitian, so files reproduce the stored entries bit for bit.
    """
    buf = io.BytesIO()
    mat = op.to_sparse().tocsr()
    exact = op.hermitian and (mat - mat.conj().T).count_nonzero() == 0
    symmetry = "hermitian" if exact else "general"
    scipy.io.mmwrite(buf, mat.tocoo(), comment=comment, field="complex", precision=17, symmetry=symmetry)
    data = buf.getvalue()
    if mat.nnz == 0:
        # scipy labels empty matrices "real" whatever field is requested
        first, rest = data.split(b"\n", 1)
        data = f"%%MatrixMarket matrix coordinate complex {symmetry}".encode() + b"\n" + rest
    return data


def parse_params(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    return out


def load_model(name: str, params: dict) -> ModelSpec:
    if name in PRESETS:
        try:
            return preset(name, **params)
        except TypeError as exc:
            raise ModelError("param", str(exc)) from exc
    path = Path(name)
    if not path.exists():
        raise ModelError("model", f"{name!r} is neither a preset ({', '.join(PRESETS)}) nor a readable file")
    if params:
        raise UsageError("--param only applies to presets")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError("document", f"invalid JSON: {exc}") from exc
    return load_model_json(doc)


def parse_range(text: str | None, default: tuple[int, int]) -> list[int]:
    if text is None:
        lo, hi = default
    else:
        lo_s, sep, hi_s = text.partition(":")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError as exc:
            raise UsageError(f"--n-range expects LO:HI, got {text!r}") from exc
        if not sep:
            raise UsageError(f"--n-range expects LO:HI, got {text!r}")
    if hi < lo:
        raise UsageError(f"empty range {lo}:{hi}")
    return list(range(lo, hi + 1))


def header(model: ModelSpec) -> dict:
    return verify.report_header(model_hash(model), __version__)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _fmt(x) -> str:
    return "nan" if x is None else f"{x:.6g}"


# ---------------------------------------------------------- subcommands

def cmd_dims(args, out) -> int:
    if args.d < 1 or args.n_max < 0:
        raise ModelError("d/n-max", "need d >= 1 and n_max >= 0")
    dims = [sector_dimension(args.d, n) for n in range(args.n_max + 1)]
    out.write("sector dims: " + ",".join(str(x) for x in dims) + "\n")
    out.write(f"total: {sum(dims)}\n")
    return EXIT_OK


def cmd_build(args, out) -> int:
    model = load_model(args.model, parse_params(args.param))
    space = FockSpace(model.d, args.n_max)
    comp = compile_model(model, space)
    outdir = Path(args.out)
    note = f"model={model.name} hash={model_hash(model)} basis={BASIS_ORDER_TAG} n_max={args.n_max} L={model.L} d={model.d} version={__version__}"
    for name, op in zip(("H0", "HI", "Hdiag", "H2"), comp):
        atomic_write(outdir / f"{name}.mtx", matrix_market_bytes(op, note))
        out.write(f"{name}.mtx  shape={op.shape[0]}x{op.shape[1]}  bandwidth={op.bandwidth}\n")
    if args.write_model:
        atomic_write(outdir / "model.json", dumps_model(model) + "\n")
        out.write("model.json\n")
    return EXIT_OK


def cmd_ccr(args, out) -> int:
    space = FockSpace(args.d, args.n_max)
    dev = qop.ccr_selftest(space, args.trials, args.seed)
    out.write(f"ccr max deviation: {dev:.3e}\n")
    if dev > CCR_TOL:
        raise CheckFailed(f"CCR deviation {dev:.3e} exceeds {CCR_TOL:g}")
    return EXIT_OK


def _default_range(comp, n_max):
    return 0, n_max - max(comp.HI.bandwidth, 1)


def cmd_verify(args, out) -> int:
    model = load_model(args.model, parse_params(args.param))
    space = FockSpace(model.d, args.n_max)
    comp = compile_model(model, space)
    nr = parse_range(args.n_range, _default_range(comp, args.n_max))
    rep = verify.compliance_gamma(model, space, nr, args.variant, args.threshold, comp, workers())
    rep.split = verify.split_compliance(model, space, nr, args.threshold, comp, workers()).to_json()
    rep.header = header(model)
    if args.samples > 0 and model.family in verify.BOUND_FAMILY.values():
        for bound in (b for b, fam in verify.BOUND_FAMILY.items() if fam == model.family):
            for n in (n for n in nr if n <= args.n_max - 2):
                res = verify.inequality_sampler(model, bound, n, args.samples, args.seed, space, comp)
                rep.inequality_results.append(res.to_json())
    out.write(f"model: {model.name}\nverdict: {rep.verdict}\nslope: {_fmt(rep.slope)} (residual {_fmt(rep.residual)})\n")
    out.write(f"band_ok: {rep.band_ok} (max off-band {rep.max_offband:.3g}, expected {rep.expected_band})\n")
    if args.out_json:
        atomic_write(args.out_json, _dump(rep.to_json()))
    if args.out_csv:
        atomic_write(args.out_csv, rep.to_csv())
    bad = sum(r["violations"] for r in rep.inequality_results)
    if bad:
        raise CheckFailed(f"{bad} sampled inequality violations")
    if args.strict and rep.verdict != "compliant":
        raise CheckFailed(f"verdict {rep.verdict}")
    return EXIT_OK


def cmd_scaling(args, out) -> int:
    model = load_model(args.model, parse_params(args.param))
    space = FockSpace(model.d, args.n_max)
    comp = compile_model(model, space)
    nr = parse_range(args.n_range, _default_range(comp, args.n_max))
    rep = verify.compliance_gamma(model, space, nr, args.variant, args.threshold, comp, workers())
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "gamma"])
    for n, g in zip(rep.n_values, rep.gamma):
        w.writerow([n, f"{g:.12g}"])
    out.write(f"# slope {_fmt(rep.slope)} residual {_fmt(rep.residual)} verdict {rep.verdict}\n")
    return EXIT_OK


def cmd_bounds(args, out) -> int:
    model = load_model(args.model, parse_params(args.param))
    bounds = [b for b, fam in verify.BOUND_FAMILY.items() if fam == model.family]
    if args.bound:
        bounds = [args.bound]
    if not bounds:
        raise ModelError("model", f"no inequality is defined for family {model.family!r}")
    space = FockSpace(model.d, args.n_max)
    comp = compile_model(model, space)
    sectors = [args.n] if args.n is not None else list(range(args.n_max - 1))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["bound", "n", "samples", "max_ratio", "max_ratio_aligned", "violations"])
    total = 0
    for bound in bounds:
        for n in sectors:
            r = verify.inequality_sampler(model, bound, n, args.samples, args.seed, space, comp)
            total += r.violations
            w.writerow([bound, n, r.samples, f"{r.max_ratio:.6g}", f"{r.max_ratio_aligned:.6g}", r.violations])
    out.write(f"# violations = {total}\n")
    if total:
        raise CheckFailed(f"{total} sampled inequality violations")
    return EXIT_OK


def cmd_relbound(args, out) -> int:
    model = load_model(args.model, parse_params(args.param))
    space = FockSpace(model.d, args.n_max)
    rep = verify.relative_bound_fit(model, space, args.exponent, args.samples, args.seed)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["eps", "C", "C_doubled", "stable"])
    for row in zip(rep.eps, rep.C, rep.C_doubled, rep.stable):
        w.writerow([row[0], f"{row[1]:.6g}", f"{row[2]:.6g}", int(row[3])])
    out.write(f"# epsilon_min {_fmt(rep.epsilon_min)} C {_fmt(rep.C_at_eps)}\n")
    return EXIT_OK


def cmd_spectrum(args, out) -> int:
    model = load_model(args.model, parse_params(args.param))
    try:
        cutoffs = [int(c) for c in args.cutoffs.split(",")]
    except ValueError as exc:
        raise UsageError(f"--cutoffs expects comma-separated integers, got {args.cutoffs!r}") from exc
    rows = verify.spectrum_drift(model, cutoffs, args.k)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n_max", "dim", "level", "eigenvalue", "drift"])
    for row in rows:
        for lvl, e in enumerate(row.eigenvalues):
            drift = "" if row.drift is None else f"{row.drift[lvl]:.12g}"
            w.writerow([row.n_max, row.dim, lvl, f"{e:.12g}", drift])
    out.write("# drift is a truncation-instability indicator, not a self-adjointness verdict\n")
    return EXIT_OK


# -------------------------------------------------------------- parser

def _model_args(p, n_max=True):
    p.add_argument("--model", required=True, help=f"preset ({', '.join(PRESETS)}) or path to a model JSON document")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="preset option, repeatable (e.g. K=64)")
    if n_max:
        p.add_argument("--n-max", type=int, default=12, help="particle cutoff (default: 12)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fockbench", description="Truncated Fock-space operators and self-adjointness diagnostics.")
    p.add_argument("--json", action="store_true", help="report errors as one-line JSON on stderr")
    p.add_argument("--version", action="version", version=f"fockbench {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("dims", help="sector dimensions")
    s.add_argument("--d", type=int, required=True, help="number of one-particle modes")
    s.add_argument("--n-max", type=int, default=12, help="particle cutoff (default: 12)")
    s.set_defaults(func=cmd_dims)

    s = sub.add_parser("build", help="compile H0, HI, Hdiag, H2 to Matrix Market files")
    _model_args(s)
    s.add_argument("--out", default=".", help="output directory (default: .)")
    s.add_argument("--write-model", action="store_true", help="also write the model JSON document")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("ccr", help="canonical commutation relation self-test")
    s.add_argument("--d", type=int, required=True, help="number of one-particle modes")
    s.add_argument("--n-max", type=int, default=12, help="particle cutoff (default: 12)")
    s.add_argument("--trials", type=int, default=100, help="random (f1, f2) pairs (default: 100)")
    s.add_argument("--seed", type=int, default=42, help="SplitMix64 seed (default: 42)")
    s.set_defaults(func=cmd_ccr)

    s = sub.add_parser("verify", help="band check, compliance values and split checks")
    _model_args(s)
    s.add_argument("--n-range", help="sectors LO:HI inclusive (default: 0 to n_max minus the bandwidth)")
    s.add_argument("--variant", choices=("quadratic", "quartic"), default="quadratic",
                   help="growth weights (default: quadratic)")
    s.add_argument("--threshold", type=float, default=verify.SLOPE_THRESHOLD, help="slope threshold (default: 0.1)")
    s.add_argument("--samples", type=int, default=0,
                   help="inequality samples per sector, 0 to skip (default: 0)")
    s.add_argument("--seed", type=int, default=42, help="SplitMix64 seed (default: 42)")
    s.add_argument("--out-json", help="write the report as JSON")
    s.add_argument("--out-csv", help="write per-sector values as CSV")
    s.add_argument("--strict", action="store_true", help="exit 4 unless the verdict is compliant")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("scaling", help="compliance values and fitted slope")
    _model_args(s)
    s.add_argument("--n-range", help="sectors LO:HI inclusive (default: 0 to n_max minus the bandwidth)")
    s.add_argument("--variant", choices=("quadratic", "quartic"), default="quadratic",
                   help="growth weights (default: quadratic)")
    s.add_argument("--threshold", type=float, default=verify.SLOPE_THRESHOLD, help="slope threshold (default: 0.1)")
    s.set_defaults(func=cmd_scaling)

    s = sub.add_parser("bounds", help="sample the model inequality")
    _model_args(s)
    s.add_argument("--bound", choices=tuple(verify.BOUND_FAMILY), help="inequality (default: the model's own)")
    s.add_argument("--n", type=int, help="single sector (default: every interior sector)")
    s.add_argument("--samples", type=int, default=1000, help="samples per sector (default: 1000)")
    s.add_argument("--seed", type=int, default=42, help="SplitMix64 seed (default: 42)")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("relbound", help="relative bound constants over an epsilon grid")
    _model_args(s)
    s.add_argument("--exponent", type=int, default=3, help="K = N^exponent (default: 3)")
    s.add_argument("--samples", type=int, default=200, help="vectors in the first sample (default: 200)")
    s.add_argument("--seed", type=int, default=42, help="SplitMix64 seed (default: 42)")
    s.set_defaults(func=cmd_relbound)

    s = sub.add_parser("spectrum", help="lowest eigenvalues across cutoffs, as CSV")
    _model_args(s, n_max=False)
    s.add_argument("--cutoffs", default="8,10,12", help="comma-separated increasing cutoffs (default: 8,10,12)")
    s.add_argument("--k", type=int, default=4, help="number of levels (default: 4)")
    s.set_defaults(func=cmd_spectrum)
    return p


def _error(kind: str, message: str, as_json: bool, err) -> None:
    if as_json:
        err.write(json.dumps({"error": kind, "message": message}) + "\n")
    else:
        err.write(f"fockbench: {kind}: {message}\n")


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    # --json is accepted anywhere on the command line
    as_json = "--json" in argv
    argv = [a for a in argv if a != "--json"]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        _error("usage", str(exc), as_json, err)
        return EXIT_USAGE
    except (ModelError, ParseError, ValueError) as exc:
        _error("validation", str(exc), as_json, err)
        return EXIT_VALIDATION
    except CheckFailed as exc:
        _error("check", str(exc), as_json, err)
        return EXIT_CHECK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
