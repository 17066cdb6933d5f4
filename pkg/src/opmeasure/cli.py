"""Command-line entry point.

Exit codes: 0 success (or a passing suite), 1 unreadable or invalid input,
2 a failed check (non-normal matrix, failing suite, failed extension check).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import jsonio, verify
from .errors import NonNormalError
from .measurable import AtomicSpace, ComplexMeasure, MeasurableFunction
from .normed import SpaceDescriptor
from .operator import spectral_measure_of
from .quantum import instrument_apply, mixed_state_extension_check, povm_probabilities
from .sampling import random_probability, random_unit_vector
from .vector import VectorProjectionFamily, family_of, semivariation, series_vector_measure


class InputError(Exception):
    """Raised for malformed command-line input; maps to exit code 1."""


class CheckFailure(Exception):
    """Raised when a requested check does not pass; maps to exit code 2."""


def _load(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _emit(obj, out):
    text = jsonio.dumps(obj) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _complex_token(v):
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return jsonio.j2c(v)


def parse_function(text: str) -> MeasurableFunction:
    """Parse ``poly:[...]``, ``exp:a``, ``indicator:[atoms]`` or ``tab:@file``."""
    kind, sep, arg = text.partition(":")
    if not sep:
        raise InputError(f"function spec {text!r} has no ':'")
    try:
        if kind == "poly":
            coeffs = json.loads(arg)
            if not isinstance(coeffs, list) or not coeffs:
                raise InputError("poly needs a non-empty coefficient list")
            return MeasurableFunction.poly([_complex_token(c) for c in coeffs])
        if kind == "exp":
            try:
                a = json.loads(arg)
            except json.JSONDecodeError:
                a = arg
            return MeasurableFunction.exp(_complex_token(a))
        if kind == "indicator":
            atoms = json.loads(arg)
            if not isinstance(atoms, list):
                raise InputError("indicator needs a list of atoms")
            return MeasurableFunction.indicator(jsonio._atom(a) for a in atoms)
        if kind == "tab":
            if not arg.startswith("@"):
                raise InputError("tab spec must be tab:@file")
            d = _load(arg[1:])
            if isinstance(d, dict) and "labels" in d:
                return MeasurableFunction.lookup(
                    [_complex_token(z) for z in d["labels"]],
                    [_complex_token(v) for v in d["values"]],
                    d.get("tol", 1e-9),
                )
            if isinstance(d, dict) and "values" in d:
                vals = [_complex_token(v) for v in d["values"]]
                atoms = [jsonio._atom(a) for a in d.get("atoms", range(len(vals)))]
                return MeasurableFunction.tabulated(vals, atoms)
            return jsonio.function_from_json(d)
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(f"bad function spec {text!r}: {exc}") from exc
    raise InputError(f"unknown function kind {kind!r}")


def parse_set(text, space: AtomicSpace):
    if text is None:
        return space.whole()
    by_name = {str(a): a for a in space.atoms}
    members = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if tok not in by_name:
            raise InputError(f"unknown atom {tok!r}")
        members.append(by_name[tok])
    return space.subset(members)


def _spectral(args):
    T = jsonio.matrix_from_json(_load(args.input))
    return spectral_measure_of(T, args.cluster_tol, args.tol)


def cmd_spectral(args):
    _emit(jsonio.spectral_to_json(_spectral(args)), args.out)


def cmd_calc(args):
    f = parse_function(args.function)
    E = _spectral(args)
    _emit({"matrix": jsonio.array_to_json(E.integrate(f))}, args.out)


def cmd_povm(args):
    P = jsonio.povm_from_json(_load(args.input))
    rho = jsonio.state_from_json(_load(args.state))
    _emit(jsonio.measure_to_json(povm_probabilities(P, rho)), args.out)


def cmd_instrument(args):
    inst = jsonio.instrument_from_json(_load(args.input))
    if args.extension:
        P = jsonio.povm_from_json(_load(args.extension))
        report = mixed_state_extension_check(P, inst, mode=args.mode, tol=args.tol)
        _emit(report, args.out)
        if not report["pass"]:
            raise CheckFailure(f"extension check failed: residual {report['max_residual']!r}")
        return
    if args.state is None:
        raise InputError("--state is required")
    rho = jsonio.state_from_json(_load(args.state))
    A = parse_set(args.set, inst.measurable)
    _emit(jsonio.state_to_json(instrument_apply(inst, A, rho)), args.out)


def _family_from(d):
    if "atom_vectors" in d:
        return family_of(jsonio.vector_measure_from_json(d))
    if "weights" in d:
        mu = jsonio.measure_from_json(d)
        return VectorProjectionFamily(SpaceDescriptor(1), mu.space, mu.weights[:, None], mu.tail_tv_bound)
    raise InputError("expected a measure (weights) or vector measure (atom_vectors)")


def cmd_semivar(args):
    fam = _family_from(_load(args.input))
    A = parse_set(args.set, fam.measurable)
    _emit(jsonio.bound_to_json(semivariation(fam, A, budget=args.budget, seed=args.seed)), args.out)


def cmd_series(args):
    d = _load(args.input)
    space = jsonio.descriptor_from_json(d.get("space", {"dim": 1}))
    if "lams" in d:
        S = jsonio.space_from_json(d["measurable"])
        lams = [ComplexMeasure(S, [jsonio.j2c(w) for w in ws]) for ws in d["lams"]]
        xs = [jsonio.array_from_json(x, 1) for x in d["xs"]]
    else:
        rng = np.random.default_rng(int(d.get("seed", args.seed)))
        S = AtomicSpace.range(int(d.get("atoms", 4)))
        n = int(d.get("N", 30))
        lams = [random_probability(S, rng) for _ in range(n)]
        xs = [random_unit_vector(space, rng) for _ in range(n)]
    N = int(d.get("N", len(lams)))
    _emit(jsonio.vector_measure_to_json(series_vector_measure(lams[:N], xs[:N], space)), args.out)


def _tolerances(items):
    out = {}
    for item in items or []:
        name, sep, val = item.partition("=")
        if not sep:
            raise InputError(f"tolerance override {item!r} must be name=value")
        out[name] = float(val)
    return out


def _ints(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def cmd_verify(args):
    kw = dict(seed=args.seed, trials=args.trials, tolerances=_tolerances(args.tol),
              chain_length=args.chain_length, chain_kind=args.chain_kind,
              violation_rate=args.violation_rate)
    if args.dims:
        kw["dims"] = _ints(args.dims)
    if args.atoms:
        kw["atom_counts"] = _ints(args.atoms)
    if args.norms:
        kw["norms"] = tuple(t.strip() for t in args.norms.split(","))
    spec = verify.TrialSpec(**kw)
    report = verify.run_suite(args.suite, spec)
    _emit(report.to_dict(), args.out)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    if not report.passed:
        raise CheckFailure(f"suite {args.suite} failed {len(report.failures)} trial(s)")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, so keep 2 free for failed checks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="opmeasure", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--out", help="write JSON here instead of standard output")
        return sp

    for name, fn, help_ in (("spectral", cmd_spectral, "spectral measure of a normal matrix"),
                            ("calc", cmd_calc, "functional calculus f(T)")):
        sp = add(name, fn, help_)
        sp.add_argument("--input", required=True, help="matrix JSON file")
        sp.add_argument("--cluster-tol", type=float, default=None)
        sp.add_argument("--tol", type=float, default=1e-10, help="relative normality tolerance")
        if name == "calc":
            sp.add_argument("--function", required=True,
                            help='poly:[c0,...], exp:a, indicator:[atoms] or tab:@file')

    sp = add("povm", cmd_povm, "outcome probabilities of a POVM")
    sp.add_argument("--input", required=True)
    sp.add_argument("--state", required=True)

    sp = add("instrument", cmd_instrument, "apply an instrument on a set of outcomes")
    sp.add_argument("--input", required=True)
    sp.add_argument("--state")
    sp.add_argument("--set", help="comma-separated atom ids (default: all)")
    sp.add_argument("--extension", metavar="POVM", help="run the mixed-state extension check instead")
    sp.add_argument("--mode", choices=("states", "expectation"), default="states")
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("semivar", cmd_semivar, "semivariation bounds")
    sp.add_argument("--input", required=True)
    sp.add_argument("--set")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--budget", type=int, default=256)

    sp = add("series", cmd_series, "truncated series vector measure")
    sp.add_argument("--input", required=True)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("verify", cmd_verify, "run a verification suite")
    sp.add_argument("suite", choices=verify.SUITES)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--dims")
    sp.add_argument("--atoms")
    sp.add_argument("--norms")
    sp.add_argument("--chain-length", type=int, default=40)
    sp.add_argument("--chain-kind", default="default")
    sp.add_argument("--violation-rate", type=float, default=0.0)
    sp.add_argument("--tol", action="append", metavar="NAME=VALUE")
    sp.add_argument("--csv", help="also write the per-trial CSV here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NonNormalError as exc:
        print(f"error: {exc} (normality defect {exc.defect!r}, threshold {exc.threshold!r})",
              file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError, ValueError, KeyError, TypeError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
