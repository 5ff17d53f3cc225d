"""Command-line front end: ``hypervis <subcommand> [flags]``.

Every subcommand prints one report, as JSON (sorted keys, so identical argv
gives identical bytes) or as a single CSV row under a header of flattened
field names.  Exit codes: 0 success, 2 usage error, 3 budget refusal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from typing import Any, Callable, Sequence

from hypervis import euler_products as ep
from hypervis import exact_count as ec
from hypervis import polytopes as pt
from hypervis import sampling as sm
from hypervis.errors import BudgetError, UsageError
from hypervis.lattice_core import DEFAULT_BINS, LatticeParams

DEFAULT_SEED = 0
EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 2, 3

# JSON schema (in hypervis/schemas) describing each subcommand's report
SCHEMAS = {
    "count": "count", "lambda": "euler_value", "zeta": "euler_value",
    "feller-tornier": "euler_value", "polytope": "polytope", "inverse-gaps": "inverse_gaps",
    "inverse-sqsum": "inverse_sqsum", "sample-pairs": "sample_report",
    "sample-angles": "sample_report", "sample-polytopes": "sample_report",
    "baseline": "sample_report", "oracle": "oracle",
}


def load_schema(command: str) -> dict:
    text = resources.files("hypervis").joinpath(f"schemas/{SCHEMAS[command]}.json").read_text()
    return json.loads(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


def _cmd_count(a: argparse.Namespace) -> dict:
    params = LatticeParams(a.d, a.n)
    if a.d == 1:
        return {"d": 1, "N": a.n, "omega_count": str(ec.count_visible_exact(params))}
    return ec.visible_distance_moments(params).to_dict()


def _cmd_lambda(a: argparse.Namespace) -> dict:
    return ep.lambda_dk(a.d, a.k, a.tol, a.sieve_budget).to_dict()


def _cmd_zeta(a: argparse.Namespace) -> dict:
    return ep.zeta_certified(a.d, a.tol, a.sieve_budget).to_dict()


def _cmd_feller_tornier(a: argparse.Namespace) -> dict:
    return ep.feller_tornier_certified(a.tol, a.sieve_budget).to_dict()


def _family(kind: str, d: int | None, p: int | None) -> pt.PolytopeFamily:
    kind = kind.upper()
    if kind == "G":
        if p is None:
            if d is None:
                raise UsageError("family g needs --p (or --d with p = d + 1)")
            p = d + 1
        return pt.build_family("G", p)
    if d is None:
        if p is None:
            raise UsageError(f"family {kind.lower()} needs --d (or --p with d = p - 1)")
        d = p - 1
    return pt.build_family(kind, d)


def _cmd_polytope(a: argparse.Namespace) -> dict:
    F = _family(a.family, a.d, a.p)
    G = None
    if a.with_family:
        G = _family(a.with_family, F.dim - 1, F.dim)
    out: dict[str, Any] = {"family": F.kind, "param": F.param,
                           "with_family": G.kind if G else None,
                           "with_param": G.param if G else None}
    kw = {"exhaustive": a.exhaustive}
    if a.pairs:
        kw["pairs"] = a.pairs
    if a.report == "visibility":
        out.update(pt.visibility_report(F, G, **kw).to_dict())
    elif a.report == "distance":
        out.update(pt.distance_report(F, G, **kw).to_dict())
    elif a.report == "spectrum":
        out["spectrum"] = pt.spectrum_report(F, G, bins=a.bins, **kw).to_dict()
    else:
        out.update(pt.family_report(F, G, a.pairs or "cross", bins=a.bins).to_dict())
    if G is not None and {F.kind, G.kind} == {"C", "G"}:
        out["avg_norm_distance_cg"] = pt.avg_norm_distance_CG(F.dim)
    return out


def _cmd_inverse_gaps(a: argparse.Namespace) -> dict:
    if a.p_max is not None:
        primes = ep.primes_up_to(a.p_max)
        bad = [p for p in primes if pt.inverse_gap_count(p) != p // 4 + 1]
        return {"p_max": a.p_max, "primes_checked": len(primes), "mismatches": bad,
                "all_match": not bad}
    if a.p is None:
        raise UsageError("inverse-gaps needs --p or --p-max")
    count = pt.inverse_gap_count(a.p)
    return {"p": a.p, "count": count, "expected": a.p // 4 + 1,
            "matches": count == a.p // 4 + 1}


def _cmd_inverse_sqsum(a: argparse.Namespace) -> dict:
    if not ep.is_prime(a.p):
        raise UsageError(f"{a.p} is not prime")
    total = pt.inverse_increment_sqsum(a.p, a.h)
    return {"p": a.p, "h": a.h, "sum": str(total), "ratio_to_p3_over_6": 6 * total / a.p**3}


def _default_n(a: argparse.Namespace) -> int:
    return a.n if a.n is not None else 3 * a.d


def _cmd_sample_pairs(a: argparse.Namespace) -> dict:
    return sm.pair_distance_experiment(a.d, _default_n(a), a.samples, a.halfwidth, a.seed,
                                       a.threads).to_dict()


def _cmd_sample_angles(a: argparse.Namespace) -> dict:
    return sm.pair_angle_experiment(a.d, _default_n(a), a.samples, a.halfwidth, a.seed,
                                    a.threads).to_dict()


def _cmd_sample_polytopes(a: argparse.Namespace) -> dict:
    return sm.polytope_experiment(a.d, _default_n(a), a.k, a.samples, a.halfwidth, a.seed,
                                  a.threads).to_dict()


def _cmd_baseline(a: argparse.Namespace) -> dict:
    return sm.continuous_baseline(a.d, a.samples, a.seed, a.halfwidth, a.threads).to_dict()


def _cmd_oracle(a: argparse.Namespace) -> dict:
    res = ec.brute_force_reference(LatticeParams(a.d, a.n), a.k, a.enum_budget)
    return res.to_dict()


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $HYPERVIS_THREADS or 1)")
    common.add_argument("--sieve-budget", type=int, default=ep.DEFAULT_SIEVE_BUDGET)
    common.add_argument("--enum-budget", type=int, default=ec.DEFAULT_ENUM_BUDGET)

    parser = _Parser(prog="hypervis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, fn: Callable[[argparse.Namespace], dict], help: str):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    p = add("count", _cmd_count, "exact number of visible pairs and distance moments")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("lambda", _cmd_lambda, "probability that a K-tuple is self-visible")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tol", type=float, default=ep.DEFAULT_TOL)

    p = add("zeta", _cmd_zeta, "Riemann zeta at an integer d >= 2")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-12)

    p = add("feller-tornier", _cmd_feller_tornier, "the Feller-Tornier constant")
    p.add_argument("--tol", type=float, default=ep.DEFAULT_TOL)

    p = add("polytope", _cmd_polytope, "build a family and report on it")
    p.add_argument("--family", type=str.lower, choices=("c", "g", "b"), required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--with-family", type=str.lower, choices=("c", "g", "b"))
    p.add_argument("--pairs", choices=("within", "cross", "union"))
    p.add_argument("--report", choices=("visibility", "distance", "spectrum", "all"),
                   default="all")
    p.add_argument("--exhaustive", action="store_true",
                   help="enumerate every pair instead of using rotation symmetry")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)

    p = add("inverse-gaps", _cmd_inverse_gaps, "distinct |n - 1/n| modulo p")
    p.add_argument("--p", type=int)
    p.add_argument("--p-max", type=int, help="check every prime up to this bound")

    p = add("inverse-sqsum", _cmd_inverse_sqsum, "sum of squared inverse increments")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--h", type=int, required=True)

    for name, fn, what in (("sample-pairs", _cmd_sample_pairs, "visible-pair distances"),
                           ("sample-angles", _cmd_sample_angles, "visible-pair ray sines"),
                           ("sample-polytopes", _cmd_sample_polytopes,
                            "self-visible K-tuples")):
        p = add(name, fn, f"Monte Carlo: {what}")
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--n", type=int, help="side length (default 3d)")
        if name == "sample-polytopes":
            p.add_argument("--k", type=int, required=True)
        p.add_argument("--samples", type=int, required=True)
        p.add_argument("--halfwidth", type=float, default=sm.DEFAULT_HALFWIDTH)

    p = add("baseline", _cmd_baseline, "continuous uniform baseline")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--halfwidth", type=float, default=0.01)

    p = add("oracle", _cmd_oracle, "brute-force enumeration for small cubes")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    return parser


def flatten(obj: Any, prefix: str = "") -> dict[str, Any]:
    """Nested dicts become dotted keys; lists become ';'-joined cells."""
    out: dict[str, Any] = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, (list, tuple)):
        out[prefix] = ";".join("-".join(map(str, x)) if isinstance(x, (list, tuple)) else
                               _cell(x) for x in obj)
    else:
        out[prefix] = _cell(obj)
    return out


def _cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(x) if isinstance(x, float) else str(x)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    flat = flatten(report)
    keys = sorted(flat)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys)
    writer.writerow([flat[k] for k in keys])
    return buf.getvalue()


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = render(args.func(args), args.format)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hypervis: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"hypervis: budget refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
