"""Command-line front end.

    sumcode verify --k 4 --eps 0.05
    sumcode simulate --k-list 200,500,1000 --trials 100000 --format csv
    sumcode bounds --alphabet 2 --format json
    sumcode clumpy --x 1 --y 1
    sumcode decompose --x 1 --y 1 --input p.txt

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any

from . import __version__
from . import achievable, converse, polytope, stopping
from .core import ResourceError, sum_entropy_per_component

FORMATS = ("text", "json", "csv")


class UsageError(Exception):
    pass


def _rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return _rational(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _with_floats(name: str, values) -> dict:
    """Rational list plus a parallel float list."""
    values = list(values)
    return {name: [_rational(v) for v in values], f"{name}_float": [float(v) for v in values]}


def _eps(args) -> Fraction:
    eps = achievable.as_fraction(args.eps)
    if eps <= 0:
        raise UsageError("--eps must be positive")
    return eps


def cmd_verify(args):
    if args.k is None:
        raise UsageError("verify needs --k")
    params = achievable.TypicalityParams.for_block_length(args.k, _eps(args))
    report = achievable.verify_zero_error(args.k, params, max_k=args.max_k)
    result = {
        "k": args.k,
        "tuples": report.tuples_checked,
        "errors": report.errors,
        "injective": report.injective,
        "passed": report.passed,
        "counterexample": report.counterexample,
        "n_histogram": report.n_histogram,
    }
    rows = [{"k": args.k, "tuples": report.tuples_checked, "errors": report.errors,
             "passed": int(report.passed)}]
    return result, rows, report.summary(), 0 if report.passed else 1


def cmd_simulate(args):
    ks = args.k_list or ([args.k] if args.k is not None else None)
    if not ks:
        raise UsageError("simulate needs --k or --k-list")
    eps = _eps(args)
    rows = []
    for k in ks:
        params = achievable.TypicalityParams.for_block_length(k, eps)
        est = achievable.expected_stopping_time(k, params, mode=args.mode,
                                                trials=args.trials, seed=args.seed)
        rows.append({"k": k, "expected_n": est.expected_n, "rate": est.rate,
                     "en_over_k": est.expected_n / k,
                     "upper_bound_en": achievable.stopping_time_upper_bound(params)})
    text = "\n".join(f"k={r['k']}: E N = {r['expected_n']:.4f}, rate = {r['rate']:.4f}"
                     for r in rows)
    return {"mode": args.mode, "runs": rows}, rows, text, 0


def cmd_bounds(args):
    if args.k is not None and args.hn_en is None:
        raise UsageError("--k needs --hn-en for the finite-k bound")
    b = converse.capacity_bounds(args.alphabet, k=args.k, hn_en=args.hn_en)
    result = {
        "lower": None if b.lower is None else round(b.lower, 4),
        "upper": round(b.upper, 4),
        "lower_exact": b.lower,
        "upper_exact": b.upper,
        "sum_entropy_per_component": sum_entropy_per_component(),
        "conditional_entropy_rate": converse.limiting_conditional_entropy_rate(),
    }
    lower = "n/a" if b.lower is None else f"{b.lower:.4f}"
    text = f"lower {lower}  upper {b.upper:.4f}"
    return result, [{"lower": result["lower"], "upper": result["upper"]}], text, 0


def _need_xy(args, name):
    if args.x is None or args.y is None:
        raise UsageError(f"{name} needs --x and --y")
    if args.x < 0 or args.y < 0:
        raise UsageError("--x and --y must be nonnegative")


def cmd_clumpy(args):
    _need_xy(args, "clumpy")
    dist = converse.clumpy_distribution(args.x, args.y)
    h = converse.clumpy_entropy(args.x, args.y)
    result = {"x": args.x, "y": args.y, "L": dist.L, "M": dist.M,
              **_with_floats("masses", dist.masses),
              "entropy": h,
              "closed_lower_bound": converse.clumpy_entropy_closed_lower_bound(args.x, args.y),
              "profile": list(converse.partition_profile(args.x, args.y).sizes)}
    counts = dist.counts()
    masses = " ".join(f"{c}/{dist.M}" for c in counts)
    text = f"masses {masses}\nentropy {h:.5f}"
    rows = [{"index": i + 1, "mass": _rational(m), "mass_float": float(m)}
            for i, m in enumerate(dist.masses)]
    return result, rows, text, 0


def cmd_family(args):
    _need_xy(args, "family")
    if args.all:
        members = sorted(polytope.enumerate_family(args.x, args.y), reverse=True)
        result = {"members": [[_rational(v) for v in m] for m in members],
                  "count": len(members)}
        text = "\n".join(" ".join(_rational(v) for v in m) for m in members)
        rows = [{"member": i, "masses": " ".join(_rational(v) for v in m)}
                for i, m in enumerate(members)]
        return result, rows, text, 0
    member = polytope.sample_family_member(args.x, args.y, args.seed)
    ok = polytope.prefix_dominance_check(member, args.x, args.y)
    result = {**_with_floats("masses", member.masses),
              "witnesses": [list(e) for e in member.witnesses],
              "entropy": member.entropy(), "prefix_dominated": ok}
    text = " ".join(_rational(v) for v in member.masses) + f"\nentropy {member.entropy():.5f}"
    rows = [{"index": i + 1, "mass": _rational(m)} for i, m in enumerate(member.masses)]
    return result, rows, text, 0 if ok else 1


def cmd_oracle(args):
    _need_xy(args, "oracle")
    mode = "exhaustive" if args.x + args.y <= polytope.MAX_ENUM_CLASS else "sampled"
    h_min, argmin = polytope.min_entropy_oracle(args.x, args.y, mode, args.trials, args.seed)
    h_star = converse.clumpy_entropy(args.x, args.y)
    pstar = converse.clumpy_distribution(args.x, args.y).masses
    if mode == "exhaustive":
        ok = abs(h_min - h_star) <= 1e-10 and sorted(argmin, reverse=True) == list(pstar)
    else:
        ok = h_min >= h_star - 1e-10
    result = {"mode": mode, "min_entropy": h_min, "clumpy_entropy": h_star,
              "argmin": [_rational(v) for v in argmin], "consistent": ok,
              "trials": args.trials if mode == "sampled" else None}
    text = f"{mode}: min entropy {h_min:.5f}, clumpy {h_star:.5f} -> {'PASS' if ok else 'FAIL'}"
    rows = [{"mode": mode, "min_entropy": h_min, "clumpy_entropy": h_star, "consistent": int(ok)}]
    return result, rows, text, 0 if ok else 1


def read_rationals(path: str) -> list[Fraction]:
    """Whitespace-separated ``num/den`` tokens."""
    with open(path) as fh:
        tokens = fh.read().split()
    try:
        return [Fraction(t) for t in tokens]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational in {path}: {exc}") from None


def cmd_decompose(args):
    _need_xy(args, "decompose")
    if not args.input:
        raise UsageError("decompose needs --input FILE")
    p = read_rationals(args.input)
    dec = polytope.decompose_into_permuted_clumpy(p, args.x, args.y)
    lines = [" ".join([_rational(a.weight)] + [str(i + 1) for i in a.permutation])
             for a in dec.atoms]
    result = {"iterations": dec.iterations,
              "atoms": [{"weight": _rational(a.weight), "weight_float": float(a.weight),
                         "permutation": [i + 1 for i in a.permutation]} for a in dec.atoms]}
    rows = [{"weight": _rational(a.weight),
             "permutation": " ".join(str(i + 1) for i in a.permutation)} for a in dec.atoms]
    return result, rows, "\n".join(lines), 0


def cmd_floor(args):
    if args.c is None or args.u is None:
        raise UsageError("floor needs --c and --u")
    pmf, h = polytope.min_entropy_floor(args.c, args.u)
    result = {"c": args.c, "u": args.u, "masses": list(pmf.masses), "entropy": h}
    text = " ".join(f"{m:.6g}" for m in pmf.masses) + f"\nentropy {h:.5f}"
    return result, [{"c": args.c, "u": args.u, "entropy": h}], text, 0


def cmd_dual(args):
    eps = float(args.eps)
    if eps <= 0:
        raise UsageError("--eps must be positive")
    result: dict[str, Any] = {"alphabet": args.alphabet, "epsilon": eps}
    lines = []
    if args.k is not None:
        params = stopping.DualParams(args.k, args.alphabet, eps, args.lam)
        value = stopping.dual_lower_bound(params)
        result.update(k=args.k, lam=params.lam, c=params.c, delta=params.delta,
                      dual_lower_bound=value, dual_value=stopping.dual_value(params))
        lines.append(f"dual lower bound at k={args.k}: {value:.6g}")
    search = stopping.hn_en_threshold(args.alphabet, eps)
    result["k0"] = search.k0
    lines.append(f"k0 = {search.k0}")
    rows = [r._asdict() for r in search.trace]
    if args.format == "csv":
        return result, rows, "", 0
    return result, rows, "\n".join(lines), 0


COMMANDS = {
    "verify": cmd_verify, "simulate": cmd_simulate, "bounds": cmd_bounds,
    "clumpy": cmd_clumpy, "family": cmd_family, "oracle": cmd_oracle,
    "decompose": cmd_decompose, "floor": cmd_floor, "dual": cmd_dual,
}


def _k_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--k", type=int)
    common.add_argument("--eps", help="default 0.05 (0.1 for dual)")
    common.add_argument("--trials", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alphabet", type=int, default=2)
    common.add_argument("--x", type=int)
    common.add_argument("--y", type=int)

    ap = argparse.ArgumentParser(prog="sumcode", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="exhaustive zero-error check")
    p.add_argument("--max-k", type=int, default=8)
    p = sub.add_parser("simulate", parents=[common], help="E N and rate")
    p.add_argument("--k-list", type=_k_list)
    p.add_argument("--mode", choices=("monte_carlo", "exact"), default="monte_carlo")
    p = sub.add_parser("bounds", parents=[common], help="capacity sandwich")
    p.add_argument("--hn-en", type=float)
    sub.add_parser("clumpy", parents=[common], help="clumpy pmf and its entropy")
    p = sub.add_parser("family", parents=[common], help="sample or list family members")
    p.add_argument("--all", action="store_true")
    sub.add_parser("oracle", parents=[common], help="min-entropy oracle vs clumpy entropy")
    p = sub.add_parser("decompose", parents=[common], help="write p as a mix of permuted p_star")
    p.add_argument("--input")
    p = sub.add_parser("floor", parents=[common], help="floor-constrained min entropy")
    p.add_argument("--c", type=float)
    p.add_argument("--u", type=int)
    p = sub.add_parser("dual", parents=[common], help="dual certificate for H(N)/E N")
    p.add_argument("--lambda", dest="lam", type=float)
    return ap


def _config(args) -> dict:
    return {k: _jsonable(v) for k, v in sorted(vars(args).items())}


def _emit(args, result, rows, text, out) -> None:
    if args.format == "json":
        doc = {"command": args.command, "config": _config(args),
               "results": _jsonable(result), "version": __version__}
        out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    elif args.format == "csv":
        if rows:
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
            out.write(buf.getvalue())
    else:
        out.write(text + "\n")


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.eps is None:
        args.eps = "0.1" if args.command == "dual" else "0.05"
    try:
        result, rows, text, status = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sumcode {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ResourceError) as exc:
        print(f"sumcode {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except polytope.DecompositionError as exc:
        print(f"sumcode {args.command}: decomposition failed: {exc}", file=sys.stderr)
        return 1
    _emit(args, result, rows, text, out)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
