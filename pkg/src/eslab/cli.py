"""Command-line front end: ``es-lab <command> [options]``.

Exit codes: 0 success, 1 not found / tolerance unreachable / above the
exact cutoff, 2 usage or invalid input.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from fractions import Fraction
from typing import Callable, Optional

import mpmath

from eslab import __version__
from eslab.asymptotics import (
    EULER_GAMMA,
    chebyshev_weighted_sum,
    constant_c,
    convergence_table,
    lemma64_pieces,
    log_spaced,
    mertens_product,
)
from eslab.errors import (
    ExactCutoffError,
    NotFoundError,
    NotPrimeError,
    ResourceLimitError,
    ToleranceUnreachableError,
)
from eslab.estimator import EXACT_CUTOFF, decompose, ghat, ghat_log, log_fraction, ratio_certificate
from eslab.primes import primes_up_to
from eslab.records import OutputRecord, ResultCache, to_csv
from eslab.searcher import DEFAULT_WHEEL_BUDGET, SearchConfig, search

log = logging.getLogger("eslab")

G_376 = 7778804220120654420924631668091
G_377 = 5973303871796437264595936954237

# A job is (parameters, thunk computing the results map).
Job = tuple[dict, Callable[[], dict]]


def _float_down(x) -> float:
    f = float(x)
    return math.nextafter(f, -math.inf) if f > x else f


def _float_up(x) -> float:
    f = float(x)
    return math.nextafter(f, math.inf) if f < x else f


def _fraction_fields(prefix: str, q: Fraction) -> dict:
    return {
        f"{prefix}_numerator": q.numerator,
        f"{prefix}_denominator": q.denominator,
        f"log_{prefix}": log_fraction(q),
    }


def cmd_ghat(args) -> list[Job]:
    k = args.k
    exact = args.exact or (not args.log and k <= EXACT_CUTOFF)
    params = {"k": k, "mode": "exact" if exact else "log", "decompose": args.decompose}

    def run():
        primes = primes_up_to(k)
        out: dict = {}
        if exact:
            q = ghat(k, primes)
            out.update(numerator=q.numerator, denominator=q.denominator)
        out["log_ghat"] = ghat_log(k, primes)
        if args.decompose:
            b = decompose(k, primes, cutoff=EXACT_CUTOFF if exact else 0)
            out.update(log_F_small=b.log_F_small, log_F1=b.log_F1, log_F0=b.log_F0)
            if b.M is not None:
                out.update(M=b.M, R=b.R)
        return out

    return [(params, run)]


def cmd_search(args) -> list[Job]:
    params = {
        "k": args.k,
        "method": args.method,
        "bound": args.bound,
        "wheel_budget": args.wheel_budget,
    }

    def run():
        cfg = SearchConfig(
            k=args.k,
            scan_bound=args.bound,
            method=args.method,
            wheel_budget=args.wheel_budget,
            workers=args.workers,
        )
        res = search(cfg, primes_up_to(max(args.k, 2)))
        log.info("search k=%d finished in %.3fs", args.k, res.elapsed)
        return {
            "g": res.g,
            "candidates_tested": res.candidates_tested,
            "scan_bound": res.scan_bound,
            "wheel_modulus": res.wheel_modulus,
            "wheel_residues": res.wheel_residues,
            "certificate_ok": res.verify(),
            "certificate": ";".join(
                f"{p}:{''.join(map(_digit, reversed(dk)))}<={''.join(map(_digit, reversed(dg)))}"
                if p <= 36
                else f"{p}:{list(reversed(dk))}<={list(reversed(dg))}"
                for p, dk, dg in res.certificate
            ),
        }

    return [(params, run)]


def _digit(d: int) -> str:
    return "0123456789abcdefghijklmnopqrstuvwxyz"[d]


def cmd_ratio(args) -> list[Job]:
    def run():
        c = ratio_certificate(args.k, primes_up_to(args.k + 1))
        return {
            "m_identity_ok": c.m_identity_ok,
            "r_identity_ok": c.r_identity_ok,
            "digit_increment_ok": c.digit_increment_ok,
            "bound_ok": c.bound_ok,
            **_fraction_fields("ratio", c.ratio),
            **_fraction_fields("lower_bound", c.mertens_lower_bound),
        }

    return [({"k": args.k}, run)]


def cmd_constant(args) -> list[Job]:
    def run():
        r = constant_c(args.tol)
        return {
            "value": float(r.value),
            "lower": _float_down(r.lower),
            "upper": _float_up(r.upper),
            "digits": mpmath.nstr(r.value, 20),
            "terms_used": r.terms_used,
            "method": r.method,
        }

    return [({"tol": args.tol}, run)]


def cmd_pieces(args) -> list[Job]:
    def run():
        p = lemma64_pieces(args.k, primes_up_to(args.k))
        return {
            "cutoff": p.cutoff,
            "piece_tail": p.piece_tail,
            "piece_logp": p.piece_logp,
            "piece_neg": p.piece_neg,
            "sum": p.total,
            "f0_direct": p.f0_direct,
            "logp_over_k": p.piece_logp / args.k,
            "f0_normalized": p.f0_direct * math.log(args.k) / args.k,
        }

    return [({"k": args.k}, run)]


def cmd_converge(args) -> list[Job]:
    ks = log_spaced(args.kmin, args.kmax, args.points)
    holder: dict = {}

    def table():
        # computed once on first cache miss; rows then served individually
        if "rows" not in holder:
            primes = primes_up_to(max(ks))
            holder["rows"] = {r.k: r for r in convergence_table(ks, primes, workers=args.workers)}
        return holder["rows"]

    def job(k):
        def run():
            r = table()[k]
            return {"log_ghat": r.log_ghat, "normalized": r.normalized}

        return ({"k": k}, run)

    return [job(k) for k in ks]


def cmd_psi(args) -> list[Job]:
    def run():
        s = chebyshev_weighted_sum(args.x, primes_up_to(args.x))
        return {"value": s, "ratio": s / args.x}

    return [({"x": args.x}, run)]


def cmd_mertens(args) -> list[Job]:
    def run():
        v = mertens_product(args.x, primes_up_to(args.x))
        ratio = v / math.log(args.x)
        return {
            "value": v,
            "over_log_x": ratio,
            "exp_gamma": math.exp(EULER_GAMMA),
            "relative_gap": ratio / math.exp(EULER_GAMMA) - 1,
        }

    return [({"x": args.x}, run)]


def cmd_fixtures(args) -> list[Job]:
    def run():
        primes = primes_up_to(377)
        out: dict = {}
        for k, g in ((376, G_376), (377, G_377)):
            q = ghat(k, primes)
            out[f"g_{k}"] = g
            out[f"ghat_{k}_numerator"] = q.numerator
            out[f"ghat_{k}_denominator"] = q.denominator
            out[f"ghat_{k}_float"] = float(q)
            out[f"g_over_ghat_{k}"] = float(Fraction(g) / q)
        out["ghat_decreases"] = ghat(377, primes) < ghat(376, primes)
        return out

    return [({}, run)]


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON lines (default)")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", help="CSV with header row")
    common.add_argument("--cache", help="JSON-lines results cache (default: $ES_LAB_CACHE)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")
    common.set_defaults(fmt="json")

    parser = argparse.ArgumentParser(prog="es-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ghat", parents=[common], help="heuristic estimate M_k/R_k")
    p.add_argument("--k", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--log", action="store_true")
    p.add_argument("--decompose", action="store_true")
    p.set_defaults(handler=cmd_ghat)

    p = sub.add_parser("search", parents=[common], help="compute g(k) with a certificate")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=["naive", "wheel"], default="wheel")
    p.add_argument("--bound", type=int, default=None, help="scan bound (default 10*ceil(ghat))")
    p.add_argument("--wheel-budget", type=int, default=DEFAULT_WHEEL_BUDGET)
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("ratio", parents=[common], help="exact growth checks at prime k+1")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(handler=cmd_ratio)

    p = sub.add_parser("constant", parents=[common], help="enclose sum log(1+1/a)/(a+1)")
    p.add_argument("--tol", type=_positive_float, default=5e-8)
    p.set_defaults(handler=cmd_constant)

    p = sub.add_parser("pieces", parents=[common], help="three-way split of the a_0p factor")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(handler=cmd_pieces)

    p = sub.add_parser("converge", parents=[common], help="log ghat(k) * log k / k table")
    p.add_argument("--kmin", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--points", type=int, default=10)
    p.set_defaults(handler=cmd_converge)

    p = sub.add_parser("psi", parents=[common], help="sum floor(log_p x) log p")
    p.add_argument("--x", type=int, required=True)
    p.set_defaults(handler=cmd_psi)

    p = sub.add_parser("mertens", parents=[common], help="prod p/(p-1) over p <= x")
    p.add_argument("--x", type=int, required=True)
    p.set_defaults(handler=cmd_mertens)

    p = sub.add_parser("fixtures", parents=[common], help="known g(376), g(377) next to ghat")
    p.set_defaults(handler=cmd_fixtures)
    return parser


def run(argv: Optional[list[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers < 1:
        print("es-lab: --workers must be positive", file=sys.stderr)
        return 2
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("es-lab: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return _execute(args, stdout)
    finally:
        log.removeHandler(handler)


def _execute(args, stdout) -> int:
    cache = ResultCache.from_env(args.cache)
    records = []
    try:
        for params, thunk in args.handler(args):
            rec = cache.get(args.command, params)
            if rec is None:
                rec = OutputRecord.build(args.command, params, thunk())
            else:
                log.info("cache hit for %s %s", args.command, params)
            records.append(rec)
    except (NotFoundError, ToleranceUnreachableError, ExactCutoffError, ResourceLimitError) as exc:
        print(f"es-lab: {exc}", file=sys.stderr)
        return 1
    except (NotPrimeError, ValueError) as exc:
        print(f"es-lab: {exc}", file=sys.stderr)
        return 2
    cache.put(records)

    if args.fmt == "csv":
        stdout.write(to_csv(records))
    else:
        for rec in records:
            stdout.write(rec.to_json() + "\n")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
