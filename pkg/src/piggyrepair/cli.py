"""Command-line entry point: gen, verify, search, reduce, simulate."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .base_code import make_rs_base
from .construct import construct_k2_lineback, construct_k2_t2, fig3_fixture, reduce_substripe
from .errors import BudgetExceeded, BudgetExhausted, ParameterError, SchemeError
from .formats import ParseError, code_to_dict, dumps, read_code, read_scheme, write_code, write_scheme
from .gf import FieldCtx, is_prime
from .piggyback import LINEBACK, PIGGYBACK, PiggybackCode, random_piggyback
from .repair import perfect_bandwidth, verify_scheme
from .search import BUDGET, SearchBudget, exhaustive_scheme_search, find_scheme
from .sim import ClusterState, NoSchemeError, PayloadReadError, fail_and_repair, ingest, ingest_symbols

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_PARSE = 3
EXIT_PARAM = 4
EXIT_BUDGET = 5


class UsageError(Exception):
    pass


def _node_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated node indices, got {text!r}") from exc


def _scheme_name(key) -> str:
    if isinstance(key, tuple):
        failed, s = key
        return f"scheme_{failed}_{'-'.join(str(v) for v in sorted(s))}.json"
    return f"scheme_{key}.json"


def _write_schemes(out: Path, schemes: dict) -> list[Path]:
    paths = []
    for key in sorted(schemes, key=lambda k: (k[0], sorted(k[1])) if isinstance(k, tuple) else (k,)):
        p = out / _scheme_name(key)
        write_scheme(p, schemes[key])
        paths.append(p)
    return paths


def _check_params(n: int, k: int, t: int, q: int) -> None:
    if not is_prime(q):
        raise ParameterError(f"q={q} must be prime")
    if not 1 <= k < n:
        raise ParameterError(f"need 1 <= k < n, got n={n}, k={k}")
    if not 2 <= t <= n - k:
        raise ParameterError(f"need 2 <= t <= n-k = {n - k}, got t={t}")
    if q < k + 1:
        raise ParameterError(f"perfect-bandwidth repair needs q >= k+1 = {k + 1}, got q={q}")
    if n > q:
        raise ParameterError(f"Reed-Solomon base needs n <= q, got n={n} > q={q}")


def cmd_gen(args: argparse.Namespace) -> int:
    schemes: dict = {}
    if args.fixture == "fig3":
        code, schemes = fig3_fixture()
        if (args.n, args.k, args.t, args.q) not in ((None,) * 4, (6, 3, 2, 7)):
            raise ParameterError("the fig3 fixture is the (n=6, k=3, t=2, q=7) code")
    else:
        for name in ("n", "k", "t", "q"):
            if getattr(args, name) is None:
                raise UsageError(f"gen needs --{name} unless --fixture is given")
        _check_params(args.n, args.k, args.t, args.q)
        base = make_rs_base(args.n, args.k, FieldCtx(args.q))
        if args.construct == "k2t2":
            if args.t != 2 or args.kind != PIGGYBACK:
                raise ParameterError("the k2t2 construction builds t=2 piggybacking codes")
            code, schemes = construct_k2_t2(base)
        elif args.construct == "lineback":
            if args.seed is None:
                raise UsageError("--construct lineback is randomized and needs --seed")
            code, schemes = construct_k2_lineback(base, args.t, SearchBudget(args.retries, args.seed))
        elif args.plain:
            code = PiggybackCode(base, args.t, {}, args.kind)
        else:
            if args.seed is None:
                raise UsageError("random piggyback matrices need --seed (or pass --plain)")
            code = random_piggyback(base, args.t, np.random.default_rng(args.seed), args.kind)
    if args.out is None:
        sys.stdout.write(dumps(code_to_dict(code)))
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_code(out / "code.json", code)
    paths = _write_schemes(out, schemes)
    print(f"code={out / 'code.json'}")
    print(f"schemes={len(paths)}")
    for p in paths:
        print(f"scheme={p}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    code = read_code(args.code)
    scheme = read_scheme(args.scheme, code)
    try:
        plan = verify_scheme(scheme)
    except SchemeError as exc:
        print("status=invalid")
        print(f"condition={exc.condition}")
        print(f"detail={exc.detail}")
        print(f"{exc.detail}", file=sys.stderr)
        return EXIT_VERIFY
    print("status=valid")
    print(f"failed={scheme.failed}")
    print(f"bandwidth={plan.bandwidth}")
    print(f"perfect={str(plan.bandwidth == perfect_bandwidth(code)).lower()}")
    for node in plan.helpers():
        rows = ";".join(",".join(str(v) for v in row) for row in plan.queries[node].tolist())
        print(f"query.{node}={rows}")
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    code = read_code(args.code)
    if args.set is None:
        repair_set = [r for r in range(code.n) if r != args.failed]
    else:
        repair_set = args.set
    target = perfect_bandwidth(code) if args.target is None else args.target
    budget = SearchBudget(args.max_candidates, 0, args.time_limit)
    outcome = exhaustive_scheme_search(code, args.failed, repair_set, target, budget)
    print(f"status={outcome.status}")
    print(f"candidates_tried={outcome.candidates_tried}")
    if outcome.scheme is not None:
        print(f"bandwidth={verify_scheme(outcome.scheme).bandwidth}")
        if args.out:
            write_scheme(args.out, outcome.scheme)
            print(f"scheme={args.out}")
    return EXIT_BUDGET if outcome.status == BUDGET else EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    code = read_code(args.code)
    schemes = {}
    for path in args.schemes:
        s = read_scheme(path, code)
        schemes[(s.failed, s.repair_set)] = s
    reduced, new = reduce_substripe(code, schemes)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_code(out / "code.json", reduced)
        _write_schemes(out, new)
    print(f"t={reduced.t}")
    for key in sorted(new, key=lambda k: (k[0], sorted(k[1]))):
        before = verify_scheme(schemes[key]).bandwidth
        after = verify_scheme(new[key]).bandwidth
        print(f"node={key[0]} set={','.join(map(str, sorted(new[key].repair_set)))} bandwidth={before}->{after}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    code = read_code(args.code)
    cluster = ClusterState(code)
    if args.payload:
        try:
            with open(args.payload, "rb") as fh:
                ingest(cluster, fh)
        except PayloadReadError as exc:
            raise ParseError(str(exc)) from exc
        except OSError as exc:
            raise ParseError(f"{args.payload}: {exc.strerror or exc}") from exc
    else:
        rng = np.random.default_rng(args.seed)
        ingest_symbols(cluster, rng.integers(0, code.q, args.stripes * code.k * code.t))
    if args.schemes:
        schemes = {}
        for path in args.schemes:
            s = read_scheme(path, code)
            schemes.setdefault(s.failed, s)
    else:
        schemes = {args.fail: find_scheme(code, args.fail)}
    report = fail_and_repair(cluster, args.fail, schemes)
    sys.stdout.write(report.to_json() if args.json else report.to_text())
    if args.report:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    return EXIT_OK if report.restored_exact else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="piggyrepair", description="Piggybacking codes and their repair schemes.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a code file, optionally with repair schemes")
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--t", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--kind", choices=[PIGGYBACK, LINEBACK], default=PIGGYBACK)
    g.add_argument("--seed", type=int)
    g.add_argument("--fixture", choices=["fig3"])
    g.add_argument("--construct", choices=["k2t2", "lineback"])
    g.add_argument("--plain", action="store_true", help="all-zero piggyback matrices")
    g.add_argument("--retries", type=int, default=10, help="random draws for --construct lineback")
    g.add_argument("--out", help="directory for code.json and scheme files (default: code to stdout)")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="check a scheme against a code")
    v.add_argument("--code", required=True)
    v.add_argument("--scheme", required=True)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="exhaustive search for a scheme")
    s.add_argument("--code", required=True)
    s.add_argument("--failed", type=int, required=True)
    s.add_argument("--set", type=_node_list, help="repair set, e.g. 1,2,3,5 (default: all other nodes)")
    s.add_argument("--target", type=int, help="bandwidth to reach (default: k+t-1)")
    s.add_argument("--max-candidates", type=int, default=10**6)
    s.add_argument("--time-limit", type=float, default=60.0)
    s.add_argument("--out", help="write the scheme found here")
    s.set_defaults(func=cmd_search)

    r = sub.add_parser("reduce", help="drop substripe 0 and shrink the schemes")
    r.add_argument("--code", required=True)
    r.add_argument("--schemes", nargs="+", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    m = sub.add_parser("simulate", help="store stripes, fail a node, meter its repair")
    m.add_argument("--code", required=True)
    m.add_argument("--stripes", type=int, default=10)
    m.add_argument("--fail", type=int, required=True)
    m.add_argument("--schemes", nargs="+")
    m.add_argument("--payload", help="file to store instead of random stripes")
    m.add_argument("--seed", type=int, default=0, help="seed for random stripe contents (default 0)")
    m.add_argument("--json", action="store_true", help="print the report as JSON")
    m.add_argument("--report", help="also write the JSON report here")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SchemeError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (BudgetExceeded, BudgetExhausted) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ParameterError, NoSchemeError, UsageError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except ValueError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
