"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 input or validation error,
3 a verification property failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import experiments as ex
from .analytics import DEFAULT_TIE_TOLERANCE, SplitPolicy, centralized_is_interior, contribution_index, nash_equilibrium
from .centralized import SolverConfig, SolverError, compare, solve_centralized
from .model import load_market
from .oracle import run_verification

EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _json_safe(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _write_json(doc, path):
    text = json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _vec(xs) -> str:
    return "[" + ", ".join(_fmt(x) for x in xs) + "]"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpinvest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def solver_flags(p):
        p.add_argument("--tol", type=float, default=SolverConfig.abs_tolerance, help="bisection tolerance on Q")
        p.add_argument("--max-iter", type=int, default=SolverConfig.max_iterations)
        p.add_argument("--bracket-growth", type=float, default=SolverConfig.bracket_growth)

    def market_flags(p):
        p.add_argument("--market", required=True, help='JSON file {"cps": [{"r":..,"a":..,"b":..}, ...]}')
        p.add_argument("--allow-b-below-one", action="store_true")

    def nash_flags(p):
        p.add_argument("--split", choices=[s.value for s in SplitPolicy], default="equal")
        p.add_argument("--tie-tol", type=float, default=DEFAULT_TIE_TOLERANCE)

    p = sub.add_parser("validate", help="check a market file")
    market_flags(p)

    p = sub.add_parser("centralized", help="solve the centralized allocation")
    market_flags(p)
    solver_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("nash", help="solve the non-cooperative equilibrium")
    market_flags(p)
    nash_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("compare", help="compare both regimes")
    market_flags(p)
    solver_flags(p)
    nash_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("sweep-delta", help="sweep ra_n = base * n^-delta")
    solver_flags(p)
    p.add_argument("--n-cps", type=int, nargs="+", choices=[2, 5], default=[2, 5])
    p.add_argument("--base", type=float, default=2.0)
    p.add_argument("--delta-max", type=float, default=2.0)
    p.add_argument("--delta-step", type=float, default=0.1)
    p.add_argument("--out", help="CSV path (standard output if omitted)")

    p = sub.add_parser("sweep-psi", help="grid over ra = [psi1, psi2] for two CPs")
    solver_flags(p)
    p.add_argument("--b", action="append", help="b vector such as 1,1 (repeatable; default 1,1 and 2,2)")
    p.add_argument("--psi-step", type=float, default=0.25)
    p.add_argument("--psi-max", type=float, help="default 5.0 for b=1,1 and 6.0 otherwise")
    p.add_argument("--out", help="CSV path (standard output if omitted)")

    p = sub.add_parser("verify", help="run the randomized oracle suite")
    solver_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--markets", type=int, default=100)
    p.add_argument("--starts", type=int, default=3, help="best-response starts per market")
    p.add_argument("--q-tol", type=float, default=1e-4)
    p.add_argument("--u-tol", type=float, default=1e-6)
    p.add_argument("--dynamics-tol", type=float, default=1e-5)
    return parser


def _solver(args) -> SolverConfig:
    return SolverConfig(args.tol, args.max_iter, args.bracket_growth)


def _cmd_validate(args, out):
    m = load_market(args.market, args.allow_b_below_one)
    print(f"valid market with N = {m.n_cps}", file=out)
    if not m.structural_condition_verified:
        print("warning: some b < 1; the structural condition b sqrt(p) >= p is unverified", file=out)
    print(f"centralized optimum interior: {centralized_is_interior(m)}", file=out)
    print(f"ra - b^2/2 per CP: {_vec(contribution_index(m))}", file=out)


def _cmd_centralized(args, out):
    m = load_market(args.market, args.allow_b_below_one)
    sol = solve_centralized(m, _solver(args))
    print(f"Q_C* = {_fmt(sol.Q_star)}", file=out)
    print(f"p*   = {_vec(sol.p_star)}", file=out)
    print(f"P_C* = {_fmt(sol.P_star)}", file=out)
    print(f"gamma_C = {_fmt(sol.gamma)}", file=out)
    print(f"U_C* = {_fmt(sol.total_utility)}", file=out)
    if args.out:
        _write_json({"command": "centralized", "outcome": sol.to_dict()}, args.out)


def _cmd_nash(args, out):
    m = load_market(args.market, args.allow_b_below_one)
    eq = nash_equilibrium(m, args.tie_tol, SplitPolicy(args.split))
    print(f"Q_N* = {_fmt(eq.Q_star)}", file=out)
    if eq.Q_star == 0:
        print("no CP contributes", file=out)
    else:
        members = ", ".join(str(n + 1) for n in sorted(eq.contributor_set))
        print(f"contributors: {{{members}}}" + ("  (any split among them is an equilibrium)" if eq.degenerate else ""), file=out)
    print(f"q*   = {_vec(eq.q_star)}", file=out)
    print(f"p*   = {_vec(eq.p_star)}", file=out)
    print(f"gamma_N = {_fmt(eq.gamma)}", file=out)
    print(f"U_N* = {_fmt(eq.total_utility)}", file=out)
    if args.out:
        _write_json({"command": "nash", "outcome": eq.to_dict()}, args.out)


def _cmd_compare(args, out):
    m = load_market(args.market, args.allow_b_below_one)
    rep = compare(m, _solver(args), args.tie_tol, SplitPolicy(args.split))
    print(f"Q_C* = {_fmt(rep.centralized.Q_star)}", file=out)
    print(f"Q_N* = {_fmt(rep.nash.Q_star)}", file=out)
    print(f"eta = {_fmt(rep.eta)}", file=out)
    print(f"Gamma = {_fmt(rep.capital_gamma)}", file=out)
    print(f"gamma_C = {_fmt(rep.gamma_c)}", file=out)
    print(f"gamma_N = {_fmt(rep.gamma_n)}", file=out)
    if args.out:
        _write_json({"command": "compare", "report": rep.to_dict()}, args.out)


def _emit(table, args, out):
    if args.out:
        ex.emit_csv(table, args.out)
        log = out
    else:
        ex.write_csv(table, out)
        log = sys.stderr
    for t in ex.assert_trends(table):
        print(t.line(), file=log)


def _cmd_sweep_delta(args, out):
    if args.delta_step <= 0 or args.delta_max < 0:
        raise ValueError("delta step must be positive and delta max non-negative")
    k = int(round(args.delta_max / args.delta_step))
    grid = tuple(round(args.delta_step * i, 10) for i in range(k + 1))
    configs = {2: ex.N2_B_CONFIGS, 5: ex.N5_B_CONFIGS}
    table = ex.SweepTable("delta")
    for n in sorted(set(args.n_cps)):
        spec = ex.DeltaSweepSpec(n, grid, configs[n], args.base)
        table = table.extend(ex.run_delta_sweep(spec, _solver(args)))
    _emit(table, args, out)


def _cmd_sweep_psi(args, out):
    bs = [ex.parse_b(b) for b in args.b] if args.b else [(1.0, 1.0), (2.0, 2.0)]
    table = ex.SweepTable("psi")
    for b in bs:
        stop = args.psi_max if args.psi_max is not None else (5.0 if b == (1.0, 1.0) else 6.0)
        axis = ex.psi_axis(args.psi_step, stop)
        table = table.extend(ex.run_psi_sweep(ex.PsiSweepSpec(axis, axis, b), _solver(args)))
    _emit(table, args, out)


def _cmd_verify(args, out):
    results = run_verification(
        args.seed,
        n_markets=args.markets,
        n_starts=args.starts,
        q_tol=args.q_tol,
        u_tol=args.u_tol,
        dynamics_tol=args.dynamics_tol,
        config=_solver(args),
    )
    for r in results:
        print(r.line(), file=out)
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} suites passed (seed {args.seed})", file=out)
    return 0 if ok else EXIT_VERIFY


COMMANDS = {
    "validate": _cmd_validate,
    "centralized": _cmd_centralized,
    "nash": _cmd_nash,
    "compare": _cmd_compare,
    "sweep-delta": _cmd_sweep_delta,
    "sweep-psi": _cmd_sweep_psi,
    "verify": _cmd_verify,
}


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        code = COMMANDS[args.command](args, out)
    except (OSError, ValueError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
