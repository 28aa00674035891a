"""``sdg verify`` runs the randomized check suites; ``sdg demo`` prints a worked trace."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import connection as cn
from . import liegroup as lg
from .igroup import MonadGroup
from .multilinear import nonzero_entries
from .suites import SUITES, SuiteConfig, run_checks
from .weil import make_algebra, rational

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _suite_list(text: str) -> tuple:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in SUITES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown suites {bad}; choose from {', '.join(SUITES)}")
    return names


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _point(text: str) -> list:
    try:
        return [rational(x.strip()) for x in text.split(",")]
    except (ValueError, TypeError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated rationals, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdg", description="Exact verification of second-order infinitesimal group structures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run the randomized check suites")
    v.add_argument("--seed", type=_seed, default=None, help="sampler seed (default: $SDG_SEED or 0)")
    v.add_argument("--trials", type=_positive, default=8)
    v.add_argument("--dim", type=_positive, default=3, help="chart dimension for the generic suites")
    v.add_argument("--range", dest="bound", type=_positive, default=10**6, help="numerator/denominator bound")
    v.add_argument("--suites", type=_suite_list, default=SUITES, help="comma-separated subset of " + ",".join(SUITES))
    v.add_argument("--group", choices=sorted(lg.GROUPS), default="gl2")
    v.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True, help="check neighbourhood preconditions")
    v.add_argument("--negative-controls", action="store_true", help="also run deliberately broken laws")
    v.add_argument("--out", help="write the report to this path instead of stdout")
    v.add_argument("--format", choices=("text", "json"), default=None, help="default: text on stdout, json with --out")
    v.add_argument("--timings", action="store_true", help="show elapsed time per check (text only)")

    d = sub.add_parser("demo", help="print bracket, products and commutator for two directions")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("group", nargs="?", choices=sorted(lg.GROUPS), help="matrix group")
    src.add_argument("--connection", help="connection-symbol JSON file")
    d.add_argument("--base", type=_point, help="base point for --connection (default: origin)")
    d.add_argument("u", type=_point, help="first direction, e.g. 1,0,0")
    d.add_argument("v", type=_point, help="second direction")
    return p


# -- verify ---------------------------------------------------------------------------------


def _seed_from_env() -> int:
    raw = os.environ.get("SDG_SEED")
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"SDG_SEED: {exc}") from None


def report_json(cfg: SuiteConfig, records) -> str:
    obj = {
        "config": {
            "seed": cfg.seed,
            "trials": cfg.trials,
            "dim": cfg.dim,
            "range": cfg.bound,
            "suites": list(cfg.suites),
            "group": cfg.group,
            "strict": cfg.strict,
            "negative_controls": cfg.negative_controls,
        },
        "records": [r.as_json() for r in records],
        "summary": _summary(records),
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def report_text(cfg: SuiteConfig, records, timings: bool = False) -> str:
    lines = [f"seed={cfg.seed} trials={cfg.trials} dim={cfg.dim} range={cfg.bound} group={cfg.group}"]
    for r in records:
        t = f" {r.elapsed:7.3f}s" if timings else ""
        lines.append(f"{r.status.upper():13s}{t} {r.id}: {r.anchor}")
        for w in r.witness:
            lines.append(f"    witness: {w}")
    s = _summary(records)
    lines.append(f"{s['pass']} pass, {s['fail']} fail, {s['expected-fail']} expected-fail")
    return "\n".join(lines) + "\n"


def _summary(records) -> dict:
    counts = {"pass": 0, "fail": 0, "expected-fail": 0}
    for r in records:
        counts[r.status] += 1
    return counts


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _seed_from_env()
    cfg = SuiteConfig(
        seed=seed,
        trials=args.trials,
        dim=args.dim,
        bound=args.bound,
        suites=args.suites,
        group=args.group,
        strict=args.strict,
        negative_controls=args.negative_controls,
    )
    records = run_checks(cfg)
    fmt = args.format or ("json" if args.out else "text")
    text = report_json(cfg, records) if fmt == "json" else report_text(cfg, records, args.timings)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        s = _summary(records)
        print(f"{s['pass']} pass, {s['fail']} fail, {s['expected-fail']} expected-fail; report in {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_FAIL if any(r.status == "fail" for r in records) else EXIT_OK


# -- demo --------------------------------------------------------------------------------------


def _fmt_tensor(T) -> list[str]:
    entries = nonzero_entries(T)
    if not entries:
        return ["  (all zero)"]
    return [f"  G[{i}][{j}][{k}] = {c}" for i, j, k, c in entries]


def cmd_demo(args) -> int:
    if args.connection:
        try:
            with open(args.connection, encoding="utf-8") as fh:
                conn = cn.PolynomialConnection.loads(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.connection}: {exc.strerror}") from None
        base_coords = args.base or [0] * conn.dim
        title = f"connection from {args.connection}"
        group = None
    else:
        if args.base is not None:
            raise UsageError("--base only applies with --connection")
        group = lg.group_by_name(args.group)
        conn = None
        title = f"{group.name}, left-invariant connection at e"
    n = conn.dim if conn else group.dim
    for name, vec in (("u", args.u), ("v", args.v), ("base", None if group else base_coords)):
        if vec is not None and len(vec) != n:
            raise UsageError(f"{name} has {len(vec)} coordinates, expected {n}")

    if group:
        mg = lg.left_monad_group(group, strict=False)
    else:
        mg = MonadGroup(conn, make_algebra(1).vec(base_coords), strict=False)
    conn = mg.conn

    # two square-zero parameters: Q = P + d1 u, R = P + d2 v
    alg = make_algebra(2, 3, [(0, 0), (1, 1)])
    d1, d2 = alg.gen(0), alg.gen(1)
    P = mg.at(alg)
    Q = P + alg.vec(args.u) * d1
    R = P + alg.vec(args.v) * d2

    out = [f"# {title}", f"base P = {mg.base}", f"u = {make_algebra(1).vec(args.u)}", f"v = {make_algebra(1).vec(args.v)}"]
    out.append("connection symbol at P:")
    out += _fmt_tensor(conn.tensor(mg.base))
    bracket = mg.bracket(Q, R) - P
    out.append(f"bracket [u, v] = {make_algebra(1).vec([x.coeff((1, 1)) for x in bracket])}")
    if group:
        comm = lg.rational_commutator(_matrix(group, args.u), _matrix(group, args.v))
        out.append(f"matrix commutator uv - vu = {[[str(x) for x in row] for row in comm]}")
    out.append("with Q = P + d1*u, R = P + d2*v, d1^2 = d2^2 = 0:")
    for path in mg.PATHS:
        out.append(f"  Q*R ({path:9s}) = {mg.mul(Q, R, path)}")
    out.append(f"  [Q, R] (points)  = {mg.bracket(Q, R)}")
    out.append(f"  QRQ^-1R^-1       = {mg.commutator(Q, R)}")
    tau = cn.torsion(conn, P, Q, R, strict=False)
    out.append(f"  torsion tau_P(Q, R) = {tau}")
    out.append(f"  torsion equals base: {'yes' if tau == P else 'no'}")
    out.append(f"verdict: monad group at P is {'abelian' if mg.abelian_at_base else 'non-abelian'}")
    print("\n".join(out))
    return EXIT_OK


def _matrix(group, coords):
    rows = [[rational(0)] * group.n for _ in range(group.n)]
    for (i, j), x in zip(group.coords(), coords):
        rows[i][j] = x
    return rows


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_demo(args)
    except (UsageError, cn.ConnectionFormatError, ValueError) as exc:
        print(f"sdg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
