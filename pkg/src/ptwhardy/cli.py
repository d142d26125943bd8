"""Command-line front end.

Every subcommand writes a JSON report (or CSV when ``--out`` ends in
``.csv``) to ``--out`` or standard output.  Exit status: 0 when every
certificate passes, 1 when at least one fails, 2 on usage or input errors.
Reports depend only on the inputs and ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .alpha import AlphaQuery, alpha_optimize, verify_witness
from .certificate import eps_num, jsonable, set_eps_num
from .curves import InfeasibleError, inf_connection_potential
from .generators import GEN_KINDS, PATTERNS, gen_space
from .hardy import HardyCharParams, hardy_rows, sample_hardy_fields
from .maximal import load_field, maximal_all
from .poincare import CurveCharParams, estimate_CA, two_point_rows
from .selfimprove import ExperimentConfig, self_improve_experiment
from .space import DomainSet, SpaceError, doubling_constant, dump_space, load_domain, load_space

MAXIMAL_COLUMNS = ["x", "value"]
POINCARE_COLUMNS = ["x", "y", "lhs", "rhs", "ratio", "witness_length", "pass"]
HARDY_COLUMNS = ["field", "x", "d", "u", "maximal", "lhs", "rhs", "ratio", "char_lhs", "char_ratio", "witness_length", "pass"]
ALPHA_COLUMNS = ["tau", "x", "value", "gap", "converged", "pass"]
SELF_IMPROVE_COLUMNS = ["tau", "i0", "lhs", "rhs", "margin", "converged", "pass"]


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _space(args) -> object:
    return load_space(_read(args.space))


def _domain(args, space) -> DomainSet:
    return load_domain(space, _read(args.omega))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(jsonable(r.get(c))) for c in columns])
    return buf.getvalue()


def to_json(report) -> str:
    return json.dumps(jsonable(report), indent=2) + "\n"


def _emit(args, report: dict, rows: list[dict], columns: list[str]) -> None:
    text = to_csv(rows, columns) if args.out and args.out.endswith(".csv") else to_json(report)
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


def _globals(args) -> dict:
    return {"eps_num": eps_num(), "seed": args.seed}


# --------------------------------------------------------------------------
# subcommands


def cmd_maximal(args) -> int:
    space = _space(args)
    f = load_field(space, _read(args.f))
    vals = maximal_all(space, f, args.p, args.r)
    idx = range(space.n) if args.x is None else [space.index(args.x)]
    rows = [{"x": space.ids[i], "value": float(vals[i])} for i in idx]
    report = {"kind": "maximal", "p": args.p, "r": args.r, **_globals(args), "rows": rows, "pass": True}
    _emit(args, report, rows, MAXIMAL_COLUMNS)
    return 0


def cmd_poincare(args) -> int:
    space = _space(args)
    fields = [load_field(space, _read(args.g))] if args.g else []
    C_A = args.c_a
    if C_A is None:
        C_A = estimate_CA(space, args.p, args.nu, args.kappa, args.trials, args.seed, extra_fields=fields)
    params = CurveCharParams(args.p, C_A, args.nu, args.kappa)
    g = fields[0] if fields else np.ones(space.n)
    rows = two_point_rows(space, g, params)
    ok = all(r["pass"] for r in rows)
    report = {
        "kind": "poincare_check",
        "constants": {"p": args.p, "nu": args.nu, "kappa": args.kappa, "C_A": C_A, "D": doubling_constant(space)},
        "estimated": args.c_a is None,
        **_globals(args),
        "rows": rows,
        "pass": ok,
    }
    _emit(args, report, rows, POINCARE_COLUMNS)
    return 0 if ok else 1


def _hardy_table(domain: DomainSet, g: np.ndarray, p: float, nu: float, kappa: float, field_id: int) -> list[dict]:
    space = domain.space
    u = inf_connection_potential(space, g, domain)
    by_radius: dict = {}
    rows = []
    char = {r["x"]: r for r in hardy_rows(domain, g, HardyCharParams(p, 1.0, nu, kappa))}
    for xi in domain.omega_sorted:
        d = float(domain.dist_comp[xi])
        if d not in by_radius:
            by_radius[d] = maximal_all(space, g, p, kappa * d)
        m = float(by_radius[d][xi])
        denom = d * m
        ratio = u[xi] / denom if denom > 0 else (0.0 if u[xi] <= eps_num() else float("inf"))
        c = char[space.ids[xi]]
        rows.append(
            {
                "field": field_id,
                "x": space.ids[xi],
                "d": d,
                "u": float(u[xi]),
                "maximal": m,
                "lhs": float(u[xi]),
                "ratio": ratio,
                "char_lhs": c["lhs"],
                "char_ratio": c["ratio"],
                "witness_length": c["witness_length"],
            }
        )
    return rows


def cmd_hardy(args) -> int:
    space = _space(args)
    domain = _domain(args, space)
    if args.g:
        fields = [load_field(space, _read(args.g))]
    else:
        fields = sample_hardy_fields(domain, args.trials, args.seed)
    for g in fields:
        if np.any(g < 0):
            raise UsageError("g must be nonnegative")
    rows = []
    for i, g in enumerate(fields):
        rows.extend(_hardy_table(domain, g, args.p, args.nu, args.kappa, i))
    estimate = max((r["ratio"] for r in rows), default=0.0)
    char_estimate = max((r["char_ratio"] for r in rows), default=0.0)
    C_H = args.c_h if args.c_h is not None else estimate
    for r in rows:
        r["rhs"] = C_H * r["d"] * r["maximal"]
        r["pass"] = bool(r["lhs"] <= r["rhs"] + eps_num())
    ok = all(r["pass"] for r in rows)
    violations = sorted({r["x"] for r in rows if not r["pass"]})
    report = {
        "kind": "hardy_check",
        "evidence": "sampled: a pass is evidence, not proof",
        "constants": {
            "p": args.p,
            "nu": args.nu,
            "kappa": args.kappa,
            "C_H": C_H,
            "C_H_estimate": estimate,
            "C_Gamma_estimate": char_estimate,
            "D": doubling_constant(space),
        },
        **_globals(args),
        "violations": violations,
        "rows": rows,
        "pass": ok,
    }
    _emit(args, report, rows, HARDY_COLUMNS)
    return 0 if ok else 1


def cmd_alpha(args) -> int:
    space = _space(args)
    domain = _domain(args, space)
    taus = args.tau or [0.0]
    if args.x is not None and space.index(args.x) not in domain.omega:
        raise UsageError(f"--x {args.x} is not in omega")
    results, rows = [], []
    ok = True
    for tau in taus:
        query = AlphaQuery(args.nu, args.kappa, tau, args.p, args.x)
        est = alpha_optimize(domain, query, tol=args.tol, max_rounds=args.max_rounds, method=args.method)
        at_x = AlphaQuery(args.nu, args.kappa, tau, args.p, est.x)
        good = verify_witness(domain, est, at_x) and est.value <= args.nu + eps_num()
        ok = ok and good
        entry = {"tau": tau, **est.to_dict(space), "pass": good}
        results.append(entry)
        rows.append({"tau": tau, "x": entry["x"], "value": est.value, "gap": est.gap, "converged": est.converged, "pass": good})
    report = {
        "kind": "alpha",
        "constants": {"p": args.p, "nu": args.nu, "kappa": args.kappa, "tol": args.tol, "max_rounds": args.max_rounds, "method": args.method},
        **_globals(args),
        "results": results,
        "pass": ok,
    }
    _emit(args, report, rows, ALPHA_COLUMNS)
    return 0 if ok else 1


def cmd_self_improve(args) -> int:
    space = _space(args)
    domain = _domain(args, space)
    taus = tuple(args.tau) if args.tau else ExperimentConfig.taus
    cfg = ExperimentConfig(
        taus=taus,
        trials=args.trials,
        seed=args.seed,
        nu=args.nu,
        kappa=args.kappa,
        tol=args.tol,
        estimate_trials=args.estimate_trials,
        C_A=args.c_a,
        C_Gamma=args.c_gamma,
        q=args.q,
    )
    report = self_improve_experiment(domain, args.p, args.p_prime, cfg)
    report.update(_globals(args))
    if args.out and not args.out.endswith(".csv"):
        summary = Path(args.out).with_suffix(".csv")
        try:
            summary.write_text(to_csv(report["summary"], SELF_IMPROVE_COLUMNS), encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {summary}: {exc.strerror or exc}") from exc
    _emit(args, report, report["summary"], SELF_IMPROVE_COLUMNS)
    return 0 if report["pass"] else 1


def cmd_gen_space(args) -> int:
    cells = None
    if args.cells:
        try:
            cells = [tuple(int(t) for t in c.split(",")) for c in args.cells]
        except ValueError as exc:
            raise UsageError("--cell expects R,C") from exc
    space, domain = gen_space(args.kind, n=args.n, rows=args.rows, cols=args.cols, pattern=args.pattern, cells=cells)
    space_text = dump_space(space)
    omega_text = json.dumps(domain.to_dict(), indent=2) + "\n"
    for path, text in ((args.out_space, space_text), (args.out_omega, omega_text)):
        if path:
            try:
                Path(path).write_text(text, encoding="utf-8")
            except OSError as exc:
                raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from exc
    report = {
        "kind": "gen_space",
        "space_kind": args.kind,
        "vertices": space.n,
        "edges": len(space.edges),
        "omega": len(domain.omega),
        "complement": [space.ids[i] for i in sorted(domain.complement)],
        "D": doubling_constant(space),
        **_globals(args),
        "pass": True,
    }
    if not args.out_space:
        report["space"] = json.loads(space_text)
        report["domain"] = domain.to_dict()
    _emit(args, report, [], [])
    return 0


# --------------------------------------------------------------------------
# parser


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _taus(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected a number or comma-separated list") from exc
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("tau must be nonnegative")
    return vals


class _ExtendTaus(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        cur = list(getattr(namespace, self.dest) or [])
        setattr(namespace, self.dest, cur + values)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps-num", type=float, default=1e-9, help="additive slack for certified inequalities")
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are sequential")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file; .csv selects CSV, anything else JSON")

    ap = argparse.ArgumentParser(prog="ptwhardy", description=__doc__.splitlines()[0], parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help, parents=[common])
        sp.set_defaults(func=fn)
        return sp

    m = add("maximal", cmd_maximal, "restricted maximal function of a field")
    m.add_argument("--space", required=True)
    m.add_argument("--f", required=True, help="field file")
    m.add_argument("--p", type=float, default=1.0)
    m.add_argument("--r", type=float, required=True)
    m.add_argument("--x")

    pc = add("poincare-check", cmd_poincare, "two-point curve characterization, one row per pair")
    pc.add_argument("--space", required=True)
    pc.add_argument("--p", type=float, default=1.0)
    pc.add_argument("--nu", type=float, default=2.0)
    pc.add_argument("--kappa", type=float, default=1.0)
    pc.add_argument("--c-a", type=_positive)
    pc.add_argument("--g")
    pc.add_argument("--trials", type=int, default=64)

    hc = add("hardy-check", cmd_hardy, "pointwise Hardy constant and curve characterization")
    hc.add_argument("--space", required=True)
    hc.add_argument("--omega", required=True)
    hc.add_argument("--p", type=float, default=2.0)
    hc.add_argument("--nu", type=float, default=2.0)
    hc.add_argument("--kappa", type=float, default=1.0)
    hc.add_argument("--c-h", type=_positive, help="constant to test; default is the sampled estimate")
    hc.add_argument("--g")
    hc.add_argument("--trials", type=int, default=32)

    al = add("alpha", cmd_alpha, "alpha-function lower bounds with witnesses")
    al.add_argument("--space", required=True)
    al.add_argument("--omega", required=True)
    al.add_argument("--p", type=float, default=2.0)
    al.add_argument("--nu", type=float, default=2.0)
    al.add_argument("--kappa", type=float, default=1.0)
    al.add_argument("--tau", type=_taus, action=_ExtendTaus, help="repeatable or comma-separated")
    al.add_argument("--x")
    al.add_argument("--tol", type=_positive, default=1e-4)
    al.add_argument("--max-rounds", type=int, default=100)
    al.add_argument("--method", choices=("barrier", "supergradient"), default="barrier")

    si = add("self-improve", cmd_self_improve, "end-to-end self-improvement experiment")
    si.add_argument("--space", required=True)
    si.add_argument("--omega", required=True)
    si.add_argument("--p", type=float, default=2.0)
    si.add_argument("--p-prime", type=float, default=1.0)
    si.add_argument("--q", type=float)
    si.add_argument("--tau", type=_taus, action=_ExtendTaus)
    si.add_argument("--trials", type=int, default=4)
    si.add_argument("--estimate-trials", type=int, default=64)
    si.add_argument("--nu", type=float, default=2.0)
    si.add_argument("--kappa", type=float, default=1.0)
    si.add_argument("--tol", type=_positive, default=1e-4)
    si.add_argument("--c-a", type=_positive)
    si.add_argument("--c-gamma", type=_positive)

    gs = add("gen-space", cmd_gen_space, "write an example space and omega")
    gs.add_argument("--kind", choices=GEN_KINDS, required=True)
    gs.add_argument("--n", type=int)
    gs.add_argument("--rows", type=int)
    gs.add_argument("--cols", type=int)
    gs.add_argument("--pattern", choices=PATTERNS, default="center")
    gs.add_argument("--cell", dest="cells", action="append", help="R,C of a removed grid cell (repeatable)")
    gs.add_argument("--out-space")
    gs.add_argument("--out-omega")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_eps_num(args.eps_num)
        return args.func(args)
    except (UsageError, SpaceError, InfeasibleError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2
    finally:
        set_eps_num(1e-9)


if __name__ == "__main__":
    sys.exit(main())
