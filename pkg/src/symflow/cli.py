"""Command-line interface: ``symflow <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import catalog
from .cayley import flow_closed_trace, flow_numeric
from .decomposition import (
    adapted_polar,
    adapted_svd,
    decomposition_to_json,
    polar,
    reduce_to_diagonal,
    reduction_to_json,
    svd_canonical,
)
from .errors import SymflowError, ValidationFailure
from .oracle import OracleConfig, oracle_critical_set
from .scalar_matrix import load_matrix
from .symmetric_space import Automorphism, SymmetricSpaceSpec, validate_automorphism
from .tolerances import TOL


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _space_and_x(args):
    spec = catalog.load_space(args.space)
    X = load_matrix(args.X)
    if spec.sigma is not None and (X.field != spec.field or X.n != spec.n):
        raise SymflowError(f"X is {X.field}{X.n} but the space acts on {spec.field}{spec.n}")
    return spec, X


def cmd_verify(args) -> int:
    if args.space in catalog.CATALOG:
        spec = catalog.CATALOG[args.space]().spec
    else:
        with open(args.space) as fh:
            spec = SymmetricSpaceSpec.from_json(json.load(fh))
    if spec.sigma is None:
        _dump({"space": spec.name, "group_mode": True, "passed": True, "residuals": {}})
        return 0
    try:
        res = validate_automorphism(spec.sigma, samples=args.samples, seed=args.seed)
    except ValidationFailure as exc:
        _dump({"space": spec.name, "passed": False, "failed": exc.properties, "residuals": exc.residuals})
        return 1
    _dump({"space": spec.name, "passed": True, "residuals": res})
    return 0


def cmd_critical(args) -> int:
    spec, X = _space_and_x(args)
    if args.mode == "model" and spec.sigma is None:
        raise SymflowError("model mode needs a space with an automorphism")
    cfg = OracleConfig(restarts=args.restarts, seed=args.seed)
    recs = oracle_critical_set(spec.sigma, X, args.mode, cfg, tol=args.tol)
    out = []
    for r in recs:
        d = r.to_json()
        d["cluster_size"] = r.cluster_size
        out.append(d)
    _dump(out)
    return 0


def cmd_flow(args) -> int:
    spec, X = _space_and_x(args)
    alpha0 = load_matrix(args.alpha0)
    center = load_matrix(args.center)
    grid = np.linspace(args.t0, args.t1, args.steps + 1)
    parts = []
    if args.method in ("closed", "both"):
        parts.append(("closed", flow_closed_trace(spec.sigma, X, center, alpha0, grid)))
    if args.method in ("rk4", "both"):
        if args.t0 < 0:
            raise SymflowError("rk4 integrates forward from t = 0; use t0 >= 0")
        parts.append(("rk4", flow_numeric(spec.sigma, X, alpha0, grid, step=args.step)))
    text = ""
    for k, (name, tr) in enumerate(parts):
        csv = tr.to_csv(method=name if args.method == "both" else None)
        text += csv if k == 0 else csv.split("\n", 1)[1]
    sys.stdout.write(text)
    return 0


def cmd_reduce(args) -> int:
    spec, X = _space_and_x(args)
    if spec.sigma is None:
        raise SymflowError("reduce needs a space with an automorphism")
    _dump(reduction_to_json(reduce_to_diagonal(spec.sigma, X)))
    return 0


def cmd_decompose(args) -> int:
    Y = load_matrix(args.Y)
    sigma = None
    if args.sigma:
        with open(args.sigma) as fh:
            obj = json.load(fh)
        sigma = Automorphism.from_json(obj.get("sigma", obj))
    if args.kind == "svd":
        res = svd_canonical(Y)
    elif args.kind == "polar":
        res = polar(Y, args.side)
    else:
        if sigma is None:
            raise SymflowError(f"--kind {args.kind} needs --sigma")
        res = adapted_polar(sigma, Y, args.side) if args.kind == "adapted-polar" else adapted_svd(sigma, Y)
    _dump(decomposition_to_json(res))
    return 0


def cmd_paper_suite(args) -> int:
    rep = catalog.run_paper_suite(args.filter, tighten=args.tighten)
    for row in rep["checks"]:
        flag = "PASS" if row["passed"] else "FAIL"
        print(f"{flag} {row['space']}/{row['check']} residual={row['residual']:.3e} tol={row['tol']:.1e}", file=sys.stderr)
    _dump(rep)
    return 0 if rep["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symflow", description="Height functions on matrix groups and symmetric spaces.")
    p.add_argument("--cluster-gap", type=float, default=None, help="relative gap separating singular-value blocks")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="spot-check the automorphism axioms of a space")
    v.add_argument("--space", required=True)
    v.add_argument("--samples", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("critical", help="find critical points by multistart search")
    c.add_argument("--space", required=True)
    c.add_argument("--X", required=True)
    c.add_argument("--mode", choices=["group", "model"], required=True)
    c.add_argument("--tol", type=float, default=None)
    c.add_argument("--restarts", type=int, default=24)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_critical)

    f = sub.add_parser("flow", help="sample a gradient flow line as CSV")
    f.add_argument("--space", required=True)
    f.add_argument("--X", required=True)
    f.add_argument("--alpha0", required=True)
    f.add_argument("--center", required=True)
    f.add_argument("--t0", type=float, default=0.0)
    f.add_argument("--t1", type=float, required=True)
    f.add_argument("--steps", type=int, default=20)
    f.add_argument("--method", choices=["closed", "rk4", "both"], default="closed")
    f.add_argument("--step", type=float, default=1e-3, help="RK4 step size")
    f.set_defaults(func=cmd_flow)

    r = sub.add_parser("reduce", help="reduce a height function to the diagonal case")
    r.add_argument("--space", required=True)
    r.add_argument("--X", required=True)
    r.set_defaults(func=cmd_reduce)

    d = sub.add_parser("decompose", help="SVD and (adapted) polar decompositions")
    d.add_argument("--sigma", default=None)
    d.add_argument("--Y", required=True)
    d.add_argument("--kind", choices=["polar", "svd", "adapted-polar", "adapted-svd"], required=True)
    d.add_argument("--side", choices=["left", "right"], default="left")
    d.set_defaults(func=cmd_decompose)

    s = sub.add_parser("paper-suite", help="replicate the worked examples")
    s.add_argument("--filter", default=None)
    s.add_argument("--tighten", type=float, default=1.0, help="divide tolerances by this factor")
    s.set_defaults(func=cmd_paper_suite)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cluster_gap is not None:
        TOL.cluster_gap = args.cluster_gap
    try:
        return args.func(args)
    except (SymflowError, KeyError, ValueError, OSError) as exc:
        print(f"symflow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
