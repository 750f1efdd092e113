"""Batch command-line front end.

Subcommands
-----------
verify       -- normalize the selected field and sweep the identity chain
                (Bochner, trace, product-rule link, curvature-divergence)
                over a guarded grid
gauss-bonnet -- total-curvature integral, Euler-characteristic estimate and,
                when a field is given, the divergence-theorem residual of its
                curvature-potential field
smooth       -- run the polynomial smoothing pipeline and report the
                certified budget

Reports are JSON (schema 1) on stdout, optionally duplicated to --out; CSV
emits flat per-node residual rows for plotting.  Exit status: 0 all checks
passed, 1 an identity/budget/rounding check failed, 2 configuration error.
Identical configurations produce byte-identical JSON except for the
"timings" section.  BOCHNER_THREADS caps the worker threads used for grid
sweeps (default 1; reductions keep a fixed order either way).
"""

import argparse
import ast
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import approx, bochner, integrate, operators
from . import surfaces as surf
from .errors import (
    BudgetNotMetError,
    ChiIndeterminateError,
    ConfigError,
    GeometryError,
    ZeroFieldPointError,
)

SCHEMA_VERSION = 1
PRODUCT_RULE_TOL = 1e-8

_SURFACE_KINDS = {
    "sphere": ("sphere", 1), "torus": ("torus", 2),
    "clifford": ("clifford_torus", 1), "clifford_torus": ("clifford_torus", 1),
    "ellipsoid": ("ellipsoid", 3),
}

_ALLOWED_CALLS = {"sin": np.sin, "cos": np.cos}
_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name,
                  ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div,
                  ast.USub, ast.UAdd, ast.Load)


def _parse_expression(text):
    """Compile a whitelisted chart expression of u and v.

    Grammar: sin, cos, + - * /, numeric constants, the names u and v.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse field expression {text!r}: {exc}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ConfigError(
                f"expression {text!r} uses disallowed syntax {type(node).__name__}")
        if isinstance(node, ast.Call):
            if (not isinstance(node.func, ast.Name)
                    or node.func.id not in _ALLOWED_CALLS or node.keywords
                    or len(node.args) != 1):
                raise ConfigError(f"expression {text!r}: only sin(...) and "
                                  f"cos(...) calls are allowed")
        if isinstance(node, ast.Name) and node.id not in ("u", "v", "sin", "cos"):
            raise ConfigError(f"expression {text!r}: unknown name {node.id!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"expression {text!r}: non-numeric constant")
    code = compile(tree, "<field>", "eval")

    def fn(u, v):
        return eval(code, {"__builtins__": {}},
                    {"u": u, "v": v, **_ALLOWED_CALLS})
    return fn


def expression_field(expr_u, expr_v):
    fu = _parse_expression(expr_u)
    fv = _parse_expression(expr_v)

    def coeff(u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.stack(np.broadcast_arrays(fu(u, v) + 0.0 * u, fv(u, v) + 0.0 * u),
                        axis=-1)

    return operators.TangentField(coeff, name=f"expr({expr_u},{expr_v})")


def kinked_mixture_field():
    """Continuous, nowhere-zero built-in field with |.|-kinks in both slots."""
    def coeff(u, v):
        au = 1.0 + 0.5 * np.abs(np.sin(u))
        av = 0.6 * np.abs(np.cos(v)) - 0.3
        return np.stack(np.broadcast_arrays(au, av), axis=-1)

    return operators.TangentField(coeff, name="kinked")


def named_field(name):
    if name == "du":
        return operators.coordinate_field(0)
    if name == "dv":
        return operators.coordinate_field(1)
    if name == "du+dv":
        return operators.add_fields(operators.coordinate_field(0),
                                    operators.coordinate_field(1))
    if name == "kinked":
        return kinked_mixture_field()
    raise ConfigError(f"unknown field name {name!r}; "
                      f"use du, dv, du+dv, kinked or \"expr_u,expr_v\"")


def parse_field(text):
    if "," in text:
        parts = text.split(",")
        if len(parts) != 2:
            raise ConfigError(f"field expression needs exactly two components, "
                              f"got {text!r}")
        return expression_field(parts[0].strip(), parts[1].strip())
    return named_field(text.strip())


def parse_surface(text, backend):
    name, _, params = text.partition(":")
    name = name.strip().lower()
    if name not in _SURFACE_KINDS:
        raise ConfigError(f"unknown surface {name!r}; "
                          f"choose from {sorted(_SURFACE_KINDS)}")
    kind, nparams = _SURFACE_KINDS[name]
    if params:
        try:
            values = tuple(float(p) for p in params.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad surface parameters {params!r}") from exc
    else:
        values = ()
    if values and len(values) != nparams:
        raise ConfigError(f"surface {name!r} takes {nparams} parameter(s), "
                          f"got {len(values)}")
    mode, step = backend
    try:
        return surf.make_surface(kind, values, mode=mode, step=step)
    except GeometryError as exc:
        raise ConfigError(str(exc)) from exc


def parse_backend(text):
    if text == "analytic":
        return ("analytic", surf.DEFAULT_FD_STEP)
    if text == "fd":
        return ("fd", surf.DEFAULT_FD_STEP)
    if text.startswith("fd:"):
        try:
            step = float(text[3:])
        except ValueError as exc:
            raise ConfigError(f"bad fd step in backend {text!r}") from exc
        if step <= 0:
            raise ConfigError("fd step must be positive")
        return ("fd", step)
    raise ConfigError(f"unknown backend {text!r}; use analytic or fd[:H]")


def parse_grid(text):
    try:
        nu, nv = (int(p) for p in text.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}; expected NUxNV") from exc
    if nu < 4 or nv < 4:
        raise ConfigError("grid needs at least 4 nodes per axis")
    return nu, nv


def parse_tols(pairs):
    out = {}
    for pair in pairs or ():
        name, _, val = pair.partition("=")
        if not val:
            raise ConfigError(f"bad tolerance override {pair!r}; expected NAME=VAL")
        try:
            out[name.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value in {pair!r}") from exc
    return out


def thread_count():
    raw = os.environ.get("BOCHNER_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"BOCHNER_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def sweep_chunks(fn, U, V, threads, chunk=1024):
    """Evaluate fn over flat node arrays, optionally in a thread pool.

    Chunks are concatenated in index order, so the result is deterministic
    for any thread count.
    """
    U = np.asarray(U).ravel()
    V = np.asarray(V).ravel()
    if threads <= 1 or U.size <= chunk:
        return fn(U, V)
    blocks = [slice(i, min(i + chunk, U.size)) for i in range(0, U.size, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda b: fn(U[b], V[b]), blocks))
    return np.concatenate(parts, axis=0)


def guarded_eval(fn, U, V, threads):
    """Vectorized sweep with a per-node fallback on geometry errors.

    Returns (values, failed) where failed lists nodes whose evaluation
    raised; their residual slots are NaN.  A node failure is not fatal to
    the sweep.
    """
    try:
        return sweep_chunks(fn, U, V, threads), []
    except GeometryError:
        pass
    Uf, Vf = np.asarray(U).ravel(), np.asarray(V).ravel()
    values = np.full(Uf.shape, np.nan)
    failed = []
    for i, (uu, vv) in enumerate(zip(Uf, Vf)):
        try:
            values[i] = float(fn(np.asarray(uu), np.asarray(vv)))
        except GeometryError as exc:
            failed.append({"u": float(uu), "v": float(vv), "error": str(exc)})
    return values, failed


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"unserializable {type(obj)}")


def render_report(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, default=_json_default) + "\n"
    rows = ["section,name,u,v,value"]
    for check in report.get("checks", ()):
        for node in check.get("nodes", ()):
            rows.append(f"residual,{check['name']},{node['u']:.17g},"
                        f"{node['v']:.17g},{node['residual']:.17g}")
        rows.append(f"summary,{check['name']},,,{check['sup']:.17g}")
    for key, val in report.get("integrals", {}).items():
        rows.append(f"integral,{key},,,{val['value']:.17g}")
    if "chi" in report:
        rows.append(f"chi,raw,,,{report['chi']['raw']:.17g}")
        rows.append(f"chi,rounded,,,{report['chi']['rounded']}")
    if "smoothing" in report:
        for key in ("final_degree", "sup_error", "min_tangential_norm"):
            rows.append(f"smoothing,{key},,,{report['smoothing'][key]}")
    return "\n".join(rows) + "\n"


def emit(report, args):
    text = render_report(report, args.format)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)


def _config_echo(args, surface, grid_shape, tols):
    backend = args.backend
    return {
        "surface": surface.name,
        "field": args.field,
        "grid": f"{grid_shape[0]}x{grid_shape[1]}",
        "backend": backend,
        "tolerances": {k: tols[k] for k in sorted(tols)},
        "threads": thread_count(),
        "format": args.format,
    }


def _check_entry(name, values, U, V, tol, keep_nodes):
    rep = bochner.residual_report(name, values, U, V, tol)
    entry = {
        "name": name,
        "sup": rep.sup,
        "mean": rep.mean,
        "worst_node": {"u": rep.worst_point.u, "v": rep.worst_point.v},
        "tolerance": rep.tolerance,
        "pass": rep.passed,
        "n_points": rep.n_points,
    }
    if keep_nodes:
        flat_u = np.broadcast_to(U, values.shape).ravel()
        flat_v = np.broadcast_to(V, values.shape).ravel()
        entry["nodes"] = [
            {"u": float(a), "v": float(b), "residual": float(r)}
            for a, b, r in zip(flat_u, flat_v, np.asarray(values).ravel())]
    return entry


def cmd_verify(args):
    backend = parse_backend(args.backend)
    surface = parse_surface(args.surface, backend)
    field = parse_field(args.field)
    nu, nv = parse_grid(args.grid)
    tols = parse_tols(args.tol)
    threads = thread_count()
    keep_nodes = args.format == "csv"

    base = bochner.default_tolerance(surface)
    tol_of = lambda name, dflt: tols.get(name, dflt)
    grid = surf.chart_grid(surface, nu, nv)
    mask = surf.guarded_mask(surface, grid.U, grid.V)

    report = {"schema": SCHEMA_VERSION,
              "command": "verify",
              "config": _config_echo(args, surface, (nu, nv), tols),
              "checks": []}
    t_start = time.perf_counter()

    # locate zero-field nodes first; identity checks run on the clean subset
    norms = operators.field_norm(surface, field, grid.U, grid.V)
    floor = tols.get("zero_floor", bochner.ZERO_FLOOR)
    zero_nodes = mask & (norms < floor)
    usable = mask & ~zero_nodes
    report["zero_field_nodes"] = [
        {"u": float(a), "v": float(b)}
        for a, b in zip(grid.U[zero_nodes].ravel()[:64],
                        grid.V[zero_nodes].ravel()[:64])]
    report["n_zero_field_nodes"] = int(np.count_nonzero(zero_nodes))

    overall = report["n_zero_field_nodes"] == 0
    if not np.any(usable):
        report["error"] = "no usable grid nodes: field vanishes everywhere"
        report["overall_pass"] = False
        report["timings"] = {"total_s": time.perf_counter() - t_start}
        return report, 1

    U, V = grid.U[usable], grid.V[usable]
    unit = bochner.normalize_field(surface, field, floor=floor)

    checks = [
        ("bochner", lambda uu, vv: bochner.bochner_residual(surface, unit, uu, vv),
         tol_of("bochner", base)),
        ("trace_identity",
         lambda uu, vv: bochner.trace_identity_residual(surface, unit, uu, vv),
         tol_of("trace_identity", base)),
        ("divergence_product_rule",
         lambda uu, vv: bochner.divergence_scaling_residual(surface, unit, uu, vv),
         tol_of("divergence_product_rule", base)),
        ("curvature_identity",
         lambda uu, vv: bochner.curvature_identity_residual(surface, unit, uu, vv),
         tol_of("curvature_identity", base)),
    ]
    for name, fn, tol in checks:
        values, failed = guarded_eval(fn, U, V, threads)
        ok = np.isfinite(values)
        entry = _check_entry(name, np.where(ok, values, 0.0), U, V, tol, keep_nodes)
        if failed:
            entry["failed_nodes"] = failed[:64]
            entry["n_failed"] = len(failed)
            entry["pass"] = bool(entry["pass"] and len(failed) == 0)
        report["checks"].append(entry)
        overall = overall and entry["pass"]

    # canonical scalar product rule: f = cos u + sin v against du + dv
    f = operators.ScalarField(
        value=lambda uu, vv: np.cos(uu) + np.sin(vv),
        grad=lambda uu, vv: np.stack(
            np.broadcast_arrays(-np.sin(uu), np.cos(vv)), axis=-1),
        name="cos(u)+sin(v)")
    xsum = operators.add_fields(operators.coordinate_field(0),
                                operators.coordinate_field(1))
    pr_tol = tol_of("product_rule",
                    PRODUCT_RULE_TOL if surface.derivative_mode == "analytic"
                    else base)
    pr_vals = operators.product_rule_residual_at(surface, f, xsum, U, V)
    entry = _check_entry("product_rule", pr_vals, U, V, pr_tol, keep_nodes)
    report["checks"].append(entry)
    overall = overall and entry["pass"]

    report["overall_pass"] = bool(overall)
    report["timings"] = {"total_s": time.perf_counter() - t_start}
    return report, 0 if overall else 1


def cmd_gauss_bonnet(args):
    backend = parse_backend(args.backend)
    surface = parse_surface(args.surface, backend)
    nu, nv = parse_grid(args.grid)
    tols = parse_tols(args.tol)
    chi_margin = tols.get("chi_margin", integrate.CHI_MARGIN)

    report = {"schema": SCHEMA_VERSION,
              "command": "gauss-bonnet",
              "config": _config_echo(args, surface, (nu, nv), tols),
              "integrals": {}}
    t_start = time.perf_counter()
    grid = surf.chart_grid(surface, nu, nv)

    total = integrate.total_curvature(surface, grid)
    report["integrals"]["total_curvature"] = {
        "value": total.value, "estimated_error": total.estimated_error,
        "rule": total.rule, "resolution": list(total.resolution)}

    raw = total.value / (2.0 * np.pi)
    rounded = int(np.rint(raw))
    margin = abs(raw - rounded)
    indeterminate = margin >= chi_margin
    report["chi"] = {"raw": raw, "rounded": rounded, "margin": margin,
                     "margin_limit": chi_margin,
                     "indeterminate": bool(indeterminate)}
    if surface.known_chi is not None:
        # echoed for reference; the pass verdict rests on determinacy alone
        report["chi"]["declared"] = surface.known_chi

    overall = not indeterminate

    if args.field:
        field = parse_field(args.field)
        unit = bochner.normalize_field(surface, field)
        pot = bochner.curvature_potential_field(surface, unit)
        res = integrate.divergence_theorem_residual(surface, pot, grid)
        div_tol = tols.get("divergence_theorem",
                           1e-8 if surface.derivative_mode == "analytic"
                           else bochner.FD_TOL)
        report["integrals"]["divergence_theorem_residual"] = {
            "value": res.value, "estimated_error": res.estimated_error,
            "rule": res.rule, "resolution": list(res.resolution),
            "tolerance": div_tol, "pass": bool(abs(res.value) <= div_tol)}
        overall = overall and abs(res.value) <= div_tol

    report["overall_pass"] = bool(overall)
    report["timings"] = {"total_s": time.perf_counter() - t_start}
    return report, 0 if overall else 1


def cmd_smooth(args):
    backend = parse_backend(args.backend)
    surface = parse_surface(args.surface, backend)
    field = parse_field(args.field)
    nu, nv = parse_grid(args.grid)
    tols = parse_tols(args.tol)
    if args.max_degree < 0:
        raise ConfigError("--max-degree must be >= 0")

    report = {"schema": SCHEMA_VERSION,
              "command": "smooth",
              "config": _config_echo(args, surface, (nu, nv), tols),
              "config_extra": {"max_degree": args.max_degree}}
    t_start = time.perf_counter()

    try:
        rep, _, poly = approx.smooth_field(surface, field,
                                           max_degree=args.max_degree,
                                           fit_grid=(nu, nv))
    except BudgetNotMetError as exc:
        rep = exc.report
        report["smoothing"] = _smooth_section(rep)
        report["error"] = str(exc)
        report["overall_pass"] = False
        report["timings"] = {"total_s": time.perf_counter() - t_start}
        return report, 1

    report["smoothing"] = _smooth_section(rep)
    if args.coeff_out:
        approx.write_coefficient_file(poly, args.coeff_out)
        report["smoothing"]["coefficient_file"] = args.coeff_out
    report["overall_pass"] = bool(rep.passed)
    report["timings"] = {"total_s": time.perf_counter() - t_start}
    return report, 0 if rep.passed else 1


def _smooth_section(rep):
    return {
        "final_degree": rep.final_degree,
        "sup_error": rep.sup_error if np.isfinite(rep.sup_error) else None,
        "min_tangential_norm": rep.min_tangential_norm,
        "target": rep.target,
        "pass": rep.passed,
        "degrees_tried": list(rep.degrees_tried),
    }


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bochner2d",
        description="Certify curvature identities, Euler characteristics and "
                    "field smoothing on built-in embedded surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, field_required, field_default=None):
        p.add_argument("--surface", required=True,
                       help="NAME[:p1,p2,...], e.g. torus:2,1 or sphere:1")
        p.add_argument("--field", required=field_required, default=field_default,
                       help="named field (du, dv, du+dv, kinked) or \"expr_u,expr_v\"")
        p.add_argument("--grid", default="64x64", help="NUxNV grid resolution")
        p.add_argument("--backend", default="analytic",
                       help="analytic | fd | fd:H (stencil step H)")
        p.add_argument("--tol", action="append", metavar="NAME=VAL",
                       help="per-check tolerance override; repeatable")
        p.add_argument("--out", default=None, help="also write the report here")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p_verify = sub.add_parser("verify", help="run the identity-residual suite")
    common(p_verify, field_required=True)

    p_gb = sub.add_parser("gauss-bonnet",
                          help="total curvature and Euler characteristic")
    common(p_gb, field_required=False)

    p_smooth = sub.add_parser("smooth", help="polynomial smoothing pipeline")
    common(p_smooth, field_required=True)
    p_smooth.add_argument("--max-degree", type=int, default=16)
    p_smooth.add_argument("--coeff-out", default=None,
                          help="write fitted polynomial coefficients here")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"verify": cmd_verify, "gauss-bonnet": cmd_gauss_bonnet,
                "smooth": cmd_smooth}
    try:
        report, status = handlers[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except ZeroFieldPointError as exc:
        sys.stderr.write(f"zero-field-point: {exc}\n")
        return 1
    except GeometryError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    emit(report, args)
    return status


if __name__ == "__main__":
    sys.exit(main())
