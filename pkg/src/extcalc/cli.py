"""Command-line front end.

Subcommands: eval, wedge, d, pullback, integrate, verify.  Results go to
stdout (human-readable by default, JSON with ``--json``).  Exit status is 0
on success, 1 on domain errors or a failed verification, 2 on usage and
parse errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .calculus import (
    VectorFieldProxy, complex_report, curl_as_two_form, divergence_as_volume_form,
    exterior_derivative, gradient_as_one_form,
)
from .errors import DimensionError, DomainError, ExtCalcError, ParseError
from .expr import differentiate, eval_scalar, parse_scalar, simplify, to_text
from .forms import (
    DifferentialForm, add, default_variables, form_from_json, form_to_json, form_to_text,
    pair, parse_form, scale, scalar_form, wedge,
)
from .integrate import (
    ParamPatch, QuadratureSpec, convergence_study, flux_classical, integrate_form,
    integrate_volume_form, line_integral_classical, orientation_flip_check, verify_stokes,
)
from .maps import (
    SmoothMap, compose, jacobian, map_from_json, map_to_json, map_to_text, parse_map, pullback,
)
from .verify import KINDS, run_suite


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# argument helpers

def _variables(args, n: int | None = None) -> tuple[str, ...]:
    if args.vars:
        names = tuple(v.strip() for v in args.vars.split(","))
        if n is not None and len(names) != n:
            raise _UsageError(f"--vars lists {len(names)} names but the dimension is {n}")
        return names
    return default_variables(n if n is not None else args.dim)


def _numbers(text: str) -> list[float]:
    """Comma-separated constants; ``pi`` is allowed, e.g. ``0, 2*pi``."""
    return [eval_scalar(parse_scalar(part, ["pi"]), [math.pi]) for part in text.split(",")]


def _box(text) -> list[tuple[float, float]]:
    if isinstance(text, list):
        return [tuple(float(v) for v in axis) for axis in text]
    axes = []
    for chunk in text.split(";"):
        values = _numbers(chunk)
        if len(values) != 2:
            raise _UsageError(f"box axis {chunk.strip()!r} needs exactly two bounds")
        axes.append((values[0], values[1]))
    return axes


def _map(source) -> SmoothMap:
    if isinstance(source, dict):
        return map_from_json(source)
    return parse_map(source)


def _form(text, args, n=None, variables=None) -> DifferentialForm:
    if isinstance(text, dict):
        return form_from_json(text)
    variables = variables or _variables(args, n)
    return parse_form(text, variables=variables)


def _field(text: str, variables) -> VectorFieldProxy:
    parts = _split_top(text)
    if len(parts) != 3:
        raise _UsageError("a vector field needs three comma-separated components")
    return VectorFieldProxy([parse_scalar(p, variables) for p in parts], variables)


def _split_top(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def _quad(args, points=None) -> QuadratureSpec:
    return QuadratureSpec(points if points is not None else args.quad_points, args.rule)


def _fmt_value(v: float) -> str:
    return repr(float(f"{v:.15g}"))


# ---------------------------------------------------------------------------
# subcommands; each returns (human text, json payload)

def cmd_eval(args):
    if args.form is not None:
        form = _form(args.form, args)
        if args.at is None:
            raise _UsageError("--at is required to evaluate a form")
        vectors = [_numbers(v) for v in args.vectors.split(";")] if args.vectors else []
        value = pair(form, _numbers(args.at), vectors)
        return _fmt_value(value), {"value": value}
    if args.expr is None:
        raise _UsageError("one of --expr or --form is required")
    variables = _variables(args)
    e = parse_scalar(args.expr, variables)
    if args.diff:
        if args.diff not in variables:
            raise _UsageError(f"--diff {args.diff!r} is not one of {', '.join(variables)}")
        e = simplify(differentiate(e, variables.index(args.diff)))
    elif args.simplify:
        e = simplify(e)
    if args.at is None:
        text = to_text(e, variables)
        return text, {"expr": text}
    value = eval_scalar(e, _numbers(args.at))
    return _fmt_value(value), {"value": value}


def cmd_wedge(args):
    forms = [_form(f, args) for f in args.form]
    result = forms[0]
    for f in forms[1:]:
        result = add(result, f) if args.op == "add" else wedge(result, f)
    if args.scale is not None:
        result = scale(parse_scalar(args.scale, result.variables), result)
    return form_to_text(result), form_to_json(result)


def cmd_d(args):
    variables = _variables(args)
    if args.complex:
        report = complex_report(args.dim)
        return str(report), report.to_json()
    if args.grad is not None:
        result = gradient_as_one_form(scalar_form(args.grad, 3, _variables(args, 3)))
    elif args.curl is not None:
        result = curl_as_two_form(_field(args.curl, _variables(args, 3)))
    elif args.div is not None:
        result = divergence_as_volume_form(_field(args.div, _variables(args, 3)))
    elif args.form is not None:
        result = _form(args.form, args, variables=variables)
        for _ in range(args.times):
            result = exterior_derivative(result)
    else:
        raise _UsageError("one of --form, --grad, --curl, --div, --complex is required")
    return form_to_text(result), form_to_json(result)


def cmd_pullback(args):
    f = _map(args.map)
    if args.jacobian:
        jac = jacobian(f)
        rows = [[to_text(e, f.domain_vars) for e in row] for row in jac.entries]
        return "\n".join("[" + ", ".join(r) + "]" for r in rows), {"jacobian": rows}
    if args.then is not None:
        g = compose(f, _map(args.then))
        return map_to_text(g), map_to_json(g)
    if args.form is None:
        raise _UsageError("one of --form, --jacobian, --then is required")
    form = _form(args.form, args, f.codomain_dim)
    result = pullback(f, form)
    return form_to_text(result), form_to_json(result)


def _load_job(path: str) -> dict:
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid job JSON: {exc.msg}", text, exc.pos) from exc


def cmd_integrate(args):
    if args.job is not None:
        job = _load_job(args.job)
        patch_spec = job.get("patch", {})
        args.map = patch_spec.get("map", args.map)
        args.box = patch_spec.get("box", args.box)
        args.orientation = int(patch_spec.get("orientation", args.orientation))
        args.form = job.get("form", args.form)
        args.vars = ",".join(job["variables"]) if job.get("variables") else args.vars
        args.quad_points = int(job.get("quadrature", {}).get("points", args.quad_points))
        args.rule = job.get("quadrature", {}).get("rule", args.rule)
    if args.box is None:
        raise _UsageError("--box is required")
    quad = _quad(args)
    box = _box(args.box)
    if args.volume:
        if args.form is None:
            raise _UsageError("--form is required")
        form = _form(args.form, args, len(box))
        value = integrate_volume_form(form, box, quad)
        return _fmt_value(value), {"value": value, "quadrature": quad.to_json()}
    if args.map is None:
        raise _UsageError("--map is required (or --volume)")
    patch = ParamPatch(_map(args.map), box, args.orientation)
    n = patch.map.codomain_dim
    if args.classical:
        if args.field is None:
            raise _UsageError("--classical needs --field")
        v = _field(args.field, _variables(args, 3))
        fn = line_integral_classical if args.classical == "line" else flux_classical
        value = fn(v, patch, quad)
        return _fmt_value(value), {"value": value, "quadrature": quad.to_json()}
    if args.form is None:
        raise _UsageError("--form is required")
    form = _form(args.form, args, n)
    if args.flip:
        r = orientation_flip_check(form, patch, quad)
        text = (f"+1: {_fmt_value(r.positive)}\n-1: {_fmt_value(r.negative)}\n"
                f"{'PASS' if r.passed else 'FAIL'}")
        return text, {**r.to_json(), "quadrature": quad.to_json()}
    if args.convergence:
        r = convergence_study(form, patch, rule=args.rule)
        lines = [f"{p:3d} points: {v!r}  error {e:.3e}"
                 for p, v, e in zip(r.points, r.values, r.errors)]
        lines.append(f"reference ({r.reference_points} points): {r.reference!r}")
        lines.append("monotone" if r.monotone else "NOT monotone")
        return "\n".join(lines), r.to_json()
    value = integrate_form(form, patch, quad)
    return _fmt_value(value), {"value": value, "quadrature": quad.to_json()}


def cmd_verify(args):
    if args.kind == "stokes" and args.form is not None:
        if args.map is None or args.box is None:
            raise _UsageError("a custom Stokes check needs --form, --map and --box")
        patch = ParamPatch(_map(args.map), _box(args.box), args.orientation)
        form = _form(args.form, args, patch.map.codomain_dim)
        r = verify_stokes(form, patch, _quad(args))
        passed = r.abs_error < args.tol
        text = (f"stokes: {'PASS' if passed else 'FAIL'}\n  lhs {r.lhs!r}\n  rhs {r.rhs!r}\n"
                f"  abs_error {r.abs_error:.3e} (tol {args.tol:.0e})")
        return text, {**r.to_json(), "passed": passed}, passed
    report = run_suite(args.kind, dim=args.dim, degree=args.degree, trials=args.trials,
                       seed=args.seed, quad_points=args.quad_points)
    return report.to_text(), report.to_json(), report.passed


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=3, help="ambient dimension (default 3)")
    common.add_argument("--vars", help="comma-separated coordinate names")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised checks")
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--quad-points", type=int, default=16, help="quadrature points per axis")
    common.add_argument("--rule", default="gauss-legendre", choices=["gauss-legendre", "midpoint"])

    parser = _ArgumentParser(prog="extcalc", description="Exterior calculus on R^n.")
    parser.add_argument("--version", action="version", version=f"extcalc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("eval", parents=[common], help="evaluate, differentiate or simplify; pair forms")
    p.add_argument("--expr")
    p.add_argument("--form")
    p.add_argument("--at", help="point, e.g. 1,2,3")
    p.add_argument("--vectors", help="tangent vectors separated by ';'")
    p.add_argument("--diff", metavar="VAR", help="differentiate with respect to VAR")
    p.add_argument("--simplify", action="store_true")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("wedge", parents=[common], help="wedge (or add) forms")
    p.add_argument("--form", action="append", required=True)
    p.add_argument("--op", choices=["wedge", "add"], default="wedge")
    p.add_argument("--scale", help="multiply the result by this function")
    p.set_defaults(handler=cmd_wedge)

    p = sub.add_parser("d", parents=[common], help="exterior derivative, grad/curl/div")
    p.add_argument("--form")
    p.add_argument("--times", type=int, default=1, help="apply d this many times")
    p.add_argument("--grad", metavar="F")
    p.add_argument("--curl", metavar="A1,A2,A3")
    p.add_argument("--div", metavar="A1,A2,A3")
    p.add_argument("--complex", action="store_true", help="print the de Rham sequence")
    p.set_defaults(handler=cmd_d)

    p = sub.add_parser("pullback", parents=[common], help="pullback, Jacobian, composition")
    p.add_argument("--map", required=True, help='e.g. "(t) -> (cos(t), sin(t), 0)"')
    p.add_argument("--form")
    p.add_argument("--jacobian", action="store_true")
    p.add_argument("--then", metavar="MAP", help="compose: apply MAP after --map")
    p.set_defaults(handler=cmd_pullback)

    p = sub.add_parser("integrate", parents=[common], help="integrate a form over a patch")
    p.add_argument("--form")
    p.add_argument("--map")
    p.add_argument("--box", help="axis bounds, e.g. '0,1;0,2*pi'")
    p.add_argument("--orientation", type=int, choices=[1, -1], default=1)
    p.add_argument("--job", help="JSON job file ('-' for stdin)")
    p.add_argument("--volume", action="store_true", help="integrate a top-degree form over the box")
    p.add_argument("--classical", choices=["line", "flux"])
    p.add_argument("--field", metavar="A1,A2,A3")
    p.add_argument("--flip", action="store_true", help="orientation reversal check")
    p.add_argument("--convergence", action="store_true", help="4..32 point study vs 64 points")
    p.set_defaults(handler=cmd_integrate)

    p = sub.add_parser("verify", parents=[common], help="run a verification battery")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--degree", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--form")
    p.add_argument("--map")
    p.add_argument("--box")
    p.add_argument("--orientation", type=int, choices=[1, -1], default=1)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(handler=cmd_verify)
    return parser


_VALUE_OPTIONS = frozenset({
    "--expr", "--form", "--at", "--vectors", "--scale", "--grad", "--curl", "--div",
    "--map", "--then", "--box", "--field", "--vars",
})


def _attach_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--box -1,1`` into ``--box=-1,1`` so argparse does not read the
    value as an option."""
    out, i = [], 0
    argv = list(argv)
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    """Run the CLI with ``argv`` and return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = _attach_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        with contextlib.redirect_stdout(stdout):
            args = parser.parse_args(argv)
        result = args.handler(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except _UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except (DimensionError, DomainError, ExtCalcError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    passed = True
    if len(result) == 3:
        text, payload, passed = result
    else:
        text, payload = result
    if args.json:
        print(json.dumps(payload, sort_keys=True), file=stdout)
    else:
        print(text, file=stdout)
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
