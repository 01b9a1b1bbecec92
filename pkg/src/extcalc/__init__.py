"""Exterior calculus on R^n with symbolic coefficients."""

__version__ = "0.1.0"

from .errors import DimensionError, DomainError, ExtCalcError, ParseError, UnknownIdentifierError
from .expr import (
    Expr, Point, differentiate, eval_array, eval_scalar, parse_scalar, simplify, to_text,
)
from .forms import (
    DifferentialForm, TangentVector, add, basis_form, form_from_json, form_to_json,
    form_to_text, forms_equal, make_form, pair, parse_form, scalar_form, scale, wedge,
    zero_form,
)
from .calculus import (
    VectorFieldProxy, complex_report, curl_as_two_form, divergence_as_volume_form,
    exterior_derivative, gradient_as_one_form,
)
from .maps import (
    JacobianMatrix, SmoothMap, compose, identity_map, jacobian, parse_map, pullback,
    sphere_chart,
)
from .integrate import (
    ParamPatch, QuadratureSpec, convergence_study, flux_classical, integrate_form,
    integrate_volume_form, line_integral_classical, orientation_flip_check, sphere_patch,
    verify_stokes,
)

__all__ = [
    "DimensionError", "DomainError", "ExtCalcError", "ParseError", "UnknownIdentifierError",
    "Expr", "Point", "differentiate", "eval_array", "eval_scalar", "parse_scalar", "simplify",
    "to_text",
    "DifferentialForm", "TangentVector", "add", "basis_form", "form_from_json", "form_to_json",
    "form_to_text", "forms_equal", "make_form", "pair", "parse_form", "scalar_form", "scale",
    "wedge", "zero_form",
    "VectorFieldProxy", "complex_report", "curl_as_two_form", "divergence_as_volume_form",
    "exterior_derivative", "gradient_as_one_form",
    "JacobianMatrix", "SmoothMap", "compose", "identity_map", "jacobian", "parse_map",
    "pullback", "sphere_chart",
    "ParamPatch", "QuadratureSpec", "convergence_study", "flux_classical", "integrate_form",
    "integrate_volume_form", "line_integral_classical", "orientation_flip_check",
    "sphere_patch", "verify_stokes",
]
