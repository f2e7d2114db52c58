import numpy as np
import pytest

from ckl.dsl import (
    DslError,
    BinOp,
    Pow,
    Sym,
    expr_jet,
    flat_metric_spec,
    parse_expr,
    parse_metric_spec,
)

FLAT_TEXT = """
signature: riemannian
coords: x0 x1 x2 x3
g00 = 1
g11 = 1
g22 = 1
g33 = 1
"""

HYPERBOLIC_TEXT = """
signature: riemannian
coords: x0 x1 x2 x3
g00 = 1/x3^2
g11 = 1/x3^2
g22 = 1/x3^2
g33 = 1/x3^2
"""


def test_flat_file_parses_with_zero_offdiagonals():
    spec = parse_metric_spec(FLAT_TEXT)
    assert len(spec.components) == 4
    g = spec.metric_values([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(g, np.eye(4))


def test_division_component_maps_to_tree():
    spec = parse_metric_spec(
        "signature: riemannian\ncoords: x0 x1 x2 x3\ng33 = 1/x3^2\n"
    )
    e = spec.component(3, 3)
    assert isinstance(e, BinOp) and e.op == "/"
    assert isinstance(e.right, Pow) and e.right.exponent == 2
    assert e.right.base == Sym("x3")


def test_unknown_symbol_rejected():
    with pytest.raises(DslError, match="unknown symbol y"):
        parse_metric_spec("signature: riemannian\ncoords: x0 x1 x2 x3\ng00 = y\n")


def test_syntax_error_reports_line():
    with pytest.raises(DslError, match="line 3"):
        parse_metric_spec("signature: riemannian\ncoords: x0 x1 x2 x3\ng00 = (1 +\n")


def test_bad_signature_tag():
    with pytest.raises(DslError, match="signature"):
        parse_metric_spec("signature: lorentzian\ncoords: a b c d\n")


def test_wrong_dimension():
    with pytest.raises(DslError, match="4 coordinate names"):
        parse_metric_spec("signature: riemannian\ncoords: a b c\n")


def test_params_parse_and_rebind():
    spec = parse_metric_spec(
        "signature: riemannian\ncoords: x0 x1 x2 x3\nparam a = 2.0\ng00 = a*x0\ng11 = 1\ng22 = 1\ng33 = 1\n"
    )
    assert spec.metric_values([3, 0, 0, 0])[0, 0] == pytest.approx(6.0)
    spec2 = spec.with_params(a=-1.0)
    assert spec2.metric_values([3, 0, 0, 0])[0, 0] == pytest.approx(-3.0)


def test_expr_jet_matches_hand_values():
    e = parse_expr("exp(x0) * (1 + x1)^2 - sin(x2)/cosh(x3)")
    j = expr_jet(e, ["x0", "x1", "x2", "x3"], [0.0, 0.0, 0.0, 0.0], 3, {})
    assert j.value == pytest.approx(1.0)
    assert j.partial((1, 0, 0, 0)) == pytest.approx(1.0)
    assert j.partial((0, 1, 0, 0)) == pytest.approx(2.0)
    assert j.partial((0, 0, 1, 0)) == pytest.approx(-1.0)


def test_hyperbolic_jets_match_rational_derivatives():
    spec = parse_metric_spec(HYPERBOLIC_TEXT)
    j = spec.metric_jets([0.0, 0.0, 0.0, 2.0], 3)
    # g33 = x3^-2: value 1/4, d/dx3 = -2 x3^-3 = -1/4, d2 = 6 x3^-4 = 3/8
    assert j.value[3, 3] == pytest.approx(0.25)
    assert j.partial((0, 0, 0, 1))[3, 3] == pytest.approx(-0.25)
    assert j.partial((0, 0, 0, 2))[3, 3] == pytest.approx(0.375)


def test_flat_spec_helper():
    spec = flat_metric_spec()
    np.testing.assert_allclose(spec.metric_values([1, 2, 3, 4]), np.eye(4))
    split = flat_metric_spec("split")
    np.testing.assert_allclose(split.metric_values([0, 0, 0, 0]), np.diag([1, 1, -1, -1]))


def test_conformal_rescale():
    spec = flat_metric_spec()
    om = parse_expr("exp(x0/10)")
    resc = spec.conformally_rescaled(om)
    g = resc.metric_values([1.0, 0, 0, 0])
    np.testing.assert_allclose(g, np.exp(0.2) * np.eye(4), rtol=1e-14)
