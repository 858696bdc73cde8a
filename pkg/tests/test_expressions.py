import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_real_field
from gtospec.errors import ConfigError
from gtospec.expressions import (
    ExpressionError,
    Term,
    field_terms,
    format_terms,
    parse_flow_expression,
    trig_field,
)
from gtospec.exterior import ModeLattice


def test_sine_coefficients():
    lat = ModeLattice(1, 3)
    f = trig_field("sin(1*x1)", lat)
    assert f.coeffs[lat.slot((1,))] == -0.5j
    assert f.coeffs[lat.slot((-1,))] == 0.5j
    assert np.count_nonzero(f.coeffs) == 2


def test_cosine_of_combined_phase():
    lat = ModeLattice(2, 2)
    f = trig_field("2*cos(1*x1 - 1*x2)", lat)
    assert f.coeffs[lat.slot((1, -1))] == 1
    assert f.coeffs[lat.slot((-1, 1))] == 1
    assert np.count_nonzero(f.coeffs) == 2


def test_constants_and_whitespace():
    lat = ModeLattice(2, 1)
    a = trig_field("  1.5+0.5 * cos( 1*x2 )-3", lat)
    assert a.coeffs[lat.slot((0, 0))] == -1.5
    assert a.coeffs[lat.slot((0, 1))] == 0.25


def test_shorthands():
    lat = ModeLattice(2, 2)
    np.testing.assert_array_equal(trig_field("-sin(x1)", lat).coeffs, trig_field("-1*sin(1*x1)", lat).coeffs)


@pytest.mark.parametrize(
    "text,dim,fragment",
    [
        ("sin(0.5*x1)", 1, "integer"),
        ("sin(1*x3)", 2, "out of range"),
        ("sin(1*x1", 1, "expected"),
        ("tan(1*x1)", 1, ""),
        ("2*", 1, ""),
        ("sin(1*y1)", 1, ""),
        ("", 1, ""),
    ],
)
def test_syntax_errors(text, dim, fragment):
    with pytest.raises(ExpressionError) as err:
        parse_flow_expression(text, dim)
    assert fragment in str(err.value)
    assert err.value.position >= 0


def test_error_is_config_error_and_reports_position():
    with pytest.raises(ConfigError, match="position"):
        parse_flow_expression("cos(1*x1) + sin(2.5*x1)", 1)


def test_mode_outside_cutoff_fails_at_bind():
    expr = parse_flow_expression("cos(3*x1)", 1)
    with pytest.raises(ConfigError, match="cutoff"):
        expr.bind(ModeLattice(1, 2))


def test_dimension_precondition():
    with pytest.raises(ConfigError):
        parse_flow_expression("1", 4)


terms = st.lists(
    st.builds(
        Term,
        st.floats(-5, 5, allow_nan=False).filter(lambda c: c != 0),
        st.sampled_from(["sin", "cos", "const"]),
        st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
    ),
    min_size=1,
    max_size=6,
).map(lambda ts: [Term(t.coefficient, t.kind, (0, 0) if t.kind == "const" else t.wavevector) for t in ts])


@settings(max_examples=60, deadline=None)
@given(terms)
def test_roundtrip_through_text(ts):
    lat = ModeLattice(2, 3)
    text = format_terms(ts)
    first = parse_flow_expression(text, 2).bind(lat)
    again = parse_flow_expression(parse_flow_expression(text, 2).to_text(), 2).bind(lat)
    np.testing.assert_array_equal(first.coeffs, again.coeffs)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_field_terms_inverts_binding(seed, dim):
    lat = ModeLattice(dim, 2)
    f = random_real_field(lat, np.random.default_rng(seed), 2)
    back = trig_field(format_terms(field_terms(f)), lat)
    np.testing.assert_array_equal(back.coeffs, f.coeffs)
