import pytest

from convexcert.errors import SpecError
from convexcert.fnspec import compose_nodes, infer_dim, parse_fn_spec, parse_tree
from convexcert.vecspace import Vector


def test_catalog_lookup():
    f = parse_fn_spec("norm2", dim=3)
    assert f.name == "norm2" and f.dim == 3 and f.claims_L_smooth == 2.0
    assert parse_fn_spec("square").dim == 1
    assert parse_fn_spec("norm_sq_fn", 2).name == "norm2"
    assert parse_fn_spec("  const ( 4.5 ) ", 2).eval(Vector([1, 1])) == 4.5
    assert parse_fn_spec("const", 2).eval(Vector([0, 0])) == 1337.0


def test_combinator_claim():
    f = parse_fn_spec("scale(2, sum(norm2, diagq(1,5)))", dim=2)
    assert f.claims_L_smooth == 24.0 and f.claims_convex
    assert parse_fn_spec("scale(2, sum(norm2, diagq(1,5)))").dim == 2


def test_affine_and_diagq_arguments():
    a = parse_fn_spec("affine(1, -2, 0.5)")
    assert a.dim == 2 and a.eval(Vector([3, 1])) == 1.5
    d = parse_fn_spec("diagq(1e0, 5)")
    assert d.eval(Vector([1, 1])) == 6.0


def test_compose_nodes_and_inferred_dims():
    tree = parse_tree("sum(compose(sqpos, norm), scale(3, compose(quartic, norm2)))")
    assert [n.outer.name for n in compose_nodes(tree)] == ["sqpos", "quartic"]
    assert infer_dim(tree) is None
    f = parse_fn_spec("compose(sqpos, norm)", 2)
    assert f.eval(Vector([3, 4])) == 25.0


def test_negative_scale_rejected_with_position():
    with pytest.raises(SpecError) as info:
        parse_fn_spec("scale(-1, norm2)", 2)
    msg = str(info.value)
    assert "negative scale" in msg and "a >= 0" in msg
    assert info.value.pos == 6
    assert "^" in msg


@pytest.mark.parametrize("text, fragment", [
    ("", "empty"),
    ("norm3", "unknown function"),
    ("norm2(", "expected"),
    ("sum(norm2)", "expected ,"),
    ("norm2 norm2", "trailing"),
    ("const(1, 2)", "arity"),
    ("diagq(1,5)", "dim conflict"),
    ("sum(diagq(1,5), diagq(1,2,3))", "dim conflict"),
    ("compose(diagq(1,5), norm)", "1-D outer"),
    ("norm2 $", "unexpected character"),
])
def test_spec_errors(text, fragment):
    with pytest.raises(SpecError) as info:
        parse_fn_spec(text, 3)
    assert fragment in str(info.value)


def test_outer_function_is_one_dimensional():
    assert parse_fn_spec("compose(norm2, norm)", 3).dim == 3
    with pytest.raises(SpecError, match="arity"):
        parse_fn_spec("square(1)")


def test_missing_dimension():
    with pytest.raises(SpecError, match="pass --dim"):
        parse_fn_spec("norm2")
