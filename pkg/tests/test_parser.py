import pytest

from merolab import ParseError, evaluate, parse
from merolab.expr import (
    Add,
    CanonicalProduct,
    Const,
    Func,
    LacunarySeries,
    Var,
    to_string,
)


def test_variable_and_constants():
    assert isinstance(parse("z").root, Var)
    node = parse("3.5").root
    assert isinstance(node, Const) and node.value == 3.5
    assert evaluate(parse("2*i"), 0j) == 2j


def test_precedence_matches_evaluation():
    assert evaluate(parse("1 + 2 * 3 ^ 2"), 0j) == 19
    assert evaluate(parse("(1 + 2) * 3"), 0j) == 9
    # unary minus is part of the base, so -z^2 means (-z)^2
    assert evaluate(parse("-z^2"), 2j) == pytest.approx(-4.0)
    with pytest.raises(ParseError):
        parse("2 ^ 3 ^ 2")  # exponents are single integer literals
    with pytest.raises(ParseError):
        parse("z^2.5")


def test_function_calls():
    for name in ("exp", "sin", "cos", "tan"):
        node = parse("%s(z)" % name).root
        assert isinstance(node, Func) and node.name == name


def test_fatou_shorthand_desugars():
    f = parse("fatou(z)")
    assert isinstance(f.root, Add)
    assert evaluate(f, 0j) == pytest.approx(2.0)  # 0 + 1 + exp(0)
    direct = evaluate(parse("z + 1 + exp(-z)"), 1.5 + 0.5j)
    assert evaluate(f, 1.5 + 0.5j) == pytest.approx(direct)


def test_series_and_product_forms():
    assert isinstance(parse("lacunary(2)").root, LacunarySeries)
    prod = parse("canprod(4)").root
    assert isinstance(prod, CanonicalProduct) and prod.power == 4
    with pytest.raises(ParseError):
        parse("lacunary(1)")
    with pytest.raises(ParseError):
        parse("canprod(1)")


def test_parse_error_offsets():
    with pytest.raises(ParseError) as info:
        parse("z +")
    assert info.value.offset == 3
    with pytest.raises(ParseError) as info:
        parse("z + $")
    assert info.value.offset == 4
    with pytest.raises(ParseError) as info:
        parse("qux(z)")
    assert info.value.offset == 0
    with pytest.raises(ParseError):
        parse("")
    with pytest.raises(ParseError):
        parse("(z + 1")


def test_round_trip_through_to_string():
    for src in ("z^2 + 1", "1/(z*(z-1)*(z-2))", "exp(-z) + z + 1", "tan(z)"):
        node = parse(src)
        again = parse(to_string(node.root))
        for probe in (0.3 + 0.4j, -1.2 + 0.1j, 2.0 + 0j):
            a = evaluate(node, probe)
            b = evaluate(again, probe)
            if isinstance(a, complex) and isinstance(b, complex):
                assert a == pytest.approx(b)
            else:
                assert a is b  # same sentinel


def test_whitespace_insensitive():
    assert evaluate(parse(" z \t+ 1 "), 2 + 3j) == evaluate(parse("z+1"), 2 + 3j)
