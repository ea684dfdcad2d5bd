import pytest
from hypothesis import given, settings, strategies as st

from qmforms.errors import InvalidWeightError, ParseError
from qmforms.forms import DELTA, E2, E4, E6, d, d_power, serre
from qmforms.brackets import rc_bracket
from qmforms.parser import BinOp, Call, Name, Neg, Num, Pow, parse, parse_form, to_source


def test_j_invariant():
    j = parse_form("E4^3/Delta")
    assert j.weight == 0 and j.depth == 0
    assert parse_form("j") == j


def test_derivative_of_e2():
    f = parse_form("D(E2)")
    assert f.weight == 4 and f.depth == 2
    assert f == d(E2)


def test_weight_mismatch():
    with pytest.raises(InvalidWeightError) as info:
        parse_form("E4 + E6")
    assert "position 3" in str(info.value)


@pytest.mark.parametrize("text,expected", [
    ("1/Delta", 1 / DELTA),
    ("Delta^-1", 1 / DELTA),
    ("-E4^2", -(E4 ** 2)),
    ("E4*E6 - 2*E4*E6", -(E4 * E6)),
    ("D^3(1/Delta)", d_power(1 / DELTA, 3)),
    ("D^0(E4)", E4),
    ("theta(E4)", serre(E4)),
    ("rc(E4, E6, 1)", rc_bracket(E4, E6, 1)),
    ("(E2^2 - E4)/12", d(E2)),
    ("E4^3 - E6^2", DELTA * 1728),
])
def test_examples(text, expected):
    assert parse_form(text) == expected


def test_precedence():
    assert parse("-E4^2") == Neg(Pow(Name("E4"), 2))
    assert parse("E4*E6/Delta") == BinOp("/", BinOp("*", Name("E4"), Name("E6")), Name("Delta"))
    assert parse("1 - 2 - 3") == BinOp("-", BinOp("-", Num(1), Num(2)), Num(3))
    assert parse("1 + 2*3") == BinOp("+", Num(1), BinOp("*", Num(2), Num(3)))


@pytest.mark.parametrize("text,pos", [
    ("E4 + ", 5),
    ("E4 $ E6", 3),
    ("E5", 0),
    ("D(E4", 4),
    ("rc(E4, E6)", 0),
    ("rc(E4, E6, E4)", 0),
    ("E4^E6", 3),
    ("E4 E6", 3),
    ("D^-1(E4)", 0),
])
def test_errors_carry_positions(text, pos):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.position == pos


# ---------------------------------------------------------------------------
# round trip on generated trees

leaves = st.one_of(st.integers(0, 50).map(Num), st.sampled_from(["E2", "E4", "E6", "Delta", "j"]).map(Name))


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(children, st.integers(-4, 4)).map(lambda t: Pow(*t)),
        st.tuples(children, st.integers(0, 3)).map(lambda t: Call("D", (t[0],), t[1])),
        children.map(lambda c: Call("theta", (c,))),
        st.tuples(st.sampled_from(["rc", "src"]), children, children, st.integers(0, 5))
          .map(lambda t: Call(t[0], (t[1], t[2], Num(t[3])))),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_round_trip(tree):
    text = to_source(tree)
    assert parse(text) == tree
    assert to_source(parse(text)) == text
