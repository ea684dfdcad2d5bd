"""A small expression language for quasi-modular forms.

Grammar (highest binding first)::

    atom    := INT | NAME | FUNC '(' args ')' | 'D' '^' INT '(' expr ')' | '(' expr ')'
    power   := atom ['^' ['-'] INT]
    unary   := '-' unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

Names: E2, E4, E6, Delta, j.  Functions: D, theta, rc(f, g, n), src(f, g, n).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InvalidWeightError, ParseError
from .forms import DELTA, E2, E4, E6, QuasiForm, const, d_power, serre

__all__ = ["Num", "Name", "Neg", "BinOp", "Pow", "Call", "parse", "to_source", "elaborate", "parse_form"]

NAMES = ("E2", "E4", "E6", "Delta", "j")
FUNCS = {"D": 1, "theta": 1, "rc": 3, "src": 3}


@dataclass(frozen=True)
class Num:
    value: int
    pos: int = 0

    def __eq__(self, other):
        return isinstance(other, Num) and self.value == other.value

    def __hash__(self):
        return hash(("num", self.value))


@dataclass(frozen=True)
class Name:
    name: str
    pos: int = 0

    def __eq__(self, other):
        return isinstance(other, Name) and self.name == other.name

    def __hash__(self):
        return hash(("name", self.name))


@dataclass(frozen=True)
class Neg:
    arg: object
    pos: int = 0

    def __eq__(self, other):
        return isinstance(other, Neg) and self.arg == other.arg

    def __hash__(self):
        return hash(("neg", self.arg))


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = 0

    def __eq__(self, other):
        return (isinstance(other, BinOp) and self.op == other.op
                and self.left == other.left and self.right == other.right)

    def __hash__(self):
        return hash((self.op, self.left, self.right))


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int
    pos: int = 0

    def __eq__(self, other):
        return isinstance(other, Pow) and self.base == other.base and self.exp == other.exp

    def __hash__(self):
        return hash(("pow", self.base, self.exp))


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    order: int = 1  # the n in D^n
    pos: int = 0

    def __eq__(self, other):
        return (isinstance(other, Call) and self.func == other.func
                and self.args == other.args and self.order == other.order)

    def __hash__(self):
        return hash((self.func, self.args, self.order))


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1):
            toks.append(("int", m.group(1), start))
        elif m.group(2):
            toks.append(("name", m.group(2), start))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*/^(),":
                raise ParseError(f"unexpected character {ch!r}", start)
            toks.append(("op", ch, start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        t = self.take()
        if t[1] != value:
            raise ParseError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2])
        return t

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()
            node = BinOp(op[1], node, self.term(), op[2])
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()
            node = BinOp(op[1], node, self.unary(), op[2])
        return node

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.take()
            return Neg(self.unary(), t[2])
        return self.power()

    def _int_exponent(self):
        sign = 1
        t = self.peek()
        if t[1] == "-":
            self.take()
            sign = -1
        t = self.take()
        if t[0] != "int":
            raise ParseError("exponent must be an integer", t[2])
        return sign * int(t[1])

    def power(self):
        node = self.atom()
        if self.peek()[1] == "^":
            t = self.take()
            node = Pow(node, self._int_exponent(), t[2])
        return node

    def atom(self):
        t = self.take()
        kind, val, pos = t
        if kind == "int":
            return Num(int(val), pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if val == "D" and self.peek()[1] == "^":
                self.take()
                n = self._int_exponent()
                if n < 0:
                    raise ParseError("derivative order must be nonnegative", pos)
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call("D", (arg,), n, pos)
            if val in FUNCS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCS[val]:
                    raise ParseError(f"{val} takes {FUNCS[val]} argument(s)", pos)
                if FUNCS[val] == 3:
                    n = args[2]
                    if not isinstance(n, Num):
                        raise ParseError("bracket index must be an integer literal", pos)
                return Call(val, tuple(args), 1, pos)
            if val in NAMES:
                return Name(val, pos)
            raise ParseError(f"unknown name {val!r}", pos)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str):
    p = _Parser(text)
    node = p.expr()
    t = p.peek()
    if t[0] != "end":
        raise ParseError(f"unexpected {t[1]!r}", t[2])
    return node


# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_source(node, parent: int = 0) -> str:
    """Canonical text that parses back to the same tree."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Pow):
        base = to_source(node.base, 4)
        if isinstance(node.base, (BinOp, Neg, Pow)):
            base = f"({to_source(node.base)})"
        return f"{base}^{node.exp}"
    if isinstance(node, Neg):
        s = "-" + to_source(node.arg, 3)
        return f"({s})" if parent > 3 else s
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_source(node.left, p)
        # left-associative: the right operand needs parentheses at equal precedence
        right = to_source(node.right, p + 1)
        s = f"{left} {node.op} {right}" if p == 1 else f"{left}{node.op}{right}"
        return f"({s})" if parent > p else s
    if isinstance(node, Call):
        if node.func == "D" and node.order != 1:
            return f"D^{node.order}({to_source(node.args[0])})"
        return f"{node.func}(" + ", ".join(to_source(a) for a in node.args) + ")"
    raise TypeError(node)


def elaborate(node) -> QuasiForm:
    """Turn a syntax tree into a QuasiForm of a single weight."""
    from .brackets import rc_bracket, rc_bracket_quasi, serre_rc_bracket
    if isinstance(node, Num):
        return const(node.value)
    if isinstance(node, Name):
        return {"E2": E2, "E4": E4, "E6": E6, "Delta": DELTA}.get(node.name) or E4 ** 3 / DELTA
    if isinstance(node, Neg):
        return -elaborate(node.arg)
    if isinstance(node, Pow):
        return elaborate(node.base) ** node.exp
    if isinstance(node, BinOp):
        a, b = elaborate(node.left), elaborate(node.right)
        try:
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
        except InvalidWeightError as exc:
            raise InvalidWeightError(f"{exc} (at position {node.pos})") from None
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Call):
        args = [elaborate(a) for a in node.args[:2]]
        if node.func == "D":
            return d_power(args[0], node.order)
        if node.func == "theta":
            return serre(args[0])
        n = node.args[2].value
        f, g = args
        if node.func == "rc":
            if f.depth == 0 and g.depth == 0:
                return rc_bracket(f, g, n)
            return rc_bracket_quasi(f, g, n)
        return serre_rc_bracket(f, g, n)
    raise TypeError(node)


def parse_form(text: str) -> QuasiForm:
    return elaborate(parse(text))
