"""Recursive-descent parser for the equation DSL.

Grammar::

    equation := expr "=" expr
    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | factor
    factor   := base ("^" exponent)?
    exponent := signed_rational | "(" signed_rational ")"
    base     := variable | number | ident | call | "(" expr ")"

Numbers (including decimals such as ``0.25`` and ``1e-3``) are read exactly as
fractions. Identifiers resolve from a caller-supplied constant table. The parser
produces a small tuple AST which the evaluators below fold into a power sum, a
pedal equation, or (in :mod:`pedalcurve.chain`) a derivative-chain polynomial.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from .errors import ExprSyntaxError, NonIntegerExponent, NonNumericExponent, NotReducibleToQ
from .expr import PedalEquation, PowerSum, PRSum, coerce

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()=,|]))"
)


def tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, "number, name or operator")
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class Parser:
    """Builds an AST of nested tuples.

    Node kinds: ("num", Fraction), ("var", name), ("const", name, value),
    ("neg", x), ("add"|"sub"|"mul"|"div", a, b), ("pow", base, Fraction),
    ("call", name, arg).
    """

    def __init__(self, text: str, variables=("r", "p"), constants: Mapping | None = None,
                 functions=()):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = set(variables)
        self.constants = dict(constants or {})
        self.functions = set(functions)

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.next()
        if tok[1] != value:
            raise ExprSyntaxError(f"unexpected {tok[1] or 'end of input'!r}", tok[2], repr(value))
        return tok

    def parse_equation(self):
        lhs = self.expr()
        self.expect("=")
        rhs = self.expr()
        self.finish()
        return lhs, rhs

    def parse_expression(self):
        node = self.expr()
        self.finish()
        return node

    def finish(self):
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected {tok[1]!r}", tok[2], "end of input")

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            node = ("mul" if op == "*" else "div", node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.next()
            return ("neg", self.unary())
        if self.peek()[1] == "+":
            self.next()
            return self.unary()
        return self.factor()

    def factor(self):
        base = self.base()
        if self.peek()[1] == "^":
            self.next()
            base = ("pow", base, self.exponent())
        return base

    def exponent(self) -> Fraction:
        tok = self.peek()
        if tok[1] == "(":
            self.next()
            value = self.signed_rational(paren=True)
            self.expect(")")
            return value
        return self.signed_rational()

    def signed_rational(self, paren: bool = False) -> Fraction:
        sign = 1
        if self.peek()[1] == "-":
            self.next()
            sign = -1
        tok = self.next()
        if tok[0] == "id":
            raise NonNumericExponent(f"exponent {tok[1]!r} is not a rational literal")
        if tok[0] != "num":
            raise ExprSyntaxError(f"unexpected {tok[1] or 'end of input'!r}", tok[2], "rational exponent")
        value = Fraction(tok[1])
        # a fraction is an exponent only inside parentheses: r^(1/2); r^2/4 is (r^2)/4
        if paren and self.peek()[1] == "/":
            self.next()
            den = self.next()
            if den[0] != "num":
                raise ExprSyntaxError(f"unexpected {den[1] or 'end of input'!r}", den[2], "rational exponent")
            value = value / Fraction(den[1])
        return sign * value

    def base(self):
        tok = self.next()
        kind, val, pos = tok
        if kind == "num":
            return ("num", Fraction(val))
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if val == "|":
            node = self.expr()
            self.expect("|")
            return ("call", "abs", node)
        if kind == "id":
            if self.peek()[1] == "(" and val in self.functions:
                self.next()
                arg = self.expr()
                self.expect(")")
                return ("call", val, arg)
            if val in self.variables:
                return ("var", val)
            if val in self.constants:
                return ("const", val, coerce(self.constants[val]))
            raise ExprSyntaxError(f"unknown identifier {val!r}", pos, "a bound constant or variable")
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", pos, "operand")


# ------------------------------------------------------------------ evaluators

class RationalPR:
    """Quotient of two PRSums; monomial denominators are folded into the numerator."""

    __slots__ = ("num", "den")

    def __init__(self, num: PRSum, den: PRSum | None = None):
        den = den if den is not None else PRSum.const(1)
        if den.is_zero():
            raise ZeroDivisionError("division by zero expression")
        if den.is_monomial():
            num = num * den ** -1
            den = PRSum.const(1)
        self.num, self.den = num, den

    def __add__(self, o):
        if self.den == o.den:
            return RationalPR(self.num + o.num, self.den)
        return RationalPR(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self):
        return RationalPR(-self.num, self.den)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        return RationalPR(self.num * o.num, self.den * o.den)

    def __truediv__(self, o):
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero expression")
        return RationalPR(self.num * o.den, self.den * o.num)

    def power(self, e: Fraction):
        if e.denominator == 1:
            n = e.numerator
            if n >= 0:
                return RationalPR(self.num ** n, self.den ** n)
            return RationalPR(self.den ** -n, self.num ** -n)
        if self.den == PRSum.const(1) and self.num.is_monomial():
            return RationalPR(self.num ** e)
        raise NonIntegerExponent(f"non-integer power {e} of a sum")


def eval_pr(node, var_keys: Mapping[str, tuple]) -> RationalPR:
    kind = node[0]
    if kind == "num":
        return RationalPR(PRSum.const(node[1]))
    if kind == "const":
        return RationalPR(PRSum.const(node[2]))
    if kind == "var":
        return RationalPR(PRSum({var_keys[node[1]]: 1}))
    if kind == "neg":
        return -eval_pr(node[1], var_keys)
    if kind == "pow":
        return eval_pr(node[1], var_keys).power(node[2])
    if kind == "call":
        raise ExprSyntaxError(f"function {node[1]!r} not allowed here")
    a, b = eval_pr(node[1], var_keys), eval_pr(node[2], var_keys)
    return {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__, "div": a.__truediv__}[kind](b)


def parse_power_sum(text: str, constants: Mapping | None = None, var: str = "r") -> PowerSum:
    """Parse a sum of powers of one variable (``r`` by default, ``s`` for potentials)."""
    node = Parser(text, variables=(var,), constants=constants).parse_expression()
    value = eval_pr(node, {var: (0, 1)})
    if value.den != PRSum.const(1):
        raise ExprSyntaxError("division by a sum is not a power sum")
    return PowerSum({e: k for (_, e), k in value.num.items()})


def parse_pr_equation(text: str, constants: Mapping | None = None) -> PRSum:
    """Parse ``lhs = rhs`` in p and r, returning lhs - rhs with denominators cleared."""
    lhs, rhs = Parser(text, variables=("r", "p"), constants=constants).parse_equation()
    keys = {"p": (1, 0), "r": (0, 1)}
    a, b = eval_pr(lhs, keys), eval_pr(rhs, keys)
    diff = a.num * b.den - b.num * a.den
    if diff.is_zero():
        raise NotReducibleToQ("equation is an identity")
    return diff


def parse_pedal_equation(text: str, constants: Mapping | None = None) -> PedalEquation:
    """Parse ``lhs = rhs`` in p and r into canonical q-form."""
    return parse_pr_equation(text, constants).to_pedal()
