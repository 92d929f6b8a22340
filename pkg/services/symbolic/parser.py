"""
Text grammar for coefficient functions.

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := ("-" | "+") unary | power
    power    := atom ("^" exponent)?
    exponent := ["-"] INT | "(" ["-"] INT ")"
    atom     := NUMBER | "x" | NAME | "exp" "(" expr ")" | "(" expr ")"

NUMBER accepts integers, decimals and scientific notation; every number is read
as an exact rational. NAME must be a bound parameter.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Union

from services.symbolic.expression import (
    X,
    Const,
    Expression,
    add,
    div,
    exp,
    mul,
    neg,
    power,
    sub,
)

ParameterValue = Union[int, float, Fraction, str]


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, *, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", text=text, position=pos)
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind=kind, text=m.group(), position=pos))
        pos = m.end()
    tokens.append(_Token(kind="end", text="", position=len(text)))
    return tokens


def _to_fraction(value: ParameterValue) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


class _Parser:
    def __init__(self, text: str, parameters: Mapping[str, Fraction]):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0
        self.parameters = parameters

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        tok = self.current
        self.index += 1
        return tok

    def _error(self, message: str, token: Optional[_Token] = None) -> ExpressionSyntaxError:
        tok = token or self.current
        return ExpressionSyntaxError(message, text=self.text, position=tok.position)

    def _expect(self, op: str) -> _Token:
        tok = self.current
        if tok.kind != "op" or tok.text != op:
            found = tok.text or "end of input"
            raise self._error(f"expected {op!r}, found {found!r}")
        return self._advance()

    def _at_op(self, *ops: str) -> bool:
        return self.current.kind == "op" and self.current.text in ops

    def parse(self) -> Expression:
        if self.current.kind == "end":
            raise self._error("empty expression")
        e = self._expr()
        if self.current.kind != "end":
            raise self._error(f"unexpected token {self.current.text!r}")
        return e

    def _expr(self) -> Expression:
        left = self._term()
        while self._at_op("+", "-"):
            op = self._advance().text
            right = self._term()
            left = add(left, right) if op == "+" else sub(left, right)
        return left

    def _term(self) -> Expression:
        left = self._unary()
        while self._at_op("*", "/"):
            op = self._advance().text
            right = self._unary()
            left = mul(left, right) if op == "*" else div(left, right)
        return left

    def _unary(self) -> Expression:
        if self._at_op("-"):
            self._advance()
            return neg(self._unary())
        if self._at_op("+"):
            self._advance()
            return self._unary()
        return self._power()

    def _power(self) -> Expression:
        base = self._atom()
        if self._at_op("^"):
            self._advance()
            n = self._exponent()
            if self._at_op("^"):
                raise self._error("chained exponents must be parenthesised")
            return power(base, n)
        return base

    def _exponent(self) -> int:
        start = self.current
        parenthesised = self._at_op("(")
        if parenthesised:
            self._advance()
        sign = 1
        if self._at_op("-"):
            self._advance()
            sign = -1
        tok = self.current
        if tok.kind != "number" or not tok.text.isdigit():
            raise self._error("non-integer exponent", start)
        self._advance()
        if parenthesised and not self._at_op(")"):
            raise self._error("non-integer exponent", start)
        if parenthesised:
            self._advance()
        return sign * int(tok.text)

    def _atom(self) -> Expression:
        tok = self.current
        if tok.kind == "number":
            self._advance()
            return Const(Fraction(tok.text))
        if tok.kind == "name":
            self._advance()
            if tok.text == "x":
                return X
            if tok.text == "exp":
                self._expect("(")
                inner = self._expr()
                self._expect(")")
                return exp(inner)
            if tok.text in self.parameters:
                return Const(self.parameters[tok.text])
            raise self._error(f"unknown identifier {tok.text!r}", tok)
        if self._at_op("("):
            self._advance()
            inner = self._expr()
            self._expect(")")
            return inner
        found = tok.text or "end of input"
        raise self._error(f"unexpected {found!r}")


def parse(text: str, parameters: Optional[Mapping[str, ParameterValue]] = None) -> Expression:
    """Parse `text` into an Expression; `parameters` binds extra names to exact values."""
    bound: Dict[str, Fraction] = {}
    for name, value in (parameters or {}).items():
        if name in ("x", "exp"):
            raise ValueError(f"parameter name {name!r} is reserved")
        bound[name] = _to_fraction(value)
    return _Parser(text, bound).parse()
