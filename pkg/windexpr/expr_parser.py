"""
Recursive-descent parser for wind component expressions.

Grammar (whitespace insignificant)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?          # right associative
    atom  := NUMBER | "x" | "y" | "pi" | FUNC "(" expr ")" | "(" expr ")"
"""

import math
import re
from dataclasses import dataclass
from typing import FrozenSet, List

from .expr_types import (
    CONSTANTS,
    FUNCTIONS,
    VARIABLES,
    Binary,
    Call,
    Const,
    Expr,
    ExprSyntaxError,
    Num,
    Unary,
    UnknownIdentifierError,
    Var,
)

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)
_TRAILING_SPACE = re.compile(r"\s*\Z")

_ATOM_START = frozenset({"<number>", "<identifier>", "(", "-"})
_AFTER_OPERAND = frozenset({"+", "-", "*", "/", "^"})


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(src: str) -> List[Token]:
    """Split the source into tokens carrying UTF-8 byte offsets"""
    tokens = []
    pos = 0
    while not _TRAILING_SPACE.match(src, pos):
        match = _TOKEN.match(src, pos)
        if match is None or match.end() == pos:
            start = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(
                f"unexpected character {src[start]!r}", _byte_offset(src, start), _ATOM_START | _AFTER_OPERAND
            )
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), _byte_offset(src, start)))
        pos = match.end()
    tokens.append(Token("end", "", _byte_offset(src, len(src))))
    return tokens


def _byte_offset(src: str, index: int) -> int:
    return len(src[:index].encode("utf-8"))


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def fail(self, message: str, expected: FrozenSet[str]):
        token = self.peek()
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ExprSyntaxError(f"{message}, found {found}", token.offset, expected)

    def expect(self, text: str, also: FrozenSet[str] = frozenset()):
        token = self.peek()
        if token.kind == "op" and token.text == text:
            return self.advance()
        self.fail(f"expected {text!r}", frozenset({text}) | also)

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            token = self.advance()
            left = Binary(token.text, left, self.parse_term(), token.offset)
        return left

    def parse_term(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            token = self.advance()
            left = Binary(token.text, left, self.parse_unary(), token.offset)
        return left

    def parse_unary(self) -> Expr:
        token = self.peek()
        if token.kind == "op" and token.text == "-":
            self.advance()
            return Unary("-", self.parse_unary(), token.offset)
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        token = self.peek()
        if token.kind == "op" and token.text == "^":
            self.advance()
            return Binary("^", base, self.parse_unary(), token.offset)
        return base

    def parse_atom(self) -> Expr:
        token = self.peek()
        if token.kind == "number":
            self.advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise ExprSyntaxError("numeric literal out of range", token.offset, _ATOM_START)
            return Num(value, token.offset)
        if token.kind == "ident":
            self.advance()
            name = token.text
            if name in VARIABLES:
                return Var(name, token.offset)
            if name in CONSTANTS:
                return Const(name, token.offset)
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.parse_expr()
                self.expect(")", _AFTER_OPERAND)
                return Call(name, arg, token.offset)
            raise UnknownIdentifierError(name, token.offset)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")", _AFTER_OPERAND)
            return inner
        self.fail("expected an operand", _ATOM_START)


def parse(src: str) -> Expr:
    """
    Parse an arithmetic expression in x and y

    Args:
        src: Expression text, e.g. "cos(2*x - y - 6)"

    Returns:
        The expression tree

    Raises:
        ExprSyntaxError: malformed text, with byte offset and expected tokens
        UnknownIdentifierError: identifier outside x, y, pi and the function set
    """
    parser = _Parser(tokenize(src))
    tree = parser.parse_expr()
    if parser.peek().kind != "end":
        parser.fail("unexpected trailing input", _AFTER_OPERAND | {"<end>"})
    return tree


def render(e: Expr) -> str:
    """Render a tree as fully parenthesised text that parses back to the same tree"""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Unary):
        return f"(-{render(e.operand)})"
    if isinstance(e, Binary):
        return f"({render(e.left)} {e.op} {render(e.right)})"
    if isinstance(e, Call):
        return f"{e.func}({render(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")
