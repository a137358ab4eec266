"""Tokenizer, recursive-descent parser, and printer for expressions.

Grammar (lowest precedence first)::

    expr  := or
    or    := and ("or" and)*
    and   := not ("and" not)*
    not   := "not" not | cmp
    cmp   := add (("=="|"!="|"<"|"<="|">"|">=") add)?     -- non-associative
    add   := mul (("+"|"-") mul)*
    mul   := unary (("*"|"/") unary)*
    unary := "-" unary | atom
    atom  := INTEGER | DECIMAL | STRING | "true" | "false" | IDENT | "(" expr ")"

Strings are double-quoted with ``\\"`` and ``\\\\`` escapes.  Syntax errors
carry the byte offset of the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from flowd.errors import ExpressionSyntaxError
from flowd.expr.nodes import (
    ADD_OPS,
    CMP_OPS,
    MUL_OPS,
    AttrRef,
    Binary,
    Expression,
    Literal,
    Unary,
)
from flowd.values import INT64_MAX, INT64_MIN

_KEYWORDS = ("and", "or", "not", "true", "false")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")
_PUNCT = ("==", "!=", "<=", ">=", "<", ">", "+", "-", "*", "/", "(", ")")


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "string" | "ident" | "punct" | "end"
    text: str
    value: object
    offset: int


def tokenize(source: str) -> list[Token]:
    # Error offsets are byte offsets into the utf-8 form of the source.
    byte_at = [0]
    for ch in source:
        byte_at.append(byte_at[-1] + len(ch.encode("utf-8")))

    tokens: list[Token] = []
    i = 0
    while i < len(source):
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == '"':
            value, end = _scan_string(source, i, byte_at)
            tokens.append(Token("string", source[i:end], value, byte_at[i]))
            i = end
            continue
        if ch.isdigit():
            match = _NUMBER_RE.match(source, i)
            text = match.group(0)
            if match.group(1) or match.group(2):
                value: object = float(text)
            else:
                value = int(text)
                if not INT64_MIN <= value <= INT64_MAX:
                    raise ExpressionSyntaxError(
                        "integer literal out of 64-bit range", byte_at[i]
                    )
            tokens.append(Token("number", text, value, byte_at[i]))
            i = match.end()
            continue
        if _IDENT_RE.match(source, i):
            match = _IDENT_RE.match(source, i)
            text = match.group(0)
            tokens.append(Token("ident", text, text, byte_at[i]))
            i = match.end()
            continue
        for punct in _PUNCT:
            if source.startswith(punct, i):
                tokens.append(Token("punct", punct, punct, byte_at[i]))
                i += len(punct)
                break
        else:
            raise ExpressionSyntaxError(f"unexpected character {ch!r}", byte_at[i])
    tokens.append(Token("end", "", None, byte_at[len(source)]))
    return tokens


def _scan_string(source: str, start: int, byte_at: list[int]) -> tuple[str, int]:
    out: list[str] = []
    i = start + 1
    while i < len(source):
        ch = source[i]
        if ch == "\\":
            if i + 1 >= len(source):
                break
            esc = source[i + 1]
            if esc not in ('"', "\\"):
                raise ExpressionSyntaxError(f"bad escape \\{esc}", byte_at[i])
            out.append(esc)
            i += 2
            continue
        if ch == '"':
            return "".join(out), i + 1
        out.append(ch)
        i += 1
    raise ExpressionSyntaxError("unterminated string literal", byte_at[start])


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_punct(self, text: str) -> None:
        token = self.peek()
        if token.kind != "punct" or token.text != text:
            raise ExpressionSyntaxError(f"expected {text!r}", token.offset)
        self.advance()

    def at_keyword(self, word: str) -> bool:
        token = self.peek()
        return token.kind == "ident" and token.text == word

    def at_punct(self, *texts: str) -> bool:
        token = self.peek()
        return token.kind == "punct" and token.text in texts

    # Productions, lowest precedence first.

    def parse_expr(self) -> Expression:
        return self.parse_or()

    def parse_or(self) -> Expression:
        node = self.parse_and()
        while self.at_keyword("or"):
            self.advance()
            node = Binary("or", node, self.parse_and())
        return node

    def parse_and(self) -> Expression:
        node = self.parse_not()
        while self.at_keyword("and"):
            self.advance()
            node = Binary("and", node, self.parse_not())
        return node

    def parse_not(self) -> Expression:
        if self.at_keyword("not"):
            self.advance()
            return Unary("not", self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self) -> Expression:
        node = self.parse_add()
        if self.at_punct(*CMP_OPS):
            op = self.advance().text
            node = Binary(op, node, self.parse_add())
            if self.at_punct(*CMP_OPS):
                raise ExpressionSyntaxError(
                    "comparisons are non-associative", self.peek().offset
                )
        return node

    def parse_add(self) -> Expression:
        node = self.parse_mul()
        while self.at_punct(*ADD_OPS):
            op = self.advance().text
            node = Binary(op, node, self.parse_mul())
        return node

    def parse_mul(self) -> Expression:
        node = self.parse_unary()
        while self.at_punct(*MUL_OPS):
            op = self.advance().text
            node = Binary(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Expression:
        if self.at_punct("-"):
            self.advance()
            return Unary("neg", self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Expression:
        token = self.peek()
        if token.kind == "number":
            self.advance()
            return Literal(token.value)
        if token.kind == "string":
            self.advance()
            return Literal(token.value)
        if token.kind == "ident":
            if token.text == "true":
                self.advance()
                return Literal(True)
            if token.text == "false":
                self.advance()
                return Literal(False)
            if token.text in _KEYWORDS:
                raise ExpressionSyntaxError(
                    f"unexpected keyword {token.text!r}", token.offset
                )
            self.advance()
            return AttrRef(token.text)
        if token.kind == "punct" and token.text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect_punct(")")
            return node
        raise ExpressionSyntaxError(
            f"unexpected token {token.text!r}" if token.text else "unexpected end of input",
            token.offset,
        )


def parse_expression(source: str) -> Expression:
    parser = _Parser(tokenize(source))
    node = parser.parse_expr()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ExpressionSyntaxError(
            f"unexpected token {trailing.text!r}", trailing.offset
        )
    return node


# Printer.  Precedence levels mirror the grammar; a child is parenthesized
# when its level is looser than (or, for non-associative comparisons and the
# right side of - / /, equal to) what its position requires.

_LEVEL = {"or": 1, "and": 2, "not": 3}
_LEVEL.update({op: 4 for op in CMP_OPS})
_LEVEL.update({op: 5 for op in ADD_OPS})
_LEVEL.update({op: 6 for op in MUL_OPS})
_LEVEL["neg"] = 7
_ATOM_LEVEL = 8


def _level(node: Expression) -> int:
    if isinstance(node, Binary):
        return _LEVEL[node.op]
    if isinstance(node, Unary):
        return _LEVEL["not"] if node.op == "not" else _LEVEL["neg"]
    return _ATOM_LEVEL


def to_source(node: Expression) -> str:
    """Render an AST to source that parses back to an equal AST."""
    if isinstance(node, Literal):
        value = node.value
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, str):
            escaped = value.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        if isinstance(value, float):
            text = repr(value)
            return text if ("." in text or "e" in text or "E" in text) else text + ".0"
        return str(value)
    if isinstance(node, AttrRef):
        return node.path
    if isinstance(node, Unary):
        level = _level(node)
        inner = to_source(node.operand)
        if _level(node.operand) < level:
            inner = f"({inner})"
        return f"not {inner}" if node.op == "not" else f"-{inner}"
    if isinstance(node, Binary):
        level = _level(node)
        left, right = to_source(node.left), to_source(node.right)
        if _level(node.left) < level or (node.op in CMP_OPS and _level(node.left) == level):
            left = f"({left})"
        # Right operands bind one level tighter except for the associative
        # and/or chains, which re-parse identically when left-nested.
        right_min = level if node.op in ("and", "or") else level + 1
        if _level(node.right) < right_min:
            right = f"({right})"
        if node.op in ("and", "or") and _level(node.right) == level:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")
