"""Expression mini-language for algebra elements.

    expr  := term (('+' | '-') term)*
    term  := unary ('*' unary)*
    unary := '-'? atom
    atom  := number | 'i' | GEN ('^' INT)? | '(' expr ')'

INT may carry a sign. Products fold left with the twisted product.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import AlgebraElement
from .errors import ValidationError
from .forms import GeometrySpace


class ExprError(ValidationError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ExprSyntaxError(ExprError):
    pass


class UnknownGeneratorError(ExprError):
    pass


class ZeroExponentError(ExprError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class ImagUnit:
    pass


@dataclass(frozen=True)
class Gen:
    index: int
    name: str
    exponent: int = 1


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: object
    right: object


@dataclass(frozen=True)
class Group:
    inner: object


class _Parser:
    def __init__(self, src: str, generators):
        self.src = src
        self.pos = 0
        self.gens = {g: i for i, g in enumerate(generators)}

    def _skip(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def _fail(self, msg, cls=ExprSyntaxError, pos=None):
        raise cls(msg, self.pos if pos is None else pos)

    def parse(self):
        if not self.src.strip():
            self._fail("empty expression")
        node = self.expr()
        if self._peek():
            self._fail(f"unexpected {self._peek()!r}")
        return node

    def expr(self):
        node = self.term()
        while self._peek() in ("+", "-"):
            op = self.src[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self._peek() == "*":
            self.pos += 1
            node = BinOp("*", node, self.unary())
        return node

    def unary(self):
        if self._peek() == "-":
            self.pos += 1
            return Neg(self.atom())
        return self.atom()

    def atom(self):
        c = self._peek()
        if not c:
            self._fail("unexpected end of input")
        if c.isdigit() or c == ".":
            return self._number()
        if c == "(":
            self.pos += 1
            inner = self.expr()
            if self._peek() != ")":
                self._fail("expected ')'")
            self.pos += 1
            return Group(inner)
        if c.isalpha() or c == "_":
            start = self.pos
            while self.pos < len(self.src) and (self.src[self.pos].isalnum() or self.src[self.pos] == "_"):
                self.pos += 1
            name = self.src[start:self.pos]
            if name == "i":
                return ImagUnit()
            if name not in self.gens:
                self._fail(f"unknown generator {name!r}", UnknownGeneratorError, start)
            exponent = 1
            if self._peek() == "^":
                self.pos += 1
                self._skip()
                exp_pos = self.pos
                exponent = self._int()
                if exponent == 0:
                    self._fail("zero exponent", ZeroExponentError, exp_pos)
            return Gen(self.gens[name], name, exponent)
        self._fail(f"unexpected {c!r}")

    def _number(self):
        start = self.pos
        s = self.src
        while self.pos < len(s) and s[self.pos].isdigit():
            self.pos += 1
        if self.pos < len(s) and s[self.pos] == ".":
            self.pos += 1
            while self.pos < len(s) and s[self.pos].isdigit():
                self.pos += 1
        text = s[start:self.pos]
        if text == ".":
            self._fail("malformed number", pos=start)
        return Num(float(text))

    def _int(self):
        sign = 1
        if self._peek() in ("+", "-"):
            sign = -1 if self.src[self.pos] == "-" else 1
            self.pos += 1
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self._fail("expected integer exponent")
        return sign * int(self.src[start:self.pos])


def parse_expr(src: str, space: GeometrySpace):
    """Parse ``src`` against the generator names of ``space``."""
    return _Parser(src, space.generators).parse()


def eval_expr(node, space: GeometrySpace) -> AlgebraElement:
    if isinstance(node, Num):
        return space.scalar(node.value)
    if isinstance(node, ImagUnit):
        return space.scalar(1j)
    if isinstance(node, Gen):
        mode = [0] * space.n
        mode[node.index] = node.exponent
        return AlgebraElement.monomial(space.theta, tuple(mode))
    if isinstance(node, Group):
        return eval_expr(node.inner, space)
    if isinstance(node, Neg):
        return -eval_expr(node.operand, space)
    left = eval_expr(node.left, space)
    right = eval_expr(node.right, space)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    return left * right


def parse_element(src: str, space: GeometrySpace) -> AlgebraElement:
    return eval_expr(parse_expr(src, space), space)
