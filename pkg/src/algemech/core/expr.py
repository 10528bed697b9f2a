"""Scalar expression DSL.

Grammar (``^`` binds tightest and is right-associative, then unary minus,
then ``*`` ``/``, then ``+`` ``-``)::

    expr    := expr ('+' | '-') expr | expr ('*' | '/') expr
             | '-' expr | expr '^' expr
             | NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := sin | cos | exp | log | sqrt
    NAME    := x1..xn | y1..ym | xi1..xim   (as declared for the field)

Expressions evaluate on floats or on the jets of :mod:`algemech.core.jet`,
so the same tree yields values and exact derivatives.
"""

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Union

from algemech.core import jet
from algemech.core.jet import Scalar
from algemech.exceptions import DomainError, ExprSyntaxError, UnknownIdentifierError


class FieldDomain(str, Enum):
    """Where a scalar field lives: the base M, the bundle E, or its dual E*."""

    BASE = "base"
    E = "E"
    ESTAR = "Estar"


@lru_cache(maxsize=256)
def variable_names(domain: FieldDomain, n: int, m: int) -> tuple[str, ...]:
    """Ordered variable names for a field on ``domain``.

    Base coordinates come first, then fiber coordinates.
    """
    base = tuple(f"x{i + 1}" for i in range(n))
    if domain == FieldDomain.BASE:
        return base
    prefix = "y" if domain == FieldDomain.E else "xi"
    return base + tuple(f"{prefix}{a + 1}" for a in range(m))


# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS: dict[str, Callable[[Scalar], Scalar]] = {
    "sin": jet.sin,
    "cos": jet.cos,
    "exp": jet.exp,
    "log": jet.log,
    "sqrt": jet.sqrt,
}

# Binary operators in groups of increasing precedence, with associativity.
OPERATORS = [
    [("+", "left"), ("-", "left")],
    [("*", "left"), ("/", "left")],
    [("^", "right")],
]
OPERATOR_PREC = {op: 2 * idx for idx, group in enumerate(OPERATORS) for op, _ in group}
OPERATOR_ASSOC = {op: assoc for group in OPERATORS for op, assoc in group}
# Unary minus sits between * / and ^.
UNARY_PREC = 3


# Tokenizer


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    """Split expression text into tokens.

    Raises:
        ExprSyntaxError: On characters outside the grammar
    """
    tokens: list[Token] = []
    idx = 0
    length = len(text)

    while idx < length:
        c = text[idx]
        if c.isspace():
            idx += 1
            continue
        if not c.isascii():
            raise ExprSyntaxError(f"Unexpected character {c!r}", text, idx)
        if c.isdigit() or (c == "." and idx + 1 < length and text[idx + 1].isdigit()):
            start = idx
            while idx < length and text[idx].isdigit():
                idx += 1
            if idx < length and text[idx] == ".":
                idx += 1
                while idx < length and text[idx].isdigit():
                    idx += 1
            if idx < length and text[idx] in "eE":
                mark = idx
                idx += 1
                if idx < length and text[idx] in "+-":
                    idx += 1
                if idx < length and text[idx].isdigit():
                    while idx < length and text[idx].isdigit():
                        idx += 1
                else:
                    raise ExprSyntaxError("Malformed exponent", text, mark)
            literal = text[start:idx]
            if not math.isfinite(float(literal)):
                raise ExprSyntaxError(f"Number out of range: {literal}", text, start)
            tokens.append(Token("num", literal, start))
            continue
        if c.isalpha() or c == "_":
            start = idx
            while idx < length and (text[idx].isalnum() or text[idx] == "_"):
                idx += 1
            tokens.append(Token("name", text[start:idx], start))
            continue
        if c in "+-*/^()":
            tokens.append(Token("op", c, idx))
            idx += 1
            continue
        raise ExprSyntaxError(f"Unexpected character {c!r}", text, idx)

    tokens.append(Token("end", "", length))
    return tokens


class _Parser:
    """Operator-precedence parser over a token list.

    Operands and pending operators live on explicit stacks, so nesting depth
    and chain length are bounded by memory rather than the call stack.
    """

    def __init__(self, text: str, variables: Sequence[str]) -> None:
        self.text = text
        self.index_of = {name: i for i, name in enumerate(variables)}
        self.tokens = tokenize(text)
        self.pos = 0
        self.operands: list[Expr] = []
        # ("bin", op) | ("neg", "-") | ("paren", "(") | ("call", func)
        self.pending: list[tuple[str, str]] = []

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def parse(self) -> Expr:
        expect_operand = True
        while True:
            token = self.advance()
            if expect_operand:
                expect_operand = self.operand(token)
                continue
            if token.kind == "op" and token.text in OPERATOR_PREC:
                self.push_binary(token.text)
                expect_operand = True
            elif token.kind == "op" and token.text == ")":
                self.close(token)
            else:
                self.finish(token)
                return self.operands[0]

    def operand(self, token: Token) -> bool:
        """Consume a token in operand position; return whether another operand is due."""
        if token.kind == "end":
            raise ExprSyntaxError("Unexpected end of input", self.text, token.offset)
        if token.kind == "num":
            self.operands.append(Num(float(token.text)))
            return False
        if token.kind == "op":
            if token.text == "-":
                self.pending.append(("neg", "-"))
                return True
            if token.text == "(":
                self.pending.append(("paren", "("))
                return True
            raise ExprSyntaxError(f"Unexpected operator {token.text!r}", self.text, token.offset)

        name = token.text
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == "(":
            if name not in FUNCTIONS:
                raise UnknownIdentifierError(name, self.text, token.offset)
            self.advance()
            self.pending.append(("call", name))
            return True
        if name not in self.index_of:
            raise UnknownIdentifierError(name, self.text, token.offset)
        self.operands.append(Var(name, self.index_of[name]))
        return False

    def push_binary(self, op: str) -> None:
        prec = OPERATOR_PREC[op]
        left_assoc = OPERATOR_ASSOC[op] == "left"
        while self.pending and self.pending[-1][0] in ("bin", "neg"):
            top = self.pending[-1]
            top_prec = UNARY_PREC if top[0] == "neg" else OPERATOR_PREC[top[1]]
            if top_prec > prec or (top_prec == prec and left_assoc):
                self.reduce()
            else:
                break
        self.pending.append(("bin", op))

    def reduce(self) -> None:
        kind, op = self.pending.pop()
        if kind == "neg":
            self.operands.append(Neg(self.operands.pop()))
        else:
            rhs = self.operands.pop()
            lhs = self.operands.pop()
            self.operands.append(BinOp(op, lhs, rhs))

    def close(self, token: Token) -> None:
        while self.pending and self.pending[-1][0] in ("bin", "neg"):
            self.reduce()
        if not self.pending:
            raise ExprSyntaxError(f"Unexpected token {token.text!r}", self.text, token.offset)
        kind, name = self.pending.pop()
        if kind == "call":
            self.operands.append(Call(name, self.operands.pop()))

    def finish(self, token: Token) -> None:
        while self.pending and self.pending[-1][0] in ("bin", "neg"):
            self.reduce()
        if self.pending:
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise ExprSyntaxError(f"Expected ')', found {found}", self.text, token.offset)
        if token.kind != "end":
            raise ExprSyntaxError(f"Unexpected token {token.text!r}", self.text, token.offset)


def parse(text: str, variables: Sequence[str]) -> Expr:
    """Parse expression text against the declared variables.

    Args:
        text: Expression source, non-empty
        variables: Declared variable names in binding order

    Returns:
        Expression tree

    Raises:
        ExprSyntaxError: On malformed input (with offset, line, column)
        UnknownIdentifierError: On names that are neither declared nor functions
    """
    if not text.strip():
        raise ExprSyntaxError("Empty expression", text, len(text))
    return _Parser(text, variables).parse()


def postorder(e: Expr) -> list[Expr]:
    """Nodes of ``e`` with every child ahead of its parent."""
    order: list[Expr] = []
    stack: list[tuple[Expr, bool]] = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded or isinstance(node, (Num, Var)):
            order.append(node)
            continue
        stack.append((node, True))
        if isinstance(node, Neg):
            stack.append((node.operand, False))
        elif isinstance(node, Call):
            stack.append((node.arg, False))
        else:
            stack.append((node.right, False))
            stack.append((node.left, False))
    return order


def to_text(e: Expr) -> str:
    """Print an expression so that ``parse(to_text(e))`` rebuilds it."""
    out: list[str] = []
    for node in postorder(e):
        if isinstance(node, Num):
            text = repr(node.value)
            out.append(f"(-{text[1:]})" if node.value < 0 or text.startswith("-") else text)
        elif isinstance(node, Var):
            out.append(node.name)
        elif isinstance(node, Neg):
            out.append(f"(-{out.pop()})")
        elif isinstance(node, Call):
            out.append(f"{node.func}({out.pop()})")
        else:
            right = out.pop()
            out.append(f"({out.pop()} {node.op} {right})")
    return out[0]


def free_variables(e: Expr) -> frozenset[str]:
    return frozenset(node.name for node in postorder(e) if isinstance(node, Var))


def _apply_binary(op: str, a: Scalar, b: Scalar) -> Scalar:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if isinstance(b, jet.JETS):
            return a * b.reciprocal()
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b
    return jet.power(a, b)


def run_program(program: Sequence[Expr], bindings: Sequence[Scalar] | Mapping[str, Scalar]) -> Scalar:
    """Evaluate a post-ordered node list on a value stack."""
    named: Mapping[str, Scalar] | None = bindings if isinstance(bindings, Mapping) else None
    indexed: Sequence[Scalar] = () if isinstance(bindings, Mapping) else bindings
    values: list[Scalar] = []
    for node in program:
        if isinstance(node, Num):
            values.append(node.value)
        elif isinstance(node, Var):
            values.append(named[node.name] if named is not None else indexed[node.index])
        elif isinstance(node, Neg):
            values[-1] = -values[-1]
        else:
            try:
                if isinstance(node, Call):
                    values[-1] = FUNCTIONS[node.func](values[-1])
                else:
                    right = values.pop()
                    values[-1] = _apply_binary(node.op, values[-1], right)
            except DomainError as err:
                if err.expression is None:
                    raise DomainError(err.reason, to_text(node)) from err
                raise
    return values[0]


def eval_expr(e: Expr, bindings: Sequence[Scalar] | Mapping[str, Scalar]) -> Scalar:
    """Evaluate an expression on floats or jets.

    Args:
        e: Expression tree
        bindings: Values by variable index, or by variable name

    Returns:
        Float or jet, matching the bindings

    Raises:
        DomainError: Naming the innermost sub-expression that left its domain
    """
    return run_program(postorder(e), bindings)


@dataclass(frozen=True)
class ExprField:
    """Scalar field backed by a parsed expression."""

    expr: Expr
    variables: tuple[str, ...]
    source: str = ""
    program: tuple[Expr, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "program", tuple(postorder(self.expr)))

    @property
    def arity(self) -> int:
        return len(self.variables)

    def __call__(self, args: Sequence[Scalar]) -> Scalar:
        return run_program(self.program, args)

    def __str__(self) -> str:
        return self.source or to_text(self.expr)


def compile_field(text: str, variables: Sequence[str]) -> ExprField:
    """Parse ``text`` into a scalar field over ``variables``."""
    return ExprField(parse(text, variables), tuple(variables), text)
