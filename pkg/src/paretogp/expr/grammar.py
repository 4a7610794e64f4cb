"""Infix text form of expression trees.

Grammar (whitespace insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' NUMBER postfix* | '-' unary | postfix
    postfix := primary ('^' '2')*
    primary := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := sqrt | inv | plus | times

A run of ``+`` builds one n-ary Plus and a run of ``*`` one n-ary Times;
``-`` and ``/`` are left-associative binary nodes.  A minus sign directly in
front of a number literal is part of the literal.  ``plus(..)`` and
``times(..)`` spell the single-argument forms.  :func:`format_tree` emits
just enough parentheses for :func:`parse` to rebuild the identical tree.
"""

from __future__ import annotations

import re
from typing import Optional, Sequence

from ..errors import ParseError
from .tree import MAX_VARIADIC_ARITY, Const, Node, Primitive, Tree, Var

_ADDITIVE = (Primitive.PLUS, Primitive.SUBTRACT)
_MULTIPLICATIVE = (Primitive.TIMES, Primitive.DIVIDE)
_FUNC_NAMES = {"sqrt": Primitive.SQRT, "inv": Primitive.INVERSE,
               "plus": Primitive.PLUS, "times": Primitive.TIMES}
_DEFAULT_NAME = re.compile(r"x(\d+)\Z")


def _name(index: int, names: Optional[Sequence[str]]) -> str:
    return names[index] if names is not None else f"x{index}"


def _number(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(int(value))


def _is_negative_const(t: Tree) -> bool:
    return isinstance(t, Const) and (t.value < 0 or str(t.value).startswith("-"))


def _infix(t: Tree, ops) -> bool:
    """True when ``t`` prints as a bare infix chain of one of ``ops``."""
    return (isinstance(t, Node) and t.op in ops
            and not (t.op.variadic and len(t.children) == 1))


def format_tree(tree: Tree, names: Optional[Sequence[str]] = None) -> str:
    """Render ``tree`` as infix text.

    ``names`` maps variable indices to display names; defaults to ``x0, x1, ...``.
    """
    if isinstance(tree, Const):
        return _number(tree.value)
    if isinstance(tree, Var):
        return _name(tree.index, names)

    op, kids = tree.op, tree.children
    fmt = lambda t: format_tree(t, names)  # noqa: E731
    wrap = lambda t: f"({fmt(t)})"  # noqa: E731

    if op in (Primitive.PLUS, Primitive.TIMES) and len(kids) == 1:
        return f"{op.value.lower()}({fmt(kids[0])})"
    if op is Primitive.PLUS:
        parts = [wrap(k) if _infix(k, _ADDITIVE) else fmt(k) for k in kids]
        return " + ".join(parts)
    if op is Primitive.SUBTRACT:
        a, b = (wrap(k) if _infix(k, _ADDITIVE) else fmt(k) for k in kids)
        return f"{a} - {b}"
    if op in _MULTIPLICATIVE:
        parts = [wrap(k) if _infix(k, _ADDITIVE + _MULTIPLICATIVE) else fmt(k)
                 for k in kids]
        return ("*" if op is Primitive.TIMES else "/").join(parts)
    if op is Primitive.MINUS:
        return f"-({fmt(kids[0])})"
    if op is Primitive.SQRT:
        return f"sqrt({fmt(kids[0])})"
    if op is Primitive.INVERSE:
        return f"inv({fmt(kids[0])})"
    if op is Primitive.SQUARE:
        k = kids[0]
        bare = (isinstance(k, Var) or (isinstance(k, Const) and not _is_negative_const(k))
                or (isinstance(k, Node) and k.op in (Primitive.SQRT, Primitive.INVERSE,
                                                     Primitive.SQUARE))
                or (isinstance(k, Node) and k.op in (Primitive.PLUS, Primitive.TIMES)
                    and len(k.children) == 1))
        return f"{fmt(k)}^2" if bare else f"({fmt(k)})^2"
    raise ValueError(f"unknown primitive {op}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _nary(op: Primitive, items: list) -> Tree:
    if len(items) == 1:
        return items[0]
    if len(items) <= MAX_VARIADIC_ARITY:
        return Node(op, tuple(items))
    head = items[:MAX_VARIADIC_ARITY - 1]
    return Node(op, tuple(head) + (_nary(op, items[MAX_VARIADIC_ARITY - 1:]),))


class _Parser:
    def __init__(self, text: str, names: Optional[Sequence[str]]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.lookup = None if names is None else {n: k for k, n in enumerate(names)}

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def parse(self) -> Tree:
        tree = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return tree

    def _chain(self, operand, joiner: str, splitter: str, nary_op, binary_op) -> Tree:
        group = [operand()]
        while self.peek()[1] in (joiner, splitter) and self.peek()[0] == "op":
            sym = self.take()[1]
            rhs = operand()
            if sym == joiner:
                group.append(rhs)
            else:
                group = [Node(binary_op, (_nary(nary_op, group), rhs))]
        return _nary(nary_op, group)

    def expr(self) -> Tree:
        return self._chain(self.term, "+", "-", Primitive.PLUS, Primitive.SUBTRACT)

    def term(self) -> Tree:
        return self._chain(self.unary, "*", "/", Primitive.TIMES, Primitive.DIVIDE)

    def unary(self) -> Tree:
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.take()
            if self.peek()[0] == "number":
                return self.postfix(self._number(self.take(), negative=True))
            return Node(Primitive.MINUS, (self.unary(),))
        return self.postfix(self.primary())

    def postfix(self, tree: Tree) -> Tree:
        while self.peek()[1] == "^":
            self.take()
            kind, text, pos = self.take()
            if kind != "number" or text != "2":
                raise ParseError("only the exponent 2 is supported", pos)
            tree = Node(Primitive.SQUARE, (tree,))
        return tree

    @staticmethod
    def _number(tok, negative: bool = False) -> Const:
        text = tok[1]
        sign = "-" if negative else ""
        if any(ch in text for ch in ".eE"):
            return Const(float(sign + text))
        return Const(int(sign + text))

    def primary(self) -> Tree:
        kind, text, pos = self.take()
        if kind == "number":
            return self._number((kind, text, pos))
        if kind == "name":
            if text in _FUNC_NAMES and self.peek()[1] == "(":
                self.take()
                arg = self.expr()
                self.expect(")")
                return Node(_FUNC_NAMES[text], (arg,))
            return Var(self._variable(text, pos))
        if text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)

    def _variable(self, name: str, pos: int) -> int:
        if self.lookup is not None:
            if name not in self.lookup:
                raise ParseError(f"unknown variable {name!r}", pos)
            return self.lookup[name]
        m = _DEFAULT_NAME.match(name)
        if m is None:
            raise ParseError(f"unknown variable {name!r}; expected x<index>", pos)
        return int(m.group(1))


def parse(text: str, names: Optional[Sequence[str]] = None) -> Tree:
    """Parse infix text; ``names`` resolves variable names to column indices."""
    return _Parser(text, names).parse()
