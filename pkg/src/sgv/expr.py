"""Expression grammar shared by manifests and the ``eval`` subcommand.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("+" | "-") unary | power ;
    power   = atom [ "^" integer ] ;
    atom    = rational | identifier | call | "(" expr ")" ;
    call    = identifier "(" [ expr { "," expr } ] ")" ;
    rational = digits [ "/" digits ] ;

Division is only allowed by nonzero rational constants.  Calls are only
available where the caller supplies a function table (``eval``).  The text is
parsed with the standard :mod:`ast` module after mapping ``^`` to ``**``;
anything outside the grammar above is rejected.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from typing import Any, Callable, Mapping

from .errors import ExpressionError
from .grassmann import Chart, SuperPoly

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def _parse(text: str) -> ast.expr:
    if "**" in text:
        raise ExpressionError("use '^' for powers", text.index("**"))
    try:
        tree = ast.parse(text.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"syntax error in {text!r}: {exc.msg}", exc.offset) from None
    return tree.body


class _Evaluator:
    def __init__(self, chart: Chart | None, env: Mapping[str, Any], functions: Mapping[str, Callable]):
        self.chart = chart
        self.env = env
        self.functions = functions

    def const(self, value: Fraction):
        return SuperPoly.constant(self.chart, value) if self.chart is not None else value

    def visit(self, node: ast.AST):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ExpressionError(f"only integer and p/q literals allowed, got {node.value!r}", node.col_offset)
            return self.const(Fraction(node.value))
        if isinstance(node, ast.Name):
            if node.id in self.env:
                return self.env[node.id]
            if self.chart is not None and node.id in self.chart.names:
                return self.chart.var(node.id)
            raise ExpressionError(f"undeclared name {node.id!r}", node.col_offset)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = self.visit(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
            return self.binop(node)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            fn = self.functions.get(node.func.id)
            if fn is None:
                raise ExpressionError(f"unknown function {node.func.id!r}", node.col_offset)
            return fn(*[self.visit(a) for a in node.args])
        raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}", getattr(node, "col_offset", None))

    def binop(self, node: ast.BinOp):
        left = self.visit(node.left)
        if isinstance(node.op, ast.Pow):
            exp = self.visit(node.right)
            n = _as_rational(exp)
            if n is None or n.denominator != 1 or n < 0:
                raise ExpressionError("exponent must be a nonnegative integer", node.right.col_offset)
            return left ** int(n)
        right = self.visit(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        d = _as_rational(right)
        if d is None or d == 0:
            raise ExpressionError("division only by nonzero rational constants", node.right.col_offset)
        return left.scale(1 / d) if isinstance(left, SuperPoly) else left / d


def _as_rational(value) -> Fraction | None:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, SuperPoly) and value.is_constant():
        return value.constant_term()
    return None


def parse_poly(text: str, chart: Chart) -> SuperPoly:
    """Parse ``text`` into a normal-ordered SuperPoly over ``chart``."""
    value = _Evaluator(chart, {}, {}).visit(_parse(str(text)))
    if not isinstance(value, SuperPoly):
        value = SuperPoly.constant(chart, value)
    return value


def evaluate(text: str, chart: Chart, env: Mapping[str, Any], functions: Mapping[str, Callable]):
    """Evaluate an expression with named values and callable functions."""
    return _Evaluator(chart, env, functions).visit(_parse(text))
