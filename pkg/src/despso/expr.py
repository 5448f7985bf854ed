"""Arithmetic expressions and user problem files.

Expressions use ``+ - * / ^`` (``**`` also works), parentheses, numeric
literals and variable names.  Parsing goes through :mod:`ast` and only the
node types below are accepted, so nothing else can be executed.

A problem file is INI-style::

    [variables]
    a = 0.5, 1.5
    b = -1, 1

    [responses]
    y = 2*a^2 - a*b + 3

Variables keep their file order; responses are evaluated vectorised over
``(D, N)`` inputs like the built-in problems.
"""
import ast
import configparser
import operator

import numpy as np

from .interval import IntervalProblem, IntervalVariable, Response


class ExpressionError(ValueError):
    pass


class ProblemFileError(ValueError):
    pass


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _check(node, allowed):
    if isinstance(node, ast.Expression):
        _check(node.body, allowed)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ExpressionError(f"operator {type(node.op).__name__} not supported")
        _check(node.left, allowed)
        _check(node.right, allowed)
    elif isinstance(node, ast.UnaryOp):
        if type(node.op) not in _UNARY:
            raise ExpressionError(f"operator {type(node.op).__name__} not supported")
        _check(node.operand, allowed)
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"only numeric literals allowed, got {node.value!r}")
    elif isinstance(node, ast.Name):
        if allowed is not None and node.id not in allowed:
            raise ExpressionError(f"unknown variable {node.id!r}")
    else:
        raise ExpressionError(f"unsupported syntax: {type(node).__name__}")


def _eval(node, env):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_eval(node.operand, env))
    if isinstance(node, ast.Constant):
        return float(node.value)
    return env[node.id]


class Expression:
    """A parsed expression; call it with a name -> value (or array) mapping."""

    def __init__(self, text, names=None):
        self.text = text
        # ^ is power; python's own ^ would bind looser than * so rewrite it first
        source = " ".join(text.split()).replace("^", "**")
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
        _check(tree, None if names is None else set(names))
        self._body = tree.body
        self.names = tuple(sorted({n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}))

    def __call__(self, env):
        return _eval(self._body, env)

    def __repr__(self):
        return f"Expression({self.text!r})"


class _ExprResponse:
    def __init__(self, expr, index):
        self.expr = expr
        self.index = index

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.expr({n: x[i] for n, i in self.index.items()})
        # constant expressions still give one value per column
        return np.broadcast_to(out, x.shape[1:]) * 1.0


def _parse_interval(name, text):
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise ProblemFileError(f"variable {name}: expected 'lower, upper', got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise ProblemFileError(f"variable {name}: bounds must be numbers") from None
    try:
        return IntervalVariable(name, lo, hi)
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from None


def parse_problem(text):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ProblemFileError(str(exc)) from None
    for section in ("variables", "responses"):
        if not cp.has_section(section) or not cp.items(section):
            raise ProblemFileError(f"missing or empty [{section}] section")
    variables = [_parse_interval(k, v) for k, v in cp.items("variables")]
    index = {v.name: i for i, v in enumerate(variables)}
    responses = []
    for name, text in cp.items("responses"):
        try:
            expr = Expression(text, index)
        except ExpressionError as exc:
            raise ProblemFileError(f"response {name}: {exc}") from None
        responses.append(Response(name, _ExprResponse(expr, index)))
    return IntervalProblem(variables, responses)


def load_problem(path):
    with open(path) as fh:
        return parse_problem(fh.read())
