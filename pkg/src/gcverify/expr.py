"""Expressions in ``p_l``, ``z_j`` and ``conj(z_j)`` with exact Wirtinger derivatives.

Grammar (Python syntax, parsed with :mod:`ast`)::

    expr := number | I | p<l> | z<j> | z            (z only when N == 1)
          | expr (+ - *) expr | expr / number | expr ** <nonneg int>
          | -expr | conj(expr) | re(expr) | im(expr) | abs(expr)

Everything except ``abs`` keeps the tree polynomial in ``(p, z, z̄)``; for
polynomial trees the derivatives ``∂/∂p_l``, ``∂/∂z_j`` and ``∂/∂z̄_j`` are
computed term by term, treating ``z_j`` and ``z̄_j`` as independent.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass

import numpy as np

from .fields import ModelChart


class ExpressionError(ValueError):
    pass


class Poly:
    """Sparse polynomial over variables ``(p_1..p_2M, z_1..z_N, zb_1..zb_N)``."""

    __slots__ = ("nvars", "terms", "M", "N")

    def __init__(self, M: int, N: int, terms=None):
        self.M, self.N = M, N
        self.nvars = 2 * M + 2 * N
        self.terms = {k: complex(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def const(cls, M, N, c):
        return cls(M, N, {(0,) * (2 * M + 2 * N): c})

    @classmethod
    def var(cls, M, N, idx):
        e = [0] * (2 * M + 2 * N)
        e[idx] = 1
        return cls(M, N, {tuple(e): 1.0})

    def __add__(self, other):
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return Poly(self.M, self.N, t)

    def scale(self, c):
        return Poly(self.M, self.N, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        t = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                t[k] = t.get(k, 0) + v1 * v2
        return Poly(self.M, self.N, t)

    def __pow__(self, n: int):
        out = Poly.const(self.M, self.N, 1.0)
        for _ in range(n):
            out = out * self
        return out

    def conj(self):
        m2, n = 2 * self.M, self.N
        t = {}
        for k, v in self.terms.items():
            k2 = k[:m2] + k[m2 + n:] + k[m2: m2 + n]
            t[k2] = np.conj(v)
        return Poly(self.M, self.N, t)

    def diff(self, idx: int):
        t = {}
        for k, v in self.terms.items():
            if k[idx]:
                k2 = list(k)
                k2[idx] -= 1
                t[tuple(k2)] = t.get(tuple(k2), 0) + v * k[idx]
        return Poly(self.M, self.N, t)

    def evaluate(self, p, z):
        p = np.asarray(p, dtype=float)
        z = np.asarray(z, dtype=complex)
        vals = np.concatenate([p.astype(complex), z, np.conj(z)], axis=-1)
        out = np.zeros(vals.shape[:-1], dtype=complex)
        for k, v in self.terms.items():
            term = np.full(vals.shape[:-1], v, dtype=complex)
            for i, e in enumerate(k):
                if e:
                    term = term * vals[..., i] ** e
            out = out + term
        return out


_VAR = re.compile(r"^(p|z)(\d+)$")


@dataclass
class _Node:
    poly: Poly | None
    fn: object  # callable (p, z) -> array


class Expression:
    """A parsed expression bound to a :class:`ModelChart`.

    Calling it on a real coordinate vector ``x`` returns a complex value, so
    it can be handed directly to the field-calculus checks.
    """

    def __init__(self, text: str, chart: ModelChart):
        self.text = text
        self.chart = chart
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from exc
        node = self._build(tree.body)
        self.poly = node.poly
        self._fn = node.fn

    @classmethod
    def from_poly(cls, poly: Poly, chart: ModelChart, text: str = "<poly>"):
        obj = cls.__new__(cls)
        obj.text, obj.chart, obj.poly = text, chart, poly
        obj._fn = poly.evaluate
        return obj

    @property
    def is_polynomial(self) -> bool:
        return self.poly is not None

    def value(self, p, z):
        return self._fn(np.asarray(p, dtype=float), np.asarray(z, dtype=complex))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        v = self.value(self.chart.p(x), self.chart.z(x))
        return complex(v) if np.ndim(v) == 0 else v

    def evaluate_points(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self.value(self.chart.p(pts), self.chart.z(pts)), dtype=complex)

    # -- exact derivatives ------------------------------------------------
    def _derived(self, idx, label):
        if self.poly is None:
            raise ExpressionError(f"{self.text!r} is not polynomial; no exact derivative")
        return Expression.from_poly(self.poly.diff(idx), self.chart, f"{label}({self.text})")

    def d_dp(self, l: int) -> "Expression":
        if not 1 <= l <= 2 * self.chart.M:
            raise ExpressionError(f"no variable p{l}")
        return self._derived(l - 1, f"d/dp{l}")

    def d_dz(self, j: int) -> "Expression":
        if not 1 <= j <= self.chart.N:
            raise ExpressionError(f"no variable z{j}")
        return self._derived(2 * self.chart.M + j - 1, f"d/dz{j}")

    def d_dzbar(self, j: int) -> "Expression":
        if not 1 <= j <= self.chart.N:
            raise ExpressionError(f"no variable z{j}")
        return self._derived(2 * self.chart.M + self.chart.N + j - 1, f"d/dzbar{j}")

    def __repr__(self):
        return f"Expression({self.text!r})"

    # -- parsing ------------------------------------------------------------
    def _build(self, node) -> _Node:
        M, N = self.chart.M, self.chart.N
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
                and not isinstance(node.value, bool):
            c = complex(node.value)
            return _Node(Poly.const(M, N, c), lambda p, z, c=c: c)
        if isinstance(node, ast.Name):
            return self._name(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            a = self._build(node.operand)
            s = -1.0 if isinstance(node.op, ast.USub) else 1.0
            return _Node(a.poly.scale(s) if a.poly else None, lambda p, z: s * a.fn(p, z))
        if isinstance(node, ast.BinOp):
            return self._binop(node)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            if len(node.args) != 1 or node.keywords:
                raise ExpressionError(f"{node.func.id}() takes exactly one argument")
            a = self._build(node.args[0])
            name = node.func.id
            if name == "conj":
                return _Node(a.poly.conj() if a.poly else None, lambda p, z: np.conj(a.fn(p, z)))
            if name == "re":
                poly = (a.poly + a.poly.conj()).scale(0.5) if a.poly else None
                return _Node(poly, lambda p, z: np.real(a.fn(p, z)) + 0j)
            if name == "im":
                poly = (a.poly + a.poly.conj().scale(-1)).scale(-0.5j) if a.poly else None
                return _Node(poly, lambda p, z: np.imag(a.fn(p, z)) + 0j)
            if name == "abs":
                return _Node(None, lambda p, z: np.abs(a.fn(p, z)) + 0j)
            raise ExpressionError(f"unknown function {name!r}")
        raise ExpressionError(f"unsupported syntax in {self.text!r}: {ast.dump(node)[:60]}")

    def _name(self, name: str) -> _Node:
        M, N = self.chart.M, self.chart.N
        if name in ("I", "i"):
            return _Node(Poly.const(M, N, 1j), lambda p, z: 1j)
        if name == "z" and N == 1:
            name = "z1"
        m = _VAR.match(name)
        if not m:
            raise ExpressionError(f"unknown variable {name!r}")
        kind, idx = m.group(1), int(m.group(2))
        if kind == "p":
            if not 1 <= idx <= 2 * M:
                raise ExpressionError(f"unknown variable {name!r} (chart has p1..p{2 * M})")
            return _Node(Poly.var(M, N, idx - 1), lambda p, z: p[..., idx - 1] + 0j)
        if not 1 <= idx <= N:
            raise ExpressionError(f"unknown variable {name!r} (chart has z1..z{N})")
        return _Node(Poly.var(M, N, 2 * M + idx - 1), lambda p, z: z[..., idx - 1])

    def _binop(self, node) -> _Node:
        a = self._build(node.left)
        op = node.op
        if isinstance(op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)
                    and node.right.value >= 0):
                raise ExpressionError("exponents must be non-negative integer literals")
            n = node.right.value
            return _Node(a.poly ** n if a.poly else None, lambda p, z: a.fn(p, z) ** n)
        b = self._build(node.right)
        both = a.poly is not None and b.poly is not None
        if isinstance(op, ast.Add):
            return _Node(a.poly + b.poly if both else None, lambda p, z: a.fn(p, z) + b.fn(p, z))
        if isinstance(op, ast.Sub):
            return _Node(a.poly + b.poly.scale(-1) if both else None,
                         lambda p, z: a.fn(p, z) - b.fn(p, z))
        if isinstance(op, ast.Mult):
            return _Node(a.poly * b.poly if both else None, lambda p, z: a.fn(p, z) * b.fn(p, z))
        if isinstance(op, ast.Div):
            if b.poly is None or any(any(k) for k in b.poly.terms):
                raise ExpressionError("division only by constants")
            c = b.poly.terms.get((0,) * b.poly.nvars, 0)
            if c == 0:
                raise ExpressionError("division by zero")
            return _Node(a.poly.scale(1 / c) if a.poly else None, lambda p, z: a.fn(p, z) / c)
        raise ExpressionError(f"unsupported operator {type(op).__name__}")


def parse(text: str, chart: ModelChart) -> Expression:
    return Expression(text, chart)


def expression_eval(expr: Expression, point) -> dict:
    """Value at ``point`` plus exact first derivatives when the tree is polynomial."""
    x = np.asarray(point, dtype=float)
    out = {"value": complex(expr(x)), "polynomial": expr.is_polynomial}
    if expr.is_polynomial:
        ch = expr.chart
        out["d_dp"] = [complex(expr.d_dp(l)(x)) for l in range(1, 2 * ch.M + 1)]
        out["d_dz"] = [complex(expr.d_dz(j)(x)) for j in range(1, ch.N + 1)]
        out["d_dzbar"] = [complex(expr.d_dzbar(j)(x)) for j in range(1, ch.N + 1)]
    return out
