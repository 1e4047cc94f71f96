"""Periodic grid functions, quadrature and coefficient ingestion.

A grid function stores samples of a periodic function on the uniform grid
``{0, h, ..., (n-1) h}`` of one period cell.  Quadrature is the rectangle
rule, which for smooth periodic integrands is the (spectrally accurate)
trapezoid rule.  Sums use :func:`math.fsum`, so an integral does not depend on
the order of the samples: a circular shift or any permutation of the values
integrates to the same float.

2D samples are stored as an ``(n1, n2)`` array indexed ``values[i, j] =
f(i h1, j h2)``.  Whenever a 2D function is flattened (files, sparse
operators) the x index runs fastest, i.e. ``ravel(order="F")``.
"""
from __future__ import annotations

import ast
import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "ExpressionError",
    "GridSpec1D",
    "GridSpec2D",
    "GridFn1D",
    "GridFn2D",
    "sample",
    "sample2d",
    "integrate",
    "cell_mean",
    "integrate2d",
    "cell_mean2d",
    "load_gridfn",
    "save_gridfn",
    "fingerprint",
]


class ExpressionError(ValueError):
    """Malformed coefficient expression or a non-finite sample."""


@dataclass(frozen=True)
class GridSpec1D:
    L: float
    n: int

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"period must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"need at least 4 grid points, got {self.n}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @property
    def volume(self) -> float:
        return self.L

    @property
    def size(self) -> int:
        return self.n

    @property
    def shape(self) -> tuple:
        return (self.n,)


@dataclass(frozen=True)
class GridSpec2D:
    L1: float
    L2: float
    n1: int
    n2: int

    def __post_init__(self):
        for L in (self.L1, self.L2):
            if not (L > 0 and math.isfinite(L)):
                raise ValueError(f"periods must be positive, got {L}")
        for n in (self.n1, self.n2):
            if int(n) != n or n < 4:
                raise ValueError(f"need at least 4 grid points per axis, got {n}")
        object.__setattr__(self, "L1", float(self.L1))
        object.__setattr__(self, "L2", float(self.L2))
        object.__setattr__(self, "n1", int(self.n1))
        object.__setattr__(self, "n2", int(self.n2))

    @property
    def h1(self) -> float:
        return self.L1 / self.n1

    @property
    def h2(self) -> float:
        return self.L2 / self.n2

    @property
    def volume(self) -> float:
        return self.L1 * self.L2

    @property
    def size(self) -> int:
        return self.n1 * self.n2

    @property
    def shape(self) -> tuple:
        return (self.n1, self.n2)

    def mesh(self):
        """Sample coordinates ``(X, Y)``, both of shape ``(n1, n2)``."""
        x = np.arange(self.n1) * self.h1
        y = np.arange(self.n2) * self.h2
        return np.meshgrid(x, y, indexing="ij")

    def axis(self, k: int) -> GridSpec1D:
        return GridSpec1D(self.L1, self.n1) if k == 0 else GridSpec1D(self.L2, self.n2)


def _frozen(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"expected values of shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


class _GridFnOps:
    # elementwise arithmetic between grid functions on the same grid and scalars

    def _wrap(self, values):
        return type(self)(self.spec, values)

    def _other(self, other):
        if isinstance(other, _GridFnOps):
            if other.spec != self.spec:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __rtruediv__(self, other):
        return self._wrap(self._other(other) / self.values)

    def __neg__(self):
        return self._wrap(-self.values)

    def __pow__(self, p):
        return self._wrap(self.values**p)

    def map(self, fn):
        return self._wrap(fn(self.values))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True, eq=False)
class GridFn1D(_GridFnOps):
    """Samples ``values[i] = f(i h)`` of an L-periodic function."""

    spec: GridSpec1D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.spec.shape))

    @classmethod
    def constant(cls, spec: GridSpec1D, c: float) -> "GridFn1D":
        return cls(spec, np.full(spec.n, float(c)))

    def roll(self, s: int) -> "GridFn1D":
        """Translate by ``s`` nodes: ``out[i] = f[i - s]``."""
        return GridFn1D(self.spec, np.roll(self.values, s))


@dataclass(frozen=True, eq=False)
class GridFn2D(_GridFnOps):
    """Samples ``values[i, j] = f(i h1, j h2)`` of a doubly periodic function."""

    spec: GridSpec2D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.spec.shape))

    @classmethod
    def constant(cls, spec: GridSpec2D, c: float) -> "GridFn2D":
        return cls(spec, np.full(spec.shape, float(c)))

    def flat(self) -> np.ndarray:
        """Values flattened with x fastest."""
        return self.values.ravel(order="F")

    @classmethod
    def from_flat(cls, spec: GridSpec2D, flat) -> "GridFn2D":
        return cls(spec, np.asarray(flat, dtype=float).reshape(spec.shape, order="F"))


# --------------------------------------------------------------------------
# quadrature


def integrate(f: GridFn1D) -> float:
    return f.spec.h * math.fsum(f.values)


def cell_mean(f: GridFn1D) -> float:
    return integrate(f) / f.spec.L


def integrate2d(f: GridFn2D) -> float:
    return f.spec.h1 * f.spec.h2 * math.fsum(f.values.ravel())


def cell_mean2d(f: GridFn2D) -> float:
    return integrate2d(f) / f.spec.volume


def fingerprint(f) -> str:
    """Short content hash of a grid function (grid and values)."""
    h = hashlib.sha256(repr(f.spec).encode())
    h.update(np.ascontiguousarray(f.values).tobytes())
    return h.hexdigest()[:12]


# --------------------------------------------------------------------------
# coefficient expressions
#
# Grammar: numbers, pi (or π), the coordinates, + - * /, unary minus,
# cos(.), sin(.), indicator(lo, hi[, arg]).  Juxtaposition multiplies, so
# "5+4cos(2πx)" and "2πx" are accepted.

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>π|[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/(),]))"
)
_FUNCS = {"cos", "sin", "indicator"}


def _normalize(text: str) -> str:
    text = text.replace("−", "-").replace("·", "*").replace("×", "*")
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"unexpected character at {pos} in {text!r}")
        pos = m.end()
        kind = m.lastgroup
        tok = m.group(kind)
        if tok == "π":
            tok = "pi"
        tokens.append((kind, tok))
    out = []
    for k, (kind, tok) in enumerate(tokens):
        if k:
            pkind, ptok = tokens[k - 1]
            left = pkind == "num" or (pkind == "name" and ptok not in _FUNCS) or ptok == ")"
            right = kind in ("num", "name") or tok == "("
            if left and right:
                out.append("*")
        out.append(tok)
    return " ".join(out)


def _turns(arg):
    # reduce to signed turns in [-1/2, 1/2] snapped to a 2^-44 grid; with the
    # quarter-turn fold below, nodes related by the symmetries of cos and sin
    # get bit-identical values
    u = np.asarray(arg, dtype=float) / (2.0 * math.pi)
    r = u - np.round(u)
    return np.round(r * _SNAP) / _SNAP


_SNAP = float(2**44)


class _Evaluator:
    def __init__(self, names: dict, period: float):
        self.names = names
        self.period = period

    def __call__(self, node):
        if isinstance(node, ast.Expression):
            return self(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in self.names:
                raise ExpressionError(f"unknown name {node.id!r}")
            return self.names[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = self(node.left), self(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                # numpy division so that x/0 becomes inf and is reported below
                return np.divide(a, b)
            raise ExpressionError("only + - * / are allowed")
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            fn = node.func.id
            args = [self(a) for a in node.args]
            if fn in ("cos", "sin") and len(args) == 1:
                r = _turns(args[0])
                a = np.abs(r)
                if fn == "cos":
                    # cos(2 pi a) = sin(2 pi (1/4 - a)), exactly odd about a = 1/4
                    return np.sin(2.0 * math.pi * (0.25 - a))
                return np.sign(r) * np.sin(2.0 * math.pi * np.minimum(a, 0.5 - a))
            if fn == "indicator" and len(args) in (2, 3):
                lo, hi = args[0], args[1]
                if len(args) == 3:
                    arg = np.mod(args[2], self.period)
                else:
                    arg = self.names["x"]
                return np.where((lo <= arg) & (arg < hi), 1.0, 0.0)
            raise ExpressionError(f"bad call to {fn!r}")
        raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def _evaluate(expr: str, names: dict, period: float, shape) -> np.ndarray:
    if not isinstance(expr, str) or not expr.strip():
        raise ExpressionError("empty expression")
    try:
        tree = ast.parse(_normalize(expr), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {expr!r}: {exc.msg}") from None
    with np.errstate(all="ignore"):
        vals = _Evaluator(names, period)(tree)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), shape).copy()
    if not np.all(np.isfinite(vals)):
        raise ExpressionError(f"{expr!r} is not finite at every sample point")
    return vals


def sample(expr: str, spec: GridSpec1D) -> GridFn1D:
    """Sample a 1D coefficient expression at ``x = i h``.

    The coordinate may be written ``x`` or ``s``; ``L`` is the period.

    >>> sample("cos(2πx)", GridSpec1D(1.0, 4)).values.round(12) + 0.0
    array([ 1.,  0., -1.,  0.])
    """
    x = spec.x
    names = {"x": x, "s": x, "pi": math.pi, "L": spec.L}
    return GridFn1D(spec, _evaluate(expr, names, spec.L, spec.shape))


def sample2d(expr: str, spec: GridSpec2D) -> GridFn2D:
    """Sample a 2D coefficient expression in ``x`` and ``y``.

    ``indicator(lo, hi, arg)`` reduces ``arg`` modulo ``L1`` so compositions
    such as ``indicator(0.25, 0.75, x+y)`` stay periodic on a square cell.
    """
    X, Y = spec.mesh()
    names = {"x": X, "y": Y, "pi": math.pi, "L1": spec.L1, "L2": spec.L2, "L": spec.L1}
    return GridFn2D(spec, _evaluate(expr, names, spec.L1, spec.shape))


# --------------------------------------------------------------------------
# files

_HEAD1 = re.compile(r"#\s*gridfn1d\s+L=(\S+)\s+n=(\d+)\s*$")
_HEAD2 = re.compile(r"#\s*gridfn2d\s+L1=(\S+)\s+L2=(\S+)\s+n1=(\d+)\s+n2=(\d+)\s*$")


def save_gridfn(f, path) -> None:
    """Write ``f`` in the one-value-per-line text format."""
    if isinstance(f, GridFn2D):
        s = f.spec
        head = f"# gridfn2d L1={s.L1!r} L2={s.L2!r} n1={s.n1} n2={s.n2}"
        vals = f.flat()
    else:
        head = f"# gridfn1d L={f.spec.L!r} n={f.spec.n}"
        vals = f.values
    body = "\n".join(repr(float(v)) for v in vals)
    Path(path).write_text(head + "\n" + body + "\n", encoding="utf-8")


def load_gridfn(path):
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty file")
    m1, m2 = _HEAD1.match(lines[0]), _HEAD2.match(lines[0])
    try:
        vals = np.array([float(v) for v in lines[1:]])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if m1:
        spec = GridSpec1D(float(m1.group(1)), int(m1.group(2)))
        if vals.size != spec.n:
            raise ValueError(f"{path}: expected {spec.n} values, found {vals.size}")
        return GridFn1D(spec, vals)
    if m2:
        spec = GridSpec2D(float(m2.group(1)), float(m2.group(2)), int(m2.group(3)), int(m2.group(4)))
        if vals.size != spec.size:
            raise ValueError(f"{path}: expected {spec.size} values, found {vals.size}")
        return GridFn2D.from_flat(spec, vals)
    raise ValueError(f"{path}: missing '# gridfn1d' or '# gridfn2d' header")
