"""Small safe expression languages used by the catalog data file.

Two evaluators live here:

* :func:`eval_int` evaluates integer arithmetic over named parameters
  (``"2*q"``, ``"-(2*q+1)"``) and boolean guards (``"p == 2"``).
* :func:`eval_local` and :func:`eval_global` evaluate closed-form zeta
  expressions built from ``Z(a,b)``, ``L(a,b,chi)``, ``M(a,b)`` and the usual
  arithmetic operators.  Local expressions produce a
  :class:`~abzeta.ratfunc.RationalUX`; global expressions produce a
  :class:`GlobalExpr` that knows its Euler factor at every prime.

Both walk the Python AST and accept only a fixed whitelist of node types, so
catalog strings can never execute arbitrary code.
"""

from __future__ import annotations

import ast
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import operator

from .ratfunc import RationalUX, l_factor, monomial, zeta_factor

_BIN = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
    ast.Pow: operator.pow,
}
_CMP = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}


class FormulaError(ValueError):
    pass


def _parse(text: str) -> ast.expr:
    try:
        return ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise FormulaError(f"cannot parse {text!r}: {exc.msg}") from None


def eval_int(text: str | int, env: Mapping[str, int] | None = None):
    """Evaluate an integer expression or guard over ``env``."""
    if isinstance(text, int):
        return text
    env = env or {}

    def ev(node):
        match node:
            case ast.Constant(value=bool() | int() as v):
                return v
            case ast.Name(id=name):
                if name not in env:
                    raise FormulaError(f"unknown name {name!r} in {text!r}")
                return env[name]
            case ast.UnaryOp(op=ast.USub(), operand=x):
                return -ev(x)
            case ast.UnaryOp(op=ast.UAdd(), operand=x):
                return ev(x)
            case ast.UnaryOp(op=ast.Not(), operand=x):
                return not ev(x)
            case ast.BinOp(left=l, op=op, right=r) if type(op) in _BIN:
                return _BIN[type(op)](ev(l), ev(r))
            case ast.BoolOp(op=ast.And(), values=vals):
                return all(ev(v) for v in vals)
            case ast.BoolOp(op=ast.Or(), values=vals):
                return any(ev(v) for v in vals)
            case ast.Compare(left=l, ops=ops, comparators=rs):
                lhs = ev(l)
                for op, r in zip(ops, rs):
                    rhs = ev(r)
                    if type(op) not in _CMP or not _CMP[type(op)](lhs, rhs):
                        return False
                    lhs = rhs
                return True
            case ast.IfExp(test=t, body=b, orelse=o):
                return ev(b) if ev(t) else ev(o)
            case ast.Call(func=ast.Name(id=fn), args=args) if fn in _INT_FUNCS:
                return _INT_FUNCS[fn](*[ev(a) for a in args])
        raise FormulaError(f"unsupported syntax in {text!r}: {ast.dump(node)}")

    return ev(_parse(text))


@lru_cache(maxsize=None)
def formula_names(text: str) -> frozenset[str]:
    """Bare names used in an expression, excluding called function names."""
    tree = _parse(text)
    called = {id(n.func) for n in ast.walk(tree) if isinstance(n, ast.Call)}
    return frozenset(
        n.id for n in ast.walk(tree) if isinstance(n, ast.Name) and id(n) not in called
    )


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def chi3(p: int) -> int:
    """Nontrivial character mod 3."""
    return (0, 1, -1)[p % 3]


def chi4(p: int) -> int:
    """Nontrivial character mod 4."""
    return (0, 1, 0, -1)[p % 4]


_INT_FUNCS: dict[str, Callable] = {"val": valuation, "chi3": chi3, "chi4": chi4}


def _local_ev(text: str, env: Mapping[str, int], node, hooks):
    def ev(node):
        match node:
            case ast.Constant(value=int() as v):
                return v
            case ast.Name(id=name) if name in env:
                return env[name]
            case ast.UnaryOp(op=ast.USub(), operand=x):
                return -ev(x)
            case ast.BinOp(left=l, op=ast.Div(), right=r):
                a, b = ev(l), ev(r)
                if isinstance(a, int) and isinstance(b, int):
                    return Fraction(a, b)
                return a / b
            case ast.BinOp(left=l, op=op, right=r) if type(op) in _BIN:
                return _BIN[type(op)](ev(l), ev(r))
            case ast.Call(func=ast.Name(id=fn), args=args) if fn in hooks:
                return hooks[fn](args, ev)
        raise FormulaError(f"unsupported syntax in {text!r}: {ast.dump(node)}")

    return ev(node)


def _ints(args, ev, n):
    if len(args) != n:
        raise FormulaError(f"expected {n} arguments")
    vals = [ev(a) for a in args]
    if not all(isinstance(v, int) for v in vals):
        raise FormulaError(f"non-integer argument in {vals}")
    return vals


def _char_value(node, ev, env):
    if isinstance(node, ast.Name) and node.id in ("chi3", "chi4", "one"):
        return {"chi3": chi3, "chi4": chi4, "one": lambda p: 1}[node.id]
    raise FormulaError(f"unknown character {ast.dump(node)}")


def local_env(params: Mapping[str, int], p: int, val_of: str | None) -> dict[str, int]:
    """Names available inside a local formula: the parameters, ``p``, the
    character values at ``p`` and ``v`` (a p-adic valuation)."""
    env = dict(params)
    env["p"] = p
    env["chi3"] = chi3(p)
    env["chi4"] = chi4(p)
    if val_of is not None:
        n = eval_int(val_of, params)
        if n:
            env["v"] = valuation(n, p)
    return env


def eval_local(text: str, env: Mapping[str, int]) -> RationalUX:
    """Evaluate a local closed form in the generic variables ``u`` and ``X``.

    ``Z(a,b)`` is ``zeta_p(a s + b)``, ``L(a,b,chi)`` the L-factor with the
    named character evaluated at ``env['p']``, and ``M(a,b)`` the monomial
    ``u^a X^b``.
    """
    p = env["p"]

    def z(args, ev):
        a, b = _ints(args, ev, 2)
        return zeta_factor(a, b)

    def l(args, ev):
        if len(args) != 3:
            raise FormulaError("L takes (a, b, chi)")
        a, b = _ints(args[:2], ev, 2)
        node = args[2]
        if isinstance(node, ast.Name) and node.id in env:
            return l_factor(a, b, env[node.id])
        return l_factor(a, b, _char_value(node, ev, env)(p))

    def m(args, ev):
        a, b = _ints(args, ev, 2)
        if a < 0 or b < 0:
            raise FormulaError(f"M({a},{b}) needs nonnegative exponents")
        return monomial(a, b)

    out = _local_ev(text, env, _parse(text), {"Z": z, "L": l, "M": m})
    return out if isinstance(out, RationalUX) else RationalUX(out)


@dataclass
class GlobalExpr:
    """A global Dirichlet series given by its Euler factor at each prime."""

    factor: Callable[[int], RationalUX]

    def __mul__(self, other):
        other = _as_global(other)
        return GlobalExpr(lambda p: self.factor(p) * other.factor(p))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_global(other)
        return GlobalExpr(lambda p: self.factor(p) / other.factor(p))

    def __rtruediv__(self, other):
        return _as_global(other) / self

    def __pow__(self, n):
        return GlobalExpr(lambda p: self.factor(p) ** n)

    def __add__(self, other):
        raise FormulaError("sums of global Euler products are not Euler products")

    __radd__ = __sub__ = __rsub__ = __add__


def _as_global(x):
    if isinstance(x, GlobalExpr):
        return x
    if isinstance(x, int) and x == 1:
        return GlobalExpr(lambda p: RationalUX.one())
    raise FormulaError(f"cannot use {x!r} as a global factor")


def eval_global(text: str, params: Mapping[str, int], val_of: str | None = None) -> GlobalExpr:
    """Evaluate a global Euler product.

    ``zeta(a,b)`` and ``Lg(a,b,chi)`` contribute at every prime.
    ``at(q0, expr)`` restricts a local expression to the prime ``q0`` and
    ``prod_over('guard', expr)`` to the primes satisfying ``guard``.  Inside
    those two the local language applies, with ``v`` the p-adic valuation of
    ``val_of``.
    """
    plain = dict(params)

    def zeta(args, ev):
        a, b = _ints(args, ev, 2)
        return GlobalExpr(lambda p: zeta_factor(a, b))

    def lg(args, ev):
        a, b = _ints(args[:2], ev, 2)
        node = args[2]
        return GlobalExpr(lambda p: l_factor(a, b, _char_value(node, ev, {})(p)))

    def local_only(pred, node):
        src = ast.unparse(node)

        def f(p):
            if not pred(p):
                return RationalUX.one()
            return eval_local(src, local_env(plain, p, val_of))

        return GlobalExpr(f)

    def at(args, ev):
        (q0,) = _ints(args[:1], ev, 1)
        return local_only(lambda p: p == q0, args[1])

    def prod_over(args, ev):
        guard = args[0]
        if not (isinstance(guard, ast.Constant) and isinstance(guard.value, str)):
            raise FormulaError("prod_over needs a quoted guard")
        return local_only(lambda p: eval_int(guard.value, {**plain, "p": p}), args[1])

    hooks = {"zeta": zeta, "Lg": lg, "at": at, "prod_over": prod_over}
    out = _local_ev(text, plain, _parse(text), hooks)
    return _as_global(out)
