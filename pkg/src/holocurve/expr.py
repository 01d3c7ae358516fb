"""Expression language for coordinate functions and its jet evaluator.

Grammar (whitespace ignored)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" exponent)?
    exponent := ["-"] INT | "(" ["-"] INT ")"
    atom   := NUMBER | "i" | "z" | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := "exp" | "cos" | "sin"

Evaluation is vectorised over numpy arrays of sample points and runs in
forward mode: every node returns a :class:`Frac`, a quotient of two holomorphic
jets (value and first derivative) carried with separate log-scales. Keeping
numerator and denominator apart means poles never cause a division, and the
log-scales keep long products such as the Lehto product inside double range.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at offset {position}{detail}")


class PoleError(ArithmeticError):
    """Raised when a value is requested exactly at a pole."""

    def __init__(self, message: str, where=None, order: int | None = None):
        super().__init__(message)
        self.where = where
        self.order = order


# --- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    """Quotient; the denominator may vanish (meromorphic coordinates)."""

    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


@dataclass(frozen=True)
class Prod:
    factors: tuple


@dataclass(frozen=True)
class Affine:
    """Composition expr(alpha*z + beta)."""

    arg: "Expr"
    alpha: complex
    beta: complex


Expr = Union[Const, Var, Neg, Add, Sub, Mul, Div, Pow, Func, Prod, Affine]

FUNCTIONS = ("exp", "cos", "sin")
Z = Var()


def const(c) -> Const:
    return Const(complex(c))


# --- parser ------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(src, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        t = self.tok
        if t.kind != "op" or t.text != op:
            raise ExprSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos, (op,))
        self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(
                f"unexpected {self.tok.text!r}", self.tok.pos, ("+", "-", "*", "/", "^", "end")
            )
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            r = self.term()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            r = self.unary()
            e = Mul(e, r) if op == "*" else Div(e, r)
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            arg = self.unary()
            return Neg(arg) if op == "-" else arg
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        paren = False
        if self.tok.kind == "op" and self.tok.text == "(":
            paren = True
            self.advance()
        sign = 1
        if self.tok.kind == "op" and self.tok.text == "-":
            sign = -1
            self.advance()
        t = self.tok
        if t.kind != "num":
            raise ExprSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos, ("integer exponent",))
        if not re.fullmatch(r"\d+", t.text):
            raise ExprSyntaxError(f"non-integer exponent {t.text!r}", t.pos, ("integer exponent",))
        self.advance()
        if paren:
            self.expect_op(")")
        return sign * int(t.text)

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            e: Expr = Const(complex(float(t.text)))
        elif t.kind == "name":
            self.advance()
            if t.text == "z":
                e = Z
            elif t.text == "i":
                e = Const(1j)
            elif t.text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                e = Func(t.text, arg)
            else:
                raise ExprSyntaxError(f"unknown name {t.text!r}", t.pos, ("z", "i") + FUNCTIONS)
        elif t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect_op(")")
        else:
            raise ExprSyntaxError(
                f"unexpected {t.text or 'end of input'!r}",
                t.pos,
                ("number", "z", "i", "(") + FUNCTIONS,
            )
        nxt = self.tok
        if nxt.kind in ("num", "name") or (nxt.kind == "op" and nxt.text == "("):
            raise ExprSyntaxError("implicit multiplication is not allowed", nxt.pos, ("*",))
        return e


def parse_expr(src: str) -> Expr:
    """Parse a coordinate expression; raises :class:`ExprSyntaxError`."""
    return _Parser(src).parse()


# --- printing ----------------------------------------------------------------


def _fmt_complex(c: complex) -> str:
    c = complex(c)
    re_, im = c.real, c.imag
    if im == 0:
        s = repr(float(re_))
        return f"({s})" if re_ < 0 or "e-" in s or "e+" in s else s
    if re_ == 0:
        return f"({float(im)!r}*i)"
    return f"({float(re_)!r}+{float(im)!r}*i)"


def to_source(e: Expr, var: str = "z") -> str:
    """Render an expression back to parseable text."""
    if isinstance(e, Const):
        return _fmt_complex(e.value)
    if isinstance(e, Var):
        return var
    if isinstance(e, Neg):
        return f"(-{to_source(e.arg, var)})"
    if isinstance(e, (Add, Sub, Mul, Div)):
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
        return f"({to_source(e.left, var)}{op}{to_source(e.right, var)})"
    if isinstance(e, Pow):
        return f"{_atomic(to_source(e.base, var))}^({e.exponent})"
    if isinstance(e, Func):
        return f"{e.name}({to_source(e.arg, var)})"
    if isinstance(e, Prod):
        if not e.factors:
            return "1.0"
        return "(" + "*".join(to_source(f, var) for f in e.factors) + ")"
    if isinstance(e, Affine):
        inner = f"({_fmt_complex(e.alpha)}*{var}+{_fmt_complex(e.beta)})"
        return to_source(e.arg, inner)
    raise TypeError(f"not an expression node: {e!r}")


def _atomic(s: str) -> str:
    return s if s.startswith("(") or re.fullmatch(r"[\w.]+", s) else f"({s})"


# --- fraction jets -------------------------------------------------------------


def _rdiv(v, c):
    """Complex by real division, componentwise (numpy's complex path fails on subnormals)."""
    return v.real / c + 1j * (v.imag / c)


class Frac:
    """Quotient of two holomorphic jets, vectorised over sample points.

    The true numerator is ``nv * exp(ln)`` with derivative ``nd * exp(ln)``;
    likewise for the denominator. ``nm``/``dm`` bound the rounding error of the
    stored values in units of machine epsilon; comparing them with the values
    exposes cancellation near common zeros.
    """

    __slots__ = ("nv", "nd", "ln", "nm", "dv", "dd", "ld", "dm")

    def __init__(self, nv, nd, ln, nm, dv, dd, ld, dm):
        self.nv, self.nd, self.ln, self.nm = nv, nd, ln, nm
        self.dv, self.dd, self.ld, self.dm = dv, dd, ld, dm

    @classmethod
    def holo(cls, v, d, logscale=None, mag=None) -> "Frac":
        v = np.asarray(v, dtype=complex)
        d = np.broadcast_to(np.asarray(d, dtype=complex), v.shape).copy()
        ln = np.zeros(v.shape) if logscale is None else np.broadcast_to(logscale, v.shape).astype(float)
        nm = np.abs(v) if mag is None else np.broadcast_to(mag, v.shape).astype(float)
        one = np.ones(v.shape, dtype=complex)
        f = cls(v, d, ln, nm, one, np.zeros(v.shape, dtype=complex), np.zeros(v.shape), np.ones(v.shape))
        f._normalize()
        return f

    def _normalize(self):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for v, d, l, m in (("nv", "nd", "ln", "nm"), ("dv", "dd", "ld", "dm")):
                mag = getattr(self, m)
                alt = np.abs(getattr(self, d))
                # scale by the larger of value and derivative so neither overflows
                c = np.maximum(np.where(np.isfinite(mag), mag, 0.0), np.where(np.isfinite(alt), alt, 0.0))
                c = np.where(c > 0, c, 1.0)
                setattr(self, v, _rdiv(getattr(self, v), c))
                setattr(self, d, _rdiv(getattr(self, d), c))
                setattr(self, m, mag / c)
                setattr(self, l, getattr(self, l) + np.log(c))
        return self

    def copy(self) -> "Frac":
        return Frac(*(np.array(getattr(self, s), copy=True) for s in self.__slots__))

    def neg(self) -> "Frac":
        f = self.copy()
        f.nv, f.nd = -f.nv, -f.nd
        return f

    def recip(self) -> "Frac":
        return Frac(self.dv, self.dd, self.ld, self.dm, self.nv, self.nd, self.ln, self.nm)

    def mul(self, o: "Frac") -> "Frac":
        nv = self.nv * o.nv
        dv = self.dv * o.dv
        f = Frac(
            nv,
            self.nd * o.nv + self.nv * o.nd,
            self.ln + o.ln,
            np.abs(self.nv) * o.nm + np.abs(o.nv) * self.nm + np.abs(nv),
            dv,
            self.dd * o.dv + self.dv * o.dd,
            self.ld + o.ld,
            np.abs(self.dv) * o.dm + np.abs(o.dv) * self.dm + np.abs(dv),
        )
        return f._normalize()

    def add(self, o: "Frac", sign: float = 1.0) -> "Frac":
        # a/b + c/d = (a d + c b) / (b d)
        la = self.ln + o.ld
        lb = o.ln + self.ld
        with np.errstate(invalid="ignore", over="ignore"):
            top = np.maximum(la, lb)
            top = np.where(np.isfinite(top), top, 0.0)
            sa = np.exp(la - top)
            sb = sign * np.exp(lb - top)
        t1v = self.nv * o.dv
        t1d = self.nd * o.dv + self.nv * o.dd
        t2v = o.nv * self.dv
        t2d = o.nd * self.dv + o.nv * self.dd
        e1 = np.abs(self.nv) * o.dm + np.abs(o.dv) * self.nm + np.abs(t1v)
        e2 = np.abs(o.nv) * self.dm + np.abs(self.dv) * o.nm + np.abs(t2v)
        dv = self.dv * o.dv
        f = Frac(
            sa * t1v + sb * t2v,
            sa * t1d + sb * t2d,
            top,
            np.abs(sa) * e1 + np.abs(sb) * e2,
            dv,
            self.dd * o.dv + self.dv * o.dd,
            self.ld + o.ld,
            np.abs(self.dv) * o.dm + np.abs(o.dv) * self.dm + np.abs(dv),
        )
        return f._normalize()

    def pow(self, k: int) -> "Frac":
        if k < 0:
            return self.recip().pow(-k)
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result.mul(base)
            k >>= 1
            if k:
                base = base.mul(base)
        if result is None:
            return Frac.holo(np.ones(self.nv.shape, dtype=complex), 0.0)
        return result

    def value_jet(self):
        """(value, derivative) of the quotient; infinite at poles."""
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            s = np.exp(self.ln - self.ld)
            v = self.nv / self.dv * s
            d = (self.nd * self.dv - self.nv * self.dd) / self.dv ** 2 * s
        return v, d

    def exp(self) -> "Frac":
        u, du = self.value_jet()
        bad = ~np.isfinite(u)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            # absolute error of u, in units of eps
            uerr = (self.nm + np.abs(self.nv) / np.abs(self.dv) * self.dm) / np.abs(self.dv)
            uerr = uerr * np.exp(self.ln - self.ld)
            phase = np.exp(1j * np.where(bad, 0.0, u.imag))
            f = Frac.holo(phase, phase * du, logscale=np.where(bad, np.nan, u.real), mag=1.0 + uerr)
        return f

    def scale(self, c: complex) -> "Frac":
        f = self.copy()
        f.nv, f.nd = f.nv * c, f.nd * c
        f.nm = f.nm * abs(c)
        return f._normalize()


def _apply_func(name: str, a: Frac) -> Frac:
    if name == "exp":
        return a.exp()
    ia = a.scale(1j)
    e1 = ia.exp()
    e2 = ia.neg().exp()
    if name == "cos":
        return e1.add(e2).scale(0.5)
    if name == "sin":
        return e1.add(e2, sign=-1.0).scale(-0.5j)
    raise ValueError(f"unknown function {name!r}")


def evaluate(e: Expr, zv, zd=None) -> Frac:
    """Evaluate ``e`` at the jet (zv, zd) of the variable; zd defaults to 1."""
    zv = np.asarray(zv, dtype=complex)
    zd = np.ones(zv.shape, dtype=complex) if zd is None else np.broadcast_to(zd, zv.shape).astype(complex)
    return _eval(e, zv, zd)


def _eval(e: Expr, zv, zd) -> Frac:
    if isinstance(e, Const):
        return Frac.holo(np.full(zv.shape, e.value, dtype=complex), 0.0)
    if isinstance(e, Var):
        return Frac.holo(zv, zd)
    if isinstance(e, Neg):
        return _eval(e.arg, zv, zd).neg()
    if isinstance(e, Add):
        return _eval(e.left, zv, zd).add(_eval(e.right, zv, zd))
    if isinstance(e, Sub):
        return _eval(e.left, zv, zd).add(_eval(e.right, zv, zd), sign=-1.0)
    if isinstance(e, Mul):
        return _eval(e.left, zv, zd).mul(_eval(e.right, zv, zd))
    if isinstance(e, Div):
        return _eval(e.left, zv, zd).mul(_eval(e.right, zv, zd).recip())
    if isinstance(e, Pow):
        return _eval(e.base, zv, zd).pow(e.exponent)
    if isinstance(e, Func):
        return _apply_func(e.name, _eval(e.arg, zv, zd))
    if isinstance(e, Prod):
        out = Frac.holo(np.ones(zv.shape, dtype=complex), 0.0)
        for f in e.factors:
            out = out.mul(_eval(f, zv, zd))
        return out
    if isinstance(e, Affine):
        return _eval(e.arg, e.alpha * zv + e.beta, e.alpha * zd)
    raise TypeError(f"not an expression node: {e!r}")


@dataclass(frozen=True)
class JetValue:
    value: complex
    derivative: complex


def eval_jet(e: Expr, z: complex) -> JetValue:
    """Value and exact derivative of ``e`` at a single point.

    Raises :class:`PoleError` when ``z`` is a pole of ``e``.
    """
    f = evaluate(e, np.array([complex(z)]))
    if f.dv[0] == 0 or not np.isfinite(f.dv[0]):
        order = 1 if f.dd[0] != 0 else None
        raise PoleError(f"pole of the expression at z={complex(z)}", where=complex(z), order=order)
    v, d = f.value_jet()
    if not (np.isfinite(v[0]) and np.isfinite(d[0])):
        raise OverflowError(f"expression value overflows at z={complex(z)}")
    return JetValue(complex(v[0]), complex(d[0]))


def is_constant_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 1
