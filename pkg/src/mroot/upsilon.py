"""Half-integer powers of ``Upsilon = A**(2/m) + B``.

A :class:`UExpr` is ``sum_h C_h * Upsilon**h`` with ``h`` a half-integer and
``C_h`` an :class:`AExpr`.  Integer parts of nonnegative ``h`` are multiplied
out, so the stored exponents are ``0``, ``1/2`` and negative half-integers.
When ``B`` is zero everything collapses to plain AExpr values
(``Upsilon**(1/2) = A**(1/m)``).
"""
from __future__ import annotations

import math
from fractions import Fraction

from . import _config
from .aexpr import AContext, AExpr, IndependenceError, VerdictMismatch
from .polyalg import Derivation, Poly, RatFn

__all__ = ["UContext", "UExpr"]

HALF = Fraction(1, 2)


class UContext:
    def __init__(self, actx: AContext, B: Poly | None = None):
        self.actx = actx
        self.ring = actx.ring
        B = self.ring.zero if B is None else self.ring.coerce(B)
        self.B = B
        self.degenerate = B.is_zero()
        m = actx.m
        self.Ups = actx.power(Fraction(2, m)) + RatFn(B)
        self._dUps = {}

    def __repr__(self):
        return f"UContext(m={self.actx.m}, B={self.B})"

    @property
    def m(self):
        return self.actx.m

    def dUps(self, d: Derivation) -> AExpr:
        r = self._dUps.get(d)
        if r is None:
            r = self.Ups.diff(d)
            self._dUps[d] = r
        return r

    def make(self, coeff, h=0) -> "UExpr":
        h = Fraction(h)
        if (2 * h).denominator != 1:
            raise ValueError("Upsilon exponents must be half-integers")
        coeff = self.actx.coerce(coeff) if not isinstance(coeff, AExpr) else coeff
        if self.degenerate:
            # Upsilon^h = A^(2h/m)
            return UExpr(self, {Fraction(0): coeff * self.actx.power(2 * h / self.m)})
        k = math.floor(h)
        if k > 0:
            coeff = coeff * self.Ups ** k
            h -= k
        return UExpr(self, {h: coeff})

    @property
    def zero(self):
        return UExpr(self, {})

    @property
    def one(self):
        return self.make(self.actx.one, 0)

    def power(self, h, coeff=None):
        return self.make(self.actx.one if coeff is None else coeff, h)

    @property
    def Fbase(self) -> "UExpr":
        """``sqrt(Upsilon)``."""
        return self.power(HALF)

    def coerce(self, other) -> "UExpr":
        if isinstance(other, UExpr):
            if other.ctx is not self:
                raise ValueError("UExpr operands from different contexts")
            return other
        return self.make(other, 0)


class UExpr:
    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: UContext, terms: dict):
        self.ctx = ctx
        self.terms = {h: c for h, c in sorted(terms.items()) if c.terms}

    def __repr__(self):
        return f"UExpr({self.render()})"

    def render(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{{{c.render()}}}*U^({h})" if h else f"{{{c.render()}}}"
                          for h, c in self.terms.items())

    def _coerce(self, other):
        if isinstance(other, UExpr):
            if other.ctx is not self.ctx:
                raise ValueError("UExpr operands from different contexts")
            return other
        return self.ctx.make(other, 0)

    def _merge(self, items):
        out = {}
        ctx = self.ctx
        for h, c in items:
            k = math.floor(h)
            if k > 0:
                c = c * ctx.Ups ** k
                h -= k
            out[h] = out[h] + c if h in out else c
        return UExpr(ctx, out)

    def __add__(self, other):
        o = self._coerce(other)
        return self._merge(list(self.terms.items()) + list(o.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return UExpr(self.ctx, {h: -c for h, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (AExpr, RatFn, Poly, int, Fraction)):
            return UExpr(self.ctx, {h: c * other for h, c in self.terms.items()})
        o = self._coerce(other)
        items = [(h1 + h2, c1 * c2) for h1, c1 in self.terms.items() for h2, c2 in o.terms.items()]
        return self._merge(items)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("nonnegative integer exponent required")
        out = self.ctx.one
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, other):
        if isinstance(other, (RatFn, Poly, int, Fraction)):
            return UExpr(self.ctx, {h: c / other for h, c in self.terms.items()})
        raise TypeError("UExpr division only by rational functions")

    def diff(self, d) -> "UExpr":
        """``d(C U^h) = dC U^h + h C dU U^(h-1)``."""
        d = Derivation.coerce(d)
        items = []
        for h, c in self.terms.items():
            items.append((h, c.diff(d)))
            if h:
                items.append((h - 1, c * self.ctx.dUps(d) * h))
        return self._merge(items)

    def dx(self, i):
        return self.diff(Derivation("x", i))

    def dy(self, i):
        return self.diff(Derivation("y", i))

    def contract_x(self) -> "UExpr":
        ys = self.ctx.ring.ys()
        out = self.ctx.zero
        for k in range(self.ctx.ring.n):
            out = out + self.dx(k) * ys[k]
        return out

    def split(self) -> tuple:
        """``(P, Q, s)`` with ``U^s * self = P + Q * U^(1/2)``, ``P, Q`` AExpr."""
        ctx = self.ctx
        zero = ctx.actx.zero
        if not self.terms:
            return zero, zero, Fraction(0)
        s = -min(min(self.terms), Fraction(0))
        s = Fraction(math.ceil(s))  # integral shift keeps the parity of each class
        P, Q = zero, zero
        for h, c in self.terms.items():
            hh = h + s
            k = math.floor(hh)
            part = c * ctx.Ups ** k if k else c
            if hh - k:
                Q = Q + part
            else:
                P = P + part
        return P, Q, s

    def is_zero(self, confirm: bool | None = None, seed: int = 0) -> bool:
        if not self.terms:
            return True
        P, Q, _ = self.split()
        verdict = P.is_zero(confirm=False) and Q.is_zero(confirm=False)
        if confirm is None:
            confirm = _config.checks_enabled()
        if confirm:
            self._confirm(verdict, seed)
        return verdict

    def _confirm(self, verdict, seed):
        seen = False
        for x, y in self.ctx.actx.sample_points(6, seed):
            try:
                v, scale = self.eval_float(x, y, with_scale=True)
            except (ZeroDivisionError, ValueError):
                continue
            seen = True
            big = abs(v) > 1e-9 * max(1.0, scale)
            if verdict and big:
                raise VerdictMismatch(f"zero verdict contradicted numerically ({v:.3e})")
            if not verdict and big:
                return
        if not verdict and seen:
            raise IndependenceError("split says nonzero but the value vanishes numerically; "
                                    "sqrt(Upsilon) may be dependent on the A-classes")

    def eval_float(self, x, y, with_scale: bool = False):
        u = self.ctx.Ups.eval_float(x, y)
        if u <= 0:
            raise ValueError("Upsilon must be positive")
        total = 0.0
        scale = 0.0
        for h, c in self.terms.items():
            v = c.eval_float(x, y) * u ** float(h)
            total += v
            scale += abs(v)
        return (total, scale) if with_scale else total

    def eval_mp(self, x, y):
        import mpmath
        u = self.ctx.Ups.eval_mp(x, y)
        total = mpmath.mpf(0)
        for h, c in self.terms.items():
            total += c.eval_mp(x, y) * u ** (mpmath.mpf(h.numerator) / h.denominator)
        return total

    def class_table(self) -> list:
        """Rows ``(shift_part, A-class, RatFn)`` of the P/Q split for reports."""
        P, Q, _ = self.split()
        rows = [("P", e, r) for e, r in P.decompose()]
        rows += [("Q", e, r) for e, r in Q.decompose()]
        return rows
