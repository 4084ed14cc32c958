"""Finite sums ``sum_k R_k * A**e_k`` with rational exponents.

Every quantity built from ``F = A**(1/m)`` lives here.  Exponents are stored
by their class in ``[0, 1)``; integer parts are folded into the rational
coefficient, so ``A**(7/3)`` is kept as ``A**2`` at class ``1/3``.  Distinct
classes are linearly independent over the rational functions unless ``A`` is
a perfect power, which is detected and reported as undecidable.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import _config
from .polyalg import Derivation, Poly, RatFn, Ring

__all__ = ["AContext", "AExpr", "IndependenceError", "VerdictMismatch"]


class IndependenceError(ArithmeticError):
    """The zero test is undecidable: exponent classes may be dependent."""


class VerdictMismatch(AssertionError):
    """A symbolic verdict was contradicted by numeric evaluation."""


def _as_fraction(e) -> Fraction:
    if isinstance(e, Fraction):
        return e
    if isinstance(e, (int, str)):
        return Fraction(e)
    raise TypeError("exponents must be exact rationals")


def _split(e: Fraction) -> tuple[int, Fraction]:
    k = math.floor(e)
    return k, e - k


class AContext:
    """Shared base polynomial ``A`` with root order ``m``.

    Exponents must have denominators dividing ``denom`` (``m`` by default;
    ``2m`` for generalized metrics).  ``sampler`` draws numeric points used
    by verdict confirmation; by default x is uniform in ``[-0.3, 0.3]^n`` and
    y uniform on the unit sphere, keeping points where ``A > 0``.
    """

    def __init__(self, A: Poly, m: int, denom: int | None = None, sampler=None):
        if A.is_zero():
            raise ValueError("base polynomial must be nonzero")
        if m < 1:
            raise ValueError("root order must be positive")
        self.A = A
        self.m = m
        self.denom = denom or m
        self.ring: Ring = A.ring
        self._sampler = sampler
        self._A_rat = RatFn(A)
        self._dA = {}

    def __repr__(self):
        return f"AContext(m={self.m}, A={self.A})"

    @cached_property
    def power_index(self) -> int:
        """Largest d such that A is (up to a constant) a perfect d-th power."""
        _, factors = self.A._p.factor_squarefree()
        g = 0
        for _, k in factors:
            g = math.gcd(g, int(k))
        return max(g, 1)

    def dA(self, d: Derivation) -> RatFn:
        """``(dA)/A`` as a rational function, cached per derivation."""
        r = self._dA.get(d)
        if r is None:
            r = RatFn(self.A.diff(d), self.A)
            self._dA[d] = r
        return r

    def check_exponent(self, e: Fraction):
        if (e * self.denom).denominator != 1:
            raise ValueError(f"exponent {e} has denominator not dividing {self.denom}")

    def with_ring(self, ring: Ring) -> "AContext":
        if ring is self.ring:
            return self
        return AContext(ring.coerce(self.A), self.m, self.denom, self._sampler)

    # constructors
    def make(self, r, e=0) -> "AExpr":
        e = _as_fraction(e)
        self.check_exponent(e)
        r = RatFn.coerce(self.ring, r) if not isinstance(r, RatFn) or r.ring is not self.ring else r
        if r.is_zero():
            return AExpr(self, {})
        k, frac = _split(e)
        if k:
            r = r * self._A_rat ** k
        return AExpr(self, {frac: r})

    @property
    def zero(self) -> "AExpr":
        return AExpr(self, {})

    @property
    def one(self) -> "AExpr":
        return self.make(1, 0)

    def power(self, e, coeff=1) -> "AExpr":
        return self.make(coeff, e)

    @property
    def F(self) -> "AExpr":
        return self.make(1, Fraction(1, self.m))

    def coerce(self, other) -> "AExpr":
        if isinstance(other, AExpr):
            if other.ctx is not self:
                if other.ctx.A != self.A or other.ctx.m != self.m:
                    raise ValueError("AExpr operands have different bases")
                if other.ctx.ring is not self.ring:
                    # promote into this context's ring (adds a conformal factor)
                    return AExpr(self, {e: RatFn.coerce(self.ring, r) for e, r in other.terms.items()})
                return AExpr(self, other.terms)
            return other
        return self.make(other, 0)

    # numerics
    def t_value(self, x):
        alpha = self.ring.alpha
        return 1.0 if alpha is None else math.exp(alpha.eval_float(x, np.zeros(self.ring.n)))

    def sample_points(self, count: int, seed: int = 0, box: float = 0.3):
        """Points ``(x, y)`` with ``A(x, y) > 0`` drawn reproducibly."""
        if self._sampler is not None:
            return self._sampler(count, seed)
        rng = np.random.default_rng(seed)
        n = self.ring.n
        pts = []
        tries = 0
        while len(pts) < count and tries < 200 * count:
            tries += 1
            x = rng.uniform(-box, box, n)
            y = rng.normal(size=n)
            y /= np.linalg.norm(y)
            if self.A.eval_float(x, y) > 1e-6:
                pts.append((x, y))
        return pts


class AExpr:
    """Immutable ``{class: RatFn}`` map over a shared :class:`AContext`."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: AContext, terms: dict):
        self.ctx = ctx
        self.terms = {e: r for e, r in sorted(terms.items()) if not r.is_zero()}

    @property
    def ring(self):
        return self.ctx.ring

    def __repr__(self):
        return f"AExpr({self.render()})"

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, r in self.terms.items():
            if e == 0:
                parts.append(f"[{r.render()}]")
            else:
                parts.append(f"[{r.render()}]*A^({e})")
        return " + ".join(parts)

    __str__ = render

    def decompose(self) -> list:
        """Exponent classes in increasing order with their coefficients."""
        return list(self.terms.items())

    def classes(self) -> list:
        return list(self.terms)

    def coefficient(self, e) -> RatFn:
        e = _as_fraction(e)
        _, frac = _split(e)
        r = self.terms.get(frac)
        return r if r is not None else RatFn(self.ring.zero)

    def is_rational(self) -> bool:
        return all(e == 0 for e in self.terms)

    def rational_part(self) -> RatFn:
        return self.coefficient(0)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, AExpr):
            if other.ctx is self.ctx:
                return other
            if other.ctx.ring._alpha is not None and self.ctx.ring._alpha is None:
                return None
            return self.ctx.coerce(other)
        if isinstance(other, (RatFn, Poly, int, Fraction)):
            return self.ctx.make(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, AExpr):
                return other.ctx.coerce(self) + other
            return NotImplemented
        out = dict(self.terms)
        for e, r in o.terms.items():
            out[e] = out[e] + r if e in out else r
        return AExpr(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return AExpr(self.ctx, {e: -r for e, r in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, AExpr):
                return other.ctx.coerce(self) - other
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (RatFn, Poly, int, Fraction)):
            return self.scale(other)
        o = self._coerce(other)
        if o is None:
            if isinstance(other, AExpr):
                return other.ctx.coerce(self) * other
            return NotImplemented
        out = {}
        A = self.ctx._A_rat
        for e1, r1 in self.terms.items():
            for e2, r2 in o.terms.items():
                e = e1 + e2
                r = r1 * r2
                if e >= 1:
                    e -= 1
                    r = r * A
                out[e] = out[e] + r if e in out else r
        return AExpr(self.ctx, out)

    __rmul__ = __mul__

    def scale(self, s) -> "AExpr":
        if not isinstance(s, RatFn) or s.ring is not self.ring:
            s = RatFn.coerce(self.ring, s)
        if s.is_zero():
            return self.ctx.zero
        return AExpr(self.ctx, {e: r * s for e, r in self.terms.items()})

    def __truediv__(self, other):
        if isinstance(other, (RatFn, Poly, int, Fraction)):
            s = RatFn.coerce(self.ring, other)
            return self.scale(s.inverse())
        if isinstance(other, AExpr):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def inverse(self) -> "AExpr":
        """Inverse of a single-class expression ``R * A**e``."""
        if len(self.terms) != 1:
            raise ArithmeticError("only single-class expressions are invertible here")
        (e, r), = self.terms.items()
        return self.ctx.make(r.inverse(), -e)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise ValueError("integer exponent required")
        if k < 0:
            return self.inverse() ** (-k)
        out = self.ctx.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def diff(self, d) -> "AExpr":
        """``d(R A^e) = (dR) A^e + e R (dA/A) A^e``; classes are preserved."""
        d = Derivation.coerce(d)
        out = {}
        for e, r in self.terms.items():
            dr = r.diff(d)
            if e:
                dr = dr + r * self.ctx.dA(d) * e
            out[e] = dr
        return AExpr(self.ctx, out)

    def dx(self, i):
        return self.diff(Derivation("x", i))

    def dy(self, i):
        return self.diff(Derivation("y", i))

    def contract_x(self) -> "AExpr":
        """``f_0 = f_{x^k} y^k``."""
        ys = self.ring.ys()
        out = self.ctx.zero
        for k in range(self.ring.n):
            out = out + self.dx(k) * ys[k]
        return out

    def y_degree_table(self) -> dict:
        """Total y-homogeneity degree per class (coefficient degree + class*m*e)."""
        out = {}
        m = self.ctx.m
        for e, r in self.terms.items():
            out[e] = r.ydeg() + e * m
        return out

    # zero test
    def _check_independence(self):
        d = self.ctx.power_index
        if d > 1 and len(self.terms) > 1:
            cls = list(self.terms)
            for i in range(len(cls)):
                for j in range(i + 1, len(cls)):
                    if ((cls[i] - cls[j]) * d).denominator == 1:
                        raise IndependenceError(
                            f"A is a perfect {d}-th power; classes {cls[i]} and {cls[j]} may cancel")

    def is_zero(self, confirm: bool | None = None, seed: int = 0) -> bool:
        self._check_independence()
        verdict = not self.terms
        if confirm is None:
            confirm = _config.checks_enabled()
        if confirm and not verdict:
            self._confirm_nonzero(seed)
        return verdict

    def _confirm_nonzero(self, seed):
        for x, y in self.ctx.sample_points(6, seed):
            try:
                v, scale = self.eval_float(x, y, with_scale=True)
            except ZeroDivisionError:
                continue
            if abs(v) > 1e-9 * max(1.0, scale):
                return
        raise VerdictMismatch(f"nonzero verdict not confirmed numerically: {self.render()[:200]}")

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero(confirm=False)

    __hash__ = None

    # numerics
    def eval_float(self, x, y, with_scale: bool = False):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        t = self.ctx.t_value(x)
        a = None
        total = 0.0
        scale = 0.0
        for e, r in self.terms.items():
            v = r.eval_float(x, y, t)
            if e:
                if a is None:
                    a = self.ctx.A.eval_float(x, y)
                    if a <= 0:
                        raise ValueError("A must be positive to evaluate fractional powers")
                v *= a ** float(e)
            total += v
            scale += abs(v)
        return (total, scale) if with_scale else total

    def eval_mp(self, x, y):
        import mpmath
        alpha = self.ring.alpha
        t = mpmath.mpf(1) if alpha is None else mpmath.exp(alpha.eval_mp(x, [0] * self.ring.n))
        a = self.ctx.A.eval_mp(x, y)
        total = mpmath.mpf(0)
        for e, r in self.terms.items():
            v = r.eval_mp(x, y, t)
            if e:
                v *= a ** (mpmath.mpf(e.numerator) / e.denominator)
            total += v
        return total
