"""Exact sparse polynomials and rational functions over Q.

Variables are ``x1..xn`` (position), ``y1..yn`` (direction) and a single
formal generator ``t`` standing for ``exp(alpha(x))``.  Terms are kept in
graded lexicographic order with the x-block before the y-block before t.

Arithmetic, GCD and exact division are delegated to FLINT's ``fmpq_mpoly``;
everything else (derivations, gradings, rendering, evaluation) lives here.
All indices in the Python API are 0-based; rendered names are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import flint
import numpy as np

from . import _config

__all__ = [
    "Monomial", "Ring", "Poly", "RatFn", "Derivation",
    "poly_gcd", "poly_divides", "DimensionError",
]


class DimensionError(ValueError):
    """Operands live in incompatible ambient contexts."""


class Monomial(NamedTuple):
    xexp: tuple
    yexp: tuple
    texp: int

    @property
    def ydeg(self):
        return sum(self.yexp)


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, flint.fmpq):
        return Fraction(int(c.p), int(c.q))
    return Fraction(c)


def _fmpq(c) -> flint.fmpq:
    c = _frac(c)
    return flint.fmpq(c.numerator, c.denominator)


class Ring:
    """Polynomial context of dimension ``n`` with an optional conformal factor.

    ``alpha`` is a polynomial in x only; it fixes the derivation rule
    ``d t / d x^i = alpha_{x^i} t``.  Rings are interned, so two rings with the
    same ``n`` and ``alpha`` are the same object.
    """

    _interned: dict = {}

    def __new__(cls, n: int, alpha: "Poly | None" = None):
        if n < 1:
            raise DimensionError("dimension must be positive")
        akey = None
        if alpha is not None:
            if alpha.ring.n != n:
                raise DimensionError("alpha lives in a different dimension")
            if alpha.has_t() or alpha.ydeg() > 0:
                raise ValueError("alpha must be a polynomial in x only")
            if alpha.is_zero():
                alpha = None
            else:
                akey = alpha._key()
        key = (n, akey)
        ring = cls._interned.get(key)
        if ring is not None:
            return ring
        ring = super().__new__(cls)
        ring.n = n
        names = tuple(f"x{i + 1}" for i in range(n)) + tuple(f"y{i + 1}" for i in range(n)) + ("t",)
        ring.names = names
        ring.ctx = flint.fmpq_mpoly_ctx.get(names, "deglex")
        ring._alpha = None if alpha is None else alpha._p
        ring._alpha_grad = None
        cls._interned[key] = ring
        return ring

    def __repr__(self):
        if self._alpha is None:
            return f"Ring(n={self.n})"
        return f"Ring(n={self.n}, alpha={self.alpha})"

    def __reduce__(self):
        return (Ring, (self.n, self.alpha))

    @property
    def nvars(self):
        return 2 * self.n + 1

    @property
    def alpha(self) -> "Poly | None":
        return None if self._alpha is None else Poly(Ring(self.n), self._alpha)

    def base(self) -> "Ring":
        """The same dimension without a conformal factor."""
        return Ring(self.n)

    def with_alpha(self, alpha: "Poly | None") -> "Ring":
        if alpha is not None and alpha.ring.n != self.n:
            raise DimensionError("alpha lives in a different dimension")
        return Ring(self.n, None if alpha is None else alpha.with_ring(Ring(self.n)))

    def alpha_grad(self, i: int):
        if self._alpha is None:
            return None
        if self._alpha_grad is None:
            self._alpha_grad = [self._alpha.derivative(k) for k in range(self.n)]
        return self._alpha_grad[i]

    # constructors
    def _wrap(self, p) -> "Poly":
        return Poly(self, p)

    def const(self, c) -> "Poly":
        return Poly(self, self.ctx.from_dict({(0,) * self.nvars: _fmpq(c)}) if c else self.ctx.from_dict({}))

    @property
    def zero(self) -> "Poly":
        return self.const(0)

    @property
    def one(self) -> "Poly":
        return self.const(1)

    def x(self, i: int) -> "Poly":
        self._check_index(i)
        return Poly(self, self.ctx.gens()[i])

    def y(self, i: int) -> "Poly":
        self._check_index(i)
        return Poly(self, self.ctx.gens()[self.n + i])

    @property
    def t(self) -> "Poly":
        return Poly(self, self.ctx.gens()[2 * self.n])

    def xs(self):
        return [self.x(i) for i in range(self.n)]

    def ys(self):
        return [self.y(i) for i in range(self.n)]

    def _check_index(self, i):
        if not 0 <= i < self.n:
            raise DimensionError(f"index {i} outside 0..{self.n - 1}")

    def monomial(self, coeff, xexp=None, yexp=None, texp=0) -> "Poly":
        xexp = tuple(xexp) if xexp is not None else (0,) * self.n
        yexp = tuple(yexp) if yexp is not None else (0,) * self.n
        if len(xexp) != self.n or len(yexp) != self.n:
            raise DimensionError("exponent tuple length does not match dimension")
        if min(xexp + yexp + (texp,)) < 0:
            raise ValueError("negative exponent")
        if not coeff:
            return self.zero
        return Poly(self, self.ctx.from_dict({xexp + yexp + (texp,): _fmpq(coeff)}))

    def from_terms(self, terms: Iterable) -> "Poly":
        """Build from ``(coeff, xexp, yexp[, texp])`` tuples; like terms merge."""
        acc = {}
        for term in terms:
            coeff, xexp, yexp = term[:3]
            texp = term[3] if len(term) > 3 else 0
            key = tuple(xexp) + tuple(yexp) + (texp,)
            if len(key) != self.nvars:
                raise DimensionError("exponent tuple length does not match dimension")
            acc[key] = acc.get(key, Fraction(0)) + _frac(coeff)
        return Poly(self, self.ctx.from_dict({k: _fmpq(v) for k, v in acc.items() if v}))

    def coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ring is self:
                return other
            if other.ring.n != self.n:
                raise DimensionError(f"dimension mismatch: {other.ring.n} vs {self.n}")
            if other.ring._alpha is not None and self._alpha is not None:
                raise ValueError("operands carry different conformal factors")
            if other.ring._alpha is not None and self._alpha is None:
                raise ValueError("cannot drop a conformal factor implicitly")
            if other.has_t():
                raise ValueError("t-dependent polynomial cannot change its conformal factor")
            return Poly(self, other._p)
        if isinstance(other, (int, Fraction, flint.fmpq)):
            return self.const(other)
        raise TypeError(f"cannot coerce {type(other).__name__} to Poly")


def _join(a: "Poly", b) -> "tuple[Ring, object, object]":
    """Common ring and raw flint operands for a binary operation."""
    if isinstance(b, Poly):
        if a.ring is b.ring:
            return a.ring, a._p, b._p
        if a.ring.n != b.ring.n:
            raise DimensionError(f"dimension mismatch: {a.ring.n} vs {b.ring.n}")
        if b.ring._alpha is None:
            return a.ring, a._p, a.ring.coerce(b)._p
        return b.ring, b.ring.coerce(a)._p, b._p
    if isinstance(b, (int, Fraction, flint.fmpq)):
        return a.ring, a._p, _fmpq(b)
    return None, None, None


class Poly:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("ring", "_p", "_compiled")

    def __init__(self, ring: Ring, p):
        self.ring = ring
        self._p = p
        self._compiled = None

    # structure
    def is_zero(self) -> bool:
        return self._p.is_zero()

    def __bool__(self):
        return not self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def __len__(self):
        return len(self._p)

    def _key(self):
        return tuple((m, (int(c.p), int(c.q))) for m, c in self._p.terms())

    def terms(self):
        """``(Monomial, Fraction)`` pairs in canonical (descending grlex) order."""
        n = self.ring.n
        return [(Monomial(m[:n], m[n:2 * n], m[2 * n]), _frac(c)) for m, c in self._p.terms()]

    def coefficients(self):
        return [_frac(c) for c in self._p.coeffs()]

    def leading_coefficient(self) -> Fraction:
        return _frac(self._p.leading_coefficient())

    def ydeg(self) -> int:
        """Maximal total y-degree (-1 for the zero polynomial)."""
        n = self.ring.n
        return max((sum(m[n:2 * n]) for m in self._p.monoms()), default=-1)

    def ydegrees(self) -> set:
        n = self.ring.n
        return {sum(m[n:2 * n]) for m in self._p.monoms()}

    def xdeg(self) -> int:
        n = self.ring.n
        return max((sum(m[:n]) for m in self._p.monoms()), default=-1)

    def tdeg(self) -> int:
        return max((m[-1] for m in self._p.monoms()), default=-1)

    def has_t(self) -> bool:
        return self.tdeg() > 0

    def is_y_homogeneous(self, d: int | None = None) -> bool:
        degs = self.ydegrees()
        if not degs:
            return True
        return len(degs) == 1 and (d is None or degs == {d})

    def with_ring(self, ring: Ring) -> "Poly":
        return ring.coerce(self)

    # arithmetic
    def __add__(self, other):
        ring, a, b = _join(self, other)
        if ring is None:
            return NotImplemented
        return Poly(ring, a + b)

    __radd__ = __add__

    def __sub__(self, other):
        ring, a, b = _join(self, other)
        if ring is None:
            return NotImplemented
        return Poly(ring, a - b)

    def __rsub__(self, other):
        ring, a, b = _join(self, other)
        if ring is None:
            return NotImplemented
        return Poly(ring, b - a)

    def __neg__(self):
        return Poly(self.ring, -self._p)

    def __mul__(self, other):
        if isinstance(other, RatFn):
            return NotImplemented
        ring, a, b = _join(self, other)
        if ring is None:
            return NotImplemented
        return Poly(ring, a * b)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        return Poly(self.ring, self._p ** k)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, flint.fmpq)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return Poly(self.ring, self._p / _fmpq(other))
        if isinstance(other, (Poly, RatFn)):
            return RatFn(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        return RatFn(self.ring.coerce(other)) / self

    def __eq__(self, other):
        if isinstance(other, Poly):
            if other.ring.n != self.ring.n:
                return False
            return self._p == other._p
        if isinstance(other, (int, Fraction)):
            return self._p == _fmpq(other)
        if isinstance(other, RatFn):
            return other == self
        return NotImplemented

    def __hash__(self):
        return hash(self._key())

    # calculus
    def diff(self, d: "Derivation | str") -> "Poly":
        d = Derivation.coerce(d)
        n = self.ring.n
        if d.kind == "y":
            self.ring._check_index(d.index)
            return Poly(self.ring, self._p.derivative(n + d.index))
        self.ring._check_index(d.index)
        out = self._p.derivative(d.index)
        ag = self.ring.alpha_grad(d.index)
        if ag is not None and self.has_t():
            gens = self.ring.ctx.gens()
            out = out + ag * gens[2 * n] * self._p.derivative(2 * n)
        return Poly(self.ring, out)

    def dx(self, i: int) -> "Poly":
        return self.diff(Derivation("x", i))

    def dy(self, i: int) -> "Poly":
        return self.diff(Derivation("y", i))

    def grad_y(self):
        return [self.dy(i) for i in range(self.ring.n)]

    def grad_x(self):
        return [self.dx(i) for i in range(self.ring.n)]

    def contract_x(self) -> "Poly":
        """``p_0 = p_{x^k} y^k`` (the subscript-0 operation)."""
        ys = self.ring.ys()
        out = self.ring.zero
        for k in range(self.ring.n):
            out = out + self.dx(k) * ys[k]
        return out

    def euler_y(self) -> "Poly":
        ys = self.ring.ys()
        out = self.ring.zero
        for k in range(self.ring.n):
            out = out + self.dy(k) * ys[k]
        return out

    # division
    def gcd(self, other: "Poly") -> "Poly":
        return poly_gcd(self, other)

    def exact_div(self, other: "Poly") -> "Poly | None":
        return poly_divides(other, self)

    def primitive(self) -> "Poly":
        """Integer-coefficient primitive associate with positive leading coefficient."""
        if self.is_zero():
            return self
        coeffs = self.coefficients()
        den = 1
        for c in coeffs:
            den = den * c.denominator // _gcd_int(den, c.denominator)
        g = 0
        for c in coeffs:
            g = _gcd_int(g, abs(c.numerator * (den // c.denominator)))
        scale = Fraction(den, g)
        if coeffs[0] < 0:
            scale = -scale
        return Poly(self.ring, self._p * _fmpq(scale))

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return Poly(self.ring, self._p / self._p.leading_coefficient())

    # substitution / evaluation
    def subs_t(self, value) -> "Poly":
        """Replace the generator t by a polynomial (or constant)."""
        if not self.has_t():
            return self
        gens = list(self.ring.ctx.gens())
        gens[-1] = self.ring.coerce(value)._p
        return Poly(self.ring, self._p.compose(*gens))

    def eval_exact(self, x, y, t=1) -> Fraction:
        vals = [_fmpq(v) for v in list(x) + list(y)] + [_fmpq(t)]
        return _frac(self._p(*vals))

    def _compile(self):
        if self._compiled is None:
            terms = list(self._p.terms())
            if terms:
                exps = np.array([m for m, _ in terms], dtype=np.int64)
                coeffs = np.array([float(_frac(c)) for _, c in terms])
            else:
                exps = np.zeros((0, self.ring.nvars), dtype=np.int64)
                coeffs = np.zeros(0)
            self._compiled = (exps, coeffs)
        return self._compiled

    def eval_float(self, x, y, t=1.0) -> float:
        exps, coeffs = self._compile()
        if not len(coeffs):
            return 0.0
        v = np.concatenate([np.asarray(x, float), np.asarray(y, float), [float(t)]])
        return float(coeffs @ np.prod(v ** exps, axis=1))

    def eval_mp(self, x, y, t=1):
        """Evaluate with mpmath numbers (precision set by the caller's context)."""
        import mpmath
        v = [mpmath.mpf(a) if not isinstance(a, mpmath.mpf) else a for a in list(x) + list(y)] + [t]
        total = mpmath.mpf(0)
        for m, c in self._p.terms():
            term = mpmath.mpf(int(c.p)) / int(c.q)
            for vi, e in zip(v, m):
                if e:
                    term *= vi ** int(e)
            total += term
        return total

    # rendering
    def render(self) -> str:
        if self.is_zero():
            return "0"
        names = self.ring.names
        pieces = []
        for idx, (m, c) in enumerate(self._p.terms()):
            c = _frac(c)
            sign = "-" if c < 0 else "+"
            c = abs(c)
            factors = [names[v] if e == 1 else f"{names[v]}^{e}" for v, e in enumerate(m) if e]
            if c != 1 or not factors:
                factors.insert(0, str(c))
            body = "*".join(factors)
            if idx == 0:
                pieces.append(("-" if sign == "-" else "") + body)
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    __str__ = render

    def __repr__(self):
        return f"Poly({self.render()})"


def _gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor, primitive over Z with positive leading coefficient."""
    ring, pa, pb = _join(a, b)
    if ring is None:
        raise TypeError("poly_gcd expects polynomials")
    g = Poly(ring, pa.gcd(pb))
    if g.is_zero():
        return g
    return g.primitive()


def poly_divides(d: Poly, p: Poly) -> Poly | None:
    """Exact quotient ``p / d`` or ``None`` when d does not divide p."""
    ring, pp, pd = _join(p, d)
    if ring is None:
        raise TypeError("poly_divides expects polynomials")
    if pd.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    q, r = divmod(pp, pd)
    if not r.is_zero():
        return None
    q = Poly(ring, q)
    if _config.checks_enabled():
        assert (Poly(ring, pp) - Poly(ring, pd) * q).is_zero()
    return q


@dataclass(frozen=True)
class Derivation:
    """Partial derivative with respect to ``x^index`` or ``y^index``.

    The rule for the exponential generator is taken from the ring the operand
    lives in: ``d t / d x^i = alpha_{x^i} t`` and ``d t / d y^i = 0``.
    """

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in ("x", "y"):
            raise ValueError("derivation kind must be 'x' or 'y'")
        if self.index < 0:
            raise ValueError("negative variable index")

    @classmethod
    def coerce(cls, d) -> "Derivation":
        if isinstance(d, Derivation):
            return d
        if isinstance(d, str) and len(d) >= 2 and d[0] in "xy" and d[1:].isdigit():
            return cls(d[0], int(d[1:]) - 1)
        raise ValueError(f"not a derivation: {d!r}")

    def __call__(self, obj):
        return obj.diff(self)


class RatFn:
    """Normalised quotient of polynomials.

    The denominator is monic in the canonical order and coprime to the
    numerator, so equal rational functions have equal representations.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _normalized=False):
        if not isinstance(num, Poly):
            raise TypeError("numerator must be a Poly")
        if den is None:
            den = num.ring.one
        elif not isinstance(den, Poly):
            den = num.ring.coerce(den)
        ring, pn, pd = _join(num, den)
        if pd.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not _normalized:
            pn, pd = _normalize(pn, pd)
        self.num = Poly(ring, pn)
        self.den = Poly(ring, pd)

    @property
    def ring(self) -> Ring:
        return self.num.ring

    @classmethod
    def coerce(cls, ring: Ring, other) -> "RatFn":
        if isinstance(other, RatFn):
            if other.ring is ring:
                return other
            return RatFn(ring.coerce(other.num), ring.coerce(other.den), _normalized=True)
        return RatFn(ring.coerce(other), ring.one, _normalized=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def _other(self, other):
        if isinstance(other, RatFn):
            if other.ring is self.ring:
                return self, other
            ring, _, _ = _join(self.num, other.num)
            return RatFn.coerce(ring, self), RatFn.coerce(ring, other)
        if isinstance(other, (Poly, int, Fraction, flint.fmpq)):
            if isinstance(other, Poly) and other.ring is not self.ring:
                ring, _, _ = _join(self.num, other)
                return RatFn.coerce(ring, self), RatFn.coerce(ring, other)
            return self, RatFn.coerce(self.ring, other)
        return None, None

    def __add__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        if b.num.is_zero():
            return a
        if a.num.is_zero():
            return b
        if a.den._p == b.den._p:
            return RatFn(a.num + b.num, a.den)
        g = a.den._p.gcd(b.den._p)
        da, db = a.den._p / g, b.den._p / g
        num = a.num._p * db + b.num._p * da
        den = a.den._p * db
        pn, pd = _normalize(num, den)
        return RatFn(Poly(a.ring, pn), Poly(a.ring, pd), _normalized=True)

    __radd__ = __add__

    def __neg__(self):
        return RatFn(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return b + (-a)

    def __mul__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        if a.num.is_zero() or b.num.is_zero():
            return RatFn(a.ring.zero, a.ring.one, _normalized=True)
        g1 = a.num._p.gcd(b.den._p)
        g2 = b.num._p.gcd(a.den._p)
        num = (a.num._p / g1) * (b.num._p / g2)
        den = (a.den._p / g2) * (b.den._p / g1)
        lc = den.leading_coefficient()
        return RatFn(Poly(a.ring, num / lc), Poly(a.ring, den / lc), _normalized=True)

    __rmul__ = __mul__

    def inverse(self) -> "RatFn":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFn(self.den, self.num)

    def __truediv__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return b * a.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise ValueError("integer exponent required")
        if k < 0:
            return self.inverse() ** (-k)
        return RatFn(self.num ** k, self.den ** k, _normalized=True)

    def __eq__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return a.num._p == b.num._p and a.den._p == b.den._p

    def __hash__(self):
        return hash((self.num._key(), self.den._key()))

    def diff(self, d) -> "RatFn":
        d = Derivation.coerce(d)
        dn = self.num.diff(d)
        if self.den.is_constant():
            return RatFn(dn, self.den, _normalized=True)
        dd = self.den.diff(d)
        if dd.is_zero():
            return RatFn(dn, self.den)
        # d(N/D) = (N' D/g - N D'/g) / (D D/g) with g = gcd(D, D')
        g = self.den._p.gcd(dd._p)
        num = dn._p * (self.den._p / g) - self.num._p * (dd._p / g)
        den = self.den._p * (self.den._p / g)
        pn, pd = _normalize(num, den)
        return RatFn(Poly(self.ring, pn), Poly(self.ring, pd), _normalized=True)

    def dx(self, i):
        return self.diff(Derivation("x", i))

    def dy(self, i):
        return self.diff(Derivation("y", i))

    def subs_t(self, value) -> "RatFn":
        return RatFn(self.num.subs_t(value), self.den.subs_t(value))

    def ydeg(self) -> int:
        """Homogeneity degree in y (numerator minus denominator), assuming homogeneity."""
        if self.num.is_zero():
            return 0
        return self.num.ydeg() - self.den.ydeg()

    def is_y_homogeneous(self) -> bool:
        return self.num.is_y_homogeneous() and self.den.is_y_homogeneous()

    def eval_exact(self, x, y, t=1) -> Fraction:
        d = self.den.eval_exact(x, y, t)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.eval_exact(x, y, t) / d

    def eval_float(self, x, y, t=1.0) -> float:
        d = self.den.eval_float(x, y, t)
        if abs(d) < 1e-14:
            raise ZeroDivisionError("denominator below 1e-14 at the evaluation point")
        return self.num.eval_float(x, y, t) / d

    def eval_mp(self, x, y, t=1):
        return self.num.eval_mp(x, y, t) / self.den.eval_mp(x, y, t)

    def render(self) -> str:
        if self.den.is_constant() and self.den.leading_coefficient() == 1:
            return self.num.render()
        return f"({self.num.render()})/({self.den.render()})"

    __str__ = render

    def __repr__(self):
        return f"RatFn({self.render()})"


def _normalize(pn, pd):
    if pn.is_zero():
        ctx = pd.context()
        return ctx.from_dict({}), ctx.from_dict({(0,) * ctx.nvars(): 1})
    g = pn.gcd(pd)
    if not g.is_one():
        pn = pn / g
        pd = pd / g
    lc = pd.leading_coefficient()
    if lc != 1:
        pn = pn / lc
        pd = pd / lc
    return pn, pd
