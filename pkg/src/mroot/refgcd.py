"""Reference multivariate GCD by recursive primitive-part Euclid.

Pure Python over ``dict[exponent tuple, Fraction]``; slow but independent of
FLINT, so the test-suite uses it to cross-check :func:`mroot.polyalg.poly_gcd`
on small inputs.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

from .polyalg import Poly


def _strip(p):
    return {k: v for k, v in p.items() if v}


def _deg(p, v):
    return max((k[v] for k in p), default=-1)


def _coeffs_in(p, v):
    """Split p as a polynomial in variable v: {power: coefficient dict}."""
    out = {}
    for k, c in p.items():
        e = k[v]
        kk = k[:v] + (0,) + k[v + 1:]
        out.setdefault(e, {})[kk] = c
    return out


def _mul(a, b):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = tuple(i + j for i, j in zip(ka, kb))
            out[k] = out.get(k, 0) + ca * cb
    return _strip(out)


def _add(a, b, scale=1):
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, 0) + scale * c
    return _strip(out)


def _shift(p, v, e):
    return {k[:v] + (k[v] + e,) + k[v + 1:]: c for k, c in p.items()}


def _exact_div(a, b, nv):
    """Exact multivariate division (b must divide a); returns quotient or None."""
    if not b:
        raise ZeroDivisionError
    q = {}
    r = dict(a)
    lead_b = max(b)  # lex-leading monomial
    cb = b[lead_b]
    while r:
        lead_r = max(r)
        if any(i < j for i, j in zip(lead_r, lead_b)):
            return None
        k = tuple(i - j for i, j in zip(lead_r, lead_b))
        c = r[lead_r] / cb
        q[k] = c
        r = _add(r, _mul({k: c}, b), -1)
    return q


def _content(p, v, nv):
    """GCD of the coefficients of p viewed as a polynomial in variable v."""
    g = {}
    for coeff in _coeffs_in(p, v).values():
        g = _gcd_rec(g, coeff, nv)
        if len(g) == 1 and all(e == 0 for e in next(iter(g))):
            break
    return g


def _prem(a, b, v):
    """Pseudo-remainder of a by b in variable v."""
    db = _deg(b, v)
    cb = _coeffs_in(b, v)
    lc = cb[db]
    r = dict(a)
    while r and _deg(r, v) >= db:
        dr = _deg(r, v)
        lr = _coeffs_in(r, v)[dr]
        r = _add(_mul(r, lc), _mul(_shift(lr, v, dr - db), b), -1)
    return r


def _normalize_rational(p):
    if not p:
        return p
    den = 1
    for c in p.values():
        den = lcm(den, c.denominator)
    num = 0
    for c in p.values():
        num = gcd(num, (c * den).numerator)
    scale = Fraction(den, num)
    lead = p[max(p)]
    if lead < 0:
        scale = -scale
    return {k: c * scale for k, c in p.items()}


def _gcd_rec(a, b, nv):
    if not a:
        return _normalize_rational(b)
    if not b:
        return _normalize_rational(a)
    # pick the first variable present in either operand
    v = next((i for i in range(nv) if _deg(a, i) > 0 or _deg(b, i) > 0), None)
    if v is None:
        return {(0,) * nv: Fraction(1)}
    ca, cb = _content(a, v, nv), _content(b, v, nv)
    cont = _gcd_rec(ca, cb, nv)
    pa = _normalize_rational(_exact_div(a, ca, nv))
    pb = _normalize_rational(_exact_div(b, cb, nv))
    if _deg(pa, v) < _deg(pb, v):
        pa, pb = pb, pa
    while pb and _deg(pb, v) > 0:
        r = _prem(pa, pb, v)
        pa = pb
        if not r:
            pb = {}
            break
        pb = _normalize_rational(_exact_div(r, _content(r, v, nv), nv))
    if pb:  # degree-0 remainder in v: primitive parts are coprime in v
        g = {(0,) * nv: Fraction(1)}
    else:
        g = _exact_div(pa, _content(pa, v, nv), nv)
    return _normalize_rational(_mul(g, cont))


def euclid_gcd(a: Poly, b: Poly) -> Poly:
    """GCD by recursive primitive-part Euclid, normalised like ``poly_gcd``."""
    if a.ring.n != b.ring.n:
        raise ValueError("dimension mismatch")
    nv = a.ring.nvars
    da = {tuple(m.xexp) + tuple(m.yexp) + (m.texp,): c for m, c in a.terms()}
    db = {tuple(m.xexp) + tuple(m.yexp) + (m.texp,): c for m, c in b.terms()}
    g = _gcd_rec(da, db, nv)
    ring = a.ring
    return ring.from_terms((c, k[:ring.n], k[ring.n:2 * ring.n], k[-1]) for k, c in g.items()).primitive()
