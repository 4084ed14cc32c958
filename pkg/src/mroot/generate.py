"""Named example metrics and a seeded random metric generator."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .metric import ConformalBetaChange, GeneralizedMRoot, MetricError, MRootMetric, screen
from .polyalg import Ring

__all__ = [
    "quartic", "quartic_x", "uq", "euclidean", "conformal_riemannian", "cubic",
    "minkowski_beta", "cascade_instance", "random_metric", "random_metrics",
    "dually_flat_instance", "dually_flat_mutations", "y_monomials",
    "minkowski_generalized", "closed_beta_minkowski",
]


def _sq(R):
    return sum((y * y for y in R.ys()), R.zero)


def quartic(n=2):
    R = Ring(n)
    return MRootMetric(sum((y ** 4 for y in R.ys()), R.zero), 4, name="quartic")


def quartic_x():
    R = Ring(2)
    x1 = R.x(0)
    y1, y2 = R.ys()
    return MRootMetric(y1 ** 4 + y2 ** 4 + x1 * y1 ** 2 * y2 ** 2, 4, name="quartic_x")


def uq(m=4):
    """``A = (1 + x1) Q`` with ``Q = y1^m + y2^m``."""
    R = Ring(2)
    u = R.one + R.x(0)
    y1, y2 = R.ys()
    return MRootMetric(u * (y1 ** m + y2 ** m), m, name="uq")


def euclidean(n=2):
    R = Ring(n)
    return MRootMetric(_sq(R), 2, name="euclidean")


def conformal_riemannian(n=2):
    R = Ring(n)
    return MRootMetric((R.one + R.x(0)) * _sq(R), 2, name="conformal_riemannian")


def cubic():
    R = Ring(2)
    y1, y2 = R.ys()
    return MRootMetric(y1 ** 3 + y2 ** 3, 3, name="cubic")


def minkowski_beta(alpha=Fraction(1, 3), b=(Fraction(1, 5), Fraction(1, 7))):
    """Minkowski generalized base with constant alpha and beta coefficients."""
    R = Ring(2)
    y1, y2 = R.ys()
    G = GeneralizedMRoot(y1 ** 4 + y2 ** 4 + y1 ** 2 * y2 ** 2, y1 ** 2 + y2 ** 2, 4, name="minkowski_beta")
    return ConformalBetaChange(G, R.const(alpha), [R.const(c) for c in b], name="minkowski_beta")


dually_flat_instance = minkowski_beta


def dually_flat_mutations():
    """Twenty single-coefficient perturbations of :func:`dually_flat_instance`."""
    R = Ring(2)
    x1, x2 = R.xs()
    y1, y2 = R.ys()
    A0 = y1 ** 4 + y2 ** 4 + y1 ** 2 * y2 ** 2
    B0 = y1 ** 2 + y2 ** 2
    a0 = R.const(Fraction(1, 3))
    b0 = [R.const(Fraction(1, 5)), R.const(Fraction(1, 7))]
    h = Fraction(1, 10)
    out = []
    # A coefficients
    for mono in (y1 ** 4, y2 ** 4, y1 ** 2 * y2 ** 2, y1 ** 3 * y2):
        for xf in (x1, x2):
            out.append(("A", A0 + mono * xf * h, B0, a0, b0))
    # B coefficients
    for mono, xf in ((y1 ** 2, x1), (y2 ** 2, x1), (y1 * y2, x1), (y1 * y2, x2)):
        out.append(("B", A0, B0 + mono * xf * h, a0, b0))
    # alpha
    for xf in (x1, x2, x1 * x2):
        out.append(("alpha", A0, B0, a0 + xf * h, b0))
    # beta coefficients
    for i, xf in ((0, x1), (0, x2), (1, x1), (1, x2), (1, x1 * x1)):
        b = list(b0)
        b[i] = b[i] + xf * h
        out.append((f"b{i + 1}", A0, B0, a0, b))
    out = out[:20]
    return [(label, ConformalBetaChange(GeneralizedMRoot(A, B, 4), a, b, name=f"mutation-{k}-{label}"))
            for k, (label, A, B, a, b) in enumerate(out)]


def cascade_instance(m=5, v_power=2):
    """``A = (1+x1)^m Q``, ``B = (1+x1)^v_power |y|^2`` with ``Q = y1^m + y2^m``."""
    R = Ring(2)
    u = R.one + R.x(0)
    y1, y2 = R.ys()
    A = u ** m * (y1 ** m + y2 ** m)
    B = u ** v_power * (y1 ** 2 + y2 ** 2)
    return ConformalBetaChange(GeneralizedMRoot(A, B, m), name="cascade")


def minkowski_generalized(m=6):
    """x-independent generalized base, no change: the cascade passes with theta = 0."""
    R = Ring(2)
    y1, y2 = R.ys()
    A = y1 ** m + y2 ** m + y1 ** 2 * y2 ** (m - 2)
    return ConformalBetaChange(GeneralizedMRoot(A, y1 ** 2 + y2 ** 2, m), name="minkowski_generalized")


def closed_beta_minkowski(m=6):
    """Minkowski generalized base plus the exact 1-form ``d(x1^2 + x1 x2)``."""
    R = Ring(2)
    x1, x2 = R.xs()
    y1, y2 = R.ys()
    A = y1 ** m + y2 ** m + y1 ** 2 * y2 ** (m - 2)
    G = GeneralizedMRoot(A, y1 ** 2 + y2 ** 2, m)
    return ConformalBetaChange(G, None, [x1 * 2 + x2, x1], name="closed_beta_minkowski")


def y_monomials(n, m):
    for c in itertools.combinations_with_replacement(range(n), m):
        e = [0] * n
        for i in c:
            e[i] += 1
        yield tuple(e)


def _x_monomials(n, maxdeg):
    out = []
    for d in range(maxdeg + 1):
        for c in itertools.combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in c:
                e[i] += 1
            out.append(tuple(e))
    return out


def random_metric(rng, n, m, max_terms=6, coeff=3, xdeg=2):
    """Diagonal ``c_i (y^i)^m`` plus random monomials; at most ``max_terms`` terms."""
    R = Ring(n)
    terms = [(int(rng.integers(1, coeff + 1)), (0,) * n, tuple(m if j == i else 0 for j in range(n)))
             for i in range(n)]
    ymons = list(y_monomials(n, m))
    xmons = _x_monomials(n, xdeg)
    for _ in range(int(rng.integers(1, max_terms - n + 1))):
        c = int(rng.integers(-coeff, coeff + 1))
        if c == 0:
            continue
        terms.append((c, xmons[int(rng.integers(len(xmons)))], ymons[int(rng.integers(len(ymons)))]))
    A = R.from_terms(terms)
    return MRootMetric(A, m)


def random_metrics(count, seed=0, ns=(2, 3), ms=(3, 4, 5), **kw):
    """``count`` random metrics passing the nondegeneracy screen."""
    rng = np.random.default_rng(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 50 * count:
            raise RuntimeError("random generator failed to produce enough admissible metrics")
        n = ns[len(out) % len(ns)]
        m = ms[(len(out) // len(ns)) % len(ms)]
        try:
            M = random_metric(rng, n, m, **kw)
        except MetricError:
            continue
        if M.A.ydeg() != m or not M.A.is_y_homogeneous(m):
            continue
        if screen(M, seed=int(rng.integers(1 << 30))).ok:
            out.append(M)
    return out
