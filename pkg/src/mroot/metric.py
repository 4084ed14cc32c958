"""Metric descriptions and the fundamental-tensor layer."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.stats import norm, qmc

from .aexpr import AContext, AExpr, IndependenceError
from .polyalg import DimensionError, Poly, RatFn, Ring
from .upsilon import UContext, UExpr
from .verdict import FAIL, PASS, UNDECIDABLE, CheckVerdict

__all__ = [
    "MetricError", "MRootMetric", "GeneralizedMRoot", "ConformalBetaChange",
    "ADerivatives", "TensorGrid", "a_derivatives", "fundamental_tensor",
    "identity_suite", "generalized_tensor", "screen", "ScreenResult",
    "det_adj", "zero_status",
]


class MetricError(ValueError):
    """The metric data is rejected (wrong degree, singular Hessian, ...)."""


def zero_status(expr) -> str:
    """``pass`` if the expression vanishes, ``fail`` if not, else ``undecidable``."""
    try:
        return PASS if expr.is_zero() else FAIL
    except IndependenceError:
        return UNDECIDABLE


def det_adj(M):
    """Determinant and adjugate of a small square matrix of Poly (cofactors)."""
    n = len(M)

    def det(rows, cols):
        if len(rows) == 1:
            return M[rows[0]][cols[0]]
        r0 = rows[0]
        acc = None
        for k, c in enumerate(cols):
            if M[r0][c].is_zero():
                continue
            sub = det(rows[1:], cols[:k] + cols[k + 1:])
            term = M[r0][c] * sub
            if k % 2:
                term = -term
            acc = term if acc is None else acc + term
        return acc if acc is not None else M[r0][cols[0]].ring.zero

    idx = list(range(n))
    D = det(idx, idx)
    if n == 1:
        return D, [[M[0][0].ring.one]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = det(idx[:j] + idx[j + 1:], idx[:i] + idx[i + 1:])
            adj[i][j] = -minor if (i + j) % 2 else minor
    return D, adj


class _Sampler:
    """Quasi-random admissible points: x in a box, y on the unit sphere."""

    def __init__(self, metric, box=0.3):
        self.metric = metric
        self.box = box

    def __call__(self, count, seed=0):
        n = self.metric.n
        eng = qmc.Halton(d=2 * n, seed=seed)
        pts = []
        for _ in range(40):
            u = eng.random(max(4 * count, 16))
            for row in u:
                x = self.box * (2 * row[:n] - 1)
                y = norm.ppf(np.clip(row[n:], 1e-9, 1 - 1e-9))
                nr = np.linalg.norm(y)
                if nr < 1e-12:
                    continue
                y = y / nr
                if self.metric.admissible(x, y):
                    pts.append((x, y))
                    if len(pts) == count:
                        return pts
        return pts


class MRootMetric:
    """``F = A**(1/m)`` with ``A`` y-homogeneous of degree ``m``."""

    kind = "m-th root"

    def __init__(self, A: Poly, m: int | None = None, name: str = ""):
        if A.has_t() or A.ring.alpha is not None:
            raise MetricError("A must not involve the exponential generator")
        if A.is_zero():
            raise MetricError("A must be nonzero")
        if m is None:
            m = A.ydeg()
        if m < 2:
            raise MetricError("root order must be at least 2")
        if not A.is_y_homogeneous(m):
            raise MetricError(f"A is not y-homogeneous of degree {m}")
        self.A = A
        self.m = m
        self.n = A.ring.n
        self.ring = A.ring
        self.name = name

    def __repr__(self):
        return f"MRootMetric(n={self.n}, m={self.m}, A={self.A})"

    @cached_property
    def ctx(self) -> AContext:
        return AContext(self.A, self.m, sampler=_Sampler(self))

    @cached_property
    def uctx(self) -> UContext:
        return UContext(self.ctx, None)

    @property
    def F(self) -> AExpr:
        return self.ctx.F

    def F_u(self) -> UExpr:
        return self.uctx.Fbase

    @cached_property
    def derivs(self) -> "ADerivatives":
        return a_derivatives(self)

    @cached_property
    def tensor(self) -> "TensorGrid":
        return fundamental_tensor(self)

    def is_x_independent(self) -> bool:
        return self.A.xdeg() == 0

    # numerics
    def F_value(self, x, y) -> float:
        a = self.A.eval_float(x, y)
        if a <= 0:
            raise ValueError("A must be positive")
        return a ** (1.0 / self.m)

    def hessian_value(self, x, y):
        n = self.n
        return np.array([[self.derivs.Aij[i][j].eval_float(x, y) for j in range(n)] for i in range(n)])

    def admissible(self, x, y) -> bool:
        """A > 0, A_ij positive definite and g_ij positive definite."""
        if self.A.eval_float(x, y) <= 1e-9:
            return False
        try:
            if np.linalg.eigvalsh(self.hessian_value(x, y)).min() <= 1e-9:
                return False
        except np.linalg.LinAlgError:
            return False
        return self.g_definite(x, y)

    def g_value(self, x, y):
        n = self.n
        a = self.A.eval_float(x, y)
        Ai = np.array([self.derivs.Ai[i].eval_float(x, y) for i in range(n)])
        H = self.hessian_value(x, y)
        m = self.m
        return a ** (2.0 / m - 2) / m ** 2 * (m * a * H + (2 - m) * np.outer(Ai, Ai))

    def g_definite(self, x, y) -> bool:
        if self.A.eval_float(x, y) <= 1e-9:
            return False
        try:
            return bool(np.linalg.eigvalsh(self.g_value(x, y)).min() > 1e-9)
        except (np.linalg.LinAlgError, ValueError):
            return False


class GeneralizedMRoot(MRootMetric):
    """``F = sqrt(A**(2/m) + B)`` with ``B`` a quadratic form in y."""

    kind = "generalized m-th root"

    def __init__(self, A: Poly, B: Poly, m: int | None = None, name: str = ""):
        super().__init__(A, m, name)
        B = self.ring.coerce(B)
        if not B.is_zero() and not B.is_y_homogeneous(2):
            raise MetricError("B must be a quadratic form in y")
        if B.has_t():
            raise MetricError("B must not involve the exponential generator")
        self.B = B

    def __repr__(self):
        return f"GeneralizedMRoot(n={self.n}, m={self.m}, A={self.A}, B={self.B})"

    @cached_property
    def ctx(self) -> AContext:
        return AContext(self.A, self.m, denom=2 * self.m, sampler=_Sampler(self))

    @cached_property
    def uctx(self) -> UContext:
        return UContext(self.ctx, self.B)

    @property
    def F(self):
        if self.B.is_zero():
            return self.ctx.F
        raise TypeError("F of a generalized metric is a UExpr; use F_u()")

    def F_value(self, x, y) -> float:
        a = self.A.eval_float(x, y)
        u = a ** (2.0 / self.m) + self.B.eval_float(x, y)
        if a <= 0 or u <= 0:
            raise ValueError("F undefined at this point")
        return u ** 0.5

    def admissible(self, x, y) -> bool:
        if self.A.eval_float(x, y) <= 1e-9:
            return False
        if self.B.eval_float(x, y) + self.A.eval_float(x, y) ** (2 / self.m) <= 1e-9:
            return False
        return self.g_definite(x, y)

    @cached_property
    def g_exprs(self):
        """``g_ij = 1/2 d_i d_j Upsilon`` as AExpr."""
        U = self.uctx.Ups
        Ui = [U.dy(i) for i in range(self.n)]
        return [[Ui[i].dy(j) * Fraction(1, 2) for j in range(self.n)] for i in range(self.n)]

    def g_value(self, x, y):
        G = self.g_exprs
        return np.array([[G[i][j].eval_float(x, y) for j in range(self.n)] for i in range(self.n)])


class ConformalBetaChange:
    """``Fbar = exp(alpha) F + beta`` over an m-th root or generalized base."""

    kind = "conformal beta-change"

    def __init__(self, base: MRootMetric, alpha: Poly | None = None, beta=None, name: str = ""):
        self.base = base
        n = base.n
        R0 = base.ring
        alpha = R0.zero if alpha is None else R0.coerce(alpha)
        if alpha.ydeg() > 0 or alpha.has_t():
            raise MetricError("alpha must depend on x only")
        beta = [R0.zero] * n if beta is None else [R0.coerce(b) for b in beta]
        if len(beta) != n:
            raise DimensionError("beta needs one coefficient per dimension")
        for b in beta:
            if b.ydeg() > 0 or b.has_t():
                raise MetricError("beta coefficients must depend on x only")
        self.alpha = alpha
        self.b = beta
        self.n = n
        self.m = base.m
        self.A = base.A
        self.B = getattr(base, "B", R0.zero)
        self.name = name
        # ring carrying t = exp(alpha)
        self.ring = Ring(n, alpha) if not alpha.is_zero() else R0

    def __repr__(self):
        return f"ConformalBetaChange(base={self.base!r}, alpha={self.alpha}, b={self.b})"

    @cached_property
    def beta(self) -> Poly:
        ys = self.ring.ys()
        acc = self.ring.zero
        for bi, yi in zip(self.b, ys):
            acc = acc + self.ring.coerce(bi) * yi
        return acc

    @cached_property
    def ctx(self) -> AContext:
        return AContext(self.ring.coerce(self.A), self.m, denom=2 * self.m, sampler=_Sampler(self))

    @cached_property
    def uctx(self) -> UContext:
        return UContext(self.ctx, self.ring.coerce(self.B))

    @property
    def t(self) -> Poly:
        return self.ring.t if self.ring.alpha is not None else self.ring.one

    def F_u(self) -> UExpr:
        """``Fbar = t Upsilon^(1/2) + beta``."""
        u = self.uctx
        return u.Fbase * RatFn(self.t) + u.make(RatFn(self.beta))

    def F2_u(self) -> UExpr:
        u = self.uctx
        t = RatFn(self.t)
        beta = RatFn(self.beta)
        return (u.make(u.Ups * (t * t)) + u.Fbase * (t * beta * 2) + u.make(beta * beta))

    def is_trivial(self) -> bool:
        return self.alpha.is_zero() and all(b.is_zero() for b in self.b)

    def F_value(self, x, y) -> float:
        x = np.asarray(x, float)
        a = self.alpha.eval_float(x, np.zeros(self.n))
        beta = sum(b.eval_float(x, y) * yi for b, yi in zip(self.b, y))
        return float(np.exp(a)) * self.base.F_value(x, y) + beta

    def beta_sup(self, x, samples: int = 256) -> float:
        """``sup |beta| / (e^alpha F)`` over sampled unit directions at ``x``."""
        rng = np.random.default_rng(0)
        a = float(np.exp(self.alpha.eval_float(x, np.zeros(self.n))))
        best = 0.0
        for _ in range(samples):
            y = rng.normal(size=self.n)
            y /= np.linalg.norm(y)
            try:
                f = a * self.base.F_value(x, y)
            except ValueError:
                continue
            beta = sum(b.eval_float(x, y) * yi for b, yi in zip(self.b, y))
            best = max(best, abs(beta) / f)
        return best

    def admissible(self, x, y) -> bool:
        if not self.base.admissible(x, y):
            return False
        try:
            return self.F_value(x, y) > 1e-9
        except ValueError:
            return False

    @cached_property
    def g_exprs(self):
        """``g_ij = 1/2 d_i d_j Fbar^2`` in the Upsilon layer."""
        X = self.F2_u()
        Xi = [X.dy(i) for i in range(self.n)]
        return [[Xi[i].dy(j) * Fraction(1, 2) for j in range(self.n)] for i in range(self.n)]

    def g_value(self, x, y):
        G = self.g_exprs
        return np.array([[G[i][j].eval_float(x, y) for j in range(self.n)] for i in range(self.n)])

    def g_definite(self, x, y) -> bool:
        try:
            return bool(np.linalg.eigvalsh(self.g_value(x, y)).min() > 1e-9)
        except (np.linalg.LinAlgError, ValueError, ZeroDivisionError):
            return False


@dataclass
class ADerivatives:
    Ai: list
    Aij: list
    det: Poly
    adj: list
    Ainv: list  # RatFn matrix


def a_derivatives(M: MRootMetric) -> ADerivatives:
    A = M.A
    n = M.n
    Ai = [A.dy(i) for i in range(n)]
    Aij = [[Ai[i].dy(j) for j in range(n)] for i in range(n)]
    D, adj = det_adj(Aij)
    if D.is_zero():
        raise MetricError("A_ij is identically singular")
    Ainv = [[RatFn(adj[i][j], D) for j in range(n)] for i in range(n)]
    return ADerivatives(Ai, Aij, D, adj, Ainv)


@dataclass
class TensorGrid:
    Ai: list
    Aij: list
    Ainv: list
    g: list
    ginv: list
    ylow: list
    h: list


def fundamental_tensor(M: MRootMetric) -> TensorGrid:
    if isinstance(M, GeneralizedMRoot) and not M.B.is_zero():
        raise TypeError("fundamental_tensor covers m-th root metrics; use generalized_tensor")
    d = M.derivs
    ctx = M.ctx
    n, m, A = M.n, M.m, M.A
    ys = M.ring.ys()
    e_g = Fraction(2, m) - 2
    g = [[None] * n for _ in range(n)]
    ginv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            num = A * d.Aij[i][j] * m + d.Ai[i] * d.Ai[j] * (2 - m)
            g[i][j] = g[j][i] = ctx.make(RatFn(num) / (m * m), e_g)
            inv = RatFn(A * m) * d.Ainv[i][j] + RatFn(ys[i] * ys[j]) * Fraction(m - 2, m - 1)
            ginv[i][j] = ginv[j][i] = ctx.make(inv, Fraction(-2, m))
    ylow = [ctx.make(RatFn(d.Ai[i]) / m, Fraction(2, m) - 1) for i in range(n)]
    Finv2 = ctx.power(Fraction(-2, m))
    h = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            h[i][j] = h[j][i] = g[i][j] - Finv2 * ylow[i] * ylow[j]
    return TensorGrid(d.Ai, d.Aij, d.Ainv, g, ginv, ylow, h)


def identity_suite(M: MRootMetric, Ai=None) -> CheckVerdict:
    """The five contraction identities plus ``g^{ik} g_{kj} = delta``.

    ``Ai`` overrides the first derivatives (used for mutation tests).
    """
    n, m, A = M.n, M.m, M.A
    ctx = M.ctx
    ys = M.ring.ys()
    d = M.derivs
    Ai = d.Ai if Ai is None else Ai
    v = CheckVerdict(f"identities n={n} m={m}")

    r = sum((ys[i] * Ai[i] for i in range(n)), M.ring.zero) - A * m
    v.add("y^i A_i = m A", r.is_zero(), residual=RatFn(r))

    res = []
    for j in range(n):
        rj = sum((ys[i] * d.Aij[i][j] for i in range(n)), M.ring.zero) - Ai[j] * (m - 1)
        res.append(rj)
    bad = [r for r in res if not r.is_zero()]
    v.add("y^i A_ij = (m-1) A_j", not bad, residual=RatFn(bad[0]) if bad else None)

    bad = None
    for j in range(n):
        rj = sum((d.Ainv[i][j] * Ai[i] for i in range(n)), RatFn(M.ring.zero)) - RatFn(ys[j]) / (m - 1)
        if not rj.is_zero():
            bad = rj
            break
    v.add("A^ij A_i = y^j/(m-1)", bad is None, residual=bad)

    r = RatFn(M.ring.zero)
    for i in range(n):
        for j in range(n):
            r = r + d.Ainv[i][j] * (Ai[i] * Ai[j])
    r = r - RatFn(A * m) / (m - 1)
    v.add("A_i A_j A^ij = m A/(m-1)", r.is_zero(), residual=r)

    T = M.tensor
    worst = None
    status = PASS
    for i in range(n):
        yi = ctx.zero
        for j in range(n):
            yi = yi + T.g[i][j] * ys[j]
        target = ctx.make(RatFn(Ai[i]) / m, Fraction(2, m) - 1)
        st = zero_status(yi - target)
        if st != PASS:
            status, worst = st, yi - target
            break
    v.add("g_ij y^j = (1/m) A^(2/m-1) A_i", status, residual=worst)

    status, worst = PASS, None
    for i in range(n):
        for j in range(n):
            acc = ctx.zero
            for k in range(n):
                acc = acc + T.ginv[i][k] * T.g[k][j]
            if i == j:
                acc = acc - 1
            st = zero_status(acc)
            if st != PASS:
                status, worst = st, acc
                break
        if worst is not None:
            break
    v.add("g^ik g_kj = delta", status, residual=worst)
    return v


def generalized_tensor(G) -> dict:
    """``Upsilon``, ``Upsilon_p`` and ``Upsilon_0p`` as AExpr lists."""
    uctx = G.uctx
    n = G.n
    U = uctx.Ups
    Up = [U.dy(p) for p in range(n)]
    U0 = U.contract_x()
    U0p = [U0.dy(p) - U.dx(p) for p in range(n)]
    Uxp = [U.dx(p) for p in range(n)]
    return {"Ups": U, "Ups_p": Up, "Ups_0": U0, "Ups_0p": U0p, "Ups_x": Uxp}


@dataclass
class ScreenResult:
    ok: bool
    admissible: int
    total: int
    reason: str = ""


def screen(M, samples: int = 64, seed: int = 0, min_admissible: int = 4) -> ScreenResult:
    """Nondegeneracy screen: det(A_ij) nonzero and enough admissible points."""
    try:
        M.derivs
    except MetricError as exc:
        return ScreenResult(False, 0, samples, str(exc))
    n = M.n
    eng = qmc.Halton(d=2 * n, seed=seed)
    u = eng.random(samples)
    good = 0
    for row in u:
        x = 0.3 * (2 * row[:n] - 1)
        y = norm.ppf(np.clip(row[n:], 1e-9, 1 - 1e-9))
        if np.linalg.norm(y) < 1e-12:
            continue
        y = y / np.linalg.norm(y)
        if M.admissible(x, y):
            good += 1
    if good < min_admissible:
        return ScreenResult(False, good, samples, f"only {good} of {samples} sampled points admissible")
    return ScreenResult(True, good, samples)
