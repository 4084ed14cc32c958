"""Floating-point evaluation, finite-difference oracles, geodesics, volumes and the Funk metric."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .aexpr import AExpr
from .metric import ConformalBetaChange, GeneralizedMRoot, MRootMetric
from .polyalg import Derivation, Poly, RatFn
from .upsilon import UExpr

__all__ = [
    "EvalPoint", "eval_at", "admissible_points", "finite_diff_check", "fd_partial", "spray_function", "spray_function_mp",
    "GeodesicTrace", "geodesic_integrate", "VolumeData", "bh_volume_sigma", "SCurvature",
    "s_curvature_numeric", "distortion", "numeric_riemann", "flag_curvature_numeric",
    "FunkValue", "funk_builtin", "funk_validate",
]


@dataclass
class EvalPoint:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, float)
        self.y = np.asarray(self.y, float)


def _t_of(ring, x):
    alpha = ring.alpha
    return 1.0 if alpha is None else math.exp(alpha.eval_float(x, np.zeros(ring.n)))


def eval_at(obj, x, y=None):
    """Evaluate a Poly, RatFn, AExpr, UExpr or nested list of them at ``(x, y)``.

    ``x`` may be an :class:`EvalPoint`, in which case ``y`` is taken from it.
    """
    if isinstance(x, EvalPoint):
        x, y = x.x, x.y
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if isinstance(obj, (list, tuple)):
        return np.array([eval_at(o, x, y) for o in obj])
    if isinstance(obj, (AExpr, UExpr)):
        return obj.eval_float(x, y)
    if isinstance(obj, (Poly, RatFn)):
        return obj.eval_float(x, y, _t_of(obj.ring, x))
    raise TypeError(f"cannot evaluate {type(obj).__name__}")


def _mp_eval(obj, x, y):
    if isinstance(obj, (AExpr, UExpr)):
        return obj.eval_mp(x, y)
    alpha = obj.ring.alpha
    t = 1 if alpha is None else mpmath.exp(alpha.eval_mp(x, [0] * obj.ring.n))
    return obj.eval_mp(x, y, t)


# --- finite differences -----------------------------------------------------

def fd_partial(f, x, y, derivs, h):
    """Nested central differences of ``f(x, y)`` along ``derivs`` (Derivation or "x1"/"y2")."""
    if not derivs:
        return f(x, y)
    d = Derivation.coerce(derivs[0])
    rest = derivs[1:]
    xp, yp = list(x), list(y)
    xm, ym = list(x), list(y)
    if d.kind == "x":
        xp[d.index] += h
        xm[d.index] -= h
    else:
        yp[d.index] += h
        ym[d.index] -= h
    return (fd_partial(f, xp, yp, rest, h) - fd_partial(f, xm, ym, rest, h)) / (2 * h)


def admissible_points(M, count: int, seed: int = 0, cond: float = 1e-3):
    """Sample points where ``M`` is admissible and g is well conditioned.

    Finite-difference stencils need an admissible neighbourhood; requiring the
    eigenvalue ratio of g to exceed ``cond`` keeps them away from directions
    where the Hessian of A degenerates.
    """
    ctx = M.ctx if hasattr(M, "ctx") else M.base.ctx
    pts = []
    batch = 0
    while len(pts) < count and batch < 50:
        for x, y in ctx.sample_points(4 * count, seed + 7919 * batch):
            if not M.admissible(x, y):
                continue
            ev = np.linalg.eigvalsh(M.g_value(x, y))
            if ev[0] > cond * ev[-1]:
                pts.append((x, y))
                if len(pts) == count:
                    break
        batch += 1
    if len(pts) < count:
        raise ValueError(f"found only {len(pts)} well-conditioned admissible points")
    return pts


def finite_diff_check(obj, x, y, derivs, h=None, symbolic=None, dps=40) -> float:
    """Max relative error between symbolic partials of ``obj`` and central differences.

    ``derivs`` is a list of derivative sequences, e.g. ``[("y1",), ("x1", "y2")]``.
    Steps default to 1e-5 for first order and 1e-4 above. Differences are taken in
    ``dps``-digit arithmetic so only the truncation error remains.  Errors are
    normwise: each is scaled by the largest symbolic value of the same order, so
    a component that happens to be nearly zero does not blow up the ratio.
    """
    by_order = {}
    with mpmath.workdps(dps):
        xm = [mpmath.mpf(float(v)) for v in x]
        ym = [mpmath.mpf(float(v)) for v in y]
        for seq in derivs:
            seq = tuple(Derivation.coerce(d) for d in seq)
            step = h if h is not None else (1e-5 if len(seq) == 1 else 1e-4)
            if symbolic is not None and seq in symbolic:
                s = symbolic[seq]
            else:
                s = obj
                for d in seq:
                    s = s.diff(d)
            sv = _mp_eval(s, xm, ym)
            nv = fd_partial(lambda a, b: _mp_eval(obj, a, b), xm, ym, list(seq), mpmath.mpf(step))
            by_order.setdefault(len(seq), []).append((sv, nv))
        worst = 0.0
        for pairs in by_order.values():
            scale = max(max(abs(sv), abs(nv)) for sv, nv in pairs)
            scale = max(scale, mpmath.mpf(1e-12))
            worst = max(worst, max(float(abs(sv - nv) / scale) for sv, nv in pairs))
    return worst


# --- sprays ---------------------------------------------------------------------

def _spray_parts(M):
    """Symbolic ``(g_ij, bracket_l)`` with ``G = 1/4 g^{-1} bracket`` for non-rational sprays."""
    cache = M.__dict__.setdefault("_num_cache", {})
    if "parts" not in cache:
        if isinstance(M, ConformalBetaChange):
            X = M.F2_u()
        else:
            X = M.uctx.Ups
        X0 = X.contract_x()
        brk = [X0.dy(l) - X.dx(l) * 2 for l in range(M.n)]
        cache["parts"] = (M.g_exprs, brk)
    return cache["parts"]


def _plain_base(M):
    if isinstance(M, ConformalBetaChange) and M.is_trivial():
        M = M.base
    if isinstance(M, GeneralizedMRoot) and M.B.is_zero():
        return MRootMetric(M.A, M.m)
    return M


def spray_function(M):
    """Callable ``G(x, y) -> ndarray`` in double precision."""
    from .curvature import spray_mroot
    M = _plain_base(M)
    if type(M) is MRootMetric:
        sp = spray_mroot(M)
        return lambda x, y: np.array([g.eval_float(x, y) for g in sp.G])
    g, brk = _spray_parts(M)
    n = M.n

    def G(x, y):
        gm = np.array([[g[i][j].eval_float(x, y) for j in range(n)] for i in range(n)])
        b = np.array([e.eval_float(x, y) for e in brk])
        return 0.25 * np.linalg.solve(gm, b)
    return G


def spray_function_mp(M):
    """Callable ``G(x, y) -> list of mpf`` at the ambient mpmath precision."""
    from .curvature import spray_mroot
    M = _plain_base(M)
    if type(M) is MRootMetric:
        sp = spray_mroot(M)
        return lambda x, y: [g.eval_mp(x, y) for g in sp.G]
    g, brk = _spray_parts(M)
    n = M.n

    def G(x, y):
        gm = mpmath.matrix([[g[i][j].eval_mp(x, y) for j in range(n)] for i in range(n)])
        b = mpmath.matrix([e.eval_mp(x, y) for e in brk])
        sol = mpmath.lu_solve(gm, b)
        return [sol[i] / 4 for i in range(n)]
    return G


def numeric_riemann(Gmp, x, y, h=1e-12, dps=50):
    """``R^i_k`` from a spray callable by central differences in high precision."""
    n = len(y)
    with mpmath.workdps(dps):
        x = [mpmath.mpf(float(v)) for v in x]
        y = [mpmath.mpf(float(v)) for v in y]
        h = mpmath.mpf(h)
        G0 = Gmp(x, y)

        def comp(seq):
            return fd_partial(lambda a, b: mpmath.matrix(Gmp(a, b)), x, y, list(seq), h)

        Gx = [comp([f"x{k + 1}"]) for k in range(n)]
        Gy = [comp([f"y{k + 1}"]) for k in range(n)]
        Gxy = [[comp([f"x{j + 1}", f"y{k + 1}"]) for k in range(n)] for j in range(n)]
        Gyy = [[comp([f"y{j + 1}", f"y{k + 1}"]) for k in range(n)] for j in range(n)]
        R = np.zeros((n, n))
        for i in range(n):
            for k in range(n):
                acc = 2 * Gx[k][i]
                for j in range(n):
                    acc -= y[j] * Gxy[j][k][i]
                    acc += 2 * G0[j] * Gyy[j][k][i]
                    acc -= Gy[j][i] * Gy[k][j]
                R[i, k] = float(acc)
    return R


def flag_curvature_numeric(M, x, y, u, h=1e-12, dps=50) -> float:
    """Flag curvature from the numeric spray of any supported metric."""
    from .curvature import flag_curvature
    R = numeric_riemann(spray_function_mp(M), x, y, h=h, dps=dps)
    return flag_curvature(M.g_value(x, y), R, y, u)


# --- geodesics ------------------------------------------------------------------

@dataclass
class GeodesicTrace:
    t: np.ndarray
    X: np.ndarray
    V: np.ndarray
    F: np.ndarray
    dt: float
    method: str = "rk4"
    order: int = 4
    truncated: str | None = None

    @property
    def drift(self) -> float:
        """Max relative change of F along the trace."""
        if len(self.F) == 0:
            return 0.0
        return float(np.max(np.abs(self.F - self.F[0])) / abs(self.F[0]))

    def to_csv(self, path):
        n = self.X.shape[1]
        header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + ["F"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for k in range(len(self.t)):
                row = [self.t[k], *self.X[k], *self.V[k], self.F[k]]
                w.writerow(["%.17g" % v for v in row])


def geodesic_integrate(M, x0, y0, steps: int, dt: float) -> GeodesicTrace:
    """Fixed-step RK4 for ``x' = v``, ``v' = -2 G(x, v)``."""
    G = spray_function(M)
    x = np.asarray(x0, float).copy()
    v = np.asarray(y0, float).copy()
    if not M.admissible(x, v):
        raise ValueError("initial state is not admissible")

    def rhs(x, v):
        return v, -2.0 * G(x, v)

    ts, Xs, Vs, Fs = [0.0], [x.copy()], [v.copy()], [M.F_value(x, v)]
    reason = None
    for k in range(1, steps + 1):
        try:
            k1x, k1v = rhs(x, v)
            k2x, k2v = rhs(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v)
            k3x, k3v = rhs(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v)
            k4x, k4v = rhs(x + dt * k3x, v + dt * k3v)
            xn = x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            vn = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
            if not np.all(np.isfinite(xn)) or not M.admissible(xn, vn):
                raise ValueError("left the admissible domain")
            f = M.F_value(xn, vn)
        except (ValueError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
            reason = f"step {k}: {exc}"
            break
        x, v = xn, vn
        ts.append(k * dt)
        Xs.append(x.copy())
        Vs.append(v.copy())
        Fs.append(f)
    return GeodesicTrace(np.array(ts), np.array(Xs), np.array(Vs), np.array(Fs), dt, truncated=reason)


# --- Busemann-Hausdorff volume ----------------------------------------------

UNIT_BALL = {2: math.pi, 3: 4 * math.pi / 3}


@dataclass
class VolumeData:
    sigma: float
    volume: float
    error: float
    flagged: bool = False


def _sphere_integral(f, n, nodes):
    if n == 2:
        u, w = np.polynomial.legendre.leggauss(nodes)
        phi = math.pi * (u + 1)
        return math.pi * sum(wi * f(np.array([math.cos(p), math.sin(p)])) for p, wi in zip(phi, w))
    if n == 3:
        nt, nphi = nodes
        ut, wt = np.polynomial.legendre.leggauss(nt)
        up, wp = np.polynomial.legendre.leggauss(nphi)
        th = 0.5 * math.pi * (ut + 1)
        ph = math.pi * (up + 1)
        total = 0.0
        for a, wa in zip(th, wt):
            s, c = math.sin(a), math.cos(a)
            inner = sum(wb * f(np.array([s * math.cos(b), s * math.sin(b), c])) for b, wb in zip(ph, wp))
            total += wa * s * inner
        return 0.5 * math.pi * math.pi * total
    raise ValueError("volume quadrature is available for n = 2 and n = 3")


def bh_volume_sigma(M, x, Ffun=None, tol=1e-6) -> VolumeData:
    """``sigma_F(x) = Vol(B^n) / Vol{y : F(x, y) < 1}`` by product Gauss-Legendre quadrature."""
    n = M.n if M is not None else len(x)
    F = Ffun if Ffun is not None else (lambda y: M.F_value(x, y))

    def r_n(w):
        f = F(w)
        if not f > 0:
            raise ValueError("F must be positive on the unit sphere")
        return f ** (-n)

    fine, coarse = (512, 256) if n == 2 else ((64, 128), (32, 64))
    vol = _sphere_integral(r_n, n, fine) / n
    vol_c = _sphere_integral(r_n, n, coarse) / n
    err = abs(vol - vol_c) / abs(vol)
    return VolumeData(UNIT_BALL[n] / vol, vol, err, flagged=err > tol)


def distortion(M, x, y) -> float:
    """``tau = ln(sqrt(det g) / sigma_F)``."""
    det = float(np.linalg.det(M.g_value(x, y)))
    if not det > 0:
        raise ValueError("g is not positive definite at this point")
    return math.log(math.sqrt(det) / bh_volume_sigma(M, x).sigma)


@dataclass
class SCurvature:
    S: float
    divergence: float
    volume_term: float
    tau: float
    error: float
    flagged: bool = False


def _divergence(M, x, y, h=1e-5):
    from .curvature import spray_divergence
    P = _plain_base(M)
    if type(P) is MRootMetric:
        return spray_divergence(P).eval_float(x, y)
    G = spray_function(P)
    total = 0.0
    for i in range(P.n):
        e = np.zeros(P.n)
        e[i] = h
        total += (G(x, y + e)[i] - G(x, y - e)[i]) / (2 * h)
    return total


def s_curvature_numeric(M, x, y, h=1e-3, tol=1e-6) -> SCurvature:
    """``S = d_i G^i - y^i d_{x^i} ln sigma_F`` with central differences in x."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = M.n
    if not M.admissible(x, y):
        raise ValueError("point is not admissible")

    def dlog(step):
        grad = np.zeros(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            grad[i] = (math.log(bh_volume_sigma(M, x + e).sigma) - math.log(bh_volume_sigma(M, x - e).sigma)) / (2 * step)
        return grad

    g1 = dlog(h)
    g2 = dlog(2 * h)
    # D(h) - D(2h) is about three times the O(h^2) error of D(h)
    err = float(np.max(np.abs(g1 - g2)) * float(np.abs(y).sum())) / 3
    div = _divergence(M, x, y)
    vol_term = float(y @ g1)
    return SCurvature(div - vol_term, div, vol_term, distortion(M, x, y), err, flagged=err > tol)


# --- Funk metric ----------------------------------------------------------------

@dataclass
class FunkValue:
    F: complex | float
    Fx: np.ndarray
    Fy: np.ndarray


def _funk_parts(x, y):
    # no abs/conj so that complex-step differentiation stays analytic
    s = 1 - np.sum(x * x)
    p = np.sum(x * y)
    q = np.sum(y * y)
    r = np.sqrt(s * q + p * p)
    return s, p, q, r


def _funk_F(x, y):
    s, p, q, r = _funk_parts(x, y)
    return (r + p) / s


def _funk_Fx(x, y):
    s, p, q, r = _funk_parts(x, y)
    return (((p * y - q * x) / r + y) * s + 2 * x * (r + p)) / (s * s)


def _funk_Fy(x, y):
    s, p, q, r = _funk_parts(x, y)
    return ((s * y + p * x) / r + x) / s


def funk_builtin(x, y, check: bool = True) -> FunkValue:
    """The Funk metric on the unit ball with closed-form first derivatives."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if float(np.sum(x * x)) >= 1:
        raise ValueError("Funk metric is defined only for |x| < 1")
    if not np.any(y):
        raise ValueError("y must be nonzero")
    F = float(_funk_F(x, y))
    Fx = _funk_Fx(x, y).real
    Fy = _funk_Fy(x, y).real
    if check:
        err = np.max(np.abs(Fx - F * Fy)) / max(1.0, abs(F) ** 2)
        if err > 1e-9:
            raise ArithmeticError(f"Funk identity violated by {err:.3e}")
    return FunkValue(F, Fx, Fy)


_CS = 1e-30


def _cstep(fun, x, y, var, i):
    """Complex-step derivative of a vector ``fun`` in ``var``-coordinate ``i``."""
    xc = x.astype(complex)
    yc = y.astype(complex)
    if var == "x":
        xc[i] += 1j * _CS
    else:
        yc[i] += 1j * _CS
    return np.imag(fun(xc, yc)) / _CS


def funk_validate(points: int = 100, seed: int = 0) -> dict:
    """Max residuals of the Funk identities at random points of the unit ball."""
    rng = np.random.default_rng(seed)
    n = 2
    out = {"identity": 0.0, "dually_flat": 0.0, "rapcsak": 0.0, "projective_factor": 0.0}
    for _ in range(points):
        x = rng.normal(size=n)
        x *= rng.uniform(0, 0.9) / np.linalg.norm(x)
        y = rng.normal(size=n)
        fv = funk_builtin(x, y, check=False)
        F, Fx, Fy = fv.F, fv.Fx, fv.Fy
        sc = max(1.0, F * F)
        out["identity"] = max(out["identity"], float(np.max(np.abs(Fx - F * Fy))) / sc)
        # (F^2)_{x^k} = 2 F F_{x^k}; y^l-derivatives by complex step
        F2x = lambda a, b: 2 * _funk_F(a, b) * _funk_Fx(a, b)
        for l in range(n):
            F2xy = _cstep(F2x, x, y, "y", l)  # vector over k
            dual = float(F2xy @ y - 2 * (2 * F * Fx[l]))
            out["dually_flat"] = max(out["dually_flat"], abs(dual) / max(1.0, F ** 3))
            Fxy = _cstep(_funk_Fx, x, y, "y", l)
            rap = float(Fxy @ y - Fx[l])
            out["rapcsak"] = max(out["rapcsak"], abs(rap) / sc)
        P = float(Fx @ y) / (2 * F)
        out["projective_factor"] = max(out["projective_factor"], abs(P - F / 2) / max(1.0, F))
    return out
