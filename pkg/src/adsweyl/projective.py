"""Projective model of AdS^3 / Minkowski geometry in RP^3.

Everything lives in R^4 with the signature-(2,2) quadratic form

    q(x) = x1^2 + x2^2 - x3^2 - x4^2.

AdS^3 is the projective quotient of {q = -1}; its boundary is the null
quadric.  The affine chart y = (x1/x4, x2/x4, x3/x4) ("Minkowski chart")
contains the base point o = [0,0,0,1] at its origin and carries the flat
Lorentzian form y1^2 + y2^2 - y3^2.  Future = increasing y3 near o.

Matrix model: a lift x maps to the 2x2 matrix

    M(x) = x4*I + x1*S + x2*T + x3*J,
    S = [[1,0],[0,-1]],  T = [[0,1],[1,0]],  J = [[0,1],[-1,0]],

with det M = -q(x), so AdS^3 corresponds to unit-determinant matrices and
o to the identity.  The isometry group G x G acts by M -> gl M gr^{-1};
the diagonal is exactly the stabilizer of o.
"""

from __future__ import annotations

import numpy as np

PROJ_TOL = 1e-10      # projective equality / null tests
CAUSAL_TOL = 1e-9     # causality classification around |b| = 1

Q_SIGNS = np.array([1.0, 1.0, -1.0, -1.0])

_S = np.array([[1.0, 0.0], [0.0, -1.0]])
_T = np.array([[0.0, 1.0], [1.0, 0.0]])
_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


class ChartOverflow(Exception):
    """Point too close to the chart's hyperplane at infinity."""


class RankError(Exception):
    """Matrix is not rank one within tolerance."""


class DegenerateCone(Exception):
    """Cone spanned by the input contains a line."""


def quadratic_form(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.dot(Q_SIGNS * x, x))


def bilinear(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.dot(Q_SIGNS * x, y))


class ProjPoint:
    """Point of RP^3, stored as a nonzero homogeneous lift."""

    __slots__ = ("lift",)

    def __init__(self, lift):
        lift = np.asarray(lift, dtype=float).reshape(4)
        n = np.linalg.norm(lift)
        if n == 0.0 or not np.all(np.isfinite(lift)):
            raise ValueError("lift must be nonzero and finite")
        self.lift = lift

    def __repr__(self):
        return f"ProjPoint({self.lift.tolist()})"

    def classify(self) -> str:
        """'ads', 'boundary' or 'exterior' by the sign of q on the lift."""
        x = self.lift / np.linalg.norm(self.lift)
        qx = quadratic_form(x)
        if abs(qx) < PROJ_TOL:
            return "boundary"
        return "ads" if qx < 0 else "exterior"

    def normalized_ads(self) -> np.ndarray:
        """Lift with q = -1, sign fixed by x4 > 0 (first nonzero > 0 if x4 = 0)."""
        qx = quadratic_form(self.lift)
        if qx >= 0:
            raise ValueError("not an AdS point")
        x = self.lift / np.sqrt(-qx)
        return _sign_fix(x)

    def normalized_boundary(self) -> np.ndarray:
        """Unit-Euclidean-norm lift of a boundary point, sign as above."""
        x = self.lift / np.linalg.norm(self.lift)
        return _sign_fix(x)

    def same_as(self, other: "ProjPoint", tol: float = PROJ_TOL) -> bool:
        a = self.lift / np.linalg.norm(self.lift)
        b = other.lift / np.linalg.norm(other.lift)
        return min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) < tol


def _sign_fix(x: np.ndarray) -> np.ndarray:
    if abs(x[3]) > PROJ_TOL:
        return x if x[3] > 0 else -x
    for c in x:
        if abs(c) > PROJ_TOL:
            return x if c > 0 else -x
    return x


class ProjPlane:
    """Plane of RP^3, stored as the lift of its b-dual point.

    Incidence: the plane contains p iff b(covector, p.lift) = 0.
    """

    __slots__ = ("covector",)

    def __init__(self, covector):
        covector = np.asarray(covector, dtype=float).reshape(4)
        if np.linalg.norm(covector) == 0.0:
            raise ValueError("covector must be nonzero")
        self.covector = covector

    def __repr__(self):
        return f"ProjPlane({self.covector.tolist()})"

    def contains(self, p: ProjPoint, tol: float = PROJ_TOL) -> bool:
        a = self.covector / np.linalg.norm(self.covector)
        x = p.lift / np.linalg.norm(p.lift)
        return abs(bilinear(a, x)) < tol

    def is_spacelike(self) -> bool:
        """Spacelike plane <=> its dual point is inside AdS^3."""
        return ProjPoint(self.covector).classify() == "ads"


BASE_POINT = ProjPoint([0.0, 0.0, 0.0, 1.0])  # the chart origin o


# -- charts --------------------------------------------------------------

def minkowski_chart(p: ProjPoint) -> np.ndarray:
    """Affine coordinates (x1/x4, x2/x4, x3/x4); raises near x4 = 0."""
    x = p.lift
    if abs(x[3]) < PROJ_TOL * np.linalg.norm(x):
        raise ChartOverflow("point at the chart's infinity (x4 ~ 0)")
    return x[:3] / x[3]


def chart_point(y) -> ProjPoint:
    """Inverse of the Minkowski chart."""
    y = np.asarray(y, dtype=float).reshape(3)
    return ProjPoint([y[0], y[1], y[2], 1.0])


# -- duality -------------------------------------------------------------

def dual(obj):
    """Projective duality with respect to q.

    ProjPoint <-> ProjPlane via b.  A list of ProjPoint is treated as the
    generators of a closed convex cone K of lifts (signs as given); the
    result is a list of ProjPoint generating the dual set
    C* = P{x : b(x, x') >= 0 for all x' in K}.
    """
    if isinstance(obj, ProjPoint):
        return ProjPlane(obj.lift.copy())
    if isinstance(obj, ProjPlane):
        return ProjPoint(obj.covector.copy())
    gens = np.array([p.lift for p in obj], dtype=float)
    return [ProjPoint(v) for v in _dual_cone_rays(gens)]


def _dual_cone_rays(gens: np.ndarray) -> list:
    """Extreme rays of {x : b(x, g) >= 0 for all rows g}, 4D double description.

    Raises DegenerateCone when cone(gens) contains a line (dual not
    full-dimensional / input not pointed).
    """
    if _cone_contains_line(gens):
        raise DegenerateCone("input cone contains a line")
    m = gens * Q_SIGNS  # constraints m @ x >= 0 in Euclidean terms
    n = len(m)
    rays = []
    # candidate rays from triples of active constraints
    from itertools import combinations
    for idx in combinations(range(n), 3):
        a = m[list(idx)]
        if np.linalg.matrix_rank(a, tol=1e-9) != 3:
            continue
        _, _, vt = np.linalg.svd(a)
        r = vt[-1]
        for s in (r, -r):
            vals = m @ s
            if np.all(vals >= -1e-9 * np.linalg.norm(m, axis=1)):
                rays.append(s / np.linalg.norm(s))
    out = []
    for r in rays:
        if not any(np.allclose(r, o, atol=1e-8) or np.allclose(r, -o, atol=1e-8)
                   for o in out):
            out.append(r)
    return out


def _cone_contains_line(gens: np.ndarray) -> bool:
    """True iff 0 is a nontrivial nonnegative combination of the generators."""
    from scipy.optimize import linprog
    n = len(gens)
    if n < 2:
        return False
    res = linprog(c=np.zeros(n), A_eq=np.vstack([gens.T, np.ones(n)]),
                  b_eq=np.concatenate([np.zeros(4), [1.0]]),
                  bounds=[(0, None)] * n, method="highs")
    return bool(res.success)


def support_values(points, directions) -> np.ndarray:
    """max over normalized lifts of <dir, x>, one row per direction."""
    lifts = np.array([p.lift / np.linalg.norm(p.lift) for p in points])
    return np.max(np.asarray(directions, dtype=float) @ lifts.T, axis=1)


# -- causal relation -----------------------------------------------------

class Causality:
    """Tagged causal relation: spacelike(d>=0) | timelike(tau) | lightlike | undefined."""

    __slots__ = ("kind", "value")

    def __init__(self, kind: str, value: float = 0.0):
        self.kind = kind
        self.value = value

    def __repr__(self):
        if self.kind in ("spacelike", "timelike"):
            return f"Causality({self.kind}, {self.value:.6g})"
        return f"Causality({self.kind})"

    def __eq__(self, other):
        return (isinstance(other, Causality) and self.kind == other.kind
                and abs(self.value - other.value) < 1e-9)


def ads_relation(p: ProjPoint, q: ProjPoint) -> Causality:
    """Causal relation and distance between two AdS points.

    With q = -1 lifts and the sign of the second lift chosen so that
    b <= 0: |b| > 1 gives a spacelike geodesic of length arccosh(-b),
    |b| < 1 a timelike one of length arccos(-b), b = -1 lightlike.
    """
    ph = p.normalized_ads()
    qh = q.normalized_ads()
    if p.same_as(q):
        return Causality("spacelike", 0.0)
    beta = bilinear(ph, qh)
    if beta > 0:
        beta = -beta
    if beta < -1.0 - CAUSAL_TOL:
        return Causality("spacelike", float(np.arccosh(-beta)))
    if beta > -1.0 + CAUSAL_TOL:
        return Causality("timelike", float(np.arccos(np.clip(-beta, -1.0, 1.0))))
    return Causality("lightlike")


def spacelike_distance(p: ProjPoint, q: ProjPoint) -> float:
    rel = ads_relation(p, q)
    if rel.kind != "spacelike":
        raise ValueError(f"points are not in spacelike relation ({rel.kind})")
    return rel.value


# -- matrix model and isometries -----------------------------------------

def to_matrix(x) -> np.ndarray:
    """Lift -> 2x2 matrix of the action model (o -> identity)."""
    x = np.asarray(x, dtype=float).reshape(4)
    return np.array([[x[3] + x[0], x[1] + x[2]],
                     [x[1] - x[2], x[3] - x[0]]])


def from_matrix(m) -> np.ndarray:
    """Inverse of to_matrix."""
    m = np.asarray(m, dtype=float)
    return np.array([(m[0, 0] - m[1, 1]) / 2.0,
                     (m[0, 1] + m[1, 0]) / 2.0,
                     (m[0, 1] - m[1, 0]) / 2.0,
                     (m[0, 0] + m[1, 1]) / 2.0])


def isom_action(g_left, g_right, p: ProjPoint) -> ProjPoint:
    """Isometry (gl, gr): M(x) -> gl M(x) gr^{-1} for unit-determinant factors.

    Fixes o exactly when gl = gr projectively.
    """
    g_left = np.asarray(g_left, dtype=float)
    g_right = np.asarray(g_right, dtype=float)
    for g in (g_left, g_right):
        if abs(np.linalg.det(g) - 1.0) > 1e-9:
            raise ValueError("isometry factors must have unit determinant")
    m = g_left @ to_matrix(p.lift) @ np.linalg.inv(g_right)
    return ProjPoint(from_matrix(m))


# -- boundary parameterization -------------------------------------------

def _rank1_lines(a: np.ndarray):
    u, s, vt = np.linalg.svd(a)
    scale = s[0]
    if scale < PROJ_TOL or s[1] > 1e-10 * scale:
        raise RankError("matrix rank is not 1 within tolerance")
    image = u[:, 0]
    kernel = vt[1, :]  # right singular vector for the zero singular value
    return image, kernel


def boundary_param(p: ProjPoint):
    """Boundary point -> (image line, kernel line) of (x1+x3, x2+x4; x2-x4, x3-x1).

    The classical chart on the null quadric; each line is a 2-vector up to
    scale.
    """
    if p.classify() != "boundary":
        raise ValueError("boundary_param needs a point of the null quadric")
    x = p.normalized_boundary()
    a = np.array([[x[0] + x[2], x[1] + x[3]],
                  [x[1] - x[3], x[2] - x[0]]])
    return _rank1_lines(a)


def boundary_point(line_im, line_ker) -> ProjPoint:
    """Inverse of boundary_param: rank-1 matrix with the given image/kernel."""
    u = np.asarray(line_im, dtype=float).reshape(2)
    k = np.asarray(line_ker, dtype=float).reshape(2)
    w = np.array([k[1], -k[0]])  # row vector annihilating the kernel line
    a = np.outer(u, w)
    x = np.array([(a[0, 0] - a[1, 1]) / 2.0,
                  (a[0, 1] + a[1, 0]) / 2.0,
                  (a[0, 0] + a[1, 1]) / 2.0,
                  (a[0, 1] - a[1, 0]) / 2.0])
    return ProjPoint(x)


def frame_boundary_point(line_im, line_ker) -> ProjPoint:
    """Boundary point from fixed-point data in the ACTION model.

    Uses M(x) instead of the classical chart, so that the result is the
    accumulation point of isom_action orbits: the image line transforms by
    the left factor and the kernel line by the right factor.
    """
    u = np.asarray(line_im, dtype=float).reshape(2)
    k = np.asarray(line_ker, dtype=float).reshape(2)
    w = np.array([k[1], -k[0]])
    return ProjPoint(from_matrix(np.outer(u, w)))


def frame_boundary_param(p: ProjPoint):
    """Inverse of frame_boundary_point on the null quadric."""
    if p.classify() != "boundary":
        raise ValueError("needs a point of the null quadric")
    return _rank1_lines(to_matrix(p.normalized_boundary()))


def proj_line_equal(l1, l2, tol: float = PROJ_TOL) -> bool:
    a = np.asarray(l1, dtype=float)
    b = np.asarray(l2, dtype=float)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) < tol


# -- rescaling family ----------------------------------------------------

def rescale(t: float, p: ProjPoint) -> ProjPoint:
    """g_t = P[diag(1/t, 1/t, 1/t, 1)]: homothety from o with coefficient 1/t."""
    if t <= 0:
        raise ValueError("rescale parameter must be positive")
    x = p.lift
    return ProjPoint([x[0] / t, x[1] / t, x[2] / t, x[3]])


def rescale_dual(t: float, plane: ProjPlane) -> ProjPlane:
    """g_t* = P[diag(1, 1, 1, 1/t)] acting on dual points."""
    if t <= 0:
        raise ValueError("rescale parameter must be positive")
    c = plane.covector
    return ProjPlane([c[0], c[1], c[2], c[3] / t])


# -- exponential at o and the transition probe ---------------------------

def exp_base(u) -> ProjPoint:
    """Geodesic exponential at o of a chart tangent vector u."""
    u = np.asarray(u, dtype=float).reshape(3)
    qu = u[0] ** 2 + u[1] ** 2 - u[2] ** 2
    o = np.array([0.0, 0.0, 0.0, 1.0])
    udir = np.array([u[0], u[1], u[2], 0.0])
    if qu > PROJ_TOL:
        a = np.sqrt(qu)
        return ProjPoint(np.cosh(a) * o + np.sinh(a) / a * udir)
    if qu < -PROJ_TOL:
        a = np.sqrt(-qu)
        return ProjPoint(np.cos(a) * o + np.sin(a) / a * udir)
    return ProjPoint(o + udir)


def minkowski_distance(u, w) -> float:
    """Flat spacelike distance sqrt(q3(u - w)) of chart vectors."""
    d = np.asarray(u, dtype=float) - np.asarray(w, dtype=float)
    q3 = d[0] ** 2 + d[1] ** 2 - d[2] ** 2
    if q3 < 0:
        raise ValueError("vectors are not in spacelike Minkowski relation")
    return float(np.sqrt(q3))


def transition_derivative_probe(u, w, t_list) -> dict:
    """d_A(exp_o(t u), exp_o(t w)) / t against the Minkowski distance of u, w.

    Returns per-t ratios, the flat limit, absolute errors, and the log-log
    slope of error vs t (expected ~2 from the even Taylor expansion).
    """
    u = np.asarray(u, dtype=float).reshape(3)
    w = np.asarray(w, dtype=float).reshape(3)
    d0 = minkowski_distance(u, w)
    ts = np.asarray(sorted(t_list, reverse=True), dtype=float)
    ratios = []
    for t in ts:
        if d0 == 0.0:
            ratios.append(0.0)
            continue
        rel = ads_relation(exp_base(t * u), exp_base(t * w))
        if rel.kind != "spacelike":
            raise ValueError(f"pair left spacelike relation at t={t}")
        ratios.append(rel.value / t)
    ratios = np.array(ratios)
    errors = np.abs(ratios - d0)
    slope = float("nan")
    mask = errors > 1e-14
    if np.count_nonzero(mask) >= 2:
        slope = float(np.polyfit(np.log(ts[mask]), np.log(errors[mask]), 1)[0])
    return {"t": ts, "ratio": ratios, "flat_distance": d0,
            "error": errors, "slope": slope}


# -- general affine charts ------------------------------------------------

class AffineChart:
    """Affine chart of RP^3 adapted to a properly convex point set.

    The chart hyperplane is the dual plane of an interior point c0 of the
    set's hull; lifts are signed so that b(x, c0) < 0 and mapped to the
    affine slice {b(x, c0) = -1}, with coordinates in a b-orthonormal basis
    (v1, v2 spacelike, v3 timelike future).  The induced flat form on chart
    coordinates is u1^2 + u2^2 - u3^2 and u3 is a future direction, so face
    orientation logic matches the standard Minkowski chart.
    """

    def __init__(self, center):
        c = np.asarray(center, dtype=float).reshape(4)
        qc = quadratic_form(c)
        if qc >= -PROJ_TOL:
            raise DegenerateCone("chart center must be timelike (q < 0)")
        c = c / np.sqrt(-qc)
        # future sign: positive x3-ish component, fall back to x4
        if abs(c[2]) > PROJ_TOL:
            if c[2] < 0 and abs(c[3]) < 0.9:
                c = -c
        if c[3] < 0:
            c = -c
        self.center = c
        self.basis = self._build_basis(c)

    @staticmethod
    def _build_basis(c: np.ndarray) -> np.ndarray:
        """b-orthonormal (v1, v2, v3) spanning c-perp, q = (+1, +1, -1)."""
        vecs = []
        for seed in np.eye(4):
            v = seed - (bilinear(seed, c) / bilinear(c, c)) * c
            for u in vecs:
                v = v - (bilinear(v, u) / bilinear(u, u)) * u
            if abs(quadratic_form(v)) > 1e-8:
                vecs.append(v / np.sqrt(abs(quadratic_form(v))))
            if len(vecs) == 3:
                break
        if len(vecs) != 3:
            raise DegenerateCone("failed to build chart basis")
        space = [v for v in vecs if quadratic_form(v) > 0]
        time = [v for v in vecs if quadratic_form(v) < 0]
        if len(space) != 2 or len(time) != 1:
            raise DegenerateCone("chart basis has wrong signature")
        v3 = time[0]
        if bilinear(v3, np.array([0.0, 0.0, 1.0, 0.0])) > 0:
            v3 = -v3  # future reference e3: b(v3, e3) = -v3_3... keep v3_3 > 0
        return np.array([space[0], space[1], v3])

    @classmethod
    def from_lifts(cls, lifts) -> "AffineChart":
        """Chart from the dual of an interior point (mean of signed lifts)."""
        lifts = [np.asarray(x, dtype=float) for x in lifts]
        ref = lifts[0]
        signed = []
        for x in lifts:
            signed.append(-x if bilinear(x, ref) > 0 else x)
        c = np.mean(signed, axis=0)
        if quadratic_form(c) >= 0:
            raise DegenerateCone("point set has no timelike interior direction")
        return cls(c)

    def signed_lift(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        bc = bilinear(x, self.center)
        if abs(bc) < PROJ_TOL * np.linalg.norm(x):
            raise ChartOverflow("lift on the chart's infinity plane")
        return -x / bc if bc > 0 else x / (-bc)

    def to_chart(self, x) -> np.ndarray:
        """Chart coordinates of a lift (after sign normalization)."""
        s = self.signed_lift(x)
        rel = s - self.center * (bilinear(s, self.center) / bilinear(self.center, self.center))
        return np.array([bilinear(rel, self.basis[0]),
                         bilinear(rel, self.basis[1]),
                         -bilinear(rel, self.basis[2])])

    def from_chart(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(3)
        return self.center + u[0] * self.basis[0] + u[1] * self.basis[1] + u[2] * self.basis[2]


def standard_chart() -> AffineChart:
    """The Minkowski chart as an AffineChart (center o)."""
    return AffineChart([0.0, 0.0, 0.0, 1.0])
