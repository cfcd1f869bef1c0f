"""Genus-2 surface group representations into PSL(2,R).

Generators a1, b1, a2, b2 with relator [a1,b1][a2,b2].  Words are tuples
of signed indices: 1..4 for a1, b1, a2, b2 and negative for inverses.

The construction uses the separating pants decomposition: curves

    c1 = a1,  c2 = a2,  c3 = [a1, b1]  (separating),

so fn-coordinates are (l1, l2, l3, t1, t2, t3) with l_i the length of c_i
and t_i the twist along c_i (in length units; positive twist inserts a
translation D(+t) along the curve's axis; this sign convention is fixed
here, length-spectrum tests do not depend on it).

Each handle is a one-holed torus: X = diag(e^{l/2}, e^{-l/2}) and
Y = T_d D(t), where T_d translates along the perpendicular geodesic and

    cosh d = (cosh(l3/2) + cosh^2(l/2)) / sinh^2(l/2)

which makes tr[X, Y] = -2 cosh(l3/2) independently of the twist.  The
second handle is conjugated so that [a2,b2] = [a1,b1]^{-1} exactly, with
the twist t3 realized by the one-parameter group along the axis of c3.

Tangent vectors to the representation variety are sl(2,R)-valued cocycles
tau with tau(uv) = tau(u) + Ad_{rho(u)} tau(v).  The identification
sl(2,R) = R^{2,1} uses the basis

    S = [[1,0],[0,-1]], T = [[0,1],[1,0]], J = [[0,1],[-1,0]]

with 1/2 tr(Z^2) = z1^2 + z2^2 - z3^2, matching the chart coordinates of
the projective module.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAMES = ("a1", "b1", "a2", "b2")
RELATOR = (1, 2, -1, -2, 3, 4, -3, -4)
PANTS_CURVES = ((1,), (3,), (1, 2, -1, -2))

RELATOR_TOL = 1e-10

_SL2_BASIS = (np.array([[1.0, 0.0], [0.0, -1.0]]),
              np.array([[0.0, 1.0], [1.0, 0.0]]),
              np.array([[0.0, 1.0], [-1.0, 0.0]]))


class ConstructionError(Exception):
    pass


class NotHyperbolic(Exception):
    pass


class UnsupportedCurve(Exception):
    pass


# -- words ----------------------------------------------------------------

def free_reduce(word) -> tuple:
    out = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def word_inverse(word) -> tuple:
    return tuple(-s for s in reversed(word))


def reduced_words(max_len: int, include_empty: bool = True):
    """All freely reduced words of length <= max_len, by increasing length."""
    if include_empty:
        yield ()
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for s in (1, -1, 2, -2, 3, -3, 4, -4):
                if w and w[-1] == -s:
                    continue
                nw = w + (s,)
                nxt.append(nw)
                yield nw
        frontier = nxt


_SYMBOL_ORDER = {s: i for i, s in enumerate((1, -1, 2, -2, 3, -3, 4, -4))}


def _shortlex_key(word):
    return (len(word), tuple(_SYMBOL_ORDER[s] for s in word))


def _relator_rotations():
    rots = []
    for base in (RELATOR, word_inverse(RELATOR)):
        for i in range(len(base)):
            rots.append(base[i:] + base[:i])
    return tuple(rots)


_ROTS = _relator_rotations()


def dehn_reduce(word) -> tuple:
    """Shorten a word with Dehn's algorithm for the genus-2 relator.

    Any subword longer than half the relator is replaced by the inverse of
    the complementary piece; the result is geodesic in the surface group.
    """
    w = free_reduce(word)
    changed = True
    while changed:
        changed = False
        for rot in _ROTS:
            for k in (7, 6, 5):
                piece = rot[:k]
                repl = word_inverse(rot[k:])
                for i in range(len(w) - k + 1):
                    if w[i:i + k] == piece:
                        w = free_reduce(w[:i] + repl + w[i + k:])
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    return w


_CANON_CACHE: dict = {}


def canonical_word(word) -> tuple:
    """Deterministic normal form: shortlex-least geodesic representative.

    Geodesic words for one element differ by swapping half-relator pieces
    (small cancellation), so the closure under those swaps is finite; we
    return its shortlex minimum.  Representation-independent, usable as a
    dictionary key for group elements.
    """
    w0 = free_reduce(tuple(word))
    hit = _CANON_CACHE.get(w0)
    if hit is not None:
        return hit
    w = dehn_reduce(w0)
    seen = {w}
    frontier = [w]
    while frontier:
        nxt = []
        for u in frontier:
            for rot in _ROTS:
                piece = rot[:4]
                repl = word_inverse(rot[4:])
                for i in range(len(u) - 3):
                    if u[i:i + 4] == piece:
                        v = free_reduce(u[:i] + repl + u[i + 4:])
                        if len(v) < len(u):
                            v = dehn_reduce(v)
                        if v not in seen:
                            seen.add(v)
                            nxt.append(v)
        frontier = nxt
    best = min(seen, key=_shortlex_key)
    _CANON_CACHE[w0] = best
    return best


def _diag(l) -> np.ndarray:
    l = np.longdouble(l)
    return np.array([[np.exp(l / 2), 0.0], [0.0, np.exp(-l / 2)]], dtype=np.longdouble)


def _perp(d) -> np.ndarray:
    d = np.longdouble(d)
    c, s = np.cosh(d / 2), np.sinh(d / 2)
    return np.array([[c, s], [s, c]], dtype=np.longdouble)


def _inv2(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=m.dtype) / det


# -- representations ------------------------------------------------------

class FuchsianRep:
    """Holonomy of a genus-2 hyperbolic structure: four SL(2,R) matrices."""

    def __init__(self, matrices, fn_coords=None, matrices_ld=None):
        mats = [np.asarray(m, dtype=float) for m in matrices]
        if len(mats) != 4:
            raise ValueError("need four generator matrices")
        for m in mats:
            if abs(np.linalg.det(m) - 1.0) > 1e-8:
                raise ValueError("generator matrices must have det 1")
        self.matrices = mats
        self.fn_coords = None if fn_coords is None else np.asarray(fn_coords, dtype=float)
        self.matrices_ld = matrices_ld  # optional extended-precision copies
        self._inverses = [np.linalg.inv(m) for m in mats]
        r = self.evaluate(RELATOR)
        # float64 evaluation error grows with the generator norms
        tol = 1e-13 * max(1.0, max(np.max(np.abs(m)) for m in mats)) ** 2
        if min(np.max(np.abs(r - np.eye(2))), np.max(np.abs(r + np.eye(2)))) > max(1e-10, tol):
            raise ConstructionError("relator does not evaluate to +-identity")

    def generator(self, s: int) -> np.ndarray:
        return self.matrices[s - 1] if s > 0 else self._inverses[-s - 1]

    def evaluate(self, word) -> np.ndarray:
        m = np.eye(2)
        for s in word:
            m = m @ self.generator(s)
        return m

    def evaluate_ld(self, word) -> np.ndarray:
        """Extended-precision word evaluation (falls back to float64 matrices)."""
        mats = self.matrices_ld
        if mats is None:
            mats = [m.astype(np.longdouble) for m in self.matrices]
        m = np.eye(2, dtype=np.longdouble)
        for s in word:
            g = mats[s - 1] if s > 0 else _inv2(mats[-s - 1])
            m = m @ g
        return m

    def relator_defect(self) -> float:
        """Relator deviation from +-identity, in extended precision.

        float64 evaluation alone has an error floor of order
        eps * max generator norm, which exceeds 1e-10 for long twists.
        """
        r = self.evaluate_ld(RELATOR)
        eye = np.eye(2, dtype=np.longdouble)
        return float(min(np.max(np.abs(r - eye)), np.max(np.abs(r + eye))))


def _construct_ld(fn) -> list:
    """Generator matrices in extended precision."""
    l1, l2, l3, t1, t2, t3 = [np.longdouble(v) for v in fn]
    if l1 <= 0 or l2 <= 0 or l3 <= 0:
        raise ConstructionError("pants curve lengths must be positive")

    def handle(l, t):
        ch_d = (np.cosh(l3 / 2) + np.cosh(l / 2) ** 2) / np.sinh(l / 2) ** 2
        if not np.isfinite(ch_d) or ch_d <= 1.0:
            raise ConstructionError("hexagon equation has no solution")
        d = np.arccosh(ch_d)
        x = _diag(l)
        y = _perp(d) @ _diag(t)
        return x, y

    x1, y1 = handle(l1, t1)
    x2, y2 = handle(l2, t2)
    k1 = x1 @ y1 @ _inv2(x1) @ _inv2(y1)
    k2 = x2 @ y2 @ _inv2(x2) @ _inv2(y2)

    p1 = _eigenframe(_inv2(k1))
    p2 = _eigenframe(k2)
    c0 = p1 @ _inv2(p2)
    det = c0[0, 0] * c0[1, 1] - c0[0, 1] * c0[1, 0]
    if det < 0:
        # negate one eigencolumn (conjugation is unchanged, determinant flips)
        c0 = p1 @ np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.longdouble) @ _inv2(p2)
        det = -det
    c0 = c0 / np.sqrt(det)
    a3 = p1 @ _diag(t3) @ _inv2(p1)
    c = a3 @ c0
    ci = _inv2(c)
    return [x1, y1, c @ x2 @ ci, c @ y2 @ ci]


def build_genus2(fn) -> FuchsianRep:
    """Fenchel-Nielsen construction; fn = (l1, l2, l3, t1, t2, t3)."""
    fn = np.asarray(fn, dtype=float).reshape(6)
    mats_ld = _construct_ld(fn)
    rep = FuchsianRep([m.astype(float) for m in mats_ld], fn_coords=fn,
                      matrices_ld=mats_ld)
    if rep.relator_defect() > RELATOR_TOL:
        raise ConstructionError(f"relator defect {rep.relator_defect():.3e}")
    return rep


def _eigenframe(m: np.ndarray) -> np.ndarray:
    """Eigenvector matrix of a hyperbolic 2x2 element, attracting column first.

    Closed form, keeps the input dtype (works in extended precision).
    """
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc <= 0:
        raise ConstructionError("gluing element is not hyperbolic")
    root = np.sqrt(disc)
    lams = sorted([(tr + root) / 2, (tr - root) / 2], key=lambda v: -abs(v))
    cols = []
    for lam in lams:
        if abs(m[0, 1]) >= abs(m[1, 0]):
            v = np.array([m[0, 1], lam - m[0, 0]], dtype=m.dtype)
        else:
            v = np.array([lam - m[1, 1], m[1, 0]], dtype=m.dtype)
        i = 0 if abs(v[0]) > abs(v[1]) else 1
        if v[i] < 0:
            v = -v
        cols.append(v / np.sqrt(v[0] ** 2 + v[1] ** 2))
    return np.array(cols, dtype=m.dtype).T


def translation_length(rep: FuchsianRep, word) -> float:
    tr = float(np.trace(rep.evaluate(word)))
    if abs(tr) <= 2.0 + 1e-12:
        raise NotHyperbolic(f"|trace| = {abs(tr):.12g} <= 2")
    return 2.0 * float(np.arccosh(abs(tr) / 2.0))


def fixed_points(rep: FuchsianRep, word):
    """(attracting, repelling) eigenlines of a hyperbolic element, as 2-vectors."""
    m = rep.evaluate(word)
    if abs(np.trace(m)) <= 2.0 + 1e-12:
        raise NotHyperbolic("element is not hyperbolic")
    vals, vecs = np.linalg.eig(m)
    vals, vecs = vals.real, vecs.real
    order = np.argsort(-np.abs(vals))
    att = vecs[:, order[0]]
    rep_ = vecs[:, order[1]]
    return att / np.linalg.norm(att), rep_ / np.linalg.norm(rep_)


def twist(rep: FuchsianRep, curve, weight: float) -> FuchsianRep:
    """Fenchel-Nielsen twist along one of the three pants curves."""
    if rep.fn_coords is None:
        raise UnsupportedCurve("twist needs a rep with fn-coordinates")
    curve = free_reduce(tuple(curve))
    idx = None
    for i, pc in enumerate(PANTS_CURVES):
        if curve == pc or curve == word_inverse(pc):
            idx = i
            break
    if idx is None:
        raise UnsupportedCurve(f"{curve} is not a pants curve of the construction")
    fn = rep.fn_coords.copy()
    fn[3 + idx] += weight
    return build_genus2(fn)


def discreteness_report(rep: FuchsianRep, depth: int = 4) -> dict:
    """Heuristic checks: all short words hyperbolic, no short relations.

    Cocompact surface groups have no elliptic or parabolic elements, so any
    |trace| <= 2 at small word length flags a bad construction.  Not a
    certificate of discreteness.
    """
    min_trace = np.inf
    bad = []
    seen = {(): np.eye(2)}
    for w in reduced_words(depth, include_empty=False):
        m = seen[w[:-1]] @ rep.generator(w[-1])
        seen[w] = m
        tr = abs(float(np.trace(m)))
        if tr <= 2.0 + 1e-9:
            bad.append((w, tr))
        dev = min(np.max(np.abs(m - np.eye(2))), np.max(np.abs(m + np.eye(2))))
        if dev < 1e-6:
            bad.append((w, tr))
        min_trace = min(min_trace, tr)
    return {"ok": not bad, "min_abs_trace": float(min_trace),
            "violations": bad[:10], "depth": depth}


# -- sl(2,R) <-> R^{2,1} ---------------------------------------------------

def vec_to_sl2(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    return v[0] * _SL2_BASIS[0] + v[1] * _SL2_BASIS[1] + v[2] * _SL2_BASIS[2]


def sl2_to_vec(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.array([z[0, 0], (z[0, 1] + z[1, 0]) / 2.0, (z[0, 1] - z[1, 0]) / 2.0])


def linear_part(rep: FuchsianRep, word) -> np.ndarray:
    """Adjoint action of rho(word) on R^{2,1} as a 3x3 matrix."""
    g = rep.evaluate(word)
    gi = np.linalg.inv(g)
    cols = [sl2_to_vec(g @ b @ gi) for b in _SL2_BASIS]
    return np.array(cols).T


# -- cocycles --------------------------------------------------------------

class Cocycle:
    """sl(2,R)-valued cocycle over a Fuchsian rep; tangent to the rep variety."""

    def __init__(self, values, base: FuchsianRep):
        vals = [np.asarray(v, dtype=float) for v in values]
        if len(vals) != 4:
            raise ValueError("need one value per generator")
        self.values = [v - np.trace(v) / 2.0 * np.eye(2) for v in vals]
        self.base = base

    def extend(self, word) -> np.ndarray:
        """tau on an arbitrary word via tau(uv) = tau(u) + Ad_{rho(u)} tau(v)."""
        out = np.zeros((2, 2))
        prefix = np.eye(2)
        for s in word:
            if s > 0:
                val = self.values[s - 1]
                out = out + prefix @ val @ np.linalg.inv(prefix)
                prefix = prefix @ self.base.generator(s)
            else:
                g = self.base.generator(-s)
                gi = np.linalg.inv(g)
                val = -gi @ self.values[-s - 1] @ g
                out = out + prefix @ val @ np.linalg.inv(prefix)
                prefix = prefix @ gi
        return out - np.trace(out) / 2.0 * np.eye(2)

    def relator_defect(self) -> float:
        return float(np.max(np.abs(self.extend(RELATOR))))

    def scaled(self, a: float) -> "Cocycle":
        return Cocycle([a * v for v in self.values], self.base)

    def __add__(self, other: "Cocycle") -> "Cocycle":
        return Cocycle([u + v for u, v in zip(self.values, other.values)], self.base)

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(v * v) for v in self.values)))


def zero_cocycle(rep: FuchsianRep) -> Cocycle:
    return Cocycle([np.zeros((2, 2))] * 4, rep)


def coboundary(rep: FuchsianRep, x) -> Cocycle:
    """tau(g) = Ad_{rho(g)} x - x for x in sl(2,R) (or an R^{2,1} vector)."""
    x = np.asarray(x, dtype=float)
    if x.shape == (3,):
        x = vec_to_sl2(x)
    vals = []
    for i in range(4):
        g = rep.matrices[i]
        vals.append(g @ x @ np.linalg.inv(g) - x)
    return Cocycle(vals, rep)


def cocycle_from_path(path, h: float = 1e-5) -> Cocycle:
    """Derivative cocycle tau(g) = d/dt [rho_t(g) rho_0(g)^{-1}] at t = 0.

    Central differences with one Richardson step (O(h^4) truncation).
    """
    base = path(0.0)

    def mats(rep):
        if rep.matrices_ld is not None:
            return rep.matrices_ld
        return [m.astype(np.longdouble) for m in rep.matrices]

    base_inv = [_inv2(m) for m in mats(base)]

    def diff(step):
        mp, mm = mats(path(step)), mats(path(-step))
        return [(mp[i] @ base_inv[i] - mm[i] @ base_inv[i]) / np.longdouble(2.0 * step)
                for i in range(4)]

    d1 = diff(h)
    d2 = diff(h / 2.0)
    vals = [((4.0 * b - a) / 3.0).astype(float) for a, b in zip(d1, d2)]
    return Cocycle(vals, base)


def fn_direction_cocycles(fn) -> list:
    """The six cocycles d/dt build_genus2(fn + t e_j); a slice of the
    cocycle space transverse to coboundaries (gauge-fixed tangent basis)."""
    fn = np.asarray(fn, dtype=float).reshape(6)
    out = []
    for j in range(6):
        e = np.zeros(6)
        e[j] = 1.0
        out.append(cocycle_from_path(lambda t, e=e: build_genus2(fn + t * e)))
    return out


def affine_action(rep: FuchsianRep, tau: Cocycle, word, p) -> np.ndarray:
    """Minkowski isometry of the twisted holonomy: p -> Ad_{rho(w)} p + tau(w)."""
    p = np.asarray(p, dtype=float).reshape(3)
    return linear_part(rep, word) @ p + sl2_to_vec(tau.extend(word))


def _values_vector(tau: Cocycle) -> np.ndarray:
    return np.concatenate([sl2_to_vec(v) for v in tau.values])


def decompose_cocycle(tau: Cocycle, fn) -> tuple:
    """Split a cocycle as sum(c_j * fn-direction) + coboundary(x).

    The six fn-directions and three coboundaries span the 9-dimensional
    cocycle space; returns (c, x, residual) with residual the leftover in
    the 12-dimensional value space (should be at finite-difference noise).
    """
    rep = tau.base
    basis = fn_direction_cocycles(fn)
    basis += [coboundary(rep, e) for e in np.eye(3)]
    A = np.array([_values_vector(b) for b in basis]).T
    rhs = _values_vector(tau)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    resid = float(np.linalg.norm(A @ sol - rhs))
    return sol[:6], sol[6:], resid


def min_norm_basis(fn) -> list:
    """Orthonormal basis of the cocycles orthogonal to all coboundaries.

    Orthogonality is in the 12-dimensional generator-value space; this is
    the gauge slice used by the Minkowski solver (the translation part of
    the isometry group moves a cocycle exactly by coboundaries).
    """
    rep = build_genus2(fn)
    cob = np.array([_values_vector(coboundary(rep, e)) for e in np.eye(3)]).T
    qc, _ = np.linalg.qr(cob)
    out = []
    raw = []
    for t in fn_direction_cocycles(fn):
        v = _values_vector(t)
        v = v - qc @ (qc.T @ v)
        for u in raw:
            v = v - u * np.dot(u, v)
        nv = np.linalg.norm(v)
        if nv < 1e-10:
            raise ConstructionError("fn directions degenerate against coboundaries")
        raw.append(v / nv)
    for v in raw:
        vals = [vec_to_sl2(v[3 * i:3 * i + 3]) for i in range(4)]
        out.append(Cocycle(vals, rep))
    return out


def combine_cocycles(basis, coeffs) -> Cocycle:
    coeffs = np.asarray(coeffs, dtype=float)
    tau = zero_cocycle(basis[0].base)
    for c, t in zip(coeffs, basis):
        tau = tau + t.scaled(float(c))
    return tau


def random_min_norm_cocycle(fn, rng, scale: float = 1.0):
    """Random cocycle in the min-norm gauge with O(scale) generator values.

    A random 12-dimensional value assignment receives the least-norm
    correction that kills the (linear) relator obstruction, then the
    coboundary component is projected away.  Returns (coeffs, cocycle)
    where coeffs are coordinates in min_norm_basis(fn).
    """
    rep = build_genus2(fn)

    def relator_value(vals12):
        vals = [vec_to_sl2(vals12[3 * i:3 * i + 3]) for i in range(4)]
        return sl2_to_vec(Cocycle(vals, rep).extend(RELATOR))

    target = rng.normal(0.0, scale, 12)
    A = np.array([relator_value(e) for e in np.eye(12)]).T  # 3 x 12
    vals12 = target - A.T @ np.linalg.solve(A @ A.T, relator_value(target))
    basis = min_norm_basis(fn)
    Bm = np.array([_values_vector(b) for b in basis])
    coeffs = Bm @ vals12  # orthonormal rows
    tau = combine_cocycles(basis, coeffs)
    if np.max(np.abs(tau.extend(RELATOR))) > 1e-6 * max(1.0, tau.norm()):
        raise ConstructionError("cocycle projection failed to satisfy the relator")
    return coeffs, tau


def _values_vector_of_relator(tau: Cocycle) -> np.ndarray:
    return sl2_to_vec(tau.extend(RELATOR))
