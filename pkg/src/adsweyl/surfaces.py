"""Equivariant vertex configurations and their convex hull surfaces.

A configuration is holonomy data plus marked-point positions: in AdS a
pair of Fuchsian representations acting by (gl, gr) on the matrix model,
in Minkowski a representation with a cocycle acting affinely on the
chart.  Orbits are truncated at a word length L; for AdS the hull is
additionally seeded with limit-set samples built from attracting fixed
points of the left/right factors, which is where the orbit accumulates.

The future-convex boundary component is the past-facing part of the hull
(future = increasing chart time; vertex points of a future-convex
configuration live in the cone between the chart origin and the convex
core).  Past-convex configurations are handled by conjugating with the
time reversal and reusing the future-convex path.

Quotienting by the group labeling produces a celluation of the marked
genus-2 surface whose cells carry canonical (vertex id, group word) keys;
fan-triangulating and measuring edge lengths yields the intrinsic
cone-metric of the surface.
"""

from __future__ import annotations

import numpy as np

from . import projective as pj
from . import fuchsian as fg
from . import conemetric as cm
from . import hulls

DEDUP_DECIMALS = 9
_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


class NonSpacelikeFace(Exception):
    pass


class UnstableHull(Exception):
    pass


class QuotientError(Exception):
    pass


class NotStrict(Exception):
    pass


# -- configurations --------------------------------------------------------

class VertexConfig:
    """Holonomy + marked points + convexity side.

    geometry 'ads': rep_left, rep_right, points = {id: ProjPoint}.
    geometry 'minkowski': rep, tau (Cocycle), points = {id: 3-vector};
    tau_coeffs optionally records tau as coefficients in the fn-direction
    cocycle basis (needed by the geometric-transition machinery).
    """

    def __init__(self, geometry, side="future", rep_left=None, rep_right=None,
                 rep=None, tau=None, points=None, tau_coeffs=None):
        if geometry not in ("ads", "minkowski"):
            raise ValueError("geometry must be 'ads' or 'minkowski'")
        if side not in ("future", "past"):
            raise ValueError("side must be 'future' or 'past'")
        self.geometry = geometry
        self.side = side
        self.points = dict(points)
        if geometry == "ads":
            self.rep_left = rep_left
            self.rep_right = rep_right
            for vid, p in self.points.items():
                if not isinstance(p, pj.ProjPoint):
                    self.points[vid] = pj.ProjPoint(p)
                if self.points[vid].classify() != "ads":
                    raise ValueError(f"point {vid} is not inside AdS")
        else:
            self.rep = rep
            self.tau = tau
            self.tau_coeffs = None if tau_coeffs is None else np.asarray(tau_coeffs, float)
            for vid, p in self.points.items():
                self.points[vid] = np.asarray(p, dtype=float).reshape(3)

    def vertex_ids(self):
        return sorted(self.points)

    def apply_word(self, word, x):
        """Ambient action of a group word on a lift (ads) or chart point."""
        if self.geometry == "ads":
            gl = _unit_det(self.rep_left.evaluate(word))
            gr = _unit_det(self.rep_right.evaluate(word))
            return pj.isom_action(gl, gr, x if isinstance(x, pj.ProjPoint) else pj.ProjPoint(x))
        return fg.affine_action(self.rep, self.tau, word, x)

    def edge_length(self, key) -> float:
        """Spacelike length of a canonical edge key (va, vb, word)."""
        va, vb, w = key
        if self.geometry == "ads":
            q = self.apply_word(w, self.points[vb])
            return pj.spacelike_distance(self.points[va], q)
        q = self.apply_word(w, self.points[vb])
        d = self.points[va] - q
        q3 = d[0] ** 2 + d[1] ** 2 - d[2] ** 2
        if q3 <= 0:
            raise NonSpacelikeFace(f"edge {key} is not spacelike")
        return float(np.sqrt(q3))

    def time_reversed(self) -> "VertexConfig":
        """Conjugate by the time reversal; swaps the convexity side.

        Edge lengths and celluation word labels are invariant, so the
        intrinsic metric of the reversed configuration is the original one.
        """
        side = "past" if self.side == "future" else "future"
        if self.geometry == "ads":
            # reversal is transpose in the matrix model: (gl, gr) becomes
            # (J gr J^-1, J gl J^-1) and lifts flip the x3 sign
            Ji = np.linalg.inv(_J2)
            left = fg.FuchsianRep([_J2 @ m @ Ji for m in self.rep_right.matrices],
                                  fn_coords=self.rep_right.fn_coords)
            right = fg.FuchsianRep([_J2 @ m @ Ji for m in self.rep_left.matrices],
                                   fn_coords=self.rep_left.fn_coords)
            pts = {}
            for vid, p in self.points.items():
                x = p.lift
                pts[vid] = pj.ProjPoint([x[0], x[1], -x[2], x[3]])
            return VertexConfig("ads", side, rep_left=left, rep_right=right, points=pts)
        Ji = np.linalg.inv(_J2)
        rep = fg.FuchsianRep([_J2 @ m @ Ji for m in self.rep.matrices],
                             fn_coords=self.rep.fn_coords)
        vals = [-_J2 @ v @ Ji for v in self.tau.values]
        tau = fg.Cocycle(vals, rep)
        pts = {vid: np.array([p[0], p[1], -p[2]]) for vid, p in self.points.items()}
        return VertexConfig("minkowski", side, rep=rep, tau=tau, points=pts,
                            tau_coeffs=None)


def _unit_det(m: np.ndarray) -> np.ndarray:
    det = np.linalg.det(m)
    return m / np.sqrt(abs(det))


def ads_config(rep_left, rep_right, points, side="future") -> VertexConfig:
    return VertexConfig("ads", side, rep_left=rep_left, rep_right=rep_right,
                        points=points)


def minkowski_config(rep, tau, points, side="future", tau_coeffs=None) -> VertexConfig:
    return VertexConfig("minkowski", side, rep=rep, tau=tau, points=points,
                        tau_coeffs=tau_coeffs)


def minkowski_config_from_coeffs(fn, coeffs, points, side="future") -> VertexConfig:
    """Cocycle given by coefficients in the fn-direction basis."""
    rep = fg.build_genus2(fn)
    basis = fg.fn_direction_cocycles(fn)
    coeffs = np.asarray(coeffs, dtype=float).reshape(6)
    tau = fg.combine_cocycles(basis, coeffs)
    return minkowski_config(rep, tau, points, side=side, tau_coeffs=coeffs)


def minkowski_config_min_norm(fn, coeffs, points, side="future") -> VertexConfig:
    """Cocycle given in the min-norm gauge basis (solver parameterization)."""
    basis = fg.min_norm_basis(fn)
    tau = fg.combine_cocycles(basis, coeffs)
    return minkowski_config(basis[0].base, tau, points, side=side)


def transition_data(mc: VertexConfig):
    """(fn-direction coefficients c, coboundary part x) of the cocycle."""
    if mc.geometry != "minkowski" or mc.rep.fn_coords is None:
        raise ValueError("need a Minkowski configuration built from fn-coordinates")
    if not hasattr(mc, "_transition_data"):
        c, x, resid = fg.decompose_cocycle(mc.tau, mc.rep.fn_coords)
        if resid > 1e-5 * max(1.0, mc.tau.norm()):
            raise ValueError(f"cocycle decomposition residual {resid:.2e}")
        mc._transition_data = (c, x)
    return mc._transition_data


def transition_rep_right(mc: VertexConfig, s: float) -> fg.FuchsianRep:
    """Right holonomy factor of the transition family at parameter s.

    The family exp(sX) . build(fn - s c) . exp(-sX), with (c, x) the
    cocycle decomposition and X = x as an sl2 matrix, has derivative
    -tau at s = 0; the right-factor action on the chart then linearizes
    to translation by +tau, matching the affine holonomy.
    """
    c, x = transition_data(mc)
    fn = mc.rep.fn_coords
    base = fg.build_genus2(fn - s * c)
    from scipy.linalg import expm
    E = expm(s * fg.vec_to_sl2(x))
    Ei = np.linalg.inv(E)
    return fg.FuchsianRep([E @ m @ Ei for m in base.matrices], fn_coords=base.fn_coords)


def ads_config_from_minkowski(mc: VertexConfig, s: float) -> VertexConfig:
    """Geometric-transition image at parameter s of a Minkowski configuration.

    Chart points are scaled by s (the inverse rescaling map) and the right
    representation follows the path whose derivative is minus the cocycle.
    """
    if mc.geometry != "minkowski":
        raise ValueError("need a Minkowski configuration")
    rep_right = transition_rep_right(mc, s)
    pts = {vid: pj.chart_point(s * p) for vid, p in mc.points.items()}
    return ads_config(mc.rep, rep_right, pts, side=mc.side)


# -- orbits and limit sets --------------------------------------------------

def _word_matrices(rep: fg.FuchsianRep, L: int):
    """Matrices for all reduced words of length <= L, shortlex order."""
    out = {(): np.eye(2)}
    frontier = [()]
    for _ in range(L):
        nxt = []
        for w in frontier:
            for s in (1, -1, 2, -2, 3, -3, 4, -4):
                if w and w[-1] == -s:
                    continue
                nw = w + (s,)
                out[nw] = out[w] @ rep.generator(s)
                nxt.append(nw)
        frontier = nxt
    return out


def orbit(config: VertexConfig, L: int, prune_factor: float = None,
          prune_radius: float = None):
    """Truncated equivariant orbit: list of (vid, word, coords, separation).

    coords are normalized AdS lifts or Minkowski chart points; duplicates
    (same image point) keep their first, shortlex-least word.  separation
    measures how far the point sits from the base configuration (AdS:
    |b|-distance; Minkowski: chart distance).  With prune_factor set,
    points farther than prune_factor times the largest length-2 separation
    are dropped, and whole word subtrees are cut once they leave that
    radius by more than a generator step; the limit-set samples close the
    hull on the far side, so faces near the fundamental domain are
    unaffected (and monitored by the truncation-stability check).
    """
    ads = config.geometry == "ads"
    vids = config.vertex_ids()
    symbols = (1, -1, 2, -2, 3, -3, 4, -4)
    if ads:
        base_mats = np.array([pj.to_matrix(config.points[v].normalized_ads())
                              for v in vids])
        base_lifts = np.array([config.points[v].normalized_ads() for v in vids])
        gens_l = np.array([config.rep_left.generator(s) for s in symbols])
        gens_r = np.array([config.rep_right.generator(s) for s in symbols])
    else:
        base_pts = np.array([config.points[v] for v in vids])
        gens_lin = np.array([fg.linear_part(config.rep, (s,)) for s in symbols])
        gens_tr = np.array([fg.sl2_to_vec(config.tau.extend((s,))) for s in symbols])

    def batch_images(data):
        """coords (n, |V|, dim) and separations (n, |V|) for n group elements."""
        if ads:
            gl, gr = data
            det = gr[:, 0, 0] * gr[:, 1, 1] - gr[:, 0, 1] * gr[:, 1, 0]
            gri = np.empty_like(gr)
            gri[:, 0, 0], gri[:, 1, 1] = gr[:, 1, 1], gr[:, 0, 0]
            gri[:, 0, 1], gri[:, 1, 0] = -gr[:, 0, 1], -gr[:, 1, 0]
            gri /= det[:, None, None]
            m = np.einsum("nij,vjk,nkl->nvil", gl, base_mats, gri)
            raw = np.empty(m.shape[:2] + (4,))
            raw[..., 0] = (m[..., 0, 0] - m[..., 1, 1]) / 2.0
            raw[..., 1] = (m[..., 0, 1] + m[..., 1, 0]) / 2.0
            raw[..., 2] = (m[..., 0, 1] - m[..., 1, 0]) / 2.0
            raw[..., 3] = (m[..., 0, 0] + m[..., 1, 1]) / 2.0
            qx = (raw[..., 0] ** 2 + raw[..., 1] ** 2
                  - raw[..., 2] ** 2 - raw[..., 3] ** 2)
            bad = qx >= -1e-12 * np.sum(raw * raw, axis=-1)
            lift = raw / np.sqrt(np.where(bad, 1.0, -qx))[..., None]
            # sign fix: x4 > 0, else first sizeable component positive
            sgn = np.sign(lift[..., 3])
            for k in (2, 1, 0):
                sgn = np.where(np.abs(sgn) < 0.5, np.sign(lift[..., k]), sgn)
            lift = lift * np.where(sgn == 0, 1.0, sgn)[..., None]
            babs = np.abs(np.einsum("nvc,uc->nvu", lift * pj.Q_SIGNS, base_lifts))
            sep = np.arccosh(np.maximum(np.max(babs, axis=-1), 1.0))
            sep = np.where(bad, np.inf, sep)
            return lift, sep
        lin, tr = data
        p = np.einsum("nij,vj->nvi", lin, base_pts) + tr[:, None, :]
        diff = p[:, :, None, :] - base_pts[None, None, :, :]
        sep = np.min(np.linalg.norm(diff, axis=-1), axis=-1)
        return p, sep

    def children(words, data):
        """All one-symbol extensions of reduced words, vectorized."""
        idx_rows = []
        idx_syms = []
        new_words = []
        for i, w in enumerate(words):
            for si, s in enumerate(symbols):
                if w and w[-1] == -s:
                    continue
                idx_rows.append(i)
                idx_syms.append(si)
                new_words.append(w + (s,))
        ir = np.array(idx_rows, dtype=int)
        js = np.array(idx_syms, dtype=int)
        if ads:
            gl, gr = data
            ngl = np.einsum("nij,njk->nik", gl[ir], gens_l[js])
            ngr = np.einsum("nij,njk->nik", gr[ir], gens_r[js])
            dl = np.sqrt(np.abs(ngl[:, 0, 0] * ngl[:, 1, 1] - ngl[:, 0, 1] * ngl[:, 1, 0]))
            dr = np.sqrt(np.abs(ngr[:, 0, 0] * ngr[:, 1, 1] - ngr[:, 0, 1] * ngr[:, 1, 0]))
            return new_words, (ngl / dl[:, None, None], ngr / dr[:, None, None])
        lin, tr = data
        nlin = np.einsum("nij,njk->nik", lin[ir], gens_lin[js])
        ntr = np.einsum("nij,nj->ni", lin[ir], gens_tr[js]) + tr[ir]
        return new_words, (nlin, ntr)

    if ads:
        frontier_words = [()]
        frontier_data = (np.eye(2)[None], np.eye(2)[None])
    else:
        frontier_words = [()]
        frontier_data = (np.eye(3)[None], np.zeros((1, 3)))

    rows = []   # (vid, word, coords, sep) in shortlex order
    pruning = prune_factor is not None or prune_radius is not None
    cutoff = prune_radius
    step = None
    for length in range(L + 1):
        if length > 0:
            frontier_words, frontier_data = children(frontier_words, frontier_data)
        coords, seps = batch_images(frontier_data)
        for i, w in enumerate(frontier_words):
            for j, vid in enumerate(vids):
                if np.isfinite(seps[i, j]):
                    rows.append((vid, w, coords[i, j], float(seps[i, j])))
        if pruning and L > 2:
            if length == 1:
                step = max(sep for _, w, _, sep in rows if len(w) == 1)
            if length == 2 and prune_radius is None:
                r2 = max(sep for _, w, _, sep in rows if len(w) <= 2)
                cutoff = prune_factor * r2
            if length >= 2 and cutoff is not None:
                word_sep = np.min(seps, axis=1)
                keep = np.nonzero(word_sep <= cutoff + step)[0]
                frontier_words = [frontier_words[i] for i in keep]
                frontier_data = (frontier_data[0][keep], frontier_data[1][keep])

    # deduplicate by image point (shortlex-least word wins; rows are in order)
    seen = set()
    pts = []
    for vid, w, coords, sep in rows:
        key = (vid,) + tuple(np.round(coords, DEDUP_DECIMALS))
        if key in seen:
            continue
        seen.add(key)
        pts.append((vid, w, coords, sep))
    if pruning and L >= 2:
        if prune_radius is not None:
            final = prune_radius
        else:
            final = prune_factor * max(sep for _, w, _, sep in pts if len(w) <= 2)
        pts = [row for row in pts if row[3] <= final or len(row[1]) <= 1]
    return pts


def limit_set_sample(rep_left: fg.FuchsianRep, rep_right: fg.FuchsianRep, L: int):
    """Boundary points (word, lift) from attracting fixed-point pairs.

    Built in the action model, so the samples are genuine accumulation
    points of the isometry-group orbit; for a diagonal pair they fill the
    boundary circle of the convex core plane (the chart's infinity circle).
    Non-hyperbolic words are skipped and reported in the second output.
    """
    samples = []
    skipped = []
    seen = set()
    for w in fg.reduced_words(L, include_empty=False):
        try:
            fl, _ = fg.fixed_points(rep_left, w)
            fr, _ = fg.fixed_points(rep_right, w)
        except fg.NotHyperbolic:
            skipped.append(w)
            continue
        p = pj.frame_boundary_point(fl, fr)
        lift = p.normalized_boundary()
        key = tuple(np.round(lift, DEDUP_DECIMALS))
        if key in seen:
            continue
        seen.add(key)
        samples.append((w, lift))
    return samples, skipped


# -- hull surfaces -----------------------------------------------------------

class HullSurface:
    """Future-/past-convex boundary component of an equivariant hull."""

    def __init__(self, config, labels, coords, faces, surface_faces, chart,
                 lifts=None, truncation=None):
        self.config = config
        self.labels = labels              # (vid, word) or ('lim', word)
        self.coords = coords              # chart coordinates per label
        self.faces = faces                # all hull faces (dicts)
        self.surface_faces = surface_faces  # indices of the returned side
        self.chart = chart
        self.lifts = lifts
        self.truncation = truncation
        self._celluation = None

    @property
    def side(self):
        return self.config.side

    def fundamental_faces(self):
        """Surface faces incident to a canonical (empty-word) vertex."""
        out = []
        for fi in self.surface_faces:
            cyc = self.faces[fi]["cycle"]
            if any(self.labels[i][1] == () for i in cyc):
                out.append(fi)
        return out

    def face_keys(self):
        keys = set()
        for fi in self.fundamental_faces():
            cyc = [self.labels[i] for i in self.faces[fi]["cycle"]]
            keys.add(canonical_face_key(cyc))
        return keys

    def celluation(self):
        if self._celluation is None:
            self._celluation = quotient_celluation(self)
        return self._celluation

    def to_obj(self) -> str:
        lines = ["# adsweyl hull surface", f"# side: {self.side}"]
        index = {}
        for fi in self.surface_faces:
            for i in self.faces[fi]["cycle"]:
                if i not in index:
                    index[i] = len(index) + 1
                    x = self.coords[i]
                    lines.append(f"# label {self.labels[i]}")
                    lines.append(f"v {x[0]:.17g} {x[1]:.17g} {x[2]:.17g}")
        for fi in self.surface_faces:
            lines.append("f " + " ".join(str(index[i]) for i in self.faces[fi]["cycle"]))
        return "\n".join(lines) + "\n"


def canonical_face_key(cycle_labels):
    """Rotation- and translation-invariant key of a labeled face cycle."""
    best = None
    n = len(cycle_labels)
    for r in range(n):
        v0, w0 = cycle_labels[r]
        w0i = fg.word_inverse(w0)
        cand = tuple(
            (cycle_labels[(r + i) % n][0],
             fg.canonical_word(w0i + cycle_labels[(r + i) % n][1]))
            for i in range(n))
        if best is None or cand < best:
            best = cand
    return best


def canonical_edge_key(label_a, label_b):
    va, wa = label_a
    vb, wb = label_b
    k1 = (va, vb, fg.canonical_word(fg.word_inverse(wa) + wb))
    k2 = (vb, va, fg.canonical_word(fg.word_inverse(wb) + wa))
    return min(k1, k2)


def _ads_chart_center(lifts: np.ndarray, seps: np.ndarray) -> np.ndarray:
    """Interior point c with b(x, c) < 0 for every signed lift.

    Seeded by the near-base lifts (whose normalization signs are mutually
    consistent), then iterated with b-consistent re-signing.  Far orbit
    points can wrap around the projective model, so x4-positivity alone is
    not a valid signing.
    """
    order = np.argsort(seps)
    near = lifts[order[:min(len(lifts), 24)]]
    c = near.mean(axis=0)
    qc = pj.quadratic_form(c)
    if qc >= 0:
        raise pj.DegenerateCone("near-base lifts have no timelike mean")
    c = c / np.sqrt(-qc)
    for _ in range(4):
        b = lifts @ (pj.Q_SIGNS * c)
        signed = lifts * np.where(b > 0, -1.0, 1.0)[:, None]
        c2 = signed.mean(axis=0)
        q2 = pj.quadratic_form(c2)
        if q2 >= 0:
            break
        c = c2 / np.sqrt(-q2)
    b = np.abs(lifts @ (pj.Q_SIGNS * c))
    if np.any(b < 1e-9 * np.linalg.norm(lifts, axis=1)):
        raise pj.DegenerateCone("orbit is not on one side of the chart plane")
    return c


def _build_hull(config: VertexConfig, L: int, limit_L: int,
                prune_factor: float = 1.7, prune_radius: float = None):
    """Labeled point cloud, chart, and exact hull for one truncation level."""
    orb = orbit(config, L, prune_factor=prune_factor, prune_radius=prune_radius)
    labels = [(vid, w) for vid, w, _, _ in orb]
    if config.geometry == "minkowski":
        coords = np.array([p for _, _, p, _ in orb])
        chart = None
        lifts = None
    else:
        lifts = np.array([x for _, _, x, _ in orb])
        seps = np.array([s for _, _, _, s in orb])
        chart = pj.AffineChart(_ads_chart_center(lifts, seps))
        lifts = list(lifts)
        sams, _ = limit_set_sample(config.rep_left, config.rep_right, limit_L)
        for w, lift in sams:
            labels.append(("lim", w))
            lifts.append(lift)
        lifts = np.array([chart.signed_lift(x) for x in lifts])
        coords = np.array([chart.to_chart(x) for x in lifts])
    hull = hulls.convex_hull(coords)
    return labels, coords, lifts, chart, hull


def _face_is_spacelike(face, chart, geometry) -> bool:
    n = face["normal"]
    if geometry == "minkowski":
        return n[2] ** 2 > n[0] ** 2 + n[1] ** 2
    w = (face["offset"] * chart.center + n[0] * chart.basis[0]
         + n[1] * chart.basis[1] - n[2] * chart.basis[2])
    return pj.quadratic_form(w) < 0


def _surface_face_ids(labels, coords, hull, config, chart):
    """Faces of the requested side: past-facing, orbit-labeled only."""
    if config.geometry == "minkowski":
        fut = np.array([0.0, 0.0, 1.0])
    else:
        orb_idx = [i for i, lb in enumerate(labels) if lb[0] != "lim"]
        lim_idx = [i for i, lb in enumerate(labels) if lb[0] == "lim"]
        if not lim_idx:
            raise NonSpacelikeFace("AdS hull needs limit-set samples")
        fut = np.mean(coords[lim_idx], axis=0) - np.mean(coords[orb_idx], axis=0)
        fut = fut / np.linalg.norm(fut)
    out = []
    for fi, face in enumerate(hull.faces):
        if float(np.dot(face["normal"], fut)) >= 0.0:
            continue
        if any(labels[i][0] == "lim" for i in face["cycle"]):
            continue
        out.append(fi)
    return out


def convex_boundary(config: VertexConfig, L: int = 4, limit_L: int = 3,
                    stability_check: bool = True,
                    prune_factor: float = 1.7,
                    prune_radius: float = None) -> HullSurface:
    """Convex boundary surface of the truncated equivariant hull.

    Raises NonSpacelikeFace when a returned face fails the spacelike
    criterion and UnstableHull when the fundamental face celluation still
    changes between truncation L-1 and L.
    """
    work = config if config.side == "future" else config.time_reversed()

    labels, coords, lifts, chart, hull = _build_hull(work, L, limit_L, prune_factor,
                                                     prune_radius)
    surf_ids = _surface_face_ids(labels, coords, hull, work, chart)
    if not surf_ids:
        raise NonSpacelikeFace("no faces on the requested side")
    kept = []
    for fi in surf_ids:
        if _face_is_spacelike(hull.faces[fi], chart, work.geometry):
            kept.append(fi)
        elif any(labels[i][1] == () for i in hull.faces[fi]["cycle"]):
            # non-spacelike faces at the truncation rim are discarded, but a
            # bad face at the fundamental domain means the data is unusable
            raise NonSpacelikeFace(f"fundamental face {fi} is not spacelike")
    surface = HullSurface(config, labels, coords, hull.faces, kept, chart,
                          lifts=lifts, truncation=L)

    if stability_check and L >= 1:
        prev_labels, prev_coords, _, prev_chart, prev_hull = _build_hull(
            work, L - 1, limit_L, prune_factor, prune_radius)
        try:
            prev_ids = _surface_face_ids(prev_labels, prev_coords, prev_hull, work, prev_chart)
        except NonSpacelikeFace as exc:
            raise UnstableHull(f"truncation L-1 has no surface: {exc}") from exc
        prev_keys = set()
        for fi in prev_ids:
            cyc = [prev_labels[i] for i in prev_hull.faces[fi]["cycle"]]
            if any(lb[1] == () for lb in cyc):
                prev_keys.add(canonical_face_key(cyc))
        if prev_keys != surface.face_keys():
            raise UnstableHull(
                f"fundamental faces changed between L={L - 1} and L={L}")
    return surface


def convex_position(config: VertexConfig, L: int = 4, limit_L: int = 3,
                    prune_factor: float = 1.7) -> str:
    """'strict', 'convex' or 'not_convex' for the marked points."""
    work = config if config.side == "future" else config.time_reversed()
    labels, coords, lifts, chart, hull = _build_hull(work, L, limit_L, prune_factor)
    verdict = "strict"
    for vid in work.vertex_ids():
        idx = next(i for i, lb in enumerate(labels) if lb == (vid, ()))
        status = hull.vertex_status[idx]
        if status == "interior":
            return "not_convex"
        if status == "boundary":
            verdict = "convex"
    return verdict


# -- quotient celluation and the intrinsic metric ---------------------------

class Celluation:
    """Quotient data: labeled triangulation, metric, canonical keys."""

    def __init__(self, metric, edge_keys, face_keys, corner_labels):
        self.metric = metric
        self.edge_keys = list(edge_keys)
        self.face_keys = set(face_keys)
        self.corner_labels = corner_labels

    def key_set(self):
        return frozenset(self.edge_keys)

    def hash(self) -> str:
        import hashlib
        blob = repr(sorted(self.edge_keys)) + repr(sorted(self.face_keys))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def quotient_celluation(surface: HullSurface) -> Celluation:
    """Quotient the fundamental faces by the group labeling.

    Each face class is represented once (canonical key), fan-triangulated
    from its least label, and glued along canonical edge keys.  Raises
    QuotientError when the labels do not assemble into a closed genus-2
    celluation (truncation too small).
    """
    config = surface.config
    work = config if config.side == "future" else config.time_reversed()
    reps = {}
    for fi in surface.fundamental_faces():
        cyc = [surface.labels[i] for i in surface.faces[fi]["cycle"]]
        key = canonical_face_key(cyc)
        if key not in reps:
            reps[key] = key  # the canonical cycle itself is a representative
    if not reps:
        raise QuotientError("no fundamental faces to quotient")

    tri_corners = []
    for key in sorted(reps, key=lambda k: (len(k), k)):
        cyc = list(key)
        pivot = min(range(len(cyc)), key=lambda i: (cyc[i][0], fg._shortlex_key(cyc[i][1])))
        cyc = cyc[pivot:] + cyc[:pivot]
        for i in range(1, len(cyc) - 1):
            tri_corners.append((cyc[0], cyc[i], cyc[i + 1]))

    edge_index = {}
    edge_keys = []
    triangles = []
    vertices = sorted({lb[0] for t in tri_corners for lb in t})
    for corners in tri_corners:
        eidx = []
        for j in range(3):
            k = canonical_edge_key(corners[j], corners[(j + 1) % 3])
            if k not in edge_index:
                edge_index[k] = len(edge_keys)
                edge_keys.append(k)
            eidx.append(edge_index[k])
        triangles.append(cm.Triangle(tuple(lb[0] for lb in corners), tuple(eidx)))

    if vertices != work.vertex_ids():
        raise QuotientError(
            f"marked points {set(work.vertex_ids()) - set(vertices)} are not surface vertices")
    try:
        tri = cm.MarkedTriangulation(vertices, len(edge_keys), triangles)
    except cm.InvalidTriangulation as exc:
        raise QuotientError(f"labels do not close up a genus-2 surface: {exc}") from exc

    lengths = np.array([work.edge_length(k) for k in edge_keys])
    geometry = "hyperbolic" if config.geometry == "ads" else "euclidean"
    try:
        metric = cm.ConeMetric(tri, lengths, geometry)
    except cm.DegenerateTriangle as exc:
        raise QuotientError(f"degenerate quotient triangle: {exc}") from exc
    face_keys = set(reps)
    return Celluation(metric, edge_keys, face_keys, tri_corners)


def intrinsic_metric(surface: HullSurface) -> cm.ConeMetric:
    """Intrinsic cone-metric of the boundary surface (hyperbolic for AdS,
    Euclidean for Minkowski)."""
    return surface.celluation().metric


# -- geometric transition check ---------------------------------------------

def surface_flatness(surface: HullSurface) -> float:
    """Smallest normal gap between adjacent surface faces (chart measure).

    Near-zero values flag nearly coplanar neighbors, where the face
    lattice becomes tie-broken by rounding; fixtures should stay clear.
    """
    edge_map = {}
    worst = np.inf
    for fi in surface.surface_faces:
        cyc = surface.faces[fi]["cycle"]
        for k in range(len(cyc)):
            e = (min(cyc[k], cyc[(k + 1) % len(cyc)]),
                 max(cyc[k], cyc[(k + 1) % len(cyc)]))
            if e in edge_map and edge_map[e] != fi:
                n1 = surface.faces[edge_map[e]]["normal"]
                n2 = surface.faces[fi]["normal"]
                worst = min(worst, float(1.0 - abs(np.dot(n1, n2))))
            else:
                edge_map[e] = fi
    return worst


def transition_check(config0: VertexConfig, t_list, L: int = 5, limit_L: int = 2,
                     stability_check: bool = False) -> dict:
    """Compare rescaled AdS hulls against the Minkowski blow-up limit.

    For each t the AdS configuration at transition parameter t is built,
    its face celluation compared with the Minkowski one (subdivision =
    every flat edge class persists), and shared edges report the ratio
    AdS length / (t * flat length).
    """
    if config0.geometry != "minkowski":
        raise ValueError("transition check starts from a Minkowski configuration")
    surf0 = convex_boundary(config0, L, limit_L, stability_check=stability_check)
    cel0 = surf0.celluation()
    keys0 = set(cel0.edge_keys)
    flat = dict(zip(cel0.edge_keys, cel0.metric.lengths))
    lmax = float(np.max(cel0.metric.lengths))

    rows = []
    for t in sorted(t_list, reverse=True):
        ac = ads_config_from_minkowski(config0, t)
        surf = convex_boundary(ac, L, limit_L, stability_check=stability_check,
                               prune_radius=1.6 * t * lmax)
        cel = surf.celluation()
        keys = set(cel.edge_keys)
        subdivision = keys0.issubset(keys)
        ratios = []
        for k, l_ads in zip(cel.edge_keys, cel.metric.lengths):
            if k in flat:
                ratios.append(l_ads / (t * flat[k]))
        rows.append({"t": float(t), "subdivision": subdivision,
                     "n_shared": len(ratios),
                     "max_ratio_err": float(np.max(np.abs(np.array(ratios) - 1.0)))
                     if ratios else float("nan"),
                     "face_count": len(cel.face_keys)})
    errs = np.array([r["max_ratio_err"] for r in rows])
    ts = np.array([r["t"] for r in rows])
    ok = np.isfinite(errs) & (errs > 1e-14)
    slope = float(np.polyfit(np.log(ts[ok]), np.log(errs[ok]), 1)[0]) if ok.sum() >= 2 else float("nan")
    return {"rows": rows, "slope": slope,
            "all_subdivision": all(r["subdivision"] for r in rows)}


# -- Fuchsian level-surface area ---------------------------------------------

def fuchsian_level_area(rep: fg.FuchsianRep, r: float, samples: int = 1_000_000,
                        seed: int = 0, word_depth: int = 4) -> float:
    """Monte-Carlo area of the timelike-radius-r sphere about the base point,
    per fundamental domain of the diagonal (Fuchsian) action.

    The sphere is parameterized by the hyperboloid of future timelike unit
    directions, on which the diagonal action is the adjoint representation;
    the induced area element is measured by finite differences of the
    embedding through the ambient form.  Membership in the Dirichlet
    fundamental domain is tested against a word-ball of translates.
    """
    if not (0.0 < r < np.pi / 2):
        raise ValueError("radius must lie in (0, pi/2)")
    rng = np.random.default_rng(seed)
    base = np.array([0.0, 0.0, 1.0])

    mats = {}
    for w in fg.reduced_words(word_depth, include_empty=False):
        m = fg.linear_part(rep, w)
        key = tuple(np.round(m.flatten(), 8))
        mats.setdefault(key, m)
    translates = np.array([m @ base for m in mats.values()])
    d_b = np.arccosh(np.maximum(1.0, translates[:, 2]))
    R = float(np.max(d_b)) / 2.0 + 0.5

    for _ in range(3):
        keep = translates[d_b <= 2.0 * R + 0.2]
        area, rim_frac = _mc_level_area(rng, base, keep, R, r, samples)
        if rim_frac < 1e-6:
            return area
        R += 0.5
    return area


def _mc_level_area(rng, base, translates, R, r, samples):
    u01 = rng.random(samples)
    s = np.arccosh(1.0 + u01 * (np.cosh(R) - 1.0))
    th = rng.random(samples) * 2.0 * np.pi
    sh = np.sinh(s)
    u = np.stack([sh * np.cos(th), sh * np.sin(th), np.cosh(s)], axis=1)

    # Dirichlet membership: cosh d(u, b) <= min over translates
    cosh_to_base = u[:, 2]
    in_dom = np.ones(samples, dtype=bool)
    chunk = 200_000
    for lo in range(0, samples, chunk):
        hi = min(samples, lo + chunk)
        block = u[lo:hi]
        # -<u, t>_{2,1} = cosh of the hyperbolic distance
        m = block[:, :2] @ translates[:, :2].T - block[:, 2:3] * translates[:, 2:3].T
        in_dom[lo:hi] = cosh_to_base[lo:hi] <= -np.max(m, axis=1) + 1e-12
    rim = in_dom & (s > R - 0.25)
    rim_frac = float(np.mean(rim))

    idx = np.nonzero(in_dom)[0]
    J = _sphere_area_element(u[idx], r)
    disk_area = 2.0 * np.pi * (np.cosh(R) - 1.0)
    area = disk_area * float(np.sum(J)) / samples
    return area, rim_frac


def _sphere_area_element(u, r, eps=1e-4):
    """sqrt(det) of the induced first fundamental form of exp_o(r * u),
    against an orthonormal tangent frame of the direction hyperboloid."""
    n = len(u)
    ex = np.zeros((n, 3))
    ex[:, 0] = 1.0
    t1 = ex + u * u[:, 0:1]                      # project e_x along u (q3)
    t1 /= np.sqrt(_q3(t1, t1))[:, None]
    ey = np.zeros((n, 3))
    ey[:, 1] = 1.0
    t2 = ey + u * u[:, 1:2] - t1 * _q3(ey, t1)[:, None]
    t2 /= np.sqrt(_q3(t2, t2))[:, None]

    def emb(direction):
        # exp_o of r * unit timelike direction, as a 4-lift
        out = np.zeros((len(direction), 4))
        out[:, 3] = np.cos(r)
        out[:, :3] = np.sin(r) * direction
        return out

    def hyp_step(t):
        return np.cosh(eps) * u + np.sinh(eps) * t

    g = np.empty((n, 2, 2))
    d1 = (emb(hyp_step(t1)) - emb(hyp_step(-t1))) / (2.0 * np.sinh(eps))
    d2 = (emb(hyp_step(t2)) - emb(hyp_step(-t2))) / (2.0 * np.sinh(eps))
    g[:, 0, 0] = _q4(d1, d1)
    g[:, 1, 1] = _q4(d2, d2)
    g[:, 0, 1] = g[:, 1, 0] = _q4(d1, d2)
    det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] ** 2
    return np.sqrt(np.maximum(det, 0.0))


def _q3(a, b):
    return a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1] - a[:, 2] * b[:, 2]


def _q4(a, b):
    return (a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
            - a[:, 2] * b[:, 2] - a[:, 3] * b[:, 3])
