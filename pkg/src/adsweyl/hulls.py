"""Robust 3D convex hulls with exact orientation predicates.

Input coordinates are quantized to integer multiples of 2^-40 (exactly
representable in doubles), so orientation determinants can be evaluated
in arbitrary-precision integer arithmetic when a floating-point filter
cannot certify the sign.  A scipy hull over the raw floats prefilters the
candidate set; the exact incremental hull runs on the survivors.  Face
lattices produced this way are reproducible, which the celluation
comparisons downstream rely on.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull as _SciHull
from scipy.spatial import QhullError as _QhullError

QUANT_STEP = 2.0 ** -40
MERGE_TOL = 1e-9          # coplanarity tolerance for face merging
_FLOAT_EPS = np.finfo(float).eps


class DegenerateInput(Exception):
    pass


class HullFailure(Exception):
    pass


def _exact_orient(pts, a, b, c, d) -> int:
    """Sign of det[b-a, c-a, d-a] in exact integer arithmetic."""
    ax, ay, az = (int(v) for v in pts[a])
    u = (int(pts[b][0]) - ax, int(pts[b][1]) - ay, int(pts[b][2]) - az)
    v = (int(pts[c][0]) - ax, int(pts[c][1]) - ay, int(pts[c][2]) - az)
    w = (int(pts[d][0]) - ax, int(pts[d][1]) - ay, int(pts[d][2]) - az)
    det = (u[0] * (v[1] * w[2] - v[2] * w[1])
           - u[1] * (v[0] * w[2] - v[2] * w[0])
           + u[2] * (v[0] * w[1] - v[1] * w[0]))
    return (det > 0) - (det < 0)


class _FilteredOrient:
    """Vectorized float orientation with a static error filter.

    Quantized integer coordinates are exact in float64, so a determinant
    whose magnitude exceeds the rounding bound has a certified sign; the
    rest fall back to integer arithmetic.
    """

    def __init__(self, ints: np.ndarray):
        self.ints = ints
        self.floats = ints.astype(float)

    def against_faces(self, faces: np.ndarray, p: int) -> np.ndarray:
        """Signs of orient(a, b, c, p) for each face row (a, b, c)."""
        A = self.floats[faces[:, 0]]
        U = self.floats[faces[:, 1]] - A
        V = self.floats[faces[:, 2]] - A
        W = self.floats[p] - A
        det = (U[:, 0] * (V[:, 1] * W[:, 2] - V[:, 2] * W[:, 1])
               - U[:, 1] * (V[:, 0] * W[:, 2] - V[:, 2] * W[:, 0])
               + U[:, 2] * (V[:, 0] * W[:, 1] - V[:, 1] * W[:, 0]))
        Ua, Va, Wa = np.abs(U), np.abs(V), np.abs(W)
        perm = (Ua[:, 0] * (Va[:, 1] * Wa[:, 2] + Va[:, 2] * Wa[:, 1])
                + Ua[:, 1] * (Va[:, 0] * Wa[:, 2] + Va[:, 2] * Wa[:, 0])
                + Ua[:, 2] * (Va[:, 0] * Wa[:, 1] + Va[:, 1] * Wa[:, 0]))
        bound = 16.0 * _FLOAT_EPS * perm
        signs = np.where(det > bound, 1, np.where(det < -bound, -1, 0))
        unsure = np.nonzero(np.abs(det) <= bound)[0]
        for i in unsure:
            a, b, c = faces[i]
            signs[i] = _exact_orient(self.ints, a, b, c, p)
        return signs


def quantize(points: np.ndarray) -> np.ndarray:
    """Round coordinates to a 2^-40 grid relative to the data scale.

    The data is first divided by a power of two bringing the largest
    magnitude into [1, 2) -- exact in floating point -- so the effective
    grid step is always 2^-40 times the coordinate scale.
    """
    points = np.asarray(points, dtype=float)
    top = float(np.max(np.abs(points)))
    if not np.isfinite(top) or top == 0.0:
        raise DegenerateInput("degenerate coordinate data")
    scale = 2.0 ** np.floor(np.log2(top))
    q = np.rint((points / scale) / QUANT_STEP)
    if np.any(np.abs(q) > 2 ** 52):
        raise DegenerateInput("coordinates too large for the quantization grid")
    return q.astype(np.int64)


class HullComplex:
    """Convex hull with merged planar faces.

    faces: list of dicts with 'cycle' (vertex index loop, outward-oriented),
    'normal' (outward float normal), 'offset' (normal . x = offset on the
    plane).  vertex_status[i] is 'vertex', 'boundary' or 'interior'.
    """

    def __init__(self, points, faces, vertex_status, triangles):
        self.points = points
        self.faces = faces
        self.vertex_status = vertex_status
        self.triangles = triangles

    @property
    def vertices(self):
        return [i for i, s in enumerate(self.vertex_status) if s == "vertex"]


def _initial_tetra(orient: _FilteredOrient):
    n = len(orient.ints)
    p0 = 0
    p1 = next((i for i in range(n) if np.any(orient.ints[i] != orient.ints[p0])), None)
    if p1 is None:
        raise DegenerateInput("all points coincide")
    p2 = None
    ux, uy, uz = (int(v) for v in orient.ints[p1] - orient.ints[p0])
    for i in range(n):
        if i in (p0, p1):
            continue
        vx, vy, vz = (int(w) for w in orient.ints[i] - orient.ints[p0])
        if (uy * vz - uz * vy) or (uz * vx - ux * vz) or (ux * vy - uy * vx):
            p2 = i
            break
    if p2 is None:
        raise DegenerateInput("all points collinear")
    p3 = None
    for i in range(n):
        if i in (p0, p1, p2):
            continue
        if _exact_orient(orient.ints, p0, p1, p2, i) != 0:
            p3 = i
            break
    if p3 is None:
        raise DegenerateInput("all points coplanar")
    return p0, p1, p2, p3


def _exact_hull_triangles(ints: np.ndarray):
    """Incremental hull; returns outward-oriented triangles (index triples)."""
    orient = _FilteredOrient(ints)
    n = len(ints)
    p0, p1, p2, p3 = _initial_tetra(orient)
    if _exact_orient(ints, p0, p1, p2, p3) > 0:
        p1, p2 = p2, p1
    # outward convention: orient(face, interior) < 0
    cap = 8 * n + 16
    faces = np.empty((cap, 3), dtype=np.int64)
    alive = np.zeros(cap, dtype=bool)
    n_rows = 0
    for t in ((p0, p1, p2), (p0, p3, p1), (p1, p3, p2), (p2, p3, p0)):
        faces[n_rows] = t
        alive[n_rows] = True
        n_rows += 1

    skip = {p0, p1, p2, p3}
    for p in range(n):
        if p in skip:
            continue
        rows = np.nonzero(alive[:n_rows])[0]
        signs = orient.against_faces(faces[rows], p)
        vis_rows = rows[signs > 0]
        if len(vis_rows) == 0:
            continue
        horizon = {}
        for r in vis_rows:
            a, b, c = faces[r]
            for (u, v) in ((int(a), int(b)), (int(b), int(c)), (int(c), int(a))):
                if (v, u) in horizon:
                    del horizon[(v, u)]
                else:
                    horizon[(u, v)] = None
        alive[vis_rows] = False
        for (u, v) in horizon:
            if n_rows == cap:
                extra = np.empty((cap, 3), dtype=np.int64)
                faces = np.vstack([faces, extra])
                alive = np.concatenate([alive, np.zeros(cap, dtype=bool)])
                cap *= 2
            faces[n_rows] = (u, v, p)
            alive[n_rows] = True
            n_rows += 1

    tris = [tuple(int(x) for x in faces[r]) for r in np.nonzero(alive[:n_rows])[0]]

    # verification sweep: every point weakly inside every face plane
    faces_arr = np.array(tris, dtype=np.int64)
    for p in range(n):
        signs = orient.against_faces(faces_arr, p)
        if np.any(signs > 0):
            raise HullFailure(f"point {p} remains outside the reported hull")
    return tris


def _merge_faces(points_float, tris, tol=MERGE_TOL):
    """Union-find merge of adjacent coplanar triangles (float tolerance)."""
    scale = max(1.0, float(np.max(np.abs(points_float))))
    parent = list(range(len(tris)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edge_owner = {}
    tri_arr = np.asarray(tris, dtype=np.int64)
    U = points_float[tri_arr[:, 1]] - points_float[tri_arr[:, 0]]
    V = points_float[tri_arr[:, 2]] - points_float[tri_arr[:, 0]]
    normals = np.cross(U, V)
    lens = np.linalg.norm(normals, axis=1, keepdims=True)
    normals = normals / np.where(lens > 0, lens, 1.0)
    for i, (a, b, c) in enumerate(tris):
        for (u, v) in ((a, b), (b, c), (c, a)):
            j = edge_owner.get((v, u))
            if j is None:
                edge_owner[(u, v)] = i
                continue
            # coplanar when each triangle's opposite vertex lies on the
            # other's plane within tolerance
            oi = [x for x in tris[i] if x not in (u, v)][0]
            dj = abs(np.dot(points_float[oi] - points_float[tris[j][0]], normals[j]))
            if dj < tol * scale:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(len(tris)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _group_cycle(tris, group):
    """Outer boundary cycle of a group of consistently oriented triangles."""
    edges = {}
    for gi in group:
        a, b, c = tris[gi]
        for (u, v) in ((a, b), (b, c), (c, a)):
            if (v, u) in edges:
                del edges[(v, u)]
            else:
                edges[(u, v)] = None
    succ = {}
    for (u, v) in edges:
        if u in succ:
            raise HullFailure("merged face boundary is not a simple cycle")
        succ[u] = v
    if not succ:
        raise HullFailure("merged face has empty boundary")
    start = next(iter(succ))
    cycle = [start]
    cur = succ[start]
    while cur != start:
        cycle.append(cur)
        if len(cycle) > len(succ):
            raise HullFailure("merged face boundary is not closed")
        cur = succ[cur]
    return cycle


def convex_hull(points: np.ndarray, prefilter: bool = True) -> HullComplex:
    """Exact-predicate convex hull of labeled 3D points, faces merged.

    Points interior to the hull are reported with status 'interior';
    points on the boundary that are not extreme get 'boundary'.
    """
    points = np.asarray(points, dtype=float)
    if len(points) < 4:
        raise DegenerateInput("need at least four points")
    ints_all = quantize(points)

    cand = np.arange(len(points))
    if prefilter and len(points) > 60:
        try:
            sci = _SciHull(points)
        except _QhullError as exc:
            raise DegenerateInput(f"degenerate input set: {exc}") from exc
        eqs = sci.equations
        dists = points @ eqs[:, :3].T + eqs[:, 3]
        margin = 1e-7 * max(1.0, float(np.max(np.abs(points))))
        cand = np.nonzero(np.max(dists, axis=1) > -margin)[0]
        if len(cand) < 4:
            cand = np.arange(len(points))

    ints = ints_all[cand]
    # deduplicate identical quantized points (keep first occurrence)
    _, uniq_idx = np.unique(ints, axis=0, return_index=True)
    uniq_idx = np.sort(uniq_idx)
    sub = cand[uniq_idx]
    tris_sub = _exact_hull_triangles(ints_all[sub])
    tris = [(int(sub[a]), int(sub[b]), int(sub[c])) for (a, b, c) in tris_sub]

    groups = _merge_faces(points, tris)
    faces = []
    for group in groups:
        try:
            pieces = [(_group_cycle(tris, group), group[0])]
        except HullFailure:
            # near-degenerate merge chain (possible among sliver faces far
            # from the data of interest): fall back to unmerged triangles
            pieces = [(list(tris[gi]), gi) for gi in group]
        for cycle, ti in pieces:
            a, b, c = tris[ti]
            nrm = np.cross(points[b] - points[a], points[c] - points[a])
            nrm = nrm / np.linalg.norm(nrm)
            faces.append({"cycle": cycle, "normal": nrm,
                          "offset": float(np.dot(nrm, points[a]))})

    on_face = set()
    for f in faces:
        on_face.update(f["cycle"])
    scale = max(1.0, float(np.max(np.abs(points))))
    status = []
    normals = np.array([f["normal"] for f in faces])
    offsets = np.array([f["offset"] for f in faces])
    for i in range(len(points)):
        if i in on_face:
            status.append("vertex")
            continue
        d = points[i] @ normals.T - offsets
        status.append("boundary" if np.max(d) > -MERGE_TOL * scale else "interior")
    return HullComplex(points, faces, status, tris)
