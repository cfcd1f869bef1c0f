"""Cone-metrics on the marked genus-2 surface in edge-length charts.

A MarkedTriangulation is a labeled combinatorial triangulation of the
closed genus-2 surface with marked vertex set V: triangles carry corner
vertex ids and directed edge slots (slot j runs from corner j to corner
j+1).  Multi-edges and self-gluings are allowed, so triangles reference
edges by index, never by endpoint pair.

A ConeMetric adds one positive length per edge and a geometry flag.  The
chart of a fixed triangulation is the open cone cut out by the strict
triangle inequalities; curvature at a vertex is 2*pi minus the total
corner angle, and Gauss-Bonnet pins sum(kappa) = -4*pi exactly in the
Euclidean case and -4*pi - Area in the hyperbolic case.
"""

from __future__ import annotations

import numpy as np

CONCAVE_TOL = 1e-9
ACOS_CLAMP = 1e-14


class DegenerateTriangle(Exception):
    pass


class NonConvexQuad(Exception):
    pass


class SelfGluedEdge(Exception):
    pass


class CombinatoricsMismatch(Exception):
    pass


class InvalidTriangulation(Exception):
    pass


class Triangle:
    """Oriented triangle: corner vertex ids and edge indices per slot."""

    __slots__ = ("corners", "edges")

    def __init__(self, corners, edges):
        self.corners = tuple(corners)
        self.edges = tuple(edges)

    def __repr__(self):
        return f"Triangle({self.corners}, {self.edges})"


class MarkedTriangulation:
    def __init__(self, vertices, n_edges: int, triangles, validate: bool = True):
        self.vertices = list(vertices)
        self.n_edges = int(n_edges)
        self.triangles = [t if isinstance(t, Triangle) else Triangle(*t) for t in triangles]
        if validate:
            self.validate()

    def validate(self):
        counts = np.zeros(self.n_edges, dtype=int)
        for t in self.triangles:
            for e in t.edges:
                if not 0 <= e < self.n_edges:
                    raise InvalidTriangulation(f"edge index {e} out of range")
                counts[e] += 1
            for v in t.corners:
                if v not in self.vertices:
                    raise InvalidTriangulation(f"corner vertex {v} unknown")
        if np.any(counts != 2):
            raise InvalidTriangulation("every edge must appear in exactly two triangle slots")
        chi = len(self.vertices) - self.n_edges + len(self.triangles)
        if chi != -2:
            raise InvalidTriangulation(f"Euler characteristic {chi} != -2")
        self._check_links()

    def _slot_pairs(self):
        """Pair up the two triangle slots carrying each edge."""
        where = {}
        pair = {}
        for ti, t in enumerate(self.triangles):
            for j, e in enumerate(t.edges):
                if e in where:
                    pair[(ti, j)] = where[e]
                    pair[where[e]] = (ti, j)
                else:
                    where[e] = (ti, j)
        return pair

    def _check_links(self):
        """Each vertex link must be a single cycle of corners."""
        pair = self._slot_pairs()
        corners = [(ti, j) for ti, t in enumerate(self.triangles) for j in range(3)]
        visited = set()
        cycles_at = {v: 0 for v in self.vertices}
        for start in corners:
            if start in visited:
                continue
            v = self.triangles[start[0]].corners[start[1]]
            cycles_at[v] += 1
            cur = start
            while True:
                visited.add(cur)
                ti, j = cur
                # cross the outgoing edge slot j, land at the partner slot
                pt, pj = pair[(ti, j)]
                t2 = self.triangles[pt]
                # partner slot runs pj -> pj+1; our vertex sits at one end
                nxt = (pt, (pj + 1) % 3)
                if t2.corners[nxt[1]] != v:
                    nxt = (pt, pj)
                if t2.corners[nxt[1]] != v:
                    raise InvalidTriangulation("edge pairing does not respect endpoints")
                cur = nxt
                if cur == start:
                    break
                if cur in visited:
                    raise InvalidTriangulation("vertex link is not a simple cycle")
        for v, c in cycles_at.items():
            if c != 1:
                raise InvalidTriangulation(f"link of vertex {v} has {c} cycles")

    def edge_endpoints(self, e: int):
        for t in self.triangles:
            for j in range(3):
                if t.edges[j] == e:
                    return (t.corners[j], t.corners[(j + 1) % 3])
        raise KeyError(e)

    def copy(self) -> "MarkedTriangulation":
        return MarkedTriangulation(self.vertices, self.n_edges,
                                   [Triangle(t.corners, t.edges) for t in self.triangles],
                                   validate=False)

    def same_combinatorics(self, other: "MarkedTriangulation") -> bool:
        if self.vertices != other.vertices or self.n_edges != other.n_edges:
            return False
        if len(self.triangles) != len(other.triangles):
            return False
        return all(a.corners == b.corners and a.edges == b.edges
                   for a, b in zip(self.triangles, other.triangles))


class ConeMetric:
    def __init__(self, tri: MarkedTriangulation, lengths, geometry: str,
                 validate: bool = True):
        if geometry not in ("hyperbolic", "euclidean"):
            raise ValueError("geometry must be 'hyperbolic' or 'euclidean'")
        self.tri = tri
        self.lengths = np.asarray(lengths, dtype=float).reshape(tri.n_edges)
        self.geometry = geometry
        if validate:
            if np.any(self.lengths <= 0):
                raise DegenerateTriangle("edge lengths must be positive")
            for t in tri.triangles:
                a, b, c = (self.lengths[e] for e in t.edges)
                if a >= b + c or b >= a + c or c >= a + b:
                    raise DegenerateTriangle(f"triangle inequality fails on {t}")

    def triangle_lengths(self, ti: int):
        t = self.tri.triangles[ti]
        return tuple(self.lengths[e] for e in t.edges)

    def copy(self) -> "ConeMetric":
        return ConeMetric(self.tri.copy(), self.lengths.copy(), self.geometry,
                          validate=False)


def triangle_angles(a: float, b: float, c: float, geometry: str):
    """Angles (alpha, beta, gamma) opposite to sides (a, b, c)."""
    for s in (a, b, c):
        if s <= 0:
            raise DegenerateTriangle("side lengths must be positive")
    if a >= b + c or b >= a + c or c >= a + b:
        raise DegenerateTriangle(f"triangle inequality fails for {(a, b, c)}")
    if geometry == "euclidean":
        cosines = [(b * b + c * c - a * a) / (2 * b * c),
                   (a * a + c * c - b * b) / (2 * a * c),
                   (a * a + b * b - c * c) / (2 * a * b)]
    else:
        ch, sh = np.cosh([a, b, c]), np.sinh([a, b, c])
        cosines = [(ch[1] * ch[2] - ch[0]) / (sh[1] * sh[2]),
                   (ch[0] * ch[2] - ch[1]) / (sh[0] * sh[2]),
                   (ch[0] * ch[1] - ch[2]) / (sh[0] * sh[1])]
    out = []
    for x in cosines:
        out.append(float(np.arccos(np.clip(x, -1.0 + ACOS_CLAMP, 1.0 - ACOS_CLAMP))))
    return tuple(out)


def corner_angle(m: ConeMetric, ti: int, slot: int) -> float:
    """Angle at corner `slot`: opposite to edge slot (slot+1)."""
    a, b, c = m.triangle_lengths(ti)
    angles = triangle_angles(a, b, c, m.geometry)
    # angles[k] is opposite edge slot k; corner j is opposite slot j+1
    return angles[(slot + 1) % 3]


def cone_angles(m: ConeMetric) -> dict:
    total = {v: 0.0 for v in m.tri.vertices}
    for ti, t in enumerate(m.tri.triangles):
        a, b, c = m.triangle_lengths(ti)
        angles = triangle_angles(a, b, c, m.geometry)
        for j in range(3):
            total[t.corners[j]] += angles[(j + 1) % 3]
    return total


def curvature(m: ConeMetric) -> dict:
    """kappa(v) = 2*pi - cone angle."""
    return {v: 2.0 * np.pi - a for v, a in cone_angles(m).items()}


def hyperbolic_area(m: ConeMetric) -> float:
    if m.geometry != "hyperbolic":
        raise ValueError("area defect needs a hyperbolic metric")
    area = 0.0
    for ti in range(len(m.tri.triangles)):
        a, b, c = m.triangle_lengths(ti)
        area += np.pi - sum(triangle_angles(a, b, c, "hyperbolic"))
    return float(area)


def gauss_bonnet_defect(m: ConeMetric) -> float:
    """|sum(kappa) + integral of K - 2*pi*chi| for genus 2 (chi = -2).

    Euclidean: |sum(kappa) + 4*pi|.  Hyperbolic (K = -1): the curvature
    integral is minus the area, so the defect is |sum(kappa) - Area + 4*pi|;
    concave hyperbolic metrics consequently have area < 4*pi.
    """
    total = sum(curvature(m).values())
    if m.geometry == "hyperbolic":
        total -= hyperbolic_area(m)
    return float(abs(total + 4.0 * np.pi))


def is_concave(m: ConeMetric, tol: float = CONCAVE_TOL) -> bool:
    return all(k <= tol for k in curvature(m).values())


def is_strict(m: ConeMetric, tol: float = CONCAVE_TOL) -> bool:
    return all(k < -tol for k in curvature(m).values())


def flip(m: ConeMetric, e: int) -> ConeMetric:
    """Exchange the diagonal e of its strictly convex quadrilateral.

    Isometric retriangulation: the multiset of cone angles is preserved.
    """
    slots = [(ti, j) for ti, t in enumerate(m.tri.triangles)
             for j in range(3) if t.edges[j] == e]
    if len(slots) != 2:
        raise InvalidTriangulation(f"edge {e} does not have two slots")
    (t1i, s1), (t2i, s2) = slots
    if t1i == t2i:
        raise SelfGluedEdge(f"edge {e} is shared by one triangle")
    t1, t2 = m.tri.triangles[t1i], m.tri.triangles[t2i]

    # quad P R2 Q R1 with e = PQ; t1 = (P,Q,R1), t2 = (Q,P,R2) by slots
    a1 = t1.edges[(s1 + 2) % 3]   # R1 -> P
    b1 = t1.edges[(s1 + 1) % 3]   # Q -> R1
    b2 = t2.edges[(s2 + 1) % 3]   # P -> R2
    a2 = t2.edges[(s2 + 2) % 3]   # R2 -> Q
    ang1 = triangle_angles(*m.triangle_lengths(t1i), m.geometry)
    ang2 = triangle_angles(*m.triangle_lengths(t2i), m.geometry)
    alpha = ang1[(s1 + 1) % 3] + ang2[(s2 + 2) % 3]   # at P
    beta = ang1[(s1 + 2) % 3] + ang2[(s2 + 1) % 3]    # at Q
    if alpha >= np.pi - 1e-12 or beta >= np.pi - 1e-12:
        raise NonConvexQuad(f"quad around edge {e} is not strictly convex")

    la1, lb2 = m.lengths[a1], m.lengths[b2]
    if m.geometry == "hyperbolic":
        chf = np.cosh(la1) * np.cosh(lb2) - np.sinh(la1) * np.sinh(lb2) * np.cos(alpha)
        lf = float(np.arccosh(max(chf, 1.0)))
    else:
        lf = float(np.sqrt(max(la1 * la1 + lb2 * lb2 - 2 * la1 * lb2 * np.cos(alpha), 0.0)))

    P, Q, R1 = t1.corners[s1], t1.corners[(s1 + 1) % 3], t1.corners[(s1 + 2) % 3]
    R2 = t2.corners[(s2 + 2) % 3]
    new_tri = m.tri.copy()
    new_tri.triangles[t1i] = Triangle((R1, P, R2), (a1, b2, e))
    new_tri.triangles[t2i] = Triangle((R2, Q, R1), (a2, b1, e))
    new_lengths = m.lengths.copy()
    new_lengths[e] = lf
    out = ConeMetric(new_tri, new_lengths, m.geometry)
    out.tri.validate()
    return out


def scale(m: ConeMetric, t: float) -> ConeMetric:
    if t <= 0:
        raise ValueError("scale factor must be positive")
    return ConeMetric(m.tri, m.lengths * t, m.geometry, validate=False)


def euclidean_limit(m: ConeMetric) -> ConeMetric:
    """Blow-up boundary representative: same edge lengths, flat geometry."""
    return ConeMetric(m.tri, m.lengths.copy(), "euclidean", validate=False)


def metric_distance(m1: ConeMetric, m2: ConeMetric) -> float:
    """Max relative edge-length difference on identical combinatorics."""
    if m1.geometry != m2.geometry or not m1.tri.same_combinatorics(m2.tri):
        raise CombinatoricsMismatch("metrics live on different charts")
    return float(np.max(np.abs(m1.lengths - m2.lengths) / np.minimum(m1.lengths, m2.lengths)))


# -- model triangulations and random metrics (fixtures) --------------------

def one_vertex_triangulation() -> MarkedTriangulation:
    """Fan triangulation of the standard octagon a b a' b' c d c' d'.

    One vertex, 9 edges (4 glued sides + 5 fan diagonals), 6 triangles.
    """
    EA, EB, EC, ED = 0, 1, 2, 3
    D2, D3, D4, D5, D6 = 4, 5, 6, 7, 8
    tris = [
        Triangle((0, 0, 0), (EA, EB, D2)),
        Triangle((0, 0, 0), (D2, EA, D3)),
        Triangle((0, 0, 0), (D3, EB, D4)),
        Triangle((0, 0, 0), (D4, EC, D5)),
        Triangle((0, 0, 0), (D5, ED, D6)),
        Triangle((0, 0, 0), (D6, EC, ED)),
    ]
    return MarkedTriangulation([0], 9, tris)


def _realize_triangle(a, b, c, geometry):
    """Corner positions; Euclidean in the plane, hyperbolic on the hyperboloid."""
    if geometry == "euclidean":
        x = (a * a + c * c - b * b) / (2 * a)
        y2 = c * c - x * x
        return np.array([[0.0, 0.0], [a, 0.0], [x, np.sqrt(max(y2, 0.0))]])
    p0 = np.array([0.0, 0.0, 1.0])
    p1 = np.array([np.sinh(a), 0.0, np.cosh(a)])
    z = np.cosh(c)
    x = (z * np.cosh(a) - np.cosh(b)) / np.sinh(a)
    y2 = z * z - 1.0 - x * x
    return np.array([p0, p1, [x, np.sqrt(max(y2, 0.0)), z]])


def _hyp_dist(p, q):
    return float(np.arccosh(max(1.0, -(p[0] * q[0] + p[1] * q[1] - p[2] * q[2]))))


def insert_vertex(m: ConeMetric, ti: int, bary, new_id: int) -> ConeMetric:
    """Split triangle ti at an interior point with barycentric weights."""
    bary = np.asarray(bary, dtype=float)
    bary = bary / np.sum(bary)
    a, b, c = m.triangle_lengths(ti)
    pts = _realize_triangle(a, b, c, m.geometry)
    t = m.tri.triangles[ti]
    ne = m.tri.n_edges
    if m.geometry == "euclidean":
        p = bary @ pts
        dists = [np.linalg.norm(p - pts[k]) for k in range(3)]
    else:
        klein = pts[:, :2] / pts[:, 2:3]
        u = bary @ klein
        lift = np.array([u[0], u[1], 1.0]) / np.sqrt(max(1e-15, 1.0 - u @ u))
        dists = [_hyp_dist(lift, pts[k]) for k in range(3)]
    # slot k runs corner k -> k+1; realized corner k to the new vertex = dists[k]
    n0, n1, n2 = ne, ne + 1, ne + 2
    v0, v1, v2 = t.corners
    e0, e1, e2 = t.edges
    new_tris = [tr for i, tr in enumerate(m.tri.triangles) if i != ti]
    new_tris += [Triangle((v0, v1, new_id), (e0, n1, n0)),
                 Triangle((v1, v2, new_id), (e1, n2, n1)),
                 Triangle((v2, v0, new_id), (e2, n0, n2))]
    tri = MarkedTriangulation(m.tri.vertices + [new_id], ne + 3, new_tris)
    lengths = np.concatenate([m.lengths, dists])
    return ConeMetric(tri, lengths, m.geometry)


def random_cone_metric(n_vertices: int, geometry: str, rng,
                       base_length: float = 1.0, jitter: float = 0.2,
                       n_flips: int = 6) -> ConeMetric:
    """Random valid cone-metric on a genus-2 triangulation with n_vertices."""
    tri = one_vertex_triangulation()
    m = ConeMetric(tri, np.full(9, base_length), geometry)
    for k in range(n_vertices - 1):
        ti = int(rng.integers(len(m.tri.triangles)))
        bary = rng.uniform(0.25, 0.45, 3)
        m = insert_vertex(m, ti, bary, new_id=k + 1)
    for _ in range(200):
        if jitter <= 0:
            break
        factors = np.exp(rng.uniform(-jitter, jitter, m.tri.n_edges))
        try:
            m = ConeMetric(m.tri, m.lengths * factors, geometry)
            break
        except DegenerateTriangle:
            continue
    flips_done = 0
    attempts = 0
    while flips_done < n_flips and attempts < 60:
        attempts += 1
        e = int(rng.integers(m.tri.n_edges))
        try:
            m = flip(m, e)
            flips_done += 1
        except (NonConvexQuad, SelfGluedEdge, DegenerateTriangle, InvalidTriangulation):
            continue
    return m
