"""Quality-controlled random configurations for tests and regression runs.

Generated configurations must be strictly convex, truncation-stable, and
comfortably polyhedral (no nearly coplanar neighbor faces): near-flat
edges make the face lattice tie-broken by rounding, which is exactly the
regime the solvers and transition checks should stay clear of.
"""

from __future__ import annotations

import numpy as np

from . import fuchsian as fg
from . import conemetric as cm
from . import surfaces as sf

DEFAULT_FN = np.array([2.0, 2.0, 2.0, 0.0, 0.0, 0.0])

FLATNESS_MIN = 2e-3
CURVATURE_MARGIN = 0.03


class FixtureError(Exception):
    pass


def _spread_points(rng, n_vertices: int) -> dict:
    h0 = rng.uniform(1.8, 2.4)
    pts = {0: np.array([rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08), h0])}
    for vid in range(1, n_vertices):
        ang = rng.uniform(0, 2 * np.pi)
        rad = rng.uniform(0.25, 0.5) * h0
        pts[vid] = np.array([rad * np.cos(ang), rad * np.sin(ang),
                             h0 * rng.uniform(0.95, 1.15)])
    return pts


def minkowski_fixture(rng, fn=None, n_vertices: int = 1, L: int = 5,
                      limit_L: int = 2, tries: int = 40):
    """Strict, stable, well-polyhedral Minkowski configuration + its surface."""
    fn = DEFAULT_FN if fn is None else np.asarray(fn, dtype=float)
    for _ in range(tries):
        coeffs, tau = fg.random_min_norm_cocycle(fn, rng)
        scale = max(np.linalg.norm(fg.sl2_to_vec(v)) for v in tau.values)
        coeffs = coeffs / scale
        config = sf.minkowski_config_min_norm(fn, coeffs, _spread_points(rng, n_vertices))
        try:
            if sf.convex_position(config, L=3) != "strict":
                continue
            surf = sf.convex_boundary(config, L=L, limit_L=limit_L,
                                      stability_check=True)
            if sf.surface_flatness(surf) < FLATNESS_MIN:
                continue
            cel = surf.celluation()
            if max(cm.curvature(cel.metric).values()) > -CURVATURE_MARGIN:
                continue
            return config, surf
        except (sf.UnstableHull, sf.QuotientError, sf.NonSpacelikeFace,
                cm.DegenerateTriangle, Exception) as exc:
            if isinstance(exc, (KeyboardInterrupt, SystemExit)):
                raise
            continue
    raise FixtureError("no valid Minkowski fixture found")


def ads_fixture(rng, fn=None, n_vertices: int = 1, s_range=(0.25, 0.5),
                L: int = 5, limit_L: int = 2, tries: int = 40):
    """Strict AdS configuration obtained through the geometric transition."""
    fn = DEFAULT_FN if fn is None else np.asarray(fn, dtype=float)
    for _ in range(tries):
        try:
            mc, msurf = minkowski_fixture(rng, fn, n_vertices, L=L, limit_L=limit_L,
                                          tries=10)
        except FixtureError:
            continue
        lmax = float(np.max(msurf.celluation().metric.lengths))
        s = rng.uniform(*s_range)
        try:
            ac = sf.ads_config_from_minkowski(mc, s)
            if sf.convex_position(ac, L=3) != "strict":
                continue
            surf = sf.convex_boundary(ac, L=L, limit_L=limit_L,
                                      stability_check=True,
                                      prune_radius=1.6 * s * lmax)
            if sf.surface_flatness(surf) < FLATNESS_MIN:
                continue
            cel = surf.celluation()
            if not cm.is_strict(cel.metric):
                continue
            return ac, surf
        except (sf.UnstableHull, sf.QuotientError, sf.NonSpacelikeFace, Exception) as exc:
            if isinstance(exc, (KeyboardInterrupt, SystemExit)):
                raise
            continue
    raise FixtureError("no valid AdS fixture found")
