"""Normal cones, proximal normals, the product duality mapping and dual criteria.

Normal cones in the plane are stored as finite unions of closed angular arcs
``(start, width)``; a ray has width zero.  Cones of the built-in set kinds
are computed from the boundary description, not from the limit definition,
which is only used for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .geometry import (
    HalfSpace, Intersection, NoAnalyticOracleError, PolyGraph, PolySublevel, Translate,
    Union, WholeSpace, distance, nearest_points,
)
from .moduli import (
    DEFAULT_SCHEDULE, RadiusSchedule, _Boundary, _Sampler, classify_trace, shell_rng,
)

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9
DUAL_FLOOR = 1e-2


@dataclass
class NormalVector:
    """A normal direction at ``base``; proximal normals carry their witness radius."""

    base: np.ndarray
    direction: np.ndarray
    kind: str = "frechet"
    scale: float = 1.0
    witness_r: float = None

    @property
    def vector(self):
        return self.scale * np.asarray(self.direction, dtype=float)


def _angle(v):
    return math.atan2(v[1], v[0]) % TWO_PI


def _unit_at(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def _intervals(arcs):
    """Split arcs into sorted, non-wrapping ``[a, b]`` intervals of ``[0, 2pi]``."""
    out = []
    for s, w in arcs:
        if w >= TWO_PI - ANGLE_TOL:
            return [(0.0, TWO_PI)]
        s = s % TWO_PI
        e = s + w
        if e <= TWO_PI:
            out.append((s, e))
        else:
            out.append((s, TWO_PI))
            out.append((0.0, e - TWO_PI))
    return sorted(out)


def _merge(intervals):
    res = []
    for a, b in sorted(intervals):
        if res and a <= res[-1][1] + ANGLE_TOL:
            res[-1] = (res[-1][0], max(res[-1][1], b))
        else:
            res.append((a, b))
    if len(res) > 1 and res[0][0] <= ANGLE_TOL and res[-1][1] >= TWO_PI - ANGLE_TOL:
        first, last = res.pop(0), res.pop()
        res.append((last[0], first[1] + TWO_PI))
    return [(a, b - a) for a, b in res]


def _intersect_arcs(A, B):
    IA, IB = _intervals(A), _intervals(B)
    out = []
    for a0, a1 in IA:
        for b0, b1 in IB:
            lo, hi = max(a0, b0), min(a1, b1)
            if hi >= lo - ANGLE_TOL:
                out.append((lo, max(lo, hi)))
    return _merge(out)


def _convex_hull_arcs(angles):
    """Arcs of the convex cone generated by unit vectors at ``angles``."""
    if not angles:
        return []
    a = sorted(x % TWO_PI for x in angles)
    gaps = [(a[(k + 1) % len(a)] - a[k]) % TWO_PI for k in range(len(a))]
    if len(a) == 1:
        return [(a[0], 0.0)]
    k = int(np.argmax(gaps))
    if gaps[k] < math.pi - ANGLE_TOL:
        return [(0.0, TWO_PI)]
    start = a[(k + 1) % len(a)]
    width = TWO_PI - gaps[k]
    if abs(gaps[k] - math.pi) <= ANGLE_TOL and width <= math.pi + ANGLE_TOL:
        return [(start, width)]
    return [(start, width)]


@dataclass
class NormalCone:
    """A closed cone in the plane given by angular arcs."""

    tag: str
    arcs: list
    generators: list = field(default_factory=list)
    base: np.ndarray = None

    @property
    def trivial(self):
        return not self.arcs

    def contains(self, v, tol=1e-9):
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv <= tol:
            return True
        return bool(self.distance(v[None])[0] <= tol * max(1.0, nv))

    def distance(self, V):
        """Euclidean distance from each row of ``V`` to the cone."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        nv = np.linalg.norm(V, axis=1)
        if not self.arcs:
            return nv
        ang = np.arctan2(V[:, 1], V[:, 0]) % TWO_PI
        best = nv.copy()
        for s, w in self.arcs:
            inside = ((ang - s) % TWO_PI) <= w + ANGLE_TOL
            best = np.where(inside, 0.0, best)
            for edge in (s, s + w):
                e = _unit_at(edge)
                proj = np.clip(V @ e, 0.0, None)
                best = np.minimum(best, np.linalg.norm(V - proj[:, None] * e, axis=1))
        return best

    def directions(self, step_deg=1.0):
        """Unit vectors spanning the cone: arc edges plus a 1 degree grid inside."""
        out = []
        for s, w in self.arcs:
            k = max(1, int(math.ceil(math.degrees(w) / step_deg)))
            for t in np.linspace(0.0, w, k + 1) if w > 0 else [0.0]:
                out.append(_unit_at(s + t))
        return np.array(out) if out else np.empty((0, 2))


def _tag(arcs):
    if not arcs:
        return "trivial"
    if len(arcs) == 1:
        w = arcs[0][1]
        if w <= ANGLE_TOL:
            return "ray"
        if abs(w - math.pi) <= 1e-7:
            return "halfplane_of_directions"
        if w >= TWO_PI - ANGLE_TOL:
            return "plane"
        return "sector"
    if len(arcs) == 2 and all(w <= ANGLE_TOL for _, w in arcs):
        d = abs((arcs[0][0] - arcs[1][0]) % TWO_PI - math.pi)
        if d <= 1e-7:
            return "line"
    return "sector"


def _cone_arcs(s, w, tol):
    """Arcs of the Fréchet normal cone of set ``s`` at ``w``; ``None`` if ``w`` is outside."""
    if isinstance(s, Translate):
        return _cone_arcs(s.base, w + s.shift, tol)
    if isinstance(s, WholeSpace):
        return []
    if isinstance(s, HalfSpace):
        gap = float(s.normal @ w - s.offset) / np.linalg.norm(s.normal)
        if gap < -tol:
            return None
        return [(_angle(-s.normal), 0.0)] if gap <= tol else []
    if isinstance(s, PolyGraph):
        if not s.contains(w, tol):
            return None
        slope = np.polyval(np.polyder(s.p), w[0]) if s.p.size > 1 else 0.0
        a = _angle(np.array([slope, -1.0]))
        return [(a, 0.0), ((a + math.pi) % TWO_PI, 0.0)]
    if isinstance(s, PolySublevel):
        if not s.contains(w, tol):
            return None
        slope = np.polyval(np.polyder(s.p), w[0]) if s.p.size > 1 else 0.0
        gap = w[1] - np.polyval(s.p, w[0])
        if abs(gap) > tol * math.sqrt(1 + slope * slope):
            return []
        grad = np.array([-slope, 1.0]) if s.sense == "le" else np.array([slope, -1.0])
        return [(_angle(grad), 0.0)]
    if isinstance(s, Union):
        cones = [_cone_arcs(m, w, tol) for m in s.members]
        cones = [c for c in cones if c is not None]
        if not cones:
            return None
        arcs = cones[0]
        for c in cones[1:]:
            arcs = _intersect_arcs(arcs, c)
        return arcs
    if isinstance(s, Intersection):
        angles = []
        for m in s.members:
            c = _cone_arcs(m, w, tol)
            if c is None:
                return None
            for a0, wd in c:
                angles += [a0, a0 + wd] if wd > 0 else [a0]
                if wd > math.pi:
                    angles.append(a0 + wd / 2)
        return _convex_hull_arcs(angles)
    raise NoAnalyticOracleError(f"no analytic normal cone for {s.kind}")


def frechet_normal_cone(omega, w, tol=None):
    """Fréchet normal cone of ``omega`` at ``w`` in the plane.

    Returns a :class:`NormalCone` tagged ``ray``, ``line``, ``sector``,
    ``halfplane_of_directions`` or ``trivial``, with unit generators.
    Unions use the intersection of the cones of the branches through ``w``;
    intersections use the sum of the member cones.
    """
    w = np.asarray(w, dtype=float)
    if omega.dim != 2:
        if isinstance(omega, HalfSpace):
            gap = float(omega.normal @ w - omega.offset)
            if gap < -(tol or omega.tol):
                raise ValueError("point is not in the set")
            if gap > (tol or omega.tol):
                return NormalCone("trivial", [], [], w)
            n = -omega.normal / np.linalg.norm(omega.normal)
            return NormalCone("ray", [], [NormalVector(w, n)], w)
        raise NoAnalyticOracleError("normal cones are implemented in the plane and for half-spaces")
    tol = omega.tol if tol is None else tol
    arcs = _cone_arcs(omega, w, max(tol, 1e-12))
    if arcs is None:
        raise ValueError("point is not in the set")
    arcs = _merge([(s % TWO_PI, (s % TWO_PI) + wd) for s, wd in arcs]) if arcs else []
    cone = NormalCone(_tag(arcs), arcs, [], w)
    gens = []
    for s, wd in arcs:
        gens.append(NormalVector(w, _unit_at(s)))
        if wd > ANGLE_TOL:
            gens.append(NormalVector(w, _unit_at(s + wd)))
    cone.generators = gens
    return cone


def limsup_check(omega, w, direction, n_points=1000, radius=1e-3, slack=0.01, seed=0):
    """Sampled Fréchet test: ``<x*, u - w> <= slack |u - w|`` for set points ``u`` near ``w``."""
    rng = np.random.default_rng(seed)
    d = np.asarray(direction, dtype=float)
    r = radius * 10 ** rng.uniform(-3, 0, n_points * 4)
    ang = rng.uniform(0, TWO_PI, n_points * 4)
    U = w + r[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    _, P = nearest_points(omega, U)
    # project the ring samples onto the set so boundary points are well represented
    U = np.concatenate([U[omega.contains(U)], P])
    diff = U - w
    nd = np.linalg.norm(diff, axis=1)
    ok = nd > 1e-14
    return bool(np.all(diff[ok] @ d <= slack * nd[ok] + 1e-12))


def proximal_normals(omega, xbar, cfg=None, step_deg=1.0, radii=None, tol=1e-9):
    """Unit directions ``u`` with ``d(xbar + r u, omega) = r`` for some ``r > 0``.

    Searches a 1 degree grid of directions and a geometric grid of radii; each
    returned normal records the largest certified radius.
    """
    xbar = np.asarray(xbar, dtype=float)
    if omega.dim != 2:
        raise NoAnalyticOracleError("proximal normal search is implemented in the plane")
    radii = np.geomspace(1e-4, 1.0, 25) if radii is None else np.asarray(radii, dtype=float)
    ang = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    U = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    from .geometry import distances
    P = (xbar + radii[None, :, None] * U[:, None, :]).reshape(-1, 2)
    D = distances(omega, P).reshape(len(U), len(radii))
    good = np.abs(D - radii[None, :]) <= tol * np.maximum(1.0, radii[None, :])
    out = []
    for k in np.nonzero(good.any(axis=1))[0]:
        r = float(radii[good[k]].max())
        out.append(NormalVector(xbar, U[k], "proximal", 1.0, r))
    return out


# ---------------------------------------------------------------------------
# duality mapping on a max-norm product


def duality_map_check(xhat, xstar, tol=1e-9):
    """Whether ``xstar`` belongs to the duality mapping of the max-norm product at ``xhat``.

    Checks that the component norms of ``xstar`` sum to one, that only
    components of maximal norm carry mass, and that each nonzero component is
    a positive multiple of its (Euclidean) component of ``xhat``.
    """
    X = np.atleast_2d(np.asarray(xhat, dtype=float))
    S = np.atleast_2d(np.asarray(xstar, dtype=float))
    if X.shape != S.shape:
        raise ValueError("xhat and xstar must have the same shape")
    nx = np.linalg.norm(X, axis=1)
    ns = np.linalg.norm(S, axis=1)
    if abs(ns.sum() - 1.0) > tol:
        return False
    top = nx.max()
    for i in range(len(X)):
        if ns[i] <= tol:
            continue
        if nx[i] < top - tol * max(1.0, top):
            return False
        if top == 0.0:
            continue
        if abs(S[i] @ X[i] - ns[i] * nx[i]) > tol * max(1.0, ns[i] * nx[i]):
            return False
    return True


def duality_map_sample(xhat, tol=1e-12):
    """Representative elements of the duality mapping at ``xhat``.

    One element per component of maximal norm (all mass on that component)
    plus, when several components tie, their uniform mixture.
    """
    X = np.atleast_2d(np.asarray(xhat, dtype=float))
    nx = np.linalg.norm(X, axis=1)
    top = nx.max()
    if top == 0.0:
        raise ValueError("duality map at zero has no finite representation as extreme points")
    active = np.nonzero(nx >= top * (1 - tol))[0]
    out = []
    for i in active:
        S = np.zeros_like(X)
        S[i] = X[i] / nx[i]
        out.append(S)
    if len(active) > 1:
        S = np.zeros_like(X)
        S[active] = X[active] / nx[active, None] / len(active)
        out.append(S)
    return out


# ---------------------------------------------------------------------------
# dual criteria


@dataclass
class DualCriterionReport:
    kind: str
    q: float
    radii: dict
    infimum_estimate: float
    witness: dict = None
    samples: int = 0
    trace: list = field(default_factory=list)
    verdict: str = "inconclusive"
    uncertainty: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def holds(self):
        return self.verdict in ("positive", "divergent")

    def to_dict(self):
        return {"kind": self.kind, "q": self.q, "radii": dict(self.radii),
                "infimum_estimate": self.infimum_estimate, "verdict": self.verdict,
                "uncertainty": self.uncertainty, "samples": self.samples,
                "trace": [[float(a), float(b)] for a, b in self.trace], "notes": list(self.notes)}


def _simplex_grid(m, res=50):
    if m == 1:
        return np.ones((1, 1))
    pts = [c for c in product(range(res + 1), repeat=m - 1) if sum(c) <= res]
    W = np.array([list(c) + [res - sum(c)] for c in pts], dtype=float) / res
    return W


def _set_points(coll, i, delta, rng, n):
    """Points of ``Omega_i`` within ``delta`` of x̄: x̄, boundary points at many scales."""
    bnd = _Boundary(coll)
    xbar = coll.base_point
    scales = delta * 10 ** rng.uniform(-4, 0, n)
    P, _ = bnd.points(rng, n, scales, which=i)
    pts = [xbar[None]]
    if P is not None:
        pts.append(P)
    pts = np.concatenate(pts)
    s = coll.sets[i]
    ok = s.contains(pts, 1e-9) & (np.linalg.norm(pts - xbar, axis=1) <= delta)
    return pts[ok]


def _cone_dirs(s, w):
    arcs = _cone_arcs(s, w, 1e-9)
    if not arcs:
        return np.empty((0, 2))
    arcs = _merge([(a % TWO_PI, (a % TWO_PI) + wd) for a, wd in arcs])
    return NormalCone("", arcs).directions()


def _uniform_inf(coll, delta, rng, n_points=60):
    """Smallest ``|sum x_i*|`` over normals at points near x̄ with norms summing to 1."""
    m = coll.m
    options = []
    for i in range(m):
        pts = _set_points(coll, i, delta, rng, n_points)
        dirs = [(w, _cone_dirs(coll.sets[i], w)) for w in pts]
        options.append(dirs)
    W = _simplex_grid(m, 50)
    best, witness, count = math.inf, None, 0
    # each component either uses a normal at a sampled point or is zero
    per_set = []
    for i in range(m):
        vecs, where = [np.zeros(2)], [None]
        for w, D in options[i]:
            for d in D:
                vecs.append(d)
                where.append(w)
        per_set.append((np.array(vecs), where))
    if m == 2:
        V1, w1 = per_set[0]
        V2, w2 = per_set[1]
        # weights with zero mass on the zero option are the admissible ones
        lam = W[:, 0]
        S = lam[None, None, :, None] * V1[:, None, None, :] + (1 - lam)[None, None, :, None] * V2[None, :, None, :]
        zero1 = np.zeros(len(V1), dtype=bool)
        zero1[0] = True
        zero2 = np.zeros(len(V2), dtype=bool)
        zero2[0] = True
        bad = (zero1[:, None, None] & (lam[None, None, :] > 0)) | (zero2[None, :, None] & (lam[None, None, :] < 1))
        bad |= zero1[:, None, None] & zero2[None, :, None]
        N = np.linalg.norm(S, axis=-1)
        N[bad] = np.inf
        count = int(np.isfinite(N).sum())
        if count:
            a, b, c = np.unravel_index(int(np.argmin(N)), N.shape)
            best = float(N[a, b, c])
            witness = {"omega": [None if w1[a] is None else w1[a].tolist(), None if w2[b] is None else w2[b].tolist()],
                       "normals": [(lam[c] * V1[a]).tolist(), ((1 - lam[c]) * V2[b]).tolist()]}
        return best, witness, count
    rng_local = np.random.default_rng(0)
    for _ in range(20000):
        picks = [rng_local.integers(len(V)) for V, _ in per_set]
        lam = rng_local.dirichlet(np.ones(m))
        lam = np.where([p == 0 for p in picks], 0.0, lam)
        if lam.sum() == 0:
            continue
        lam /= lam.sum()
        v = sum(l * per_set[i][0][p] for i, (l, p) in enumerate(zip(lam, picks)))
        count += 1
        nv = float(np.linalg.norm(v))
        if nv < best:
            best = nv
            witness = {"normals": [(l * per_set[i][0][p]).tolist() for i, (l, p) in enumerate(zip(lam, picks))]}
    return best, witness, count


def _circle_points(omega, X, h):
    """Boundary points of ``omega`` at distance exactly ``h`` from each row of ``X``.

    Returns (N, k, 2) with NaN padding.
    """
    from ._roots import real_roots
    from .geometry import _pad
    out = []
    for p in omega.pieces():
        du = np.repeat(p.U[None], len(X), axis=0).copy()
        dv = np.repeat(p.V[None], len(X), axis=0).copy()
        du[:, -1] -= X[:, 0]
        dv[:, -1] -= X[:, 1]
        sq = np.array([np.polymul(a, a) for a in du])
        sv = np.array([np.polymul(b, b) for b in dv])
        w = max(sq.shape[1], sv.shape[1])
        coeffs = _pad(sq, w) + _pad(sv, w)
        coeffs[:, -1] -= h * h
        T = real_roots(coeffs)
        if T.shape[1]:
            out.append(p.points(T))
    if not out:
        return np.full((len(X), 0, 2), np.nan)
    P = np.concatenate(out, axis=1)
    ok = omega.contains(P, 1e-9)
    P[~ok] = np.nan
    return P


def _subreg_inf(coll, q, rho, eps, rng, n=400, fan=7):
    """Sampled inner infimum of the subregularity dual criterion at ``(rho, eps)``."""
    m, xbar = coll.m, coll.base_point
    sampler = _Sampler(coll)
    X = xbar + sampler.points(rng, n, rho * 1e-3, rho * (1 - 1e-9))
    configs = []
    for x in X:
        dist_proj = [nearest_points(s, x[None]) for s in coll.sets]
        d = np.array([float(r[0][0]) for r in dist_proj])
        P = [r[1][0] for r in dist_proj]
        h = d.max()
        if h <= 0 or h >= rho:
            continue
        configs.append((x, P))
        # tie configurations: move the other points onto the circle of radius h
        for i in range(m):
            if d[i] < h * (1 - 1e-9):
                C = _circle_points(coll.sets[i], x[None], h)[0]
                C = C[np.all(np.isfinite(C), axis=1)]
                for c in C[:4]:
                    Q = list(P)
                    Q[i] = c
                    configs.append((x, Q))
    W = _simplex_grid(2, 50)[:, 0] if m == 2 else None
    best, witness, count = math.inf, None, 0
    for x, P in configs:
        diffs = np.array([x - p for p in P])
        nd = np.linalg.norm(diffs, axis=1)
        h = nd.max()
        active = np.nonzero(nd >= h * (1 - 1e-9))[0]
        S = q * h ** (q - 1)
        # eps is taken relative to the scale: the inner limit lets it shrink with h
        cos_min = max(-1.0, 1.0 - eps / rho)
        half = math.acos(cos_min)
        fans = []
        for i in active:
            base = math.atan2(diffs[i, 1], diffs[i, 0])
            ang = base + np.linspace(-half, half, fan) if half > 0 else np.array([base])
            fans.append(np.stack([np.cos(ang), np.sin(ang)], axis=1))
        cones = [NormalCone("", _merge([(a % TWO_PI, (a % TWO_PI) + wd)
                                         for a, wd in (_cone_arcs(coll.sets[i], P[i], 1e-9) or [])]))
                 for i in active]
        if len(active) == 1:
            Wd = fans[0] * S
            ok = cones[0].distance(Wd) <= rho
            if ok.any():
                count += int(ok.sum())
                if S < best:
                    best, witness = S, {"x": x.tolist(), "omega": [p.tolist() for p in P]}
            continue
        if len(active) == 2:
            i, j = active
            lam = W
            A = fans[0][:, None, None, :] * (lam * S)[None, None, :, None]
            B = fans[1][None, :, None, :] * ((1 - lam) * S)[None, None, :, None]
            okA = cones[0].distance(A.reshape(-1, 2)).reshape(A.shape[:-1]) <= rho
            okB = cones[1].distance(B.reshape(-1, 2)).reshape(B.shape[:-1]) <= rho
            N = np.linalg.norm(A + B, axis=-1)
            ok = okA & okB
            count += int(ok.sum())
            if ok.any():
                v = float(N[ok].min())
                if v < best:
                    best, witness = v, {"x": x.tolist(), "omega": [p.tolist() for p in P]}
            continue
        # three or more tied components: random fan and weight draws
        for _ in range(200):
            lam = rng.dirichlet(np.ones(len(active))) * S
            vecs = [fans[k][rng.integers(len(fans[k]))] * lam[k] for k in range(len(active))]
            if all(cones[k].distance(vecs[k][None])[0] <= rho for k in range(len(active))):
                count += 1
                v = float(np.linalg.norm(sum(vecs)))
                if v < best:
                    best, witness = v, {"x": x.tolist(), "omega": [p.tolist() for p in P]}
    return best, witness, count


def dual_modulus(coll, kind="uniform_q1", q=1.0, radii=None, cfg=None):
    """Sampled infimum of ``|sum x_i*|`` for one of the two dual criteria.

    ``uniform_q1``: normals at set points within ``radii["delta"]`` of x̄ with
    norms summing to one (weights on a 1/50 simplex grid); a positive limit
    as delta shrinks characterises uniform regularity of order one.

    ``subreg_q``: at ``radii["rho"]`` and ``radii["eps"]``, points ``x`` near
    x̄ with nearest points (and tie points at the same distance) ``ω_i``,
    normals within ``rho`` of the cones, aligned with ``x - ω_i`` up to
    ``eps``, supported on the farthest components and scaled so their norms
    sum to ``q |v|^(q-1)``.  Positivity at all scales is a sufficient
    condition for [q]-subregularity.

    Both report the value at the requested radii and a trace over the radii
    of ``cfg`` that is classified like the primal constants.
    """
    cfg = cfg or DEFAULT_SCHEDULE
    radii = dict(radii or {})
    if coll.dim != 2 or coll.space.metric != "euclidean":
        raise NoAnalyticOracleError("dual criteria are implemented for planar Euclidean collections")
    notes = []
    if kind == "uniform_q1":
        delta = float(radii.setdefault("delta", 0.2))
        value, witness, count = _uniform_inf(coll, delta, shell_rng(cfg.seed, "dual", 0))
        trace = []
        for k, d in enumerate(cfg.radii()[:cfg.steps]):
            v, _, c = _uniform_inf(coll, d, shell_rng(cfg.seed, "dual", k + 1))
            trace.append((d, v))
            count += c
    elif kind == "subreg_q":
        if not 0 < q <= 1:
            raise ValueError("subreg_q needs q in (0, 1]")
        rho = float(radii.setdefault("rho", 0.1))
        eps = float(radii.setdefault("eps", rho / 10))
        ratio = eps / rho
        n = max(100, cfg.samples_per_radius // 10)
        value, witness, count = _subreg_inf(coll, q, rho, eps, shell_rng(cfg.seed, "dual", 100), n)
        trace = []
        for k, r in enumerate(cfg.radii()[:cfg.steps]):
            v, _, c = _subreg_inf(coll, q, r, r * ratio, shell_rng(cfg.seed, "dual", 101 + k), n)
            trace.append((r, v))
            count += c
        notes.append("criterion evaluated only at the tested (rho, eps) pairs")
    else:
        raise ValueError("kind must be 'uniform_q1' or 'subreg_q'")
    verdict, val, unc, cls_notes = classify_trace(trace, cfg.steps)
    tail = [v for _, v in trace[-max(2, math.ceil(cfg.steps / 3)):]]
    if verdict != "zero" and tail and min(tail) < DUAL_FLOOR:
        verdict, unc = "zero", float(min(tail))
        cls_notes = cls_notes + [f"trailing infimum below {DUAL_FLOOR:g}"]
    trace = [(float(a), float(b)) for a, b in trace]
    return DualCriterionReport(kind, float(q), radii, float(value), witness, count, trace,
                               verdict, unc, notes + cls_notes)
