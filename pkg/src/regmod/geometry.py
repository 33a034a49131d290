"""Norms, closed-set oracles and distance machinery.

Every set in the plane is described by its *boundary pieces*: straight lines
and graphs ``v = p(u)`` of real polynomials.  The nearest point of a closed
set (or of an intersection of translated sets) to a query point is either the
query point itself, a critical point of the distance restricted to one piece,
or a point where two pieces meet.  All of these are roots of small
polynomials, so distances and projections are computed exactly by
enumerating the candidates and keeping the admissible ones.  The enumeration
is vectorised over a batch of query points and a batch of translations, which
is what the estimators need.

Sets that are not planar fall back to closed forms (half-spaces) or to a
constrained local search that reports a bracket.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from ._roots import polyval, real_roots

DEFAULT_TOL = 1e-10
# candidate points produced by root finding carry ~1e-13 errors
CANDIDATE_TOL = 1e-9


class NoAnalyticOracleError(NotImplementedError):
    """Raised when a set kind has no exact oracle for the requested query."""


class UnresolvedIntersectionDistance(RuntimeError):
    """The numeric intersection-distance bracket is wider than requested."""

    def __init__(self, lower, upper):
        self.lower = lower
        self.upper = upper
        super().__init__(
            f"unresolved intersection distance: bracket [{lower:.6g}, {upper:.6g}]")


class BasePointError(ValueError):
    """The base point does not lie in every set of a collection."""


# ---------------------------------------------------------------------------
# spaces and norms


@dataclass(frozen=True)
class SpaceConfig:
    """Finite product of Euclidean factors with the maximum product norm.

    ``factors`` lists the block sizes; the default is a single Euclidean
    factor of dimension ``dim``.  ``factors=(1, 1)`` in the plane therefore
    gives the max (l-infinity) norm.
    """

    dim: int
    factors: tuple = None
    factor_norm: str = "euclidean"

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("dim must be a positive integer")
        if self.factor_norm != "euclidean":
            raise ValueError(f"unsupported factor norm {self.factor_norm!r}")
        factors = (int(self.dim),) if self.factors is None else tuple(int(f) for f in self.factors)
        if any(f < 1 for f in factors) or sum(factors) != self.dim:
            raise ValueError(f"factor sizes {factors} do not add up to dim={self.dim}")
        object.__setattr__(self, "factors", factors)

    @property
    def metric(self):
        if len(self.factors) == 1:
            return "euclidean"
        if self.dim == 2:
            return "linf"
        return "product"

    def _blocks(self):
        start = 0
        for f in self.factors:
            yield slice(start, start + f)
            start += f

    def norm(self, X):
        X = np.asarray(X, dtype=float)
        if len(self.factors) == 1:
            return np.linalg.norm(X, axis=-1)
        return np.max(np.stack([np.linalg.norm(X[..., b], axis=-1) for b in self._blocks()]), axis=0)

    def dual_norm(self, X):
        X = np.asarray(X, dtype=float)
        return sum(np.linalg.norm(X[..., b], axis=-1) for b in self._blocks())

    def sample_ball(self, rng, n, radius=1.0):
        """Uniform samples from the closed ball of the product norm."""
        out = np.empty((n, self.dim))
        for b in self._blocks():
            k = b.stop - b.start
            g = rng.standard_normal((n, k))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            out[:, b] = g * rng.random((n, 1)) ** (1.0 / k)
        return out * np.asarray(radius, dtype=float).reshape(-1, 1)

    def sample_sphere(self, rng, n, radius=1.0):
        """Samples with norm exactly ``radius``."""
        out = self.sample_ball(rng, n, 1.0)
        blocks = list(self._blocks())
        pick = rng.integers(len(blocks), size=n)
        for j, b in enumerate(blocks):
            sel = pick == j
            nb = np.linalg.norm(out[sel, b], axis=1, keepdims=True)
            out[sel, b] = out[sel, b] / np.where(nb > 0, nb, 1.0)
        return out * np.asarray(radius, dtype=float).reshape(-1, 1)


def euclidean(dim):
    return SpaceConfig(dim)


def weighted_product_norm(x, xhat, rho):
    """``max(|x|, rho * max_i |x_i|)`` with Euclidean factor norms."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = np.asarray(x, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    inner = np.max(np.linalg.norm(xhat.reshape(-1, x.shape[-1]), axis=-1)) if xhat.size else 0.0
    return float(max(np.linalg.norm(x), rho * inner))


# ---------------------------------------------------------------------------
# boundary pieces


def _compose_affine(p, alpha, beta):
    """Coefficients of ``p(alpha + beta*t)`` for a batch of ``alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    res = np.full((alpha.shape[0], 1), p[0])
    for c in p[1:]:
        new = np.zeros((res.shape[0], res.shape[1] + 1))
        new[:, :-1] += beta * res
        new[:, 1:] += alpha[:, None] * res
        new[:, -1] += c
        res = new
    return res


def _pad(p, width):
    p = np.atleast_2d(p)
    return np.concatenate([np.zeros((p.shape[0], width - p.shape[1])), p], axis=1)


def _add(a, b):
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    w = max(a.shape[1], b.shape[1])
    return _pad(a, w) + _pad(b, w)


class Piece:
    """A line ``n.w = b`` or a graph ``v = p(u)`` in the plane.

    Both carry an affine-in-``t`` first coordinate ``U(t)`` and a
    polynomial second coordinate ``V(t)``.
    """

    def __init__(self, normal=None, offset=None, poly=None):
        if poly is not None:
            self.poly = np.trim_zeros(np.asarray(poly, dtype=float), "f")
            if self.poly.size == 0:
                self.poly = np.zeros(1)
            self.normal = None
            self.U = np.array([1.0, 0.0])
            self.V = self.poly.copy()
        else:
            n = np.asarray(normal, dtype=float)
            self.normal, self.offset, self.poly = n, float(offset), None
            nn = float(n @ n)
            z0 = self.offset * n / nn
            d = np.array([-n[1], n[0]]) / np.sqrt(nn)
            self.U = np.array([d[0], z0[0]])
            self.V = np.array([d[1], z0[1]])

    @property
    def is_line(self):
        return self.poly is None

    def shifted(self, c):
        """Piece of ``Omega - c`` when ``self`` is a piece of ``Omega``."""
        c = np.asarray(c, dtype=float)
        if self.is_line:
            return Piece(normal=self.normal, offset=self.offset - self.normal @ c)
        p = _compose_affine(self.poly, np.array([c[0]]), 1.0)[0]
        p[-1] -= c[1]
        return Piece(poly=p)

    def points(self, T):
        return np.stack([polyval(np.broadcast_to(self.U, (T.shape[0], 2)), T),
                         polyval(np.broadcast_to(self.V, (T.shape[0], self.V.size)), T)], axis=-1)

    def meet(self, other, c):
        """Parameters ``t`` of points ``w`` on self with ``w + c`` on ``other``."""
        n = c.shape[0]
        if other.is_line:
            base = other.normal[0] * _pad(self.U, max(2, self.V.size)) + other.normal[1] * _pad(self.V, max(2, self.V.size))
            coeffs = np.repeat(base, n, axis=0)
            coeffs[:, -1] += c @ other.normal - other.offset
        else:
            comp = _compose_affine(other.poly, self.U[1] + c[:, 0], self.U[0])
            w = max(comp.shape[1], self.V.size)
            coeffs = _pad(np.repeat(self.V[None], n, axis=0), w) - _pad(comp, w)
            coeffs[:, -1] += c[:, 1]
        if not np.any(coeffs[:, :-1]):
            return np.empty((n, 0))
        return real_roots(coeffs)

    def critical(self, Y, metric):
        """Parameters of local minimisers of ``|z(t) - y|`` along the piece."""
        n = Y.shape[0]
        dU, dV = np.polyder(self.U), np.polyder(self.V)
        if metric == "euclidean":
            base = _add(np.polymul(self.U, dU), np.polymul(self.V, dV))
            w = base.shape[1]
            coeffs = np.repeat(base, n, axis=0)
            coeffs -= Y[:, :1] * _pad(dU, w) + Y[:, 1:2] * _pad(dV, w)
            return real_roots(coeffs)
        out = []
        for sgn in (1.0, -1.0):
            base = _add(self.U, sgn * self.V)
            if np.any(base[0, :-1]):
                coeffs = np.repeat(base, n, axis=0)
                coeffs[:, -1] -= Y[:, 0] + sgn * Y[:, 1]
                out.append(real_roots(coeffs))
        for poly, col in ((self.U, 0), (self.V, 1)):
            if np.trim_zeros(poly[:-1], "f").size:
                coeffs = np.repeat(np.atleast_2d(poly), n, axis=0)
                coeffs[:, -1] -= Y[:, col]
                out.append(real_roots(coeffs))
        for der in (dU, dV):
            if np.trim_zeros(der[:-1], "f").size:
                r = real_roots(der[None])
                out.append(np.repeat(r, n, axis=0))
        return np.concatenate(out, axis=1) if out else np.empty((n, 0))


# ---------------------------------------------------------------------------
# set oracles


class SetOracle:
    """Closed nonempty set with exact membership and boundary description."""

    kind = "abstract"
    tol = DEFAULT_TOL
    dim = None
    convex = False

    def contains(self, Z, tol=None):
        raise NotImplementedError

    def pieces(self):
        raise NoAnalyticOracleError(f"no planar boundary description for {self.kind}")

    def halfspace_atoms(self):
        """Half-spaces whose intersection is this set (convex polyhedral kinds)."""
        raise NoAnalyticOracleError(f"{self.kind} is not polyhedral")

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


class HalfSpace(SetOracle):
    """``{x : <normal, x> >= offset}``."""

    kind = "halfspace"
    convex = True

    def __init__(self, normal, offset=0.0, tol=DEFAULT_TOL):
        self.normal = np.asarray(normal, dtype=float)
        if not np.any(self.normal):
            raise ValueError("half-space normal must be nonzero")
        self.offset = float(offset)
        self.dim = self.normal.size
        self.tol = tol

    def contains(self, Z, tol=None):
        tol = self.tol if tol is None else tol
        with np.errstate(invalid="ignore"):
            return np.asarray(Z) @ self.normal - self.offset >= -tol * np.linalg.norm(self.normal)

    def pieces(self):
        if self.dim != 2:
            return super().pieces()
        return [Piece(normal=self.normal, offset=self.offset)]

    def halfspace_atoms(self):
        return [self]

    def to_dict(self):
        return {"kind": self.kind, "normal": self.normal.tolist(), "offset": self.offset}


class WholeSpace(SetOracle):
    kind = "whole_space"
    convex = True

    def __init__(self, dim=2, tol=DEFAULT_TOL):
        self.dim = int(dim)
        self.tol = tol

    def contains(self, Z, tol=None):
        Z = np.asarray(Z, dtype=float)
        return np.all(np.isfinite(Z), axis=-1)

    def pieces(self):
        return []

    def halfspace_atoms(self):
        return []

    def to_dict(self):
        return {"kind": self.kind}


def _poly_from(coefficient=None, sign=1.0, poly=None):
    """Highest-first coefficients from either a monomial ``sign*c*u^2`` or an
    ascending coefficient list."""
    if poly is not None:
        return np.asarray(poly, dtype=float)[::-1].copy()
    return np.array([float(sign) * float(coefficient), 0.0, 0.0])


def _vertical_tol(poly, U, tol):
    slope = np.polyval(np.polyder(poly), U) if poly.size > 1 else 0.0
    return tol * np.sqrt(1.0 + slope * slope)


class PolyGraph(SetOracle):
    """Graph ``{(u, p(u))}`` of a real polynomial in the plane.

    Either ``coefficient`` and ``sign`` (giving ``p(u) = sign*coefficient*u^2``)
    or ``poly`` (ascending coefficients) may be given.
    """

    kind = "poly_graph"

    def __init__(self, coefficient=1.0, sign=1.0, poly=None, tol=DEFAULT_TOL):
        self.p = _poly_from(coefficient, sign, poly)
        self.dim = 2
        self.tol = tol
        self.convex = np.trim_zeros(self.p, "f").size <= 2

    def contains(self, Z, tol=None):
        tol = self.tol if tol is None else tol
        Z = np.asarray(Z, dtype=float)
        U, V = Z[..., 0], Z[..., 1]
        with np.errstate(invalid="ignore"):
            return np.abs(V - np.polyval(self.p, U)) <= _vertical_tol(self.p, U, tol)

    def pieces(self):
        return [Piece(poly=self.p)]

    def to_dict(self):
        return {"kind": self.kind, "poly": self.p[::-1].tolist()}


class PolySublevel(SetOracle):
    """``{(u, v) : v >= p(u)}`` (``sense='ge'``) or ``v <= p(u)`` (``'le'``)."""

    kind = "poly_sublevel"

    def __init__(self, poly, sense="le", tol=DEFAULT_TOL):
        if sense not in ("le", "ge"):
            raise ValueError("sense must be 'le' or 'ge'")
        self.p = np.asarray(poly, dtype=float)[::-1].copy()
        self.sense = sense
        self.dim = 2
        self.tol = tol
        deg = np.trim_zeros(self.p, "f").size - 1
        lead = np.trim_zeros(self.p, "f")[0] if deg >= 0 else 0.0
        self.convex = deg <= 1 or (deg == 2 and (lead > 0) == (sense == "ge"))

    def contains(self, Z, tol=None):
        tol = self.tol if tol is None else tol
        Z = np.asarray(Z, dtype=float)
        U, V = Z[..., 0], Z[..., 1]
        gap = V - np.polyval(self.p, U)
        if self.sense == "le":
            gap = -gap
        with np.errstate(invalid="ignore"):
            return gap >= -_vertical_tol(self.p, U, tol)

    def pieces(self):
        return [Piece(poly=self.p)]

    def to_dict(self):
        return {"kind": self.kind, "poly": self.p[::-1].tolist(), "sense": self.sense}


class Union(SetOracle):
    kind = "union"

    def __init__(self, members, tol=DEFAULT_TOL):
        self.members = tuple(members)
        if not self.members:
            raise ValueError("union of no sets")
        self.dim = self.members[0].dim
        self.tol = tol

    def contains(self, Z, tol=None):
        out = self.members[0].contains(Z, tol)
        for s in self.members[1:]:
            out = out | s.contains(Z, tol)
        return out

    def pieces(self):
        return [p for s in self.members for p in s.pieces()]

    def to_dict(self):
        return {"kind": self.kind, "sets": [s.to_dict() for s in self.members]}


class Intersection(SetOracle):
    kind = "intersection"

    def __init__(self, members, tol=DEFAULT_TOL):
        self.members = tuple(members)
        if not self.members:
            raise ValueError("intersection of no sets")
        self.dim = self.members[0].dim
        self.tol = tol
        self.convex = all(s.convex for s in self.members)

    def contains(self, Z, tol=None):
        out = self.members[0].contains(Z, tol)
        for s in self.members[1:]:
            out = out & s.contains(Z, tol)
        return out

    def pieces(self):
        return [p for s in self.members for p in s.pieces()]

    def halfspace_atoms(self):
        return [a for s in self.members for a in s.halfspace_atoms()]

    def to_dict(self):
        return {"kind": self.kind, "sets": [s.to_dict() for s in self.members]}


class Translate(SetOracle):
    """The set ``base - shift``."""

    kind = "translate"

    def __init__(self, base, shift):
        self.base = base
        self.shift = np.asarray(shift, dtype=float)
        self.dim = base.dim
        self.tol = base.tol
        self.convex = base.convex

    def contains(self, Z, tol=None):
        return self.base.contains(np.asarray(Z, dtype=float) + self.shift, tol)

    def pieces(self):
        return [p.shifted(self.shift) for p in self.base.pieces()]

    def halfspace_atoms(self):
        return [HalfSpace(h.normal, h.offset - h.normal @ self.shift, h.tol)
                for h in self.base.halfspace_atoms()]

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(), "shift": self.shift.tolist()}


def translate(omega, a):
    """Oracle for ``omega - a``."""
    a = np.asarray(a, dtype=float)
    if isinstance(omega, Translate):
        return Translate(omega.base, omega.shift + a)
    return Translate(omega, a)


def _planar(sets, space):
    if space.dim != 2 or space.metric == "product":
        return False
    try:
        for s in sets:
            s.pieces()
    except NoAnalyticOracleError:
        return False
    return True


# ---------------------------------------------------------------------------
# the candidate engine


def _nearest_planar(sets, X, shifts, metric, keep_all=False):
    """Nearest points of ``cap_i (sets[i] - shifts[i])`` to each row of ``X``.

    Returns ``(dist, Z, best)`` where ``Z`` holds all admissible candidates
    (NaN elsewhere) and ``best`` indexes the minimiser.  ``dist`` is ``inf``
    when the intersection is empty.
    """
    n = X.shape[0]
    pieces = [(i, p) for i, s in enumerate(sets) for p in s.pieces()]
    chunks = [X[:, None, :]]
    for i, piece in pieces:
        T = piece.critical(X + shifts[i], metric)
        if T.shape[1]:
            chunks.append(piece.points(T) - shifts[i][:, None, :])
    for (i, P), (j, Q) in combinations(pieces, 2):
        T = P.meet(Q, shifts[j] - shifts[i])
        if T.shape[1]:
            chunks.append(P.points(T) - shifts[i][:, None, :])
    Z = np.concatenate(chunks, axis=1)
    ok = np.all(np.isfinite(Z), axis=-1)
    for i, s in enumerate(sets):
        ok &= s.contains(Z + shifts[i][:, None, :], CANDIDATE_TOL)
    diff = Z - X[:, None, :]
    if metric == "euclidean":
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
    else:
        dist = np.max(np.abs(diff), axis=-1)
    dist = np.where(ok, dist, np.inf)
    best = np.argmin(dist, axis=1)
    d = dist[np.arange(n), best]
    if keep_all:
        return d, Z, dist
    return d, Z[np.arange(n), best]


def _halfspace_distance(h, X, space):
    gap = h.offset - X @ h.normal
    return np.clip(gap, 0.0, None) / space.dual_norm(h.normal)


def _distances_nd(s, X, space):
    if isinstance(s, HalfSpace):
        return _halfspace_distance(s, X, space)
    if isinstance(s, WholeSpace):
        return np.zeros(X.shape[0])
    if isinstance(s, Union):
        return np.min([distances(m, X, space) for m in s.members], axis=0)
    if isinstance(s, Translate):
        return distances(s.base, X + s.shift, space)
    if _planar([s], space):
        return _nearest_planar([s], X, [np.zeros_like(X)], space.metric)[0]
    if isinstance(s, Intersection):
        return np.array([_numeric_intersection(list(s.members), x, space)[1] for x in X])
    raise NoAnalyticOracleError(f"no analytic distance oracle for {s.kind} in dimension {space.dim}")


def _as_batch(X, dim):
    X = np.asarray(X, dtype=float)
    return X.reshape(-1, dim)


def distances(omega, X, space=None):
    """Vectorised ``d(x, omega)`` over the rows of ``X``."""
    space = space or euclidean(omega.dim)
    X = _as_batch(X, space.dim)
    # closed forms first; unions reduce to their branches
    if isinstance(omega, (HalfSpace, WholeSpace, Union, Translate)):
        return _distances_nd(omega, X, space)
    if _planar([omega], space):
        return _nearest_planar([omega], X, [np.zeros_like(X)], space.metric)[0]
    return _distances_nd(omega, X, space)


def nearest_points(omega, X, space=None):
    """Batched ``(d(x, omega), one nearest point)`` for the rows of ``X``."""
    space = space or euclidean(omega.dim)
    X = _as_batch(X, space.dim)
    if isinstance(omega, WholeSpace):
        return np.zeros(len(X)), X.copy()
    if isinstance(omega, Translate):
        d, P = nearest_points(omega.base, X + omega.shift, space)
        return d, P - omega.shift
    if isinstance(omega, Union):
        res = [nearest_points(m, X, space) for m in omega.members]
        D = np.stack([r[0] for r in res])
        j = np.argmin(D, axis=0)
        P = np.stack([r[1] for r in res])[j, np.arange(len(X))]
        return D[j, np.arange(len(X))], P
    if isinstance(omega, HalfSpace) and space.metric == "euclidean":
        n = omega.normal
        gap = np.clip(omega.offset - X @ n, 0.0, None)
        return gap / np.linalg.norm(n), X + (gap / (n @ n))[:, None] * n
    if _planar([omega], space):
        return _nearest_planar([omega], X, [np.zeros_like(X)], space.metric)
    raise NoAnalyticOracleError(f"no batched projection for {omega.kind}")


def distance(omega, x, space=None):
    """Exact distance from ``x`` to ``omega``."""
    return float(distances(omega, x, space)[0])


def project(omega, x, space=None):
    """All nearest points of ``omega`` to ``x`` (the projection may be multivalued)."""
    space = space or euclidean(omega.dim)
    x = np.asarray(x, dtype=float).reshape(space.dim)
    if omega.contains(x):
        return [x.copy()]
    if _planar([omega], space):
        X = x[None]
        d, Z, dist = _nearest_planar([omega], X, [np.zeros_like(X)], space.metric, keep_all=True)
        close = np.abs(dist[0] - d[0]) <= max(omega.tol, 1e-12 * max(1.0, d[0]))
        out = []
        for z in Z[0][close]:
            if not any(np.allclose(z, w, atol=1e-9, rtol=0) for w in out):
                out.append(z)
        return sorted(out, key=lambda p: tuple(p))
    if space.metric != "euclidean":
        raise NoAnalyticOracleError("projection in non-Euclidean product spaces needs the planar engine")
    if isinstance(omega, Translate):
        return [p - omega.shift for p in project(omega.base, x + omega.shift, space)]
    if isinstance(omega, HalfSpace):
        n = omega.normal
        return [x + max(0.0, omega.offset - n @ x) * n / (n @ n)]
    if isinstance(omega, Union):
        d = [distance(m, x, space) for m in omega.members]
        best = min(d)
        out = []
        for m, dm in zip(omega.members, d):
            if dm <= best + omega.tol:
                out.extend(project(m, x, space))
        return out
    if isinstance(omega, Intersection) and omega.convex:
        return [_numeric_intersection(list(omega.members), x, space)[0]]
    raise NoAnalyticOracleError(f"no analytic projection oracle for {omega.kind}")


# ---------------------------------------------------------------------------
# intersections


class IntersectionDistance(NamedTuple):
    value: float
    width: float


def _numeric_intersection(sets, x, space, starts=8, seed=0):
    """Constrained local search for the nearest point of ``cap sets``.

    Returns ``(point, upper, lower)``; for convex members the local optimum is
    global and ``upper - lower`` only reflects solver accuracy.
    """
    if space.metric != "euclidean":
        raise NoAnalyticOracleError("numeric intersection search assumes a Euclidean space")
    x = np.asarray(x, dtype=float)
    lower = max(float(_distances_nd(s, x[None], space)[0]) for s in sets
                if not isinstance(s, Intersection)) if sets else 0.0
    convex = all(s.convex for s in sets)
    atoms = None
    if convex:
        try:
            atoms = [a for s in sets for a in (s.halfspace_atoms() if not isinstance(s, HalfSpace) else [s])]
        except NoAnalyticOracleError:
            atoms = None
    if atoms is not None:
        if not atoms:
            return x.copy(), 0.0, 0.0
        cons = [{"type": "ineq", "fun": (lambda z, a=a: a.normal @ z - a.offset),
                 "jac": (lambda z, a=a: a.normal)} for a in atoms]
        res = minimize(lambda z: 0.5 * np.sum((z - x) ** 2), x, jac=lambda z: z - x,
                       constraints=cons, method="SLSQP", options={"ftol": 1e-15, "maxiter": 200})
        z = res.x
        return z, float(np.linalg.norm(z - x)), lower

    def viol(z):
        return max(float(_distances_nd(s, z[None], space)[0]) for s in sets)

    rng = np.random.default_rng(seed)
    best, best_z = np.inf, None
    for k in range(starts):
        z0 = x if k == 0 else x + rng.standard_normal(space.dim) * max(lower, 1e-3) * 2.0
        res = minimize(lambda z: np.sum((z - x) ** 2) + 1e6 * viol(z) ** 2, z0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
        if viol(res.x) <= 1e-8 and np.linalg.norm(res.x - x) < best:
            best, best_z = float(np.linalg.norm(res.x - x)), res.x
    return best_z, best, lower


def translated_intersection_distances(sets, X, shifts=None, space=None):
    """Batched ``d(x, cap_i (Omega_i - a_i))``.

    ``X`` is (N, n); ``shifts`` is a sequence of (N, n) arrays (or None for
    zero shifts).  Empty intersections give ``inf``.
    """
    space = space or euclidean(sets[0].dim)
    X = _as_batch(X, space.dim)
    if shifts is None:
        shifts = [np.zeros_like(X)] * len(sets)
    shifts = [np.broadcast_to(np.asarray(a, dtype=float), X.shape) for a in shifts]
    if _planar(sets, space):
        return _nearest_planar(sets, X, shifts, space.metric)[0]
    out = np.empty(X.shape[0])
    for k, x in enumerate(X):
        moved = [translate(s, a[k]) if np.any(a[k]) else s for s, a in zip(sets, shifts)]
        _, upper, lower = _numeric_intersection(moved, x, space)
        if upper - lower > 1e-8 and not all(s.convex for s in moved):
            raise UnresolvedIntersectionDistance(lower, upper)
        out[k] = upper
    return out


def intersection_distance(coll, x, tol=1e-8):
    """Distance from ``x`` to the intersection of a collection's sets.

    Exact (zero-width bracket) for planar sets; otherwise the result of a
    constrained local search, bracketed below by ``max_i d(x, Omega_i)``.
    """
    x = np.asarray(x, dtype=float)
    if _planar(coll.sets, coll.space):
        d = translated_intersection_distances(coll.sets, x[None], None, coll.space)[0]
        return IntersectionDistance(float(d), 0.0)
    _, upper, lower = _numeric_intersection(list(coll.sets), x, coll.space)
    convex = all(s.convex for s in coll.sets)
    width = 1e-9 * max(1.0, upper) if convex else upper - lower
    if width > tol:
        raise UnresolvedIntersectionDistance(lower, upper)
    return IntersectionDistance(float(upper), float(width))


# ---------------------------------------------------------------------------
# collections


@dataclass(frozen=True, eq=False)
class SetCollection:
    """``m >= 2`` closed sets sharing the base point ``base_point``."""

    sets: tuple
    base_point: np.ndarray
    space: SpaceConfig = None
    name: str = ""
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        sets = tuple(self.sets)
        object.__setattr__(self, "sets", sets)
        xbar = np.asarray(self.base_point, dtype=float).reshape(-1)
        object.__setattr__(self, "base_point", xbar)
        if self.space is None:
            object.__setattr__(self, "space", euclidean(xbar.size))
        if len(sets) < 2:
            raise ValueError("a collection needs at least two sets")
        if any(s.dim != self.space.dim for s in sets) or xbar.size != self.space.dim:
            raise ValueError("set and base point dimensions disagree with the space")
        for i, s in enumerate(sets):
            if not s.contains(xbar):
                raise BasePointError(f"base point violates x̄ ∈ ⋂Ωᵢ (set {i + 1})")

    @property
    def m(self):
        return len(self.sets)

    @property
    def dim(self):
        return self.space.dim

    def set_distances(self, X):
        """(N, m) array of ``d(x, Omega_i)``."""
        X = _as_batch(X, self.dim)
        return np.stack([distances(s, X, self.space) for s in self.sets], axis=1)

    def is_interior(self, tol=None):
        """Whether a small ball around the base point lies in every set."""
        tol = 1e-6 if tol is None else tol
        n = self.dim
        dirs = np.concatenate([np.eye(n), -np.eye(n)])
        if n == 2:
            ang = np.linspace(0, 2 * np.pi, 16, endpoint=False)
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        pts = self.base_point + tol * dirs
        return all(bool(np.all(s.contains(pts, 0.0))) for s in self.sets)
