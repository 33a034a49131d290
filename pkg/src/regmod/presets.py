"""Built-in collections and the JSON set-specification format.

A specification looks like::

    {"space": {"dim": 2},
     "sets": [{"kind": "halfspace", "normal": [0, 1], "offset": 0},
              {"kind": "poly_sublevel", "poly": [0, 0, 1], "sense": "le"}],
     "point": [0, 0]}

Polynomial coefficients are listed in ascending powers of ``u``.
"""

from __future__ import annotations

import json

import numpy as np

from .geometry import (
    HalfSpace, Intersection, PolyGraph, PolySublevel, SetCollection, SpaceConfig,
    Translate, Union, WholeSpace,
)


class SpecError(ValueError):
    """A set specification could not be parsed."""

    def __init__(self, message, where=""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


def _halfplane_parabola():
    return (HalfSpace([0.0, 1.0]),
            PolySublevel([0.0, 0.0, 1.0], sense="le"))


def example_2_1():
    """``{v >= 0}`` and ``{v <= u^2}`` at the origin."""
    return SetCollection(_halfplane_parabola(), np.zeros(2), name="example-2.1")


def example_2_2():
    """The parabolas ``v = u^2`` and ``v = -u^2`` meeting only at the origin."""
    return SetCollection((PolyGraph(1.0, 1.0), PolyGraph(1.0, -1.0)), np.zeros(2), name="example-2.2")


def example_2_3():
    """``{u <= 0 or v >= u^2}`` and ``{u <= 0 or v <= -u^2}``."""
    left = HalfSpace([-1.0, 0.0])
    sets = (Union([left, PolySublevel([0.0, 0.0, 1.0], sense="ge")]),
            Union([left, PolySublevel([0.0, 0.0, -1.0], sense="le")]))
    return SetCollection(sets, np.zeros(2), name="example-2.3")


def example_2_4():
    """``{u <= 0 or |v| >= u^2}`` together with the whole plane."""
    omega = Union([HalfSpace([-1.0, 0.0]),
                   PolySublevel([0.0, 0.0, 1.0], sense="ge"),
                   PolySublevel([0.0, 0.0, -1.0], sense="le")])
    return SetCollection((omega, WholeSpace(2)), np.zeros(2), name="example-2.4")


def orthogonal_halfspaces():
    """``{v >= 0}`` and ``{u >= 0}`` at the origin."""
    return SetCollection((HalfSpace([0.0, 1.0]), HalfSpace([1.0, 0.0])), np.zeros(2),
                         name="orthogonal-halfspaces")


PRESETS = {
    "example-2.1": example_2_1,
    "example-2.2": example_2_2,
    "example-2.3": example_2_3,
    "example-2.4": example_2_4,
    "orthogonal-halfspaces": orthogonal_halfspaces,
}


def preset(name):
    """Look up a built-in collection.

    ``"2.1"`` is accepted for ``"example-2.1"``, and any unique prefix such as
    ``"orth"`` for the full name.
    """
    key = name if name in PRESETS else f"example-{name}"
    if key not in PRESETS:
        hits = [k for k in PRESETS if k.startswith(name)] if name else []
        if len(hits) != 1:
            raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        key = hits[0]
    return PRESETS[key]()


def all_presets():
    return [PRESETS[k]() for k in PRESETS]


# ---------------------------------------------------------------------------
# JSON parsing


def _vector(obj, key, where, dim=None):
    if key not in obj:
        raise SpecError(f"missing field {key!r}", where)
    try:
        v = np.asarray(obj[key], dtype=float)
    except (TypeError, ValueError):
        raise SpecError(f"field {key!r} must be a list of numbers", where) from None
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise SpecError(f"field {key!r} must be a finite numeric list", where)
    if dim is not None and v.size != dim:
        raise SpecError(f"field {key!r} has length {v.size}, expected {dim}", where)
    return v


def parse_set(obj, dim, where="sets[0]"):
    if not isinstance(obj, dict):
        raise SpecError("set entry must be an object", where)
    kind = obj.get("kind")
    tol = obj.get("tolerance", 1e-10)
    if not isinstance(tol, (int, float)) or tol <= 0:
        raise SpecError("tolerance must be a positive number", where)
    if kind == "halfspace":
        normal = _vector(obj, "normal", where, dim)
        if not np.any(normal):
            raise SpecError("half-space normal must be nonzero", where)
        return HalfSpace(normal, float(obj.get("offset", 0.0)), tol=tol)
    if kind == "whole_space":
        return WholeSpace(dim, tol=tol)
    if kind in ("union", "intersection"):
        members = obj.get("sets")
        if not isinstance(members, list) or not members:
            raise SpecError(f"{kind} needs a nonempty 'sets' list", where)
        parsed = [parse_set(m, dim, f"{where}.sets[{j}]") for j, m in enumerate(members)]
        return (Union if kind == "union" else Intersection)(parsed, tol=tol)
    if kind == "translate":
        if "base" not in obj:
            raise SpecError("translate needs a 'base' set", where)
        return Translate(parse_set(obj["base"], dim, f"{where}.base"), _vector(obj, "shift", where, dim))
    if kind in ("poly_graph", "poly_sublevel"):
        if dim != 2:
            raise SpecError(f"{kind} is only available in the plane", where)
        if kind == "poly_graph":
            if "poly" in obj:
                return PolyGraph(poly=_vector(obj, "poly", where), tol=tol)
            coef = obj.get("coefficient", 1.0)
            sign = obj.get("sign", 1.0)
            if not isinstance(coef, (int, float)) or sign not in (1, -1, 1.0, -1.0):
                raise SpecError("poly_graph needs a numeric 'coefficient' and 'sign' of +1 or -1", where)
            return PolyGraph(float(coef), float(sign), tol=tol)
        sense = obj.get("sense", "le")
        if sense not in ("le", "ge"):
            raise SpecError("sense must be 'le' or 'ge'", where)
        return PolySublevel(_vector(obj, "poly", where), sense=sense, tol=tol)
    raise SpecError(f"unknown set kind {kind!r}", where)


def parse_spec(obj, name="spec"):
    """Build a :class:`SetCollection` from a decoded JSON specification.

    Raises :class:`SpecError` for malformed input and
    :class:`~regmod.geometry.BasePointError` when the point is not common to
    all sets.
    """
    if not isinstance(obj, dict):
        raise SpecError("top level must be an object")
    space = obj.get("space", {})
    if not isinstance(space, dict):
        raise SpecError("must be an object", "space")
    dim = space.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SpecError("dim must be a positive integer", "space.dim")
    norm = space.get("factor_norm", "euclidean")
    if norm != "euclidean":
        raise SpecError(f"unsupported factor norm {norm!r}", "space.factor_norm")
    factors = space.get("factors")
    try:
        cfg = SpaceConfig(dim, None if factors is None else tuple(factors))
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc), "space.factors") from None
    sets = obj.get("sets")
    if not isinstance(sets, list) or len(sets) < 2:
        raise SpecError("need a list of at least two sets", "sets")
    parsed = tuple(parse_set(s, dim, f"sets[{j}]") for j, s in enumerate(sets))
    point = _vector(obj, "point", "point", dim) if "point" in obj else np.zeros(dim)
    return SetCollection(parsed, point, cfg, name=obj.get("name", name))


def load_spec(path):
    """Read and parse a JSON specification file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from None
    return parse_spec(obj, name=str(path))
