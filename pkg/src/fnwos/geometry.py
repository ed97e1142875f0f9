"""Domains in arbitrary dimension: signed distance, membership and uniform sampling.

Distances are positive inside the domain. Boundary points count as exterior
(the domains are open).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

MAX_CONSECUTIVE_REJECTIONS = 1_000_000


class GeometryError(ValueError):
    pass


def _as_points(x, dim: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != dim:
        raise GeometryError(f"dimension mismatch: domain has d={dim}, point has {pts.shape[-1]}")
    return pts, single


class Domain:
    """Base class. Subclasses implement ``_sdf`` on an ``(n, d)`` array."""

    dimension: int

    def _sdf(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def dist_to_boundary(self, x):
        pts, single = _as_points(x, self.dimension)
        d = self._sdf(pts)
        return float(d[0]) if single else d

    def contains(self, x):
        d = self.dist_to_boundary(x)
        return d > 0.0

    @property
    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))


@dataclass(frozen=True, eq=False)
class Ball(Domain):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64).reshape(-1)
        if not self.radius > 0:
            raise GeometryError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return self.center.size

    def _sdf(self, pts):
        return self.radius - np.linalg.norm(pts - self.center, axis=1)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True, eq=False)
class Hypercube(Domain):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64).reshape(-1)
        hi = np.asarray(self.hi, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise GeometryError("hypercube corners differ in dimension")
        if not np.all(lo < hi):
            raise GeometryError("hypercube requires lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self) -> int:
        return self.lo.size

    def _sdf(self, pts):
        below = self.lo - pts
        above = pts - self.hi
        gap = np.maximum(below, above)
        inside = np.all(gap < 0.0, axis=1)
        out = np.empty(pts.shape[0])
        out[inside] = -gap[inside].max(axis=1)
        outside = ~inside
        if outside.any():
            out[outside] = -np.linalg.norm(np.maximum(gap[outside], 0.0), axis=1)
        return out

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()


@dataclass(frozen=True, eq=False)
class Union(Domain):
    parts: tuple

    @property
    def dimension(self) -> int:
        return self.parts[0].dimension

    def _sdf(self, pts):
        return np.max([p._sdf(pts) for p in self.parts], axis=0)

    def bounding_box(self):
        boxes = [p.bounding_box() for p in self.parts]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)


@dataclass(frozen=True, eq=False)
class Intersection(Domain):
    parts: tuple

    @property
    def dimension(self) -> int:
        return self.parts[0].dimension

    def _sdf(self, pts):
        return np.min([p._sdf(pts) for p in self.parts], axis=0)

    def bounding_box(self):
        boxes = []
        for p in self.parts:
            try:
                boxes.append(p.bounding_box())
            except GeometryError:
                continue
        if not boxes:
            raise GeometryError("intersection of unbounded parts has no bounding box")
        return np.max([b[0] for b in boxes], axis=0), np.min([b[1] for b in boxes], axis=0)


@dataclass(frozen=True, eq=False)
class Complement(Domain):
    part: Domain

    @property
    def dimension(self) -> int:
        return self.part.dimension

    def _sdf(self, pts):
        return -self.part._sdf(pts)

    def bounding_box(self):
        raise GeometryError("complement is unbounded")


def difference(a: Domain, b: Domain) -> Intersection:
    return Intersection((a, Complement(b)))


@dataclass(frozen=True, eq=False)
class Composite(Domain):
    """A CSG tree plus the boundary-point pool used for sampling its surface."""

    tree: Domain
    boundary_pool: np.ndarray | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.tree.dimension

    def _sdf(self, pts):
        return self.tree._sdf(pts)

    def bounding_box(self):
        return self.tree.bounding_box()

    def with_boundary_pool(self, size: int, rng: np.random.Generator) -> "Composite":
        return replace(self, boundary_pool=_project_to_boundary(self, size, rng))


# --------------------------------------------------------------------------
# sampling


def uniform_ball(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the unit d-ball.

    Drops the last two coordinates of a uniform point on S^{d+1}, so each row
    only depends on its own ``d + 2`` normal draws (row-prefix stable).
    """
    z = rng.standard_normal((n, dim + 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z[:, :dim]


def uniform_sphere(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        z = rng.standard_normal((n, dim))
        norm = np.linalg.norm(z, axis=1, keepdims=True)
        if np.all(norm > 0.0):
            return z / norm


def sample_interior(domain: Domain, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise GeometryError("n must be positive")
    if isinstance(domain, Ball):
        return domain.center + domain.radius * uniform_ball(n, domain.dimension, rng)
    if isinstance(domain, Hypercube):
        u = rng.random((n, domain.dimension))
        pts = domain.lo + u * (domain.hi - domain.lo)
        # u = 0 lands on a face; redraw those rows
        bad = ~domain.contains(pts)
        while bad.any():
            pts[bad] = domain.lo + rng.random((int(bad.sum()), domain.dimension)) * (domain.hi - domain.lo)
            bad = ~domain.contains(pts)
        return pts
    return _rejection(domain, n, rng)


def _rejection(domain: Domain, n: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = domain.bounding_box()
    out = []
    have = 0
    misses = 0
    batch = max(64, 2 * n)
    while have < n:
        cand = lo + rng.random((batch, domain.dimension)) * (hi - lo)
        keep = cand[domain._sdf(cand) > 0.0]
        if keep.shape[0] == 0:
            misses += batch
            if misses >= MAX_CONSECUTIVE_REJECTIONS:
                raise GeometryError(f"rejection sampling failed: {misses} consecutive rejections")
            continue
        misses = 0
        out.append(keep)
        have += keep.shape[0]
    return np.concatenate(out)[:n]


def sample_boundary(domain: Domain, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise GeometryError("n must be positive")
    if isinstance(domain, Ball):
        return domain.center + domain.radius * uniform_sphere(n, domain.dimension, rng)
    if isinstance(domain, Hypercube):
        return _cube_surface(domain, n, rng)
    if isinstance(domain, Composite):
        pool = domain.boundary_pool
        if pool is None:
            raise GeometryError("composite domain has no boundary pool; call with_boundary_pool first")
        if n > pool.shape[0]:
            raise GeometryError(f"boundary pool exhausted: requested {n}, pool holds {pool.shape[0]}")
        return pool[rng.choice(pool.shape[0], size=n, replace=False)]
    raise GeometryError(f"boundary sampling unsupported for {type(domain).__name__}; wrap it in Composite")


def _cube_surface(cube: Hypercube, n: int, rng: np.random.Generator) -> np.ndarray:
    d = cube.dimension
    side = cube.hi - cube.lo
    if d == 1:
        pick = rng.random(n) < 0.5
        return np.where(pick, cube.lo, cube.hi)[:, None].astype(np.float64)
    # face area perpendicular to axis i is prod(side) / side[i]; two faces per axis
    area = np.prod(side) / side
    prob = np.repeat(area, 2) / (2.0 * area.sum())
    face = rng.choice(2 * d, size=n, p=prob)
    pts = cube.lo + rng.random((n, d)) * side
    axis = face // 2
    upper = face % 2 == 1
    rows = np.arange(n)
    pts[rows, axis] = np.where(upper, cube.hi[axis], cube.lo[axis])
    return pts


def sdf_gradient(domain: Domain, pts: np.ndarray, h: float = 1e-7) -> np.ndarray:
    d = pts.shape[1]
    grad = np.empty_like(pts)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        grad[:, i] = (domain._sdf(pts + e) - domain._sdf(pts - e)) / (2.0 * h)
    return grad


def _project_to_boundary(domain: Domain, size: int, rng: np.random.Generator) -> np.ndarray:
    """Pool of boundary points: near-surface box samples pushed onto the zero set along the SDF gradient."""
    lo, hi = domain.bounding_box()
    diam = float(np.linalg.norm(hi - lo))
    band = 0.05 * diam
    tol = 1e-6 * diam
    pool = []
    have = 0
    misses = 0
    while have < size:
        cand = lo + rng.random((max(256, 4 * size), domain.dimension)) * (hi - lo)
        cand = cand[np.abs(domain._sdf(cand)) < band]
        for _ in range(20):
            s = domain._sdf(cand)
            g = sdf_gradient(domain, cand)
            gn2 = np.einsum("ij,ij->i", g, g)
            ok = gn2 > 1e-12
            cand = cand[ok]
            cand = cand - (s[ok] / gn2[ok])[:, None] * g[ok]
        cand = cand[np.abs(domain._sdf(cand)) < tol]
        if cand.shape[0] == 0:
            misses += 1
            if misses > 100:
                raise GeometryError("could not project any points onto the composite boundary")
            continue
        pool.append(cand)
        have += cand.shape[0]
    return np.concatenate(pool)[:size]


def build_domain(node: dict) -> Domain:
    """Build a domain from a nested record such as the ``[domain]`` table of a run config."""
    kind = node["kind"]
    if kind == "ball":
        return Ball(np.asarray(node["center"], dtype=float), float(node["radius"]))
    if kind == "hypercube":
        return Hypercube(np.asarray(node["lo"], dtype=float), np.asarray(node["hi"], dtype=float))
    if kind == "union":
        return Union(tuple(build_domain(p) for p in node["parts"]))
    if kind == "intersection":
        return Intersection(tuple(build_domain(p) for p in node["parts"]))
    if kind == "complement":
        return Complement(build_domain(node["part"]))
    if kind == "composite":
        return Composite(build_domain(node["tree"]))
    raise GeometryError(f"unknown domain kind {kind!r}")


def unit_ball(dim: int) -> Ball:
    return Ball(np.zeros(dim), 1.0)


def unit_cube(dim: int) -> Hypercube:
    return Hypercube(np.zeros(dim), np.ones(dim))


def blob(dim: int = 3, centers: Sequence[Sequence[float]] | None = None, radii: Sequence[float] | None = None) -> Composite:
    """Union-of-balls stand-in for an organic shape."""
    if centers is None:
        base = [[0.0, 0.0], [0.7, 0.2], [-0.6, 0.3], [0.1, -0.6]]
        centers = [c + [0.0] * (dim - 2) for c in base] if dim >= 2 else [[0.0], [0.7]]
        radii = [0.6, 0.4, 0.35, 0.3][: len(centers)]
    parts = tuple(Ball(np.asarray(c, dtype=float)[:dim], r) for c, r in zip(centers, radii))
    return Composite(Union(parts))


def shell(dim: int = 3, outer: float = 1.0, inner: float = 0.4, offset: float = 0.3) -> Composite:
    """Ball minus an off-center ball."""
    c = np.zeros(dim)
    c[0] = offset
    return Composite(difference(Ball(np.zeros(dim), outer), Ball(c, inner)))
