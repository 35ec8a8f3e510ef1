"""Synthetic point clouds on four closed test surfaces with known topology.

The four kinds and their ground-truth height-function critical counts
(minima, saddles, maxima):

* dimpled sphere  (2, 2, 2)  genus 0
* torus           (1, 2, 1)  genus 1
* dimpled torus   (3, 6, 3)  genus 1
* two-torus       (1, 4, 1)  genus 2

Tori stand upright (tube center circle in the x-z plane, axis along y) so
the height function is Morse; a flat-lying torus would have degenerate
critical circles. Dimples are smooth compactly-supported dents placed so
every critical height is well separated at the default analysis grid.

Sampling is uniform with respect to surface area: parametric surfaces
(sphere, torus) use rejection against a numerically evaluated area element;
implicit surfaces (dimpled torus, two-torus) draw area-weighted points on a
cached marching-cubes mesh and Newton-project them onto the exact zero set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import optimize
from skimage.measure import marching_cubes

DIMPLED_SPHERE = "dimpled_sphere"
TORUS = "torus"
DIMPLED_TORUS = "dimpled_torus"
TWO_TORUS = "two_torus"

SURFACE_ORDER = (DIMPLED_SPHERE, TORUS, DIMPLED_TORUS, TWO_TORUS)

DEFAULT_N = 5000
DEFAULT_SIGMA = 0.1


class SurfaceConsistencyError(RuntimeError):
    """Spec parameters destroy the advertised critical structure."""


# --------------------------------------------------------------------------
# smooth compactly-supported bump: value 1 at t=0, identically 0 for |t|>=1
# --------------------------------------------------------------------------


def _bump(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0 - 1e-12
    ti = t[inside]
    with np.errstate(over="ignore", under="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def _bump_prime(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0 - 1e-12
    ti = t[inside]
    one = 1.0 - ti * ti
    with np.errstate(over="ignore", under="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / one) * (-2.0 * ti) / (one * one)
    return out


# --------------------------------------------------------------------------
# cloud and ground-truth containers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # (n, 3) float64
    provenance: Optional[dict] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] == 0:
            raise ValueError("points must be a non-empty (n, 3) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def z(self) -> np.ndarray:
        return self.points[:, 2]


@dataclass(frozen=True)
class CriticalPointTruth:
    """Ground-truth (height, Morse index) pairs, sorted by height."""

    points: Tuple[Tuple[float, int], ...]

    def __post_init__(self):
        hs = [h for h, _ in self.points]
        if any(b - a <= 0 for a, b in zip(hs, hs[1:])):
            raise ValueError("critical heights must be strictly increasing")

    @property
    def counts(self) -> Tuple[int, int, int]:
        idx = [i for _, i in self.points]
        return (idx.count(0), idx.count(1), idx.count(2))

    @property
    def euler(self) -> int:
        return sum((-1) ** i for _, i in self.points)

    def heights(self) -> np.ndarray:
        return np.array([h for h, _ in self.points])


# --------------------------------------------------------------------------
# surface specs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceSpec:
    kind = "abstract"

    def expected_counts(self) -> Tuple[int, int, int]:
        raise NotImplementedError

    def true_genus(self) -> int:
        raise NotImplementedError

    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class TorusSpec(SurfaceSpec):
    """Upright torus; the minor (tube) radius defaults to 4 grid lengths."""

    kind = TORUS
    ring_radius: float = 8.0
    tube_radius: float = 4.0

    def __post_init__(self):
        if not 0 < self.tube_radius < self.ring_radius:
            raise ValueError("need 0 < tube_radius < ring_radius")

    def expected_counts(self):
        return (1, 2, 1)

    def true_genus(self):
        return 1


@dataclass(frozen=True)
class DimpledSphereSpec(SurfaceSpec):
    """Sphere with one inward dimple pressed into each hemisphere.

    A dimple presses a patch of shell vertically toward the equator
    plane by a smooth bump whose depth is calibrated to the local slope:
    depth = margin * slope * length / max|bump'|, so the press overcomes
    the slope by the given margin and pools. The upper dimple yields a
    (local min, spill saddle) pair and the mirrored lower one a (saddle,
    local max) pair: counts (2, 2, 2). The footprint is an ellipse,
    ``dimple_len`` down the slope and ``dimple_span`` across it, in
    grid-length arc units; ``dimple_polar`` is the center's angle from
    the pole.
    """

    kind = DIMPLED_SPHERE
    radius: float = 9.0
    dimple_polar: float = 0.66
    dimple_len: float = 3.4
    dimple_span: float = 10.0
    dimple_margin: float = 5.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dimple_margin <= 1:
            raise ValueError("margin must exceed 1 for the dimple to pool")
        if self.dimple_len <= 0 or self.dimple_span <= 0:
            raise ValueError("dimple extents must be positive")
        if not 0.1 < self.dimple_polar < math.pi / 2 - 0.1:
            raise ValueError("dimple center must sit inside its hemisphere")

    def expected_counts(self):
        return (2, 2, 2)

    def true_genus(self):
        return 0


@dataclass(frozen=True)
class DimpledTorusSpec(SurfaceSpec):
    """Upright torus with four dimples pressed into the tube wall.

    Dimples are the dimpled sphere's slope-calibrated presses: two on
    the upper half add (min, saddle) pairs and their lower mirrors add
    (saddle, max) pairs, for counts (3, 6, 3). ``dimples`` rows are
    (u, v, margin, length, span): patch center in chart angles, pooling
    margin, and the down-slope/across-slope footprint half-widths in
    grid-length arc units.
    """

    kind = DIMPLED_TORUS
    ring_radius: float = 9.25
    tube_radius: float = 6.25
    dimples: Tuple[Tuple[float, float, float, float, float], ...] = (
        (0.83, 0.8, 5.0, 3.4, 7.0),
        (0.62, -0.8, -5.0, 3.0, 7.0),
        (-0.83, 0.8, 5.0, 3.4, 7.0),
        (-0.62, -0.8, -5.0, 3.0, 7.0),
    )

    def __post_init__(self):
        if not 0 < self.tube_radius < self.ring_radius:
            raise ValueError("need 0 < tube_radius < ring_radius")
        for u, v, margin, length, span in self.dimples:
            if abs(margin) <= 1:
                raise ValueError("|margin| must exceed 1 for the dimple to pool")
            if length <= 0 or span <= 0:
                raise ValueError("dimple extents must be positive")

    def expected_counts(self):
        return (3, 6, 3)

    def true_genus(self):
        return 1


@dataclass(frozen=True)
class TwoTorusSpec(SurfaceSpec):
    """Genus-2 surface: two upright tori stacked vertically and blended.

    The tube of the upper torus overlaps the lower one by ``overlap`` grid
    lengths near z = 0 and a smooth-minimum blend welds them into a single
    neck, which annihilates the facing max/min pair: one global minimum,
    four hole saddles at distinct heights, one global maximum.
    """

    kind = TWO_TORUS
    ring_radius: float = 5.0
    tube_radius: float = 2.0
    overlap: float = 1.2
    blend: float = 2.0

    def __post_init__(self):
        if not 0 < self.tube_radius < self.ring_radius:
            raise ValueError("need 0 < tube_radius < ring_radius")
        if not 0 < self.overlap < 2 * self.tube_radius:
            raise ValueError("overlap must lie in (0, 2*tube_radius)")
        if self.blend <= 0:
            raise ValueError("blend must be positive")

    @property
    def center_offset(self) -> float:
        """Height of the upper tube-circle center (lower is its mirror)."""
        return (self.ring_radius + self.tube_radius) - self.overlap / 2.0

    def expected_counts(self):
        return (1, 4, 1)

    def true_genus(self):
        return 2


DEFAULT_SPECS: Dict[str, SurfaceSpec] = {
    DIMPLED_SPHERE: DimpledSphereSpec(),
    TORUS: TorusSpec(),
    DIMPLED_TORUS: DimpledTorusSpec(),
    TWO_TORUS: TwoTorusSpec(),
}


def spec_from_kind(kind: str, **params) -> SurfaceSpec:
    key = kind.strip().lower().replace("-", "_")
    if key not in DEFAULT_SPECS:
        raise ValueError(f"unknown surface kind {kind!r}; choose from {SURFACE_ORDER}")
    return replace(DEFAULT_SPECS[key], **params) if params else DEFAULT_SPECS[key]


# --------------------------------------------------------------------------
# parametric surfaces: explicit chart + numerical area element + rejection
#
# Chart coordinates are (u, v): polar/azimuth for the sphere, tube-circle
# angle / tube angle for the tori. Dimples displace the shell vertically:
# inside an elliptical patch the height is pulled toward the patch's
# equator-side extreme, which attenuates the slope there and leaves a
# gently tilted terrace whose ends carry the new critical pair.
# --------------------------------------------------------------------------


def _wrap_angle(a: np.ndarray) -> np.ndarray:
    return np.mod(a + math.pi, 2 * math.pi) - math.pi


def _base_z(spec: SurfaceSpec, u, v):
    if isinstance(spec, DimpledSphereSpec):
        return spec.radius * np.cos(u)
    if isinstance(spec, (TorusSpec, DimpledTorusSpec)):
        return (spec.ring_radius + spec.tube_radius * np.cos(v)) * np.sin(u)
    raise TypeError(f"no chart for {type(spec).__name__}")


# steepest slope of the unit bump profile, |psi'| at its inflection
_BUMP_MAX_SLOPE = float(np.max(np.abs(_bump_prime(np.linspace(-0.999, 0.999, 20001)))))


def _patch_raw_rows(spec: SurfaceSpec):
    """(c_u, c_v, margin, length, span) rows in chart angles / arc units."""
    if isinstance(spec, DimpledSphereSpec):
        row = (spec.dimple_margin, spec.dimple_len, spec.dimple_span)
        return (
            (spec.dimple_polar, 0.0) + row,
            (math.pi - spec.dimple_polar, math.pi) + row,
        )
    if isinstance(spec, DimpledTorusSpec):
        return spec.dimples
    return ()


@lru_cache(maxsize=32)
def _patch_frames(spec: SurfaceSpec):
    """Per-dimple press geometry: downhill unit direction in the arc frame
    and the signed depth calibrated to overcome the local slope.

    depth = |margin| * |slope| * length / max|bump'| guarantees the press
    gradient beats the base slope by the margin factor, so a critical
    pair always forms. A positive margin presses toward the equator
    plane (an inward dimple, giving a pool and its spill saddle); a
    negative margin presses outward (a bump, giving a crest maximum and
    its dip saddle). Mirrored placements with the same margin produce
    the mirrored pair type automatically.
    """
    h = 1e-6
    frames = []
    for c_u, c_v, margin, length, span in _patch_raw_rows(spec):
        arc_u, arc_v = _arc_scales(spec, c_u, c_v)
        zu = float(_base_z(spec, c_u + h, c_v) - _base_z(spec, c_u - h, c_v)) / (2 * h)
        zv = float(_base_z(spec, c_u, c_v + h) - _base_z(spec, c_u, c_v - h)) / (2 * h)
        gu, gv = zu / arc_u, zv / arc_v  # slope per arc length
        g0 = math.hypot(gu, gv)
        if g0 < 1e-9:
            raise SurfaceConsistencyError(
                f"{spec.kind}: dimple at (u={c_u}, v={c_v}) sits on flat ground"
            )
        down = (-gu / g0, -gv / g0)
        depth = abs(margin) * g0 * length / _BUMP_MAX_SLOPE
        z_c = float(_base_z(spec, c_u, c_v))
        depth = math.copysign(depth, z_c * margin)
        frames.append((c_u, c_v, length, span, arc_u, arc_v, down, depth))
    return tuple(frames)


def _arc_scales(spec: SurfaceSpec, u0: float, v0: float) -> Tuple[float, float]:
    """Arc length per unit chart angle at a patch center, per coordinate."""
    if isinstance(spec, DimpledSphereSpec):
        return spec.radius, spec.radius * math.sin(u0)
    if isinstance(spec, (TorusSpec, DimpledTorusSpec)):
        return spec.ring_radius + spec.tube_radius * math.cos(v0), spec.tube_radius
    raise TypeError(f"no chart for {type(spec).__name__}")


def _patch_drop(spec: SurfaceSpec, u, v) -> np.ndarray:
    drop = np.zeros(np.broadcast(u, v).shape)
    for c_u, c_v, length, span, arc_u, arc_v, down, depth in _patch_frames(spec):
        du = arc_u * _wrap_angle(u - c_u)
        dv = arc_v * _wrap_angle(v - c_v)
        s_down = down[0] * du + down[1] * dv
        s_side = -down[1] * du + down[0] * dv
        t = np.hypot(s_down / length, s_side / span)
        drop = drop + depth * _bump(t)
    return drop


def _chart_z(spec: SurfaceSpec, u, v):
    z = _base_z(spec, u, v)
    if isinstance(spec, (DimpledSphereSpec, DimpledTorusSpec)):
        z = z - _patch_drop(spec, u, v)
    return z


def _param_points(spec: SurfaceSpec, u, v) -> np.ndarray:
    """Chart evaluation; u, v are 1-D arrays of equal length."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    z = _chart_z(spec, u, v)
    if isinstance(spec, (TorusSpec, DimpledTorusSpec)):
        rad = spec.ring_radius + spec.tube_radius * np.cos(v)
        return np.column_stack([rad * np.cos(u), spec.tube_radius * np.sin(v), z])
    if isinstance(spec, DimpledSphereSpec):
        st = spec.radius * np.sin(u)
        return np.column_stack([st * np.cos(v), st * np.sin(v), z])
    raise TypeError(f"no chart for {type(spec).__name__}")


def _param_domain(spec: SurfaceSpec) -> Tuple[float, float]:
    if isinstance(spec, (TorusSpec, DimpledTorusSpec)):
        return (2 * math.pi, 2 * math.pi)
    if isinstance(spec, DimpledSphereSpec):
        return (math.pi, 2 * math.pi)
    raise TypeError(f"no chart for {type(spec).__name__}")


def _param_weight(spec: SurfaceSpec, u, v) -> np.ndarray:
    """Area element |p_u x p_v| via central differences (du = dv = 1e-5)."""
    h = 1e-5
    pu = (_param_points(spec, u + h, v) - _param_points(spec, u - h, v)) / (2 * h)
    pv = (_param_points(spec, u, v + h) - _param_points(spec, u, v - h)) / (2 * h)
    return np.linalg.norm(np.cross(pu, pv), axis=1)


@lru_cache(maxsize=16)
def _weight_bound(spec: SurfaceSpec) -> float:
    du, dv = _param_domain(spec)
    g = 512
    uu, vv = np.meshgrid(
        np.linspace(0, du, g), np.linspace(0, dv, g), indexing="ij"
    )
    w = _param_weight(spec, uu.ravel(), vv.ravel())
    return float(w.max()) * 1.05


def _sample_parametric(spec: SurfaceSpec, n: int, rng: np.random.Generator):
    du, dv = _param_domain(spec)
    bound = _weight_bound(spec)
    out = np.empty((n, 3))
    got = 0
    batch = max(4096, 2 * n)
    while got < n:
        u = rng.uniform(0, du, batch)
        v = rng.uniform(0, dv, batch)
        acc = rng.uniform(0, bound, batch)
        w = _param_weight(spec, u, v)
        if np.any(w > bound):
            raise SurfaceConsistencyError("area-element bound violated")
        keep = acc < w
        pts = _param_points(spec, u[keep], v[keep])
        take = min(n - got, pts.shape[0])
        out[got : got + take] = pts[:take]
        got += take
    return out


# --------------------------------------------------------------------------
# implicit surfaces: field, gradient, cached mesh, projection sampling
# --------------------------------------------------------------------------


def _torus_field(pts: np.ndarray, ring: float, tube: float, z0: float):
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2] - z0
    rho = np.hypot(x, z)
    return (rho - ring) ** 2 + y * y - tube * tube


def _torus_field_grad(pts: np.ndarray, ring: float, z0: float):
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2] - z0
    rho = np.hypot(x, z)
    rho = np.maximum(rho, 1e-12)
    f = 2.0 * (rho - ring) / rho
    return np.column_stack([f * x, 2.0 * y, f * z])


def _implicit_value(spec: SurfaceSpec, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64)
    if isinstance(spec, TwoTorusSpec):
        z0 = spec.center_offset
        t1 = _torus_field(pts, spec.ring_radius, spec.tube_radius, -z0)
        t2 = _torus_field(pts, spec.ring_radius, spec.tube_radius, +z0)
        k = spec.blend
        return -k * np.logaddexp(-t1 / k, -t2 / k)
    raise TypeError(f"no implicit field for {type(spec).__name__}")


def _implicit_grad(spec: SurfaceSpec, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64)
    if isinstance(spec, TwoTorusSpec):
        z0 = spec.center_offset
        t1 = _torus_field(pts, spec.ring_radius, spec.tube_radius, -z0)
        t2 = _torus_field(pts, spec.ring_radius, spec.tube_radius, +z0)
        g1 = _torus_field_grad(pts, spec.ring_radius, -z0)
        g2 = _torus_field_grad(pts, spec.ring_radius, +z0)
        k = spec.blend
        w1 = 1.0 / (1.0 + np.exp(np.clip((t1 - t2) / k, -500, 500)))
        return w1[:, None] * g1 + (1.0 - w1)[:, None] * g2
    raise TypeError(f"no implicit field for {type(spec).__name__}")


def _implicit_bbox(spec: SurfaceSpec) -> Tuple[Tuple[float, float], ...]:
    if isinstance(spec, TwoTorusSpec):
        r = spec.ring_radius + spec.tube_radius + 1.0
        t = spec.tube_radius + 1.0
        zr = spec.center_offset + spec.ring_radius + spec.tube_radius + 1.0
        return ((-r, r), (-t, t), (-zr, zr))
    raise TypeError(f"no bbox for {type(spec).__name__}")


_MESH_CELL = 0.15


@lru_cache(maxsize=8)
def _surface_mesh(spec: SurfaceSpec, cell: float = _MESH_CELL):
    """Marching-cubes triangulation of the implicit zero set, with the
    cumulative triangle-area table used for area-weighted sampling."""
    bbox = _implicit_bbox(spec)
    axes = [np.arange(lo, hi + cell, cell) for lo, hi in bbox]
    grid = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([g.ravel() for g in grid])
    vol = _implicit_value(spec, pts).reshape([len(a) for a in axes])
    verts, faces, _, _ = marching_cubes(vol, level=0.0, spacing=(cell, cell, cell))
    verts = verts + np.array([bbox[0][0], bbox[1][0], bbox[2][0]])
    tri = verts[faces]
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    keep = areas > 0
    faces, areas = faces[keep], areas[keep]
    return verts, faces, np.cumsum(areas)


def _project_to_surface(spec: SurfaceSpec, pts: np.ndarray, iters: int = 8):
    """Newton steps along the field gradient until |f|/|grad f| < 1e-12."""
    pts = np.array(pts, dtype=np.float64)
    for _ in range(iters):
        f = _implicit_value(spec, pts)
        g = _implicit_grad(spec, pts)
        gn = np.einsum("ij,ij->i", g, g)
        gn = np.maximum(gn, 1e-300)
        if np.all(np.abs(f) / np.sqrt(gn) < 1e-12):
            break
        pts = pts - (f / gn)[:, None] * g
    return pts


def _sample_implicit(spec: SurfaceSpec, n: int, rng: np.random.Generator):
    verts, faces, cum = _surface_mesh(spec)
    total = cum[-1]
    idx = np.searchsorted(cum, rng.uniform(0, total, n), side="right")
    idx = np.minimum(idx, len(faces) - 1)
    a = verts[faces[idx, 0]]
    b = verts[faces[idx, 1]]
    c = verts[faces[idx, 2]]
    r1 = np.sqrt(rng.uniform(0, 1, n))
    r2 = rng.uniform(0, 1, n)
    pts = (
        (1 - r1)[:, None] * a
        + (r1 * (1 - r2))[:, None] * b
        + (r1 * r2)[:, None] * c
    )
    return _project_to_surface(spec, pts)


# --------------------------------------------------------------------------
# public generators
# --------------------------------------------------------------------------


def sample_surface(spec: SurfaceSpec, n: int, seed: int) -> PointCloud:
    """n points uniform with respect to surface area; pure in (spec, n, seed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([0x5F0A, int(seed)]))
    if isinstance(spec, (TorusSpec, DimpledSphereSpec, DimpledTorusSpec)):
        pts = _sample_parametric(spec, n, rng)
    elif isinstance(spec, TwoTorusSpec):
        pts = _sample_implicit(spec, n, rng)
    else:
        raise TypeError(f"cannot sample {type(spec).__name__}")
    prov = {"kind": spec.kind, "params": spec.params(), "n": n, "seed": int(seed)}
    return PointCloud(pts, prov)


def add_height_noise(
    cloud: PointCloud, sigma: float, seed: int, isotropic: bool = False
) -> PointCloud:
    """Independent N(0, sigma^2) on z (or on all axes when isotropic)."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(np.random.SeedSequence([0xA01E, int(seed)]))
    pts = cloud.points.copy()
    if isotropic:
        pts += sigma * rng.standard_normal(pts.shape)
    else:
        pts[:, 2] += sigma * rng.standard_normal(pts.shape[0])
    prov = dict(cloud.provenance or {})
    prov.update({"sigma": float(sigma), "noise_seed": int(seed), "isotropic": isotropic})
    return PointCloud(pts, prov)


def rotate_cloud(cloud: PointCloud, rotation: np.ndarray) -> PointCloud:
    """Apply a proper rotation (orthogonal, det +1, tolerance 1e-9)."""
    rot = np.asarray(rotation, dtype=np.float64)
    if rot.shape != (3, 3):
        raise ValueError("rotation must be a 3x3 matrix")
    if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-9):
        raise ValueError("rotation must be orthogonal")
    if abs(np.linalg.det(rot) - 1.0) > 1e-9:
        raise ValueError("rotation must have determinant +1")
    return PointCloud(cloud.points @ rot.T, dict(cloud.provenance or {}))


# --------------------------------------------------------------------------
# ground-truth critical points
# --------------------------------------------------------------------------


def _sphere_truth(spec: DimpledSphereSpec) -> CriticalPointTruth:
    """Poles plus 1-D roots of dz/dtheta on each dimple meridian.

    Dimples are azimuth-symmetric about their own meridian and vanish off
    their support, so every off-pole critical point lies on the azimuth
    0 or pi great-circle halves.
    """
    pts = [(-spec.radius, 0), (spec.radius, 2)]
    h = 1e-6

    for phi_c in (0.0, math.pi):

        def dz(theta):
            return float(
                (_chart_z(spec, theta + h, phi_c) - _chart_z(spec, theta - h, phi_c))
                / (2 * h)
            )

        th = np.linspace(0.05, math.pi - 0.05, 8001)
        vals = (_chart_z(spec, th + h, phi_c) - _chart_z(spec, th - h, phi_c)) / (2 * h)
        flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        for i in flips:
            theta_c = optimize.brentq(dz, th[i], th[i + 1], xtol=1e-13)
            z0 = float(_chart_z(spec, theta_c, phi_c))
            hh = 1e-4
            ztt = (
                float(_chart_z(spec, theta_c + hh, phi_c))
                - 2 * z0
                + float(_chart_z(spec, theta_c - hh, phi_c))
            ) / hh**2
            zpp = (
                float(_chart_z(spec, theta_c, phi_c + hh))
                - 2 * z0
                + float(_chart_z(spec, theta_c, phi_c - hh))
            ) / hh**2
            index = int(ztt < 0) + int(zpp < 0)
            pts.append((z0, index))
    pts.sort()
    return CriticalPointTruth(tuple(pts))


def _torus_truth(spec: TorusSpec) -> CriticalPointTruth:
    R, r = spec.ring_radius, spec.tube_radius
    return CriticalPointTruth(
        (
            (-(R + r), 0),
            (-(R - r), 1),
            (+(R - r), 1),
            (+(R + r), 2),
        )
    )


def _chart_truth(spec: DimpledTorusSpec) -> CriticalPointTruth:
    """2-D critical points of z(u, v) over the doubly periodic chart."""

    def z_chart(u, v):
        return _chart_z(spec, u, v)

    h = 1e-6

    def grad(u, v):
        zu = (z_chart(u + h, v) - z_chart(u - h, v)) / (2 * h)
        zv = (z_chart(u, v + h) - z_chart(u, v - h)) / (2 * h)
        return zu, zv

    g = 700
    uu, vv = np.meshgrid(
        np.linspace(-math.pi, math.pi, g, endpoint=False),
        np.linspace(-math.pi, math.pi, g, endpoint=False),
        indexing="ij",
    )
    zu, zv = grad(uu, vv)
    mag = np.hypot(zu, zv)
    # every local minimum of |grad z| on the periodic grid seeds refinement;
    # spurious seeds are discarded by the convergence checks below
    local_min = np.ones_like(mag, dtype=bool)
    for axis in (0, 1):
        for shift in (-1, 1):
            local_min &= mag <= np.roll(mag, shift, axis=axis)
    seeds = np.column_stack([uu[local_min], vv[local_min]])

    def grad_vec(q):
        zu, zv = grad(q[0], q[1])
        return np.array([float(zu), float(zv)])

    found = []
    for u0, v0 in seeds:
        sol = optimize.root(grad_vec, np.array([u0, v0]), method="hybr", tol=1e-13)
        if not sol.success:
            continue
        u_c, v_c = sol.x
        zu_c, zv_c = grad(u_c, v_c)
        if max(abs(float(zu_c)), abs(float(zv_c))) > 1e-8:
            continue
        if any(
            abs(_wrap_angle(np.array([u_c - u1]))[0]) < 5e-3
            and abs(_wrap_angle(np.array([v_c - v1]))[0]) < 5e-3
            for u1, v1, _, _ in found
        ):
            continue
        hh = 1e-4
        zuu = (z_chart(u_c + hh, v_c) - 2 * z_chart(u_c, v_c) + z_chart(u_c - hh, v_c)) / hh**2
        zvv = (z_chart(u_c, v_c + hh) - 2 * z_chart(u_c, v_c) + z_chart(u_c, v_c - hh)) / hh**2
        zuv = (
            z_chart(u_c + hh, v_c + hh)
            - z_chart(u_c + hh, v_c - hh)
            - z_chart(u_c - hh, v_c + hh)
            + z_chart(u_c - hh, v_c - hh)
        ) / (4 * hh**2)
        eig = np.linalg.eigvalsh(np.array([[zuu, zuv], [zuv, zvv]]))
        if np.min(np.abs(eig)) < 1e-8:
            raise SurfaceConsistencyError(f"degenerate critical point at u={u_c}, v={v_c}")
        index = int(np.sum(eig < 0))
        found.append((u_c, v_c, float(z_chart(u_c, v_c)), index))

    pts = sorted((z, idx) for _, _, z, idx in found)
    return CriticalPointTruth(tuple(pts))


def _implicit_truth(spec: SurfaceSpec) -> CriticalPointTruth:
    """Solve F = F_x = F_y = 0 from mesh-vertex seeds; classify by the
    reduced Hessian of the height graph z = g(x, y)."""
    verts, _, _ = _surface_mesh(spec)
    g = _implicit_grad(spec, verts)
    norm = np.linalg.norm(g, axis=1)
    horiz = np.hypot(g[:, 0], g[:, 1])
    ratio = horiz / np.maximum(norm, 1e-12)
    cand = verts[ratio < 0.3]

    # cluster candidates on a coarse lattice to get one seed per region
    seeds = {}
    for p in cand:
        key = tuple(np.round(p / 1.5).astype(int))
        seeds.setdefault(key, p)

    def system(p):
        p = p.reshape(1, 3)
        return np.array(
            [
                _implicit_value(spec, p)[0],
                _implicit_grad(spec, p)[0, 0],
                _implicit_grad(spec, p)[0, 1],
            ]
        )

    found = []
    for p0 in seeds.values():
        sol = optimize.root(system, p0, method="hybr", tol=1e-12)
        if not sol.success:
            continue
        p = sol.x
        if np.max(np.abs(system(p))) > 1e-7:
            continue
        if any(np.linalg.norm(p - q) < 0.3 for q, _ in found):
            continue
        # reduced Hessian of z = g(x, y): H = -[F_ab]/F_z for a, b in {x, y}
        h = 1e-4
        def gval(q):
            return _implicit_grad(spec, q.reshape(1, 3))[0]

        dx = np.array([h, 0, 0])
        dy = np.array([0, h, 0])
        fxx = (gval(p + dx)[0] - gval(p - dx)[0]) / (2 * h)
        fyy = (gval(p + dy)[1] - gval(p - dy)[1]) / (2 * h)
        fxy = (gval(p + dy)[0] - gval(p - dy)[0]) / (2 * h)
        fz = gval(p)[2]
        if abs(fz) < 1e-9:
            raise SurfaceConsistencyError(
                f"degenerate critical point near {p}: vertical gradient vanishes"
            )
        hess = -np.array([[fxx, fxy], [fxy, fyy]]) / fz
        eig = np.linalg.eigvalsh(hess)
        if np.min(np.abs(eig)) < 1e-10:
            raise SurfaceConsistencyError(f"degenerate Hessian at {p}")
        index = int(np.sum(eig < 0))
        found.append((p, index))

    pts = sorted((float(p[2]), idx) for p, idx in found)
    return CriticalPointTruth(tuple(pts))


@lru_cache(maxsize=16)
def analytic_critical_points(spec: SurfaceSpec) -> CriticalPointTruth:
    """Ground-truth (height, index) list; raises SurfaceConsistencyError
    when the parameters destroy the advertised counts."""
    if isinstance(spec, TorusSpec):
        truth = _torus_truth(spec)
    elif isinstance(spec, DimpledSphereSpec):
        truth = _sphere_truth(spec)
    elif isinstance(spec, DimpledTorusSpec):
        truth = _chart_truth(spec)
    elif isinstance(spec, TwoTorusSpec):
        truth = _implicit_truth(spec)
    else:
        raise TypeError(f"no ground truth for {type(spec).__name__}")
    if truth.counts != spec.expected_counts():
        raise SurfaceConsistencyError(
            f"{spec.kind}: critical counts {truth.counts} != expected "
            f"{spec.expected_counts()}; adjust the spec parameters"
        )
    if truth.euler != 2 - 2 * spec.true_genus():
        raise SurfaceConsistencyError(
            f"{spec.kind}: Euler characteristic {truth.euler} inconsistent "
            f"with genus {spec.true_genus()}"
        )
    return truth
