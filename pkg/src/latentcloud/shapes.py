"""Deterministic procedural shape families: box-chair, table, lamp.

Each family is a union of parametric surfaces (boxes, cylinders, cones).
Points are sampled uniformly by surface area: primitive areas fix a
largest-remainder allocation of the point budget, then each primitive is
sampled with the seeded generator in a fixed order, so a (params, n, seed)
triple always produces byte-identical clouds. Only surfaces are sampled,
never interiors.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

FAMILIES = ("box-chair", "table", "lamp")

# per-family continuous parameter ranges (meters); used both for
# validation and for drawing random instances
PARAM_RANGES = {
    "box-chair": {
        "seat_width": (0.35, 0.60),
        "seat_depth": (0.35, 0.60),
        "seat_height": (0.35, 0.55),
        "leg_radius": (0.02, 0.05),
        "back_height": (0.30, 0.50),
        "armrest_height": (0.15, 0.28),
    },
    "table": {
        "top_width": (0.80, 1.40),
        "top_depth": (0.50, 0.90),
        "top_height": (0.62, 0.78),
        "leg_radius": (0.025, 0.06),
    },
    "lamp": {
        "base_radius": (0.10, 0.20),
        "pole_radius": (0.012, 0.030),
        "pole_height": (0.70, 1.30),
        "shade_bottom_radius": (0.14, 0.30),
        "shade_top_radius": (0.06, 0.13),
        "shade_height": (0.15, 0.30),
    },
}

SEAT_THICKNESS = 0.05
TOP_THICKNESS = 0.04
BACK_THICKNESS = 0.03
ARM_THICKNESS = 0.03
ARM_WIDTH = 0.04
BASE_THICKNESS = 0.02


@dataclass(frozen=True)
class ShapeParams:
    family: str
    values: dict = field(default_factory=dict)
    armrest: bool = False  # box-chair only

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        ranges = PARAM_RANGES[self.family]
        missing = set(ranges) - set(self.values)
        if missing:
            raise ConfigError(f"{self.family} is missing parameters: {sorted(missing)}")
        extra = set(self.values) - set(ranges)
        if extra:
            raise ConfigError(f"{self.family} got unknown parameters: {sorted(extra)}")
        for name, (lo, hi) in ranges.items():
            v = self.values[name]
            if not (lo <= v <= hi):
                raise ConfigError(
                    f"{self.family}.{name}={v} outside documented range [{lo}, {hi}]"
                )


def random_params(family, rng):
    """Draw a parameter set uniformly inside the documented ranges."""
    ranges = PARAM_RANGES[family]
    values = {name: float(rng.uniform(lo, hi)) for name, (lo, hi) in sorted(ranges.items())}
    armrest = bool(rng.integers(0, 2)) if family == "box-chair" else False
    return ShapeParams(family=family, values=values, armrest=armrest)


# --- surface primitives -------------------------------------------------
# each primitive is (area, sampler); samplers draw (m, 3) points with rng


def _rect(origin, edge_u, edge_v):
    origin = np.asarray(origin, dtype=np.float64)
    edge_u = np.asarray(edge_u, dtype=np.float64)
    edge_v = np.asarray(edge_v, dtype=np.float64)
    area = float(np.linalg.norm(np.cross(edge_u, edge_v)))

    def sample(rng, m):
        u = rng.uniform(0.0, 1.0, size=(m, 1))
        v = rng.uniform(0.0, 1.0, size=(m, 1))
        return origin + u * edge_u + v * edge_v

    return area, sample


def _box(center, size):
    """Six rectangle faces of an axis-aligned box."""
    cx, cy, cz = center
    sx, sy, sz = size
    x0, x1 = cx - sx / 2, cx + sx / 2
    y0, y1 = cy - sy / 2, cy + sy / 2
    z0, z1 = cz - sz / 2, cz + sz / 2
    return [
        _rect((x0, y0, z0), (sx, 0, 0), (0, sy, 0)),  # bottom
        _rect((x0, y0, z1), (sx, 0, 0), (0, sy, 0)),  # top
        _rect((x0, y0, z0), (sx, 0, 0), (0, 0, sz)),  # front
        _rect((x0, y1, z0), (sx, 0, 0), (0, 0, sz)),  # rear
        _rect((x0, y0, z0), (0, sy, 0), (0, 0, sz)),  # left
        _rect((x1, y0, z0), (0, sy, 0), (0, 0, sz)),  # right
    ]


def _cylinder_side(center_xy, radius, z0, z1):
    cx, cy = center_xy
    area = 2.0 * math.pi * radius * (z1 - z0)

    def sample(rng, m):
        theta = rng.uniform(0.0, 2.0 * math.pi, size=m)
        z = rng.uniform(z0, z1, size=m)
        return np.column_stack(
            (cx + radius * np.cos(theta), cy + radius * np.sin(theta), z)
        )

    return area, sample


def _disc(center_xy, radius, z):
    cx, cy = center_xy
    area = math.pi * radius * radius

    def sample(rng, m):
        theta = rng.uniform(0.0, 2.0 * math.pi, size=m)
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=m))
        return np.column_stack(
            (cx + r * np.cos(theta), cy + r * np.sin(theta), np.full(m, z))
        )

    return area, sample


def _cone_side(center_xy, r_bottom, r_top, z0, z1):
    """Lateral surface of a (truncated) cone; uniform by area."""
    cx, cy = center_xy
    h = z1 - z0
    slant = math.hypot(r_bottom - r_top, h)
    area = math.pi * (r_bottom + r_top) * slant

    def sample(rng, m):
        theta = rng.uniform(0.0, 2.0 * math.pi, size=m)
        u = rng.uniform(0.0, 1.0, size=m)
        # radius density along the slant is proportional to r(s)
        if r_bottom == r_top:
            s = u
        else:
            r2 = r_bottom * r_bottom + u * (r_top * r_top - r_bottom * r_bottom)
            s = (np.sqrt(r2) - r_bottom) / (r_top - r_bottom)
        r = r_bottom + s * (r_top - r_bottom)
        z = z0 + s * h
        return np.column_stack((cx + r * np.cos(theta), cy + r * np.sin(theta), z))

    return area, sample


# --- families -----------------------------------------------------------


def _chair_surfaces(p):
    v = p.values
    w, d = v["seat_width"], v["seat_depth"]
    seat_h, leg_r = v["seat_height"], v["leg_radius"]
    back_h, arm_h = v["back_height"], v["armrest_height"]
    surfaces = []
    # seat slab, top face at seat height
    surfaces += _box((0, 0, seat_h - SEAT_THICKNESS / 2), (w, d, SEAT_THICKNESS))
    # four legs: square posts from floor to the seat underside
    leg_z = seat_h - SEAT_THICKNESS
    for sx in (-1, 1):
        for sy in (-1, 1):
            cx = sx * (w / 2 - leg_r)
            cy = sy * (d / 2 - leg_r)
            surfaces += _box((cx, cy, leg_z / 2), (2 * leg_r, 2 * leg_r, leg_z))
    # back rest at the rear edge (positive y), rising above the seat
    surfaces += _box(
        (0, d / 2 - BACK_THICKNESS / 2, seat_h + back_h / 2),
        (w, BACK_THICKNESS, back_h),
    )
    if p.armrest:
        arm_len = d - BACK_THICKNESS
        for sx in (-1, 1):
            surfaces += _box(
                (
                    sx * (w / 2 - ARM_WIDTH / 2),
                    -BACK_THICKNESS / 2,
                    seat_h + arm_h - ARM_THICKNESS / 2,
                ),
                (ARM_WIDTH, arm_len, ARM_THICKNESS),
            )
    return surfaces


def armrest_band(params):
    """(z_lo, z_hi, y_max) bounding the armrest slab region for a chair.

    With the armrest flag off, no generated point falls in this band in
    front of the back rest (y below y_max).
    """
    v = params.values
    seat_top = v["seat_height"]
    z_hi = seat_top + v["armrest_height"]
    z_lo = z_hi - ARM_THICKNESS
    y_max = v["seat_depth"] / 2 - BACK_THICKNESS
    return z_lo, z_hi, y_max


def _table_surfaces(p):
    v = p.values
    w, d, h, leg_r = v["top_width"], v["top_depth"], v["top_height"], v["leg_radius"]
    surfaces = []
    surfaces += _box((0, 0, h - TOP_THICKNESS / 2), (w, d, TOP_THICKNESS))
    leg_z = h - TOP_THICKNESS
    inset = 0.06
    for sx in (-1, 1):
        for sy in (-1, 1):
            cx = sx * (w / 2 - inset)
            cy = sy * (d / 2 - inset)
            surfaces.append(_cylinder_side((cx, cy), leg_r, 0.0, leg_z))
    return surfaces


def _lamp_surfaces(p):
    v = p.values
    surfaces = [
        _cylinder_side((0, 0), v["base_radius"], 0.0, BASE_THICKNESS),
        _disc((0, 0), v["base_radius"], BASE_THICKNESS),
        _cylinder_side((0, 0), v["pole_radius"], BASE_THICKNESS, v["pole_height"]),
        _cone_side(
            (0, 0),
            v["shade_bottom_radius"],
            v["shade_top_radius"],
            v["pole_height"],
            v["pole_height"] + v["shade_height"],
        ),
    ]
    return surfaces


_FAMILY_SURFACES = {
    "box-chair": _chair_surfaces,
    "table": _table_surfaces,
    "lamp": _lamp_surfaces,
}


def _allocate(areas, n):
    """Largest-remainder allocation of n points proportional to areas."""
    areas = np.asarray(areas, dtype=np.float64)
    shares = areas / areas.sum() * n
    counts = np.floor(shares).astype(int)
    remainder = n - counts.sum()
    if remainder > 0:
        fractional = shares - np.floor(shares)
        # stable order: largest fraction first, then earliest surface
        order = np.lexsort((np.arange(len(areas)), -fractional))
        counts[order[:remainder]] += 1
    return counts


def generate_shape(params, n, seed):
    """Sample an n-point surface cloud for a parameter set; deterministic."""
    if n < 1:
        raise ConfigError(f"point count must be >= 1, got {n}")
    surfaces = _FAMILY_SURFACES[params.family](params)
    areas = [a for a, _ in surfaces]
    counts = _allocate(areas, n)
    rng = np.random.default_rng(seed)
    parts = []
    for (area, sampler), m in zip(surfaces, counts):
        if m > 0:
            parts.append(sampler(rng, int(m)))
    return np.ascontiguousarray(np.concatenate(parts, axis=0))
