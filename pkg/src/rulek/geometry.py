"""Planar primitives on the square [0, side] x [0, side].

Distances, clamping into the square, the three-point sector cover used to
bound the Rule k exclusion probability, a grid-sampled coverage predicate and
the exact area of a disk intersected with the square.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

# half of a chord of the unit disk at 60 degrees; the three sectors' separation
DELTA = 0.5 - math.sqrt(3.0) / 4.0
RHO = math.sqrt(3.0) / 2.0
ALPHA = 1.0 - DELTA**2 / 4.0

# slack for closed-disk membership tests on sampled points
COVER_EPS = 1e-9


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class SquareRegion:
    side: float

    def __post_init__(self):
        if not math.isfinite(self.side) or self.side <= 1.0:
            raise ValueError(f"side: square side must be a finite value > 1, got {self.side!r}")

    def contains(self, p: Point) -> bool:
        return 0.0 <= p[0] <= self.side and 0.0 <= p[1] <= self.side


@dataclass(frozen=True)
class Lemma1Construction:
    center: Point
    z: tuple[Point, Point, Point]
    delta: float = DELTA
    rho: float = RHO
    alpha: float = ALPHA


def _check_finite(p) -> None:
    if not (math.isfinite(p[0]) and math.isfinite(p[1])):
        raise ValueError(f"point coordinates must be finite, got {tuple(p)!r}")


def distance(p: Point, q: Point) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def clamp_to_square(p: Point, Q: SquareRegion) -> Point:
    """Nearest point of the closed square to `p`."""
    return Point(min(max(p[0], 0.0), Q.side), min(max(p[1], 0.0), Q.side))


def lemma1_points(p: Point, Q: SquareRegion) -> Lemma1Construction:
    """Place z_s at radius 1/2, angle 2*pi*s/3 around `p`, then clamp into `Q`.

    The three closed disks of radius RHO around the returned points cover
    D1(p) intersected with the square, and consecutive points are at most
    1 - 2*DELTA apart.
    """
    _check_finite(p)
    p = Point(float(p[0]), float(p[1]))
    if not Q.contains(p):
        raise ValueError(f"p: center {tuple(p)!r} lies outside the square of side {Q.side}")
    zs = []
    for s in range(3):
        theta = 2.0 * math.pi * s / 3.0
        raw = Point(p.x + 0.5 * math.cos(theta), p.y + 0.5 * math.sin(theta))
        zs.append(clamp_to_square(raw, Q))
    return Lemma1Construction(center=p, z=tuple(zs))


def _local_region_grid(p: Point, Q: SquareRegion, pitch: float) -> tuple[np.ndarray, np.ndarray]:
    """Grid points of the given pitch that lie in D1(p) within the square."""
    x0, x1 = max(0.0, p[0] - 1.0), min(Q.side, p[0] + 1.0)
    y0, y1 = max(0.0, p[1] - 1.0), min(Q.side, p[1] + 1.0)
    xs = x0 + pitch * np.arange(int(math.floor((x1 - x0) / pitch)) + 1)
    ys = y0 + pitch * np.arange(int(math.floor((y1 - y0) / pitch)) + 1)
    dx2 = (xs - p[0]) ** 2
    dy2 = (ys - p[1]) ** 2
    inside = dx2[:, None] + dy2[None, :] <= 1.0
    ix, iy = np.nonzero(inside)
    return xs[ix], ys[iy]


def coverage_check(
    p: Point,
    Q: SquareRegion,
    centers: Sequence[Point],
    radius: float,
    pitch: float = 0.01,
) -> bool:
    """Return True if every sampled point of D1(p) within Q is near some center.

    Sampling is on an axis-aligned grid of spacing `pitch` anchored at the
    lower-left corner of the bounding box of D1(p) within Q. A True result only
    certifies coverage up to that resolution. Disk membership is tested with
    an absolute slack of 1e-9.
    """
    if not pitch > 0:
        raise ValueError(f"pitch: must be positive, got {pitch!r}")
    if not radius > 0:
        raise ValueError(f"radius: must be positive, got {radius!r}")
    gx, gy = _local_region_grid(p, Q, pitch)
    lim = (radius + COVER_EPS) ** 2
    for cx, cy in centers:
        if len(gx) == 0:
            break
        out = (gx - cx) ** 2 + (gy - cy) ** 2 > lim
        gx, gy = gx[out], gy[out]
    return len(gx) == 0


def _chord_antiderivative(t: float, r: float) -> float:
    # integral of sqrt(r^2 - t^2) dt
    t = min(max(t, -r), r)
    return 0.5 * (t * math.sqrt(max(r * r - t * t, 0.0)) + r * r * math.asin(t / r))


def disk_square_area(center: Point, radius: float, Q: SquareRegion) -> float:
    """Exact area of the closed disk intersected with the square.

    The vertical extent of the intersection at abscissa x is piecewise one of
    a constant, a half-chord plus a constant, or a full chord; the breakpoints
    are found and each piece is integrated in closed form.
    """
    if not radius > 0:
        raise ValueError(f"radius: must be positive, got {radius!r}")
    cx, cy = float(center[0]), float(center[1])
    r = float(radius)
    # work in coordinates relative to the center; unclipped ends stay exactly +-r
    a = -r if cx - r >= 0.0 else -cx
    b = r if cx + r <= Q.side else Q.side - cx
    if a >= b:
        return 0.0
    bottom, top = -cy, Q.side - cy
    cuts = {a, b}
    for level in (bottom, top):
        if abs(level) < r:
            w = math.sqrt(r * r - level * level)
            for t in (-w, w):
                if a < t < b:
                    cuts.add(t)
    cuts = sorted(cuts)
    area = 0.0
    for u, v in zip(cuts, cuts[1:]):
        mid = 0.5 * (u + v)
        h = math.sqrt(max(r * r - mid * mid, 0.0))
        upper_is_chord = h <= top
        lower_is_chord = -h >= bottom
        if (h <= bottom) or (-h >= top):
            continue
        chord = _chord_antiderivative(v, r) - _chord_antiderivative(u, r)
        width = v - u
        piece = 0.0
        piece += chord if upper_is_chord else top * width
        piece += chord if lower_is_chord else -bottom * width
        area += piece
    return area
