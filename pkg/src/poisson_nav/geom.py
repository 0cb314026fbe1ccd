"""Exact planar geometry for cone-and-ball history regions.

Conventions used throughout the package:

* A cone with apex ``w`` and half-angle ``theta`` opens in the +x direction
  and is closed: ``p`` belongs to it iff
  ``sin(theta) * (p.x - w.x) >= cos(theta) * |p.y - w.y|``.
* Balls are open; their bounding circles are not part of the region.
* A history region is a finite union of terms, each term being the
  intersection of one cone with one open ball.

All quantities are exact set computations up to floating point rounding.
A small relative slack (``EMPTY_SLACK``) is applied when classifying a
term as empty, because the renewal mechanism produces terms whose ball
just touches the cone (distance equal to the radius); those boundary
contacts have empty interior and must be pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

# Relative slack used when comparing a squared distance against a squared
# radius to decide that a cone/ball term has empty interior.  Exact touching
# configurations arise by construction at renewal steps.
EMPTY_SLACK = 1e-12

# Breakpoints closer than this (in angle) are treated as duplicates when
# panelizing an angular integral.
_BP_DEDUPE = 1e-13

# Gauss-Legendre rule applied on each smooth angular panel.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, slots=True)
class Point:
    """A point of the plane."""

    x: float
    y: float


@dataclass(frozen=True, slots=True)
class PolarStep:
    """A displacement in polar form relative to the current vertex."""

    r: float
    phi: float


@dataclass(frozen=True, slots=True)
class ConeApex:
    """Apex of a forward cone; the half-angle is ambient, not stored."""

    apex: Point


@dataclass(frozen=True, slots=True)
class HistoryTerm:
    """One cone-intersect-ball term of a history region."""

    cone_apex: ConeApex
    ball_center: Point
    ball_radius: float

    def __post_init__(self):
        if not self.ball_radius > 0.0:
            raise ValueError("ball_radius must be positive")


@dataclass(frozen=True, slots=True)
class HistorySet:
    """Union of history terms, tracked relative to a reference vertex."""

    terms: tuple[HistoryTerm, ...] = ()
    reference_vertex: Point = Point(0.0, 0.0)


def _normalize_intervals(intervals: Sequence[tuple[float, float]]):
    out = []
    for a, b in sorted((float(a), float(b)) for a, b in intervals):
        if b < a:
            raise ValueError("interval endpoints out of order")
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class AngularSet:
    """Disjoint sorted closed angular intervals within [-theta, theta]."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize_intervals(self.intervals))

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def contains(self, phi: float, tol: float = 0.0) -> bool:
        return any(a - tol <= phi <= b + tol for a, b in self.intervals)


@dataclass(frozen=True)
class RadialSet:
    """Disjoint sorted closed radial intervals within [0, r_max]."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize_intervals(self.intervals))

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def contains(self, r: float, tol: float = 0.0) -> bool:
        return any(a - tol <= r <= b + tol for a, b in self.intervals)


# ---------------------------------------------------------------------------
# scalar cone primitives


def cone_contains(apex: Point, p: Point, theta: float) -> bool:
    """Whether p lies in the closed cone with the given apex and half-angle.

    Decided by comparing the absolute bearing of p seen from the apex with
    theta, which keeps exact diagonal boundary points (such as (1,1) at
    theta = pi/4) inside the closed set.
    """
    dx = p.x - apex.x
    dy = p.y - apex.y
    if dx == 0.0 and dy == 0.0:
        return True
    return math.atan2(abs(dy), dx) <= theta


def cones_intersection_apex(a1: Point, a2: Point, theta: float) -> Optional[Point]:
    """Apex of the intersection of two equal-angle forward cones.

    The intersection of two cones with half-angle theta < pi/2 opening in
    the +x direction is again such a cone (possibly with its apex far to
    the right of both inputs); this returns its apex.  For theta < pi/2
    the intersection is never empty, so the return value is always a
    Point, but callers may treat None as "empty" for forward
    compatibility.
    """
    t = math.tan(theta)
    # Upper edge of a cone with apex (ax, ay): y = ay + t*(x - ax), so the
    # constraint y - t*x <= ay - t*ax binds with the smaller intercept.
    c_plus = min(a1.y - t * a1.x, a2.y - t * a2.x)
    c_minus = max(a1.y + t * a1.x, a2.y + t * a2.x)
    return Point((c_minus - c_plus) / (2.0 * t), 0.5 * (c_plus + c_minus))


def _term_empty(ax, ay, cx, cy, radius, theta) -> bool:
    """Whether the cone at (ax, ay) misses the open ball at (cx, cy).

    Compares the squared distance from the ball center to the closed cone
    against the slack-deflated squared radius.  The distance is the
    perpendicular drop onto the nearer cone edge when the foot of that
    drop lies on the edge ray, and the distance to the apex otherwise.
    """
    dx = cx - ax
    ady = cy - ay
    if ady < 0.0:
        ady = -ady
    cross = ady * math.cos(theta) - dx * math.sin(theta)
    if cross <= 0.0:
        return False
    d2 = cross * cross
    if dx * math.cos(theta) + ady * math.sin(theta) <= 0.0:
        d2 = dx * dx + ady * ady
    return d2 >= radius * radius * (1.0 - EMPTY_SLACK)


def term_is_empty(term: HistoryTerm, theta: float) -> bool:
    """Whether a cone-intersect-open-ball term has empty interior."""
    a = term.cone_apex.apex
    c = term.ball_center
    return _term_empty(a.x, a.y, c.x, c.y, term.ball_radius, theta)


def _point_in_term(px, py, ax, ay, cx, cy, radius, theta) -> bool:
    dx = px - ax
    dy = py - ay
    if math.sin(theta) * dx < math.cos(theta) * abs(dy):
        return False
    ex = px - cx
    ey = py - cy
    return ex * ex + ey * ey < radius * radius


def point_in_history(p: Point, history: HistorySet, theta: float) -> bool:
    """Whether p lies in the union of the history terms."""
    for t in history.terms:
        a = t.cone_apex.apex
        c = t.ball_center
        if _point_in_term(p.x, p.y, a.x, a.y, c.x, c.y, t.ball_radius, theta):
            return True
    return False


# ---------------------------------------------------------------------------
# interval set algebra (half-open semantics are irrelevant: all the laws
# simulated on top of this module are absolutely continuous)


def _intersect_two(ia, ib):
    out = []
    i = j = 0
    while i < len(ia) and j < len(ib):
        lo = max(ia[i][0], ib[j][0])
        hi = min(ia[i][1], ib[j][1])
        if hi > lo:
            out.append((lo, hi))
        if ia[i][1] < ib[j][1]:
            i += 1
        else:
            j += 1
    return out


def _union_merge(intervals):
    if not intervals:
        return []
    srt = sorted(intervals)
    out = [list(srt[0])]
    for a, b in srt[1:]:
        if a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def _complement(intervals, lo, hi):
    out = []
    cur = lo
    for a, b in intervals:
        a = max(a, lo)
        b = min(b, hi)
        if b <= a:
            continue
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if hi > cur:
        out.append((cur, hi))
    return out


# ---------------------------------------------------------------------------
# ray tracing through a history


def _ray_term_interval(ox, oy, ux, uy, ax, ay, cx, cy, radius, theta):
    """Parameter interval where the ray o + s*u meets one term, or None."""
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    lo = 0.0
    hi = math.inf
    # Cone edge constraints in the form a*s >= b.
    for sgn in (1.0, -1.0):
        a = sin_t * ux - sgn * cos_t * uy
        b = sgn * cos_t * (oy - ay) - sin_t * (ox - ax)
        if a > 0.0:
            lo = max(lo, b / a)
        elif a < 0.0:
            hi = min(hi, b / a)
        elif b > 0.0:
            return None
    if hi <= lo:
        return None
    # Open ball constraint.
    wx = ox - cx
    wy = oy - cy
    m = -(ux * wx + uy * wy)
    disc = m * m - (wx * wx + wy * wy - radius * radius)
    if disc <= 0.0:
        return None
    root = math.sqrt(disc)
    lo = max(lo, m - root)
    hi = min(hi, m + root)
    if hi <= lo:
        return None
    return (lo, hi)


def free_radial_intervals(
    origin: Point, phi: float, r_max: float, history: HistorySet, theta: float
) -> RadialSet:
    """Radii s in [0, r_max] with origin + s*(cos phi, sin phi) unexplored."""
    if not abs(phi) <= theta:
        raise ValueError("ray direction must satisfy |phi| <= theta")
    if not r_max > 0.0:
        raise ValueError("r_max must be positive")
    ux = math.cos(phi)
    uy = math.sin(phi)
    blocked = []
    for t in history.terms:
        a = t.cone_apex.apex
        c = t.ball_center
        iv = _ray_term_interval(
            origin.x, origin.y, ux, uy, a.x, a.y, c.x, c.y, t.ball_radius, theta
        )
        if iv is not None:
            lo, hi = iv
            lo = max(lo, 0.0)
            hi = min(hi, r_max)
            if hi > lo:
                blocked.append((lo, hi))
    return RadialSet(tuple(_complement(_union_merge(blocked), 0.0, r_max)))


# ---------------------------------------------------------------------------
# circle arcs against a history


def _cos_arc_intervals(center, m, lo, hi):
    """Subintervals of [lo, hi] where cos(phi - center) >= m."""
    if m >= 1.0:
        return []
    if m <= -1.0:
        return [(lo, hi)]
    d = math.acos(m)
    # Pull center into (-pi, pi] then replicate the arc by +-2*pi.
    c = math.atan2(math.sin(center), math.cos(center))
    out = []
    for k in (-1, 0, 1):
        a = c - d + 2.0 * math.pi * k
        b = c + d + 2.0 * math.pi * k
        a = max(a, lo)
        b = min(b, hi)
        if b > a:
            out.append((a, b))
    return _union_merge(out)


def _term_arc_intervals(ox, oy, r, ax, ay, cx, cy, radius, theta):
    """Angular intervals of the circle |p - o| = r inside one term.

    Each of the three constraints (two cone edges, one ball) restricts the
    angle phi to a set of the form cos(phi - center) >= m, so the result
    is an intersection of cosine arcs clipped to [-theta, theta].
    """
    lo = -theta
    hi = theta
    dx = cx - ox
    dy = cy - oy
    d2 = dx * dx + dy * dy
    dn = math.sqrt(d2)
    if dn == 0.0:
        if r * r >= radius * radius:
            return []
        arcs = [(lo, hi)]
    else:
        mb = (r * r + d2 - radius * radius) / (2.0 * r * dn)
        arcs = _cos_arc_intervals(math.atan2(dy, dx), mb, lo, hi)
        if not arcs:
            return []
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    # Edge constraint sin(theta - phi) >= b1 / r, i.e.
    # cos(phi - (theta - pi/2)) >= b1 / r.
    b1 = cos_t * (oy - ay) - sin_t * (ox - ax)
    arcs = _intersect_two(
        arcs, _cos_arc_intervals(theta - 0.5 * math.pi, b1 / r, lo, hi)
    )
    if not arcs:
        return []
    # Edge constraint sin(theta + phi) >= b2 / r, i.e.
    # cos(phi - (pi/2 - theta)) >= b2 / r.
    b2 = -cos_t * (oy - ay) - sin_t * (ox - ax)
    arcs = _intersect_two(
        arcs, _cos_arc_intervals(0.5 * math.pi - theta, b2 / r, lo, hi)
    )
    return arcs


def free_angular_set(
    origin: Point, r: float, history: HistorySet, theta: float
) -> AngularSet:
    """Directions phi in [-theta, theta] with origin + r*u(phi) unexplored."""
    if not r > 0.0:
        raise ValueError("r must be positive")
    blocked = []
    for t in history.terms:
        a = t.cone_apex.apex
        c = t.ball_center
        blocked.extend(
            _term_arc_intervals(
                origin.x, origin.y, r, a.x, a.y, c.x, c.y, t.ball_radius, theta
            )
        )
    return AngularSet(tuple(_complement(_union_merge(blocked), -theta, theta)))


# ---------------------------------------------------------------------------
# explored area inside a search cone


def _term_breakpoints(ox, oy, r, ax, ay, cx, cy, radius, theta, bps):
    """Angular breakpoints contributed by one term within radius r."""
    dx = cx - ox
    dy = cy - oy
    dn = math.hypot(dx, dy)
    # Direction of the ball center and tangency fan.
    if dn > 0.0:
        psi = math.atan2(dy, dx)
        bps.append(psi)
        if dn > radius:
            half = math.asin(min(1.0, radius / dn))
            bps.append(psi - half)
            bps.append(psi + half)
    # Direction of the term apex.
    tx = ax - ox
    ty = ay - oy
    if tx != 0.0 or ty != 0.0:
        bps.append(math.atan2(ty, tx))
    # Corners: circle of the ball meeting the term's cone edges.
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    for sgn in (1.0, -1.0):
        ex = cos_t
        ey = sgn * sin_t
        # Solve |a + t*e - c|^2 = radius^2 for t >= 0.
        wx = ax - cx
        wy = ay - cy
        b = ex * wx + ey * wy
        disc = b * b - (wx * wx + wy * wy - radius * radius)
        if disc <= 0.0:
            continue
        root = math.sqrt(disc)
        for t in (-b - root, -b + root):
            if t >= 0.0:
                px = ax + t * ex - ox
                py = ay + t * ey - oy
                if px != 0.0 or py != 0.0:
                    bps.append(math.atan2(py, px))
    # Arc endpoints of the term boundary at the probe radius r.
    arcs = _term_arc_intervals(ox, oy, r, ax, ay, cx, cy, radius, theta)
    for a_, b_ in arcs:
        bps.append(a_)
        bps.append(b_)


def _pair_breakpoints(ox, oy, t1, t2, theta, bps):
    """Angles at which the boundaries of two terms cross each other."""
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    (a1x, a1y, c1x, c1y, r1) = t1
    (a2x, a2y, c2x, c2y, r2) = t2

    def push(px, py):
        dx = px - ox
        dy = py - oy
        if dx != 0.0 or dy != 0.0:
            bps.append(math.atan2(dy, dx))

    # circle-circle
    ddx = c2x - c1x
    ddy = c2y - c1y
    d = math.hypot(ddx, ddy)
    if d > 0.0 and abs(r1 - r2) < d < r1 + r2:
        a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
        h2 = r1 * r1 - a * a
        if h2 > 0.0:
            h = math.sqrt(h2)
            mx = c1x + a * ddx / d
            my = c1y + a * ddy / d
            push(mx - h * ddy / d, my + h * ddx / d)
            push(mx + h * ddy / d, my - h * ddx / d)

    # circle of one term against the edge rays of the other, both ways
    for (axx, ayy), (cxx, cyy, rr) in (
        ((a1x, a1y), (c2x, c2y, r2)),
        ((a2x, a2y), (c1x, c1y, r1)),
    ):
        for sgn in (1.0, -1.0):
            ex = cos_t
            ey = sgn * sin_t
            wx = axx - cxx
            wy = ayy - cyy
            b = ex * wx + ey * wy
            disc = b * b - (wx * wx + wy * wy - rr * rr)
            if disc <= 0.0:
                continue
            root = math.sqrt(disc)
            for t in (-b - root, -b + root):
                if t >= 0.0:
                    push(axx + t * ex, ayy + t * ey)

    # edge ray against edge ray
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            e1x, e1y = cos_t, s1 * sin_t
            e2x, e2y = cos_t, s2 * sin_t
            det = e1x * e2y - e1y * e2x
            if abs(det) < 1e-15:
                continue
            rx = a2x - a1x
            ry = a2y - a1y
            t = (rx * e2y - ry * e2x) / det
            s = (rx * e1y - ry * e1x) / det
            if t >= 0.0 and s >= 0.0:
                push(a1x + t * e1x, a1y + t * e1y)


def _panel_nodes(ox, oy, r, raw_terms, theta):
    """Quadrature nodes and weights over [-theta, theta], panelized so the
    blocked-length integrand is smooth on each panel."""
    bps = [-theta, theta]
    for t in raw_terms:
        _term_breakpoints(ox, oy, r, *t, theta, bps)
    for i in range(len(raw_terms)):
        for j in range(i + 1, len(raw_terms)):
            _pair_breakpoints(ox, oy, raw_terms[i], raw_terms[j], theta, bps)
    pts = sorted(b for b in bps if -theta <= b <= theta)
    uniq = [pts[0]]
    for b in pts[1:]:
        if b - uniq[-1] > _BP_DEDUPE:
            uniq.append(b)
    if uniq[-1] < theta:
        uniq.append(theta)
    nodes = []
    weights = []
    for a, b in zip(uniq[:-1], uniq[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        nodes.append(mid + half * _GL_NODES)
        weights.append(half * _GL_WEIGHTS)
    return np.concatenate(nodes), np.concatenate(weights)


def _blocked_arrays(ox, oy, phis, cap, raw_terms, theta):
    """Per-term blocked radial intervals along each ray, as (T, N) arrays.

    Rays are o + s*u(phi) for each phi in phis; intervals are clipped to
    [0, cap] and infeasible rows are collapsed to the empty interval
    (0, 0).
    """
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    ux = np.cos(phis)
    uy = np.sin(phis)
    los = []
    his = []
    for ax, ay, cx, cy, radius in raw_terms:
        lo = np.zeros_like(phis)
        hi = np.full_like(phis, cap)
        ok = np.ones(phis.shape, dtype=bool)
        for sgn in (1.0, -1.0):
            a = sin_t * ux - sgn * cos_t * uy
            b = sgn * cos_t * (oy - ay) - sin_t * (ox - ax)
            with np.errstate(divide="ignore", invalid="ignore"):
                q = b / a
            pos = a > 0.0
            neg = a < 0.0
            lo = np.where(pos, np.maximum(lo, q), lo)
            hi = np.where(neg, np.minimum(hi, q), hi)
            ok &= ~((a == 0.0) & (b > 0.0))
        wx = ox - cx
        wy = oy - cy
        m = -(ux * wx + uy * wy)
        disc = m * m - (wx * wx + wy * wy - radius * radius)
        ok &= disc > 0.0
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.maximum(lo, m - root)
        hi = np.minimum(hi, m + root)
        lo = np.maximum(lo, 0.0)
        hi = np.minimum(hi, cap)
        ok &= hi > lo
        los.append(np.where(ok, lo, 0.0))
        his.append(np.where(ok, hi, 0.0))
    return np.array(los), np.array(his)


def _blocked_sq_integral(LO, HI, r=None):
    """For each ray, integral of s ds over the union of blocked intervals.

    LO and HI have shape (T, N) with LO <= HI rowwise; optionally the
    intervals are first clipped to [0, r].
    """
    if r is not None:
        LO = np.minimum(LO, r)
        HI = np.minimum(HI, r)
    order = np.argsort(LO, axis=0)
    LOs = np.take_along_axis(LO, order, axis=0)
    HIs = np.take_along_axis(HI, order, axis=0)
    acc = np.zeros(LO.shape[1])
    cur_lo = LOs[0].copy()
    cur_hi = HIs[0].copy()
    for t in range(1, LO.shape[0]):
        new = LOs[t] > cur_hi
        acc += np.where(new, 0.5 * (cur_hi * cur_hi - cur_lo * cur_lo), 0.0)
        cur_lo = np.where(new, LOs[t], cur_lo)
        cur_hi = np.where(new, HIs[t], np.maximum(cur_hi, HIs[t]))
    acc += 0.5 * (cur_hi * cur_hi - cur_lo * cur_lo)
    return acc


def _raw_terms(history: HistorySet):
    return [
        (
            t.cone_apex.apex.x,
            t.cone_apex.apex.y,
            t.ball_center.x,
            t.ball_center.y,
            t.ball_radius,
        )
        for t in history.terms
    ]


def explored_area(origin: Point, r: float, history: HistorySet, theta: float) -> float:
    """Area of C_theta(origin) within radius r that the history leaves free.

    With an empty history this is exactly theta * r**2; otherwise the
    blocked part is integrated in polar coordinates around the origin
    with panels split at every angle where the integrand loses
    smoothness.
    """
    if r < 0.0:
        raise ValueError("r must be nonnegative")
    if r == 0.0:
        return 0.0
    terms = _raw_terms(history)
    if not terms:
        return theta * r * r
    phis, weights = _panel_nodes(origin.x, origin.y, r, terms, theta)
    LO, HI = _blocked_arrays(origin.x, origin.y, phis, r, terms, theta)
    blocked = float(np.dot(weights, _blocked_sq_integral(LO, HI)))
    return theta * r * r - blocked


# ---------------------------------------------------------------------------
# rightmost extent of a history


def _term_max_x(ax, ay, cx, cy, radius, theta, sin_t, cos_t):
    """Largest x over the closure of one cone-and-ball term, or None.

    Candidates: the rightmost point of the ball when it lies in the cone,
    crossings of the bounding circle with the two cone edge rays, and the
    apex when it sits inside the closed ball.
    """
    cand = None
    if cone_contains(Point(ax, ay), Point(cx + radius, cy), theta):
        cand = cx + radius
    wx = ax - cx
    wy = ay - cy
    for sgn in (1.0, -1.0):
        ex = cos_t
        ey = sgn * sin_t
        b = ex * wx + ey * wy
        disc = b * b - (wx * wx + wy * wy - radius * radius)
        if disc <= 0.0:
            continue
        root = math.sqrt(disc)
        for s in (-b - root, -b + root):
            if s >= 0.0:
                x = ax + s * ex
                if cand is None or x > cand:
                    cand = x
    if wx * wx + wy * wy < radius * radius:
        if cand is None or ax > cand:
            cand = ax
    return cand


def history_width(history: HistorySet, theta: float) -> float:
    """Horizontal extent of the history past its reference vertex.

    The maximum of x - reference.x over the closure of the union, with
    the per-term maximum computed in closed form.
    """
    if not history.terms:
        return 0.0
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    best = history.reference_vertex.x
    for t in history.terms:
        a = t.cone_apex.apex
        c = t.ball_center
        cand = _term_max_x(
            a.x, a.y, c.x, c.y, t.ball_radius, theta, sin_t, cos_t
        )
        if cand is not None and cand > best:
            best = cand
    return best - history.reference_vertex.x


# ---------------------------------------------------------------------------
# emptiness of (cone1 n cone2) n ball, used by the disjointness invariant


def cones_ball_disjoint(
    apex1: Point,
    theta1: float,
    apex2: Point,
    theta2: float,
    center: Point,
    radius: float,
) -> bool:
    """Whether the intersection of two cones misses an open ball.

    The two cones may have different half-angles; their intersection is a
    convex polygonal region (possibly empty).  The test computes the
    distance from the ball center to that region by enumerating the
    candidate projections onto faces and vertices.
    """
    halves = []
    for apex, th in ((apex1, theta1), (apex2, theta2)):
        s = math.sin(th)
        c = math.cos(th)
        # In-cone means s*(x - ax) >= c*|y - ay|; as two half-planes
        # n . p <= b with unit normals.
        halves.append((-s, c, -s * apex.x + c * apex.y))
        halves.append((-s, -c, -s * apex.x - c * apex.y))
    qx, qy = center.x, center.y
    scale = 1.0 + abs(qx) + abs(qy) + sum(abs(b) for _, _, b in halves)
    tol = 1e-12 * scale

    def feasible(px, py):
        return all(nx * px + ny * py <= b + tol for nx, ny, b in halves)

    if feasible(qx, qy):
        return False if radius > 0.0 else True
    cands = []
    for nx, ny, b in halves:
        viol = nx * qx + ny * qy - b
        px = qx - viol * nx
        py = qy - viol * ny
        if feasible(px, py):
            cands.append((px, py))
    for i in range(len(halves)):
        for j in range(i + 1, len(halves)):
            n1x, n1y, b1 = halves[i]
            n2x, n2y, b2 = halves[j]
            det = n1x * n2y - n1y * n2x
            if abs(det) < 1e-14:
                continue
            px = (b1 * n2y - b2 * n1y) / det
            py = (n1x * b2 - n2x * b1) / det
            if feasible(px, py):
                cands.append((px, py))
    if not cands:
        # No boundary point of the region is reachable: the region itself
        # is empty, hence disjoint from anything.
        return True
    d2 = min((px - qx) ** 2 + (py - qy) ** 2 for px, py in cands)
    return d2 >= radius * radius * (1.0 - EMPTY_SLACK)


# ---------------------------------------------------------------------------
# area inversion


class AreaSolver:
    """Inverts r -> explored_area(origin, r, history, theta) for one step.

    The solver caches a panelized quadrature rule around a pivot radius
    and reuses it inside the root bracketing, then rebuilds the rule at
    the root and polishes once.  With an empty history the inverse is the
    closed form sqrt(target / theta).
    """

    def __init__(self, origin: Point, history: HistorySet, theta: float):
        self.ox = origin.x
        self.oy = origin.y
        self.theta = theta
        self.terms = _raw_terms(history)
        if self.terms:
            reach = 0.0
            for ax, ay, cx, cy, radius in self.terms:
                d = math.hypot(cx - self.ox, cy - self.oy) + radius
                if d > reach:
                    reach = d
            self.r_star = reach
            self._build(reach)
            self.blocked_star = self._blocked(reach)
        else:
            self.r_star = 0.0
            self.blocked_star = 0.0

    def _build(self, pivot):
        phis, weights = _panel_nodes(self.ox, self.oy, pivot, self.terms, self.theta)
        LO, HI = _blocked_arrays(
            self.ox, self.oy, phis, self.r_star, self.terms, self.theta
        )
        self._weights = weights
        self._LO = LO
        self._HI = HI

    def _blocked(self, r):
        return float(
            np.dot(self._weights, _blocked_sq_integral(self._LO, self._HI, r))
        )

    def area(self, r):
        """Free area within radius r on the cached rule."""
        if not self.terms:
            return self.theta * r * r
        return self.theta * r * r - self._blocked(min(r, self.r_star))

    def invert(self, target: float) -> float:
        """Radius r with free area equal to target."""
        if target < 0.0:
            raise ValueError("target area must be nonnegative")
        if target == 0.0:
            return 0.0
        th = self.theta
        if not self.terms:
            return math.sqrt(target / th)
        full_at_star = th * self.r_star * self.r_star - self.blocked_star
        if target >= full_at_star:
            # Beyond the history everything is free.
            return math.sqrt((target + self.blocked_star) / th)

        def solve_on_current_rule():
            def f(r):
                return th * r * r - self._blocked(r) - target

            hi = self.r_star
            if f(hi) <= 0.0:
                return hi
            return brentq(f, 0.0, hi, xtol=1e-12, rtol=4.0 * np.finfo(float).eps)

        root = solve_on_current_rule()
        # Rebuild the rule at the root so the arc endpoints of every term
        # at the answer radius become panel boundaries, then re-solve; the
        # root stabilizes in a couple of rounds.
        for _ in range(4):
            prev = root
            self._build(max(root, 1e-300))
            root = solve_on_current_rule()
            if abs(root - prev) <= 1e-12 * (1.0 + root):
                break
        return root
