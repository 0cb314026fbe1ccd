"""Exact lazy simulation of directed cone navigations.

A navigation starts at the origin and repeatedly jumps to the nearest
point of a planar Poisson process inside the forward cone of half-angle
theta at the current vertex.  Conditional on everything seen so far, the
process is fresh outside the explored history region, so each step can be
sampled lazily by one of two equivalent constructions:

* ``sample_step_points`` generates candidate points of the fresh process
  sorted by distance and keeps the first one outside the history; it also
  returns the nearest point of the full cone and of the narrow cone of
  half-angle pi/2 - theta, which bracket the true step pathwise.
* ``sample_step_inversion`` draws the step radius by inverting the free
  area function (the conditional void exponent) at a standard exponential
  variate, then draws the angle uniformly by arc length on the free arcs.

Histories are maintained exactly as unions of cone-and-ball terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geom import (
    EMPTY_SLACK,
    AreaSolver,
    ConeApex,
    HistorySet,
    HistoryTerm,
    Point,
    PolarStep,
    _point_in_term,
    _term_empty,
    free_angular_set,
)
from .rng import DrawBuffer, as_buffer, stream

# Abort candidate generation once the probability of the remaining search
# region still being empty drops below exp(-_LOG_SURVIVAL_CAP) ~ 1e-300.
_LOG_SURVIVAL_CAP = 690.0


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Process intensity and cone half-angle of the navigation."""

    intensity: float
    theta: float

    def __post_init__(self):
        if not self.intensity > 0.0:
            raise ValueError("intensity must be positive")
        if not 0.0 < self.theta < 0.5 * math.pi:
            raise ValueError(
                "theta must lie strictly between 0 and pi/2; at pi/2 the "
                "forward cone degenerates to a half-plane and the nearest "
                "point laws lose their exponential tails"
            )


@dataclass(frozen=True, slots=True)
class StepRecord:
    """One step of a navigation path."""

    progress_cart: Point
    progress_polar: PolarStep
    history_empty_after: bool


@dataclass(frozen=True)
class PathSample:
    """A simulated path with its renewal structure.

    ``renewal_indices`` holds the 1-based step numbers n whose step left
    an empty history, so index n appears iff ``steps[n-1]`` has
    ``history_empty_after``.
    """

    params: ModelParams
    seed: int
    steps: tuple[StepRecord, ...]
    renewal_indices: tuple[int, ...]
    path_index: int = 0


# ---------------------------------------------------------------------------
# history maintenance


def _fold_raw(terms, pvx, pvy, r, phi, theta):
    """History update on raw term tuples for a step (r, phi) from v_prev.

    Intersects every existing term's cone with the cone at the new vertex,
    appends the ball of the probed disc around the previous vertex, and
    prunes terms with empty interior.  The new term's emptiness is decided
    from the step angle alone: the ball around v_prev reaches into the new
    cone iff |phi| > pi/2 - theta.  The distance from v_prev to that cone
    equals exactly r otherwise, and testing the angle instead avoids the
    cancellation-prone distance-versus-radius comparison at far-out
    vertices.
    """
    wx = pvx + r * math.cos(phi)
    wy = pvy + r * math.sin(phi)
    t = math.tan(theta)
    cp_new = wy - t * wx
    cm_new = wy + t * wx
    out = []
    for ax, ay, cx, cy, rad in terms:
        cp = ay - t * ax
        if cp_new < cp:
            cp = cp_new
        cm = ay + t * ax
        if cm_new > cm:
            cm = cm_new
        nax = (cm - cp) / (2.0 * t)
        nay = 0.5 * (cp + cm)
        if not _term_empty(nax, nay, cx, cy, rad, theta):
            out.append((nax, nay, cx, cy, rad))
    if abs(phi) > 0.5 * math.pi - theta:
        out.append((wx, wy, pvx, pvy, r))
    return out


def _terms_of(history: HistorySet):
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


def _history_from_raw(raw, vx, vy) -> HistorySet:
    return HistorySet(
        tuple(
            HistoryTerm(ConeApex(Point(ax, ay)), Point(cx, cy), rad)
            for ax, ay, cx, cy, rad in raw
        ),
        Point(vx, vy),
    )


def update_history(
    history: HistorySet, v_prev: Point, step: StepRecord, params: ModelParams
) -> HistorySet:
    """History after taking ``step`` from ``v_prev``."""
    if (history.reference_vertex.x, history.reference_vertex.y) != (v_prev.x, v_prev.y):
        raise ValueError("history is not anchored at v_prev")
    r = step.progress_polar.r
    phi = step.progress_polar.phi
    raw = _fold_raw(_terms_of(history), v_prev.x, v_prev.y, r, phi, params.theta)
    wx = v_prev.x + r * math.cos(phi)
    wy = v_prev.y + r * math.sin(phi)
    return _history_from_raw(raw, wx, wy)


def is_history_empty(history: HistorySet) -> bool:
    """Whether the history region is empty (a renewal state)."""
    return not history.terms


# ---------------------------------------------------------------------------
# step samplers


def _points_candidates(vx, vy, terms, intensity, theta, buf):
    """Scan fresh-process points of the forward cone in radius order.

    Returns ((r, phi) of the nearest cone point, of the nearest
    narrow-cone point, of the nearest free point).  For theta <= pi/4 the
    narrow entry equals the other two.
    """
    lam_full = intensity * theta
    narrow = 0.5 * math.pi - theta
    want_narrow = theta > 0.25 * math.pi
    guard = intensity * (narrow if want_narrow else theta)
    cap_rsq = _LOG_SURVIVAL_CAP / guard
    rsq = 0.0
    under = over = free = None
    while True:
        rsq += buf.exp() / lam_full
        if rsq > cap_rsq:
            raise RuntimeError(
                "candidate scan exceeded the survival-probability cap; "
                "this signals a broken random stream"
            )
        r = math.sqrt(rsq)
        phi = (2.0 * buf.unif() - 1.0) * theta
        if under is None:
            under = (r, phi)
        if want_narrow and over is None and abs(phi) <= narrow:
            over = (r, phi)
        if free is None:
            px = vx + r * math.cos(phi)
            py = vy + r * math.sin(phi)
            hit = False
            for ax, ay, cx, cy, rad in terms:
                if _point_in_term(px, py, ax, ay, cx, cy, rad, theta):
                    hit = True
                    break
            if not hit:
                free = (r, phi)
        if free is not None and (over is not None or not want_narrow):
            break
    if not want_narrow:
        under = over = free
    return under, over, free


def _empty_after(terms, vx, vy, r, phi, theta):
    """Whether the history becomes empty after stepping (r, phi) from v."""
    return not _fold_raw(terms, vx, vy, r, phi, theta)


def _record(vx, vy, r, phi, terms, theta) -> StepRecord:
    return StepRecord(
        Point(r * math.cos(phi), r * math.sin(phi)),
        PolarStep(r, phi),
        _empty_after(terms, vx, vy, r, phi, theta),
    )


def sample_step_points(
    v: Point, history: HistorySet, params: ModelParams, rng
) -> tuple[StepRecord, PolarStep, PolarStep]:
    """One navigation step with its bracketing pair.

    Generates one fresh Poisson realization on the forward cone at v in
    radius order; the first point overall is the lower bracket, the first
    point of the narrow cone the upper bracket, and the first point
    outside the history region the true step.  Pathwise
    under.r <= step.r <= over.r, and whenever the lower bracket's angle
    lies within [theta - pi/2, pi/2 - theta] all three coincide exactly.
    Ties among candidate points have probability zero and fall to the
    earlier point in radius order.
    """
    buf = as_buffer(rng)
    terms = _terms_of(history)
    under, over, free = _points_candidates(
        v.x, v.y, terms, params.intensity, params.theta, buf
    )
    rec = _record(v.x, v.y, free[0], free[1], terms, params.theta)
    return rec, PolarStep(*under), PolarStep(*over)


def sample_step_inversion(
    v: Point, history: HistorySet, params: ModelParams, rng
) -> StepRecord:
    """One navigation step by inverting the free-area law.

    The radius solves intensity * free_area(r) = E with E standard
    exponential (so with empty history the law is exactly
    P(R > r) = exp(-intensity * theta * r^2)); the angle is then uniform
    by arc length on the free directions at that radius.
    """
    buf = as_buffer(rng)
    terms = _terms_of(history)
    e = buf.exp()
    u = buf.unif()
    theta = params.theta
    if not terms:
        r = math.sqrt(e / (params.intensity * theta))
        phi = (2.0 * u - 1.0) * theta
    else:
        solver = AreaSolver(v, history, theta)
        r = solver.invert(e / params.intensity)
        arcs = free_angular_set(v, r, history, theta)
        total = arcs.measure
        if not total > 0.0:
            raise RuntimeError(
                "free angular set at the solved radius has zero measure; "
                "this signals a geometry bug"
            )
        pos = u * total
        phi = None
        for a, b in arcs.intervals:
            width = b - a
            if pos <= width:
                phi = a + pos
                break
            pos -= width
        if phi is None:
            phi = arcs.intervals[-1][1]
    rec = _record(v.x, v.y, r, phi, terms, theta)
    return rec


# ---------------------------------------------------------------------------
# whole-path simulation


class PathEngine:
    """Streaming simulation state for one path.

    Keeps raw term tuples, float coordinates, and cached trigonometry so
    tight loops avoid value-object churn; ``simulate_path`` wraps the
    results into records.  The candidate scan and the history fold mirror
    the public per-step functions operation for operation, which a test
    pins down by replaying a path through the public interface.
    """

    __slots__ = (
        "intensity",
        "theta",
        "sin_t",
        "cos_t",
        "tan_t",
        "lam_full",
        "narrow",
        "want_narrow",
        "cap_rsq",
        "vx",
        "vy",
        "terms",
        "buf",
        "n",
        "cum_x",
    )

    def __init__(self, params: ModelParams, buf: DrawBuffer):
        th = params.theta
        self.intensity = params.intensity
        self.theta = th
        self.sin_t = math.sin(th)
        self.cos_t = math.cos(th)
        self.tan_t = math.tan(th)
        self.lam_full = params.intensity * th
        self.narrow = 0.5 * math.pi - th
        self.want_narrow = th > 0.25 * math.pi
        guard = params.intensity * (self.narrow if self.want_narrow else th)
        self.cap_rsq = _LOG_SURVIVAL_CAP / guard
        self.vx = 0.0
        self.vy = 0.0
        self.terms = []
        self.buf = buf
        self.n = 0
        self.cum_x = 0.0

    def _scan(self):
        """Candidate scan; returns ((r,phi) under, over, free)."""
        exp = self.buf.exp
        unif = self.buf.unif
        sqrt = math.sqrt
        cos = math.cos
        sin = math.sin
        terms = self.terms
        theta = self.theta
        sin_t = self.sin_t
        cos_t = self.cos_t
        vx = self.vx
        vy = self.vy
        lam = self.lam_full
        cap = self.cap_rsq
        narrow = self.narrow
        want_narrow = self.want_narrow
        rsq = 0.0
        under = over = free = None
        while True:
            rsq += exp() / lam
            if rsq > cap:
                raise RuntimeError(
                    "candidate scan exceeded the survival-probability cap; "
                    "this signals a broken random stream"
                )
            r = sqrt(rsq)
            phi = (2.0 * unif() - 1.0) * theta
            if under is None:
                under = (r, phi)
            if want_narrow and over is None and abs(phi) <= narrow:
                over = (r, phi)
            if free is None:
                px = vx + r * cos(phi)
                py = vy + r * sin(phi)
                hit = False
                for ax, ay, cx, cy, rad in terms:
                    dy = py - ay
                    if dy < 0.0:
                        dy = -dy
                    if sin_t * (px - ax) >= cos_t * dy:
                        ex = px - cx
                        ey = py - cy
                        if ex * ex + ey * ey < rad * rad:
                            hit = True
                            break
                if not hit:
                    free = (r, phi)
            if free is not None and (over is not None or not want_narrow):
                break
        if not want_narrow:
            under = over = free
        return under, over, free

    def step_coupled(self):
        """Advance one step; return (r, phi, empty_after, under, over)."""
        under, over, free = self._scan()
        r, phi = free
        self._advance(r, phi)
        return r, phi, not self.terms, under, over

    def step(self):
        """Advance one step; return (r, phi, empty_after)."""
        _, _, free = self._scan()
        r, phi = free
        self._advance(r, phi)
        return r, phi, not self.terms

    def step_inversion(self):
        """Advance one step with the inversion sampler."""
        e = self.buf.exp()
        u = self.buf.unif()
        theta = self.theta
        if not self.terms:
            r = math.sqrt(e / (self.intensity * theta))
            phi = (2.0 * u - 1.0) * theta
        else:
            origin = Point(self.vx, self.vy)
            hist = _history_from_raw(self.terms, self.vx, self.vy)
            solver = AreaSolver(origin, hist, theta)
            r = solver.invert(e / self.intensity)
            arcs = free_angular_set(origin, r, hist, theta)
            total = arcs.measure
            if not total > 0.0:
                raise RuntimeError("zero free arc measure at solved radius")
            pos = u * total
            phi = arcs.intervals[-1][1]
            for a, b in arcs.intervals:
                width = b - a
                if pos <= width:
                    phi = a + pos
                    break
                pos -= width
        self._advance(r, phi)
        return r, phi, not self.terms

    def _advance(self, r, phi):
        wx = self.vx + r * math.cos(phi)
        wy = self.vy + r * math.sin(phi)
        t = self.tan_t
        sin_t = self.sin_t
        cos_t = self.cos_t
        slack = 1.0 - EMPTY_SLACK
        cp_new = wy - t * wx
        cm_new = wy + t * wx
        out = []
        for ax, ay, cx, cy, rad in self.terms:
            cp = ay - t * ax
            if cp_new < cp:
                cp = cp_new
            cm = ay + t * ax
            if cm_new > cm:
                cm = cm_new
            nax = (cm - cp) / (2.0 * t)
            nay = 0.5 * (cp + cm)
            dx = cx - nax
            ady = cy - nay
            if ady < 0.0:
                ady = -ady
            cross = ady * cos_t - dx * sin_t
            if cross <= 0.0:
                out.append((nax, nay, cx, cy, rad))
                continue
            d2 = cross * cross
            if dx * cos_t + ady * sin_t <= 0.0:
                d2 = dx * dx + ady * ady
            if d2 < rad * rad * slack:
                out.append((nax, nay, cx, cy, rad))
        if abs(phi) > self.narrow:
            out.append((wx, wy, self.vx, self.vy, r))
        self.terms = out
        self.vx = wx
        self.vy = wy
        self.n += 1
        self.cum_x = wx


def _parse_horizon(horizon, steps, time):
    if horizon is not None:
        if steps is not None or time is not None:
            raise ValueError("pass either a horizon mapping or keywords, not both")
        if set(horizon) == {"steps"}:
            steps = horizon["steps"]
        elif set(horizon) == {"time"}:
            time = horizon["time"]
        else:
            raise ValueError("horizon must be {'steps': n} or {'time': t}")
    if (steps is None) == (time is None):
        raise ValueError("exactly one of steps/time is required")
    if steps is not None and not steps >= 1:
        raise ValueError("steps horizon must be at least 1")
    if time is not None and not time > 0.0:
        raise ValueError("time horizon must be positive")
    return steps, time


def simulate_path(
    params: ModelParams,
    horizon=None,
    seed: int = 0,
    sampler: str = "points",
    *,
    steps: int | None = None,
    time: float | None = None,
    path_index: int = 0,
) -> PathSample:
    """Simulate one path from the origin.

    The horizon is either a fixed number of steps or a horizontal time t;
    with a time horizon the path includes the step that crosses t.  Given
    (seed, path_index) the result is bit-identical across runs.
    """
    n_steps, t_limit = _parse_horizon(horizon, steps, time)
    if sampler not in ("points", "inversion"):
        raise ValueError("sampler must be 'points' or 'inversion'")
    eng = PathEngine(params, DrawBuffer(stream(seed, path_index)))
    advance = eng.step if sampler == "points" else eng.step_inversion
    records = []
    renewals = []
    while True:
        r, phi, empty = advance()
        records.append(
            StepRecord(
                Point(r * math.cos(phi), r * math.sin(phi)),
                PolarStep(r, phi),
                empty,
            )
        )
        if empty:
            renewals.append(eng.n)
        if n_steps is not None:
            if eng.n >= n_steps:
                break
        elif eng.cum_x >= t_limit:
            break
    return PathSample(params, seed, tuple(records), tuple(renewals), path_index)


# ---------------------------------------------------------------------------
# trajectory queries


def vertical_displacement(path: PathSample, t: float) -> float:
    """Height of the piecewise-linear trajectory at horizontal position t."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    cum_x = 0.0
    cum_y = 0.0
    for rec in path.steps:
        nx = cum_x + rec.progress_cart.x
        if t <= nx:
            frac = (t - cum_x) / rec.progress_cart.x
            return cum_y + frac * rec.progress_cart.y
        cum_x = nx
        cum_y += rec.progress_cart.y
    raise ValueError("t lies beyond the simulated horizon")


def steps_before(path: PathSample, t: float) -> int:
    """Number of whole steps strictly before horizontal position t."""
    if not t > 0.0:
        raise ValueError("t must be positive")
    cum_x = 0.0
    count = 0
    for rec in path.steps:
        cum_x += rec.progress_cart.x
        if cum_x < t:
            count += 1
        else:
            return count
    raise ValueError("t lies beyond the simulated horizon")
