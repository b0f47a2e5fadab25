"""Closed-braid presentation of a traced link.

An axis plane A splits R^4 into A and its complement. A loop is a closed
braid about A when its projection to the complement winds monotonically
around the origin. The diagram coordinates of a point are its winding angle
theta and its two A-coordinates: the second one is the height drawn in the
annulus, the first one is the depth deciding which strand is on top.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from singlink.common import MAX_DOUBLINGS, NumericFailure, round_to_integer
from singlink.diskspec import BranchedDisk, givens
from singlink.tracer import TAU, SampledLoop, TraceMode, trace_link

logger = logging.getLogger(__name__)

MIN_AXIS_MARGIN = 1e-6
WINDING_TOL = 0.01
PROJECTION_TOL = 1e-9
TOL_CROSS = 1e-10
TOL_DEPTH = 1e-9
TOL_TRIPLE = 1e-9
DEPTH_RETRY_ANGLE = math.pi / 7


class ProjectionVanishes(NumericFailure):
    """The loop meets the axis plane"""


class NoCommonAxis(NumericFailure):
    """No candidate axis presents every loop as a closed braid"""


class NonIntegerWinding(NumericFailure):
    """The winding angle sum is not close to an integer"""


class NotABraid(NumericFailure):
    """The projection does not wind monotonically"""


class UnresolvedCrossing(NumericFailure):
    """A crossing could not be located or its strands have equal depth"""


class TriplePoint(NumericFailure):
    """Two crossings on one strand at the same angle"""


@dataclass(frozen=True, eq=False)
class AxisPlane:
    """Rows of ``complement_basis`` span the plane the loops wind in; rows of
    ``basis`` span the axis plane A. Together they are a positive frame."""

    complement_basis: np.ndarray
    basis: np.ndarray
    margin: float = 0.0
    name: str = "canonical"
    margins: tuple[float, ...] = ()

    @classmethod
    def canonical(cls) -> AxisPlane:
        e = np.eye(4)
        return cls(e[:2].copy(), e[2:].copy())

    def rotated(self, g: np.ndarray, name: str) -> AxisPlane:
        return AxisPlane(self.complement_basis @ g.T, self.basis @ g.T, name=name)

    def flipped(self) -> AxisPlane:
        flip = np.array([1.0, -1.0])[:, None]
        return replace(
            self,
            complement_basis=self.complement_basis * flip,
            basis=self.basis * flip,
            name=f"{self.name}~",
            margins=tuple(-m for m in self.margins),
        )

    def with_depth_rotation(self, angle: float) -> AxisPlane:
        c, s = math.cos(angle), math.sin(angle)
        b1, b2 = self.basis
        return replace(self, basis=np.stack([c * b1 + s * b2, -s * b1 + c * b2]))

    def frame(self) -> np.ndarray:
        return np.vstack([self.complement_basis, self.basis])

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return points @ self.complement_basis.T, points @ self.basis.T


def candidate_axes() -> list[AxisPlane]:
    """Canonical axis span(e3, e4) followed by a fixed list of rotations of it."""
    canonical = AxisPlane.canonical()
    axes = [canonical]
    fractions = range(3, 9)
    for i, j in itertools.combinations(range(4), 2):
        for k in fractions:
            axes.append(canonical.rotated(givens(i, j, math.pi / k), f"rot({i + 1},{j + 1},pi/{k})"))
    for (i1, j1), (i2, j2) in (((0, 2), (1, 3)), ((0, 3), (1, 2))):
        for k in fractions:
            g = givens(i1, j1, math.pi / k) @ givens(i2, j2, math.pi / k)
            name = f"rot({i1 + 1},{j1 + 1},pi/{k})*rot({i2 + 1},{j2 + 1},pi/{k})"
            axes.append(canonical.rotated(g, name))
    return axes


def braid_condition_margin(loop: SampledLoop, axis: AxisPlane) -> float:
    """Signed minimum of rho * theta' / |gamma'| over the loop, or 0.0 when
    the angular speed changes sign."""
    x, _ = axis.project(loop.points)
    v = loop.tangents @ axis.complement_basis.T
    rho = np.hypot(x[:, 0], x[:, 1])
    if rho.min() < PROJECTION_TOL * loop.epsilon:
        raise ProjectionVanishes(
            f"loop {loop.disk_label} meets the axis plane {axis.name}"
        )
    speed = np.linalg.norm(loop.tangents, axis=1)
    q = (x[:, 0] * v[:, 1] - x[:, 1] * v[:, 0]) / (rho * speed)
    if np.all(q > 0):
        return float(q.min())
    if np.all(q < 0):
        return float(q.max())
    return 0.0


def winding_number(loop: SampledLoop, axis: AxisPlane) -> int:
    x, _ = axis.project(loop.points)
    theta = np.arctan2(x[:, 1], x[:, 0])
    steps = np.diff(np.append(theta, theta[0]))
    steps = (steps + math.pi) % TAU - math.pi
    n, residual = round_to_integer(steps.sum() / TAU)
    if residual >= WINDING_TOL:
        raise NonIntegerWinding(
            f"loop {loop.disk_label}: winding {steps.sum() / TAU:.4f} about {axis.name}"
        )
    return n


def _signed_margins(loops: Sequence[SampledLoop], axis: AxisPlane) -> tuple[float, ...]:
    margins = []
    for loop in loops:
        try:
            margins.append(braid_condition_margin(loop, axis))
        except ProjectionVanishes:
            margins.append(0.0)
    return tuple(margins)


def _scored_candidates(loops: Sequence[SampledLoop]) -> list[AxisPlane]:
    accepted = []
    for axis in candidate_axes():
        margins = _signed_margins(loops, axis)
        score = min(abs(m) for m in margins)
        if score > MIN_AXIS_MARGIN:
            oriented = replace(axis, margin=score, margins=margins)
            accepted.append(oriented.flipped() if margins[0] < 0 else oriented)
    return accepted


def accepted_axes(loops: Sequence[SampledLoop]) -> list[AxisPlane]:
    """Every candidate axis passing the braid test, oriented so the first loop winds positively."""
    if not loops:
        raise NoCommonAxis("no loops given")
    return _scored_candidates(loops)


def choose_common_axis(loops: Sequence[SampledLoop]) -> AxisPlane:
    accepted = accepted_axes(loops)
    if not accepted:
        raise NoCommonAxis(
            "no candidate axis has nonzero margin for "
            + ", ".join(loop.disk_label for loop in loops)
        )
    # max() keeps the first of equal scores, so the canonical axis wins ties
    best = max(accepted, key=lambda a: a.margin)
    logger.debug(f"axis {best.name} chosen with margin {best.margin:.4g}")
    return best


# diagram


@dataclass(frozen=True)
class Crossing:
    over_component: int
    under_component: int
    t_over: float
    t_under: float
    sign: int
    position: tuple[float, float]
    depth_gap: float
    strands: tuple[int, int] = field(default=(0, 0), compare=False)
    order_key: float = field(default=0.0, compare=False)

    @property
    def components(self) -> tuple[int, int]:
        return self.over_component, self.under_component

    @property
    def is_self(self) -> bool:
        return self.over_component == self.under_component


@dataclass(frozen=True)
class Strand:
    component: int
    sheet: int


@dataclass(frozen=True, eq=False)
class BraidDiagram:
    loops: tuple[SampledLoop, ...]
    axis: AxisPlane
    windings: tuple[int, ...]
    strands: tuple[Strand, ...]
    initial_order: tuple[int, ...]
    orderings: tuple[tuple[int, ...], ...]
    crossings: tuple[Crossing, ...]
    word: tuple[int, ...]
    component_words: tuple[tuple[int, ...], ...]

    @property
    def strand_count(self) -> int:
        return len(self.strands)

    def braid_index(self, component: int) -> int:
        return abs(self.windings[component])


class _Lift:
    """One component unwrapped along theta, monotone increasing."""

    def __init__(self, loop: SampledLoop, axis: AxisPlane, winding: int):
        x, a = axis.project(loop.points)
        theta = np.unwrap(np.arctan2(x[:, 1], x[:, 0]))
        u = np.append(theta, theta[0] + TAU * winding)
        t = np.append(loop.t, TAU)
        if winding < 0:
            u, t = u[::-1], t[::-1]
        if not np.all(np.diff(u) > 0):
            raise NotABraid(f"loop {loop.disk_label}: angle is not monotone about {axis.name}")
        self.u = u
        self.t = t
        self.lo = float(u[0])
        self.span = TAU * abs(winding)
        self.base = TAU * math.floor(self.lo / TAU)
        self.sheets = abs(winding)

    def lift(self, g, sheet: int):
        u = self.base + np.asarray(g) + TAU * sheet
        return np.where(u < self.lo, u + self.span, u)

    def t_at(self, g, sheet: int):
        return np.interp(self.lift(g, sheet), self.u, self.t)


def _geometry(loop: SampledLoop, t: float) -> tuple[np.ndarray, np.ndarray]:
    if loop.disk is not None:
        return loop.geometry_at(t)
    tt = np.append(loop.t, TAU)
    t = t % TAU
    point = np.array([np.interp(t, tt, np.append(c, c[0])) for c in loop.points.T])
    tangent = np.array([np.interp(t, tt, np.append(c, c[0])) for c in loop.tangents.T])
    return point, tangent


def _diagram_coords(axis: AxisPlane, point, tangent):
    """theta, height, depth and their t-derivatives for one point."""
    x, a = axis.project(point)
    dx, da = axis.project(tangent)
    rho2 = x[0] ** 2 + x[1] ** 2
    theta = math.atan2(x[1], x[0])
    dtheta = (x[0] * dx[1] - x[1] * dx[0]) / rho2
    return theta, a[1], a[0], dtheta, da[1]


def _wrap(angle: float) -> float:
    return (angle + math.pi) % TAU - math.pi


def _refine(loop1, loop2, axis, t1, t2, epsilon):
    for _ in range(30):
        p1, v1 = _geometry(loop1, t1)
        p2, v2 = _geometry(loop2, t2)
        th1, h1, _, dth1, dh1 = _diagram_coords(axis, p1, v1)
        th2, h2, _, dth2, dh2 = _diagram_coords(axis, p2, v2)
        f = np.array([_wrap(th1 - th2), (h1 - h2) / epsilon])
        if np.all(np.abs(f) <= TOL_CROSS) or loop1.disk is None or loop2.disk is None:
            return t1 % TAU, t2 % TAU
        jac = np.array([[dth1, -dth2], [dh1 / epsilon, -dh2 / epsilon]])
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError as e:
            raise UnresolvedCrossing(f"singular crossing system near t=({t1:.6f}, {t2:.6f})") from e
        t1 -= step[0]
        t2 -= step[1]
    raise UnresolvedCrossing(f"crossing refinement did not converge near t=({t1:.6f}, {t2:.6f})")


def _locate_crossings(loops, axis, lifts, strands, grid):
    epsilon = loops[0].epsilon
    heights = [
        _heights(loops[s.component], axis, lifts[s.component].t_at(grid, s.sheet))
        for s in strands
    ]
    crossings = []
    for s1, s2 in itertools.combinations(range(len(strands)), 2):
        diff = heights[s1] - heights[s2]
        flips = np.flatnonzero(np.signbit(diff[:-1]) != np.signbit(diff[1:]))
        for i in flips:
            frac = diff[i] / (diff[i] - diff[i + 1]) if diff[i] != diff[i + 1] else 0.5
            g = grid[i] + frac * (grid[i + 1] - grid[i])
            a, b = strands[s1], strands[s2]
            la, lb = loops[a.component], loops[b.component]
            ta = float(lifts[a.component].t_at(g, a.sheet))
            tb = float(lifts[b.component].t_at(g, b.sheet))
            ta, tb = _refine(la, lb, axis, ta, tb, epsilon)
            crossings.append(_make_crossing(la, lb, a, b, s1, s2, ta, tb, axis, g, grid[i], grid[i + 1], epsilon))
    return crossings


def _heights(loop: SampledLoop, axis: AxisPlane, t: np.ndarray) -> np.ndarray:
    """Height at arbitrary parameters, interpolated periodically from the samples."""
    tt = np.append(loop.t, TAU)
    h = loop.points @ axis.basis[1]
    return np.interp(t % TAU, tt, np.append(h, h[0]))


def _make_crossing(la, lb, a, b, s1, s2, ta, tb, axis, g, g_lo, g_hi, epsilon) -> Crossing:
    pa, va = _geometry(la, ta)
    pb, vb = _geometry(lb, tb)
    tha, ha, da, dtha, dha = _diagram_coords(axis, pa, va)
    _, hb, db, dthb, dhb = _diagram_coords(axis, pb, vb)
    gap = abs(da - db)
    if gap < TOL_DEPTH * epsilon:
        raise UnresolvedCrossing(
            f"strands of {la.disk_label} and {lb.disk_label} have equal depth at theta={tha:.6f}"
        )
    if a.component == b.component and abs(_wrap(ta - tb)) < TOL_CROSS:
        raise UnresolvedCrossing(f"crossing of {la.disk_label} collapsed onto one point")
    # the smaller first A-coordinate is on top
    if da < db:
        over, under = (a, ta, dtha, dha, s1), (b, tb, dthb, dhb, s2)
    else:
        over, under = (b, tb, dthb, dhb, s2), (a, ta, dtha, dha, s1)
    det = over[2] * under[3] - over[3] * under[2]
    key = min(max(g + _wrap(tha - g), g_lo), g_hi)
    return Crossing(
        over_component=over[0].component,
        under_component=under[0].component,
        t_over=float(over[1]),
        t_under=float(under[1]),
        sign=1 if det > 0 else -1,
        position=(float(tha % TAU), float(ha)),
        depth_gap=float(gap),
        strands=(over[4], under[4]),
        order_key=float(key),
    )


def _check_triple_points(crossings: Sequence[Crossing]) -> None:
    for c1, c2 in itertools.combinations(crossings, 2):
        if set(c1.strands) & set(c2.strands) and abs(c1.order_key - c2.order_key) < TOL_TRIPLE:
            raise TriplePoint(f"two crossings meet at theta={c1.position[0]:.9f}")


def _word(crossings: Sequence[Crossing], order: list[int], keep) -> tuple[list[int], list[tuple[int, ...]]]:
    order = [s for s in order if keep(s)]
    letters, history = [], []
    for c in crossings:
        s1, s2 = c.strands
        if not (keep(s1) and keep(s2)):
            continue
        p1, p2 = order.index(s1), order.index(s2)
        if abs(p1 - p2) != 1:
            raise UnresolvedCrossing(
                f"crossing at theta={c.position[0]:.6f} joins strands that are not adjacent"
            )
        low = min(p1, p2)
        letters.append(c.sign * (low + 1))
        order[p1], order[p2] = order[p2], order[p1]
        history.append(tuple(order))
    return letters, history


def canonical_rotation(word: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically smallest cyclic rotation."""
    if not word:
        return ()
    return min(tuple(word[i:]) + tuple(word[:i]) for i in range(len(word)))


def _build(loops: Sequence[SampledLoop], axis: AxisPlane, grid_factor: int) -> BraidDiagram:
    windings = []
    for loop in loops:
        n = winding_number(loop, axis)
        if n == 0:
            raise NotABraid(f"loop {loop.disk_label} does not wind about {axis.name}")
        windings.append(n)
    lifts = [_Lift(loop, axis, n) for loop, n in zip(loops, windings)]
    strands = tuple(Strand(c, k) for c, lift in enumerate(lifts) for k in range(lift.sheets))
    m = grid_factor * max(loop.n_samples for loop in loops)
    grid = np.linspace(0.0, TAU, m + 1)

    crossings = _locate_crossings(loops, axis, lifts, strands, grid)
    crossings.sort(key=lambda c: (round(c.order_key, 9), round(c.position[1] / loops[0].epsilon, 9)))
    _check_triple_points(crossings)

    start_heights = []
    for s in strands:
        t0 = float(lifts[s.component].t_at(0.0, s.sheet))
        start_heights.append(float(_heights(loops[s.component], axis, np.array([t0]))[0]))
    initial = sorted(range(len(strands)), key=lambda s: start_heights[s])

    letters, history = _word(crossings, initial, lambda s: True)
    component_words = tuple(
        canonical_rotation(_word(crossings, initial, lambda s, c=c: strands[s].component == c)[0])
        for c in range(len(loops))
    )
    return BraidDiagram(
        loops=tuple(loops),
        axis=axis,
        windings=tuple(windings),
        strands=strands,
        initial_order=tuple(initial),
        orderings=tuple(history),
        crossings=tuple(crossings),
        word=canonical_rotation(letters),
        component_words=component_words,
    )


def build_diagram(loops: Sequence[SampledLoop], axis: AxisPlane, grid_factor: int = 4) -> BraidDiagram:
    """Annular diagram of the loops about ``axis``; on an unresolved crossing
    the depth direction is turned once inside A before giving up."""
    if not loops:
        raise NoCommonAxis("no loops given")
    try:
        return _build(loops, axis, grid_factor)
    except UnresolvedCrossing as e:
        logger.warning(f"{e}; turning the depth direction by pi/7")
        return _build(loops, axis.with_depth_rotation(DEPTH_RETRY_ANGLE), grid_factor)


def algebraic_crossing_number(diagram: BraidDiagram, component: int | None = None) -> int:
    """Signed count of the self-crossings of ``component``; all crossings if None."""
    if component is None:
        return sum(c.sign for c in diagram.crossings)
    return sum(c.sign for c in diagram.crossings if c.components == (component, component))


def mixed_crossing_number(diagram: BraidDiagram, i: int, j: int) -> int:
    if i == j:
        raise ValueError("mixed crossings need two different components")
    return sum(c.sign for c in diagram.crossings if set(c.components) == {i, j})


def braid_word(diagram: BraidDiagram) -> tuple[int, ...]:
    return diagram.word


def format_word(word: Sequence[int]) -> str:
    """``(1, 1, -2)`` -> ``"σ1 σ1 σ2^-1"``; the empty word renders as ``"1"``."""
    if not word:
        return "1"
    return " ".join(f"σ{abs(g)}" if g > 0 else f"σ{abs(g)}^-1" for g in word)


class ResolutionUnstable(NumericFailure):
    """Integer invariants keep changing as the sampling is refined"""


def diagram_signature(diagram: BraidDiagram) -> tuple:
    """Integers that must not change when the sampling is refined."""
    n = len(diagram.loops)
    return (
        diagram.windings,
        tuple(algebraic_crossing_number(diagram, c) for c in range(n)),
        tuple(mixed_crossing_number(diagram, i, j) for i in range(n) for j in range(i + 1, n)),
        diagram.component_words,
        diagram.word,
    )


def stable_diagram(
    disks: Sequence[BranchedDisk],
    epsilon: float,
    n_samples: int = 4096,
    tol: float = 1e-10,
    mode: TraceMode = "continuation",
    regular_radii: Sequence[float | None] | None = None,
) -> tuple[list[SampledLoop], BraidDiagram]:
    """Trace every disk and build the diagram, doubling the samples until two
    consecutive resolutions agree on every integer of the diagram."""
    radii = list(regular_radii) if regular_radii is not None else [None] * len(disks)
    axis = None
    previous = None
    n = n_samples
    for _ in range(MAX_DOUBLINGS + 1):
        loops = [trace_link(d, epsilon, n, tol, mode, R) for d, R in zip(disks, radii)]
        if axis is None:
            axis = choose_common_axis(loops)
        try:
            diagram = build_diagram(loops, axis)
        except (UnresolvedCrossing, TriplePoint) as e:
            logger.warning(f"{e}; doubling samples to {2 * n}")
            previous = None
            n *= 2
            continue
        signature = diagram_signature(diagram)
        if previous is not None and previous[0] == signature:
            return previous[1], previous[2]
        if previous is not None:
            logger.warning(f"diagram changed between {n // 2} and {n} samples")
        previous = (signature, loops, diagram)
        n *= 2
    raise ResolutionUnstable(
        f"diagram not stable up to {n // 2} samples for " + ", ".join(d.label for d in disks)
    )
