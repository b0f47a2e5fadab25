"""Integer invariants of the link and the degree formulas built on them.

Linking numbers are computed from the Gauss double integral after a
stereographic projection of the epsilon-sphere to R^3. The crossing number
of a component is also obtained as the linking number of the component with
its push-off along the normal projection of a constant vector, which gives
a second route to the diagram count.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from singlink.common import InputError, NumericFailure, round_to_integer
from singlink.diskspec import BranchedDisk
from singlink.tracer import SampledLoop

logger = logging.getLogger(__name__)

LINKING_TOL = 0.05
POLE_CLEARANCE = 0.05
PUSHOFF_FRACTION = 0.01
FRAMING_TOL = 1e-8


class PoleTooClose(NumericFailure):
    """Every candidate projection pole lies near a loop"""


class NonIntegerLinking(NumericFailure):
    """The Gauss integral is not close to an integer"""


class FramingDegenerate(NumericFailure):
    """The push-off direction is tangent to the surface somewhere on the link"""


class PushoffUnstable(NumericFailure):
    """Halving the push-off distance changes the linking number"""


class ParityError(InputError):
    """An integer that must be even is odd"""


# stereographic projection


def candidate_poles() -> np.ndarray:
    """The 24 unit vectors +-e_i and (+-1, +-1, +-1, +-1)/2, in a fixed order."""
    axes = np.vstack([np.eye(4), -np.eye(4)])
    signs = np.array(np.meshgrid(*[[1.0, -1.0]] * 4, indexing="ij")).reshape(4, -1).T
    return np.vstack([axes, signs / 2])


def choose_pole(point_sets: Sequence[np.ndarray], radius: float) -> np.ndarray:
    """Candidate pole farthest from all given points on the sphere."""
    best, best_distance = None, -1.0
    for direction in candidate_poles():
        pole = radius * direction
        distance = min(np.min(np.linalg.norm(p - pole, axis=1)) for p in point_sets)
        if distance > best_distance:
            best, best_distance = direction, distance
    if best_distance < POLE_CLEARANCE * radius:
        raise PoleTooClose(f"best pole is {best_distance / radius:.3g} epsilon from the link")
    return best


def _hyperplane_basis(direction: np.ndarray) -> np.ndarray:
    """Rows u1, u2, u3 spanning direction^perp with det[-n, u1, u2, u3] = +1."""
    _, _, vt = np.linalg.svd(direction[None, :])
    basis = vt[1:].copy()
    if np.linalg.det(np.vstack([-direction, basis])) < 0:
        basis[2] *= -1
    return basis


def stereographic_projection(points: np.ndarray, pole: np.ndarray, radius: float) -> np.ndarray:
    """Orientation-preserving projection of the radius sphere minus ``radius * pole`` onto R^3."""
    pole = pole / np.linalg.norm(pole)
    basis = _hyperplane_basis(pole)
    height = points @ pole
    return radius * (points @ basis.T) / (radius - height)[:, None]


# Gauss integral


def gauss_linking_integral(curve1: np.ndarray, curve2: np.ndarray, chunk: int = 128) -> float:
    """Midpoint-rule Gauss integral of two closed polygons in R^3."""
    d1 = np.roll(curve1, -1, axis=0) - curve1
    d2 = np.roll(curve2, -1, axis=0) - curve2
    m1 = curve1 + d1 / 2
    m2 = curve2 + d2 / 2
    partial = []
    for start in range(0, len(m1), chunk):
        sep = m1[start : start + chunk, None, :] - m2[None, :, :]
        cross = np.cross(d1[start : start + chunk, None, :], d2[None, :, :])
        num = np.einsum("ijk,ijk->ij", sep, cross)
        den = np.linalg.norm(sep, axis=2) ** 3
        partial.append(np.sum(num / den))
    return float(np.sum(partial) / (4 * np.pi))


def _linking_of_points(p1, p2, radius: float, pole=None) -> tuple[int, float]:
    if pole is None:
        pole = choose_pole([p1, p2], radius)
    value = gauss_linking_integral(
        stereographic_projection(p1, pole, radius), stereographic_projection(p2, pole, radius)
    )
    return round_to_integer(value)


def gauss_linking(loop1: SampledLoop, loop2: SampledLoop, pole: np.ndarray | None = None) -> int:
    if not np.isclose(loop1.epsilon, loop2.epsilon, rtol=1e-9, atol=0):
        raise InputError(
            f"loops {loop1.disk_label} and {loop2.disk_label} lie on different spheres"
        )
    lk, residual = _linking_of_points(loop1.points, loop2.points, loop1.epsilon, pole)
    if residual < LINKING_TOL:
        return lk
    if loop1.disk is None or loop2.disk is None:
        raise NonIntegerLinking(
            f"lk({loop1.disk_label}, {loop2.disk_label}) is {residual:.3f} from an integer"
        )
    logger.warning(
        f"lk({loop1.disk_label}, {loop2.disk_label}) off by {residual:.3f}, doubling samples"
    )
    fine1 = loop1.resampled(2 * loop1.n_samples)
    fine2 = loop2.resampled(2 * loop2.n_samples)
    lk, residual = _linking_of_points(fine1.points, fine2.points, loop1.epsilon, pole)
    if residual >= LINKING_TOL:
        raise NonIntegerLinking(
            f"lk({loop1.disk_label}, {loop2.disk_label}) is {residual:.3f} from an integer"
        )
    return lk


def linking_matrix(loops: Sequence[SampledLoop]) -> list[list[int]]:
    n = len(loops)
    lk = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            lk[i][j] = lk[j][i] = gauss_linking(loops[i], loops[j])
    return lk


# push-off


def normal_pushoff(loop: SampledLoop, disk: BranchedDisk, delta: float) -> np.ndarray:
    """Points of K + delta * X_N moved back onto the sphere, X = frame * e3."""
    dx, dy = disk.derivatives(loop.z)
    q1 = dx / np.linalg.norm(dx, axis=1)[:, None]
    q2 = dy - np.sum(dy * q1, axis=1)[:, None] * q1
    q2 /= np.linalg.norm(q2, axis=1)[:, None]
    x = disk.frame_matrix[:, 2]
    x_normal = x - (q1 @ x)[:, None] * q1 - (q2 @ x)[:, None] * q2
    smallest = np.linalg.norm(x_normal, axis=1).min()
    if smallest < FRAMING_TOL:
        raise FramingDegenerate(f"disk {disk.label}: push-off direction tangent to the surface")
    shifted = loop.points + delta * x_normal
    return loop.epsilon * shifted / np.linalg.norm(shifted, axis=1)[:, None]


def pushoff_crossing_number(loop: SampledLoop, disk: BranchedDisk | None = None) -> int:
    """Linking number of the loop with its normal push-off."""
    disk = disk or loop.disk
    if disk is None:
        raise InputError(f"loop {loop.disk_label} has no disk to push off along")
    delta = PUSHOFF_FRACTION * loop.epsilon

    def attempts():
        yield loop
        if loop.disk is not None:
            yield loop.resampled(2 * loop.n_samples)

    worst = 0.0
    for current in attempts():
        values = []
        for d in (delta, delta / 2):
            lk, residual = _linking_of_points(current.points, normal_pushoff(current, disk, d), current.epsilon)
            worst = max(worst, residual)
            values.append((lk, residual))
        if all(res < LINKING_TOL for _, res in values):
            if values[0][0] != values[1][0]:
                raise PushoffUnstable(
                    f"disk {disk.label}: push-off linking {values[0][0]} at delta, {values[1][0]} at delta/2"
                )
            return values[0][0]
        logger.warning(f"disk {disk.label}: push-off linking off by {worst:.3f}, doubling samples")
    raise NonIntegerLinking(f"disk {disk.label}: push-off linking is {worst:.3f} from an integer")


# formulas


def singularity_E(e_list: Sequence[int], lk: Sequence[Sequence[int]]) -> int:
    """Sum of crossing numbers plus twice the pairwise linking numbers."""
    n = len(e_list)
    return sum(e_list) + 2 * sum(lk[i][j] for i in range(n) for j in range(i + 1, n))


def tangent_degree(chi: int, branching_orders: Sequence[int]) -> int:
    return chi + sum(branching_orders)


def normal_degree_immersed(selfint: int, double_points: int) -> int:
    return selfint - 2 * double_points


def normal_degree_thm1(selfint: int, E_list: Sequence[int]) -> int:
    return selfint - sum(E_list)


def normal_degree_branched(selfint: int, double_points: int, e_list: Sequence[int]) -> int:
    """Normal degree when every branch point is a single disk with crossing number e."""
    return selfint - 2 * double_points - sum(e_list)


def smoothing_double_points(e: int, N: int) -> int:
    """Signed number of transverse double points left by smoothing one branched disk."""
    excess = e - (N - 1)
    if excess % 2:
        raise ParityError(f"e - (N - 1) = {excess} is odd")
    return excess // 2


# report


@dataclass
class ComponentInvariants:
    label: str
    N: int
    braid_index: int
    winding_sign: int
    e: int
    e_pushoff: int
    braid_word: tuple[int, ...]
    braid_margin: float = 0.0
    transversality_margin: float = 0.0

    @property
    def sl_paper(self) -> int:
        return self.braid_index - self.e

    @property
    def sl_std(self) -> int:
        return self.e - self.braid_index


@dataclass
class CrossCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class InvariantReport:
    epsilon: float
    components: list[ComponentInvariants]
    lk: list[list[int]]
    E: int
    axis: str = "canonical"
    formulas: dict[str, int | None] = field(default_factory=dict)
    cross_checks: list[CrossCheck] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def recomputed_E(self) -> int:
        return singularity_E([c.e for c in self.components], self.lk)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cross_checks)

    def integers(self) -> dict:
        """Every integer invariant, for comparisons across runs."""
        return {
            "components": [
                (c.N, c.braid_index, c.winding_sign, c.e, c.e_pushoff, c.braid_word)
                for c in self.components
            ],
            "lk": self.lk,
            "E": self.E,
        }

    def cross_check_dicts(self) -> list[dict]:
        return [asdict(c) for c in self.cross_checks]
