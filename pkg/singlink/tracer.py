"""Link of a branched disk on the sphere of radius epsilon.

For every angle t the radius r(t) solving ||f(r e^{it})||^2 = epsilon^2 is
found by Newton's method; inside the radially regular disk the solution is
unique and t -> f(r(t) e^{it}) parametrizes the link with the orientation
inherited from the disk.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from singlink.common import MAX_NEWTON_ITER, InputError, NumericFailure
from singlink.diskspec import BranchedDisk, validate_disk

logger = logging.getLogger(__name__)

TAU = 2 * math.pi
NEWTON_TOL = 1e-13
CLOSE_TOL = 1e-8
TraceMode = Literal["continuation", "multiseed"]


class NoRegularRadius(NumericFailure):
    """Radial regularity fails at every tested scale"""


class NewtonDivergence(NumericFailure):
    """The radius equation could not be solved at some angle"""

    def __init__(self, t: float, detail: str = ""):
        self.t = t
        super().__init__(f"radius solve failed at t={t:.9f}" + (f": {detail}" if detail else ""))


class LoopNotClosed(NumericFailure):
    """Continuation around the circle does not return to its start"""


class SphereToleranceExceeded(NumericFailure):
    """Sampled points are off the sphere"""


class DegenerateTangent(NumericFailure):
    """The traced curve has a vanishing tangent"""


class EpsilonTooLarge(InputError):
    """The sphere cuts the disk outside its radially regular part"""


def _radial_terms(disk: BranchedDisk, t, r):
    """Values, r- and t-derivatives of (w1, w2) at z = r e^{it}."""
    e = np.exp(1j * np.asarray(t, dtype=float))
    z = r * e
    w1, w2 = disk.complex_values(z)
    a, b, c, d = disk.wirtinger_values(z)
    eb = np.conj(e)
    zb = np.conj(z)
    dr = (e * a + eb * b, e * c + eb * d)
    dt = (1j * (z * a - zb * b), 1j * (z * c - zb * d))
    return (w1, w2), dr, dt


def _residual(disk: BranchedDisk, t, r, epsilon: float):
    (w1, w2), (r1, r2), _ = _radial_terms(disk, t, r)
    g = np.abs(w1) ** 2 + np.abs(w2) ** 2 - epsilon**2
    g_r = 2 * np.real(np.conj(w1) * r1 + np.conj(w2) * r2)
    return g, g_r


def solve_radius(
    disk: BranchedDisk, t: float, epsilon: float, r_seed: float, tol: float = NEWTON_TOL
) -> float:
    """Radius r > 0 with ||f(r e^{it})|| = epsilon, Newton then bisection."""
    target = tol * epsilon**2
    r = r_seed
    for _ in range(MAX_NEWTON_ITER):
        g, g_r = _residual(disk, t, r, epsilon)
        if abs(g) <= target:
            return float(r)
        if not g_r > 0:
            break
        r_next = r - g / g_r
        if not r_next > 0:
            break
        r = r_next
    logger.debug(f"Newton stalled at t={t:.6f}, bisecting around r={r_seed:.6g}")
    return _bisect(disk, t, epsilon, r_seed / 2, 2 * r_seed, target)


def _bisect(disk, t, epsilon, lo, hi, target) -> float:
    g_lo, _ = _residual(disk, t, lo, epsilon)
    g_hi, _ = _residual(disk, t, hi, epsilon)
    if not (g_lo < 0 < g_hi):
        raise NewtonDivergence(t, f"no sign change on [{lo:.6g}, {hi:.6g}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g, _ = _residual(disk, t, mid, epsilon)
        if abs(g) <= target or hi - lo <= 4 * np.spacing(hi):
            return float(mid)
        if g < 0:
            lo = mid
        else:
            hi = mid
    raise NewtonDivergence(t, "bisection did not converge")


def _solve_radii_vectorized(disk, t: np.ndarray, epsilon: float, seed: float) -> np.ndarray:
    target = NEWTON_TOL * epsilon**2
    r = np.full(t.shape, seed)
    done = np.zeros(t.shape, dtype=bool)
    for _ in range(MAX_NEWTON_ITER):
        g, g_r = _residual(disk, t, r, epsilon)
        done |= np.abs(g) <= target
        if done.all():
            break
        step = np.where(done | ~(g_r > 0), 0.0, g / np.where(g_r > 0, g_r, 1.0))
        r = np.where(r - step > 0, r - step, r)
    g, _ = _residual(disk, t, r, epsilon)
    for idx in np.flatnonzero(np.abs(g) > target):
        r[idx] = solve_radius(disk, float(t[idx]), epsilon, seed)
    return r


def loop_geometry(disk: BranchedDisk, t, r) -> tuple[np.ndarray, np.ndarray]:
    """Points and tangents of t -> f(r(t) e^{it}) with r' from the implicit equation."""
    (w1, w2), (r1, r2), (t1, t2) = _radial_terms(disk, t, r)
    g_r = 2 * np.real(np.conj(w1) * r1 + np.conj(w2) * r2)
    g_t = 2 * np.real(np.conj(w1) * t1 + np.conj(w2) * t2)
    r_prime = -g_t / g_r
    points = disk.to_real(w1, w2)
    tangents = disk.to_real(r1 * r_prime + t1, r2 * r_prime + t2)
    return points, tangents


@dataclass(frozen=True, eq=False)
class SampledLoop:
    """One link component sampled on a uniform grid in t."""

    epsilon: float
    t: np.ndarray
    r: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    disk_label: str
    orientation: int = 1
    disk: BranchedDisk | None = None
    tol: float = 1e-10

    @property
    def n_samples(self) -> int:
        return len(self.t)

    @property
    def z(self) -> np.ndarray:
        return self.r * np.exp(1j * self.t)

    def sphere_residual(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.points, axis=1) - self.epsilon)))

    def _radius_at(self, t: float) -> float:
        if self.disk is None:
            raise ValueError(f"loop {self.disk_label} has no disk to re-evaluate")
        t = float(t) % TAU
        seed = float(np.interp(t, np.append(self.t, TAU), np.append(self.r, self.r[0])))
        return solve_radius(self.disk, t, self.epsilon, seed)

    def point_at(self, t: float) -> np.ndarray:
        r = self._radius_at(t)
        return loop_geometry(self.disk, t, r)[0]

    def tangent_at(self, t: float) -> np.ndarray:
        r = self._radius_at(t)
        return loop_geometry(self.disk, t, r)[1]

    def geometry_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        r = self._radius_at(t)
        return loop_geometry(self.disk, t, r)

    def resampled(self, n_samples: int) -> SampledLoop:
        if self.disk is None:
            raise ValueError(f"loop {self.disk_label} has no disk to resample")
        return trace_link(self.disk, self.epsilon, n_samples, self.tol)

    def to_dict(self) -> dict:
        return {
            "label": self.disk_label,
            "epsilon": self.epsilon,
            "orientation": self.orientation,
            "t": self.t.tolist(),
            "r": self.r.tolist(),
            "points": self.points.tolist(),
            "tangents": self.tangents.tolist(),
        }


def trace_link(
    disk: BranchedDisk,
    epsilon: float,
    n_samples: int = 4096,
    tol: float = 1e-10,
    mode: TraceMode = "continuation",
    regular_radius: float | None = None,
) -> SampledLoop:
    if not epsilon > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if n_samples < 256:
        raise InputError(f"at least 256 samples are needed, got {n_samples}")
    N = validate_disk(disk).N
    lead = disk.w1.coefficient(N, 0).real
    seed = (epsilon / lead) ** (1.0 / N)
    t = TAU * np.arange(n_samples) / n_samples

    if mode == "continuation":
        r = np.empty(n_samples)
        previous = seed
        for idx, ti in enumerate(t):
            previous = solve_radius(disk, float(ti), epsilon, previous)
            r[idx] = previous
            logger.trace(f"{disk.label}: t={ti:.6f} r={previous:.15g}")
    elif mode == "multiseed":
        r = _solve_radii_vectorized(disk, t, epsilon, seed)
    else:
        raise InputError(f"unknown trace mode {mode!r}")

    closing = solve_radius(disk, TAU, epsilon, float(r[-1]))
    if abs(closing - r[0]) > CLOSE_TOL * r[0]:
        raise LoopNotClosed(
            f"disk {disk.label}: r(2pi)={closing:.15g} but r(0)={r[0]:.15g}"
        )
    if regular_radius is not None and r.max() >= regular_radius:
        raise EpsilonTooLarge(
            f"disk {disk.label}: epsilon={epsilon:g} reaches |z|={r.max():.4g}, "
            f"beyond the regular radius {regular_radius:.4g}"
        )

    points, tangents = loop_geometry(disk, t, r)
    loop = SampledLoop(epsilon, t, r, points, tangents, disk.label, 1, disk, tol)
    residual = loop.sphere_residual()
    if residual > tol * epsilon:
        raise SphereToleranceExceeded(
            f"disk {disk.label}: max | |p| - epsilon | = {residual:.3g}"
        )
    if np.min(np.linalg.norm(tangents, axis=1)) <= 1e-14 * epsilon:
        raise DegenerateTangent(f"disk {disk.label}: tangent vanishes on the link")
    logger.debug(
        f"traced {disk.label}: {n_samples} samples, r in [{r.min():.6g}, {r.max():.6g}], "
        f"sphere residual {residual:.2e}"
    )
    return loop


def radial_regularity_radius(
    disk: BranchedDisk, search_max: float = 1.0, n_radii: int = 81, n_angles: int | None = None
) -> float:
    """Largest grid radius R <= search_max below which d||f||^2/dr > 0 and
    df has rank 2 at every tested point."""
    validate_disk(disk)
    if n_angles is None:
        n_angles = max(64, 8 * (max(disk.w1.degree, disk.w2.degree) + 1))
    radii = search_max * 2.0 ** (-np.arange(n_radii) / 4)
    theta = TAU * np.arange(n_angles) / n_angles
    rr, tt = np.meshgrid(radii, theta, indexing="ij")

    (w1, w2), (r1, r2), _ = _radial_terms(disk, tt, rr)
    radial = 2 * np.real(np.conj(w1) * r1 + np.conj(w2) * r2)
    dx, dy = disk.derivatives(rr * np.exp(1j * tt))
    xx = np.sum(dx * dx, axis=-1)
    yy = np.sum(dy * dy, axis=-1)
    xy = np.sum(dx * dy, axis=-1)
    # sigma_min / sigma_max > 1e-12 in terms of the Gram matrix
    rank_two = (xx * yy - xy**2) > 1e-24 * (xx + yy) ** 2
    ok = np.all((radial > 0) & rank_two, axis=1)
    if ok.all():
        return float(search_max)
    smallest_failure = radii[~ok].min()
    good = radii[radii < smallest_failure]
    if good.size == 0:
        raise NoRegularRadius(f"disk {disk.label}: not radially regular down to {radii[-1]:.3g}")
    logger.debug(f"disk {disk.label}: regularity fails at |z|={smallest_failure:.4g}")
    return float(good.max())


def transversality_margin(loop: SampledLoop) -> float:
    """min |<T, J0 p>| / (|T| |p|) over the samples."""
    p, T = loop.points, loop.tangents
    jp = np.stack([-p[:, 1], p[:, 0], -p[:, 3], p[:, 2]], axis=1)
    cosines = np.abs(np.sum(T * jp, axis=1)) / (
        np.linalg.norm(T, axis=1) * np.linalg.norm(p, axis=1)
    )
    return float(cosines.min())
