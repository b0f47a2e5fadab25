"""Closed forms and the double-point census for Micallef-White disks.

For a disk (z^N, P(z)) the standard smoothing (z^N, P(z) + lambda z) has a
transverse double point f(z) = f(nu z) for every root of

    S_nu(z) = P(z) - P(nu z) + lambda (1 - nu) z,    nu^N = 1, nu != 1.

Counting these roots with intersection signs gives twice the signed number
of double points; the gcd cascade predicts the same count in closed form.
"""

from __future__ import annotations

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from singlink.braid import algebraic_crossing_number, stable_diagram
from singlink.common import NumericFailure, format_bool_color, round_to_integer
from singlink.diskspec import BranchedDisk, MWForm, MWStage, StageKind, mw_classify
from singlink.tracer import TAU, radial_regularity_radius
from singlink.zpoly import Z, ZPolynomial

logger = logging.getLogger(__name__)

NEWTON_STEPS = 60
ROOT_TOL = 1e-10
DEDUP_TOL = 1e-9
SIGN_TOL = 1e-12
PAIRING_TOL = 1e-8


class RootCountUnstable(NumericFailure):
    """Two seed densities find different numbers of roots"""


class SignDegenerate(NumericFailure):
    """A double point is not transverse at working precision"""


class PairingMismatch(NumericFailure):
    """Roots for nu and 1/nu do not correspond under z -> nu z"""


@dataclass(frozen=True)
class Cascade:
    Q: tuple[int, ...]
    tau: tuple[int, ...]
    sl_prop6: int


def gcd_cascade(m: MWForm) -> Cascade:
    Q = [m.N]
    tau = []
    for stage in m.stages:
        Q.append(math.gcd(Q[-1], stage.mu))
        tau.append(stage.mu - 1 if stage.kind is StageKind.HOLO else -(stage.mu + 1))
    sl = sum((Q[j] - Q[j + 1]) * tau[j] for j in range(len(tau)))
    return Cascade(tuple(Q), tuple(tau), sl)


def root_of_unity(k: int, N: int) -> complex:
    return cmath.exp(2j * math.pi * k / N)


@dataclass(frozen=True)
class RootClass:
    """Roots nu = exp(2 pi i k / N) with nu^Q_j = 1 and nu^Q_{j+1} != 1."""

    index: int
    N: int
    exponents: tuple[int, ...]
    stage: MWStage

    @property
    def values(self) -> list[complex]:
        return [root_of_unity(k, self.N) for k in self.exponents]

    def expected_count(self) -> int:
        return self.stage.mu - 1 if self.stage.kind is StageKind.HOLO else self.stage.mu + 1


def root_classes(m: MWForm) -> list[RootClass]:
    """Partition of the nontrivial N-th roots of unity by the first stage
    that survives in S_nu."""
    Q = gcd_cascade(m).Q
    members: list[list[int]] = [[] for _ in m.stages]
    for k in range(1, m.N):
        # nu^q = 1 exactly when N divides k * q
        j = next(j for j in range(len(m.stages)) if (k * Q[j]) % m.N == 0 and (k * Q[j + 1]) % m.N)
        members[j].append(k)
    return [RootClass(j, m.N, tuple(ks), stage) for j, (ks, stage) in enumerate(zip(members, m.stages))]


def default_lambda(m: MWForm, r: float) -> float:
    if not m.stages:
        return 1e-3
    return min(1e-3, (r / 2) ** (m.stages[0].mu - 1) / 10)


def double_point_polynomial(m: MWForm, nu: complex, lam: float) -> ZPolynomial:
    P = m.P
    return P - P.scale_argument(nu) + lam * (1 - nu) * Z


def _leading_data(stage: MWStage, nu: complex, lam: float) -> tuple[complex, complex, float]:
    if stage.kind is StageKind.HOLO:
        c = stage.coeff * (1 - nu**stage.mu)
    else:
        c = stage.coeff * (1 - nu.conjugate() ** stage.mu)
    lam_nu = lam * (1 - nu)
    rho = (abs(lam_nu) / abs(c)) ** (1.0 / (stage.mu - 1))
    return c, lam_nu, rho


def _seeds(stage: MWStage, nu: complex, lam: float, top_mu: int, density: int) -> np.ndarray:
    c, lam_nu, rho = _leading_data(stage, nu, lam)
    phase = cmath.phase(-lam_nu / c)
    if stage.kind is StageKind.HOLO:
        count = stage.mu - 1
        angles = (phase + TAU * np.arange(count)) / count
    else:
        count = stage.mu + 1
        angles = -(phase + TAU * np.arange(count)) / count
    analytic = rho * np.exp(1j * angles)
    n_angles = 4 * top_mu * density
    ring = np.exp(1j * TAU * (np.arange(n_angles) + 0.5) / n_angles)
    circles = np.concatenate([rho * f * ring for f in (0.5, 1.0, 1.5)])
    return np.concatenate([analytic, circles])


def _newton(S: ZPolynomial, seeds: np.ndarray) -> np.ndarray:
    Sz, Szb = S.wirtinger("dz"), S.wirtinger("dzbar")
    z = seeds.astype(complex)
    with np.errstate(all="ignore"):
        for _ in range(NEWTON_STEPS):
            F = S(z)
            a, b = Sz(z), Szb(z)
            # real Jacobian of S in (x, y): columns a + b and i(a - b)
            cx, cy = a + b, 1j * (a - b)
            det = cx.real * cy.imag - cy.real * cx.imag
            det = np.where(det == 0, np.nan, det)
            du = -(cy.imag * F.real - cy.real * F.imag) / det
            dv = -(-cx.imag * F.real + cx.real * F.imag) / det
            z = z + du + 1j * dv
    return z


def _roots(S: ZPolynomial, seeds: np.ndarray, lam_nu: complex, rho: float, r: float) -> list[complex]:
    z = _newton(S, seeds)
    with np.errstate(all="ignore"):
        residual = np.abs(S(z))
        ok = (
            np.isfinite(z)
            & (np.abs(z) > 1e-6 * rho)
            & (np.abs(z) < r / 2)
            & (residual <= ROOT_TOL * abs(lam_nu) * np.abs(z))
        )
    kept: list[complex] = []
    for root in sorted(z[ok], key=lambda w: (round(cmath.phase(w), 12), abs(w))):
        if all(abs(root - other) > DEDUP_TOL for other in kept):
            kept.append(complex(root))
    return sorted(kept, key=lambda w: (cmath.phase(w) % TAU, abs(w)))


def intersection_sign(smoothed: BranchedDisk, z: complex, nu: complex) -> int:
    """Sign of det[df/dx(z), df/dy(z), df/dx(nu z), df/dy(nu z)]."""
    dx1, dy1 = smoothed.derivatives(z)
    dx2, dy2 = smoothed.derivatives(nu * z)
    frame = np.stack([dx1, dy1, dx2, dy2])
    scale = np.prod(np.linalg.norm(frame, axis=1))
    det = np.linalg.det(frame) / scale
    if abs(det) < SIGN_TOL:
        raise SignDegenerate(f"double point at z={z:.6g} for nu={nu:.6g} is not transverse")
    return 1 if det > 0 else -1


@dataclass(frozen=True)
class CensusRecord:
    k: int
    N: int
    class_index: int
    roots: tuple[tuple[complex, int], ...]
    expected_count: int

    @property
    def nu(self) -> complex:
        return root_of_unity(self.k, self.N)

    @property
    def signed_count(self) -> int:
        return sum(sign for _, sign in self.roots)


@dataclass(frozen=True)
class DoublePointCensus:
    N: int
    lam: float
    r: float
    records: tuple[CensusRecord, ...]
    pairing_residual: float = 0.0
    annulus_clear: bool = True

    @property
    def total_signed(self) -> int:
        return sum(rec.signed_count for rec in self.records)

    @property
    def root_count(self) -> int:
        return sum(len(rec.roots) for rec in self.records)

    @property
    def pair_count(self) -> int:
        return self.root_count // 2

    @property
    def signed_pair_count(self) -> int:
        return self.total_signed // 2

    @property
    def counts_as_expected(self) -> bool:
        return all(len(rec.roots) == rec.expected_count for rec in self.records)


def _census_for_root(m: MWForm, smoothed: BranchedDisk, lam: float, r: float, k: int, cls: RootClass) -> CensusRecord:
    nu = root_of_unity(k, m.N)
    S = double_point_polynomial(m, nu, lam)
    _, lam_nu, rho = _leading_data(cls.stage, nu, lam)
    top_mu = m.stages[-1].mu
    coarse = _roots(S, _seeds(cls.stage, nu, lam, top_mu, 1), lam_nu, rho, r)
    fine = _roots(S, _seeds(cls.stage, nu, lam, top_mu, 2), lam_nu, rho, r)
    if len(coarse) != len(fine):
        raise RootCountUnstable(
            f"nu=exp(2 pi i {k}/{m.N}): {len(coarse)} roots from coarse seeds, {len(fine)} from fine"
        )
    roots = tuple((z, intersection_sign(smoothed, z, nu)) for z in fine)
    expected = cls.expected_count()
    if len(roots) != expected:
        logger.warning(f"nu=exp(2 pi i {k}/{m.N}): {len(roots)} roots, cascade predicts {expected}")
    logger.debug(f"nu=exp(2 pi i {k}/{m.N}) class {cls.index}: {len(roots)} roots near |z|={rho:.4g}")
    return CensusRecord(k, m.N, cls.index, roots, expected)


def _pairing_residual(records: list[CensusRecord], N: int) -> float:
    by_k = {rec.k: rec for rec in records}
    worst = 0.0
    for rec in records:
        partner = by_k[N - rec.k]
        if len(partner.roots) != len(rec.roots):
            return math.inf
        targets = np.array([w for w, _ in partner.roots])
        for z, _ in rec.roots:
            worst = max(worst, float(np.min(np.abs(targets - rec.nu * z))))
    return worst


def _annulus_clear(m: MWForm, records, lam: float, r: float) -> bool:
    radii = np.linspace(r / 2, 2 * r / 3, 17)[1:-1]
    angles = TAU * np.arange(512) / 512
    z = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    for rec in records:
        S = double_point_polynomial(m, rec.nu, lam)
        if np.min(np.abs(S(z))) <= 1e-8 * lam * r:
            return False
    return True


def numeric_census(
    disk: BranchedDisk, lam: float | None = None, r: float = 1.0, workers: int | None = None
) -> DoublePointCensus:
    m = mw_classify(disk)
    if lam is None:
        lam = default_lambda(m, r)
    smoothed = BranchedDisk(disk.w1, disk.w2 + lam * Z, f"{disk.label}+smoothing")
    jobs = [(k, cls) for cls in root_classes(m) for k in cls.exponents]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(lambda job: _census_for_root(m, smoothed, lam, r, *job), jobs))
    records.sort(key=lambda rec: rec.k)

    residual = _pairing_residual(records, m.N) if records else 0.0
    if residual > PAIRING_TOL:
        raise PairingMismatch(f"disk {disk.label}: roots for nu and 1/nu differ by {residual:.3g}")
    clear = _annulus_clear(m, records, lam, r)
    if not clear:
        logger.warning(f"disk {disk.label}: S_nu nearly vanishes in the cut-off annulus")
    census = DoublePointCensus(m.N, lam, r, tuple(records), residual, clear)
    if census.total_signed % 2:
        raise PairingMismatch(f"disk {disk.label}: odd signed root count {census.total_signed}")
    return census


def framing_index(disk: BranchedDisk, lam: float, radius: float | None = None, samples: int = 512) -> int:
    """Winding of the (e1, e2) part of the normal projection of e3 along a
    small circle, for the smoothing (z^N, P + lambda z)."""
    m = mw_classify(disk)
    if radius is None:
        radii = [_leading_data(cls.stage, cls.values[0], lam)[2] for cls in root_classes(m) if cls.exponents]
        radius = 0.1 * min(radii) if radii else lam
    smoothed = BranchedDisk(disk.w1, disk.w2 + lam * Z, disk.label)
    z = radius * np.exp(1j * TAU * np.arange(samples) / samples)
    dx, dy = smoothed.derivatives(z)
    q1 = dx / np.linalg.norm(dx, axis=1)[:, None]
    q2 = dy - np.sum(dy * q1, axis=1)[:, None] * q1
    q2 /= np.linalg.norm(q2, axis=1)[:, None]
    x = np.array([0.0, 0.0, 1.0, 0.0])
    x_normal = x - (q1 @ x)[:, None] * q1 - (q2 @ x)[:, None] * q2
    w = x_normal[:, 0] + 1j * x_normal[:, 1]
    steps = np.angle(np.roll(w, -1) / w)
    index, residual = round_to_integer(steps.sum() / TAU)
    if residual > 0.01:
        raise NumericFailure(f"disk {disk.label}: framing index not resolved ({steps.sum() / TAU:.3f})")
    return index


@dataclass
class CrossCheckVerdict:
    label: str
    N: int
    cascade: Cascade
    census: DoublePointCensus
    braid_index: int
    e_diagram: int
    e_census: int
    e_cascade: int
    framing_index: int
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.e_diagram == self.e_census == self.e_cascade

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @property
    def sl_paper(self) -> int:
        return self.braid_index - self.e_diagram

    @property
    def sl_std(self) -> int:
        return self.e_diagram - self.braid_index

    @property
    def sl_prop6_matches(self) -> str | None:
        matches = [name for name, value in (("n-e", self.sl_paper), ("e-n", self.sl_std)) if value == self.cascade.sl_prop6]
        return "/".join(matches) or None

    @property
    def framing_ok(self) -> bool:
        return self.framing_index == self.N - 1

    def colored_verdict(self) -> str:
        return format_bool_color(self.passed, "PASS", "FAIL")


def crosscheck(
    disk: BranchedDisk,
    epsilon: float,
    lam: float | None = None,
    r: float | None = None,
    samples: int = 4096,
    tol: float = 1e-10,
    e_diagram: int | None = None,
    braid_index: int | None = None,
    workers: int | None = None,
) -> CrossCheckVerdict:
    """Compare the diagram crossing number with the census and the cascade."""
    m = mw_classify(disk)
    regular = radial_regularity_radius(disk)
    r = min(r if r is not None else 1.0, regular)
    cascade = gcd_cascade(m)
    census = numeric_census(disk, lam, r, workers)
    if e_diagram is None or braid_index is None:
        _, diagram = stable_diagram([disk], epsilon, samples, tol, regular_radii=[regular])
        e_diagram = algebraic_crossing_number(diagram, 0)
        braid_index = diagram.braid_index(0)
    verdict = CrossCheckVerdict(
        label=disk.label,
        N=m.N,
        cascade=cascade,
        census=census,
        braid_index=braid_index,
        e_diagram=e_diagram,
        e_census=m.N - 1 + census.total_signed,
        e_cascade=m.N - 1 + cascade.sl_prop6,
        framing_index=framing_index(disk, census.lam),
    )
    if verdict.sl_prop6_matches is None:
        verdict.notes.append(
            f"sl_prop6={cascade.sl_prop6} matches neither n-e={verdict.sl_paper} nor e-n={verdict.sl_std}; "
            f"it equals e-(N-1)={e_diagram - m.N + 1}"
        )
    if not verdict.framing_ok:
        verdict.notes.append(f"framing index {verdict.framing_index}, expected N-1={m.N - 1}")
    logger.info(
        f"{disk.label}: e diagram={verdict.e_diagram} census={verdict.e_census} "
        f"cascade={verdict.e_cascade} -> {verdict.colored_verdict()}"
    )
    return verdict
