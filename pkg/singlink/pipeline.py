"""Pipelines driving one CLI invocation from a .sing file to a report."""

from __future__ import annotations

import dataclasses
import datetime
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from singlink.braid import (
    algebraic_crossing_number,
    braid_condition_margin,
    mixed_crossing_number,
    stable_diagram,
)
from singlink.census import CrossCheckVerdict, RootClass, crosscheck, gcd_cascade, root_classes
from singlink.common import CrosscheckFailed, format_bool_color
from singlink.config import RunConfig
from singlink.diskspec import (
    DiskClassification,
    MWForm,
    NotMW,
    SingularityConfig,
    load_config,
    mw_classify,
    validate_config,
)
from singlink.invariants import (
    ComponentInvariants,
    CrossCheck,
    InvariantReport,
    linking_matrix,
    normal_degree_branched,
    normal_degree_immersed,
    normal_degree_thm1,
    pushoff_crossing_number,
    singularity_E,
    tangent_degree,
)
from singlink.tracer import SampledLoop, radial_regularity_radius, trace_link, transversality_margin


class Pipeline:
    """Base class: load a configuration, run, log the elapsed time."""

    name = "PIPELINE"

    def __init__(self, path: str | Path, config: RunConfig):
        self.logger = logging.getLogger(__name__)
        self.path = Path(path)
        self.config = config
        self.start_time: datetime.datetime | None = None
        self.singularity: SingularityConfig | None = None
        self.classes: list[DiskClassification] = []

    def load(self) -> SingularityConfig:
        self.singularity = load_config(self.path)
        self.classes = validate_config(self.singularity)
        self.logger.info(
            f"{self.path.name}: {len(self.singularity)} disk(s) "
            + ", ".join(f"{d.label} (N={c.N})" for d, c in zip(self.singularity, self.classes))
        )
        return self.singularity

    def regular_radii(self) -> list[float]:
        radii = [radial_regularity_radius(d, self.config.search_max) for d in self.singularity]
        for d, R in zip(self.singularity, radii):
            self.logger.debug(f"{d.label}: radially regular below |z| = {R:.4g}")
        return radii

    def start(self):
        self.logger.info(f"START {self.name}".center(60, "-"))
        for key, value in dataclasses.asdict(self.config).items():
            self.logger.debug(f"{key}: {value}")
        self.start_time = datetime.datetime.now()
        result = self.run()
        elapsed = datetime.datetime.now() - self.start_time
        self.logger.info(f"{self.name.capitalize()} complete in: {elapsed}")
        return result

    def run(self):
        raise NotImplementedError


@dataclass
class AnalysisResult:
    report: InvariantReport
    loops: list[SampledLoop]
    diagram: object
    census: list[CrossCheckVerdict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.report.passed and all(v.passed for v in self.census)


class AnalyzePipeline(Pipeline):
    name = "ANALYZE"

    def run(self) -> AnalysisResult:
        cfg = self.config
        config = self.load()
        disks = list(config)
        radii = self.regular_radii()
        loops, diagram = stable_diagram(disks, cfg.epsilon, cfg.samples, cfg.tol, cfg.trace_mode, radii)
        self.logger.info(f"axis {diagram.axis.name}, {loops[0].n_samples} samples per loop")

        components = []
        for i, (disk, loop, cls) in enumerate(zip(disks, loops, self.classes)):
            e = algebraic_crossing_number(diagram, i)
            e_pushoff = pushoff_crossing_number(loop, disk)
            winding = diagram.windings[i]
            components.append(
                ComponentInvariants(
                    label=disk.label,
                    N=cls.N,
                    braid_index=diagram.braid_index(i),
                    winding_sign=int(np.sign(winding)),
                    e=e,
                    e_pushoff=e_pushoff,
                    braid_word=diagram.component_words[i],
                    braid_margin=braid_condition_margin(loop, diagram.axis),
                    transversality_margin=transversality_margin(loop),
                )
            )
            self.logger.debug(f"{disk.label}: n={diagram.braid_index(i)} e={e} push-off e={e_pushoff}")

        lk = linking_matrix(loops)
        E = singularity_E([c.e for c in components], lk)
        report = InvariantReport(
            epsilon=cfg.epsilon,
            components=components,
            lk=lk,
            E=E,
            axis=diagram.axis.name,
            formulas=self.formulas(E, components),
        )
        self.cross_check(report, diagram)
        self.annotate(report)
        report.diagnostics = {
            "margins": {
                "axis": diagram.axis.margin,
                **{c.label: {"braid": c.braid_margin, "transversality": c.transversality_margin} for c in components},
            },
            "residuals": {loop.disk_label: loop.sphere_residual() for loop in loops},
            "samples": loops[0].n_samples,
        }

        result = AnalysisResult(report, loops, diagram)
        if len(disks) == 1:
            result.census = self.census_for_single_disk(disks[0], components[0])
        self.logger.info(
            f"E = {E}, cross-checks " + format_bool_color(result.passed, "PASS", "FAIL")
        )
        return result

    def formulas(self, E: int, components: list[ComponentInvariants]) -> dict[str, int | None]:
        cfg = self.config
        orders = [c.N - 1 for c in components]
        formulas: dict[str, int | None] = {
            "tangent_degree": None,
            "normal_degree_immersed": None,
            "normal_degree_thm1": None,
        }
        if cfg.euler_char is not None:
            formulas["tangent_degree"] = tangent_degree(cfg.euler_char, [m for m in orders if m])
        if cfg.selfint is not None:
            formulas["normal_degree_thm1"] = normal_degree_thm1(cfg.selfint, [E])
            if cfg.double_points is not None:
                formulas["normal_degree_immersed"] = normal_degree_immersed(cfg.selfint, cfg.double_points)
                if len(components) == 1:
                    formulas["normal_degree_branched"] = normal_degree_branched(
                        cfg.selfint, cfg.double_points, [components[0].e]
                    )
        return formulas

    def cross_check(self, report: InvariantReport, diagram) -> None:
        checks = report.cross_checks
        for c in report.components:
            checks.append(
                CrossCheck(f"pushoff:{c.label}", c.e == c.e_pushoff, f"diagram {c.e}, push-off {c.e_pushoff}")
            )
        n = len(report.components)
        for i in range(n):
            for j in range(i + 1, n):
                mixed = mixed_crossing_number(diagram, i, j)
                a, b = report.components[i].label, report.components[j].label
                checks.append(
                    CrossCheck(
                        f"lk-diagram:{a}-{b}",
                        mixed == 2 * report.lk[i][j],
                        f"mixed crossings {mixed}, Gauss lk {report.lk[i][j]}",
                    )
                )
        checks.append(CrossCheck("E-recomputed", report.recomputed_E() == report.E, f"E = {report.E}"))
        for check in checks:
            if not check.passed:
                self.logger.warning(f"cross-check {check.name} failed: {check.detail}")

    def annotate(self, report: InvariantReport) -> None:
        regular = [c for c in report.components if c.N == 1]
        for i, a in enumerate(regular):
            for b in regular[i + 1 :]:
                ia = report.components.index(a)
                ib = report.components.index(b)
                report.notes.append(
                    f"{a.label} and {b.label} meet in a transverse double point: lk = {report.lk[ia][ib]}, "
                    f"contributing 2*lk = {2 * report.lk[ia][ib]} to E; a quoted lk = +-2 is this contribution"
                )

    def census_for_single_disk(self, disk, component: ComponentInvariants) -> list[CrossCheckVerdict]:
        try:
            mw_classify(disk)
        except NotMW as e:
            self.logger.debug(f"no census: {e}")
            return []
        cfg = self.config
        verdict = crosscheck(
            disk,
            cfg.epsilon,
            cfg.lam,
            cfg.r,
            cfg.samples,
            cfg.tol,
            e_diagram=component.e,
            braid_index=component.braid_index,
            workers=cfg.workers,
        )
        return [verdict]


@dataclass
class CensusEntry:
    label: str
    form: MWForm | None = None
    classes: list[RootClass] = field(default_factory=list)
    verdict: CrossCheckVerdict | None = None
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.verdict is None or self.verdict.passed


@dataclass
class CensusResult:
    epsilon: float
    entries: list[CensusEntry]

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)


class CensusPipeline(Pipeline):
    name = "CENSUS"

    def run(self) -> CensusResult:
        cfg = self.config
        entries = []
        for disk in self.load():
            try:
                form = mw_classify(disk)
            except NotMW as e:
                self.logger.warning(str(e))
                entries.append(CensusEntry(disk.label, error=e.reason))
                continue
            cascade = gcd_cascade(form)
            self.logger.info(f"{disk.label}: Q={cascade.Q} tau={cascade.tau} sl_prop6={cascade.sl_prop6}")
            verdict = crosscheck(
                disk, cfg.epsilon, cfg.lam, cfg.r, cfg.samples, cfg.tol, workers=cfg.workers
            )
            entries.append(CensusEntry(disk.label, form, root_classes(form), verdict))
        return CensusResult(cfg.epsilon, entries)


class TracePipeline(Pipeline):
    name = "TRACE"

    def run(self) -> list[SampledLoop]:
        cfg = self.config
        config = self.load()
        radii = self.regular_radii()
        loops = [
            trace_link(d, cfg.epsilon, cfg.samples, cfg.tol, cfg.trace_mode, R)
            for d, R in zip(config, radii)
        ]
        for loop in loops:
            self.logger.info(
                f"{loop.disk_label}: {loop.n_samples} samples, sphere residual {loop.sphere_residual():.2e}"
            )
        return loops


def raise_on_failure(result: AnalysisResult | CensusResult) -> None:
    if not result.passed:
        raise CrosscheckFailed("independent routes disagree, see the report")
