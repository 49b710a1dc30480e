from pathlib import Path
from typing import List, Optional, Sequence, Union
import asyncio
import math

import numpy as np
import structlog
from pydantic import ValidationError

from ..config import settings
from ..exceptions import ConfigError, ContinuationToolkitError
from ..models.branch import Branch
from ..models.field import ModelParams, SpectralField
from ..schemas.diagnostics import DiagnosticReport
from ..schemas.evolution import EvolutionReport, EvolutionSummary
from ..schemas.run import EvolutionSpec, RunConfig
from ..utils import branch_io
from ..utils.plotting import emit_diagram
from .bifurcation_service import BifurcationService
from .continuation_service import ContinuationService
from .diagnostics_service import DiagnosticsService
from .evolution_service import EvolutionService

logger = structlog.get_logger(__name__)


def format_validation_error(error: ValidationError) -> str:
    """One `field.path: message` entry per validation failure"""
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


class RunService:
    """Coordinates a batch run: traces, files, diagram and diagnostics"""

    def __init__(self):
        self.bifurcation = BifurcationService()
        self.continuation = ContinuationService()
        self.diagnostics = DiagnosticsService()
        self.evolution = EvolutionService()

    def load_config(self, path: Union[str, Path]) -> RunConfig:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        try:
            return RunConfig.model_validate_json(text)
        except ValidationError as e:
            raise ConfigError(f"invalid config {path}: {format_validation_error(e)}")

    def output_dir(self, config: RunConfig) -> Path:
        """OUTPUT_DIR from the environment wins over the config file"""
        return Path(settings.output_dir or config.output_dir)

    def _trace_seed(self, config: RunConfig, k: int, t: float) -> Branch:
        bp = self.bifurcation.make_point(k, config.r, config.s, config.modes)
        seed = self.continuation.start_from_bifurcation(bp, t, config.continuation)
        return self.continuation.trace_branch(seed, config.continuation)

    def _trace_trivial(self, config: RunConfig) -> Branch:
        p = ModelParams(r=config.r, s=config.s, eps=config.trivial.eps_start)
        return self.continuation.trace_trivial(p, config.trivial.eps_stop, config.continuation)

    def trace_labels(self, config: RunConfig) -> List[str]:
        """Branch labels in the order trace_all returns them"""
        labels = ["trivial"] if config.trivial is not None else []
        for seed in config.branches:
            labels.extend(f"C{seed.k}{'+' if t > 0 else '-'}" for t in seed.signed_amplitudes())
        return labels

    async def trace_all(self, config: RunConfig) -> List[Union[Branch, ContinuationToolkitError]]:
        """Trace every configured branch concurrently; results come back in config order.

        A trace that fails numerically comes back as its exception so the other
        branches are kept.
        """
        jobs = []
        if config.trivial is not None:
            jobs.append(asyncio.to_thread(self._trace_trivial, config))
        for seed in config.branches:
            for t in seed.signed_amplitudes():
                jobs.append(asyncio.to_thread(self._trace_seed, config, seed.k, t))
        results = await asyncio.gather(*jobs, return_exceptions=True)
        for result in results:
            if isinstance(result, BaseException) and not isinstance(result, ContinuationToolkitError):
                raise result
        return list(results)

    def write_outputs(self, branches: Sequence[Branch], out: Path, profiles_per_branch: int = 8):
        for branch in branches:
            branch_io.write_branch(branch, out / "branches" / f"{branch.label}.csv")
            branch_io.write_profiles(branch, out / "profiles" / f"{branch.label}.csv", profiles_per_branch)
        if branches:
            emit_diagram(branches, out / "diagram")
        else:
            logger.warning("no branches configured, diagram skipped", output_dir=str(out))

    def write_report(self, report: DiagnosticReport, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.model_dump_json(indent=2))
        return path

    async def run(self, config: RunConfig) -> DiagnosticReport:
        out = self.output_dir(config)
        log = logger.bind(r=config.r, s=config.s, modes=config.modes, output_dir=str(out))
        log.info("run started", seeds=len(config.branches), trivial=config.trivial is not None)

        results = await self.trace_all(config)
        branches = [result for result in results if isinstance(result, Branch)]
        trace_errors = {
            label: str(result) for label, result in zip(self.trace_labels(config), results)
            if not isinstance(result, Branch)
        }
        for label, error in trace_errors.items():
            log.error("trace failed", label=label, error=error)

        self.write_outputs(branches, out, config.profiles_per_branch)
        report = self.diagnostics.build_report(branches, config.continuation.newton.tol_inf)
        if trace_errors:
            report = report.model_copy(update={
                "passed": False,
                "failures": report.failures + [f"{label}:trace_failed" for label in trace_errors],
                "trace_errors": trace_errors,
            })
        self.write_report(report, out / "report.json")

        log.info("run finished", branches=len(branches), passed=report.passed, failures=report.failures)
        return report

    def diagnose_files(self, paths: Sequence[Union[str, Path]], tol_inf: Optional[float] = None) -> DiagnosticReport:
        branches = [branch_io.read_branch(path) for path in paths]
        return self.diagnostics.build_report(branches, tol_inf)

    def initial_field(self, spec: EvolutionSpec, modes: int) -> SpectralField:
        coeffs = np.zeros(modes)
        for k, amplitude in spec.initial_modes.items():
            coeffs[k - 1] = amplitude
        return SpectralField(coeffs)

    def _evolve_one(self, config: RunConfig, spec: EvolutionSpec, out: Path) -> EvolutionSummary:
        p = ModelParams(r=config.r, s=config.s, eps=spec.eps)
        traj = self.evolution.evolve(p, self.initial_field(spec, config.modes), spec.T, spec.dt, spec.sample_every)

        rows = np.column_stack((np.array(traj.times), traj.energy_array()))
        path = branch_io.write_table(out / "evolution" / f"{spec.name}.csv", ["t", "l2_sq", "hr_half_sq", "hs_half_sq"], rows)

        residual = None
        if len(traj.times) >= 3:
            residual = float(max(self.evolution.energy_balance_residual(traj)))
        verdict = None
        if spec.probe_amplitude is not None:
            verdict = self.evolution.stability_probe(
                p, SpectralField.zeros(config.modes), spec.probe_amplitude, spec.probe_T, spec.dt, seed=config.rng_seed,
            ).value
        return EvolutionSummary(
            name=spec.name, eps=spec.eps, T=spec.T, dt=traj.dt, samples=len(traj.times),
            final_l2=math.sqrt(traj.energies[-1][0]), max_energy_residual=residual, verdict=verdict, output=str(path),
        )

    async def evolve(self, config: RunConfig) -> EvolutionReport:
        out = self.output_dir(config)
        summaries = await asyncio.gather(*(
            asyncio.to_thread(self._evolve_one, config, spec, out) for spec in config.evolution
        ))
        report = EvolutionReport(runs=list(summaries))
        out.mkdir(parents=True, exist_ok=True)
        (out / "evolution_report.json").write_text(report.model_dump_json(indent=2))
        logger.info("evolution runs finished", runs=len(summaries), output_dir=str(out))
        return report
