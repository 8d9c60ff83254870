from typing import Any, Dict, List
import logging
import os

import numpy as np

from ..config import RunConfig
from ..tools.artifact_export import write_csv, write_json
from ..tools.lagrangian_grid import spatial_derivs
from .classify_stage import ClassifyStage
from .diagnostics_stage import DiagnosticsStage, balance_summary, drift_summary
from .el_check_stage import ELCheckStage
from .euler_stage import EulerStage
from .noether_stage import NoetherStage
from .solver import run

logger = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ("t", "xi", "phi", "phi_t", "phi_xi", "m", "v")
DIAGNOSTIC_COLUMNS = ("t", "law", "charge", "balance_residual", "max_div_residual")


class RelGasPipeline:
    """
    Orchestrates one CLI command over the stages:

        simulate          solver -> snapshots.csv, diagnostics.csv (+ eulerian.csv)
        verify-el         el_check_stage
        check-noether     noether_stage
        classify-entropy  classify_stage
        diagnose          diagnostics_stage (single run + refinement study)
        to-euler          euler_stage (single run + refinement study)

    Every report carries the config hash.  A report with a "failure" entry
    means a runtime guard stopped the solver; "passed": false means a
    verification did not meet its tolerance.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.threads = config.effective_threads()
        self.el = ELCheckStage()
        self.noether = NoetherStage()
        self.classifier = ClassifyStage()
        self.diagnostics = DiagnosticsStage()
        self.euler = EulerStage()
        self.logs: List[str] = []

    def _log(self, message: str) -> None:
        self.logs.append(message)
        logger.info(message)

    def _path(self, name: str) -> str:
        return os.path.join(self.config.out, name)

    def _base(self, command: str) -> Dict[str, Any]:
        return {"command": command, "config_hash": self.config.config_hash, "seed": self.config.seed}

    def _finish(self, report: Dict[str, Any], name: str) -> Dict[str, Any]:
        report["logs"] = list(self.logs)
        write_json(self._path(name), report)
        return report

    def _euler_nx(self, n: int) -> int:
        if self.config.euler_nx:
            return max(8, int(round(self.config.euler_nx * n / self.config.n)))
        return self.config.grid(n).size

    # ------------------------------------------------------------------ #
    def verify_el(self) -> Dict[str, Any]:
        c = self.config
        report = self._base("verify-el")
        report.update(self.el.run(c.profile(), c.gamma, c.samples_el, c.tol_el,
                                  np.random.default_rng(c.seed), oracle=c.el_oracle))
        return self._finish(report, "verify_el.json")

    def check_noether(self) -> Dict[str, Any]:
        c = self.config
        report = self._base("check-noether")
        report.update(self.noether.run(c.profile(), c.gamma, c.samples_noether, c.tol_noether,
                                       np.random.default_rng(c.seed)))
        return self._finish(report, "check_noether.json")

    def classify(self) -> Dict[str, Any]:
        c = self.config
        report = self._base("classify-entropy")
        report.update(self.classifier.run(c.profile(), c.gamma, c.xi_min, c.xi_max,
                                          c.samples_classify, c.tol_classify))
        return self._finish(report, "classify_entropy.json")

    # ------------------------------------------------------------------ #
    def simulate(self) -> Dict[str, Any]:
        c = self.config
        solver_config = c.solver_config()
        grid = solver_config.grid
        traj, diag = self.diagnostics.run_single(solver_config, c.initial_condition(), c.config_hash,
                                                 printed=c.laws_printed, threads=self.threads)
        self._log(f"Simulated {len(traj.snapshots)} snapshots ({traj.n_steps} steps, dt={traj.dt:.6g})")

        def snapshot_rows():
            for state in traj.snapshots:
                phi = state.phi(grid)
                phi_xi, _, _ = spatial_derivs(state, grid)
                for j in range(grid.size):
                    yield (float(state.t), float(grid.xi[j]), float(phi[j]), float(state.w[j]),
                           float(phi_xi[j]), float(1.0 / phi_xi[j]), float(state.w[j]))

        artifacts = {
            "snapshots": write_csv(self._path("snapshots.csv"), SNAPSHOT_COLUMNS, snapshot_rows()),
            "diagnostics": write_csv(self._path("diagnostics.csv"), DIAGNOSTIC_COLUMNS, diag.rows()),
        }
        report = self._base("simulate")
        report.update({
            "n": grid.n,
            "boundary": grid.boundary,
            "profile": solver_config.profile.describe(),
            "initial_condition": c.initial_condition().describe(),
            "dt": traj.dt,
            "n_steps": traj.n_steps,
            "snapshot_times": traj.times,
            "guard_events": traj.guard_events,
            "failure": traj.failure,
            "drift": drift_summary(diag),
            "max_balance": balance_summary(diag),
            "flux_flip_suggested": {n: d.flux_flip_suggested for n, d in diag.laws.items()},
        })
        if traj.failure is None and c.check_euler and len(traj.snapshots) >= 3:
            snapshots, euler = self.euler.check(traj, solver_config.profile, c.gamma,
                                                self._euler_nx(c.n), self.threads)
            header, rows = self.euler.table(snapshots, c.gamma, solver_config.profile,
                                            form="printed" if c.laws_printed else "derived")
            artifacts["eulerian"] = write_csv(self._path("eulerian.csv"), header, rows)
            report["euler"] = euler
        checks: Dict[str, Any] = {}
        if c.check_el:
            checks["el"] = self.el.run(c.profile(), c.gamma, c.samples_el, c.tol_el,
                                       np.random.default_rng(c.seed), oracle=c.el_oracle)["passed"]
        if c.check_noether:
            checks["noether"] = self.noether.run(c.profile(), c.gamma, c.samples_noether, c.tol_noether,
                                                 np.random.default_rng(c.seed))["passed"]
        if c.check_classify:
            checks["classify"] = self.classifier.run(c.profile(), c.gamma, c.xi_min, c.xi_max,
                                                     c.samples_classify, c.tol_classify)["passed"]
        report["checks"] = checks
        report["artifacts"] = artifacts
        return self._finish(report, "summary.json")

    def diagnose(self) -> Dict[str, Any]:
        c = self.config
        ic = c.initial_condition()
        traj, diag = self.diagnostics.run_single(c.solver_config(), ic, c.config_hash,
                                                 printed=c.laws_printed, threads=self.threads)
        rows = write_csv(self._path("diagnostics.csv"), DIAGNOSTIC_COLUMNS, diag.rows())
        report = self._base("diagnose")
        report.update({
            "n": c.n,
            "failure": traj.failure,
            "guard_events": traj.guard_events,
            "drift": drift_summary(diag),
            "max_balance": balance_summary(diag),
            "artifacts": {"diagnostics": rows},
        })
        if traj.failure is not None:
            return self._finish(report, "diagnose.json")
        if c.check_diagnostics:
            configs = [c.solver_config(n) for n in c.resolutions()]
            study = self.diagnostics.refinement_study(configs, ic, c.tol_order, c.config_hash, self.threads)
            report["refinement"] = study
            report["failure"] = study["failure"]
            report["passed"] = study["passed"]
        return self._finish(report, "diagnose.json")

    def to_euler(self) -> Dict[str, Any]:
        c = self.config
        ic = c.initial_condition()
        solver_config = c.solver_config()
        traj = run(solver_config, ic, config_hash=c.config_hash)
        report = self._base("to-euler")
        report.update({"n": c.n, "failure": traj.failure, "guard_events": traj.guard_events})
        if traj.failure is not None:
            return self._finish(report, "to_euler.json")
        snapshots, euler = self.euler.check(traj, solver_config.profile, c.gamma,
                                            self._euler_nx(c.n), self.threads)
        header, rows = self.euler.table(snapshots, c.gamma, solver_config.profile,
                                        form="printed" if c.laws_printed else "derived")
        report["artifacts"] = {"eulerian": write_csv(self._path("eulerian.csv"), header, rows)}
        report["columns"] = header
        report["euler"] = euler
        if c.check_euler:
            runs = [(c.solver_config(n), self._euler_nx(n)) for n in c.resolutions()]
            study = self.euler.refinement_study(runs, ic, c.config_hash, self.threads)
            report["refinement"] = study
            report["failure"] = study["failure"]
            report["passed"] = study["passed"]
        return self._finish(report, "to_euler.json")
