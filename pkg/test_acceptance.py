#!/usr/bin/env python3
"""
Desk-scale acceptance runs for relgas: each check finishes in seconds to a
couple of minutes.
"""
import math

import numpy as np
import pytest

from relgas.config import parse_config_text
from relgas.pipeline.diagnostics_stage import DiagnosticsStage
from relgas.pipeline.el_check_stage import ELCheckStage
from relgas.pipeline.euler_stage import EulerStage
from relgas.pipeline.initial_conditions import InitialCondition
from relgas.pipeline.noether_stage import NoetherStage
from relgas.pipeline.pipeline import RelGasPipeline
from relgas.pipeline.solver import SolverConfig, run
from relgas.tools.conservation_laws import dilation_exponent, law_by_name
from relgas.tools.core import g_factor
from relgas.tools.entropy import EntropyProfile
from relgas.tools.eulerian_bridge import g_factor_eulerian
from relgas.tools.lagrangian_grid import Grid
from relgas.tools.symmetry import classify_entropy, delta_invariant, scaled_delta

GAMMAS = (1.4, 5.0 / 3.0, 2.0)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_el_equivalence(gamma):
    report = ELCheckStage().run(EntropyProfile.power(-0.8), gamma, 1000, 1e-8, np.random.default_rng(11))
    assert report["passed"]
    assert report["max_parallel_deviation"] <= 1e-8


@pytest.mark.parametrize("gamma", GAMMAS)
def test_noether_verdict_pattern(gamma):
    report = NoetherStage().run(EntropyProfile.constant(1.0), gamma, 10_000, 1e-10, np.random.default_rng(12))
    assert report["passed"]
    for row in report["table"]:
        if row["generator"] in ("X1", "X2", "X3"):
            assert row["max_relative_residual"] <= 1e-10
        if row["generator"] in ("X4", "X4a"):
            assert row["fraction_separated"] >= 0.99


def test_conservation_drift_over_one_period():
    gamma = 5.0 / 3.0
    sound_speed = math.sqrt(gamma * (gamma - 1.0) / (2.0 * gamma - 1.0))
    config = SolverConfig(gamma=gamma, profile=EntropyProfile.constant(1.0),
                          grid=Grid(0.0, 1.0, 400, "periodic"), cfl=0.4,
                          t_end=1.0 / sound_speed, stride=10)
    traj, report = DiagnosticsStage().run_single(config, InitialCondition("sine-velocity", b=0.1))
    assert traj.completed
    for name in ("T1", "T2", "T5"):
        assert report.laws[name].relative_drift <= 1e-6, name


@pytest.mark.parametrize("profile", [
    EntropyProfile.constant(1.0),
    EntropyProfile.exponential(1.0),
    EntropyProfile.power(dilation_exponent(1.5)),
], ids=["constant", "exponential", "power"])
def test_balance_residual_orders(profile):
    configs = [SolverConfig(gamma=1.5, profile=profile, grid=Grid(1.0, 2.0, n, "wall"), t_end=0.2)
               for n in (100, 200, 400)]
    study = DiagnosticsStage().refinement_study(configs, InitialCondition("sine-velocity", b=0.05),
                                                tol_order=0.3, threads=3)
    assert study["failure"] is None
    if profile.family == "power":
        assert "T4" in study["laws"]
    for name, law in study["laws"].items():
        if not law["exact"]:
            assert 1.6 <= law["balance_order"] <= 2.5, (name, law["balance_order"])


def test_classification_of_canonical_profiles():
    xi = np.linspace(1.0, 2.0, 16)
    cases = [
        (EntropyProfile.constant(2.0), "constant", None),
        (EntropyProfile.exponential(-0.7), "exponential", -0.7),
        (EntropyProfile.power(1.3), "power", 1.3),
        (EntropyProfile.from_expression("1 + xi**2"), "generic", None),
    ]
    for prof, family, q in cases:
        result = classify_entropy(prof, xi)
        assert result.family == family
        if q is not None:
            assert abs(result.q - q) <= 1e-8


def test_delta_invariant():
    xi = np.linspace(0.5, 2.0, 32)
    for prof in (EntropyProfile.exponential(2.0), EntropyProfile.power(-1.5)):
        assert np.max(scaled_delta(*prof.derivs(xi))) <= 1e-14
    assert delta_invariant(*EntropyProfile.from_expression("1 + xi**2").derivs(1.0)) == pytest.approx(8.0)


def _euler_reports(profile, resolutions=(50, 100)):
    stage = EulerStage()
    reports = []
    for n in resolutions:
        grid = Grid(0.0, 1.0, n, "wall")
        config = SolverConfig(gamma=5.0 / 3.0, profile=profile, grid=grid, t_end=0.2)
        traj = run(config, InitialCondition("sine-velocity", b=0.05))
        assert traj.completed
        reports.append(stage.check(traj, profile, config.gamma, grid.size)[1])
    return reports


def test_eulerian_residuals_converge():
    coarse, fine = _euler_reports(EntropyProfile.exponential(1.0))
    for name in ("continuity", "entropy"):
        assert coarse["residuals"][name]["rms"] / fine["residuals"][name]["rms"] > 2.5, name
    assert coarse["constraint"]["kind"] == "exponential"
    assert coarse["constraint"]["rms"] / fine["constraint"]["rms"] > 2.5


def test_eulerian_g_factor_identity():
    rng = np.random.default_rng(13)
    v = rng.uniform(-0.99, 0.99, 10_000)
    p = np.exp(rng.uniform(-2.0, 2.0, 10_000))
    S = np.exp(rng.uniform(-2.0, 2.0, 10_000))
    for gamma in GAMMAS:
        lagrangian = np.asarray(g_factor(v, p, S, gamma))
        assert np.max(np.abs(g_factor_eulerian(v, 1.0 / p, S, gamma) - lagrangian) / lagrangian) <= 1e-12


def test_printed_boost_density_is_reported_not_conserved():
    law = law_by_name("T3", EntropyProfile.constant(1.0), 5.0 / 3.0, form="printed")
    assert law.form == "printed" and law.noether_factor is None


def test_artifacts_identical_across_thread_counts(tmp_path):
    base = parse_config_text(
        "n = 40\nboundary = wall\nic = sine-velocity\nic.b = 0.05\nt_end = 0.2\nstride = 4\n"
        "check.noether = false\nsamples.el = 100\n"
    )
    outputs = []
    for threads in (1, 8):
        out = tmp_path / f"threads{threads}"
        RelGasPipeline(base.with_overrides(out=str(out), threads=threads)).simulate()
        outputs.append(out)
    for name in ("snapshots.csv", "diagnostics.csv", "eulerian.csv", "summary.json"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes(), name


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
