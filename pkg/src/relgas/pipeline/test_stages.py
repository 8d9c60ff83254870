import numpy as np
import pytest

from relgas.errors import InsufficientSnapshots
from relgas.pipeline.classify_stage import ClassifyStage
from relgas.pipeline.diagnostics_stage import DiagnosticsStage, diagnostic_laws, drift_summary
from relgas.pipeline.el_check_stage import ELCheckStage
from relgas.pipeline.euler_stage import EulerStage, constraint_kind
from relgas.pipeline.initial_conditions import InitialCondition
from relgas.pipeline.noether_stage import NoetherStage, noether_suite
from relgas.pipeline.solver import SolverConfig, run
from relgas.tools.entropy import EntropyProfile
from relgas.tools.lagrangian_grid import Grid

GAMMA = 5.0 / 3.0


def _solver(n=32, boundary="periodic", profile=None, **kwargs):
    return SolverConfig(gamma=GAMMA, profile=profile or EntropyProfile.constant(1.0),
                        grid=Grid(0.0, 1.0, n, boundary), **kwargs)


@pytest.mark.parametrize("oracle", ["finite-difference", "symbolic"])
def test_el_stage_passes(oracle):
    report = ELCheckStage().run(EntropyProfile.exponential(0.5), GAMMA, 300, 1e-8,
                                np.random.default_rng(1), oracle=oracle)
    assert report["passed"]
    assert report["oracle"] == oracle
    assert report["max_relative_el_residual"] < 1e-12
    assert set(report["worst_jet"]) == {"xi", "phi_t", "phi_xi", "S0"}


def test_el_stage_fails_at_zero_tolerance():
    report = ELCheckStage().run(EntropyProfile.constant(1.0), 1.4, 300, 0.0, np.random.default_rng(2))
    assert not report["passed"]


def test_noether_suite_roles():
    roles = [role for role, _ in noether_suite(EntropyProfile.exponential(2.5), 1.5)]
    assert roles == ["configured", "constant", "exponential", "power-matched", "power-mismatched"]
    suite = dict(noether_suite(EntropyProfile.exponential(2.5), 1.5))
    assert suite["exponential"].effective_q == 2.5
    assert suite["power-matched"].q == pytest.approx(-1.0)


@pytest.mark.parametrize("gamma", [1.4, 5.0 / 3.0, 2.0])
def test_noether_stage_matches_expectations(gamma):
    report = NoetherStage().run(EntropyProfile.constant(1.0), gamma, 400, 1e-10, np.random.default_rng(3))
    assert report["passed"], [r for r in report["table"] if not r["match"]]
    verdicts = {(r["role"], r["generator"]): r["verdict"] for r in report["table"]}
    assert verdicts[("constant", "X4")] == "not variational"
    assert verdicts[("constant", "X5")] == "variational"
    assert verdicts[("power-matched", "X4b")] == "variational"
    assert verdicts[("power-mismatched", "X4b")] == "not variational"


def test_noether_stage_on_custom_profile():
    report = NoetherStage().run(EntropyProfile.from_expression("exp(3*xi)"), GAMMA, 200, 1e-10,
                                np.random.default_rng(4))
    configured = [r["generator"] for r in report["table"] if r["role"] == "configured"]
    assert configured == ["X1", "X2", "X3", "X4a"]
    assert report["passed"]


def test_classify_stage():
    stage = ClassifyStage()
    report = stage.run(EntropyProfile.exponential(2.0), GAMMA, 0.0, 1.0, 16, 1e-8)
    assert report["passed"] and report["family"] == "exponential"
    assert all(row["admitted"] for row in report["determining"])

    report = stage.run(EntropyProfile.from_expression("1/xi"), GAMMA, 1.0, 2.0, 16, 1e-8)
    assert report["family"] == "power" and report["passed"]

    report = stage.run(EntropyProfile.from_expression("1 + xi**2"), GAMMA, 0.0, 1.0, 16, 1e-8)
    assert report["family"] == "generic"
    assert [row["generator"] for row in report["determining"]] == ["X1", "X2", "X3"]


def test_diagnostic_laws_printed_variant():
    names = [law.name for law in diagnostic_laws(EntropyProfile.constant(1.0), GAMMA, printed=True)]
    assert names == ["T1", "T2", "T3", "T5", "T3:printed"]
    names = [law.name for law in diagnostic_laws(EntropyProfile.exponential(1.0), GAMMA)]
    assert names == ["T1", "T2", "T3"]


def test_diagnostics_on_rest_run():
    traj, report = DiagnosticsStage().run_single(_solver(t_end=0.2), InitialCondition(), config_hash="abc")
    assert traj.completed and report.config_hash == "abc"
    assert all(value <= 1e-12 for value in drift_summary(report).values())
    study = DiagnosticsStage().refinement_study([_solver(n=n, t_end=0.2) for n in (16, 32)],
                                                InitialCondition(), tol_order=0.3, threads=2)
    assert study["passed"] and study["failure"] is None
    assert all(law["exact"] for law in study["laws"].values())


def test_refinement_needs_three_snapshots():
    configs = [_solver(n=16, t_end=0.05, stride=1000)]
    with pytest.raises(InsufficientSnapshots):
        DiagnosticsStage().refinement_study(configs, InitialCondition(), tol_order=0.3)


def test_constraint_kind():
    assert constraint_kind(EntropyProfile.exponential(1.5)) == ("exponential", 1.5)
    assert constraint_kind(EntropyProfile.power(-1.0)) == ("power", -1.0)
    assert constraint_kind(EntropyProfile.power(-1.0).translated(-1.0)) is None
    assert constraint_kind(EntropyProfile.constant(1.0)) is None


def test_eulerian_table_layout():
    config = _solver(n=16, boundary="wall", t_end=0.1, stride=2)
    traj = run(config, InitialCondition("sine-velocity", b=0.05))
    stage = EulerStage()
    snapshots, report = stage.check(traj, config.profile, GAMMA, nx=17)
    assert report["residuals"]["continuity"]["gated"]
    assert report["constraint"] is None
    header, rows = stage.table(snapshots, GAMMA, config.profile)
    laws = ("T1", "T2", "T3", "T5")
    expected = ["t", "x", "v", "m", "n", "S"]
    expected += [f"{name}_{c}" for name in laws for c in ("t", "x")]
    expected += [f"{name}_cons_{c}" for name in laws for c in ("t", "x")]
    assert header == expected
    assert len(rows) == 17 * len(snapshots)
    assert all(len(row) == len(header) for row in rows)
