import numpy as np
import pytest

from relgas.errors import InsufficientSnapshots, NotApplicable
from relgas.tools.conservation_laws import (
    builtin_laws,
    charge_drift,
    convergence_order,
    diagnose,
    dilation_exponent,
    eval_density,
    global_charge,
    interior_max,
    law_by_name,
)
from relgas.tools.core import Jet1
from relgas.tools.entropy import EntropyProfile
from relgas.tools.lagrangian_grid import Grid, SimState, Trajectory
from relgas.tools.symmetry import sample_jets


def _names(profile, gamma):
    return [law.name for law in builtin_laws(profile, gamma)]


def test_applicable_laws_per_profile():
    gamma = 1.5
    assert _names(EntropyProfile.constant(1.0), gamma) == ["T1", "T2", "T3", "T5"]
    assert _names(EntropyProfile.exponential(1.0), gamma) == ["T1", "T2", "T3"]
    assert _names(EntropyProfile.power(dilation_exponent(gamma)), gamma) == ["T1", "T2", "T3", "T4"]
    assert _names(EntropyProfile.power(0.5), gamma) == ["T1", "T2", "T3"]
    assert _names(EntropyProfile.from_expression("1 + xi**2"), gamma) == ["T1", "T2", "T3"]


def test_law_by_name_not_applicable():
    with pytest.raises(NotApplicable):
        law_by_name("T5", EntropyProfile.exponential(1.0), 5.0 / 3.0)
    law = law_by_name("T5", EntropyProfile.constant(1.0), 5.0 / 3.0)
    with pytest.raises(NotApplicable):
        eval_density(law, Jet1(xi=0.5, t=0.0, phi=0.5, phi_t=0.0, phi_xi=1.0),
                     EntropyProfile.exponential(1.0), 5.0 / 3.0)


def test_rest_values():
    jet = Jet1(xi=0.3, t=0.0, phi=0.3, phi_t=0.0, phi_xi=1.0)
    prof = EntropyProfile.constant(1.0)
    T1t, T1x = eval_density(law_by_name("T1", prof, 2.0), jet, prof, 2.0)
    T2t, T2x = eval_density(law_by_name("T2", prof, 2.0), jet, prof, 2.0)
    assert T1t == 0.0 and T1x == pytest.approx(1.0)
    assert T2t == pytest.approx(2.0) and T2x == 0.0


def test_printed_t3_keeps_flux_and_changes_density():
    prof = EntropyProfile.constant(1.0)
    gamma = 5.0 / 3.0
    jets = sample_jets(np.random.default_rng(0), 100, prof)
    derived = law_by_name("T3", prof, gamma)
    printed = law_by_name("T3", prof, gamma, form="printed")
    assert printed.form == "printed" and printed.warning
    Dt, Dx = derived.evaluate(jets, 1.0, gamma)
    Pt, Px = printed.evaluate(jets, 1.0, gamma)
    np.testing.assert_allclose(Px, Dx, rtol=1e-14)
    assert np.max(np.abs(Pt - Dt)) > 1e-3


def test_charge_drift_and_orders():
    assert charge_drift([1.0, 1.0, 1.0]) == 0.0
    assert charge_drift([0.0, 1e-3, -2e-3], scale=1.0) == pytest.approx(2e-3)
    assert charge_drift([0.0, 0.0]) == 0.0
    assert convergence_order([0.1, 0.05, 0.025], [1e-2, 2.5e-3, 6.25e-4]) == pytest.approx(2.0)
    assert np.isnan(convergence_order([0.1, 0.05], [1e-2, 0.0]))
    assert interior_max(np.array([5.0, 1.0, -2.0, 7.0])) == 2.0
    assert np.isnan(interior_max(np.array([1.0, 2.0])))


def _rest_trajectory(grid, times):
    snaps = [SimState(t, np.zeros(grid.size), np.zeros(grid.size)) for t in times]
    return Trajectory(grid=grid, snapshots=snaps, dt=times[1] - times[0], stride=1)


def test_diagnose_rest_state_is_exact():
    grid = Grid(0.0, 1.0, 32, "periodic")
    traj = _rest_trajectory(grid, [0.0, 0.1, 0.2, 0.3])
    prof = EntropyProfile.constant(1.0)
    report = diagnose(traj, prof, 5.0 / 3.0, threads=2)
    assert list(report.laws) == ["T1", "T2", "T3", "T5"]
    for d in report.laws.values():
        assert d.max_balance <= 1e-12
        assert d.relative_drift <= 1e-12
    rows = report.rows()
    assert len(rows) == 4 * 4
    assert rows[0][:2] == (0.0, "T1")
    assert report.laws["T2"].charge[0] == pytest.approx(5.0 / 3.0 * 1.5 + 1.0 - 1.0)


def test_global_charge_on_wall_grid():
    grid = Grid(1.0, 2.0, 40, "wall")
    prof = EntropyProfile.power(-1.0)
    state = SimState(0.0, np.zeros(grid.size), np.zeros(grid.size))
    law = law_by_name("T2", prof, 1.5)
    # T2^t at rest: G - S0 = 1 + 2 S0 with k = 2
    exact = 1.0 + 2.0 * np.log(2.0)
    assert global_charge(law, state, grid, prof, 1.5) == pytest.approx(exact, rel=1e-3)


def test_diagnose_needs_three_snapshots_for_residuals():
    grid = Grid(0.0, 1.0, 16, "periodic")
    traj = _rest_trajectory(grid, [0.0, 0.1])
    report = diagnose(traj, EntropyProfile.constant(1.0), 1.4)
    assert report.laws["T1"].balance is None
    assert report.rows()[0][3] is None
    with pytest.raises(InsufficientSnapshots):
        traj.require(3)
